"""Render previous run outputs to human-readable text and figures.

Reads the JSON-lines / CSV files the other subcommands write and produces a
report.txt plus PNG figures in the output directory.
"""

from __future__ import annotations

import csv
import json
import os

import numpy as np

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

__all__ = ["render_report"]


def _load_jsonl(path):
    with open(path) as fh:
        return [json.loads(line) for line in fh if line.strip()]


def _contacts_figures(records, outdir, made):
    if not records:
        return
    Z = np.array([np.array(r["z_re"]) + 1j * np.array(r["z_im"]) for r in records])
    comp = np.array([r["component"] for r in records])
    idx = [r["index"] for r in records]
    n = Z.shape[1]

    fig, ax = plt.subplots(figsize=(5.2, 4.2))
    sc = ax.scatter(np.abs(Z[:, 0]), np.abs(Z[:, 1]), c=comp, cmap="tab10", s=14)
    ax.set_xlabel(r"$|z_1|$")
    ax.set_ylabel(r"$|z_2|$")
    ax.set_title("contact moduli by component")
    fig.colorbar(sc, ax=ax, label="component")
    fig.tight_layout()
    path = os.path.join(outdir, "contacts_moduli.png")
    fig.savefig(path, dpi=150)
    plt.close(fig)
    made.append(path)

    fig, ax = plt.subplots(figsize=(4.6, 3.4))
    labels = sorted({("deg" if i is None else i) for i in idx}, key=str)
    counts = [sum(1 for i in idx if ("deg" if i is None else i) == l) for l in labels]
    ax.bar([str(l) for l in labels], counts, color="#4477aa")
    ax.set_xlabel("Morse index")
    ax.set_ylabel("contacts")
    ax.set_title("index histogram")
    fig.tight_layout()
    path = os.path.join(outdir, "contacts_index_hist.png")
    fig.savefig(path, dpi=150)
    plt.close(fig)
    made.append(path)


def _orbit_figures(records, outdir, made):
    if not records:
        return
    orbits = {}
    for r in records:
        orbits.setdefault(r["orbit"], []).append(r)
    fig, ax = plt.subplots(figsize=(5.2, 4.0))
    for k, rows in sorted(orbits.items()):
        t = [r["time"] for r in rows]
        gv = [r["g"] for r in rows]
        ax.plot(t, gv, lw=0.9)
    ax.set_xlabel("flow time")
    ax.set_ylabel("g")
    ax.set_title("Morse value along orbits")
    fig.tight_layout()
    path = os.path.join(outdir, "orbits_g.png")
    fig.savefig(path, dpi=150)
    plt.close(fig)
    made.append(path)

    fig, ax = plt.subplots(figsize=(4.6, 4.4))
    for k, rows in sorted(orbits.items()):
        z1 = np.array([r["z_re"][0] + 1j * r["z_im"][0] for r in rows])
        ax.plot(z1.real, z1.imag, lw=0.9)
        ax.plot(z1.real[-1], z1.imag[-1], "k.", ms=4)
    ax.set_xlabel(r"Re $z_1$")
    ax.set_ylabel(r"Im $z_1$")
    ax.set_title(r"orbit projection to the $z_1$ plane")
    ax.set_aspect("equal", adjustable="datalim")
    fig.tight_layout()
    path = os.path.join(outdir, "orbits_plane.png")
    fig.savefig(path, dpi=150)
    plt.close(fig)
    made.append(path)


def _scan_figure(rows, outdir, made):
    if not rows:
        return
    t = [float(r["t_abs"]) for r in rows]
    v = [float(r["min_rel_eigenvalue"]) for r in rows]
    fig, ax = plt.subplots(figsize=(5.4, 3.8))
    ax.semilogy(t, np.maximum(v, 1e-16), "o-", ms=3, lw=0.9, color="#cc6677")
    ax.set_xlabel("|t|")
    ax.set_ylabel("min relative |eigenvalue|")
    ax.set_title("degeneracy scan across fibers")
    fig.tight_layout()
    path = os.path.join(outdir, "bifurcation_scan.png")
    fig.savefig(path, dpi=150)
    plt.close(fig)
    made.append(path)


def render_report(outdir, contacts=None, orbits=None, scan=None, census=None):
    """Write report.txt and figures; returns the list of files created."""
    os.makedirs(outdir, exist_ok=True)
    made = []
    lines = ["run report", "=" * 40]

    if contacts:
        records = _load_jsonl(contacts)
        lines.append(f"\ncontacts: {len(records)} records from {contacts}")
        comps = {}
        for r in records:
            comps.setdefault(r["component"], []).append(r)
        for cid in sorted(comps):
            rows = comps[cid]
            idx = sorted({str(r["index"]) for r in rows})
            tv = all(r["transversal"] for r in rows)
            ndeg = sum(r["degenerate"] for r in rows)
            lines.append(
                f"  component {cid}: {len(rows)} points, indices {{{','.join(idx)}}}, "
                f"transversal={tv}, degenerate={ndeg}"
            )
        res = max((r["residual"] for r in records), default=0.0)
        lines.append(f"  max residual: {res:.3e}")
        _contacts_figures(records, outdir, made)

    if orbits:
        records = _load_jsonl(orbits)
        lines.append(f"\norbits: {len(records)} samples from {orbits}")
        ends = [r for r in records if r.get("termination")]
        for r in ends:
            lines.append(
                f"  orbit {r['orbit']}: termination={r['termination']}, "
                f"g={r['g']:.6g}, drift={r.get('drift')}"
            )
        _orbit_figures(records, outdir, made)

    if scan:
        with open(scan) as fh:
            rows = list(csv.DictReader(fh))
        lines.append(f"\nbifurcation scan: {len(rows)} grid points from {scan}")
        if rows:
            vals = [float(r["min_rel_eigenvalue"]) for r in rows]
            i0 = int(np.argmin(vals))
            lines.append(
                f"  deepest dip at |t| = {rows[i0]['t_abs']} "
                f"(min rel eigenvalue {vals[i0]:.3e})"
            )
        _scan_figure(rows, outdir, made)

    if census:
        with open(census) as fh:
            rows = list(csv.DictReader(fh))
        lines.append(f"\nsphere scan census: {len(rows)} component rows from {census}")
        by_eps = {}
        for r in rows:
            by_eps.setdefault(r["eps"], []).append(r)
        for eps in sorted(by_eps, key=float, reverse=True):
            rs = by_eps[eps]
            lines.append(
                f"  eps={eps}: {len(rs)} components; "
                + "; ".join(f"#{r['component']} size={r['size']} idx={r['indices']}" for r in rs)
            )

    report_path = os.path.join(outdir, "report.txt")
    with open(report_path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
    made.insert(0, report_path)
    return made
