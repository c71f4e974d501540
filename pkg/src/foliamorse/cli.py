"""Command-line entry point.

Exit codes: 0 success, 1 validation error, 2 numerical failure (nothing
converged / no window found), 3 reproduction check failure.  Errors also
emit a machine-readable JSON line on stderr.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys

import numpy as np

from .config import (
    RunConfig,
    build_model,
    build_morse,
    parse_complex,
    parse_model_shorthand,
    parse_morse_shorthand,
)
from .errors import FoliationError, InputError
from .experiments import EXAMPLE_IDS, bifurcation_scan, reproduce, sphere_census_scan
from .flow import FlowOptions, integrate_orbit
from .morse import euler_count, group_by_leaf
from .polar import (
    SolveOptions,
    contacts_to_jsonl,
    find_contacts_on_fiber,
    find_contacts_on_sphere,
)

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_NUMERICAL = 2
EXIT_REPRODUCTION = 3


def _diag(kind, reason, **extra):
    payload = {"error": kind, "reason": reason}
    payload.update(extra)
    print(json.dumps(payload), file=sys.stderr)


def _solve_opts(cfg):
    return SolveOptions(
        tol=cfg.tol,
        dedup=cfg.dedup,
        trust_radius=cfg.trust_radius,
        rank_tol=cfg.rank_tol,
        degeneracy_tol=cfg.degeneracy_tol,
        link_scale=cfg.link_scale,
        workers=cfg.workers,
        rng_seed=cfg.rng_seed,
    )


def _flow_opts(cfg):
    return FlowOptions(
        origin_radius=cfg.origin_radius,
        exit_radius=cfg.exit_radius,
        budget=cfg.budget,
        drift_tol=cfg.drift_tol,
    )


def _write(path, text):
    if path:
        with open(path, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _load_config(args):
    if getattr(args, "config", None):
        cfg = RunConfig.from_text(open(args.config).read())
    else:
        cfg = RunConfig()
    cfg.command = args.cmd
    for name in (
        "eps", "tol", "seeds", "trust_radius", "dedup", "rank_tol", "workers",
        "rng_seed", "out", "summary", "direction", "n_orbits", "budget",
        "origin_radius", "exit_radius", "q", "grid",
    ):
        val = getattr(args, name.replace("-", "_"), None)
        if val is not None:
            setattr(cfg, name, val)
    if getattr(args, "model", None):
        cfg.model = parse_model_shorthand(args.model)
    if getattr(args, "morse", None):
        n = cfg.model.get("n") if cfg.model else None
        if n is None:
            raise InputError("give --model before --morse so the dimension is known")
        cfg.morse = parse_morse_shorthand(args.morse, n)
    if getattr(args, "eps_list", None):
        cfg.eps_list = tuple(float(x) for x in args.eps_list.split(","))
    if getattr(args, "fiber", None):
        cfg.fiber = parse_complex(args.fiber)
    if getattr(args, "z0", None):
        cfg.z0 = tuple(parse_complex(x) for x in args.z0.split(","))
    if getattr(args, "tmin", None) is not None:
        cfg.t_min = args.tmin
    if getattr(args, "tmax", None) is not None:
        cfg.t_max = args.tmax
    cfg.__post_init__()  # re-validate after overrides
    return cfg


def _require_model(cfg):
    if not cfg.model:
        raise InputError("a model is required (--model or a config file)")
    model = build_model(cfg.model)
    if not cfg.morse:
        cfg.morse = {"kind": "round", "n": model.n}
    g = build_morse(cfg.morse)
    if g.n != model.n:
        raise InputError(f"model lives on C^{model.n} but the Morse function on C^{g.n}")
    return model, g


def cmd_analyze(cfg):
    model, g = _require_model(cfg)
    eps = cfg.eps if cfg.eps is not None else 1.0
    result = find_contacts_on_sphere(model, g, eps, n_seeds=cfg.seeds, opts=_solve_opts(cfg))
    _write(cfg.out, contacts_to_jsonl(result.points))
    summary = {
        "command": "analyze",
        "eps": eps,
        "n_contacts": len(result.points),
        "n_components": len(result.census),
        "components": [
            {
                "id": c.component_id,
                "size": c.size,
                "indices": {str(k): v for k, v in c.index_histogram.items()},
                "transversal": c.all_transversal,
                "smooth": c.all_smooth,
                "line": c.line_flag,
            }
            for c in result.census
        ],
        "diagnostics": result.diagnostics,
    }
    if cfg.summary:
        with open(cfg.summary, "w") as fh:
            json.dump(summary, fh, indent=2)
    note = result.diagnostics.get("note")
    print(
        f"analyze: {len(result.points)} contacts in {len(result.census)} components "
        f"on the sphere eps={eps}" + (f" ({note})" if note else "")
    )
    return EXIT_OK


def cmd_flow(cfg):
    model, g = _require_model(cfg)
    starts = []
    if cfg.z0:
        starts.append(np.array(cfg.z0, dtype=np.complex128))
    if cfg.n_orbits:
        rng = np.random.default_rng(cfg.rng_seed)
        for _ in range(cfg.n_orbits):
            z = rng.standard_normal(model.n) + 1j * rng.standard_normal(model.n)
            z = z / np.linalg.norm(z) * rng.uniform(0.4, 1.2)
            starts.append(z)
    if not starts:
        raise InputError("flow needs --z0 and/or --n-orbits")
    lines = []
    outcomes = {}
    for k, z0 in enumerate(starts):
        trace = integrate_orbit(
            model, g, z0, cfg.direction, _flow_opts(cfg), _solve_opts(cfg)
        )
        outcomes[trace.termination] = outcomes.get(trace.termination, 0) + 1
        last = len(trace.samples) - 1
        for i, (t, z, gv) in enumerate(trace.samples):
            rec = {
                "orbit": k,
                "time": float(t),
                "z_re": [float(x) for x in z.real],
                "z_im": [float(x) for x in z.imag],
                "g": float(gv),
                "termination": trace.termination if i == last else None,
                "drift": (
                    float(trace.invariant_drift)
                    if i == last and trace.invariant_drift is not None
                    else None
                ),
            }
            lines.append(json.dumps(rec))
    _write(cfg.out, "\n".join(lines) + "\n")
    print(f"flow: {len(starts)} orbit(s), terminations {outcomes}")
    if outcomes.get("inconclusive", 0) == len(starts):
        _diag("numerical", "every orbit ended inconclusive")
        return EXIT_NUMERICAL
    return EXIT_OK


def cmd_sphere_scan(cfg):
    model, g = _require_model(cfg)
    eps_list = cfg.eps_list or (1.0, 0.5, 0.25)
    scan = sphere_census_scan(model, g, eps_list, n_seeds=cfg.seeds, opts=_solve_opts(cfg))
    buf = []
    writer_rows = []
    for row in scan["rows"]:
        for comp in row["components"]:
            writer_rows.append(
                {
                    "eps": row["eps"],
                    "component": comp["id"],
                    "size": comp["size"],
                    "indices": "|".join(f"{k}:{v}" for k, v in sorted(comp["indices"].items(), key=lambda kv: str(kv[0]))),
                    "transversal": comp["transversal"],
                    "line": comp["line"],
                }
            )
    import io

    sio = io.StringIO()
    w = csv.DictWriter(
        sio, fieldnames=["eps", "component", "size", "indices", "transversal", "line"]
    )
    w.writeheader()
    w.writerows(writer_rows)
    _write(cfg.out, sio.getvalue())
    print(
        "sphere-scan: census "
        + ("stable" if scan["stable"] else "CHANGES")
        + f" across eps={list(eps_list)}"
    )
    return EXIT_OK


def cmd_euler(cfg):
    model, g = _require_model(cfg)
    if cfg.fiber is None:
        raise InputError("euler needs --fiber (the leaf is indexed by its f-value)")
    result = find_contacts_on_fiber(
        model, g, cfg.fiber, n_seeds=cfg.seeds, opts=_solve_opts(cfg)
    )
    if not result.points:
        _diag("numerical", "no contacts found on the requested fiber")
        return EXIT_NUMERICAL
    groups = group_by_leaf(result.points, model)
    import io

    sio = io.StringIO()
    w = csv.writer(sio)
    w.writerow(["leaf_re", "leaf_im", "n_contacts", "signed_count"])
    try:
        for grp in groups:
            fv = grp[0].fiber_value
            w.writerow([fv.real, fv.imag, len(grp), euler_count(grp)])
    except FoliationError as exc:
        _diag("numerical", f"signed count refused: {exc}")
        return EXIT_NUMERICAL
    _write(cfg.out, sio.getvalue())
    print(f"euler: {len(groups)} leaf group(s), {len(result.points)} contacts")
    return EXIT_OK


def cmd_bifurcation_scan(cfg):
    scan = bifurcation_scan(
        q=cfg.q, t_range=(cfg.t_min, cfg.t_max), grid=cfg.grid, opts=_solve_opts(cfg)
    )
    import io

    sio = io.StringIO()
    w = csv.writer(sio)
    w.writerow(["t_abs", "min_rel_eigenvalue", "n_contacts"])
    for t, v, cnt in scan["table"]:
        w.writerow([t, v, cnt])
    _write(cfg.out, sio.getvalue())
    if scan["window"] is None:
        _diag("numerical", "no degeneracy window found in the scanned range")
        return EXIT_NUMERICAL
    print(
        f"bifurcation-scan: window [{scan['window'][0]:.4f}, {scan['window'][1]:.4f}], "
        f"midpoint {scan['midpoint']:.4f}, expected {scan['expected']:.4f}"
    )
    return EXIT_OK


def cmd_reproduce(cfg):
    if not cfg.example:
        raise InputError(f"reproduce needs an example id: {sorted(EXAMPLE_IDS)}")
    report = reproduce(cfg.example, **cfg.example_params)
    text = report.to_text()
    print(text)
    if cfg.out:
        with open(cfg.out, "w") as fh:
            fh.write(report.to_json() + "\n")
    if cfg.summary:
        with open(cfg.summary, "w") as fh:
            fh.write(report.to_json() + "\n")
    if not report.passed:
        _diag("reproduction", f"{cfg.example}: some checks failed")
        return EXIT_REPRODUCTION
    return EXIT_OK


def cmd_report(args):
    from .report import render_report

    made = render_report(
        args.outdir,
        contacts=args.contacts,
        orbits=args.orbits,
        scan=args.scan,
        census=args.census,
    )
    print("report: wrote " + ", ".join(made))
    return EXIT_OK


def build_parser():
    ap = argparse.ArgumentParser(
        prog="foliamorse",
        description=(
            "Numerical contact analysis of singular holomorphic foliation germs "
            "against Morse functions"
        ),
    )
    sub = ap.add_subparsers(dest="cmd", required=True)

    def common(p, model=True):
        p.add_argument("--config", help="key=value config file (flags override it)")
        if model:
            p.add_argument("--model", help="model shorthand, e.g. fermat:n=2,k=3")
            p.add_argument("--morse", help="round | weighted:a1,b1,... | file:PATH")
        p.add_argument("--tol", type=float)
        p.add_argument("--seeds", type=int)
        p.add_argument("--trust-radius", dest="trust_radius", type=float)
        p.add_argument("--dedup", type=float)
        p.add_argument("--rank-tol", dest="rank_tol", type=float)
        p.add_argument("--workers", type=int)
        p.add_argument("--rng-seed", dest="rng_seed", type=int)
        p.add_argument("--out", help="output path (stdout when omitted)")
        p.add_argument("--summary", help="write a JSON summary here")
        p.add_argument("--dump-config", dest="dump_config", help="write the resolved config")

    p = sub.add_parser("analyze", help="contacts on a g-sphere, JSON lines + census")
    common(p)
    p.add_argument("--eps", type=float)

    p = sub.add_parser("flow", help="integrate leaf-gradient orbits, JSON lines")
    common(p)
    p.add_argument("--z0", help="start point, comma-separated complex shorthand")
    p.add_argument("--n-orbits", dest="n_orbits", type=int)
    p.add_argument("--direction", choices=["backward", "forward"])
    p.add_argument("--budget", type=int)
    p.add_argument("--origin-radius", dest="origin_radius", type=float)
    p.add_argument("--exit-radius", dest="exit_radius", type=float)

    p = sub.add_parser("sphere-scan", help="census table across a list of sphere labels")
    common(p)
    p.add_argument("--eps-list", dest="eps_list", help="comma-separated eps values")

    p = sub.add_parser("euler", help="per-leaf signed contact counts on a fiber")
    common(p)
    p.add_argument("--fiber", help="fiber value, complex shorthand like 0.3 or 1+0.5i")

    p = sub.add_parser("bifurcation-scan", help="|t| vs min eigenvalue CSV for z1^2 - z2^q")
    common(p, model=False)
    p.add_argument("--q", type=int)
    p.add_argument("--tmin", type=float)
    p.add_argument("--tmax", type=float)
    p.add_argument("--grid", type=int)

    p = sub.add_parser("reproduce", help="run a scripted reproduction")
    common(p, model=False)
    p.add_argument("example", choices=sorted(EXAMPLE_IDS))
    p.add_argument("--p", type=int)
    p.add_argument("--q", type=int)
    p.add_argument("--t", type=float)
    p.add_argument("--n", type=int)
    p.add_argument("--k", type=int)
    p.add_argument("--n-orbits", dest="n_orbits_param", type=int)

    p = sub.add_parser("report", help="render previous outputs to text and figures")
    p.add_argument("--contacts", help="contacts JSON-lines file")
    p.add_argument("--orbits", help="orbit-trace JSON-lines file")
    p.add_argument("--scan", help="bifurcation scan CSV")
    p.add_argument("--census", help="sphere-scan census CSV")
    p.add_argument("--outdir", default="report_out", help="output directory")
    return ap


def main(argv=None):
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        if args.cmd == "report":
            return cmd_report(args)
        cfg = _load_config(args)
        if cfg.workers is None or cfg.workers <= 0:
            cfg.workers = 1
        env_workers = os.environ.get("FOLIATION_WORKERS")
        if env_workers:
            cfg.workers = int(env_workers)
        if args.cmd == "reproduce":
            cfg.example = args.example
            params = {}
            for name in ("p", "q", "t", "n", "k"):
                v = getattr(args, name, None)
                if v is not None:
                    params[name] = v
            if getattr(args, "n_orbits_param", None) is not None:
                params["n_orbits"] = args.n_orbits_param
            if params:
                cfg.example_params = params
        if getattr(args, "dump_config", None):
            with open(args.dump_config, "w") as fh:
                fh.write(cfg.to_text())
        handler = {
            "analyze": cmd_analyze,
            "flow": cmd_flow,
            "sphere-scan": cmd_sphere_scan,
            "euler": cmd_euler,
            "bifurcation-scan": cmd_bifurcation_scan,
            "reproduce": cmd_reproduce,
        }[args.cmd]
        return handler(cfg)
    except (InputError, OSError) as exc:
        _diag("input", str(exc))
        return EXIT_INPUT
    except FoliationError as exc:
        _diag("numerical", str(exc))
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
