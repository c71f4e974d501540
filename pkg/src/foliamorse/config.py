"""Run configuration: flat key=value text format with repeated term lines.

Complex numbers appear in data files only as explicit real pairs; the
``a+bi`` shorthand is reserved for command-line flags.  serialize/parse round
trips exactly (floats via repr).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .calc import MorseModel, PolyMap
from .errors import InputError
from .foliation import FoliationModel

__all__ = [
    "RunConfig",
    "parse_complex",
    "format_complex",
    "build_model",
    "build_morse",
    "model_to_dict",
    "morse_to_dict",
    "parse_model_shorthand",
    "parse_morse_shorthand",
]

def _split_last_sign(body):
    """Split 'a+b' / 'a-b' at the last sign that is not an exponent sign."""
    for i in range(len(body) - 1, 0, -1):
        if body[i] in "+-" and body[i - 1] not in "eE":
            return body[:i], body[i:]
    return None, body


def parse_complex(text):
    """Parse CLI shorthand like '1', '1+2i', '-0.5i', '2-1e-3i'."""
    s = text.strip().replace(" ", "")
    if not s:
        raise InputError("empty complex literal")
    try:
        if s.endswith("i"):
            re_part, im_part = _split_last_sign(s[:-1])
            if im_part in ("", "+"):
                im = 1.0
            elif im_part == "-":
                im = -1.0
            else:
                im = float(im_part)
            return complex(float(re_part) if re_part else 0.0, im)
        return complex(float(s), 0.0)
    except ValueError:
        raise InputError(f"cannot parse complex literal {text!r}") from None


def format_complex(z):
    z = complex(z)
    if z.imag == 0:
        return repr(z.real)
    sign = "+" if z.imag >= 0 else "-"
    return f"{z.real!r}{sign}{abs(z.imag)!r}i"


@dataclass
class RunConfig:
    command: str = "analyze"
    model: dict = field(default_factory=dict)
    morse: dict = field(default_factory=dict)
    eps: float = None
    eps_list: tuple = None
    fiber: complex = None
    tol: float = 1e-10
    seeds: int = 1024
    trust_radius: float = 1.0
    dedup: float = None
    rank_tol: float = 1e-8
    degeneracy_tol: float = 1e-7
    link_scale: float = 3.0
    origin_radius: float = None
    exit_radius: float = None
    budget: int = 10**6
    drift_tol: float = 1e-8
    direction: str = "backward"
    n_orbits: int = 0
    z0: tuple = None
    example: str = None
    example_params: dict = field(default_factory=dict)
    q: int = 4
    t_min: float = 0.05
    t_max: float = 0.6
    grid: int = 50
    out: str = None
    summary: str = None
    workers: int = 1
    rng_seed: int = 0

    def __post_init__(self):
        for name in ("tol", "trust_radius", "rank_tol", "degeneracy_tol",
                     "link_scale", "drift_tol"):
            v = getattr(self, name)
            if v is not None and v <= 0:
                raise InputError(f"{name} must be positive, got {v}")
        for name in ("dedup", "origin_radius", "exit_radius"):
            v = getattr(self, name)
            if v is not None and v <= 0:
                raise InputError(f"{name} must be positive when given")
        if self.eps is not None and self.eps > self.trust_radius:
            raise InputError(
                f"eps = {self.eps} exceeds the trust radius {self.trust_radius}"
            )
        if self.eps_list is not None:
            if any(e > self.trust_radius for e in self.eps_list):
                raise InputError("every eps in eps_list must be within the trust radius")

    # -- text form ---------------------------------------------------------

    def to_text(self):
        lines = [f"command = {self.command}"]
        simple = [
            ("eps", self.eps), ("tol", self.tol), ("seeds", self.seeds),
            ("trust_radius", self.trust_radius), ("dedup", self.dedup),
            ("rank_tol", self.rank_tol), ("degeneracy_tol", self.degeneracy_tol),
            ("link_scale", self.link_scale), ("origin_radius", self.origin_radius),
            ("exit_radius", self.exit_radius), ("budget", self.budget),
            ("drift_tol", self.drift_tol), ("direction", self.direction),
            ("n_orbits", self.n_orbits), ("example", self.example),
            ("q", self.q), ("t_min", self.t_min), ("t_max", self.t_max),
            ("grid", self.grid), ("out", self.out), ("summary", self.summary),
            ("workers", self.workers), ("rng_seed", self.rng_seed),
        ]
        for key, val in simple:
            if val is not None:
                lines.append(f"{key} = {val!r}" if isinstance(val, float) else f"{key} = {val}")
        if self.eps_list is not None:
            lines.append("eps_list = " + " ".join(repr(float(e)) for e in self.eps_list))
        if self.fiber is not None:
            lines.append(f"fiber = {self.fiber.real!r} {self.fiber.imag!r}")
        if self.z0 is not None:
            flat = []
            for z in self.z0:
                flat += [repr(complex(z).real), repr(complex(z).imag)]
            lines.append("z0 = " + " ".join(flat))
        for k, v in sorted(self.example_params.items()):
            lines.append(f"example_param.{k} = {v!r}" if isinstance(v, float) else f"example_param.{k} = {v}")
        lines += _model_lines("model", self.model)
        lines += _morse_lines("morse", self.morse)
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text):
        pairs = []
        for raw in text.splitlines():
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise InputError(f"bad config line (need key = value): {raw!r}")
            key, val = line.split("=", 1)
            pairs.append((key.strip(), val.strip()))
        kw = {}
        model = {}
        morse = {}
        example_params = {}
        ints = {"seeds", "budget", "n_orbits", "q", "grid", "workers", "rng_seed"}
        floats = {
            "eps", "tol", "trust_radius", "dedup", "rank_tol", "degeneracy_tol",
            "link_scale", "origin_radius", "exit_radius", "drift_tol",
            "t_min", "t_max",
        }
        for key, val in pairs:
            if key.startswith("model."):
                _feed_section(model, key[6:], val)
            elif key.startswith("morse."):
                _feed_section(morse, key[6:], val)
            elif key.startswith("example_param."):
                example_params[key[14:]] = _parse_scalar(val)
            elif key == "eps_list":
                kw["eps_list"] = tuple(float(x) for x in val.split())
            elif key == "fiber":
                a, b = val.split()
                kw["fiber"] = complex(float(a), float(b))
            elif key == "z0":
                xs = [float(x) for x in val.split()]
                if len(xs) % 2:
                    raise InputError("z0 needs an even number of reals (re im pairs)")
                kw["z0"] = tuple(complex(a, b) for a, b in zip(xs[::2], xs[1::2]))
            elif key in ints:
                kw[key] = int(val)
            elif key in floats:
                kw[key] = float(val)
            elif key in ("command", "direction", "example", "out", "summary"):
                kw[key] = val
            else:
                raise InputError(f"unknown config key {key!r}")
        if model:
            kw["model"] = _finish_model(model)
        if morse:
            kw["morse"] = _finish_morse(morse)
        if example_params:
            kw["example_params"] = example_params
        return cls(**kw)


def _parse_scalar(val):
    for cast in (int, float):
        try:
            return cast(val)
        except ValueError:
            continue
    return val


def _feed_section(store, key, val):
    if key == "term":
        store.setdefault("terms", []).append(val)
    elif key == "integral_term":
        store.setdefault("integral_term_lines", []).append(val)
    elif key == "row":
        store.setdefault("rows", []).append(val)
    else:
        store[key] = val


def _model_lines(prefix, model):
    if not model:
        return []
    lines = [f"{prefix}.kind = {model['kind']}", f"{prefix}.n = {model['n']}"]
    if model["kind"] == "linear_action":
        for row in model["rows"]:
            lines.append(
                f"{prefix}.row = " + " ".join(f"{re!r} {im!r}" for re, im in row)
            )
    else:
        for comp, cre, cim, expo in model["terms"]:
            lines.append(
                f"{prefix}.term = {comp} {cre!r} {cim!r} " + " ".join(str(e) for e in expo)
            )
        if model.get("integral_terms"):
            for comp, cre, cim, expo in model["integral_terms"]:
                lines.append(
                    f"{prefix}.integral_term = {cre!r} {cim!r} "
                    + " ".join(str(e) for e in expo)
                )
    return lines


def _morse_lines(prefix, morse):
    if not morse:
        return []
    lines = [f"{prefix}.kind = {morse['kind']}", f"{prefix}.n = {morse['n']}"]
    if morse["kind"] == "weighted":
        lines.append(f"{prefix}.a = " + " ".join(repr(x) for x in morse["a"]))
        lines.append(f"{prefix}.b = " + " ".join(repr(x) for x in morse["b"]))
    elif morse["kind"] == "general":
        for cre, cim, ze, we in morse["terms"]:
            lines.append(
                f"{prefix}.term = {cre!r} {cim!r} "
                + " ".join(str(e) for e in ze)
                + " "
                + " ".join(str(e) for e in we)
            )
    return lines


def _finish_model(raw):
    kind = raw.get("kind")
    if kind not in ("vector_field", "first_integral", "linear_action"):
        raise InputError(f"model.kind must be given and valid, got {kind!r}")
    n = int(raw.get("n", 0))
    if n < 2:
        raise InputError("model.n must be >= 2")
    out = {"kind": kind, "n": n}
    if kind == "linear_action":
        rows = []
        for line in raw.get("rows", []):
            xs = [float(x) for x in line.split()]
            if len(xs) != 2 * n:
                raise InputError("each model.row needs n re/im pairs")
            rows.append(tuple((xs[2 * j], xs[2 * j + 1]) for j in range(n)))
        if not rows:
            raise InputError("linear_action model needs at least one row")
        out["rows"] = tuple(rows)
        return out
    terms = []
    integral_terms = []
    for line in raw.get("terms", []):
        xs = line.split()
        if kind == "first_integral":
            comp, rest = 1, xs
            if len(xs) == n + 3:  # tolerate an explicit component index
                comp, rest = int(xs[0]), xs[1:]
        else:
            comp, rest = int(xs[0]), xs[1:]
        if len(rest) != n + 2:
            raise InputError(f"model.term needs coeff pair + {n} exponents: {line!r}")
        terms.append((comp, float(rest[0]), float(rest[1]), tuple(int(e) for e in rest[2:])))
    for line in raw.get("integral_term_lines", []):
        xs = line.split()
        if len(xs) != n + 2:
            raise InputError(f"model.integral_term needs coeff pair + {n} exponents")
        integral_terms.append((1, float(xs[0]), float(xs[1]), tuple(int(e) for e in xs[2:])))
    if not terms:
        raise InputError("polynomial model needs at least one model.term line")
    out["terms"] = tuple(terms)
    if integral_terms:
        out["integral_terms"] = tuple(integral_terms)
    return out


def _finish_morse(raw):
    kind = raw.get("kind", "round")
    n = int(raw.get("n", 0))
    out = {"kind": kind, "n": n}
    if kind == "round":
        return out
    if kind == "weighted":
        out["a"] = tuple(float(x) for x in raw.get("a", "").split())
        out["b"] = tuple(float(x) for x in raw.get("b", "").split())
        return out
    if kind == "general":
        terms = []
        for line in raw.get("terms", []):
            xs = line.split()
            if len(xs) != 2 + 2 * n:
                raise InputError(
                    f"morse.term needs coeff pair + {n} z exponents + {n} zbar exponents"
                )
            terms.append(
                (
                    float(xs[0]),
                    float(xs[1]),
                    tuple(int(e) for e in xs[2 : 2 + n]),
                    tuple(int(e) for e in xs[2 + n :]),
                )
            )
        out["terms"] = tuple(terms)
        return out
    raise InputError(f"unknown morse kind {kind!r}")


# ---------------------------------------------------------------------------
# dict <-> live objects
# ---------------------------------------------------------------------------

def _terms_to_polymap(n, n_out, flat_terms):
    comps = [[] for _ in range(n_out)]
    for comp, cre, cim, expo in flat_terms:
        if not (1 <= comp <= n_out):
            raise InputError(f"component index {comp} out of range 1..{n_out}")
        comps[comp - 1].append((complex(cre, cim), expo))
    return PolyMap(n_in=n, n_out=n_out, terms=tuple(tuple(c) for c in comps))


def build_model(spec):
    kind, n = spec["kind"], spec["n"]
    if kind == "linear_action":
        rows = np.array(
            [[complex(re, im) for re, im in row] for row in spec["rows"]]
        )
        return FoliationModel.from_linear_action(rows)
    if kind == "first_integral":
        return FoliationModel.from_first_integral(_terms_to_polymap(n, 1, spec["terms"]))
    field_map = _terms_to_polymap(n, n, spec["terms"])
    integral = None
    if spec.get("integral_terms"):
        integral = _terms_to_polymap(n, 1, spec["integral_terms"])
    return FoliationModel.from_vector_field(field_map, integral=integral)


def build_morse(spec):
    kind = spec.get("kind", "round")
    n = spec["n"]
    if kind == "round":
        return MorseModel.round(n)
    if kind == "weighted":
        return MorseModel.weighted(spec["a"], spec["b"])
    terms = [
        (complex(cre, cim), ze, we) for cre, cim, ze, we in spec["terms"]
    ]
    return MorseModel.general(n, terms)


def model_to_dict(model):
    if model.kind == "linear_action":
        return {
            "kind": "linear_action",
            "n": model.n,
            "rows": tuple(
                tuple((float(l.real), float(l.imag)) for l in row)
                for row in model.action
            ),
        }
    pm = model.integral if model.kind == "first_integral" else model.field
    flat = []
    for ci, comp in enumerate(pm.terms):
        for coeff, expo in comp:
            flat.append((ci + 1, float(coeff.real), float(coeff.imag), tuple(expo)))
    out = {"kind": model.kind, "n": model.n, "terms": tuple(flat)}
    if model.kind == "vector_field" and model.integral is not None:
        ints = []
        for coeff, expo in model.integral.terms[0]:
            ints.append((1, float(coeff.real), float(coeff.imag), tuple(expo)))
        out["integral_terms"] = tuple(ints)
    return out


def morse_to_dict(g):
    if g.kind == "round":
        return {"kind": "round", "n": g.n}
    if g.kind == "weighted":
        return {"kind": "weighted", "n": g.n, "a": tuple(g.a), "b": tuple(g.b)}
    return {
        "kind": "general",
        "n": g.n,
        "terms": tuple(
            (float(c.real), float(c.imag), ze, we) for c, ze, we in g.terms
        ),
    }


# ---------------------------------------------------------------------------
# CLI shorthand for named model families
# ---------------------------------------------------------------------------

def parse_model_shorthand(text):
    """Named families: fermat:n=2,k=3 | pham:p=3,q=4 | linear:1,1+1i | ...

    Also 'file:path' to load the model section of a config file.
    """
    from . import models as m

    if text.startswith("file:"):
        cfg = RunConfig.from_text(open(text[5:]).read())
        if not cfg.model:
            raise InputError(f"no model section in {text[5:]}")
        return cfg.model
    name, _, argstr = text.partition(":")
    kv = {}
    pos = []
    if argstr:
        for item in argstr.split(","):
            if "=" in item:
                k, v = item.split("=", 1)
                kv[k.strip()] = v.strip()
            else:
                pos.append(item.strip())
    if name == "fermat":
        n, k = int(kv.get("n", 2)), int(kv.get("k", 3))
        lam = [parse_complex(x) for x in pos] if pos else None
        return model_to_dict(m.fermat(n, k, lam))
    if name == "pham":
        return model_to_dict(m.pham_brieskorn(int(kv.get("p", 3)), int(kv.get("q", 4))))
    if name == "pham-field":
        return model_to_dict(m.pham_brieskorn_field(int(kv.get("p", 3)), int(kv.get("q", 4))))
    if name == "rotation":
        return model_to_dict(m.rotation_field())
    if name == "quadric":
        return model_to_dict(m.weighted_quadric())
    if name == "linear":
        lams = [parse_complex(x) for x in pos]
        if len(lams) < 2:
            raise InputError("linear:<lam1>,<lam2>,... needs at least two eigenvalues")
        return model_to_dict(m.linear_flow(lams))
    if name == "action":
        rows = [[parse_complex(x) for x in row.split()] for row in pos]
        return model_to_dict(m.linear_action_model(np.array(rows)))
    if name == "twisted":
        lams = [parse_complex(x) for x in pos] or [3, 1, 1, 1]
        return model_to_dict(m.twisted_cycle(lams, power=int(kv.get("a", 2))))
    if name == "meersseman":
        return model_to_dict(m.meersseman_example())
    raise InputError(
        f"unknown model family {name!r}; known: fermat, pham, pham-field, "
        "rotation, quadric, linear, action, twisted, meersseman, file:PATH"
    )


def parse_morse_shorthand(text, n):
    if text.startswith("file:"):
        cfg = RunConfig.from_text(open(text[5:]).read())
        if not cfg.morse:
            raise InputError(f"no morse section in {text[5:]}")
        return cfg.morse
    name, _, argstr = text.partition(":")
    if name == "round":
        return {"kind": "round", "n": n}
    if name == "weighted":
        vals = [float(x) for x in argstr.split(",") if x.strip()]
        if len(vals) != 2 * n:
            raise InputError(f"weighted:<a1>,<b1>,...: need {2*n} positive reals")
        return {"kind": "weighted", "n": n, "a": tuple(vals[0::2]), "b": tuple(vals[1::2])}
    raise InputError(f"unknown morse shorthand {name!r} (round | weighted:... | file:PATH)")
