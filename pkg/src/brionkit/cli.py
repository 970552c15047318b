"""Command line interface: JSON problem files in, JSON results out.

Exit codes: 1 for unreadable input, 2 for a violated precondition, 3 when a
verification finds a deviation above tolerance.
"""

from __future__ import annotations

import argparse
import json
import math
import re
import sys
from fractions import Fraction

import mpmath

from .brion_engine import (
    ZeroRestriction,
    brion_discrete,
    decomposition_check,
    degenerate_brion_continuous,
    degenerate_brion_discrete,
    degenerate_brion_discrete_v1,
    degenerate_brion_discrete_v2,
    degenerate_brion_discrete_v3,
    dilation_series,
)
from .euler_maclaurin import HolomorphyViolation, MuQuery, NotAdapted, mu_eval
from .exact_linalg import InnerProduct, Lattice, LinalgError, rat, vec
from .laurent_eval import DEFAULT_PRECISION, ExhaustedRetries, NotPointed, holomorphy_margin
from .oracle import lattice_enum_sum, quad_integral
from .polytope_core import Cone, Polytope, PolytopeError, face_point
from .virtual_cone import levi_cone
from .xi_structure import NotXiConstant, Xi, is_adapted_point, xi_decomposition


class InputError(ValueError):
    """Malformed problem file or flag."""


PRECONDITION_ERRORS = (NotAdapted, NotXiConstant, NotPointed, PolytopeError, LinalgError,
                       ZeroRestriction, HolomorphyViolation, ExhaustedRetries)


# ----------------------------------------------------------- parsing


def parse_xi(text: str | None, n: int) -> Xi:
    """Parse ``re=[..];im2pi=[..]`` (either part optional)."""
    if not text:
        return Xi.zero(n)
    parts = {}
    for chunk in text.split(";"):
        chunk = chunk.strip()
        if not chunk:
            continue
        m = re.fullmatch(r"(re|im2pi)\s*=\s*\[(.*)\]", chunk)
        if not m:
            raise InputError(f"cannot parse xi component {chunk!r}")
        items = [s.strip().strip("\"'") for s in m.group(2).split(",") if s.strip()]
        try:
            parts[m.group(1)] = [rat(s) for s in items]
        except (ValueError, ZeroDivisionError) as e:
            raise InputError(f"bad rational in xi: {e}") from None
    for v in parts.values():
        if len(v) != n:
            raise InputError(f"xi has {len(v)} components, expected {n}")
    return Xi.of(parts.get("re"), parts.get("im2pi"), n)


def _rat_vec(xs, n=None):
    try:
        v = vec(rat(x) for x in xs)
    except (ValueError, TypeError, ZeroDivisionError) as e:
        raise InputError(f"bad rational vector {xs!r}: {e}") from None
    if n is not None and len(v) != n:
        raise InputError(f"vector {xs!r} has wrong length, expected {n}")
    return v


def load_problem(path: str) -> dict:
    """Read a problem file into polytope / cone, lattice and inner product."""
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as e:
        raise InputError(f"cannot read {path}: {e}") from None
    if not isinstance(data, dict) or "dim" not in data:
        raise InputError("problem file needs an object with a 'dim' field")
    n = int(data["dim"])
    out = {"dim": n, "polytope": None, "cone": None}
    if "vertices" in data:
        out["polytope"] = Polytope.from_vertices([_rat_vec(v, n) for v in data["vertices"]])
    elif "inequalities" in data:
        hs = [(_rat_vec(h["a"], n), rat(h["b"])) for h in data["inequalities"]]
        out["polytope"] = Polytope.from_inequalities(hs, n)
    elif "apex" in data:
        out["cone"] = Cone(_rat_vec(data["apex"], n),
                           tuple(_rat_vec(r, n) for r in data.get("rays", [])))
    else:
        raise InputError("problem file needs 'vertices', 'inequalities' or 'apex'")
    basis = data.get("lattice")
    out["lattice"] = Lattice(n, tuple(_rat_vec(b, n) for b in basis)) if basis else Lattice.standard(n)
    gram = data.get("gram")
    out["ip"] = InnerProduct(tuple(_rat_vec(r, n) for r in gram)) if gram else InnerProduct.standard(n)
    return out


# ---------------------------------------------------------- output


class Encoder:
    def __init__(self, bits: int):
        self.bits = bits
        self.digits = max(15, int(bits * math.log10(2) / 2))

    def num(self, x):
        if isinstance(x, (int, Fraction)):
            return str(Fraction(x))
        if isinstance(x, complex):
            x = mpmath.mpc(x)
        if isinstance(x, (mpmath.mpf, mpmath.mpc)):
            c = mpmath.mpc(x)
            return {"re": mpmath.nstr(c.real, self.digits), "im": mpmath.nstr(c.imag, self.digits),
                    "bits": self.bits}
        raise TypeError(f"cannot encode {type(x).__name__}")

    @staticmethod
    def vec(v):
        return [str(Fraction(x)) for x in v]

    @staticmethod
    def margin(m: float):
        return round(float(m), 3)


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True)


def _need_polytope(prob):
    if prob["polytope"] is None:
        raise InputError("this command needs a polytope")
    return prob["polytope"]


def _face_info(p, f, enc):
    return {"face": f.id, "dim": f.dim,
            "vertices": [enc.vec(p.vertices[i]) for i in sorted(f.vertex_ids)]}


def _term_json(p, t, enc):
    d = _face_info(p, p.faces[t.face_id], enc)
    d.update({"normalized_face_volume": enc.num(t.normalized_face_volume),
              "levi_value": enc.num(t.levi_value),
              "rate": {"re": str(t.rate[0]), "im2pi": str(t.rate[1])},
              "value": enc.num(t.value),
              "holomorphy_margin": enc.margin(t.holomorphy_margin)})
    return d


# ---------------------------------------------------------- commands


def cmd_eval_integral(args, prob, xi, enc):
    p = _need_polytope(prob)
    total, terms = degenerate_brion_continuous(p, xi, prob["ip"], args.seed, args.precision_bits,
                                               args.trunc)
    return {"command": "eval-integral", "total": enc.num(total),
            "holomorphy_margin": enc.margin(min(t.holomorphy_margin for t in terms)),
            "terms": [_term_json(p, t, enc) for t in terms]}, 0


_VERSIONS = {1: degenerate_brion_discrete_v1, 2: degenerate_brion_discrete_v2,
             3: degenerate_brion_discrete_v3}


def cmd_eval_sum(args, prob, xi, enc):
    p = _need_polytope(prob)
    lat, ip = prob["lattice"], prob["ip"]
    if is_adapted_point(xi, lat):
        total, terms = _VERSIONS[args.version](p, lat, xi, ip, seed=args.seed,
                                               precision_bits=args.precision_bits)
        return {"command": "eval-sum", "version": args.version, "total": enc.num(total),
                "holomorphy_margin": enc.margin(min(t.holomorphy_margin for t in terms)),
                "terms": [_term_json(p, t, enc) for t in terms]}, 0
    total, parts = degenerate_brion_discrete(p, lat, xi, ip, args.version, args.seed, args.precision_bits)
    cosets = [{"representative": enc.vec(g), "weight": enc.num(w), "value": enc.num(v),
               "terms": [_term_json_shifted(t, enc) for t in terms]} for g, w, v, terms in parts]
    margin = min(t.holomorphy_margin for _, _, _, ts in parts for t in ts)
    return {"command": "eval-sum", "version": args.version, "reduced": True, "total": enc.num(total),
            "holomorphy_margin": enc.margin(margin), "cosets": cosets}, 0


def _term_json_shifted(t, enc):
    return {"face": t.face_id, "value": enc.num(t.value),
            "holomorphy_margin": enc.margin(t.holomorphy_margin)}


def cmd_levi_cone(args, prob, xi, enc):
    p = _need_polytope(prob)
    fl = p.faces
    dec = xi_decomposition(p, xi)
    ids = [args.face] if args.face is not None else sorted(dec.constant_faces)
    out = []
    for fid in ids:
        if fid < 0 or fid >= len(fl):
            raise InputError(f"no face with id {fid}")
        f = fl[fid]
        lc = levi_cone(p, f, xi, prob["ip"])
        d = _face_info(p, f, enc)
        d["terms"] = [{"coeff": c, "rays": [enc.vec(r) for r in k.rays]} for c, k in lc]
        d["flags"] = {";".join(",".join(enc.vec(r)) for r in key): [list(ch) for ch in chains]
                      for key, chains in sorted(lc.provenance.items())}
        out.append(d)
    if args.plot:
        _plot(p, xi, prob["ip"], args.plot)
    return {"command": "levi-cone", "faces": out}, 0


def cmd_decompose(args, prob, xi, enc):
    p = _need_polytope(prob)
    rep = decomposition_check(p, xi, prob["ip"], args.probes, prob["lattice"], args.seed,
                              args.precision_bits)
    fl = p.faces
    pieces = []
    for fid in sorted(xi_decomposition(p, xi).constant_faces):
        lc = levi_cone(p, fl[fid], xi, prob["ip"], based="projected")
        d = _face_info(p, fl[fid], enc)
        d["levi_apex"] = enc.vec(lc.apex)
        d["terms"] = [{"coeff": c, "rays": [enc.vec(r) for r in k.rays]} for c, k in lc]
        pieces.append(d)
    if args.plot:
        _plot(p, xi, prob["ip"], args.plot)
    res = {"command": "decompose", "probes": rep.probes, "passed": rep.passed,
           "max_deviation_integral": enc.num(rep.max_deviation_integral),
           "max_deviation_sum": enc.num(rep.max_deviation_sum) if rep.max_deviation_sum is not None else None,
           "pieces": pieces}
    return res, 0 if rep.passed else 3


def cmd_ehrhart(args, prob, xi, enc):
    p = _need_polytope(prob)
    ds = dilation_series(p, Xi.zero(prob["dim"]), prob["ip"], "discrete", prob["lattice"],
                         seed=args.seed, precision_bits=args.precision_bits)
    counts = [ds.evaluate(t) for t in range(1, args.tmax + 1)]
    if any(Fraction(c).denominator != 1 for c in counts):
        raise HolomorphyViolation("non-integral count from the quasi-polynomial")
    return {"command": "ehrhart", "period": ds.period, "counts": [int(c) for c in counts]}, 0


def cmd_dilation(args, prob, xi, enc):
    p = _need_polytope(prob)
    mode = args.mode
    ds = dilation_series(p, xi, prob["ip"], mode, prob["lattice"] if mode == "discrete" else None,
                         seed=args.seed, precision_bits=args.precision_bits)
    terms = [{"face": fid, "degree": deg, "rate": {"re": str(r[0]), "im2pi": str(r[1])},
              "coefficients": [enc.num(c) for c in cs]} for fid, deg, r, cs in ds.terms]
    values = [{"t": t, "value": enc.num(ds.evaluate(t))} for t in range(1, args.tmax + 1)]
    return {"command": "dilation-series", "mode": mode, "period": ds.period, "terms": terms,
            "values": values}, 0


def cmd_mu(args, prob, xi, enc):
    k = prob["cone"]
    if k is None:
        raise InputError("mu needs a cone file with 'apex' and 'rays'")
    if args.at_zero or xi.is_zero():
        v = mu_eval(MuQuery(k, prob["lattice"], prob["ip"], at_zero=True, trunc=args.trunc))
        return {"command": "mu", "value": enc.num(v)}, 0
    q = MuQuery(k, prob["lattice"], prob["ip"], at_zero=False, xi=xi, trunc=args.trunc,
                seed=args.seed, precision_bits=args.precision_bits)
    s = mu_eval(q)
    with mpmath.workprec(args.precision_bits):
        coeffs = [{"order": j, "coeff": enc.num(s.coeff(j))} for j in range(s.val, s.trunc + 1)]
        margin = holomorphy_margin(s)
    return {"command": "mu", "series": coeffs, "holomorphy_margin": enc.margin(margin)}, 0


def _to_mpc(x):
    if isinstance(x, (int, Fraction)):
        x = Fraction(x)
        return mpmath.mpc(mpmath.mpf(x.numerator) / x.denominator)
    return mpmath.mpc(x)


def _verify_one(p, lat, ip, xi, seed, bits, enc):
    total_i, terms = degenerate_brion_continuous(p, xi, ip, seed, bits)
    if is_adapted_point(xi, lat):
        total_s, method = degenerate_brion_discrete_v1(p, lat, xi, ip, seed, bits)[0], "degenerate-v1"
    else:
        total_s, method = brion_discrete(p, lat, xi, ip, seed, bits), "vertex-cones"
    with mpmath.workprec(bits):
        tol_s = mpmath.mpf(2) ** -64
        out = {"integral": enc.num(total_i), "sum": enc.num(total_s), "sum_method": method}
        dev_i = None
        if p.dim <= 3:
            q = quad_integral(p, xi, rel_tol=1e-12)
            dev_i = abs(_to_mpc(total_i) - q) / max(abs(q), 1)
            out["integral_oracle"] = enc.num(q)
        _, ref = lattice_enum_sum(p, lat, None, xi, bits)
        dev_s = abs(_to_mpc(total_s) - ref) / max(abs(ref), 1)
        out["sum_oracle"] = enc.num(ref)
        out["deviation_integral"] = enc.num(dev_i) if dev_i is not None else None
        out["deviation_sum"] = enc.num(dev_s)
        ok = (dev_i is None or dev_i < 1e-10) and dev_s < tol_s
        out["passed"] = bool(ok)
        return out, ok


def cmd_verify(args, prob, xi, enc):
    p = _need_polytope(prob)
    out, ok = _verify_one(p, prob["lattice"], prob["ip"], xi, args.seed, args.precision_bits, enc)
    out["command"] = "verify"
    return out, 0 if ok else 3


def cmd_corpus(args, prob, xi, enc):
    from .corpus import corpus, generic_xis
    rows, all_ok = [], True
    for inst in corpus():
        n = inst.dim
        for x in list(inst.degenerate_xis) + generic_xis(n, 1, args.seed):
            out, ok = _verify_one(inst.polytope, Lattice.standard(n), InnerProduct.standard(n), x,
                                  args.seed, args.precision_bits, enc)
            out["instance"] = inst.name
            out["xi"] = {"re": enc.vec(x.re), "im2pi": enc.vec(x.im2pi)}
            rows.append(out)
            all_ok &= ok
    if args.plot:
        from .corpus import by_name
        _plot(by_name("pentagon").polytope, Xi.of((1, 0), (0, 0)), InnerProduct.standard(2), args.plot)
    return {"command": "corpus", "passed": all_ok, "results": rows}, 0 if all_ok else 3


# ------------------------------------------------------------ plotting


def _plot(p, xi, ip, path):
    """One panel per constant face: the face with its signed Levi cones."""
    if p.ambient_dim != 2:
        raise InputError("plots are available for 2D polytopes only")
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    matplotlib.rcParams["svg.hashsalt"] = "brionkit"

    fl = p.faces
    const = sorted(xi_decomposition(p, xi).constant_faces)
    fig, axes = plt.subplots(1, len(const) + 1, figsize=(3 * (len(const) + 1), 3), squeeze=False)
    verts = [v for v in _cyclic(p)]
    xs = [float(v[0]) for v in verts]
    ys = [float(v[1]) for v in verts]
    span = max(max(xs) - min(xs), max(ys) - min(ys), 1)
    for ax in axes[0]:
        ax.fill(xs, ys, color="0.9", zorder=0)
        ax.set_aspect("equal")
        ax.set_xticks([])
        ax.set_yticks([])
    axes[0][0].set_title("polytope")
    for ax, fid in zip(axes[0][1:], const):
        f = fl[fid]
        pts = [p.vertices[i] for i in sorted(f.vertex_ids)]
        ax.plot([float(v[0]) for v in pts], [float(v[1]) for v in pts], "k-o", ms=3)
        base = face_point(p, f)
        for c, k in levi_cone(p, f, xi, ip):
            color = "tab:blue" if c > 0 else "tab:red"
            for r in k.rays:
                nr = math.hypot(float(r[0]), float(r[1]))
                ax.arrow(float(base[0]), float(base[1]), span * 0.5 * float(r[0]) / nr,
                         span * 0.5 * float(r[1]) / nr, color=color, head_width=0.05 * span,
                         length_includes_head=True)
        ax.set_title(f"face {fid}")
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def _cyclic(p):
    if p.dim < 2:
        return list(p.vertices)
    cx = sum(Fraction(v[0]) for v in p.vertices) / len(p.vertices)
    cy = sum(Fraction(v[1]) for v in p.vertices) / len(p.vertices)
    return sorted(p.vertices, key=lambda v: math.atan2(float(v[1] - cy), float(v[0] - cx)))


# --------------------------------------------------------------- main


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        sys.exit(1)


COMMANDS = {
    "eval-integral": cmd_eval_integral,
    "eval-sum": cmd_eval_sum,
    "levi-cone": cmd_levi_cone,
    "decompose": cmd_decompose,
    "ehrhart": cmd_ehrhart,
    "dilation-series": cmd_dilation,
    "mu": cmd_mu,
    "verify": cmd_verify,
    "corpus": cmd_corpus,
}


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="brionkit", description="Exponential sums and integrals over rational polytopes.")
    ap.add_argument("command", choices=sorted(COMMANDS))
    ap.add_argument("problem", nargs="?", help="JSON problem file (not used by 'corpus')")
    ap.add_argument("--xi", default=None, help='functional, e.g. "re=[1,0];im2pi=[0,1/2]"')
    ap.add_argument("--precision-bits", type=int, default=DEFAULT_PRECISION)
    ap.add_argument("--trunc", type=int, default=None)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--plot", default=None, metavar="OUT.svg")
    ap.add_argument("--face", type=int, default=None, help="face id for levi-cone")
    ap.add_argument("--version", type=int, choices=(1, 2, 3), default=1, help="discrete formula version")
    ap.add_argument("--probes", type=int, default=10)
    ap.add_argument("--tmax", type=int, default=8)
    ap.add_argument("--mode", choices=("continuous", "discrete"), default="continuous")
    ap.add_argument("--at-zero", action="store_true")
    return ap


def run(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "corpus":
            prob, n = None, 0
        else:
            if not args.problem:
                raise InputError(f"{args.command} needs a problem file")
            prob = load_problem(args.problem)
            n = prob["dim"]
        xi = parse_xi(args.xi, n) if prob else Xi.zero(0)
        if args.trunc is not None and args.trunc < 0:
            raise InputError("--trunc must be non-negative")
        enc = Encoder(args.precision_bits)
        with mpmath.workprec(args.precision_bits):
            result, code = COMMANDS[args.command](args, prob, xi, enc)
    except InputError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except PRECONDITION_ERRORS as e:
        print(f"precondition violated: {type(e).__name__}: {e}", file=sys.stderr)
        return 2
    print(_dump(result))
    return code


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
