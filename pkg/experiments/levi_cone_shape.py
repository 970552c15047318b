"""Is each Levi cone, up to sign and lower-dimensional pieces, a single convex cone?

In the plane this always holds. Here the indicator of every vertex Levi cone
of a few 3D polytopes is sampled at random points and two things are checked:
the values lie in {0, s} for one sign s, and the support is closed under addition.

For the octahedron with xi = (1, 1, 0) the flag product at the vertex (1, 0, 0)
strictly contains the tangent cone, so the Levi cone is minus their difference.
That set is not convex: a hand-picked witness pair is checked below, together
with the degenerate formula against quadrature to rule out an engine bug.
"""

import random
import sys
from fractions import Fraction

from brionkit.brion_engine import degenerate_brion_continuous
from brionkit.laurent_eval import decompose_cone
from brionkit.oracle import quad_integral
from brionkit.polytope_core import Polytope
from brionkit.virtual_cone import levi_cone
from brionkit.xi_structure import Xi, xi_decomposition

CASES = [
    ("cube, xi=(1,0,0)", [(x, y, z) for x in (0, 1) for y in (0, 1) for z in (0, 1)], (1, 0, 0)),
    ("simplex, xi=(1,1,0)", [(0, 0, 0), (1, 0, 0), (0, 1, 0), (0, 0, 1)], (1, 1, 0)),
    ("prism, xi=(0,0,1)", [(0, 0, 0), (2, 0, 0), (0, 1, 0), (0, 0, 1), (2, 0, 1), (0, 1, 1)], (0, 0, 1)),
    ("skew pyramid, xi=(1,0,0)", [(0, 0, 0), (0, 2, 0), (0, 0, 2), (0, 2, 2), (3, 1, 1)], (1, 0, 0)),
    ("octahedron, xi=(1,1,0)", [(1, 0, 0), (-1, 0, 0), (0, 1, 0), (0, -1, 0), (0, 0, 1), (0, 0, -1)], (1, 1, 0)),
]


def indicator(vc, x):
    total = 0
    for c, k in vc:
        if any(piece.contains(x) for _, piece in decompose_cone(k)):
            total += c
    return total


def probe(vc, rng, samples=400):
    pts = [tuple(Fraction(rng.randint(-50, 50), rng.randint(1, 13)) for _ in range(3)) for _ in range(samples)]
    vals = {x: indicator(vc, x) for x in pts}
    signs = {v for v in vals.values() if v != 0}
    if len(signs) > 1 or any(abs(v) > 1 for v in signs):
        return False, f"values {sorted(set(vals.values()))}"
    support = [x for x, v in vals.items() if v != 0]
    for _ in range(200):
        if len(support) < 2:
            break
        a, b = rng.sample(support, 2)
        if indicator(vc, tuple(p + q for p, q in zip(a, b))) == 0:
            return False, "support not closed under addition"
    return True, (f"sign {signs.pop():+d}" if signs else "empty")


def octahedron_witness():
    verts = CASES[-1][1]
    p = Polytope.from_vertices(verts)
    xi = Xi.of((1, 1, 0), (0, 0, 0))
    (f,) = [f for f in p.faces if f.dim == 0 and p.vertices[min(f.vertex_ids)] == (1, 0, 0)]
    vc = levi_cone(p, f, xi)
    apex = next(iter(vc))[1].apex
    at = lambda d: tuple(x + Fraction(y) for x, y in zip(apex, d))  # noqa: E731
    a, b, ab = (-1, -1, Fraction(19, 10)), (-1, -1, Fraction(-19, 10)), (-2, -2, 0)
    vals = [indicator(vc, at(d)) for d in (a, b, ab)]
    total, _ = degenerate_brion_continuous(p, xi)
    show = lambda d: "(" + ",".join(str(c) for c in d) + ")"  # noqa: E731
    print(f"indicator at apex+{show(a)}, apex+{show(b)}, apex+{show(ab)}: {vals}")
    print(f"octahedron integral: formula {complex(total).real:.15f}  quadrature {quad_integral(p, xi).real:.15f}")
    return vals[0] != 0 and vals[1] != 0 and vals[2] == 0


def main(seed=0):
    rng = random.Random(seed)
    all_ok = True
    for name, verts, re in CASES:
        p = Polytope.from_vertices(verts)
        xi = Xi.of(re, (0, 0, 0))
        for fid in sorted(xi_decomposition(p, xi).constant_faces):
            f = p.faces[fid]
            if f.dim != 0:
                continue
            vc = levi_cone(p, f, xi)
            ok, detail = probe(vc, rng)
            all_ok &= ok
            v = "(" + ",".join(str(c) for c in p.vertices[min(f.vertex_ids)]) + ")"
            print(f"{name:28s} vertex {v:10s} "
                  f"{len(vc)} terms  {'cone' if ok else 'NOT a cone'} ({detail})")
    print("all single signed cones" if all_ok else "counterexample found")
    print("non-convex witness confirmed" if octahedron_witness() else "witness not confirmed")
    return 0


if __name__ == "__main__":
    sys.exit(main(*map(int, sys.argv[1:])))
