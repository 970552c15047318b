from fractions import Fraction

import mpmath


def face_at(p, *points):
    """Face of p whose vertex set is exactly the given points."""
    ids = [p.vertices.index(tuple(Fraction(x) for x in pt)) for pt in points]
    return p.faces.by_vertices(ids)


def mpc(x):
    if isinstance(x, (int, Fraction)):
        x = Fraction(x)
        return mpmath.mpc(mpmath.mpf(x.numerator) / x.denominator)
    return mpmath.mpc(x)


def close(a, b, tol=mpmath.mpf(2) ** -100):
    a, b = mpc(a), mpc(b)
    return abs(a - b) <= tol * max(abs(b), 1)
