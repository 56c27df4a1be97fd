"""Facet enumeration and level counting for small finite point sets.

Everything is exact rational arithmetic.  Points are first projected into
their affine hull; facets of the hull polytope are found by exhaustive search
over point subsets spanning hyperplanes, deduplicated through a canonical
primitive-integer form, and lifted back to ambient coordinates.  The level of
a facet is the number of distinct values its functional takes on the point
set; a polytope all of whose facets have level 2 certifies that the first
theta body of the point set's vanishing ideal is already its convex hull.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from math import gcd
from typing import Sequence

from .quotient import CapExceededError

MAX_HULL_DIM = 6
MAX_POINTS = 64


@dataclass(frozen=True)
class Facet:
    """Halfspace l(x) = offset - normal.x >= 0, valid on S and tight on a facet."""

    normal: tuple
    offset: Fraction

    def value(self, point: Sequence) -> Fraction:
        return self.offset - sum(n * Fraction(x) for n, x in zip(self.normal, point))


@dataclass
class LevelReport:
    facets: list[Facet]
    levels: list[int]
    facet_values: list[tuple]
    overall_level: int
    is_2_level: bool
    th_k_bound: int
    hull_dim: int = 0


def _exact_points(S: Sequence[Sequence]) -> list[tuple]:
    pts = [tuple(Fraction(c) for c in p) for p in S]
    if not pts:
        raise ValueError("empty point set")
    n = len(pts[0])
    if any(len(p) != n for p in pts):
        raise ValueError("points disagree on dimension")
    if len(set(pts)) != len(pts):
        raise ValueError("duplicate points")
    return pts


def _row_reduce(rows: list[list[Fraction]]) -> list[list[Fraction]]:
    """Independent rows of the input, reduced (used for rank and spans)."""
    out: list[tuple[int, list[Fraction]]] = []
    for row in rows:
        v = list(row)
        for piv, rvec in out:
            f = v[piv] / rvec[piv]
            if f:
                for t in range(len(v)):
                    if rvec[t]:
                        v[t] -= f * rvec[t]
        piv = next((t for t in range(len(v)) if v[t]), None)
        if piv is not None:
            out.append((piv, v))
    return [v for _, v in out]


def _solve_coords(basis: list[list[Fraction]], vec: list[Fraction]) -> list[Fraction]:
    """Coefficients expressing vec over the (independent) basis rows."""
    work: list[tuple[int, list[Fraction], list[Fraction]]] = []
    for i, row in enumerate(basis):
        v = list(row)
        expr = [Fraction(0)] * len(basis)
        expr[i] = Fraction(1)
        for piv, rvec, rexpr in work:
            f = v[piv] / rvec[piv]
            if f:
                for t in range(len(v)):
                    if rvec[t]:
                        v[t] -= f * rvec[t]
                for t in range(len(basis)):
                    if rexpr[t]:
                        expr[t] -= f * rexpr[t]
        piv = next(t for t in range(len(v)) if v[t])
        work.append((piv, v, expr))
    v = list(vec)
    coeffs = [Fraction(0)] * len(basis)
    for piv, rvec, rexpr in work:
        f = v[piv] / rvec[piv]
        if f:
            for t in range(len(v)):
                if rvec[t]:
                    v[t] -= f * rvec[t]
            for t in range(len(basis)):
                coeffs[t] += f * rexpr[t]
    if any(v):
        raise ValueError("vector outside the affine hull")
    return coeffs


def _affine_frame(pts: list[tuple]):
    """(origin, basis rows, hull coordinates of every point)."""
    origin = pts[0]
    diffs = [[a - b for a, b in zip(p, origin)] for p in pts[1:]]
    raw_basis: list[list[Fraction]] = []
    reduced: list[tuple[int, list[Fraction]]] = []
    for row in diffs:
        v = list(row)
        for piv, rvec in reduced:
            f = v[piv] / rvec[piv]
            if f:
                for t in range(len(v)):
                    if rvec[t]:
                        v[t] -= f * rvec[t]
        piv = next((t for t in range(len(v)) if v[t]), None)
        if piv is not None:
            reduced.append((piv, v))
            raw_basis.append(list(row))
    coords = [
        tuple(_solve_coords(raw_basis, [a - b for a, b in zip(p, origin)]))
        for p in pts
    ]
    return origin, raw_basis, coords


def _primitive(vals: list[Fraction]) -> list[int]:
    denom = 1
    for v in vals:
        denom = denom * v.denominator // gcd(denom, v.denominator)
    ints = [int(v * denom) for v in vals]
    g = 0
    for x in ints:
        g = gcd(g, abs(x))
    return [x // g for x in ints] if g else ints


def _hyperplane_normal(points: list[tuple], d: int) -> list[Fraction] | None:
    """Normal of the hyperplane through d affinely independent points, or None."""
    rows = [[points[i][t] - points[0][t] for t in range(d)] for i in range(1, d)]
    reduced = _row_reduce(rows)
    if len(reduced) != d - 1:
        return None
    # back-substitute for a nullspace vector of the reduced row system
    pivots = []
    seen = []
    for v in reduced:
        piv = next(t for t in range(d) if v[t])
        pivots.append(piv)
        seen.append(v)
    free = next(t for t in range(d) if t not in pivots)
    normal = [Fraction(0)] * d
    normal[free] = Fraction(1)
    for v, piv in reversed(list(zip(seen, pivots))):
        s = sum(v[t] * normal[t] for t in range(d) if t != piv)
        normal[piv] = -s / v[piv]
    return normal


def enumerate_facets(S: Sequence[Sequence]) -> list[Facet]:
    """All facets of conv(S), exact, in ambient coordinates.

    Exhaustive over d-subsets of points spanning hyperplanes of the affine
    hull; refuses inputs beyond the configured caps.
    """
    pts = _exact_points(S)
    if len(pts) > MAX_POINTS:
        raise CapExceededError(f"{len(pts)} points exceeds cap {MAX_POINTS}")
    origin, basis, coords = _affine_frame(pts)
    d = len(basis)
    if d == 0:
        raise ValueError("point set is a single point; no facets")
    if d > MAX_HULL_DIM:
        raise CapExceededError(f"hull dimension {d} exceeds cap {MAX_HULL_DIM}")
    found: dict[tuple, tuple] = {}
    for combo in itertools.combinations(range(len(pts)), d):
        sub = [coords[i] for i in combo]
        normal = _hyperplane_normal(sub, d) if d > 1 else [Fraction(1)]
        if normal is None:
            continue
        offset = sum(n * c for n, c in zip(normal, sub[0]))
        vals = [offset - sum(n * c for n, c in zip(normal, q)) for q in coords]
        if all(v >= 0 for v in vals):
            pass
        elif all(v <= 0 for v in vals):
            normal = [-n for n in normal]
            offset = -offset
        else:
            continue
        key_ints = _primitive(normal + [offset])
        key = tuple(key_ints)
        if key not in found:
            found[key] = (list(normal), offset)
    facets = []
    for normal_frame, offset_frame in found.values():
        facets.append(_lift_facet(normal_frame, offset_frame, origin, basis))
    facets.sort(key=lambda f: (f.normal, f.offset))
    return facets


def _lift_facet(
    normal_frame: list[Fraction],
    offset_frame: Fraction,
    origin: tuple,
    basis: list[list[Fraction]],
) -> Facet:
    """Ambient halfspace inducing the frame halfspace on the affine hull."""
    d = len(basis)
    nvars = len(origin)
    gram = [[sum(basis[i][t] * basis[j][t] for t in range(nvars)) for j in range(d)] for i in range(d)]
    w = _solve_linear_system(gram, normal_frame)
    ambient_normal = [
        sum(w[i] * basis[i][t] for i in range(d)) for t in range(nvars)
    ]
    ambient_offset = offset_frame + sum(
        ambient_normal[t] * origin[t] for t in range(nvars)
    )
    # primitive integer scaling preserves orientation (positive multiplier)
    ints = _primitive(ambient_normal + [ambient_offset])
    return Facet(tuple(Fraction(x) for x in ints[:-1]), Fraction(ints[-1]))


def _solve_linear_system(a: list[list[Fraction]], b: list[Fraction]) -> list[Fraction]:
    n = len(a)
    aug = [list(a[i]) + [b[i]] for i in range(n)]
    for col in range(n):
        piv = next(r for r in range(col, n) if aug[r][col])
        aug[col], aug[piv] = aug[piv], aug[col]
        pv = aug[col][col]
        aug[col] = [x / pv for x in aug[col]]
        for r in range(n):
            if r != col and aug[r][col]:
                f = aug[r][col]
                aug[r] = [x - f * y for x, y in zip(aug[r], aug[col])]
    return [aug[i][n] for i in range(n)]


def level_report(S: Sequence[Sequence]) -> LevelReport:
    """Distinct-value counts of every facet functional over the point set."""
    pts = _exact_points(S)
    _, basis, _ = _affine_frame(pts)
    facets = enumerate_facets(pts)
    levels = []
    values = []
    for f in facets:
        vals = tuple(sorted(set(f.value(p) for p in pts)))
        values.append(vals)
        levels.append(len(vals))
    overall = max(levels)
    return LevelReport(
        facets=facets,
        levels=levels,
        facet_values=values,
        overall_level=overall,
        is_2_level=overall <= 2,
        th_k_bound=overall - 1,
        hull_dim=len(basis),
    )


def th1_exact_finite(S: Sequence[Sequence]) -> bool:
    """Whether the first theta body of I(S) is exactly conv(S).

    Holds precisely when every facet hyperplane has a single parallel
    translate containing all remaining points (the 2-level property).
    """
    return level_report(S).is_2_level
