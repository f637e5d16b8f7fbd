"""Exact interiority tests for affine images of sublevel sets.

The central question: given a sample-form convex function Phi, an affine map
B into a direction space, and a level gamma, does 0 lie in the relative
interior of B({Phi < gamma})?  Everything reduces to small LPs over simplex
weights, so answers are exact in the default mode.
"""
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from .convexfn import PolyhedralFunction, V_FORM, evaluate
from .geometry import AffineMap, Subspace, cone_union_is_subspace, polytope_contains, vec_neg
from .numerics import (
    EQ,
    LE,
    EXACT,
    POS_INF,
    Ext,
    LpBuilder,
    PreconditionError,
    StructuralError,
    Vec,
    comparison_slack,
    exact_point,
    frac,
    vec,
)


@dataclass(frozen=True)
class SublevelQuery:
    """A function, a map into the direction space, and a level to test at.

    y is the span of the scaled images of dom(phi) under b_map when those
    images positively span a linear subspace; subspace_ok records whether
    they do.  Most operations require subspace_ok, since the relative
    interior is taken within y.
    """

    phi: PolyhedralFunction
    b_map: AffineMap
    gamma: Fraction
    subspace_ok: bool
    y: Optional[Subspace]

    @staticmethod
    def build(phi: PolyhedralFunction, b_map: AffineMap, gamma) -> "SublevelQuery":
        if phi.form != V_FORM:
            raise StructuralError("sublevel queries need a sample-form function")
        if b_map.in_dim != phi.dim:
            raise StructuralError("direction map does not act on the function's space")
        images = [b_map(p) for p, _ in phi.samples]
        ok, span = cone_union_is_subspace(images)
        return SublevelQuery(phi, b_map, frac(gamma), ok, span)


@dataclass(frozen=True)
class MarginResult:
    holds: bool
    margin: Fraction
    level_used: Fraction


@dataclass(frozen=True)
class Theorem20Result:
    """Three renderings of the same interiority property, computed separately.

    c24: a positive margin exists around 0 inside the image of the strict
    sublevel set.  c25: 0 is in that image.  c26: the infimum of phi over
    the zero-fiber of b_map is below gamma.
    """

    c24: bool
    c25: bool
    c26: bool
    fiber_value: Ext

    def as_tuple(self) -> tuple:
        return (self.c24, self.c25, self.c26)


@dataclass(frozen=True)
class Lemma19aResult:
    """Scaled-image covering report: per probe, the smallest scale that works."""

    ok: bool
    assignments: tuple

    def __bool__(self) -> bool:
        return self.ok

    @property
    def failing_probe(self) -> Optional[Vec]:
        for probe, i in self.assignments:
            if i is None:
                return probe
        return None


@dataclass(frozen=True)
class Corollary21Result:
    gamma: Fraction
    margin: MarginResult


def _image_rows(b: LpBuilder, lam, points: Sequence[Vec], m: AffineMap,
                target: Vec, r_var=None, direction: Optional[Vec] = None):
    """Add rows sum_i lam_i * m(p_i)[c] [- r*d[c]] = target[c]."""
    images = [m(p) for p in points]
    for c in range(m.out_dim):
        row = {lam[i]: images[i][c] for i in range(len(points))}
        if r_var is not None:
            row[r_var] = row.get(r_var, Fraction(0)) - direction[c]
        b.add(row, EQ, target[c])


def _fiber_value(phi: PolyhedralFunction, b_map: AffineMap, target: Vec,
                 extra=None, mode: str = EXACT, tolerance=None):
    """(inf of phi over {b_map z = target} [and a_map z = a_target], argmin).

    Returns (+inf, None) when the fiber misses the domain.  The infimum is
    attained, so a finite value always comes with an attaining point.
    """
    points = [p for p, _ in phi.samples]
    values = [v for _, v in phi.samples]
    b = LpBuilder()
    lam = b.block(len(points), lo=0)
    b.add({j: 1 for j in lam}, EQ, 1)
    _image_rows(b, lam, points, b_map, target)
    if extra is not None:
        a_map, a_target = extra
        _image_rows(b, lam, points, a_map, a_target)
    b.set_objective({lam[i]: values[i] for i in range(len(points))})
    res = b.solve(mode, tolerance)
    if res.status == "infeasible":
        return POS_INF, None
    if res.status != "optimal":
        raise StructuralError("sample values bound the fiber LP below")
    weights = [res.point[j] for j in lam]
    argmin = tuple(
        sum((w * p[c] for w, p in zip(weights, points)), start=Fraction(0))
        for c in range(phi.dim)
    )
    return res.value, argmin


def _direction_reach(phi: PolyhedralFunction, b_map: AffineMap, level: Fraction,
                     directions: Sequence[Vec], extra=None,
                     mode: str = EXACT, tolerance=None) -> Fraction:
    """Largest r so that every r*d is hit by B from the level-sublevel set.

    One small LP per direction; the result is the minimum of the
    per-direction maxima.  Callers pick levels strictly above the fiber
    infimum, so r = 0 stays feasible and a zero minimum exits early.
    """
    if not directions:
        raise StructuralError("reach needs at least one direction")
    points = [p for p, _ in phi.samples]
    values = [v for _, v in phi.samples]
    zero = (Fraction(0),) * b_map.out_dim
    best = None
    for d in directions:
        b = LpBuilder("max")
        r = b.var(lo=0)
        lam = b.block(len(points), lo=0)
        b.add({j: 1 for j in lam}, EQ, 1)
        _image_rows(b, lam, points, b_map, zero, r_var=r, direction=d)
        b.add({lam[i]: values[i] for i in range(len(points))}, LE, level)
        if extra is not None:
            a_map, a_target = extra
            _image_rows(b, lam, points, a_map, a_target)
        b.set_objective({r: 1})
        res = b.solve(mode, tolerance)
        if res.status != "optimal":
            raise StructuralError("reach LP is feasible at r = 0 and bounded")
        if best is None or res.value < best:
            best = res.value
        if best == 0:
            break
    return best


def _margin_sweep(phi: PolyhedralFunction, b_map: AffineMap, gamma: Fraction,
                  directions: Sequence[Vec], extra=None,
                  mode: str = EXACT, tolerance=None) -> MarginResult:
    """Dyadic level sweep deciding relative interiority with a margin.

    The per-level reach is concave and nondecreasing in the level, so a zero
    reach at two increasing levels forces zero reach at every level below
    gamma; the sweep never needs more than two levels.
    """
    m, _ = _fiber_value(phi, b_map, (Fraction(0),) * b_map.out_dim, extra,
                        mode, tolerance)
    if m is POS_INF or m >= gamma:
        return MarginResult(False, Fraction(0), gamma)
    if not directions:
        # zero-dimensional direction space: membership is all there is
        return MarginResult(True, Fraction(0), gamma)
    if not isinstance(m, Fraction):
        # float-mode fiber value: any exact level between it and gamma
        # serves the sweep, and LP rows are built exactly in every mode
        m = Fraction(m)
    level = gamma
    for k in (1, 2):
        level = gamma - (gamma - m) / 2**k
        reach = _direction_reach(phi, b_map, level, directions, extra,
                                 mode, tolerance)
        if reach > 0:
            return MarginResult(True, reach, level)
    return MarginResult(False, Fraction(0), level)


def _basis_directions(y: Subspace) -> list:
    dirs = []
    for base in y.basis:
        dirs.append(base)
        dirs.append(vec_neg(base))
    return dirs


def interiority_margin(q: SublevelQuery, mode: str = EXACT, tolerance=None) -> MarginResult:
    """Decide 0 in relint B({phi < gamma}) and report a witnessing margin.

    The margin is a radius r > 0 such that every +-r*(basis direction of y)
    is reached by b_map from the strict sublevel set; level_used is the
    sublevel height at which that radius was certified.  With trivial y the
    convention is membership only: margin 0 at level gamma.
    """
    if not q.subspace_ok:
        raise PreconditionError(
            "scaled images of the domain do not positively span a subspace; "
            "the relative interior is not defined by this query"
        )
    if q.y.is_trivial:
        m, _ = _fiber_value(q.phi, q.b_map, (Fraction(0),) * q.b_map.out_dim,
                            None, mode, tolerance)
        return MarginResult(m < q.gamma, Fraction(0), q.gamma)
    return _margin_sweep(q.phi, q.b_map, q.gamma, _basis_directions(q.y),
                         None, mode, tolerance)


def boundedness_condition(psi: PolyhedralFunction, a_map: AffineMap,
                          b_map: AffineMap, z0: Sequence, delta,
                          mode: str = EXACT, tolerance=None) -> bool:
    """Full-space interiority of B over one fiber of A, below level delta.

    Decides 0 in int B({z : a_map z = a_map z0, psi z < delta}) with the
    interior taken in all of B's target space.  z0 must lie in dom psi.
    """
    if psi.form != V_FORM:
        raise StructuralError("the boundedness test needs a sample-form function")
    if a_map.in_dim != psi.dim or b_map.in_dim != psi.dim:
        raise StructuralError("fiber and direction maps must act on the function's space")
    z0 = vec(z0)
    if not polytope_contains(psi.domain(), z0, mode, tolerance):
        raise PreconditionError(f"base point {z0} lies outside the domain")
    delta = frac(delta)
    extra = (a_map, a_map(z0))
    dim = b_map.out_dim
    units = []
    for c in range(dim):
        e = tuple(Fraction(1 if i == c else 0) for i in range(dim))
        units.append(e)
        units.append(vec_neg(e))
    return _margin_sweep(psi, b_map, delta, units, extra, mode, tolerance).holds


def theorem20_equivalence(q: SublevelQuery, mode: str = EXACT, tolerance=None) -> Theorem20Result:
    """Compute the margin, membership, and infimum forms independently.

    c26 reads the fiber LP's optimal value; c25 re-evaluates the fiber LP's
    attaining point through the independent evaluation LP; c24 runs the full
    margin sweep.  All three must agree on every valid query.
    """
    if not q.subspace_ok:
        raise PreconditionError(
            "scaled images of the domain do not positively span a subspace; "
            "the equivalence needs that precondition"
        )
    m, argmin = _fiber_value(q.phi, q.b_map, (Fraction(0),) * q.b_map.out_dim,
                             None, mode, tolerance)
    c26 = m is not POS_INF and m < q.gamma
    if argmin is None:
        c25 = False
    else:
        # float-mode argmin components are rationalized so the evaluation
        # LP is built exactly; the agreement check then allows the solve
        # tolerance instead of demanding float identity
        value = evaluate(q.phi, exact_point(argmin), mode, tolerance)
        if abs(value - m) > comparison_slack(mode, tolerance):
            raise RuntimeError("fiber argmin re-evaluation disagrees; LP kernel is unsound")
        c25 = value < q.gamma
    c24 = interiority_margin(q, mode, tolerance).holds
    return Theorem20Result(c24, c25, c26, m)


def lemma19a_check(q: SublevelQuery, delta, probes: Sequence[Sequence],
                   i_max: int = 16, mode: str = EXACT, tolerance=None) -> Lemma19aResult:
    """Cover each probe direction by an integer-scaled sublevel image.

    For probe y the check finds the smallest i <= i_max with y/i in
    B({phi < delta}); the union over i of the i-scaled images should cover
    the whole direction space, so failures carry the uncovered probe.
    """
    if not q.subspace_ok:
        raise PreconditionError("scaled domain images do not span a subspace")
    delta = frac(delta)
    m, _ = _fiber_value(q.phi, q.b_map, (Fraction(0),) * q.b_map.out_dim,
                        None, mode, tolerance)
    if m is POS_INF or delta <= m:
        raise PreconditionError("the level must exceed the fiber infimum")
    assignments = []
    all_ok = True
    for raw in probes:
        probe = vec(raw)
        if len(probe) != q.b_map.out_dim:
            raise PreconditionError(f"probe {probe} has the wrong dimension")
        if not q.y.contains(probe):
            raise PreconditionError(f"probe {probe} lies outside the direction span")
        found = None
        for i in range(1, i_max + 1):
            target = tuple(c / i for c in probe)
            value, _ = _fiber_value(q.phi, q.b_map, target, None, mode, tolerance)
            if value is not POS_INF and value < delta:
                found = i
                break
        assignments.append((probe, found))
        if found is None:
            all_ok = False
    return Lemma19aResult(all_ok, tuple(assignments))


def corollary21_auto(phi: PolyhedralFunction, b_map: AffineMap,
                     mode: str = EXACT, tolerance=None) -> Corollary21Result:
    """Pick the level fiber-infimum + 1, where interiority always holds.

    Requires a nonempty zero-fiber and the subspace precondition; with both
    in place the margin sweep must succeed, and a failure is a kernel bug.
    """
    m, _ = _fiber_value(phi, b_map, (Fraction(0),) * b_map.out_dim, None,
                        mode, tolerance)
    if m is POS_INF:
        raise PreconditionError("the zero-fiber misses the domain; no level works")
    if not isinstance(m, Fraction):
        # float-mode fiber value: the level one above it is still valid,
        # and downstream LP rows are built exactly in every mode
        m = Fraction(m)
    gamma = m + 1
    q = SublevelQuery.build(phi, b_map, gamma)
    if not q.subspace_ok:
        raise PreconditionError("scaled domain images do not span a subspace")
    res = interiority_margin(q, mode, tolerance)
    if not res.holds:
        raise RuntimeError("automatic level failed the margin sweep; LP kernel is unsound")
    return Corollary21Result(gamma, res)
