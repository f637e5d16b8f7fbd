"""Exact two-sided verification of polyhedral conjugation identities.

Each scenario kind pairs a composite convex function h with a dual formula
for its conjugate.  The left side h*(query) is evaluated directly as a sup
LP over primal variables; the right side solves the dual minimization over
a covector (an epigraph LP).  Weak duality (gap >= 0) holds unconditionally;
hypothesis flags record certified sufficient conditions under which the gap
must be exactly zero with the minimum attained, and a certified-but-nonzero
gap is treated as a kernel bug, never reported.

Layout conventions for concatenated variable blocks:
  quadrivariate functions live on (u, v, w, x) in that order;
  bibivariate f lives on (w, v), g on (x, u), and queries on (w, v);
  partial inf-convolutions identify w = x and u = v (queries on (x, v)).
"""
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

from .convexfn import (
    AffineFunctional,
    H_FORM,
    PolyhedralFunction,
    V_FORM,
    indicator_of_zero,
    sup_affine_minus_convex,
)
from .geometry import (
    AffineMap,
    Polytope,
    cone_union_is_subspace,
    polytope_contains,
    solve_linear,
)
from .interiority import boundedness_condition
from .numerics import (
    EQ,
    GE,
    EXACT,
    NEG_INF,
    POS_INF,
    Ext,
    LpBuilder,
    PreconditionError,
    StructuralError,
    Vec,
    comparison_slack,
    dot,
    ext_sub,
    frac,
    vec,
)

KINDS = (
    "sublevel",
    "trivariate",
    "fenchel",
    "quadrivariate",
    "bibivariate",
    "partial_infconv",
    "indicator_linear",
)
MODES = ("boundedness", "closed_subspace")


def as_query(q, dim: int) -> AffineFunctional:
    """Coerce a covector (plain sequence) or affine functional to a query."""
    if isinstance(q, AffineFunctional):
        query = q
    else:
        query = AffineFunctional(vec(q), Fraction(0))
    if query.dim != dim:
        raise StructuralError(
            f"query on dimension {query.dim} does not match the scenario's {dim}"
        )
    return query


@dataclass(frozen=True)
class DualityScenario:
    """One conjugation identity instance plus the queries to check it at.

    Use the per-kind constructors; they validate shapes and fill the layout
    fields.  dims is the (u, v, w, x) block-size tuple where applicable.
    """

    kind: str
    queries: tuple
    hypothesis_mode: str = "boundedness"
    psi: Optional[PolyhedralFunction] = None
    f: Optional[PolyhedralFunction] = None
    g: Optional[PolyhedralFunction] = None
    a_map: Optional[AffineMap] = None
    b_map: Optional[AffineMap] = None
    c_map: Optional[AffineMap] = None
    d_map: Optional[AffineMap] = None
    gamma: Optional[Fraction] = None
    dims: Optional[tuple] = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise StructuralError(f"unknown scenario kind {self.kind!r}")
        if self.hypothesis_mode not in MODES:
            raise StructuralError(f"unknown hypothesis mode {self.hypothesis_mode!r}")
        if not self.queries:
            raise StructuralError("a scenario needs at least one query")

    @property
    def query_dim(self) -> int:
        return self.queries[0].dim

    @staticmethod
    def sublevel(phi: PolyhedralFunction, b_map: AffineMap, gamma=None,
                 hypothesis_mode: str = "boundedness") -> "DualityScenario":
        """min of psi*(x* after B) against -inf of psi over the zero-fiber of B.

        The query space is zero-dimensional; gamma is the level used by the
        interiority flag, chosen one above the fiber infimum when omitted.
        """
        if phi.form != V_FORM:
            raise StructuralError("sublevel scenarios need a sample-form function")
        if b_map.in_dim != phi.dim:
            raise StructuralError("direction map does not act on the function's space")
        if gamma is None:
            m = fiber_inf([(phi, AffineMap.identity(phi.dim))],
                          AffineMap.zero_map(phi.dim), b_map, ())
            gamma = Fraction(1) if m is POS_INF else m + 1
        return DualityScenario(
            kind="sublevel",
            queries=(AffineFunctional((), Fraction(0)),),
            hypothesis_mode=hypothesis_mode,
            psi=phi, b_map=b_map, gamma=frac(gamma),
        )

    @staticmethod
    def trivariate(psi: PolyhedralFunction, a_map: AffineMap, b_map: AffineMap,
                   queries: Sequence, hypothesis_mode: str = "boundedness") -> "DualityScenario":
        """h(p) = inf psi over A^-1{p} intersect B^-1{0}; dual over x* after B."""
        if psi.form != V_FORM:
            raise StructuralError("trivariate scenarios need a sample-form function")
        if a_map.in_dim != psi.dim or b_map.in_dim != psi.dim:
            raise StructuralError("fiber maps must act on the function's space")
        qs = tuple(as_query(q, a_map.out_dim) for q in queries)
        return DualityScenario(
            kind="trivariate", queries=qs, hypothesis_mode=hypothesis_mode,
            psi=psi, a_map=a_map, b_map=b_map,
        )

    @staticmethod
    def fenchel(f: PolyhedralFunction, g: PolyhedralFunction, link: AffineMap,
                queries: Sequence, hypothesis_mode: str = "boundedness") -> "DualityScenario":
        """(f + g after C)*(q) against min over x* of f*(q - x*C) + g*(x*).

        g may be in piece form (finite sublinear upper functions); f must be
        in sample form so the left side stays a compact-domain sup.
        """
        if f.form != V_FORM:
            raise StructuralError("the first summand must be in sample form")
        if link.in_dim != f.dim or link.out_dim != g.dim:
            raise StructuralError("the coupling map must send f's space to g's")
        qs = tuple(as_query(q, f.dim) for q in queries)
        return DualityScenario(
            kind="fenchel", queries=qs, hypothesis_mode=hypothesis_mode,
            f=f, g=g, c_map=link,
        )

    @staticmethod
    def quadrivariate(psi: PolyhedralFunction, c_map: AffineMap, d_map: AffineMap,
                      dims: Sequence, queries: Sequence,
                      hypothesis_mode: str = "boundedness") -> "DualityScenario":
        """h(w, v) = inf over (u, x) of psi(u, v - Du, w, ...) folded via fibers.

        dims = (u, v, w, x) block sizes of psi's space; c_map: W -> X,
        d_map: U -> V; queries live on (w, v).
        """
        u, v, w, x = (int(n) for n in dims)
        if psi.form != V_FORM:
            raise StructuralError("quadrivariate scenarios need a sample-form function")
        if psi.dim != u + v + w + x:
            raise StructuralError("dims do not sum to the function's dimension")
        if c_map.in_dim != w or c_map.out_dim != x:
            raise StructuralError("first coupling must map the w-block to the x-block")
        if d_map.in_dim != u or d_map.out_dim != v:
            raise StructuralError("second coupling must map the u-block to the v-block")
        qs = tuple(as_query(q, w + v) for q in queries)
        return DualityScenario(
            kind="quadrivariate", queries=qs, hypothesis_mode=hypothesis_mode,
            psi=psi, c_map=c_map, d_map=d_map, dims=(u, v, w, x),
        )

    @staticmethod
    def bibivariate(f: PolyhedralFunction, g: PolyhedralFunction,
                    c_map: AffineMap, d_map: AffineMap, queries: Sequence,
                    hypothesis_mode: str = "boundedness") -> "DualityScenario":
        """h(w, v) = inf_u f(w, v - Du) + g(Cw, u); dual couples one covector."""
        w, x = c_map.in_dim, c_map.out_dim
        u, v = d_map.in_dim, d_map.out_dim
        if f.form != V_FORM or g.form != V_FORM:
            raise StructuralError("bibivariate scenarios need sample-form functions")
        if f.dim != w + v:
            raise StructuralError("f must live on the (w, v) product space")
        if g.dim != x + u:
            raise StructuralError("g must live on the (x, u) product space")
        qs = tuple(as_query(q, w + v) for q in queries)
        return DualityScenario(
            kind="bibivariate", queries=qs, hypothesis_mode=hypothesis_mode,
            f=f, g=g, c_map=c_map, d_map=d_map, dims=(u, v, w, x),
        )

    @staticmethod
    def partial_infconv(f: PolyhedralFunction, g: PolyhedralFunction, x_dim: int,
                        queries: Sequence, hypothesis_mode: str = "boundedness") -> "DualityScenario":
        """h(x, v) = inf_y f(x, v - y) + g(x, y), both functions on (x, v)."""
        if f.form != V_FORM or g.form != V_FORM:
            raise StructuralError("partial inf-convolution needs sample-form functions")
        if f.dim != g.dim:
            raise StructuralError("both functions must share the (x, v) space")
        x_dim = int(x_dim)
        if not 0 <= x_dim <= f.dim:
            raise StructuralError("x-block size out of range")
        v_dim = f.dim - x_dim
        qs = tuple(as_query(q, f.dim) for q in queries)
        return DualityScenario(
            kind="partial_infconv", queries=qs, hypothesis_mode=hypothesis_mode,
            f=f, g=g,
            c_map=AffineMap.identity(x_dim), d_map=AffineMap.identity(v_dim),
            dims=(v_dim, v_dim, x_dim, x_dim),
        )

    @staticmethod
    def indicator_linear(g: PolyhedralFunction, c_map: AffineMap, d_map: AffineMap,
                         queries: Sequence, hypothesis_mode: str = "boundedness") -> "DualityScenario":
        """h(w, v) = inf{g(Cw, u) : Du = v} with w ranging over a full space.

        c_map must be linear (zero offset); queries live on (w, v) and the
        conjugate is finite only when the w-covector lies in range(C^T).
        """
        if g.form != V_FORM:
            raise StructuralError("indicator scenarios need a sample-form function")
        if any(c != 0 for c in c_map.offset):
            raise StructuralError("the w-coupling must be linear (zero offset)")
        u, v = d_map.in_dim, d_map.out_dim
        w, x = c_map.in_dim, c_map.out_dim
        if g.dim != x + u:
            raise StructuralError("g must live on the (x, u) product space")
        qs = tuple(as_query(q, w + v) for q in queries)
        return DualityScenario(
            kind="indicator_linear", queries=qs, hypothesis_mode=hypothesis_mode,
            g=g, c_map=c_map, d_map=d_map, dims=(u, v, w, x),
        )


@dataclass(frozen=True)
class DualityReport:
    """Two-sided result for a single query of a scenario.

    lhs_witness is a point of the left side's variable space attaining the
    sup (kind-specific layout; for indicator scenarios it is (w, u)).
    witness is the dual covector attaining the min, when attained; it pairs
    with the kernel map through a plus sign, so rewriting a scenario into
    fiber form leaves the witness unchanged.
    """

    kind: str
    query: AffineFunctional
    hypothesis_flags: dict
    lhs: Ext
    rhs: Ext
    gap: Ext
    witness: Optional[Vec]
    lhs_witness: Optional[Vec]
    attained: bool
    unbounded_direction: Optional[Vec] = None
    notes: tuple = ()

    @property
    def all_hypotheses_hold(self) -> bool:
        return all(self.hypothesis_flags.values())


def fiber_inf(terms: Sequence, a_map: AffineMap, b_map: AffineMap, p: Sequence,
              mode: str = EXACT, tolerance=None) -> Ext:
    """inf of a sum of convex terms over {z : A z = p, B z = 0}.

    Each term is (function, map) with the function evaluated at the mapped
    point.  +inf when the fiber misses the common domain; the bounded
    domains make an unbounded LP impossible.
    """
    if not terms:
        raise StructuralError("fiber_inf needs at least one term")
    n = a_map.in_dim
    if b_map.in_dim != n:
        raise StructuralError("fiber maps act on different spaces")
    p = vec(p)
    if len(p) != a_map.out_dim:
        raise StructuralError("fiber parameter has the wrong dimension")
    b = LpBuilder()
    zvars = b.block(n)
    objective: dict = {}

    def map_rows(m: AffineMap, rhs_vec: Vec, extra=None):
        for c in range(m.out_dim):
            row = {} if extra is None else dict(extra[c])
            for j in range(n):
                coeff = m.linear[c][j]
                if coeff:
                    row[zvars[j]] = row.get(zvars[j], Fraction(0)) + coeff
            b.add(row, EQ, rhs_vec[c] - m.offset[c])

    for psi, m in terms:
        if m.in_dim != n:
            raise StructuralError("term map acts on the wrong space")
        if m.out_dim != psi.dim:
            raise StructuralError("term map does not land in the function's space")
        if psi.form == V_FORM:
            pts = [q for q, _ in psi.samples]
            vals = [val for _, val in psi.samples]
            lam = b.block(len(pts), lo=0)
            b.add({j: 1 for j in lam}, EQ, 1)
            comp = m
            for c in range(psi.dim):
                row = {lam[i]: pts[i][c] for i in range(len(pts))}
                for j in range(n):
                    coeff = comp.linear[c][j]
                    if coeff:
                        row[zvars[j]] = row.get(zvars[j], Fraction(0)) - coeff
                b.add(row, EQ, comp.offset[c])
            for i, val in enumerate(vals):
                if val:
                    objective[lam[i]] = objective.get(lam[i], Fraction(0)) + val
        else:
            t = b.var()
            for piece, const in psi.pieces:
                comp = AffineFunctional(piece, const).compose(m)
                row = {t: Fraction(1)}
                for j in range(n):
                    if comp.coeffs[j]:
                        row[zvars[j]] = row.get(zvars[j], Fraction(0)) - comp.coeffs[j]
                b.add(row, GE, comp.constant)
            objective[t] = objective.get(t, Fraction(0)) + 1
    map_rows(a_map, p)
    map_rows(b_map, (Fraction(0),) * b_map.out_dim)
    b.set_objective(objective)
    res = b.solve(mode, tolerance)
    if res.status == "infeasible":
        return POS_INF
    if res.status != "optimal":
        raise RuntimeError("fiber LP unbounded on bounded domains; kernel is unsound")
    return res.value


def _sup_lhs(query_phi: AffineFunctional, terms: Sequence, mode, tolerance):
    """(lhs value, attaining point) with unbounded ruled out by compactness."""
    sup = sup_affine_minus_convex(query_phi, terms, mode, tolerance)
    if sup.status == "unbounded":
        raise RuntimeError("sup LP unbounded on bounded domains; kernel is unsound")
    if sup.status == "empty":
        return NEG_INF, None
    return sup.value, sup.argmax


def _epigraph_solve(b: LpBuilder, xs, mode, tolerance):
    """(rhs value, witness covector, unbounded direction) from a min LP."""
    res = b.solve(mode, tolerance)
    if res.status == "unbounded":
        return NEG_INF, None, tuple(res.ray[j] for j in xs)
    if res.status == "infeasible":
        return POS_INF, None, None
    return res.value, tuple(res.point[j] for j in xs), None


def _trivariate_lhs(psi, a_map, b_map, query, mode, tolerance):
    terms = [
        (psi, AffineMap.identity(psi.dim)),
        (indicator_of_zero(b_map.out_dim), b_map),
    ]
    return _sup_lhs(query.compose(a_map), terms, mode, tolerance)


def _trivariate_rhs(psi, a_map, b_map, query, mode, tolerance):
    b = LpBuilder()
    t = b.var()
    xs = b.block(b_map.out_dim)
    for z, v in psi.samples:
        bz = b_map(z)
        row = {t: Fraction(1)}
        for c, xvar in enumerate(xs):
            if bz[c]:
                row[xvar] = -bz[c]
        b.add(row, GE, query(a_map(z)) - v)
    b.set_objective({t: 1})
    return _epigraph_solve(b, xs, mode, tolerance)


def _fenchel_lhs(f, g, link, query, mode, tolerance):
    terms = [(f, AffineMap.identity(f.dim)), (g, link)]
    return _sup_lhs(query, terms, mode, tolerance)


def _fenchel_rhs(f, g, link, query, mode, tolerance):
    b = LpBuilder()
    t_f = b.var()
    xs = b.block(g.dim)
    objective = {t_f: Fraction(1)}
    for p, v in f.samples:
        cp = link(p)
        row = {t_f: Fraction(1)}
        for c, xvar in enumerate(xs):
            if cp[c]:
                row[xvar] = cp[c]
        b.add(row, GE, query(p) - v)
    if g.form == V_FORM:
        t_g = b.var()
        objective[t_g] = Fraction(1)
        for q, w in g.samples:
            row = {t_g: Fraction(1)}
            for c, xvar in enumerate(xs):
                if q[c]:
                    row[xvar] = -q[c]
            b.add(row, GE, -w)
    else:
        # piece-form conjugate: finite exactly on the hull of the slopes
        theta = b.block(len(g.pieces), lo=0)
        b.add({j: 1 for j in theta}, EQ, 1)
        for c, xvar in enumerate(xs):
            row = {xvar: Fraction(1)}
            for j, (slope, _) in enumerate(g.pieces):
                if slope[c]:
                    row[theta[j]] = -slope[c]
            b.add(row, EQ, 0)
        for j, (_, const) in enumerate(g.pieces):
            if const:
                objective[theta[j]] = -const
    b.set_objective(objective)
    return _epigraph_solve(b, xs, mode, tolerance)


def _bibiv_outer_maps(c_map, d_map, dims):
    """Projection and term maps for the (w, v, u) outer space."""
    u, v, w, x = dims
    total = w + v + u

    def unit_row(j):
        return tuple(Fraction(1 if k == j else 0) for k in range(total))

    proj_wv = AffineMap(
        tuple(unit_row(j) for j in range(w + v)),
        (Fraction(0),) * (w + v), total,
    )
    f_rows = [unit_row(j) for j in range(w)]
    for r in range(v):
        row = [Fraction(0)] * total
        row[w + r] = Fraction(1)
        for k in range(u):
            row[w + v + k] = -d_map.linear[r][k]
        f_rows.append(tuple(row))
    f_offset = (Fraction(0),) * w + tuple(-o for o in d_map.offset)
    m_f = AffineMap(tuple(f_rows), f_offset, total)
    g_rows = []
    for r in range(x):
        row = [Fraction(0)] * total
        for k in range(w):
            row[k] = c_map.linear[r][k]
        g_rows.append(tuple(row))
    for r in range(u):
        row = [Fraction(0)] * total
        row[w + v + r] = Fraction(1)
        g_rows.append(tuple(row))
    g_offset = tuple(c_map.offset) + (Fraction(0),) * u
    m_g = AffineMap(tuple(g_rows), g_offset, total)
    return proj_wv, m_f, m_g


def _bibiv_lhs(f, g, c_map, d_map, dims, query, mode, tolerance):
    proj_wv, m_f, m_g = _bibiv_outer_maps(c_map, d_map, dims)
    terms = [(f, m_f), (g, m_g)]
    return _sup_lhs(query.compose(proj_wv), terms, mode, tolerance)


def _bibiv_rhs(f, g, c_map, d_map, dims, query, mode, tolerance):
    u, v, w, x = dims
    v_cov = query.coeffs[w:]
    b = LpBuilder()
    t_f = b.var()
    t_g = b.var()
    xs = b.block(x)
    for p, a in f.samples:
        cw = c_map(p[:w])
        row = {t_f: Fraction(1)}
        for c, xvar in enumerate(xs):
            if cw[c]:
                row[xvar] = cw[c]
        b.add(row, GE, query(p) - a)
    for q, bval in g.samples:
        du = d_map(q[x:])
        row = {t_g: Fraction(1)}
        for c, xvar in enumerate(xs):
            if q[c]:
                row[xvar] = -q[c]
        b.add(row, GE, dot(v_cov, du) - bval)
    b.set_objective({t_f: 1, t_g: 1})
    return _epigraph_solve(b, xs, mode, tolerance)


def _indicator_lhs(g, c_map, d_map, dims, query, mode, tolerance):
    """sup over (w, u in dom-g slices) of <w', w> + v'(Du) + q0 - g(Cw, u).

    One LP: w free, simplex weights over g's samples coupled by Cw = the
    x-part of the sample combination.  +inf when the w-covector escapes
    range(C^T); -inf when no sample combination meets range(C) x U.
    """
    u, v, w, x = dims
    w_cov, v_cov = query.coeffs[:w], query.coeffs[w:]
    pts = [q for q, _ in g.samples]
    vals = [val for _, val in g.samples]
    b = LpBuilder("max")
    wvars = b.block(w)
    lam = b.block(len(pts), lo=0)
    b.add({j: 1 for j in lam}, EQ, 1)
    for c in range(x):
        row = {lam[i]: pts[i][c] for i in range(len(pts))}
        for j in range(w):
            coeff = c_map.linear[c][j]
            if coeff:
                row[wvars[j]] = row.get(wvars[j], Fraction(0)) - coeff
        b.add(row, EQ, 0)
    objective = {wvars[j]: w_cov[j] for j in range(w) if w_cov[j]}
    for i in range(len(pts)):
        gain = dot(v_cov, d_map(pts[i][x:])) - vals[i]
        if gain:
            objective[lam[i]] = objective.get(lam[i], Fraction(0)) + gain
    b.set_objective(objective, constant=query.constant)
    res = b.solve(mode, tolerance)
    if res.status == "infeasible":
        return NEG_INF, None
    if res.status == "unbounded":
        return POS_INF, None
    combo_u = tuple(
        sum((res.point[lam[i]] * pts[i][x + c] for i in range(len(pts))),
            start=Fraction(0))
        for c in range(u)
    )
    witness = tuple(res.point[j] for j in wvars) + combo_u
    return res.value, witness


def _indicator_rhs(g, c_map, d_map, dims, query, mode, tolerance):
    """min g*(x*, v' after D) + q0 subject to x* after C = w'."""
    u, v, w, x = dims
    w_cov, v_cov = query.coeffs[:w], query.coeffs[w:]
    b = LpBuilder()
    t = b.var()
    xs = b.block(x)
    for j in range(w):
        b.add({xs[c]: c_map.linear[c][j] for c in range(x) if c_map.linear[c][j]},
              EQ, w_cov[j])
    for q, bval in g.samples:
        du = d_map(q[x:])
        row = {t: Fraction(1)}
        for c, xvar in enumerate(xs):
            if q[c]:
                row[xvar] = -q[c]
        b.add(row, GE, dot(v_cov, du) - bval)
    b.set_objective({t: 1}, constant=query.constant)
    return _epigraph_solve(b, xs, mode, tolerance)


def product_function(f: PolyhedralFunction, g: PolyhedralFunction) -> PolyhedralFunction:
    """Sample form of (p, x) -> f(p) + g(x); envelopes add across blocks."""
    if f.form != V_FORM or g.form != V_FORM:
        raise StructuralError("products need sample-form factors")
    samples = []
    for p, a in f.samples:
        for q, bval in g.samples:
            samples.append((p + q, a + bval))
    return PolyhedralFunction.v_form(f.dim + g.dim, samples)


def fenchel_to_trivariate(s: DualityScenario) -> DualityScenario:
    """Product construction: psi(p, x) = f(p) + g(x), A = p, B = x - Cp."""
    if s.kind != "fenchel":
        raise PreconditionError("expected a fenchel scenario")
    if s.g.form != V_FORM:
        raise PreconditionError("piece-form upper functions have no compact product")
    f, g, link = s.f, s.g, s.c_map
    psi = product_function(f, g)
    n, m = f.dim, g.dim
    a_rows = tuple(
        tuple(Fraction(1 if j == c else 0) for j in range(n + m)) for c in range(n)
    )
    a_map = AffineMap(a_rows, (Fraction(0),) * n, n + m)
    b_rows = []
    for c in range(m):
        row = [-x for x in link.linear[c]] + [
            Fraction(1 if j == c else 0) for j in range(m)
        ]
        b_rows.append(tuple(row))
    b_map = AffineMap(tuple(b_rows), tuple(-o for o in link.offset), n + m)
    return DualityScenario.trivariate(psi, a_map, b_map, s.queries, s.hypothesis_mode)


def bibivariate_to_quadrivariate(s: DualityScenario) -> DualityScenario:
    """Product construction: psi(u, v, w, x) = f(w, v) + g(x, u)."""
    if s.kind not in ("bibivariate", "partial_infconv"):
        raise PreconditionError("expected a bibivariate-family scenario")
    u, v, w, x = s.dims
    samples = []
    for p, a in s.f.samples:
        w_i, v_i = p[:w], p[w:]
        for q, bval in s.g.samples:
            x_j, u_j = q[:x], q[x:]
            samples.append((u_j + v_i + w_i + x_j, a + bval))
    psi = PolyhedralFunction.v_form(u + v + w + x, samples)
    return DualityScenario.quadrivariate(
        psi, s.c_map, s.d_map, s.dims, s.queries, s.hypothesis_mode
    )


def quad_fiber_maps(c_map: AffineMap, d_map: AffineMap, dims: Sequence):
    """A(u,v,w,x) = (w, v + Du) and B(u,v,w,x) = x - Cw on the (u,v,w,x) layout."""
    u, v, w, x = (int(n) for n in dims)
    total = u + v + w + x
    a_rows = []
    for r in range(w):
        row = [Fraction(0)] * total
        row[u + v + r] = Fraction(1)
        a_rows.append(tuple(row))
    for r in range(v):
        row = [Fraction(0)] * total
        row[u + r] = Fraction(1)
        for k in range(u):
            row[k] = d_map.linear[r][k]
        a_rows.append(tuple(row))
    a_offset = (Fraction(0),) * w + tuple(d_map.offset)
    a_map = AffineMap(tuple(a_rows), a_offset, total)
    b_rows = []
    for r in range(x):
        row = [Fraction(0)] * total
        row[u + v + w + r] = Fraction(1)
        for k in range(w):
            row[u + v + k] = -c_map.linear[r][k]
        b_rows.append(tuple(row))
    b_map = AffineMap(tuple(b_rows), tuple(-o for o in c_map.offset), total)
    return a_map, b_map


def quadrivariate_to_trivariate(s: DualityScenario) -> DualityScenario:
    if s.kind != "quadrivariate":
        raise PreconditionError("expected a quadrivariate scenario")
    a_map, b_map = quad_fiber_maps(s.c_map, s.d_map, s.dims)
    return DualityScenario.trivariate(s.psi, a_map, b_map, s.queries, s.hypothesis_mode)


def scenario_to_trivariate(s: DualityScenario) -> DualityScenario:
    """Rewrite any compact-data scenario as a trivariate one, exactly."""
    if s.kind == "trivariate":
        return s
    if s.kind == "sublevel":
        return DualityScenario.trivariate(
            s.psi, AffineMap.zero_map(s.psi.dim), s.b_map, s.queries,
            s.hypothesis_mode,
        )
    if s.kind == "fenchel":
        return fenchel_to_trivariate(s)
    if s.kind == "quadrivariate":
        return quadrivariate_to_trivariate(s)
    if s.kind in ("bibivariate", "partial_infconv"):
        return quadrivariate_to_trivariate(bibivariate_to_quadrivariate(s))
    raise PreconditionError(
        "indicator scenarios quantify over a full vector space and have no "
        "compact trivariate rewrite"
    )


def _zero_fiber_nonempty(psi, b_map, mode, tolerance) -> bool:
    images = [b_map(p) for p, _ in psi.samples]
    return polytope_contains(Polytope.of(images), (Fraction(0),) * b_map.out_dim,
                             mode, tolerance)


def _boundedness_flag(psi, a_map, b_map, mode, tolerance) -> bool:
    delta = max(v for _, v in psi.samples) + 1
    seen = set()
    for z0, _ in psi.samples:
        # the tested slice depends on z0 only through its a_map image
        key = a_map(z0)
        if key in seen:
            continue
        seen.add(key)
        if boundedness_condition(psi, a_map, b_map, z0, delta, mode, tolerance):
            return True
    return False


def _scenario_flags(s: DualityScenario, mode, tolerance):
    notes: list = []
    flags: dict = {}
    if s.kind == "sublevel":
        from .interiority import SublevelQuery, interiority_margin

        q = SublevelQuery.build(s.psi, s.b_map, s.gamma)
        flags["subspace"] = q.subspace_ok
        flags["interiority"] = (
            interiority_margin(q, mode, tolerance).holds if q.subspace_ok else False
        )
        flags["h_proper"] = _zero_fiber_nonempty(s.psi, s.b_map, mode, tolerance)
        notes.append(f"interiority tested at level {s.gamma}")
        return flags, tuple(notes)
    if s.kind == "indicator_linear":
        u, v, w, x = s.dims
        x_pts = [q[:x] for q, _ in s.g.samples]
        c_cols = [
            tuple(s.c_map.linear[r][j] for r in range(x)) for j in range(w)
        ]
        if s.hypothesis_mode == "boundedness":
            proj_u_rows = tuple(
                tuple(Fraction(1 if c == x + r else 0) for c in range(x + u))
                for r in range(u)
            )
            proj_u = AffineMap(proj_u_rows, (Fraction(0),) * u, x + u)
            delta = max(val for _, val in s.g.samples) + 1
            found = False
            for q, _ in s.g.samples:
                if solve_linear(s.c_map.linear, q[:x]) is None:
                    continue
                slide_rows = tuple(
                    tuple(Fraction(1 if c == r else 0) for c in range(x + u))
                    for r in range(x)
                )
                slide = AffineMap(slide_rows, tuple(-t for t in q[:x]), x + u)
                if boundedness_condition(s.g, proj_u, slide, q, delta, mode, tolerance):
                    found = True
                    break
            flags["boundedness"] = found
            notes.append("delta_uniformity_not_checked")
        else:
            ok, _ = cone_union_is_subspace(x_pts, lineality=c_cols)
            flags["closed_subspace"] = ok
            notes.append("queries are continuous in finite dimension")
        b = LpBuilder()
        lam = b.block(len(x_pts), lo=0)
        wvars = b.block(w)
        b.add({j: 1 for j in lam}, EQ, 1)
        for c in range(x):
            row = {lam[i]: x_pts[i][c] for i in range(len(x_pts))}
            for j in range(w):
                if s.c_map.linear[c][j]:
                    row[wvars[j]] = row.get(wvars[j], Fraction(0)) - s.c_map.linear[c][j]
            b.add(row, EQ, 0)
        b.set_objective({})
        flags["h_proper"] = b.solve(mode, tolerance).status == "optimal"
        notes.append("the w-space is a full vector space by construction")
        return flags, tuple(notes)
    if s.kind == "fenchel" and s.g.form == H_FORM:
        if s.hypothesis_mode == "boundedness":
            flags["boundedness"] = True
            notes.append("delta_uniformity_not_checked")
        else:
            flags["closed_subspace"] = True
        flags["h_proper"] = True
        notes.append("piece-form upper function is finite everywhere")
        return flags, tuple(notes)
    tri = scenario_to_trivariate(s)
    if s.hypothesis_mode == "boundedness":
        flags["boundedness"] = _boundedness_flag(
            tri.psi, tri.a_map, tri.b_map, mode, tolerance
        )
        notes.append("delta_uniformity_not_checked")
    else:
        ok, _ = cone_union_is_subspace([tri.b_map(p) for p, _ in tri.psi.samples])
        flags["closed_subspace"] = ok
        notes.append("queries are continuous in finite dimension")
    flags["h_proper"] = _zero_fiber_nonempty(tri.psi, tri.b_map, mode, tolerance)
    notes.append("sample-form functions are closed by construction")
    return flags, tuple(notes)


def _query_sides(s: DualityScenario, query: AffineFunctional, mode, tolerance):
    if s.kind in ("trivariate", "sublevel"):
        a_map = s.a_map if s.kind == "trivariate" else AffineMap.zero_map(s.psi.dim)
        lhs, lhs_wit = _trivariate_lhs(s.psi, a_map, s.b_map, query, mode, tolerance)
        rhs, wit, ray = _trivariate_rhs(s.psi, a_map, s.b_map, query, mode, tolerance)
    elif s.kind == "fenchel":
        lhs, lhs_wit = _fenchel_lhs(s.f, s.g, s.c_map, query, mode, tolerance)
        rhs, wit, ray = _fenchel_rhs(s.f, s.g, s.c_map, query, mode, tolerance)
    elif s.kind == "quadrivariate":
        a_map, b_map = quad_fiber_maps(s.c_map, s.d_map, s.dims)
        lhs, lhs_wit = _trivariate_lhs(s.psi, a_map, b_map, query, mode, tolerance)
        rhs, wit, ray = _trivariate_rhs(s.psi, a_map, b_map, query, mode, tolerance)
    elif s.kind in ("bibivariate", "partial_infconv"):
        lhs, lhs_wit = _bibiv_lhs(
            s.f, s.g, s.c_map, s.d_map, s.dims, query, mode, tolerance
        )
        rhs, wit, ray = _bibiv_rhs(
            s.f, s.g, s.c_map, s.d_map, s.dims, query, mode, tolerance
        )
    else:
        lhs, lhs_wit = _indicator_lhs(
            s.g, s.c_map, s.d_map, s.dims, query, mode, tolerance
        )
        rhs, wit, ray = _indicator_rhs(
            s.g, s.c_map, s.d_map, s.dims, query, mode, tolerance
        )
    return lhs, lhs_wit, rhs, wit, ray


def verify(s: DualityScenario, mode: str = EXACT, tolerance=None) -> list:
    """Two-sided check of the scenario's identity at each query.

    Always returns a report per query.  Weak duality (gap >= 0) is enforced
    as a kernel invariant; equality is only asserted when every hypothesis
    flag is certified, in which case a nonzero gap raises rather than being
    reported as a counterexample.
    """
    flags, notes = _scenario_flags(s, mode, tolerance)
    # float-mode pivoting leaves roundoff in the gap; the invariants and
    # attainment then hold up to the solve tolerance (exactly, in exact mode)
    slack = comparison_slack(mode, tolerance)
    reports = []
    for query in s.queries:
        lhs, lhs_wit, rhs, wit, ray = _query_sides(s, query, mode, tolerance)
        gap = ext_sub(rhs, lhs)
        if gap < -slack:
            raise RuntimeError("weak duality violated; LP kernel is unsound")
        extra = ()
        if s.kind == "indicator_linear" and lhs is POS_INF:
            extra = ("query escapes range(C^T); both sides are +inf",)
        attained = wit is not None and abs(gap) <= slack
        if all(flags.values()) and lhs not in (POS_INF, NEG_INF):
            if abs(gap) > slack or not attained:
                raise RuntimeError(
                    "certified hypotheses with a nonzero gap; LP kernel is unsound"
                )
        reports.append(DualityReport(
            kind=s.kind, query=query, hypothesis_flags=dict(flags),
            lhs=lhs, rhs=rhs, gap=gap, witness=wit, lhs_witness=lhs_wit,
            attained=attained, unbounded_direction=ray, notes=notes + extra,
        ))
    return reports


def verify_indicator_linear(s: DualityScenario, mode: str = EXACT, tolerance=None) -> list:
    if s.kind != "indicator_linear":
        raise PreconditionError("expected an indicator scenario")
    return verify(s, mode, tolerance)
