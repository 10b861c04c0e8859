"""Fixed-point restrictions of the small one-point series and their recursion.

For a fixed point p, the engine computes the Novikov-truncated series

    J^p(z) = 1 + sum_{beta != 0} Q^beta e(E|_p) <phi_p / (-z - psi)>_{0,1,beta} / (-z)

by graph sums with a virtual flag of weight -z at the marking (phi_p is the
fixed-point class, e(E|_p) the twist normalization).  On a chain-free target
every nonzero z-pole of a coefficient sits at omega_e/k for an edge e at p
and a cover degree k, and its principal part is predicted from the series at
the other end of e:

    Prin_{z = omega/k} D^p[beta]
        = C(p,e,k) / (omega/k - z) * (D^q - Prin D^q)[beta - k e](omega/k)

where D^p = (-z) J^p and C(p,e,k) is the k-cover edge Euler coefficient
(`recursion_coefficient`).  `verify_recursion` checks this exactly, and also
that no coefficient has a z-polynomial part (the cone polarization shadow).

Sign convention: poles live at z = +omega_e/k where omega_e is the outgoing
edge character at p; see docs/conventions.md.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .exact import Character, Polynomial, RationalFunction as RF, Z
from .graphsum import Engine, InsertionSpec, TwistSpec, graph_sum
from .targets import CurveClass, GkmTarget, WeightContext


class RecursionError_(Exception):
    pass


# ---------------------------------------------------------------------------
# principal parts in the cone variable
# ---------------------------------------------------------------------------


def z_poles(f: RF) -> list[tuple[RF, int]]:
    """Pole locations of f in z, as (location, order) with exact locations."""
    locs: dict[RF, int] = {}
    for form, mult in f.den:
        c = form.coefficient("z", 1)
        if c.is_zero():
            continue
        rest = form - Polynomial.variable("z") * c.constant_value()
        loc = RF.of(-rest) / RF.of(c.constant_value())
        locs[loc] = locs.get(loc, 0) + mult
    return sorted(locs.items(), key=lambda t: t[0]._key)


def principal_part_at(f: RF, location: RF) -> RF:
    """Exact principal part of f at z = location (a z-free value).

    All denominators are linear in z, so this is finitely many exact
    divisions and substitutions; no series approximation is involved.
    """
    loc_poly = location
    matching = []
    rest = []
    for form, mult in f.den:
        c = form.coefficient("z", 1)
        if not c.is_zero():
            tail = form - Polynomial.variable("z") * c.constant_value()
            here = RF.of(-tail) / RF.of(c.constant_value())
            if here == loc_poly:
                matching.append((form, mult))
                continue
        rest.append((form, mult))
    if not matching:
        return RF.of(0)
    m = sum(mult for _, mult in matching)
    # g = f * (z - z0)^m, free of the matched factors up to constants
    scale = RF.of(1)
    for form, mult in matching:
        c = form.coefficient("z", 1).constant_value()
        scale = scale * RF.of(c) ** mult
    g = RF.make(f.num, rest) / scale
    # Taylor coefficients of g at z = z0
    subs_num, subs_den = loc_poly.num, loc_poly.den_product()
    out = RF.of(0)
    fact = 1
    # Taylor coefficients of g at z0, lowest order first
    coeffs = []
    current = g
    for order in range(m):
        value = _subst_z(current, subs_num, subs_den)
        coeffs.append(value / Fraction(fact))
        current = current.derivative("z")
        fact *= order + 1
    # Prin = sum_{j=1..m} coeffs[m-j] / (z - z0)^j
    z0_form_num = Polynomial.variable("z") * subs_den - subs_num
    for j in range(1, m + 1):
        term = coeffs[m - j] * RF.make(subs_den**j, [(z0_form_num, j)])
        out = out + term
    return out


def _subst_z(f: RF, num: Polynomial, den: Polynomial) -> RF:
    """f with z replaced by num/den (den z-free, typically a constant)."""
    if den == Polynomial.ONE:
        return f.substitute({"z": num})
    # clear denominators: z -> num/den in a rational function with factored
    # denominator; each linear form a*z + b -> (a*num + b*den)/den
    zdeg_num = f.num.degree_in("z")
    new_num = Polynomial.ZERO
    for power in range(zdeg_num + 1):
        c = f.num.coefficient("z", power)
        new_num = new_num + c * num**power * den ** (zdeg_num - power)
    factors = []
    den_extra = zdeg_num
    for form, mult in f.den:
        a = form.coefficient("z", 1)
        if a.is_zero():
            factors.append((form, mult))
        else:
            tail = form - Polynomial.variable("z") * a.constant_value()
            factors.append((a.constant_value() * num + tail * den, mult))
            den_extra -= mult
    if den_extra >= 0:
        factors.append((den, den_extra))
        return RF.make(new_num, factors)
    return RF.make(new_num * den ** (-den_extra), factors)


# ---------------------------------------------------------------------------
# J restrictions
# ---------------------------------------------------------------------------


@dataclass
class JRestriction:
    """Truncated one-point series at a fixed point: beta -> coefficient."""

    target: GkmTarget
    point: int
    bound: CurveClass
    coefficients: dict[CurveClass, RF]
    twist: TwistSpec | None = None

    def coefficient(self, beta: CurveClass) -> RF:
        if beta.is_zero():
            return RF.of(1)
        return self.coefficients[beta]

    def d_coefficient(self, beta: CurveClass) -> RF:
        """Coefficient of the undivided series D = (-z) J."""
        return RF.of(-Z) * self.coefficient(beta)

    def classes(self):
        return sorted(self.coefficients, key=lambda b: (self.target.degree_bound(b), b.coords))


def compute_J_restriction(
    target: GkmTarget,
    point,
    bound: CurveClass,
    twist: TwistSpec | None = None,
    ctx: WeightContext | None = None,
    workers: int = 1,
) -> JRestriction:
    """All coefficients of J^p for effective classes up to `bound`."""
    target.ensure_valid()
    if twist is not None and not twist.inverted:
        raise ValueError("the one-point recursion is stated for reciprocal twists")
    p = target.point_index(point)
    ctx = ctx or WeightContext.symbolic(target.rank)
    delta = target.delta(p)
    ins = InsertionSpec((delta,), (0,))
    scale = _twist_euler(target, p, twist, ctx)
    coeffs: dict[CurveClass, RF] = {}
    for beta in target.effective_classes(bound):
        gs = graph_sum(
            target, beta, ins, twist, cone_variable=True, ctx=ctx, workers=workers, marked_at=p
        )
        coeffs[beta] = RF.of(scale) * gs / RF.of(-Z)
    j = JRestriction(target, p, bound, coeffs, twist)
    _audit_poles(j)
    return j


def _twist_euler(target, p, twist, ctx):
    if twist is None:
        return 1
    val = 1
    for line, _ in twist.summand_weights():
        val = val * ctx.weight(line.at(p))
    return val


def allowed_pole_locations(j: JRestriction, beta: CurveClass) -> list[tuple[int, int, RF]]:
    """(edge index, cover k, z-location omega/k) allowed for this coefficient."""
    t = j.target
    out = []
    budget = t.degree_bound(beta)
    for ei, e in t.edges_at(j.point):
        omega = e.char_at(j.point)
        k = 1
        while k * t.degree_bound(e.cclass) <= budget:
            out.append((ei, k, RF.of(omega.divide(k).polynomial())))
            k += 1
    return out


def _audit_poles(j: JRestriction):
    """Every nonzero z-pole must be an omega_e/k of an edge at the point."""
    for beta, f in j.coefficients.items():
        allowed = {loc._key for _, _, loc in allowed_pole_locations(j, beta)}
        for loc, order in z_poles(f):
            if loc.is_zero():
                continue
            if loc._key not in allowed:
                raise RecursionError_(
                    f"stray z-pole of {j.target.points[j.point]} at {loc} (class {beta})"
                )


def principal_part(j: JRestriction, beta: CurveClass, chi: Character) -> RF:
    """Principal part of the beta coefficient of J at the chi pole; 0 if none."""
    if chi.is_zero():
        raise ValueError("principal parts are taken at nonzero fractional characters")
    return principal_part_at(j.coefficient(beta), RF.of(chi.polynomial()))


# ---------------------------------------------------------------------------
# the recursion
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RecursionCoefficient:
    """The k-cover edge Euler coefficient at (p, e, k), with its 1/k factor."""

    point: int
    edge_index: int
    cover: int
    value: RF


def recursion_coefficient(
    target: GkmTarget,
    p: int,
    edge_index: int,
    cover: int,
    twist: TwistSpec | None = None,
    ctx: WeightContext | None = None,
) -> RecursionCoefficient:
    """e_T(T_p) e_T(E_p) / k  times the section-weight ratio of the k-cover.

    The tangent a = 0 weights cancel against e_T(T_p), so the value is the
    inverse Euler class of the moving part of the cover's deformation
    complex; it depends only on the bundle data restricted to the edge.
    """
    ctx = ctx or WeightContext.symbolic(target.rank)
    engine = Engine(target, ctx, twist)
    value = engine.edge_factor(edge_index, cover) * engine.euler_tangent(p)
    value = value * _twist_euler(target, p, twist, ctx)
    return RecursionCoefficient(p, edge_index, cover, RF.of(value))


def match_pole(target: GkmTarget, p: int, chi: Character):
    """The unique (edge index, k) at p with omega_e / k = chi, if any."""
    for ei, e in target.edges_at(p):
        ratio = chi.ratio_over(e.char_at(p))
        if ratio is None or ratio <= 0:
            continue
        if ratio.numerator == 1:
            return ei, ratio.denominator
    return None


def recursion_rhs(
    target: GkmTarget,
    p: int,
    chi: Character,
    jmap: dict[int, JRestriction],
    beta: CurveClass,
    twist: TwistSpec | None = None,
    ctx: WeightContext | None = None,
) -> RF:
    """Predicted principal part of D^p[beta] at the chi-matched z-location.

    Zero when no edge ray at p contains chi or the Novikov shift empties the
    far side.
    """
    ctx = ctx or WeightContext.symbolic(target.rank)
    hit = match_pole(target, p, chi)
    if hit is None:
        return RF.of(0)
    ei, k = hit
    edge = target.edges[ei]
    shift = edge.cclass.scale(k)
    residual = beta - shift
    if not target.is_effective(residual):
        return RF.of(0)
    q = edge.other(p)
    z0 = RF.of(chi.polynomial())
    dq = jmap[q].d_coefficient(residual)
    regular = dq - principal_part_at(dq, z0)
    far = _subst_z(
        regular,
        z0.num,
        z0.den_product(),
    )
    coeff = recursion_coefficient(target, p, ei, k, twist, ctx).value
    # 1 / (z0 - z)
    kernel = RF.make(Polynomial.ONE, [chi.polynomial() - Polynomial.variable("z")])
    return coeff * far * kernel


@dataclass
class RecursionRow:
    point: str
    beta: CurveClass
    chi: str
    pole_order: int
    ok: bool
    lhs: str = ""
    rhs: str = ""


@dataclass
class RecursionReport:
    rows: list[RecursionRow] = field(default_factory=list)
    polynomial_part_failures: list[str] = field(default_factory=list)
    max_pole_order: int = 0

    @property
    def ok(self) -> bool:
        return not self.polynomial_part_failures and all(r.ok for r in self.rows)

    def summary(self) -> str:
        n_ok = sum(r.ok for r in self.rows)
        lines = [
            f"residue comparisons: {n_ok}/{len(self.rows)} match; "
            f"max z-pole order {self.max_pole_order}"
        ]
        for r in self.rows:
            status = "ok " if r.ok else "FAIL"
            lines.append(
                f"  [{status}] point {r.point}, class {r.beta}, pole at {r.chi} "
                f"(order {r.pole_order})"
                + ("" if r.ok else f": {r.lhs} != {r.rhs}")
            )
        for f in self.polynomial_part_failures:
            lines.append(f"  [FAIL] polynomial part: {f}")
        if not self.polynomial_part_failures:
            lines.append("  [ok ] no coefficient has a z-polynomial part")
        return "\n".join(lines)


def verify_recursion(
    target: GkmTarget,
    bound: CurveClass,
    twist: TwistSpec | None = None,
    ctx: WeightContext | None = None,
    workers: int = 1,
    _fault: bool = False,
) -> RecursionReport:
    """Exact residue verification of the one-point series recursion.

    For every fixed point, every effective class up to the bound, and every
    candidate pole omega_e/k, compare the principal part of the computed
    series with the recursion prediction; also check the polarization shadow
    (no z-polynomial parts).  Returns a structured report; never raises on a
    mismatch.
    """
    target.ensure_valid()
    ctx = ctx or WeightContext.symbolic(target.rank)
    jmap = {
        p: compute_J_restriction(target, p, bound, twist, ctx, workers=workers)
        for p in range(len(target.points))
    }
    report = RecursionReport()
    for p, j in jmap.items():
        for beta in j.classes():
            f = j.coefficient(beta)
            if not f.polynomial_part_in("z"):
                report.polynomial_part_failures.append(
                    f"point {target.points[p]}, class {beta}: {f}"
                )
            d_coeff = j.d_coefficient(beta)
            pole_orders = dict()
            for loc, order in z_poles(d_coeff):
                pole_orders[loc._key] = order
            for ei, k, loc in allowed_pole_locations(j, beta):
                edge = target.edges[ei]
                chi = edge.char_at(p).divide(k)
                lhs = principal_part_at(d_coeff, loc)
                rhs = recursion_rhs(target, p, chi, jmap, beta, twist, ctx)
                if _fault:
                    rhs = rhs + RF.of(1)
                order = pole_orders.get(loc._key, 0)
                report.max_pole_order = max(report.max_pole_order, order)
                ok = lhs == rhs
                report.rows.append(
                    RecursionRow(
                        point=target.points[p],
                        beta=beta,
                        chi=f"{chi}",
                        pole_order=order,
                        ok=ok,
                        lhs="" if ok else str(lhs),
                        rhs="" if ok else str(rhs),
                    )
                )
    return report
