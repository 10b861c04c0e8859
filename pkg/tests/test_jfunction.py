"""One-point series restrictions and the exact pole recursion."""

from fractions import Fraction

import pytest

from gkmgw import presets
from gkmgw.exact import Character, Polynomial, RationalFunction as RF, Z
from gkmgw.graphsum import TwistSpec
from gkmgw.jfunction import (
    JRestriction,
    allowed_pole_locations,
    compute_J_restriction,
    match_pole,
    principal_part,
    principal_part_at,
    recursion_coefficient,
    recursion_rhs,
    verify_recursion,
    z_poles,
)
from gkmgw.targets import (
    CurveClass,
    EquivariantLineBundle,
    SplitBundle,
    WeightContext,
)

L1 = Polynomial.variable("l1")


# ---------------------------------------------------------------------------
# principal parts
# ---------------------------------------------------------------------------


def test_principal_part_no_pole_is_zero():
    f = RF.make(Polynomial.ONE, [Z - L1])
    assert principal_part_at(f, RF.of(L1 * Fraction(1, 2))).is_zero()


def test_principal_part_simple():
    a = RF.of(L1)
    f = RF.make(Polynomial.ONE, [Z - L1]) + RF.of(Z)
    prin = principal_part_at(f, a)
    assert prin == RF.make(Polynomial.ONE, [Z - L1])
    assert (f - prin).polynomial_part_in("z") is False  # leftover polynomial z


def test_principal_part_double_pole_is_itself():
    f = RF.make(Polynomial.ONE, [(Z - L1, 2)])
    prin = principal_part_at(f, RF.of(L1))
    assert prin == f
    assert (f - prin).is_zero()


def test_principal_part_mixed_orders():
    # f = 1/(z-l1)^2 + 3/(z-l1) + z + 5: principal part at l1 keeps both poles
    f = (
        RF.make(Polynomial.ONE, [(Z - L1, 2)])
        + RF.make(Polynomial.constant(3), [Z - L1])
        + RF.of(Z + Polynomial.constant(5))
    )
    prin = principal_part_at(f, RF.of(L1))
    rest = f - prin
    assert prin == RF.make(Polynomial.ONE, [(Z - L1, 2)]) + RF.make(
        Polynomial.constant(3), [Z - L1]
    )
    assert not z_poles(rest)


def test_z_poles_inventory():
    f = RF.make(Polynomial.ONE, [(Z - L1, 2), (Z, 1), (L1, 3)])
    poles = dict((str(loc), order) for loc, order in z_poles(f))
    assert poles == {"l1": 2, "0": 1}


# ---------------------------------------------------------------------------
# J restrictions
# ---------------------------------------------------------------------------


def test_p1_degree_one_restriction_closed_form():
    p1 = presets.p1()
    j = compute_J_restriction(p1, "p0", CurveClass((1,)))
    assert j.coefficient(CurveClass((0,))) == RF.of(1)
    # <phi_p/(-z-psi)> = 1/(omega - z); dividing by -z gives -1/(z(omega-z))
    expected = RF.make(Polynomial.constant(-1), [Z, L1 - Z])
    assert j.coefficient(CurveClass((1,))) == expected


def test_pole_locations_audited(p2_bound=(2,)):
    p2 = presets.p2()
    j = compute_J_restriction(p2, "p0", CurveClass(p2_bound))
    for beta in j.classes():
        allowed = {loc._key for _, _, loc in allowed_pole_locations(j, beta)}
        for loc, _ in z_poles(j.coefficient(beta)):
            assert loc.is_zero() or loc._key in allowed


def test_twisted_scaling_normalization():
    # J of the twisted theory divides out e(E_p): its beta=0 term is still 1
    p1 = presets.p1(rank=2)
    u = Character.basis(2, 1)
    tw = TwistSpec(SplitBundle((EquivariantLineBundle((u, u)),)), ("convex",))
    j = compute_J_restriction(p1, "p0", CurveClass((1,)), tw)
    assert j.coefficient(CurveClass((0,))) == RF.of(1)


# ---------------------------------------------------------------------------
# recursion machinery
# ---------------------------------------------------------------------------


def test_match_pole_unique():
    p2 = presets.p2()
    e0 = p2.edges_at(0)[0]
    chi = e0[1].char_at(0).divide(2)
    assert match_pole(p2, 0, chi) == (e0[0], 2)
    assert match_pole(p2, 0, Character((5, 7))) is None
    # a non-unit numerator is not a cover character
    assert match_pole(p2, 0, e0[1].char_at(0).scale(Fraction(2, 3))) is None


def test_recursion_rhs_zero_off_rays():
    p1 = presets.p1()
    jmap = {
        p: compute_J_restriction(p1, p, CurveClass((1,))) for p in range(2)
    }
    value = recursion_rhs(p1, 0, Character((7,), aux=3), jmap, CurveClass((1,)))
    assert value.is_zero()


def test_recursion_rhs_novikov_grading():
    f0 = presets.f0_bundle()
    bound = CurveClass((1, 0))
    jmap = {p: compute_J_restriction(f0, p, bound) for p in range(4)}
    # fiber-edge pole with k=1 already exceeds the budget of a base-only class
    fiber_edges = [
        (i, e) for i, e in f0.edges_at(0) if e.cclass == CurveClass((0, 1))
    ]
    ei, e = fiber_edges[0]
    chi = e.char_at(0)
    value = recursion_rhs(f0, 0, chi, jmap, CurveClass((1, 0)))
    assert value.is_zero()


def test_p1_degree_one_residue_is_recursion_coefficient():
    # Prin of D at omega equals C(p,e,1)/(omega - z) * (-omega): dual path
    p1 = presets.p1()
    jmap = {p: compute_J_restriction(p1, p, CurveClass((1,))) for p in range(2)}
    d1 = jmap[0].d_coefficient(CurveClass((1,)))
    omega = p1.edges[0].char_at(0)
    lhs = principal_part_at(d1, RF.of(omega.polynomial()))
    rhs = recursion_rhs(p1, 0, omega, jmap, CurveClass((1,)))
    assert lhs == rhs
    coeff = recursion_coefficient(p1, 0, 0, 1).value
    assert coeff == RF.make(Polynomial.constant(-1), [L1])
    kernel = RF.make(Polynomial.ONE, [L1 - Z])
    assert rhs == coeff * kernel * RF.of(-L1)


def test_principal_part_interface():
    p1 = presets.p1()
    j = compute_J_restriction(p1, "p0", CurveClass((1,)))
    omega = p1.edges[0].char_at(0)
    prin = principal_part(j, CurveClass((1,)), omega)
    assert not prin.is_zero()
    assert principal_part(j, CurveClass((1,)), Character((3,))).is_zero()
    with pytest.raises(ValueError):
        principal_part(j, CurveClass((1,)), Character.zero(1))


# ---------------------------------------------------------------------------
# verify_recursion end to end
# ---------------------------------------------------------------------------


def test_verify_p1_degree3():
    rep = verify_recursion(presets.p1(), CurveClass((3,)))
    assert rep.ok
    assert rep.max_pole_order == 1
    assert any(r.chi for r in rep.rows)


def test_verify_p2_degree2_with_double_covers():
    rep = verify_recursion(presets.p2(), CurveClass((2,)))
    assert rep.ok
    ks = {r.chi for r in rep.rows}
    assert any("/2" in chi or "1/2" in chi for chi in ks)


def test_verify_f0_and_f2():
    assert verify_recursion(presets.f0_bundle(), CurveClass((1, 1))).ok
    assert verify_recursion(presets.f2_bundle(), CurveClass((1, 1))).ok


def test_verify_twisted_p1():
    p1 = presets.p1(rank=2)
    u = Character.basis(2, 1)
    tw = TwistSpec(SplitBundle((EquivariantLineBundle((u, u)),)), ("convex",))
    assert verify_recursion(p1, CurveClass((2,)), tw).ok


def test_fault_injection_reported_not_raised():
    rep = verify_recursion(presets.p1(), CurveClass((1,)), _fault=True)
    assert not rep.ok
    assert any(not r.ok for r in rep.rows)
    assert "FAIL" in rep.summary()
