"""Moment-graph model: builders, validation, integration, identification."""

from fractions import Fraction

import pytest

from gkmgw import presets
from gkmgw.exact import Character, Polynomial, RationalFunction as RF
from gkmgw.targets import (
    ChernMismatch,
    CohomologyIdentification,
    CurveClass,
    DegenerateWeights,
    EquivariantLineBundle,
    NotChainFree,
    SplitBundle,
    build_product,
    build_projective_bundle,
    build_projective_space,
    frak_F_cohomology,
    frak_F_curve,
)

L1 = Polynomial.variable("l1")


# -- build_projective_space ---------------------------------------------------


def test_p1_structure():
    t = presets.p1()
    assert len(t.points) == 2 and len(t.edges) == 1
    e = t.edges[0]
    assert e.char == Character((1,))  # w1 - w0 = l1
    assert e.char_at(e.q) == Character((-1,))


def test_degenerate_weights_rejected():
    w = Character.basis(2, 0)
    with pytest.raises(DegenerateWeights):
        build_projective_space(1, [w, w])


def test_paper_collinear_action_builds_but_fails_validation():
    t = presets.paper_p2_action()
    rep = t.validate()
    assert not rep.ok
    assert any("collinear" in v for v in rep.violations)


def test_generic_p2_validates():
    assert presets.p2().validate().ok


# -- build_product ---------------------------------------------------------


def test_product_is_moment_square():
    t = presets.p1xp1()
    assert len(t.points) == 4 and len(t.edges) == 4
    assert t.dimension == 2
    assert t.validate().ok


def test_product_with_point_is_identity_like():
    rank = 1
    a = build_projective_space(1, [Character.zero(rank), Character.basis(rank, 0)])
    point = build_projective_space(0, [Character.zero(rank)])
    t = build_product(a, point)
    assert len(t.points) == len(a.points)
    assert len(t.edges) == len(a.edges)
    assert t.dimension == a.dimension


def test_product_collinear_rejected():
    rank = 1
    a = build_projective_space(1, [Character.zero(rank), Character.basis(rank, 0)])
    with pytest.raises(NotChainFree):
        build_product(a, a)


# -- build_projective_bundle ---------------------------------------------------


def test_trivial_bundle_is_product_square():
    f0 = presets.f0_bundle()
    prod = presets.p1xp1()
    assert len(f0.points) == 4 and len(f0.edges) == 4
    # same multiset of (sorted endpoints' labels, |character|) data up to naming
    assert f0.validate().ok and prod.validate().ok


def test_f2_fiber_weight_multisets_match_trivial_bundle():
    # the Chern-equality criterion against O_mu + O_{mu-l}: multisets {mu, mu-l}
    f2 = presets.f2_bundle(nu_equals_lambda=True, check=False)
    bi = f2.bundle_info
    for b in range(2):
        ws = sorted((w.coeffs, w.aux) for w in bi.bundle.fiber_weights(b))
        mu = Character.basis(3, 1)
        lam1 = Character.basis(3, 0)
        expected = sorted((w.coeffs, w.aux) for w in (mu, mu - lam1))
        assert ws == expected
    # and chain-free validation rejects exactly this linearization
    assert not f2.validate().ok


def test_f2_chain_free_rejection_message():
    with pytest.raises(NotChainFree):
        presets.f2_bundle(nu_equals_lambda=True)


def test_presentation_relation_pins_h():
    # c_T(V)(h) = 0 restriction-wise on every built bundle
    for t in (presets.f0_bundle(), presets.f2_bundle(), presets.o_o1_o2_bundle()):
        bi = t.bundle_info
        for b in range(len(bi.base.points)):
            for i in range(bi.bundle.rank):
                x = (-bi.bundle.summands[i].at(b)).polynomial()
                assert bi.bundle.chern_polynomial_at(b, x).is_zero()


def test_repeated_fiber_weights_rejected():
    rank = 2
    base = build_projective_space(1, [Character.zero(rank), Character.basis(rank, 0)])
    mu = Character.basis(rank, 1)
    v = SplitBundle((EquivariantLineBundle((mu, mu)), EquivariantLineBundle((mu, mu))))
    from gkmgw.targets import RepeatedFiberWeights

    with pytest.raises(RepeatedFiberWeights):
        build_projective_bundle(base, v)


# -- euler classes, integration, pairing ---------------------------------------


def test_euler_class_p1():
    t = presets.p1()
    assert t.euler_class_tangent("p0") == RF.of(L1)
    assert t.euler_class_tangent("p1") == RF.of(-L1)


def test_euler_class_p2():
    t = presets.p2()
    l2 = Polynomial.variable("l2")
    assert t.euler_class_tangent("p0") == RF.of(L1 * l2)


def test_euler_class_multiplicative_on_products():
    t = presets.p1xp2()
    # tangent at a product point is the concatenation of factor weights
    val = t.euler_class_tangent(0)
    assert val == RF.of(L1 * Polynomial.variable("l2") * Polynomial.variable("l3"))


@pytest.mark.parametrize(
    "maker",
    [presets.p1, presets.p2, presets.p3, presets.f0_bundle, presets.f2_bundle,
     presets.p1xp2, presets.o_o1_o2_bundle],
)
def test_integrate_one_vanishes_and_delta_is_one(maker):
    t = maker()
    assert t.integrate(t.unit()).is_zero()
    for p in range(len(t.points)):
        assert t.integrate(t.delta(p)) == RF.of(1)


def test_poincare_pairing_delta_diagonal():
    t = presets.p2()
    for p in range(3):
        for q in range(3):
            val = t.poincare_pair(t.delta(p), t.delta(q))
            if p == q:
                assert val == t.euler_class_tangent(p)
            else:
                assert val.is_zero()


def test_pair_one_with_point_class():
    t = presets.p2()
    assert t.poincare_pair(t.unit(), t.delta(0)) == RF.of(1)


def test_hyperplane_pairing_and_gkm_relations():
    t = presets.p2()
    H = t.generator("H")
    assert not H.gkm_divisibility_violations()
    assert t.pairing_number(H, CurveClass((1,))) == 1
    assert t.integrate(H * H) == RF.of(1)


def test_bundle_pairings():
    f0 = presets.f0_bundle()
    h, b = f0.generator("h"), f0.generator("b")
    fiber, lift = CurveClass((0, 1)), CurveClass((1, 0))
    assert f0.pairing_number(h, fiber) == 1
    assert f0.pairing_number(h, lift) == 0
    assert f0.pairing_number(b, fiber) == 0
    assert f0.pairing_number(b, lift) == 1
    assert not h.gkm_divisibility_violations()
    assert not b.gkm_divisibility_violations()


def test_minus_canonical_degrees():
    f0 = presets.f0_bundle()
    mk = f0.minus_canonical()
    assert f0.pairing_number(mk, CurveClass((1, 0))) == 2
    assert f0.pairing_number(mk, CurveClass((0, 1))) == 2
    f2 = presets.f2_bundle()
    mk2 = f2.minus_canonical()
    assert f2.pairing_number(mk2, CurveClass((0, 1))) == 2
    assert f2.pairing_number(mk2, CurveClass((1, -1))) == 0  # the rigid section


def test_chern_classes_satisfy_gkm():
    for t in (presets.f0_bundle(), presets.f2_bundle()):
        for s in t.bundle_info.bundle.summands:
            lifted = EquivariantLineBundle(
                tuple(
                    s.at(b)
                    for b in range(len(t.bundle_info.base.points))
                    for _ in range(t.bundle_info.bundle.rank)
                )
            )
            assert not lifted.first_chern(t).gkm_divisibility_violations()


# -- effectivity ---------------------------------------------------------


def test_effective_cone_f2():
    f2 = presets.f2_bundle()
    assert f2.is_effective(CurveClass((1, -1)))
    assert f2.is_effective(CurveClass((1, 0)))
    assert not f2.is_effective(CurveClass((0, -1)))
    assert not f2.is_effective(CurveClass((-1, 2)))


def test_effective_classes_closed_under_recursion_shifts():
    f2 = presets.f2_bundle()
    bound = CurveClass((1, 1))
    classes = set(f2.effective_classes(bound))
    for beta in classes:
        for e in f2.edges:
            residual = beta - e.cclass
            if not residual.is_zero() and f2.is_effective(residual):
                assert residual in classes


# -- the identification ---------------------------------------------------------


def make_ident(mode="nonequivariant"):
    return CohomologyIdentification(presets.f0_bundle(), presets.f2_bundle(), mode=mode)


def test_identity_identification():
    f0 = presets.f0_bundle()
    ident = CohomologyIdentification(f0, f0, mode="equivariant")
    h = f0.generator("h")
    assert ident.transfer(h) == h
    beta = CurveClass((1, 0))
    assert ident.transfer_curve(beta) == beta


def test_transfer_h_to_h():
    ident = make_ident()
    h2 = ident.transfer(ident.source.generator("h"))
    expected = ident.target.generator("h")
    for a, b in zip(h2.restrictions, expected.restrictions):
        assert (a - b).limit_at_zero("l1").limit_at_zero("l2").limit_at_zero("l3").is_zero()


def test_transfer_curve_pairing_preservation():
    ident = make_ident()
    src, tgt = ident.source, ident.target
    for coords in [(1, 0), (0, 1), (1, 1), (2, 1)]:
        beta = CurveClass(coords)
        image = ident.transfer_curve(beta)
        for name in ("h", "b"):
            assert src.pairing_number(src.generator(name), beta) == tgt.pairing_number(
                tgt.generator(name), image
            )


def test_transfer_curve_roundtrip_identity():
    ident = make_ident()
    back = CohomologyIdentification(ident.target, ident.source, mode="nonequivariant")
    for coords in [(1, 0), (0, 1), (2, 2), (1, -1)]:
        beta = CurveClass(coords)
        assert back.transfer_curve(ident.transfer_curve(beta)) == beta


def test_fiber_class_transfers_to_fiber_class():
    ident = make_ident()
    assert ident.transfer_curve(CurveClass((0, 1))) == CurveClass((0, 1))


def test_base_section_transfers_by_pairings():
    ident = make_ident()
    image = ident.transfer_curve(CurveClass((1, 0)))
    tgt = ident.target
    assert tgt.pairing_number(tgt.generator("h"), image) == 0
    assert tgt.pairing_number(tgt.generator("b"), image) == 1


def test_equivariant_chern_mismatch_detected():
    f0 = presets.f0_bundle()
    f2 = presets.f2_bundle()  # generic nu: equivariant multisets differ
    with pytest.raises(ChernMismatch):
        CohomologyIdentification(f0, f2, mode="equivariant")


def test_nonequivariant_c1_mismatch_detected():
    rank = 3
    base = build_projective_space(1, [Character.zero(rank), Character.basis(rank, 0)])
    mu, nu = Character.basis(rank, 1), Character.basis(rank, 2)
    lam1 = Character.basis(rank, 0)
    v1 = SplitBundle((EquivariantLineBundle((mu, mu)), EquivariantLineBundle((nu, nu))))
    # O(1) + O: c1 degree 1 != 0
    v2 = SplitBundle(
        (EquivariantLineBundle((mu, mu - lam1)), EquivariantLineBundle((nu, nu)))
    )
    a = build_projective_bundle(base, v1)
    b = build_projective_bundle(base, v2)
    with pytest.raises(ChernMismatch):
        CohomologyIdentification(a, b, mode="nonequivariant")


def test_vandermonde_transfer_on_arbitrary_class():
    # transfer an honest non-monomial class and check pairings transfer too
    ident = CohomologyIdentification(
        presets.f0_bundle(), presets.f0_bundle(), mode="equivariant"
    )
    src = ident.source
    alpha = src.generator("h") * 3 + src.generator("b")
    image = frak_F_cohomology(ident, alpha)
    for e in src.edges:
        assert src.edge_pairing(alpha, e) == src.edge_pairing(image, e)
    assert frak_F_curve(ident, CurveClass((1, 2))) == CurveClass((1, 2))
