"""Exact-arithmetic kernel tests: ring axioms, canonical form, limits."""

import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from gkmgw.exact import (
    AUX_VAR,
    Character,
    NoLimit,
    NotLinearProduct,
    PoleAtPoint,
    Polynomial,
    RationalFunction as RF,
    X,
    Z,
    factor_into_linear,
    invert_linear_product,
    limit_at_zero,
    normalize_linear,
)

L1 = Polynomial.variable("l1")
L2 = Polynomial.variable("l2")
L3 = Polynomial.variable("l3")


def rand_poly(rng, nvars=3, nterms=4, maxdeg=3):
    out = Polynomial.ZERO
    for _ in range(rng.randint(0, nterms)):
        term = Polynomial.constant(Fraction(rng.randint(-9, 9), rng.randint(1, 5)))
        for _ in range(rng.randint(0, maxdeg)):
            term = term * Polynomial.variable(f"l{rng.randint(1, nvars)}")
        out = out + term
    return out


def rand_linear(rng, nvars=3):
    while True:
        f = Polynomial.ZERO
        for i in range(1, nvars + 1):
            f = f + Polynomial.variable(f"l{i}") * rng.randint(-3, 3)
        if not f.is_zero():
            return f


def rand_rf(rng):
    num = rand_poly(rng)
    dens = [rand_linear(rng) for _ in range(rng.randint(0, 2))]
    return RF.make(num, dens)


# ---------------------------------------------------------------------------
# ring_ops examples from first principles
# ---------------------------------------------------------------------------


def test_ring_identity():
    assert (L1 + L2) * (L1 - L2) == L1 * L1 - L2 * L2


def test_additive_identity():
    p = RF.make(L1 * L2 + Polynomial.constant(3), [L1 - L2])
    assert p + 0 == p
    assert p + RF.of(0) == p


def test_p1_cancellation_in_miniature():
    a = RF.make(Polynomial.ONE, [L1 - L2])
    b = RF.make(Polynomial.ONE, [L2 - L1])
    assert (a + b).is_zero()


def test_field_axioms_randomized():
    rng = random.Random(7)
    for _ in range(1000):
        a, b, c = rand_rf(rng), rand_rf(rng), rand_rf(rng)
        assert (a + b) + c == a + (b + c)
        assert a * (b + c) == a * b + a * c
        assert a * b == b * a


def test_canonical_idempotence():
    rng = random.Random(11)
    for _ in range(200):
        f = rand_rf(rng)
        again = RF.make(f.num, f.den)
        assert again.num == f.num and again.den == f.den


def test_structural_equality_is_semantic():
    # same function built along two different routes
    f = RF.make(L1 * L1 - L2 * L2, [L1 - L2])
    assert f == L1 + L2
    g = RF.make((L1 - L2) * (L1 + L2) * L1, [(L1 - L2, 2), L1])
    assert g == RF.make(L1 + L2, [L1 - L2])


# ---------------------------------------------------------------------------
# invert_linear_product
# ---------------------------------------------------------------------------


def test_invert_simple_product():
    f = RF.of(L1 * (L1 - L2))
    assert invert_linear_product(f) == RF.make(Polynomial.ONE, [L1, L1 - L2])


def test_invert_constant():
    assert invert_linear_product(RF.of(3)) == RF.of(Fraction(1, 3))


def test_invert_irreducible_rejects():
    with pytest.raises(NotLinearProduct):
        invert_linear_product(RF.of(L1 * L1 + L2 * L2))


def test_invert_expanded_products():
    rng = random.Random(3)
    for _ in range(25):
        forms = [rand_linear(rng) for _ in range(rng.randint(1, 4))]
        c = Fraction(rng.randint(1, 7), rng.randint(1, 4))
        poly = Polynomial.constant(c)
        for f in forms:
            poly = poly * f
        inv = invert_linear_product(RF.of(poly))
        assert inv * poly == 1


def test_factor_multiplicities():
    const, factors = factor_into_linear(L1 * L1 * (L1 - L2) * 4)
    assert const == 4
    assert sorted((str(f), m) for f, m in factors) == [("l1", 2), ("l1 - l2", 1)]


def test_factor_affine_forms():
    const, factors = factor_into_linear((Z - Polynomial.constant(3)) * (Z + Polynomial.constant(5)))
    assert const == 1
    assert {(str(f), m) for f, m in factors} == {("z - 3", 1), ("z + 5", 1)}


# ---------------------------------------------------------------------------
# evaluate
# ---------------------------------------------------------------------------


def test_evaluate_after_cancellation():
    f = RF.make(L1 * L1 - L2 * L2, [L1 - L2])
    assert f.evaluate({"l1": 3, "l2": 1}) == 4


def test_evaluate_pole():
    with pytest.raises(PoleAtPoint):
        RF.make(Polynomial.ONE, [L1]).evaluate({"l1": 0})


def test_evaluate_product_of_linear():
    f = RF.make(Polynomial.ONE, [L1, L1 - L2])
    assert f.evaluate({"l1": 2, "l2": 1}) == Fraction(1, 2)


def test_evaluate_is_homomorphism():
    rng = random.Random(23)
    done = 0
    while done < 100:
        a, b = rand_rf(rng), rand_rf(rng)
        point = {f"l{i}": Fraction(rng.randint(-50, 50), rng.randint(1, 9)) for i in (1, 2, 3)}
        try:
            av, bv = a.evaluate(point), b.evaluate(point)
            assert (a + b).evaluate(point) == av + bv
            assert (a * b).evaluate(point) == av * bv
        except PoleAtPoint:
            continue
        done += 1


# ---------------------------------------------------------------------------
# limit_at_zero
# ---------------------------------------------------------------------------


def test_limit_exact_cancellation():
    f = RF.make(X * X * L1, [(X, 2)])
    assert f.limit_at_zero(AUX_VAR) == L1


def test_limit_after_division():
    f = RF.make(X * L1 + X * L2, [X])
    assert f.limit_at_zero(AUX_VAR) == L1 + L2


def test_limit_genuine_pole():
    with pytest.raises(NoLimit):
        RF.make(X + L1, [X]).limit_at_zero(AUX_VAR)


def test_limit_agrees_with_evaluation_near_zero():
    # if lim_{x->0} f = g then f(x=t) - g, as a function of t, vanishes at 0:
    # the numerator of the difference is divisible by t.
    rng = random.Random(5)
    for _ in range(50):
        core = rand_rf(rng)
        k = rng.randint(0, 2)
        f = RF.make(core.num * X**k * (X * 3 + L1), [(X, k), *core.den])
        g = f.limit_at_zero(AUX_VAR)
        diff = f - g
        if diff.is_zero():
            continue
        assert diff.num.divide_by_linear(X) is not None


# ---------------------------------------------------------------------------
# derivatives, substitution, rendering
# ---------------------------------------------------------------------------


def test_derivative_quotient_rule():
    f = RF.make(Polynomial.ONE, [Z - L1])
    assert f.derivative("z") == RF.make(Polynomial.constant(-1), [(Z - L1, 2)])
    g = RF.make(Z * Z, [L1 - Z])
    rng = random.Random(1)
    for _ in range(20):
        pt = {"l1": Fraction(rng.randint(2, 30)), "z": Fraction(rng.randint(31, 60))}
        h = Fraction(1, 10**6)
        up = {**pt, "z": pt["z"] + h}
        # exact difference quotient equals derivative + O(h): check via series
        num = (g.evaluate(up) - g.evaluate(pt)) / h - g.derivative("z").evaluate(pt)
        assert abs(num) < Fraction(1, 10**3)


def test_substitute_z_by_character_value():
    f = RF.make(Polynomial.ONE, [Z - L1])
    g = f.substitute({"z": L2 * Fraction(1, 2)})
    assert g == RF.make(Polynomial.constant(2), [L2 - 2 * L1])
    assert g.evaluate({"l1": 1, "l2": 6}) == Fraction(1, Fraction(3) - 1)


def test_rendering_sorted_and_factored():
    h = RF.make(L2 + L1, [L1, (L1 - L2, 2)])
    assert str(h) == "(l1 + l2)/(l1*(l1 - l2)^2)"
    assert str(RF.of(0)) == "0"
    assert str(Polynomial.constant(Fraction(-3, 4)) * L1) == "-3/4*l1"


def test_rendering_golden_lines():
    # canonical textual forms frozen for CLI output and golden comparisons
    assert str(L1 * L1 - L2 * L2 + Polynomial.constant(2)) == "l1^2 - l2^2 + 2"
    assert str(RF.make(Polynomial.ONE, [Z - L1])) == "-1/(l1 - z)"
    assert str(RF.make(Polynomial.constant(-1), [Z, (L1 - Z, 1)])) == "-1/((l1 - z)*z)"
    assert str(X * Fraction(1, 2) + Z) == "1/2*x + z"


def test_ring_ops_named_interface():
    from gkmgw.exact import ring_ops

    a = RF.make(Polynomial.ONE, [L1 - L2])
    b = RF.make(Polynomial.ONE, [L2 - L1])
    assert ring_ops(a, b, "add").is_zero()
    assert ring_ops(a, a, "mul") == RF.make(Polynomial.ONE, [(L1 - L2, 2)])
    assert ring_ops(a, a, "neg") == RF.make(Polynomial.constant(-1), [L1 - L2])
    with pytest.raises(ValueError):
        ring_ops(a, b, "div")


def test_normalize_linear_sign_and_content():
    form, scale = normalize_linear(L2 * Fraction(-2, 3) + L1 * Fraction(-4, 3))
    assert str(form) == "2*l1 + l2" and scale == Fraction(-2, 3)


# ---------------------------------------------------------------------------
# characters
# ---------------------------------------------------------------------------


def test_character_componentwise_ops():
    a = Character((1, 2), aux=1)
    b = Character((0, 1))
    assert a + b == Character((1, 3), aux=1)
    assert (a - a).is_zero()
    assert -a == Character((-1, -2), aux=-1)


def test_character_collinearity_exact():
    a = Character((2, -4))
    assert a.collinear(Character((-1, 2)))
    assert not a.collinear(Character((1, 2)))
    assert a.same_ray(Character((1, -2)))
    assert not a.same_ray(Character((-1, 2)))
    assert a.collinear(Character.zero(2))


def test_fractional_character_reduction():
    half = Character((1, 0)).divide(2)
    assert half.denom == 2
    assert half + half == Character((1, 0))
    assert Character((2, 0), denom=4) == half
    assert half.ratio_over(Character((1, 0))) == Fraction(1, 2)


@settings(max_examples=80, deadline=None)
@given(st.integers(-8, 8), st.integers(-8, 8), st.integers(1, 5), st.integers(-3, 3))
def test_character_ray_vs_scale(a, b, d, q):
    ch = Character((a, b), denom=d)
    if q and not ch.is_zero():
        assert ch.collinear(ch.scale(q))
        assert ch.same_ray(ch.scale(q)) == (q > 0)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**31))
def test_polynomial_pow_binary(seed):
    rng = random.Random(seed)
    p = rand_poly(rng, nterms=3, maxdeg=2)
    assert p**3 == p * p * p
