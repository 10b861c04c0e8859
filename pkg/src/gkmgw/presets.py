"""Ready-made targets with generic torus weights.

Each preset uses its own full torus so that the chain-free condition holds;
see `docs/conventions.md` for the weight tables.
"""

from __future__ import annotations

from .exact import Character
from .targets import (
    EquivariantLineBundle,
    GkmTarget,
    SplitBundle,
    build_product,
    build_projective_bundle,
    build_projective_space,
)


def projective_space(n: int, rank: int | None = None) -> GkmTarget:
    """P^n with weights (0, l1, ..., ln) on a rank-n torus (or larger)."""
    rank = rank or n
    weights = [Character.zero(rank)] + [Character.basis(rank, i) for i in range(n)]
    return build_projective_space(n, weights)


def p1(rank: int = 1) -> GkmTarget:
    return projective_space(1, rank)


def p2(rank: int = 2) -> GkmTarget:
    return projective_space(2, rank)


def p3() -> GkmTarget:
    return projective_space(3)


def p1xp1() -> GkmTarget:
    """F0 as a product: torus rank 2, weights (0,l1) x (0,l2)."""
    rank = 2
    a = build_projective_space(1, [Character.zero(rank), Character.basis(rank, 0)], name="P1a")
    b = build_projective_space(1, [Character.zero(rank), Character.basis(rank, 1)], name="P1b")
    return build_product(a, b, name="F0prod")


def p1xp2() -> GkmTarget:
    rank = 3
    a = build_projective_space(1, [Character.zero(rank), Character.basis(rank, 0)], name="P1f")
    b = build_projective_space(
        2, [Character.zero(rank), Character.basis(rank, 1), Character.basis(rank, 2)], name="P2f"
    )
    return build_product(a, b, name="P1xP2")


def _p1_base(rank: int) -> GkmTarget:
    return build_projective_space(1, [Character.zero(rank), Character.basis(rank, 0)], name="P1base")


def f0_bundle(nu_equals_lambda: bool = False, check: bool = True) -> GkmTarget:
    """F0 = P(O_mu + O_{mu-nu}) over P1(0,l): torus (l, mu, nu) = (l1, l2, l3).

    With nu := l the fiber weights match those of the F2-type bundle point by
    point (equal equivariant Chern data), but the fiber direction becomes
    collinear with the base direction and validation rejects the target.
    """
    rank = 3
    base = _p1_base(rank)
    mu = Character.basis(rank, 1)
    nu = Character.basis(rank, 0) if nu_equals_lambda else Character.basis(rank, 2)
    v = SplitBundle(
        (
            EquivariantLineBundle((mu, mu)),
            EquivariantLineBundle((mu - nu, mu - nu)),
        )
    )
    return build_projective_bundle(base, v, name="F0", check=check)


def f2_bundle(nu_equals_lambda: bool = False, check: bool = True) -> GkmTarget:
    """F2-type bundle P(O(1) + O(-1)) over P1(0,l).

    Generic linearization: l1 = (mu, mu - l), l2 = (mu - nu, mu - nu + l) on
    the rank-3 torus (l, mu, nu).  With nu := l (the linearization forced by
    equal equivariant Chern data with O + O) the fiber weight difference at
    each base point lands on the base character's ray and validation rejects
    the target.
    """
    rank = 3
    base = _p1_base(rank)
    lam1 = Character.basis(rank, 0)
    mu = Character.basis(rank, 1)
    nu = lam1 if nu_equals_lambda else Character.basis(rank, 2)
    v = SplitBundle(
        (
            EquivariantLineBundle((mu, mu - lam1)),
            EquivariantLineBundle((mu - nu, mu - nu + lam1)),
        )
    )
    return build_projective_bundle(base, v, name="F2", check=check)


def o_o1_o2_bundle() -> GkmTarget:
    """P(O + O(1) + O(2)) over P1: torus rank 4."""
    rank = 4
    base = _p1_base(rank)
    lam1 = Character.basis(rank, 0)
    m1, m2, m3 = (Character.basis(rank, i) for i in (1, 2, 3))
    v = SplitBundle(
        (
            EquivariantLineBundle((m1, m1)),
            EquivariantLineBundle((m2, m2 - lam1)),
            EquivariantLineBundle((m3, m3 - lam1.scale(2))),
        )
    )
    return build_projective_bundle(base, v, name="P(O+O1+O2)")


def paper_p2_action() -> GkmTarget:
    """The collinear-weight C* action on P2 that validation must reject."""
    lam1 = Character.basis(1, 0)
    return build_projective_space(
        2, [lam1.scale(-2), -lam1, Character.zero(1)], name="P2-collinear"
    )


PRESETS = {
    "p1": p1,
    "p2": p2,
    "p3": p3,
    "f0": f0_bundle,
    "f0-product": p1xp1,
    "f2": f2_bundle,
    "p1xp2": p1xp2,
    "p-o-o1-o2": o_o1_o2_bundle,
    "p2-collinear": paper_p2_action,
}


def preset(name: str) -> GkmTarget:
    try:
        factory = PRESETS[name]
    except KeyError:
        raise KeyError(f"unknown preset {name!r}; known: {sorted(PRESETS)}") from None
    return factory()
