"""Independent ground truth: WDVV recursions, string-equation psi integrals.

Nothing here touches the graph-sum engine; the only shared code is the exact
arithmetic.  The two WDVV recursions are derived from associativity of the
quantum product (see docs/wdvv-f0.md for the two-ruling case) and reproduce
every count from the base cases alone.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import comb

from .graphsum import TooFewPoints


@dataclass
class CountTable:
    """Rational counts by degree, together with how they were produced."""

    entries: dict
    provenance: str

    def __getitem__(self, key):
        return self.entries[key]


def wdvv_p2(dmax: int) -> CountTable:
    """Degree-d rational plane curves through 3d-1 points.

    N_1 = 1 and, for d >= 2,
    N_d = sum over d1+d2=d of N_{d1} N_{d2} (d1^2 d2^2 C(3d-4, 3d1-2)
          - d1^3 d2 C(3d-4, 3d1-1)).
    """
    if dmax < 1:
        raise ValueError("dmax >= 1")
    n = {1: Fraction(1)}
    for d in range(2, dmax + 1):
        total = Fraction(0)
        for d1 in range(1, d):
            d2 = d - d1
            total += n[d1] * n[d2] * (
                d1**2 * d2**2 * comb(3 * d - 4, 3 * d1 - 2)
                - d1**3 * d2 * comb(3 * d - 4, 3 * d1 - 1)
            )
        n[d] = total
    return CountTable(dict(n), "plane-curve WDVV recursion from N_1 = 1")


def wdvv_p1p1(bound: tuple[int, int]) -> CountTable:
    """Bidegree-(a,b) rational curves on a smooth quadric through 2a+2b-1 points.

    Base cases N_{(1,0)} = N_{(0,1)} = 1 (and N_{(a,0)} = N_{(0,b)} = 0 for
    a, b >= 2: a multiple of a ruling cannot pass through 2a-1 >= 3 general
    points).  Associativity of the quantum product gives (docs/wdvv-f0.md)

        2ab N_{(a,b)} = sum_{(a1,b1)+(a2,b2)=(a,b)} N_1 N_2
                        a1^2 b2^2 (a1 b2 - a2 b1) C(2a+2b-2, 2a1+2b1-1).
    """
    amax, bmax = bound
    n: dict[tuple[int, int], Fraction] = {}

    def get(a, b):
        if a == 0:
            return Fraction(1 if b == 1 else 0)
        if b == 0:
            return Fraction(1 if a == 1 else 0)
        return n[(a, b)]

    for a in range(1, amax + 1):
        for b in range(1, bmax + 1):
            total = Fraction(0)
            for a1 in range(0, a + 1):
                for b1 in range(0, b + 1):
                    a2, b2 = a - a1, b - b1
                    if (a1, b1) == (0, 0) or (a2, b2) == (0, 0):
                        continue
                    coeff = a1**2 * b2**2 * (a1 * b2 - a2 * b1)
                    if coeff == 0:
                        continue
                    total += (
                        get(a1, b1)
                        * get(a2, b2)
                        * coeff
                        * comb(2 * a + 2 * b - 2, 2 * a1 + 2 * b1 - 1)
                    )
            n[(a, b)] = total / (2 * a * b)
    for a in range(1, amax + 1):
        n.setdefault((a, 0), get(a, 0))
    for b in range(1, bmax + 1):
        n.setdefault((0, b), get(0, b))
    return CountTable(dict(n), "two-ruling WDVV recursion from N_(1,0) = N_(0,1) = 1")


def psi_string_oracle(exponents) -> Fraction:
    """Genus-zero psi correlators by the string equation alone.

    <tau_0 tau_0 tau_0> = 1; removing a tau_0 insertion lowers one of the
    remaining exponents by one, summed over choices.  Independent of the
    closed form used by the engine.
    """
    exps = tuple(exponents)
    n = len(exps)
    if n < 3:
        raise TooFewPoints(f"need at least 3 points, got {n}")
    if any(a < 0 for a in exps):
        raise ValueError("negative exponent")
    if n == 3:
        return Fraction(1) if exps == (0, 0, 0) else Fraction(0)
    if sum(exps) != n - 3:
        return Fraction(0)
    j = exps.index(0)  # exists: sum < n forces a zero
    rest = exps[:j] + exps[j + 1 :]
    total = Fraction(0)
    for i, a in enumerate(rest):
        if a >= 1:
            total += psi_string_oracle(rest[:i] + (a - 1,) + rest[i + 1 :])
    return total


# ---------------------------------------------------------------------------
# Quantum Lefschetz line check (uses the engine on two independent builds)
# ---------------------------------------------------------------------------


@dataclass
class LefschetzReport:
    p1_value: Fraction
    p2_twisted_value: Fraction
    local_p2_value: Fraction
    expected_local: Fraction = Fraction(3)

    @property
    def ok(self) -> bool:
        return (
            self.p1_value == 1
            and self.p2_twisted_value == 1
            and self.local_p2_value == self.expected_local
        )

    def lines(self):
        yield f"<pt,pt> on the line, degree 1          : {self.p1_value} (expect 1)"
        yield f"<H,H> on P2 twisted by O(1), degree 1  : {self.p2_twisted_value} (expect 1)"
        yield f"local P2 (O(-3), x -> 0), degree 1     : {self.local_p2_value} (expect 3)"


def lefschetz_line_check() -> LefschetzReport:
    """Hyperplane-twist functoriality plus the degree-one local P2 number.

    The O(1)-twisted two-point bracket on P2 restricts the count to the
    hyperplane line, so it must equal <pt,pt> on an independently built P1;
    both are 1.  The concave O(-3) twist with the auxiliary weight has the
    x -> 0 limit 3, matching the fixed-line Bott sum in docs/local-p2.md.
    """
    from . import presets
    from .exact import AUX_VAR, Character
    from .graphsum import TwistSpec, gw_invariant, insertions, nonequivariant_invariant
    from .targets import CurveClass, EquivariantLineBundle, SplitBundle

    p1 = presets.p1()
    pt0, pt1 = p1.delta(0), p1.delta(1)
    v1 = gw_invariant(p1, CurveClass((1,)), insertions([pt0, pt1]))
    p1_value = v1.constant_value()

    p2 = presets.p2(rank=3)
    H = p2.generator("H")
    c = Character.basis(3, 2)
    weights = [Character.zero(3), Character.basis(3, 0), Character.basis(3, 1)]
    o1 = EquivariantLineBundle(tuple(c - w for w in weights))
    # multiplicative Euler-class twist: insert e(E^0), cutting to the line
    tw = TwistSpec(SplitBundle((o1,)), ("convex",), inverted=False)
    p2_twisted = nonequivariant_invariant(
        p2, CurveClass((1,)), insertions([H, H]), tw, mode="symbolic"
    )

    p2s = presets.p2()
    canonical = EquivariantLineBundle(
        tuple(
            -sum(p2s.tangent_weights(p), Character.zero(p2s.rank))
            for p in range(len(p2s.points))
        )
    )
    tw_local = TwistSpec(SplitBundle((canonical,)), ("concave",), auxiliary=True)
    local = gw_invariant(
        p2s, CurveClass((1,)), insertions([]), tw_local, limit_x=True
    )
    if not local.is_constant():
        raise AssertionError(f"local P2 value not constant: {local}")
    return LefschetzReport(p1_value, p2_twisted, local.constant_value())
