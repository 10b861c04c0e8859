"""GKM targets: moment graphs, equivariant classes, bundles, identification.

A target is stored as its moment graph: isolated fixed points, one
one-dimensional-orbit edge per unordered pair it connects, the integral
character of each edge at its first endpoint, and the curve class of the
orbit closure.  Tangent data at a fixed point is the multiset of characters
of the edges through it; for a GKM space this exhausts the tangent space, so
the valence equals the dimension.

The chain-free condition (no two tangent characters at a fixed point on a
common ray) is enforced by `validate`: it guarantees every invariant stable
map is a tree of multiple covers of edge curves, which is what the graph-sum
engine computes.
"""

from __future__ import annotations

import itertools
import json
import random
from dataclasses import dataclass, field
from fractions import Fraction

from .exact import (
    AUX_VAR,
    Character,
    NoLimit,
    Polynomial,
    RationalFunction as RF,
    lam,
)


class TargetError(Exception):
    """Base class for target construction / validation errors."""


class DegenerateWeights(TargetError):
    pass


class RepeatedFiberWeights(TargetError):
    pass


class NotChainFree(TargetError):
    pass


class NotValidated(TargetError):
    pass


class NotEffective(TargetError):
    pass


class ChernMismatch(TargetError):
    pass


class SingularVandermonde(TargetError):
    pass


class SingularPairing(TargetError):
    pass


# ---------------------------------------------------------------------------
# Curve classes
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CurveClass:
    """Integer coordinates in the chosen basis of the curve lattice."""

    coords: tuple[int, ...]

    def __add__(self, other: "CurveClass") -> "CurveClass":
        return CurveClass(tuple(a + b for a, b in zip(self.coords, other.coords, strict=True)))

    def __sub__(self, other: "CurveClass") -> "CurveClass":
        return CurveClass(tuple(a - b for a, b in zip(self.coords, other.coords, strict=True)))

    def scale(self, k: int) -> "CurveClass":
        return CurveClass(tuple(k * a for a in self.coords))

    def is_zero(self) -> bool:
        return not any(self.coords)

    def dominates(self, other: "CurveClass") -> bool:
        return all(a >= b for a, b in zip(self.coords, other.coords, strict=True))

    def __str__(self) -> str:
        return "(" + ",".join(str(c) for c in self.coords) + ")"


# ---------------------------------------------------------------------------
# Moment graph
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GkmEdge:
    """One-dimensional orbit closure between fixed points p and q.

    `char` is the integral character at p (the tangent weight of the orbit
    at p); the character at q is its negative.
    """

    p: int
    q: int
    char: Character
    cclass: CurveClass

    def char_at(self, end: int) -> Character:
        if end == self.p:
            return self.char
        if end == self.q:
            return -self.char
        raise ValueError("endpoint not on edge")

    def other(self, end: int) -> int:
        return self.q if end == self.p else self.p


@dataclass
class ValidationReport:
    violations: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def __str__(self) -> str:
        if self.ok:
            return "valid GKM target"
        return "\n".join(f"- {v}" for v in self.violations)


class GkmTarget:
    """Immutable moment-graph model of a GKM variety."""

    def __init__(
        self,
        rank: int,
        points: tuple[str, ...],
        edges: tuple[GkmEdge, ...],
        lattice_rank: int,
        name: str = "target",
        spec: dict | None = None,
    ):
        self.rank = rank
        self.points = points
        self.edges = edges
        self.lattice_rank = lattice_rank
        self.name = name
        self.spec = spec or {"explicit": True}
        self.generators: dict[str, EquivariantClass] = {}
        self.divisor_basis: tuple[EquivariantClass, ...] = ()
        self.bundle_info: BundleInfo | None = None
        self._report: ValidationReport | None = None
        self._matchings: dict[int, tuple[tuple[Character, int], ...]] | None = None
        self._positivity: tuple[int, ...] | None = None
        self._effective_cache: dict[tuple[int, ...], bool] = {}
        self._tree_cache: dict = {}

    # -- basic structure ------------------------------------------------------

    def point_index(self, p) -> int:
        return p if isinstance(p, int) else self.points.index(p)

    def edges_at(self, p: int) -> list[tuple[int, GkmEdge]]:
        """(edge index, edge) pairs through the fixed point p."""
        return [(i, e) for i, e in enumerate(self.edges) if p in (e.p, e.q)]

    def tangent_weights(self, p: int) -> list[Character]:
        return [e.char_at(p) for _, e in self.edges_at(p)]

    @property
    def dimension(self) -> int:
        return len(self.edges_at(0))

    def euler_tangent_forms(self, p: int) -> list[Polynomial]:
        return [w.polynomial() for w in self.tangent_weights(p)]

    # -- validation -----------------------------------------------------------

    def validate(self) -> ValidationReport:
        """Check the GKM invariants; returns violations, never raises."""
        if self._report is not None:
            return self._report
        rep = ValidationReport()
        valences = {p: len(self.edges_at(p)) for p in range(len(self.points))}
        if len(set(valences.values())) > 1:
            rep.violations.append(f"valence not constant: {valences}")
        for e in self.edges:
            if e.p == e.q:
                rep.violations.append(f"edge at {self.points[e.p]} is a loop")
            if e.char.is_zero():
                rep.violations.append(f"edge {self.points[e.p]}-{self.points[e.q]} has zero character")
            if e.char.denom != 1:
                rep.violations.append(f"edge {self.points[e.p]}-{self.points[e.q]} has fractional character")
        # chain-free: tangent characters at p pairwise non-collinear
        for p in range(len(self.points)):
            ws = self.tangent_weights(p)
            for (i, a), (j, b) in itertools.combinations(enumerate(ws), 2):
                if a.collinear(b):
                    rep.violations.append(
                        f"collinear tangent weights at {self.points[p]}: {a} and {b}"
                    )
            if any(w.is_zero() for w in ws):
                rep.violations.append(f"zero tangent weight at {self.points[p]}")
        # GKM matching along each edge, and its uniqueness
        matchings: dict[int, tuple[tuple[Character, int], ...]] = {}
        for i, e in enumerate(self.edges):
            found = self._edge_matchings(e)
            if not found:
                rep.violations.append(
                    f"no mod-character matching of tangent weights along edge "
                    f"{self.points[e.p]}-{self.points[e.q]}"
                )
            elif len(found) > 1:
                rep.violations.append(
                    f"ambiguous tangent matching along edge "
                    f"{self.points[e.p]}-{self.points[e.q]}"
                )
            else:
                matchings[i] = next(iter(found))
        if self._positivity_vector() is None:
            rep.violations.append("edge classes do not span a pointed effective cone")
        if rep.ok:
            self._matchings = matchings
        self._report = rep
        return rep

    def _edge_matchings(self, e: GkmEdge):
        """All degree-decorated weight multisets from mod-omega matchings."""
        wp = self.tangent_weights(e.p)
        wq = self.tangent_weights(e.q)
        results: set[tuple[tuple[Character, int], ...]] = set()

        def extend(i, used, acc):
            if i == len(wp):
                results.add(tuple(sorted(acc, key=lambda t: (t[0].coeffs, t[0].aux, t[1]))))
                return
            for j in range(len(wq)):
                if used[j]:
                    continue
                ratio = (wp[i] - wq[j]).ratio_over(e.char)
                if ratio is not None and ratio.denominator == 1:
                    used[j] = True
                    extend(i + 1, used, acc + [(wp[i], int(ratio))])
                    used[j] = False

        extend(0, [False] * len(wq), [])
        return results

    def ensure_valid(self):
        rep = self.validate()
        if not rep.ok:
            raise NotValidated(str(rep))

    def edge_lines(self, edge_index: int) -> tuple[tuple[Character, int], ...]:
        """Tangent lines along an edge as (weight at p, degree) pairs."""
        self.ensure_valid()
        return self._matchings[edge_index]

    # -- effectivity ------------------------------------------------------------

    def _positivity_vector(self) -> tuple[int, ...] | None:
        """An integer functional strictly positive on all edge classes."""
        if self._positivity is not None:
            return self._positivity
        classes = {e.cclass.coords for e in self.edges}
        for radius in (1, 2, 4):
            for cand in itertools.product(range(-radius, radius + 1), repeat=self.lattice_rank):
                if all(sum(a * b for a, b in zip(cand, c)) > 0 for c in classes):
                    self._positivity = cand
                    return cand
        return None

    def degree_bound(self, beta: CurveClass) -> int:
        """phi(beta) for the positivity functional; bounds edge counts/covers."""
        phi = self._positivity_vector()
        if phi is None:
            raise NotEffective("no positivity functional")
        return sum(a * b for a, b in zip(phi, beta.coords))

    def is_effective(self, beta: CurveClass) -> bool:
        """Is beta a non-negative integer combination of edge classes?"""
        if beta.is_zero():
            return True
        phi = self._positivity_vector()
        if phi is None:
            raise NotEffective("no positivity functional")
        classes = sorted({e.cclass.coords for e in self.edges})
        memo = self._effective_cache

        def dfs(target: tuple[int, ...]) -> bool:
            if not any(target):
                return True
            if sum(a * b for a, b in zip(phi, target)) <= 0:
                return False
            hit = memo.get(target)
            if hit is not None:
                return hit
            memo[target] = False  # phi strictly drops, so no true cycles
            result = any(
                dfs(tuple(t - c for t, c in zip(target, cls))) for cls in classes
            )
            memo[target] = result
            return result

        return dfs(beta.coords)

    def effective_classes(self, bound: CurveClass) -> list[CurveClass]:
        """Nonzero effective classes below `bound` in the effective-cone order.

        beta qualifies when both beta and bound - beta are non-negative
        integer combinations of edge classes; this downward closure is what a
        Novikov truncation at `bound` must contain (the one-point recursion
        shifts classes by edge multiples).
        """
        phi = self._positivity_vector()
        budget = sum(a * b for a, b in zip(phi, bound.coords))
        classes = sorted({e.cclass.coords for e in self.edges})
        found: set[tuple[int, ...]] = set()
        zero = (0,) * self.lattice_rank

        def dfs(acc: tuple[int, ...], start: int):
            for i in range(start, len(classes)):
                nxt = tuple(a + c for a, c in zip(acc, classes[i]))
                if sum(a * b for a, b in zip(phi, nxt)) > budget:
                    continue
                if nxt not in found:
                    found.add(nxt)
                dfs(nxt, i)

        dfs(zero, 0)
        out = [
            CurveClass(c)
            for c in found
            if c != zero and self.is_effective(bound - CurveClass(c))
        ]
        return sorted(out, key=lambda b: (self.degree_bound(b), b.coords))

    # -- integration ------------------------------------------------------------

    def euler_class_tangent(self, p) -> RF:
        """Product of the tangent weights at p."""
        self.ensure_valid()
        p = self.point_index(p)
        out = Polynomial.ONE
        for f in self.euler_tangent_forms(p):
            out = out * f
        return RF.of(out)

    def integrate(self, alpha: "EquivariantClass") -> RF:
        """Fixed-point sum of alpha(p)/e_T(T_p X)."""
        self.ensure_valid()
        total = RF.of(0)
        for p in range(len(self.points)):
            total = total + RF.make(Polynomial.ONE, self.euler_tangent_forms(p)) * alpha.at(p)
        return total

    def poincare_pair(self, alpha: "EquivariantClass", beta: "EquivariantClass") -> RF:
        return self.integrate(alpha * beta)

    # -- divisor / curve pairing -------------------------------------------------

    def edge_pairing(self, divisor: "EquivariantClass", edge: GkmEdge) -> Fraction:
        """(D|_p - D|_q) / omega, which is the degree of D on the edge curve."""
        diff = divisor.at(edge.p) - divisor.at(edge.q)
        val = diff / RF.of(edge.char.polynomial())
        if not val.is_constant():
            raise SingularPairing(f"class does not satisfy the GKM relation on edge {edge}")
        return val.constant_value()

    def _lattice_basis_edges(self) -> list[GkmEdge]:
        """Edges whose classes form a basis of the curve lattice (over Q)."""
        chosen: list[GkmEdge] = []
        rows: list[list[Fraction]] = []
        for e in self.edges:
            cand = rows + [[Fraction(c) for c in e.cclass.coords]]
            if _rank(cand) > len(rows):
                rows = cand
                chosen.append(e)
            if len(chosen) == self.lattice_rank:
                return chosen
        raise SingularPairing("edge classes do not span the curve lattice")

    def pairing_number(self, divisor: "EquivariantClass", beta: CurveClass) -> Fraction:
        """<D, beta>, extended linearly from the pairings on edge classes."""
        basis = self._lattice_basis_edges()
        mat = [[Fraction(c) for c in e.cclass.coords] for e in basis]
        coeffs = _solve(mat, [Fraction(c) for c in beta.coords])
        return sum(
            (c * self.edge_pairing(divisor, e) for c, e in zip(coeffs, basis)),
            start=Fraction(0),
        )

    # -- classes -------------------------------------------------------------------

    def cls(self, restrictions, degree: int | None = None, polynomial=True) -> "EquivariantClass":
        return EquivariantClass(
            self, tuple(RF.of(r) for r in restrictions), degree=degree, polynomial=polynomial
        )

    def unit(self) -> "EquivariantClass":
        return self.cls([Polynomial.ONE] * len(self.points), degree=0)

    def delta(self, p) -> "EquivariantClass":
        """The fixed-point class: e_T(T_p X) at p, zero elsewhere."""
        p = self.point_index(p)
        rest = [RF.of(0)] * len(self.points)
        rest[p] = self.euler_class_tangent(p)
        return EquivariantClass(self, tuple(rest), degree=self.dimension)

    def minus_canonical(self) -> "EquivariantClass":
        """c_1^T(TX): restriction at p is the sum of tangent weights."""
        rest = []
        for p in range(len(self.points)):
            s = Polynomial.ZERO
            for f in self.euler_tangent_forms(p):
                s = s + f
            rest.append(RF.of(s))
        return EquivariantClass(self, tuple(rest), degree=1)

    def generator(self, name: str) -> "EquivariantClass":
        try:
            return self.generators[name]
        except KeyError:
            raise KeyError(f"no generator class {name!r} on {self.name}") from None

    def class_expression(self, expr: str) -> "EquivariantClass":
        """Parse 'h^2*b' style monomials over the target's generators."""
        expr = expr.strip()
        if expr in ("1", ""):
            return self.unit()
        out = self.unit()
        for piece in expr.split("*"):
            piece = piece.strip()
            if "^" in piece:
                name, _, power = piece.partition("^")
                out = out * self.generator(name.strip()) ** int(power)
            else:
                out = out * self.generator(piece)
        return out

    # -- serialization -----------------------------------------------------------

    def to_spec(self) -> dict:
        return self.spec

    def canonical_json(self) -> str:
        return json.dumps(self.to_spec(), sort_keys=True, separators=(",", ":"))

    def __repr__(self):
        return (
            f"GkmTarget({self.name}: {len(self.points)} fixed points, "
            f"{len(self.edges)} edges, dim {self.dimension})"
        )


def _rank(rows: list[list[Fraction]]) -> int:
    m = [row[:] for row in rows]
    rank = 0
    cols = len(m[0]) if m else 0
    for c in range(cols):
        pivot = next((r for r in range(rank, len(m)) if m[r][c] != 0), None)
        if pivot is None:
            continue
        m[rank], m[pivot] = m[pivot], m[rank]
        for r in range(len(m)):
            if r != rank and m[r][c] != 0:
                f = m[r][c] / m[rank][c]
                m[r] = [a - f * b for a, b in zip(m[r], m[rank])]
        rank += 1
    return rank


def _solve(mat: list[list[Fraction]], rhs: list[Fraction]) -> list[Fraction]:
    """Solve mat^T x = rhs ... prefer: solve sum x_i mat[i] = rhs."""
    n = len(mat)
    cols = len(rhs)
    aug = [[mat[i][c] for i in range(n)] + [rhs[c]] for c in range(cols)]
    # Gaussian elimination on the cols x n system
    piv_rows = []
    r = 0
    for c in range(n):
        pivot = next((i for i in range(r, cols) if aug[i][c] != 0), None)
        if pivot is None:
            continue
        aug[r], aug[pivot] = aug[pivot], aug[r]
        piv_rows.append(c)
        for i in range(cols):
            if i != r and aug[i][c] != 0:
                f = aug[i][c] / aug[r][c]
                aug[i] = [a - f * b for a, b in zip(aug[i], aug[r])]
        r += 1
    x = [Fraction(0)] * n
    for row, c in enumerate(piv_rows):
        x[c] = aug[row][n] / aug[row][c]
    # consistency
    for i in range(cols):
        if all(aug[i][j] == 0 for j in range(n)) and aug[i][n] != 0:
            raise SingularPairing("inconsistent linear system")
    return x


# ---------------------------------------------------------------------------
# Equivariant classes
# ---------------------------------------------------------------------------


class EquivariantClass:
    """A localized class stored by its tuple of fixed-point restrictions."""

    __slots__ = ("target", "restrictions", "degree", "polynomial")

    def __init__(self, target: GkmTarget, restrictions: tuple[RF, ...], degree=None, polynomial=True):
        if len(restrictions) != len(target.points):
            raise ValueError("one restriction per fixed point required")
        self.target = target
        self.restrictions = restrictions
        self.degree = degree
        self.polynomial = polynomial

    def at(self, p) -> RF:
        return self.restrictions[self.target.point_index(p)]

    def __add__(self, other: "EquivariantClass") -> "EquivariantClass":
        deg = self.degree if self.degree == other.degree else None
        return EquivariantClass(
            self.target,
            tuple(a + b for a, b in zip(self.restrictions, other.restrictions)),
            degree=deg,
            polynomial=self.polynomial and other.polynomial,
        )

    def __mul__(self, other) -> "EquivariantClass":
        if isinstance(other, EquivariantClass):
            deg = None
            if self.degree is not None and other.degree is not None:
                deg = self.degree + other.degree
            return EquivariantClass(
                self.target,
                tuple(a * b for a, b in zip(self.restrictions, other.restrictions)),
                degree=deg,
                polynomial=self.polynomial and other.polynomial,
            )
        return EquivariantClass(
            self.target,
            tuple(RF.of(other) * a for a in self.restrictions),
            degree=self.degree,
            polynomial=self.polynomial,
        )

    __rmul__ = __mul__

    def __sub__(self, other):
        return self + other * (-1)

    def __pow__(self, n: int) -> "EquivariantClass":
        out = self.target.unit()
        for _ in range(n):
            out = out * self
        return out

    def __eq__(self, other):
        return (
            isinstance(other, EquivariantClass)
            and self.target is other.target
            and self.restrictions == other.restrictions
        )

    def __hash__(self):
        return hash(self.restrictions)

    def __reduce__(self):
        return (EquivariantClass, (self.target, self.restrictions, self.degree, self.polynomial))

    def gkm_divisibility_violations(self) -> list[str]:
        """GKM relations for classes declared polynomial."""
        out = []
        for e in self.target.edges:
            a, b = self.restrictions[e.p], self.restrictions[e.q]
            if not (a.is_polynomial() and b.is_polynomial()):
                out.append(f"restriction not polynomial at edge {e.p}-{e.q}")
                continue
            diff = a.as_polynomial() - b.as_polynomial()
            if diff.is_zero():
                continue
            if diff.divide_by_linear(e.char.polynomial()) is None:
                out.append(
                    f"difference across {self.target.points[e.p]}-{self.target.points[e.q]} "
                    f"not divisible by {e.char}"
                )
        return out

    def __repr__(self):
        inner = ", ".join(f"{p}: {r}" for p, r in zip(self.target.points, self.restrictions))
        return f"EquivariantClass({inner})"


# ---------------------------------------------------------------------------
# Line bundles and split bundles
# ---------------------------------------------------------------------------


class InconsistentEdgeData(TargetError):
    pass


@dataclass(frozen=True)
class EquivariantLineBundle:
    """Fiber weights l_p at the fixed points; degrees read off the edges."""

    weights: tuple[Character, ...]

    def at(self, p: int) -> Character:
        return self.weights[p]

    def degree_on(self, target: GkmTarget, edge: GkmEdge) -> int:
        diff = self.weights[edge.p] - self.weights[edge.q]
        if diff.is_zero():
            return 0
        ratio = diff.ratio_over(edge.char)
        if ratio is None or ratio.denominator != 1:
            raise InconsistentEdgeData(
                f"weight difference {diff} along edge {target.points[edge.p]}-"
                f"{target.points[edge.q]} is not an integer multiple of {edge.char}"
            )
        return int(ratio)

    def check_on(self, target: GkmTarget):
        for e in target.edges:
            self.degree_on(target, e)

    def shift_aux(self) -> "EquivariantLineBundle":
        return EquivariantLineBundle(tuple(w.shift_aux() for w in self.weights))

    def first_chern(self, target: GkmTarget) -> EquivariantClass:
        return target.cls([w.polynomial() for w in self.weights], degree=1)


@dataclass(frozen=True)
class SplitBundle:
    """Ordered direct sum of equivariant line bundles over one target."""

    summands: tuple[EquivariantLineBundle, ...]

    @property
    def rank(self) -> int:
        return len(self.summands)

    def check_on(self, target: GkmTarget):
        for s in self.summands:
            s.check_on(target)

    def fiber_weights(self, p: int) -> tuple[Character, ...]:
        return tuple(s.at(p) for s in self.summands)

    def chern_polynomial_at(self, p: int, x: Polynomial) -> Polynomial:
        """c_T(V)(x) restricted to p: product over summands of (x + l_i(p))."""
        out = Polynomial.ONE
        for s in self.summands:
            out = out * (x + s.at(p).polynomial())
        return out


# ---------------------------------------------------------------------------
# Builders
# ---------------------------------------------------------------------------


def build_projective_space(n: int, weights: list[Character], name: str | None = None) -> GkmTarget:
    """P^n with the torus acting by `weights` on the homogeneous coordinates.

    Fixed points p_i are the coordinate points; the edge p_i-p_j carries the
    character w_j - w_i at p_i and the class of the line.
    """
    if len(weights) != n + 1:
        raise ValueError("need n+1 weights")
    for a, b in itertools.combinations(weights, 2):
        if (a - b).is_zero():
            raise DegenerateWeights(f"coincident weights {a} and {b}")
    rank = weights[0].rank
    points = tuple(f"p{i}" for i in range(n + 1))
    edges = tuple(
        GkmEdge(i, j, weights[j] - weights[i], CurveClass((1,)))
        for i, j in itertools.combinations(range(n + 1), 2)
    )
    t = GkmTarget(rank, points, edges, 1, name=name or f"P{n}", spec={
        "builder": "projective_space",
        "n": n,
        "weights": [[w.coeffs, w.aux] for w in weights],
    })
    hyperplane = t.cls([(-w).polynomial() for w in weights], degree=1)
    t.generators = {"H": hyperplane}
    t.divisor_basis = (hyperplane,)
    return t


def build_product(a: GkmTarget, b: GkmTarget, name: str | None = None, check=True) -> GkmTarget:
    """Product target: pairs of fixed points, edges in one factor at a time."""
    if a.rank != b.rank:
        raise ValueError("factors must share one torus")
    points = tuple(f"{p},{q}" for p in a.points for q in b.points)
    nb = len(b.points)

    def idx(i, j):
        return i * nb + j

    edges = []
    zero_b = (0,) * b.lattice_rank
    zero_a = (0,) * a.lattice_rank
    for e in a.edges:
        for j in range(nb):
            edges.append(
                GkmEdge(idx(e.p, j), idx(e.q, j), e.char, CurveClass(e.cclass.coords + zero_b))
            )
    for e in b.edges:
        for i in range(len(a.points)):
            edges.append(
                GkmEdge(idx(i, e.p), idx(i, e.q), e.char, CurveClass(zero_a + e.cclass.coords))
            )
    t = GkmTarget(
        a.rank,
        points,
        tuple(edges),
        a.lattice_rank + b.lattice_rank,
        name=name or f"{a.name}x{b.name}",
        spec={"builder": "product", "factors": [a.to_spec(), b.to_spec()]},
    )
    gens = {}
    basis = []
    for label, factor, other_first in ((1, a, True), (2, b, False)):
        for gname, g in factor.generators.items():
            if other_first:
                rest = [g.at(i) for i in range(len(a.points)) for _ in range(nb)]
            else:
                rest = [g.at(j) for _ in range(len(a.points)) for j in range(nb)]
            cls = EquivariantClass(t, tuple(rest), degree=g.degree, polynomial=g.polynomial)
            gens[f"{gname}{label}"] = cls
    t.generators = gens
    for factor_label in sorted(gens):
        basis.append(gens[factor_label])
    t.divisor_basis = tuple(basis)
    if check:
        rep = t.validate()
        if not rep.ok:
            raise NotChainFree(str(rep))
    return t


@dataclass
class BundleInfo:
    base: GkmTarget
    bundle: SplitBundle
    h: "EquivariantClass"
    # target point (b, i) lives at index b * rank + i

    def point_of(self, b: int, i: int) -> int:
        return b * self.bundle.rank + i


def build_projective_bundle(
    base: GkmTarget, bundle: SplitBundle, name: str | None = None, check=True
) -> GkmTarget:
    """P(V) for a split bundle V over a GKM base.

    Fixed points are (base point, summand); fiber edges carry l_j - l_i and
    the fiber class; the horizontal edge over a base edge along summand i
    carries the base character and the lifted base class shifted by the edge
    degree of L_i times the fiber class (sign pinned by <h, lift> = 0 and
    <h, fiber> = 1).
    """
    base.ensure_valid()
    bundle.check_on(base)
    r = bundle.rank
    for b in range(len(base.points)):
        ws = bundle.fiber_weights(b)
        for wa, wb in itertools.combinations(ws, 2):
            if (wa - wb).is_zero():
                raise RepeatedFiberWeights(
                    f"coincident fiber weights over {base.points[b]}"
                )
    points = tuple(f"{bp}|{i}" for bp in base.points for i in range(r))

    def idx(b, i):
        return b * r + i

    fiber = CurveClass((0,) * base.lattice_rank + (1,))
    edges = []
    for b in range(len(base.points)):
        for i, j in itertools.combinations(range(r), 2):
            edges.append(
                GkmEdge(idx(b, i), idx(b, j), bundle.summands[j].at(b) - bundle.summands[i].at(b), fiber)
            )
    for e in base.edges:
        for i in range(r):
            d = bundle.summands[i].degree_on(base, e)
            cls = CurveClass(e.cclass.coords + (-d,))
            edges.append(GkmEdge(idx(e.p, i), idx(e.q, i), e.char, cls))
    t = GkmTarget(
        base.rank,
        points,
        tuple(edges),
        base.lattice_rank + 1,
        name=name or f"P({base.name})",
        spec={
            "builder": "projective_bundle",
            "base": base.to_spec(),
            "summands": [
                {"weights": [[w.coeffs, w.aux] for w in s.weights]} for s in bundle.summands
            ],
        },
    )
    h = t.cls(
        [(-bundle.summands[i].at(b)).polynomial() for b in range(len(base.points)) for i in range(r)],
        degree=1,
    )
    gens = {"h": h}
    for gname, g in base.generators.items():
        gens["b" if gname == "H" else f"b{gname}"] = EquivariantClass(
            t,
            tuple(g.at(b) for b in range(len(base.points)) for _ in range(r)),
            degree=g.degree,
            polynomial=g.polynomial,
        )
    t.generators = gens
    t.divisor_basis = (h,) + tuple(
        gens[k] for k in sorted(gens) if k != "h"
    )
    t.bundle_info = BundleInfo(base=base, bundle=bundle, h=h)
    if check:
        rep = t.validate()
        if not rep.ok:
            raise NotChainFree(str(rep))
    return t


# ---------------------------------------------------------------------------
# The identification between projective bundles with equal Chern data
# ---------------------------------------------------------------------------


@dataclass
class CohomologyIdentification:
    """Canonical identification of H_T^* and curve classes of two bundles.

    Both targets must be projective bundles over one base with equal
    fiber-weight multisets at every base fixed point (equivariant mode) or
    equal Chern data in the classical sense (non-equivariant mode).
    """

    source: GkmTarget
    target: GkmTarget
    mode: str = "equivariant"

    def __post_init__(self):
        if self.mode not in ("equivariant", "nonequivariant"):
            raise ValueError("mode must be equivariant or nonequivariant")
        si, ti = self.source.bundle_info, self.target.bundle_info
        if si is None or ti is None:
            raise ChernMismatch("both sides must be projective bundles")
        if si.base.canonical_json() != ti.base.canonical_json():
            raise ChernMismatch("bundles do not share a base")
        if si.bundle.rank != ti.bundle.rank:
            raise ChernMismatch("ranks differ")
        if self.mode == "equivariant":
            for b in range(len(si.base.points)):
                ws = sorted((w.coeffs, w.aux, w.denom) for w in si.bundle.fiber_weights(b))
                wt = sorted((w.coeffs, w.aux, w.denom) for w in ti.bundle.fiber_weights(b))
                if ws != wt:
                    raise ChernMismatch(
                        f"fiber weight multisets differ over {si.base.points[b]}"
                    )
        else:
            if si.base.dimension > 1:
                raise ChernMismatch(
                    "non-equivariant Chern comparison implemented for curve bases"
                )
            for e in si.base.edges:
                d1 = sum(s.degree_on(si.base, e) for s in si.bundle.summands)
                d2 = sum(s.degree_on(ti.base, e) for s in ti.bundle.summands)
                if d1 != d2:
                    raise ChernMismatch(
                        f"c_1 degrees differ on base edge {e.p}-{e.q}: {d1} vs {d2}"
                    )

    # -- cohomology ---------------------------------------------------------------

    def transfer(self, alpha: EquivariantClass) -> EquivariantClass:
        """Write alpha = sum pi^*(a_k) h^k fiberwise and replay it on the target.

        The a_k over a base point are found by Lagrange interpolation in the
        fiber restrictions of h, so every division is by a product of
        degree-one forms.  In non-equivariant mode the coefficients are passed
        through their limit at all torus parameters -> 0 first.
        """
        si, ti = self.source.bundle_info, self.target.bundle_info
        r = si.bundle.rank
        out = [RF.of(0)] * len(self.target.points)
        for b in range(len(si.base.points)):
            xs = [RF.of((-si.bundle.summands[i].at(b)).polynomial()) for i in range(r)]
            for i, j in itertools.combinations(range(r), 2):
                if xs[i] == xs[j]:
                    raise SingularVandermonde(f"colliding h-values over {si.base.points[b]}")
            values = [alpha.at(si.point_of(b, i)) for i in range(r)]
            coeffs = _interpolate(xs, values)
            if self.mode == "nonequivariant":
                coeffs = [_lambda_limit(c, self.source.rank) for c in coeffs]
            xt = [RF.of((-ti.bundle.summands[i].at(b)).polynomial()) for i in range(r)]
            for i in range(r):
                val = RF.of(0)
                for k in range(r):
                    val = val + coeffs[k] * xt[i] ** k
                out[ti.point_of(b, i)] = val
        deg = alpha.degree
        return EquivariantClass(self.target, tuple(out), degree=deg, polynomial=False)

    def transfer_expression(self, expr: str) -> EquivariantClass:
        """Transfer a generator monomial by renaming; equals `transfer` on it."""
        return self.target.class_expression(expr)

    # -- curve classes ---------------------------------------------------------------

    def _pairing_matrix(self, t: GkmTarget) -> list[list[Fraction]]:
        basis = t.divisor_basis
        out = []
        for d in basis:
            row = []
            for j in range(t.lattice_rank):
                unit = CurveClass(tuple(1 if k == j else 0 for k in range(t.lattice_rank)))
                row.append(t.pairing_number(d, unit))
            out.append(row)
        return out

    def transfer_curve(self, beta: CurveClass) -> CurveClass:
        """The unique class pairing with the image divisor basis like beta."""
        src_pair = [
            self.source.pairing_number(d, beta) for d in self.source.divisor_basis
        ]
        mat = self._pairing_matrix(self.target)
        n = self.target.lattice_rank
        cols = [[mat[i][j] for i in range(len(mat))] for j in range(n)]
        sol = _solve(cols, src_pair)
        coords = []
        for v in sol:
            if v.denominator != 1:
                raise SingularPairing(f"non-integral transferred class {sol}")
            coords.append(int(v))
        return CurveClass(tuple(coords))


def _interpolate(xs: list[RF], values: list[RF]) -> list[RF]:
    """Coefficients of the degree < r polynomial through (xs[i], values[i]).

    Denominators are products of the pairwise differences of the nodes, so
    inversion stays inside the factored-linear-form arithmetic.
    """
    r = len(xs)
    coeffs = [RF.of(0)] * r
    for i in range(r):
        # numerator polynomial prod_{j != i} (T - x_j), expanded in T
        basis = [RF.of(1)]
        for j in range(r):
            if j == i:
                continue
            new = [RF.of(0)] * (len(basis) + 1)
            for k, c in enumerate(basis):
                new[k + 1] = new[k + 1] + c
                new[k] = new[k] - c * xs[j]
            basis = new
        den = RF.of(1)
        for j in range(r):
            if j != i:
                den = den * (xs[i] - xs[j])
        scale = values[i] / den
        for k in range(len(basis)):
            coeffs[k] = coeffs[k] + basis[k] * scale
    return coeffs


def _lambda_limit(f: RF, rank: int) -> RF:
    for i in range(1, rank + 1):
        f = f.limit_at_zero(lam(i))
    return f


def frak_F_cohomology(ident: CohomologyIdentification, alpha: EquivariantClass) -> EquivariantClass:
    return ident.transfer(alpha)


def frak_F_curve(ident: CohomologyIdentification, beta: CurveClass) -> CurveClass:
    return ident.transfer_curve(beta)


# ---------------------------------------------------------------------------
# Weight contexts: the symbolic / evaluated mode switch
# ---------------------------------------------------------------------------


class WeightContext:
    """Assigns scalar meaning to characters: symbolic or evaluated.

    Symbolic mode keeps l1..lm as variables; evaluated mode substitutes a
    seeded rational point for them (the fast path), keeping x and z symbolic.
    """

    def __init__(self, rank: int, values: dict[str, Fraction] | None, seed: int | None, nonce: int = 0):
        self.rank = rank
        self.values = values
        self.seed = seed
        self.nonce = nonce
        self._char_cache: dict[Character, object] = {}

    @property
    def mode(self) -> str:
        return "symbolic" if self.values is None else "evaluated"

    @staticmethod
    def symbolic(rank: int) -> "WeightContext":
        return WeightContext(rank, None, None)

    @staticmethod
    def evaluated(rank: int, seed: int, nonce: int = 0) -> "WeightContext":
        rng = random.Random(f"{seed}:{nonce}")
        values = {}
        for i in range(1, rank + 1):
            values[lam(i)] = Fraction(
                rng.randint(100, 999) * rng.choice((1, -1)), rng.randint(1, 7)
            )
        return WeightContext(rank, values, seed, nonce)

    def weight(self, ch: Character):
        """Character as a scalar: Fraction, or Polynomial if x is involved."""
        try:
            return self._char_cache[ch]
        except KeyError:
            pass
        poly = ch.polynomial()
        if self.values is not None:
            poly = poly.substitute(self.values)
        out = poly.constant_value() if poly.is_constant() else poly
        self._char_cache[ch] = out
        return out

    def reduce(self, f: RF):
        """Apply the lambda substitution to a stored rational function."""
        if self.values is None:
            return f
        try:
            return self._reduce_cache[f]
        except AttributeError:
            self._reduce_cache = {}
        except KeyError:
            pass
        g = f.substitute(self.values)
        out = g.constant_value() if g.is_constant() else g
        self._reduce_cache[f] = out
        return out

    def metadata(self) -> dict:
        return {
            "mode": self.mode,
            "seed": self.seed,
            "nonce": self.nonce,
            "point": {k: str(v) for k, v in (self.values or {}).items()},
        }
