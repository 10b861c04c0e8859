"""Decorated-graph enumeration and exact localization sums.

A fixed-locus component of the genus-zero stable-map moduli of a chain-free
GKM target is a tree whose vertices carry fixed points (and markings) and
whose edges carry (moment-graph edge, cover degree).  The contribution of a
graph is

    1/|Aut| * prod_e Edge(e) * prod_v Vert(v)

with the conventions pinned by the over-determined calibration identities
(see docs/conventions.md):

* Edge(e): 1/k times, for each tangent line of the target along the edge
  curve, the product of the H^1 section weights of the k-fold cover divided
  by the product of the nonzero H^0 weights.  Exactly one zero H^0 weight
  appears (the reparametrization of the cover) and is dropped.
* Vert(v), stable (valence + markings >= 3): e_T(T_p)^{val-1} times the
  expansion of prod_F 1/(omega_F - psi_F) against the genus-zero psi
  integrals, times the insertions at v.
* Unstable vertices: a bare end contributes its flag weight omega_F; a
  two-flag node contributes e_T(T_p)/(omega_1 + omega_2); a marked end
  contributes the insertion with psi evaluated at -omega_F.
* A twist by a split bundle multiplies, per summand with weight l, each
  vertex by l(p)^{val-1} and each edge by its section-weight ratio.

|Aut| is the group of decoration-preserving tree automorphisms fixing the
markings; the Z/k of a multiple cover is charged to the edge factor.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from math import factorial

from .exact import (
    AUX_VAR,
    Character,
    Polynomial,
    RationalFunction as RF,
    Z,
)
from .targets import (
    CurveClass,
    EquivariantClass,
    EquivariantLineBundle,
    GkmEdge,
    GkmTarget,
    InconsistentEdgeData,
    NotEffective,
    SplitBundle,
    WeightContext,
)


class GraphSumError(Exception):
    pass


class TooFewPoints(GraphSumError):
    pass


class NonInvertibleEulerFactor(GraphSumError):
    pass


class NotConstant(GraphSumError):
    pass


# ---------------------------------------------------------------------------
# psi integrals on the genus-zero moduli of points
# ---------------------------------------------------------------------------


def psi_integral(exponents) -> Fraction:
    """Integral of prod psi_i^{a_i} over the moduli of n >= 3 marked lines.

    Equals (n-3)!/prod(a_i!) when sum(a_i) = n-3, else zero.
    """
    exps = list(exponents)
    n = len(exps)
    if n < 3:
        raise TooFewPoints(f"need at least 3 marked points, got {n}")
    if any(a < 0 for a in exps):
        raise ValueError("negative psi exponent")
    if sum(exps) != n - 3:
        return Fraction(0)
    denom = 1
    for a in exps:
        denom *= factorial(a)
    return Fraction(factorial(n - 3), denom)


# ---------------------------------------------------------------------------
# section weights of line bundles on multiple covers of an edge curve
# ---------------------------------------------------------------------------


def section_weights(
    l_p: Character, omega: Character, degree: int, k: int, l_q: Character | None = None
) -> tuple[tuple[Character, ...], tuple[Character, ...]]:
    """Weights of H^0 and H^1 of the degree-k*degree pullback to the k-cover.

    The line bundle has fiber weight l_p at the end with edge character
    omega; its weight at the far end is l_p - degree*omega, asserted against
    l_q when given.
    """
    if k < 1:
        raise ValueError("cover degree must be >= 1")
    if l_q is not None and not (l_p - omega.scale(degree) - l_q).is_zero():
        raise InconsistentEdgeData(
            f"far-end weight mismatch: {l_p} - {degree}*{omega} != {l_q}"
        )
    if degree >= 0:
        h0 = tuple(l_p - omega.scale(Fraction(a, k)) for a in range(0, k * degree + 1))
        return h0, ()
    h1 = tuple(l_p - omega.scale(Fraction(a, k)) for a in range(k * degree + 1, 0))
    return (), h1


# ---------------------------------------------------------------------------
# graphs
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TreeEdge:
    u: int
    v: int
    edge_index: int
    cover: int


@dataclass(frozen=True)
class UnmarkedTree:
    """Vertex-labeled tree with (moment edge, cover) decorated edges."""

    labels: tuple[int, ...]
    edges: tuple[TreeEdge, ...]

    @property
    def n_vertices(self) -> int:
        return len(self.labels)

    def adjacency(self) -> list[list[TreeEdge]]:
        adj = [[] for _ in self.labels]
        for e in self.edges:
            adj[e.u].append(e)
            adj[e.v].append(e)
        return adj

    def total_class(self, target: GkmTarget) -> CurveClass:
        total = CurveClass((0,) * target.lattice_rank)
        for e in self.edges:
            total = total + target.edges[e.edge_index].cclass.scale(e.cover)
        return total

    def canonical_key(self):
        adj = self.adjacency()

        def enc(v, parent):
            kids = []
            for e in adj[v]:
                w = e.v if e.u == v else e.u
                if w == parent:
                    continue
                kids.append((e.edge_index, e.cover, enc(w, v)))
            return (self.labels[v], tuple(sorted(kids)))

        return min(enc(v, -1) for v in range(self.n_vertices))

    def automorphisms(self) -> list[tuple[int, ...]]:
        """All decoration-preserving vertex permutations (cached)."""
        cached = getattr(self, "_auts", None)
        if cached is not None:
            return cached
        auts = self._automorphisms()
        object.__setattr__(self, "_auts", auts)
        return auts

    def _automorphisms(self) -> list[tuple[int, ...]]:
        adj = self.adjacency()
        n = self.n_vertices
        edge_set = {}
        for e in self.edges:
            key = (min(e.u, e.v), max(e.u, e.v))
            edge_set[key] = (e.edge_index, e.cover)
        out = []

        def extend(perm: list[int], used: list[bool]):
            v = len(perm)
            if v == n:
                out.append(tuple(perm))
                return
            for img in range(n):
                if used[img] or self.labels[img] != self.labels[v]:
                    continue
                ok = True
                deg_v = len(adj[v])
                if deg_v != len(adj[img]):
                    continue
                for e in adj[v]:
                    w = e.v if e.u == v else e.u
                    if w < v:  # mapped already
                        key = (min(img, perm[w]), max(img, perm[w]))
                        if edge_set.get(key) != (e.edge_index, e.cover):
                            ok = False
                            break
                if ok:
                    perm.append(img)
                    used[img] = True
                    extend(perm, used)
                    perm.pop()
                    used[img] = False

        extend([], [False] * n)
        return out


@dataclass(frozen=True)
class DecoratedGraph:
    """An unmarked tree plus the assignment of markings to vertices."""

    tree: UnmarkedTree
    marking: tuple[int, ...]

    def check(self, target: GkmTarget, beta: CurveClass):
        assert self.tree.total_class(target) == beta, "class mismatch"
        assert len(self.tree.edges) == self.tree.n_vertices - 1, "not a tree"
        for e in self.tree.edges:
            ge = target.edges[e.edge_index]
            assert {self.tree.labels[e.u], self.tree.labels[e.v]} == {ge.p, ge.q}
        adj = self.tree.adjacency()
        for v in range(self.tree.n_vertices):
            flags = []
            for e in adj[v]:
                ge = target.edges[e.edge_index]
                flags.append(ge.char_at(self.tree.labels[v]).divide(e.cover))
            for a, b in itertools.combinations(flags, 2):
                assert not (a + b).is_zero(), "smoothable node in a chain-free target"


def enumerate_unmarked_trees(target: GkmTarget, beta: CurveClass) -> list[UnmarkedTree]:
    """All decorated trees of total class beta, one per isomorphism class.

    Results are cached on the target; trees are context-free data.
    """
    target.ensure_valid()
    cached = target._tree_cache.get(beta)
    if cached is not None:
        return cached
    trees = _enumerate_unmarked_trees(target, beta)
    target._tree_cache[beta] = trees
    return trees


def _enumerate_unmarked_trees(target: GkmTarget, beta: CurveClass) -> list[UnmarkedTree]:
    if beta.is_zero():
        return [UnmarkedTree((p,), ()) for p in range(len(target.points))]
    if not target.is_effective(beta):
        raise NotEffective(f"class {beta} is not effective")

    def residual_ok(total: CurveClass) -> bool:
        return target.is_effective(beta - total)

    seeds: dict[tuple, UnmarkedTree] = {}
    for ei, ge in enumerate(target.edges):
        k = 1
        while True:
            total = ge.cclass.scale(k)
            if target.degree_bound(beta - total) < 0:
                break
            if residual_ok(total):
                t = UnmarkedTree((ge.p, ge.q), (TreeEdge(0, 1, ei, k),))
                seeds[t.canonical_key()] = t
            k += 1
    levels = [seeds]
    results: list[UnmarkedTree] = []
    while levels[-1]:
        current = levels[-1]
        for t in current.values():
            if t.total_class(target) == beta:
                results.append(t)
        nxt: dict[tuple, UnmarkedTree] = {}
        for t in current.values():
            base_total = t.total_class(target)
            for v in range(t.n_vertices):
                label = t.labels[v]
                for ei, ge in enumerate(target.edges):
                    if label not in (ge.p, ge.q):
                        continue
                    k = 1
                    while True:
                        add = ge.cclass.scale(k)
                        total = base_total + add
                        if target.degree_bound(beta - total) < 0:
                            break
                        if residual_ok(total):
                            nt = UnmarkedTree(
                                t.labels + (ge.other(label),),
                                t.edges + (TreeEdge(v, t.n_vertices, ei, k),),
                            )
                            nxt.setdefault(nt.canonical_key(), nt)
                        k += 1
        levels.append(nxt)
    return sorted(results, key=lambda t: t.canonical_key())


def enumerate_decorated_graphs(target: GkmTarget, beta: CurveClass, n: int):
    """Stream (DecoratedGraph, automorphism order), one per isomorphism class.

    The automorphism order is that of the decorated tree fixing all markings;
    multiple-cover automorphisms are charged to the edge factors instead.
    """
    for tree in enumerate_unmarked_trees(target, beta):
        if beta.is_zero() and n < 3:
            raise GraphSumError("degree zero needs at least three markings")
        auts = tree.automorphisms()
        if n == 0:
            g = DecoratedGraph(tree, ())
            g.check(target, beta)
            yield g, len(auts)
            continue
        nontrivial = [a for a in auts if any(a[i] != i for i in range(len(a)))]
        for assignment in itertools.product(range(tree.n_vertices), repeat=n):
            stab = 1
            minimal = True
            for a in nontrivial:
                image = tuple(a[v] for v in assignment)
                if image < assignment:
                    minimal = False
                    break
                if image == assignment:
                    stab += 1
            if minimal:
                g = DecoratedGraph(tree, assignment)
                g.check(target, beta)
                yield g, stab


# ---------------------------------------------------------------------------
# twists
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TwistSpec:
    """Twist data: a split bundle on the target plus orientations.

    `orientations` holds one of 'convex' / 'concave' per summand; it selects
    which cohomology is asserted to vanish, i.e. which zero Euler factors are
    an input error rather than an engine bug.  `auxiliary` shifts every
    summand weight by the auxiliary C* weight x, making all factors
    invertible; the x -> 0 limit is taken by the caller when requested.

    With `inverted` (the default) the integrand carries the reciprocal Euler
    class e(E^1)/e(E^0) of the index bundle; `inverted=False` multiplies by
    e(E^0)/e(E^1) instead, which is the hyperplane-section insertion used by
    the quantum Lefschetz cross-check.
    """

    bundle: SplitBundle
    orientations: tuple[str, ...]
    auxiliary: bool = False
    inverted: bool = True

    def __post_init__(self):
        if len(self.orientations) != self.bundle.rank:
            raise ValueError("one orientation per summand")
        for o in self.orientations:
            if o not in ("convex", "concave"):
                raise ValueError(f"bad orientation {o!r}")

    def summand_weights(self) -> list[tuple[EquivariantLineBundle, str]]:
        out = []
        for s, o in zip(self.bundle.summands, self.orientations):
            out.append((s.shift_aux() if self.auxiliary else s, o))
        return out

    @staticmethod
    def pullback_from_base(
        target: GkmTarget, base_summands: list[EquivariantLineBundle], orientations, auxiliary=False
    ) -> "TwistSpec":
        """Pull a split bundle on the base of a projective bundle up to P(V)."""
        bi = target.bundle_info
        if bi is None:
            raise ValueError("target is not a projective bundle")
        r = bi.bundle.rank
        lifted = []
        for s in base_summands:
            weights = tuple(s.at(b) for b in range(len(bi.base.points)) for _ in range(r))
            lifted.append(EquivariantLineBundle(weights))
        return TwistSpec(SplitBundle(tuple(lifted)), tuple(orientations), auxiliary)


@dataclass(frozen=True)
class InsertionSpec:
    """Ordered insertions: (class, psi power) per marking."""

    classes: tuple[EquivariantClass, ...]
    psis: tuple[int, ...]

    def __post_init__(self):
        if len(self.classes) != len(self.psis):
            raise ValueError("one psi power per class")

    @property
    def n(self) -> int:
        return len(self.classes)

    def total_degree(self) -> int | None:
        total = 0
        for c, a in zip(self.classes, self.psis):
            if c.degree is None:
                return None
            total += c.degree + a
        return total


def insertions(pairs) -> InsertionSpec:
    classes, psis = [], []
    for item in pairs:
        if isinstance(item, EquivariantClass):
            classes.append(item)
            psis.append(0)
        else:
            c, a = item
            classes.append(c)
            psis.append(a)
    return InsertionSpec(tuple(classes), tuple(psis))


def virtual_dimension(target: GkmTarget, beta: CurveClass, n: int) -> Fraction:
    return (
        target.dimension
        + target.pairing_number(target.minus_canonical(), beta)
        + n
        - 3
    )


# ---------------------------------------------------------------------------
# contribution engine
# ---------------------------------------------------------------------------


def _compositions(total: int, slots: int):
    """All tuples of `slots` non-negative integers summing to `total`."""
    if slots == 0:
        if total == 0:
            yield ()
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, slots - 1):
            yield (first,) + rest


def _is_zero_scalar(v) -> bool:
    if isinstance(v, (int, Fraction)):
        return v == 0
    if isinstance(v, Polynomial):
        return v.is_zero()
    return v.is_zero()


def _convolve(a: list, b: list, budget: int) -> list:
    out = [Fraction(0)] * (budget + 1)
    for i, ai in enumerate(a):
        if _is_zero_scalar(ai):
            continue
        for j in range(budget + 1 - i):
            bj = b[j]
            if not _is_zero_scalar(bj):
                out[i + j] = out[i + j] + ai * bj
    return out


def _recip(weights) -> object:
    """1 / product(weights) for weights that are Fractions or linear forms."""
    frac = Fraction(1)
    forms = []
    for w in weights:
        if isinstance(w, (int, Fraction)):
            frac *= Fraction(w)
        else:
            forms.append(w)
    if not forms:
        return 1 / frac
    return RF.make(Polynomial.ONE, forms) * (1 / frac)


class Engine:
    """Per-computation state: target, mode context, twist, caches."""

    def __init__(self, target: GkmTarget, ctx: WeightContext, twist: TwistSpec | None):
        target.ensure_valid()
        if twist is not None:
            twist.bundle.check_on(target)
        self.target = target
        self.ctx = ctx
        self.twist = twist
        self._edge_cache: dict[tuple[int, int], object] = {}
        self._euler_cache: dict[int, object] = {}
        self._flag_cache: dict[tuple[int, int, int], object] = {}
        self._vertex_cache: dict = {}

    # -- scalars ---------------------------------------------------------------

    def euler_factors(self, p: int) -> list:
        try:
            return self._euler_cache[p]
        except KeyError:
            val = [self.ctx.weight(w) for w in self.target.tangent_weights(p)]
            self._euler_cache[p] = val
            return val

    def euler_tangent(self, p: int):
        val = 1
        for w in self.euler_factors(p):
            val = val * w
        return val

    def flag_weight(self, vertex_label: int, edge_index: int, cover: int):
        key = (vertex_label, edge_index, cover)
        try:
            return self._flag_cache[key]
        except KeyError:
            ge = self.target.edges[edge_index]
            val = self.ctx.weight(ge.char_at(vertex_label).divide(cover))
            self._flag_cache[key] = val
            return val

    # -- edge factor -------------------------------------------------------------

    def edge_factor(self, edge_index: int, cover: int):
        """1/k times the section-weight ratio of f^*TX (and the twist lines)."""
        key = (edge_index, cover)
        try:
            return self._edge_cache[key]
        except KeyError:
            pass
        ge = self.target.edges[edge_index]
        value = Fraction(1, cover)
        zeros = 0
        h0_all = []
        for w_p, degree in self.target.edge_lines(edge_index):
            h0, h1 = section_weights(w_p, ge.char, degree, cover)
            for ch in h0:
                if ch.is_zero():
                    zeros += 1
                    continue
                h0_all.append(self.ctx.weight(ch))
            for ch in h1:
                if ch.is_zero():
                    zeros += 1
                    continue
                value = value * self.ctx.weight(ch)
        if zeros != 1:
            raise GraphSumError(
                "edge normal calculus expects exactly the reparametrization zero; "
                f"got {zeros} zero weights on edge {edge_index} cover {cover}"
            )
        if any(_is_zero_scalar(v) for v in h0_all):
            raise GraphSumError("vanishing H0 weight on a chain-free target")
        value = value * _recip(h0_all)
        if self.twist is not None:
            for line, orientation in self.twist.summand_weights():
                d = line.degree_on(self.target, ge)
                h0, h1 = section_weights(line.at(ge.p), ge.char, d, cover, line.at(ge.q))
                h0v = [self.ctx.weight(ch) for ch in h0]
                h1v = [self.ctx.weight(ch) for ch in h1]
                if any(_is_zero_scalar(v) for v in h0v + h1v):
                    raise NonInvertibleEulerFactor(
                        f"zero {orientation} Euler weight on edge {edge_index}; "
                        "set the auxiliary weight"
                    )
                if not self.twist.inverted:
                    h0v, h1v = h1v, h0v
                for v in h1v:
                    value = value * v
                value = value * _recip(h0v)
        self._edge_cache[key] = value
        return value

    # -- vertex factor -------------------------------------------------------------

    def vertex_factor(self, label: int, flags, marks, cone: int | None = None):
        """Vertex contribution (memoized).

        `flags` is the list of flag weights (already divided by the cover),
        `marks` a list of (insertion value at the point, psi power), and
        `cone`, when not None, the index in `marks` carrying the extra
        1/(-z - psi) of the one-point series.
        """
        key = (label, tuple(flags), tuple(marks), cone)
        try:
            return self._vertex_cache[key]
        except (KeyError, TypeError):
            pass
        value = self._vertex_factor(label, flags, marks, cone)
        try:
            self._vertex_cache[key] = value
        except TypeError:
            pass
        return value

    def _vertex_factor(self, label: int, flags, marks, cone: int | None = None):
        m = len(flags)
        n_v = len(marks)
        twist_vals = []
        if self.twist is not None:
            for line, orientation in self.twist.summand_weights():
                lv = self.ctx.weight(line.at(label))
                if _is_zero_scalar(lv) and m != 1:
                    raise NonInvertibleEulerFactor(
                        f"zero twist weight at {self.target.points[label]}"
                    )
                twist_vals.append(lv)

        def with_twist(value):
            for lv in twist_vals:
                e = m - 1 if self.twist.inverted else 1 - m
                if e > 0:
                    value = value * lv**e
                elif e < 0:
                    value = value * _recip([lv] * (-e))
            return value

        if m + n_v >= 3:
            ins_val = 1
            for val, _ in marks:
                ins_val = ins_val * val
            if _is_zero_scalar(ins_val):
                return 0
            psi_fixed = [a for _, a in marks]
            budget = m + n_v - 3 - sum(psi_fixed)
            if budget < 0:
                return 0
            # sum over psi distributions as a coefficient extraction:
            #   S = (m+n_v-3)! * [t^budget] prod_F sum_b t^b/(b! w_F^{b+1})
            #       * prod_marks 1/a_i!  (cone marking: series in 1/z instead)
            series = [Fraction(1)] + [Fraction(0)] * budget
            first = True
            for w in flags:
                inv = _recip([w])
                term = inv
                col = [term]
                for b in range(1, budget + 1):
                    term = term * inv / b
                    col.append(term)
                series = _convolve(series, col, budget) if not first else col
                first = False
            scale = Fraction(factorial(m + n_v - 3))
            for i, a in enumerate(psi_fixed):
                if cone is not None and i == cone:
                    continue
                scale /= factorial(a)
            if cone is not None:
                a1 = psi_fixed[cone]
                zinv = _recip([Z])
                term = -zinv / factorial(a1)
                col = [term]
                for c in range(1, budget + 1):
                    term = term * zinv * (-1) / Fraction(a1 + c)
                    # accumulate 1/(a1+c)! incrementally: previous had 1/(a1+c-1)!
                    col.append(term)
                # fix signs: coefficient is (-1)^{c+1}/((a1+c)! z^{c+1})
                series = _convolve(series, col, budget) if not first else col
            total = series[budget] * scale if budget < len(series) else 0
            value = ins_val * total
            e_pow = m - 1
            if e_pow > 0:
                value = value * self.euler_tangent(label) ** e_pow
            elif e_pow < 0:
                value = value * _recip(self.euler_factors(label) * (-e_pow))
            return with_twist(value)

        # unstable point vertices
        if m == 1 and n_v == 0:
            return with_twist(flags[0])
        if m == 2 and n_v == 0:
            s = flags[0] + flags[1]
            if _is_zero_scalar(s):
                raise GraphSumError("opposite flags at a node on a chain-free target")
            return with_twist(self.euler_tangent(label) * _recip([s]))
        if m == 1 and n_v == 1:
            val, a = marks[0]
            if _is_zero_scalar(val):
                return 0
            out = val * (-flags[0]) ** a if a else val
            if cone == 0:
                denom = flags[0] - Z
                if _is_zero_scalar(denom):
                    raise GraphSumError("cone variable collides with a flag weight")
                out = out * _recip([denom])
            return with_twist(out)
        raise GraphSumError(f"impossible vertex type: {m} flags, {n_v} markings")

    # -- full graph -------------------------------------------------------------------

    def contribution(self, graph: DecoratedGraph, ins: InsertionSpec, aut_order: int, cone: bool):
        tree = graph.tree
        value = Fraction(1, aut_order)
        for e in tree.edges:
            value = value * self.edge_factor(e.edge_index, e.cover)
        adj = tree.adjacency()
        for v in range(tree.n_vertices):
            label = tree.labels[v]
            flags = [
                self.flag_weight(label, e.edge_index, e.cover) for e in adj[v]
            ]
            marks = []
            cone_slot = None
            for i in range(ins.n):
                if graph.marking[i] != v:
                    continue
                if cone and i == 0:
                    cone_slot = len(marks)
                marks.append((self.ctx.reduce(ins.classes[i].at(label)), ins.psis[i]))
            value = value * self.vertex_factor(label, flags, marks, cone_slot)
            if _is_zero_scalar(value):
                return 0
        return value

    # -- assignment-summed tree contribution (psi-free fast path) -----------------------

    def tree_contribution_dp(self, tree: UnmarkedTree, ins: InsertionSpec, aut_order: int):
        """Sum of contributions over all marking assignments, divided by |Aut|.

        Valid when no insertion carries a psi power and there is no cone
        variable: the vertex factor then splits as a size-dependent base
        times the product of the inserted restrictions.
        """
        assert all(a == 0 for a in ins.psis)
        n = ins.n
        adj = tree.adjacency()
        nv = tree.n_vertices
        base: list[list] = []
        for v in range(nv):
            label = tree.labels[v]
            flags = [self.flag_weight(label, e.edge_index, e.cover) for e in adj[v]]
            row = []
            for j in range(n + 1):
                try:
                    row.append(self.vertex_factor(label, flags, [(1, 0)] * j))
                except GraphSumError:
                    row.append(None)  # only reachable counts matter
            base.append(row)
        # markings with one support/value profile are interchangeable: group
        # them and distribute multiplicities with multinomial weights.
        profiles: dict[tuple, list[int]] = {}
        for i in range(n):
            vals = tuple(
                self.ctx.reduce(ins.classes[i].at(tree.labels[v])) for v in range(nv)
            )
            profiles.setdefault(vals, []).append(i)
        # integer-encoded count vectors, base n+1
        radix = n + 1
        states: dict[int, object] = {0: Fraction(1)}
        shifts = [radix**v for v in range(nv)]
        for vals, members in profiles.items():
            m = len(members)
            support = [v for v in range(nv) if not _is_zero_scalar(vals[v])]
            if not support:
                return 0
            powers = {v: [Fraction(1)] for v in support}
            for v in support:
                for _ in range(m):
                    powers[v].append(powers[v][-1] * vals[v])
            nxt: dict[int, object] = {}
            for comp in _compositions(m, len(support)):
                weight = Fraction(factorial(m))
                key_shift = 0
                coeff = Fraction(1)
                for v, c in zip(support, comp):
                    weight /= factorial(c)
                    key_shift += shifts[v] * c
                    coeff = coeff * powers[v][c]
                coeff = coeff * weight
                for key, acc in states.items():
                    nk = key + key_shift
                    prev = nxt.get(nk)
                    term = acc * coeff
                    nxt[nk] = term if prev is None else prev + term
            states = nxt
        edge_part = Fraction(1, aut_order)
        for e in tree.edges:
            edge_part = edge_part * self.edge_factor(e.edge_index, e.cover)
        total = 0
        for key, acc in states.items():
            if _is_zero_scalar(acc):
                continue
            term = acc
            dead = False
            rem = key
            for v in range(nv):
                j = rem % radix
                rem //= radix
                b = base[v][j]
                if b is None:
                    raise GraphSumError("unstable vertex hit in assignment sum")
                if _is_zero_scalar(b):
                    dead = True
                    break
                term = term * b
            if not dead:
                total = total + term
        return edge_part * total


# ---------------------------------------------------------------------------
# public entry points
# ---------------------------------------------------------------------------


def graph_contribution(
    target: GkmTarget,
    graph: DecoratedGraph,
    ins: InsertionSpec,
    twist: TwistSpec | None = None,
    cone_variable: bool = False,
    ctx: WeightContext | None = None,
    aut_order: int | None = None,
) -> RF:
    """Contribution of one decorated graph, including its 1/|Aut|."""
    ctx = ctx or WeightContext.symbolic(target.rank)
    engine = Engine(target, ctx, twist)
    if aut_order is None:
        auts = graph.tree.automorphisms()
        aut_order = sum(
            1
            for a in auts
            if all(a[v] == v2 for v, v2 in zip(graph.marking, graph.marking))
            and tuple(a[v] for v in graph.marking) == graph.marking
        )
    return RF.of(engine.contribution(graph, ins, aut_order, cone_variable))


def graph_sum(
    target: GkmTarget,
    beta: CurveClass,
    ins: InsertionSpec,
    twist: TwistSpec | None = None,
    *,
    cone_variable: bool = False,
    ctx: WeightContext | None = None,
    workers: int = 1,
    marked_at: int | None = None,
) -> RF:
    """Sum of all decorated-graph contributions for (beta, insertions).

    With `marked_at` set, only graphs whose first marking lies at that fixed
    point are summed (used by the one-point series).
    """
    target.ensure_valid()
    if not target.is_effective(beta):
        raise NotEffective(f"class {beta} is not effective")
    if beta.is_zero() and ins.n < 3:
        raise GraphSumError("degree-zero invariants need n >= 3 markings")
    for c in ins.classes:
        if c.target is not target:
            raise GraphSumError("insertion class lives on a different target")
    ctx = ctx or WeightContext.symbolic(target.rank)
    trees = enumerate_unmarked_trees(target, beta)
    use_dp = not cone_variable and marked_at is None and all(a == 0 for a in ins.psis) and ins.n > 0

    if workers > 1 and len(trees) > 1:
        from . import parallel

        return parallel.parallel_graph_sum(
            target, beta, ins, twist, ctx, workers, cone_variable, marked_at, use_dp
        )

    engine = Engine(target, ctx, twist)
    return invariant_with_engine(
        engine, beta, ins, cone_variable=cone_variable, marked_at=marked_at
    )


def invariant_with_engine(
    engine: Engine,
    beta: CurveClass,
    ins: InsertionSpec,
    *,
    cone_variable: bool = False,
    marked_at: int | None = None,
) -> RF:
    """Graph sum reusing an engine (and all of its memoized factors)."""
    use_dp = not cone_variable and marked_at is None and all(a == 0 for a in ins.psis) and ins.n > 0
    total = 0
    for tree in enumerate_unmarked_trees(engine.target, beta):
        total = total + _tree_total(engine, tree, ins, cone_variable, marked_at, use_dp)
    return RF.of(total)


def _tree_total(engine, tree, ins, cone_variable, marked_at, use_dp):
    auts = tree.automorphisms()
    if use_dp:
        return engine.tree_contribution_dp(tree, ins, len(auts))
    total = 0
    n = ins.n
    if n == 0:
        g = DecoratedGraph(tree, ())
        return engine.contribution(g, ins, len(auts), cone_variable)
    nontrivial = [a for a in auts if any(a[i] != i for i in range(len(a)))]
    for assignment in itertools.product(range(tree.n_vertices), repeat=n):
        if marked_at is not None and tree.labels[assignment[0]] != marked_at:
            continue
        stab = 1
        minimal = True
        for a in nontrivial:
            image = tuple(a[v] for v in assignment)
            if image < assignment:
                minimal = False
                break
            if image == assignment:
                stab += 1
        if not minimal:
            continue
        g = DecoratedGraph(tree, assignment)
        total = total + engine.contribution(g, ins, stab, cone_variable)
    return total


def gw_invariant(
    target: GkmTarget,
    beta: CurveClass,
    ins: InsertionSpec,
    twist: TwistSpec | None = None,
    *,
    ctx: WeightContext | None = None,
    workers: int = 1,
    limit_x: bool = False,
) -> RF:
    """The (twisted) equivariant genus-zero invariant of class beta."""
    value = graph_sum(target, beta, ins, twist, ctx=ctx, workers=workers)
    if limit_x:
        value = value.limit_at_zero(AUX_VAR)
    return value


def nonequivariant_invariant(
    target: GkmTarget,
    beta: CurveClass,
    ins: InsertionSpec,
    twist: TwistSpec | None = None,
    *,
    mode: str = "symbolic",
    seed: int = 2024,
    workers: int = 1,
    limit_x: bool = False,
) -> Fraction:
    """The underlying non-equivariant invariant, asserted constant in lambda.

    Symbolic mode computes the full rational function and checks it is a
    constant; evaluated mode computes at two independently seeded rational
    points and checks agreement (the fast path).
    """
    if mode == "symbolic":
        value = gw_invariant(target, beta, ins, twist, workers=workers, limit_x=limit_x)
        if not value.is_constant():
            raise NotConstant(f"lambda survives in {value}")
        return value.constant_value()
    if mode != "evaluated":
        raise ValueError("mode must be symbolic or evaluated")
    results = []
    for which in (0, 1):
        value = evaluated_invariant(
            target, beta, ins, twist, seed=seed + which, workers=workers, limit_x=limit_x
        )
        results.append(value)
    if results[0] != results[1]:
        raise NotConstant(
            f"two random evaluation points disagree: {results[0]} vs {results[1]}"
        )
    return results[0]


def evaluated_invariant(
    target, beta, ins, twist=None, *, seed: int, workers: int = 1, limit_x: bool = False,
    nonce: int = 0,
) -> Fraction:
    """Invariant at one seeded random lambda point, retrying off poles."""
    from .exact import PoleAtPoint

    for attempt in range(nonce, nonce + 12):
        ctx = WeightContext.evaluated(target.rank, seed, attempt)
        try:
            value = gw_invariant(target, beta, ins, twist, ctx=ctx, workers=workers, limit_x=limit_x)
        except (ZeroDivisionError, PoleAtPoint):
            continue
        if not value.is_constant():
            raise NotConstant(f"z or x survives in evaluated invariant: {value}")
        return value.constant_value()
    raise GraphSumError("could not find a pole-free evaluation point")
