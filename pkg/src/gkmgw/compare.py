"""End-to-end comparison of two projective-bundle targets under the
hyperplane-preserving identification of their cohomologies and curve classes.

For every effective class of bounded anticanonical degree on the source and
every generator-monomial insertion tuple of the correct virtual dimension,
both sides are computed and compared exactly: the right-hand side uses the
transferred insertions and the pairing-matched curve class.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction

from .exact import RationalFunction as RF
from .graphsum import (
    InsertionSpec,
    NotConstant,
    gw_invariant,
    insertions,
    nonequivariant_invariant,
    virtual_dimension,
)
from .targets import (
    CohomologyIdentification,
    CurveClass,
    EquivariantClass,
    GkmTarget,
    SingularPairing,
)


class CompareError(Exception):
    pass


@dataclass
class ComparisonJob:
    """Inputs of one comparison run.

    `degree_bound` caps the anticanonical degree of the source curve classes;
    `menu` lists generator monomials (the unit is excluded: its invariants
    vanish by the string equation); `max_extra_markings` caps the number of
    divisor paddings beyond the minimal marking count.
    """

    source: GkmTarget
    target: GkmTarget
    mode: str = "nonequivariant"
    degree_bound: int = 9
    menu: tuple[str, ...] | None = None
    max_extra_markings: int = 2
    value_mode: str = "evaluated"  # for nonequivariant comparisons
    seed: int = 2024
    workers: int = 1


@dataclass
class ComparisonRow:
    beta: CurveClass
    image_beta: CurveClass
    insertion: tuple[str, ...]
    lhs: str
    rhs: str
    equal: bool
    cached: bool = False


@dataclass
class ComparisonReport:
    mode: str
    rows: list[ComparisonRow] = field(default_factory=list)
    skipped_wrong_dimension: int = 0
    classes: list[tuple[CurveClass, CurveClass]] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(r.equal for r in self.rows)

    def summary(self) -> str:
        n_eq = sum(r.equal for r in self.rows)
        lines = [
            f"{n_eq}/{len(self.rows)} comparisons equal "
            f"({self.skipped_wrong_dimension} tuples skipped by dimension)"
        ]
        for r in self.rows:
            mark = "= " if r.equal else "!="
            lines.append(
                f"  [{mark}] beta {r.beta} ~ {r.image_beta}  "
                f"<{', '.join(r.insertion)}>: {r.lhs}"
                + ("" if r.equal else f"  vs  {r.rhs}")
            )
        return "\n".join(lines)


def source_classes(job: ComparisonJob) -> list[CurveClass]:
    """Effective source classes with anticanonical degree <= the bound."""
    t = job.source
    minus_k = t.minus_canonical()
    edge_degrees = {}
    for e in t.edges:
        d = t.edge_pairing(minus_k, e)
        if d <= 0:
            raise CompareError(
                "anticanonical degree must be positive on every source edge; "
                "swap source and target"
            )
        edge_degrees[e.cclass.coords] = min(
            edge_degrees.get(e.cclass.coords, d), d
        )
    classes = sorted(edge_degrees)
    found: dict[tuple[int, ...], Fraction] = {}

    def dfs(acc, deg):
        for c in classes:
            nxt = tuple(x + y for x, y in zip(acc, c))
            nd = deg + edge_degrees[c]
            if nd > job.degree_bound or nxt in found:
                continue
            found[nxt] = nd
            dfs(nxt, nd)

    zero = (0,) * t.lattice_rank
    found[zero] = Fraction(0)
    dfs(zero, Fraction(0))
    return sorted(
        (CurveClass(c) for c in found),
        key=lambda b: (t.pairing_number(minus_k, b), b.coords),
    )


def default_menu(target: GkmTarget) -> tuple[str, ...]:
    """Nonconstant generator monomials with nonzero non-equivariant shadow.

    A monomial survives when it pairs nontrivially against some complementary
    monomial (or the unit): those integrals are degree-zero constants, so a
    class whose pairings all vanish is a multiple of the torus parameters and
    carries no classical content.
    """
    names = sorted(target.generators)
    dim = target.dimension
    monomials: dict[tuple[str, ...], EquivariantClass] = {(): target.unit()}
    for total in range(1, dim + 1):
        for combo in itertools.combinations_with_replacement(names, total):
            cls = target.unit()
            for n in combo:
                cls = cls * target.generator(n)
            if cls.degree is None or cls.degree > dim:
                continue
            monomials[combo] = cls
    out = []
    for combo, cls in sorted(monomials.items()):
        if not combo:
            continue
        paired = False
        for other, ocls in monomials.items():
            if (ocls.degree or 0) + cls.degree != dim:
                continue
            if not target.integrate(cls * ocls).is_zero():
                paired = True
                break
        if not paired:
            continue
        counts: dict[str, int] = {}
        for n in combo:
            counts[n] = counts.get(n, 0) + 1
        out.append("*".join(n if k == 1 else f"{n}^{k}" for n, k in sorted(counts.items())))
    return tuple(out)


def insertion_tuples(job: ComparisonJob, beta: CurveClass):
    """Menu multisets of every length with the correct total codimension.

    Yields (tuple of expressions, spec) for the correct ones and counts the
    dimension-skipped candidates.
    """
    t = job.source
    menu = job.menu or default_menu(t)
    degs = {}
    for expr in menu:
        cls = t.class_expression(expr)
        if cls.degree is None:
            raise CompareError(f"menu class {expr!r} has no graded degree")
        degs[expr] = cls.degree
    kdeg = t.pairing_number(t.minus_canonical(), beta)
    if kdeg != int(kdeg):
        raise CompareError("non-integral anticanonical degree")
    kdeg = int(kdeg)
    max_deg = max(degs.values())
    if max_deg < 2:
        raise CompareError("menu needs a class of codimension >= 2")
    # smallest n with n insertions of top degree reaching the virtual dimension,
    # then up to max_extra_markings divisor paddings
    n_min = max(1, -(-(t.dimension + kdeg - 3) // (max_deg - 1)))
    n_cap = n_min + job.max_extra_markings
    skipped = 0
    chosen = []
    start = 3 if beta.is_zero() else 1
    for n in range(start, max(n_cap, start) + 1):
        needed = t.dimension + kdeg + n - 3
        for combo in itertools.combinations_with_replacement(sorted(degs), n):
            total = sum(degs[c] for c in combo)
            if total != needed:
                skipped += 1
                continue
            chosen.append(combo)
    return chosen, skipped


def run_compare(job: ComparisonJob, cache=None) -> ComparisonReport:
    """Compute and compare all invariant pairs selected by the job.

    The orchestration is single-threaded; with job.workers > 1 the invariant
    evaluations are fanned out to a pool whose workers hold persistent
    engines (exact commutative results, so scheduling cannot matter).
    """
    ident = CohomologyIdentification(job.source, job.target, mode=job.mode)
    if job.mode == "equivariant":
        job.source.ensure_valid()
        job.target.ensure_valid()
    report = ComparisonReport(mode=job.mode)
    plan: list[tuple[CurveClass, CurveClass, tuple[str, ...]]] = []
    for beta in source_classes(job):
        image = ident.transfer_curve(beta)
        report.classes.append((beta, image))
        tuples, skipped = insertion_tuples(job, beta)
        report.skipped_wrong_dimension += skipped
        for combo in tuples:
            plan.append((beta, image, combo))

    tasks = []
    for beta, image, combo in plan:
        tasks.append((0, beta, combo))
        tasks.append((1, image, combo))
    values = _evaluate_tasks(job, tasks, cache)
    for i, (beta, image, combo) in enumerate(plan):
        lhs, rhs = values[2 * i], values[2 * i + 1]
        equal = RF.of(lhs) == RF.of(rhs)
        report.rows.append(ComparisonRow(beta, image, combo, str(lhs), str(rhs), equal))
    return report


def _evaluate_tasks(job: ComparisonJob, tasks, cache):
    values: dict[int, object] = {}
    payloads: dict[int, dict] = {}
    pending = []
    for i, (which, beta, combo) in enumerate(tasks):
        target = job.source if which == 0 else job.target
        if cache is not None and job.mode != "equivariant":
            payload = {
                "kind": "compare-invariant",
                "target": target.canonical_json(),
                "beta": beta.coords,
                "insertions": list(combo),
                "value_mode": job.value_mode,
                "seed": job.seed,
            }
            payloads[i] = payload
            hit = cache.get(payload)
            if hit is not None:
                values[i] = Fraction(hit["value"])
                continue
        pending.append((i, which, beta, combo))
    if pending:
        if job.workers > 1:
            from . import parallel

            computed = parallel.parallel_compare_tasks(job, pending)
        else:
            sides = _Sides(job)
            computed = {
                i: sides.value(which, beta, combo) for i, which, beta, combo in pending
            }
        for i, value in computed.items():
            values[i] = value
            if cache is not None and i in payloads and job.mode != "equivariant":
                cache.put(payloads[i], {"value": str(value)})
    return [values[i] for i in range(len(tasks))]


class _Sides:
    """Persistent engines per (side, evaluation point) across all invariants."""

    def __init__(self, job: ComparisonJob):
        from .graphsum import Engine
        from .targets import WeightContext

        self.job = job
        self.engines: dict[tuple[int, int], object] = {}
        for which, t in ((0, job.source), (1, job.target)):
            if job.mode == "equivariant" or job.value_mode == "symbolic":
                self.engines[(which, -1)] = Engine(t, WeightContext.symbolic(t.rank), None)
            else:
                for pt in (0, 1):
                    ctx = WeightContext.evaluated(t.rank, job.seed + pt)
                    self.engines[(which, pt)] = Engine(t, ctx, None)

    def value(self, which: int, beta: CurveClass, combo):
        from .graphsum import invariant_with_engine

        job = self.job
        target = job.source if which == 0 else job.target
        ins = insertions([target.class_expression(c) for c in combo])
        if beta.is_zero() and ins.n < 3:
            return Fraction(0)
        if job.mode == "equivariant" or job.value_mode == "symbolic":
            rf = invariant_with_engine(self.engines[(which, -1)], beta, ins)
            if job.mode == "equivariant":
                return rf
            if not rf.is_constant():
                raise NotConstant(f"lambda survives in {rf}")
            return rf.constant_value()
        vals = []
        for pt in (0, 1):
            rf = invariant_with_engine(self.engines[(which, pt)], beta, ins)
            if not rf.is_constant():
                raise NotConstant(f"spurious variables in {rf}")
            vals.append(rf.constant_value())
        if vals[0] != vals[1]:
            raise NotConstant(f"evaluation points disagree: {vals}")
        return vals[0]
