"""Exact arithmetic in the equivariant parameters.

Everything downstream of the localization sums is computed in the field of
rational functions over Q in the torus parameters l1..lm, an optional
auxiliary fiber-scaling weight x, and the cone variable z.  Denominators are
kept *factored* as multisets of degree-one forms: every denominator produced
by a fixed-point sum is a product of weight forms, so cancellation is exact
trial division and no multivariate gcd is ever needed.

Coefficients are `fractions.Fraction` throughout; there is no floating point
anywhere in this package.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from fractions import Fraction
from math import gcd, lcm

Monomial = tuple[tuple[str, int], ...]

AUX_VAR = "x"
CONE_VAR = "z"


class ExactError(Exception):
    """Base class for arithmetic errors in this module."""


class NotLinearProduct(ExactError):
    """Numerator does not factor into degree-one forms over Q."""


class PoleAtPoint(ExactError):
    """Evaluation point lies on a denominator hyperplane."""


class NoLimit(ExactError):
    """The requested limit does not exist (a genuine pole survives)."""


def var_key(name: str) -> tuple:
    """Global variable ordering: l1 < l2 < ... < x < z."""
    if name.startswith("l") and name[1:].isdigit():
        return (0, int(name[1:]))
    if name == AUX_VAR:
        return (1, 0)
    if name == CONE_VAR:
        return (2, 0)
    return (3, name)


def lam(i: int) -> str:
    """Name of the i-th torus parameter (1-based)."""
    return f"l{i}"


def _as_fraction(c) -> Fraction:
    if isinstance(c, Fraction):
        return c
    if isinstance(c, int):
        return Fraction(c)
    raise TypeError(f"not an exact coefficient: {c!r}")


# ---------------------------------------------------------------------------
# Characters
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Character:
    """An (optionally fractional) weight of the torus times the auxiliary C*.

    `coeffs` are the integer coordinates in the character lattice of
    T = (C*)^m, `aux` the coordinate on the auxiliary weight x, and `denom`
    a positive integer: the character is (coeffs + aux*x)/denom.  Integral
    characters have denom == 1.
    """

    coeffs: tuple[int, ...]
    aux: int = 0
    denom: int = 1

    def __post_init__(self):
        if self.denom <= 0:
            raise ValueError("denominator must be positive")
        g = gcd(gcd(*self.coeffs, self.aux) if self.coeffs else self.aux, self.denom)
        if g > 1:
            object.__setattr__(self, "coeffs", tuple(c // g for c in self.coeffs))
            object.__setattr__(self, "aux", self.aux // g)
            object.__setattr__(self, "denom", self.denom // g)

    @staticmethod
    def zero(rank: int) -> "Character":
        return Character((0,) * rank)

    @staticmethod
    def basis(rank: int, i: int) -> "Character":
        return Character(tuple(1 if j == i else 0 for j in range(rank)))

    @property
    def rank(self) -> int:
        return len(self.coeffs)

    def is_zero(self) -> bool:
        return not any(self.coeffs) and self.aux == 0

    def __add__(self, other: "Character") -> "Character":
        d = lcm(self.denom, other.denom)
        a, b = d // self.denom, d // other.denom
        return Character(
            tuple(a * u + b * v for u, v in zip(self.coeffs, other.coeffs, strict=True)),
            a * self.aux + b * other.aux,
            d,
        )

    def __neg__(self) -> "Character":
        return Character(tuple(-c for c in self.coeffs), -self.aux, self.denom)

    def __sub__(self, other: "Character") -> "Character":
        return self + (-other)

    def scale(self, q) -> "Character":
        q = Fraction(q)
        return Character(
            tuple(c * q.numerator for c in self.coeffs),
            self.aux * q.numerator,
            self.denom * q.denominator,
        )

    def divide(self, k: int) -> "Character":
        """The fractional character of a k-fold cover."""
        return self.scale(Fraction(1, k))

    def shift_aux(self, a: int = 1) -> "Character":
        if self.denom != 1:
            raise ValueError("aux shift expects an integral character")
        return Character(self.coeffs, self.aux + a, 1)

    def collinear(self, other: "Character") -> bool:
        """Exact test: is one a rational multiple of the other?

        Zero is collinear with everything (a degenerate ray).
        """
        va = (*self.coeffs, self.aux)
        vb = (*other.coeffs, other.aux)
        for i, j in itertools.combinations(range(len(va)), 2):
            if va[i] * vb[j] != va[j] * vb[i]:
                return False
        return True

    def same_ray(self, other: "Character") -> bool:
        """Collinear with a positive ratio (both nonzero)."""
        if self.is_zero() or other.is_zero() or not self.collinear(other):
            return False
        va = (*self.coeffs, self.aux)
        vb = (*other.coeffs, other.aux)
        for a, b in zip(va, vb):
            if a != 0:
                return a * b > 0
        return False

    def ratio_over(self, other: "Character") -> Fraction | None:
        """self = q * other, or None if not collinear / other is zero."""
        if other.is_zero() or not self.collinear(other):
            return None
        va = (*self.coeffs, self.aux)
        vb = (*other.coeffs, other.aux)
        for a, b in zip(va, vb):
            if b != 0:
                return Fraction(a * other.denom, b * self.denom)
        return None

    def polynomial(self) -> "Polynomial":
        """The associated degree-one form (denominator divided out)."""
        terms = {}
        for i, c in enumerate(self.coeffs):
            if c:
                terms[((lam(i + 1), 1),)] = Fraction(c, self.denom)
        if self.aux:
            terms[((AUX_VAR, 1),)] = Fraction(self.aux, self.denom)
        return Polynomial(terms)

    def __str__(self) -> str:
        return str(self.polynomial())


# ---------------------------------------------------------------------------
# Polynomials
# ---------------------------------------------------------------------------


def _mono_mul(a: Monomial, b: Monomial) -> Monomial:
    if not a:
        return b
    if not b:
        return a
    d = dict(a)
    for v, e in b:
        d[v] = d.get(v, 0) + e
    return tuple(sorted(d.items(), key=lambda t: var_key(t[0])))


def _mono_degree(m: Monomial) -> int:
    return sum(e for _, e in m)


def _mono_str(m: Monomial) -> str:
    return "*".join(v if e == 1 else f"{v}^{e}" for v, e in m)


class Polynomial:
    """Sparse exact polynomial: map from monomials to nonzero Fractions.

    Immutable; no zero coefficients are stored, so equality of the term maps
    is the canonical-form equality.
    """

    __slots__ = ("terms", "_key", "_hash")

    def __init__(self, terms: dict[Monomial, Fraction]):
        self.terms = {m: c for m, c in terms.items() if c != 0}
        self._key = tuple(sorted(self.terms.items()))
        self._hash = hash(self._key)

    # -- constructors -------------------------------------------------------

    @staticmethod
    def constant(c) -> "Polynomial":
        c = _as_fraction(c)
        return Polynomial({(): c} if c else {})

    @staticmethod
    def variable(name: str, power: int = 1) -> "Polynomial":
        if power < 0:
            raise ValueError("negative power")
        if power == 0:
            return Polynomial.ONE
        return Polynomial({((name, power),): Fraction(1)})

    ZERO: "Polynomial"
    ONE: "Polynomial"

    # -- structure ----------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def is_constant(self) -> bool:
        return all(m == () for m in self.terms)

    def constant_value(self) -> Fraction:
        if not self.is_constant():
            raise ValueError(f"not a constant: {self}")
        return self.terms.get((), Fraction(0))

    def degree(self) -> int:
        """Total degree; -1 for the zero polynomial."""
        return max((_mono_degree(m) for m in self.terms), default=-1)

    def degree_in(self, var: str) -> int:
        return max((dict(m).get(var, 0) for m in self.terms), default=0)

    def variables(self) -> set[str]:
        return {v for m in self.terms for v, _ in m}

    def is_homogeneous(self) -> bool:
        degs = {_mono_degree(m) for m in self.terms}
        return len(degs) <= 1

    def coefficient(self, var: str, power: int) -> "Polynomial":
        """Coefficient of var**power, a polynomial in the other variables."""
        out: dict[Monomial, Fraction] = {}
        for m, c in self.terms.items():
            d = dict(m)
            if d.pop(var, 0) == power:
                out[tuple(sorted(d.items(), key=lambda t: var_key(t[0])))] = c
        return Polynomial(out)

    # -- ring operations ----------------------------------------------------

    def __add__(self, other) -> "Polynomial":
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        if isinstance(other, RationalFunction):
            return other + self
        out = dict(self.terms)
        for m, c in other.terms.items():
            s = out.get(m, Fraction(0)) + c
            if s:
                out[m] = s
            else:
                out.pop(m, None)
        return Polynomial(out)

    __radd__ = __add__

    def __neg__(self) -> "Polynomial":
        return Polynomial({m: -c for m, c in self.terms.items()})

    def __sub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        if isinstance(other, RationalFunction):
            return other * self
        out: dict[Monomial, Fraction] = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                m = _mono_mul(m1, m2)
                s = out.get(m, Fraction(0)) + c1 * c2
                if s:
                    out[m] = s
                else:
                    del out[m]
        return Polynomial(out)

    __rmul__ = __mul__

    def __pow__(self, n: int) -> "Polynomial":
        if n < 0:
            raise ValueError("negative power of a polynomial")
        result = Polynomial.ONE
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            return self * Fraction(1, 1) * Fraction(other) ** -1
        return RationalFunction.of(self) / other

    def __rtruediv__(self, other):
        return RationalFunction.of(other) / self

    @staticmethod
    def _coerce(other):
        if isinstance(other, Polynomial):
            return other
        if isinstance(other, (int, Fraction)):
            return Polynomial.constant(other)
        if isinstance(other, RationalFunction):
            return other
        return NotImplemented

    # -- substitution and calculus ------------------------------------------

    def substitute(self, assignment: dict[str, "Polynomial | Fraction | int"]) -> "Polynomial":
        """Substitute polynomials (or exact scalars) for variables."""
        subs = {
            v: (p if isinstance(p, Polynomial) else Polynomial.constant(p))
            for v, p in assignment.items()
        }
        out = Polynomial.ZERO
        for m, c in self.terms.items():
            term = Polynomial.constant(c)
            rest: dict[str, int] = {}
            for v, e in m:
                if v in subs:
                    term = term * subs[v] ** e
                else:
                    rest[v] = e
            if rest:
                mono = tuple(sorted(rest.items(), key=lambda t: var_key(t[0])))
                term = term * Polynomial({mono: Fraction(1)})
            out = out + term
        return out

    def eval(self, point: dict[str, Fraction]) -> Fraction:
        value = Fraction(0)
        for m, c in self.terms.items():
            v = c
            for name, e in m:
                if name not in point:
                    raise KeyError(f"no value for variable {name}")
                v *= Fraction(point[name]) ** e
            value += v
        return value

    def derivative(self, var: str) -> "Polynomial":
        out: dict[Monomial, Fraction] = {}
        for m, c in self.terms.items():
            d = dict(m)
            e = d.get(var, 0)
            if not e:
                continue
            if e == 1:
                del d[var]
            else:
                d[var] = e - 1
            mono = tuple(sorted(d.items(), key=lambda t: var_key(t[0])))
            out[mono] = out.get(mono, Fraction(0)) + c * e
        return Polynomial(out)

    def divide_by_linear(self, form: "Polynomial") -> "Polynomial | None":
        """Exact quotient self/form for a degree-one form, else None."""
        if form.is_zero() or form.degree() > 1:
            raise ValueError("divisor must be a nonzero degree-one form")
        if self.is_zero():
            return Polynomial.ZERO
        # Pick the lead variable of the form; divide as a univariate in it.
        lead = min(form.variables(), key=var_key, default=None)
        if lead is None:  # constant divisor
            return self * (Fraction(1) / form.constant_value())
        c_lead = form.coefficient(lead, 1).constant_value()
        tail = form - Polynomial.variable(lead) * c_lead
        quot = Polynomial.ZERO
        rem = self
        for e in range(rem.degree_in(lead), 0, -1):
            coeff = rem.coefficient(lead, e)
            if coeff.is_zero():
                continue
            part = coeff * (Fraction(1) / c_lead) * Polynomial.variable(lead, e - 1)
            quot = quot + part
            rem = rem - part * form
        return quot if rem.is_zero() else None

    # -- rendering -----------------------------------------------------------

    def sort_key(self):
        return self._key

    def __reduce__(self):
        return (Polynomial, (self.terms,))

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.is_constant() and self.constant_value() == other
        return isinstance(other, Polynomial) and self._key == other._key

    def __hash__(self):
        return self._hash

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        monos = sorted(
            self.terms,
            key=lambda m: (-_mono_degree(m), tuple((var_key(v), -e) for v, e in m)),
        )
        parts = []
        for m in monos:
            c = self.terms[m]
            body = _mono_str(m)
            if not body:
                frag = str(abs(c))
            elif abs(c) == 1:
                frag = body
            else:
                frag = f"{abs(c)}*{body}"
            parts.append(("- " if c < 0 else "+ ") + frag)
        text = " ".join(parts)
        return text[2:] if text.startswith("+ ") else "-" + text[2:]

    def __repr__(self) -> str:
        return f"Polynomial({self})"


Polynomial.ZERO = Polynomial({})
Polynomial.ONE = Polynomial({(): Fraction(1)})

X = Polynomial.variable(AUX_VAR)
Z = Polynomial.variable(CONE_VAR)


def normalize_linear(form: Polynomial) -> tuple[Polynomial, Fraction]:
    """Scale a degree-<=1 form to primitive integer coefficients, positive lead.

    Returns (normalized_form, scalar) with form == scalar * normalized_form.
    """
    if form.is_zero() or form.degree() > 1:
        raise ValueError("expected a nonzero degree-one form")
    items = sorted(form.terms.items(), key=lambda t: (t[0] == (), var_key(t[0][0][0]) if t[0] else ()))
    coeffs = [c for _, c in items]
    den = lcm(*(c.denominator for c in coeffs))
    num = gcd(*(c.numerator * (den // c.denominator) for c in coeffs))
    scale = Fraction(num, den)
    if coeffs[0] < 0:
        scale = -scale
    return Polynomial({m: c / scale for m, c in form.terms.items()}), scale


# ---------------------------------------------------------------------------
# Rational functions with factored denominators
# ---------------------------------------------------------------------------


class RationalFunction:
    """numerator / product of degree-one forms, kept in canonical form.

    The denominator is a multiset of (normalized linear form, multiplicity)
    pairs.  The constructor cancels every denominator factor that exactly
    divides the numerator, so structural equality is semantic equality.
    """

    __slots__ = ("num", "den", "_key", "_hash")

    def __init__(self, num: Polynomial, den: tuple[tuple[Polynomial, int], ...]):
        # Internal: use .make / .of which normalize.
        self.num = num
        self.den = den
        self._key = (num.sort_key(), tuple((f.sort_key(), m) for f, m in den))
        self._hash = hash(self._key)

    @staticmethod
    def make(num: Polynomial, factors) -> "RationalFunction":
        """Build num / prod(factors) in canonical form.

        `factors` is an iterable of degree-one Polynomials or (form, mult)
        pairs; scalars from normalization move into the numerator.
        """
        acc: dict[Polynomial, int] = {}
        scale = Fraction(1)
        for item in factors:
            form, mult = item if isinstance(item, tuple) else (item, 1)
            if mult == 0:
                continue
            if form.is_zero():
                raise ZeroDivisionError("zero linear form in denominator")
            if form.is_constant():
                scale *= form.constant_value() ** mult
                continue
            norm, s = normalize_linear(form)
            scale *= s**mult
            acc[norm] = acc.get(norm, 0) + mult
        num = num * (Fraction(1) / scale)
        if num.is_zero():
            return RationalFunction(Polynomial.ZERO, ())
        # cancel exactly dividing factors
        for form in list(acc):
            while acc[form] > 0:
                q = num.divide_by_linear(form)
                if q is None:
                    break
                num = q
                acc[form] -= 1
            if acc[form] == 0:
                del acc[form]
        den = tuple(sorted(acc.items(), key=lambda t: t[0].sort_key()))
        return RationalFunction(num, den)

    @staticmethod
    def of(value) -> "RationalFunction":
        if isinstance(value, RationalFunction):
            return value
        if isinstance(value, Polynomial):
            return RationalFunction.make(value, ())
        return RationalFunction.make(Polynomial.constant(value), ())

    # -- structure ----------------------------------------------------------

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def is_polynomial(self) -> bool:
        return not self.den

    def as_polynomial(self) -> Polynomial:
        if self.den:
            raise ValueError(f"not a polynomial: {self}")
        return self.num

    def is_constant(self) -> bool:
        return not self.den and self.num.is_constant()

    def constant_value(self) -> Fraction:
        return self.as_polynomial().constant_value()

    def den_product(self) -> Polynomial:
        p = Polynomial.ONE
        for f, m in self.den:
            p = p * f**m
        return p

    def variables(self) -> set[str]:
        vs = self.num.variables()
        for f, _ in self.den:
            vs |= f.variables()
        return vs

    # -- field operations ----------------------------------------------------

    def __add__(self, other) -> "RationalFunction":
        other = RationalFunction.of(other)
        # lcm of the two factored denominators
        forms = {f: m for f, m in self.den}
        for f, m in other.den:
            forms[f] = max(forms.get(f, 0), m)
        a = self.num
        for f, m in forms.items():
            a = a * f ** (m - dict(self.den).get(f, 0))
        b = other.num
        for f, m in forms.items():
            b = b * f ** (m - dict(other.den).get(f, 0))
        return RationalFunction.make(a + b, forms.items())

    __radd__ = __add__

    def __neg__(self) -> "RationalFunction":
        return RationalFunction(-self.num, self.den)

    def __sub__(self, other):
        return self + (-RationalFunction.of(other))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other) -> "RationalFunction":
        other = RationalFunction.of(other)
        forms = {f: m for f, m in self.den}
        for f, m in other.den:
            forms[f] = forms.get(f, 0) + m
        return RationalFunction.make(self.num * other.num, forms.items())

    __rmul__ = __mul__

    def __truediv__(self, other) -> "RationalFunction":
        return self * RationalFunction.of(other).inverted()

    def __rtruediv__(self, other):
        return RationalFunction.of(other) * self.inverted()

    def __pow__(self, n: int) -> "RationalFunction":
        if n < 0:
            return self.inverted() ** (-n)
        out = RationalFunction.of(1)
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def inverted(self) -> "RationalFunction":
        """1/self; requires the numerator to factor into linear forms."""
        if self.is_zero():
            raise ZeroDivisionError("inverting zero")
        const, factors = factor_into_linear(self.num)
        num = Polynomial.constant(Fraction(1) / const)
        for f, m in self.den:
            num = num * f**m
        return RationalFunction.make(num, factors)

    def __reduce__(self):
        return (RationalFunction, (self.num, self.den))

    def __eq__(self, other):
        if isinstance(other, (int, Fraction, Polynomial)):
            other = RationalFunction.of(other)
        if not isinstance(other, RationalFunction):
            return NotImplemented
        return self._key == other._key

    def __hash__(self):
        return self._hash

    # -- evaluation, limits, calculus -----------------------------------------

    def evaluate(self, point: dict[str, Fraction]) -> Fraction:
        """Exact value at a rational point; PoleAtPoint on the poles."""
        point = {v: Fraction(p) for v, p in point.items()}
        d = Fraction(1)
        for f, m in self.den:
            fv = f.eval(point)
            if fv == 0:
                raise PoleAtPoint(f"denominator factor {f} vanishes at {point}")
            d *= fv**m
        return self.num.eval(point) / d

    def substitute(self, assignment: dict[str, Polynomial | Fraction | int]) -> "RationalFunction":
        """Substitute degree-<=1 polynomials for variables (keeps the shape)."""
        num = self.num.substitute(assignment)
        factors = []
        for f, m in self.den:
            g = f.substitute(assignment)
            if g.is_zero():
                raise ZeroDivisionError(f"substitution kills denominator factor {f}")
            factors.append((g, m))
        return RationalFunction.make(num, factors)

    def limit_at_zero(self, var: str) -> "RationalFunction":
        """The limit as var -> 0, when it exists.

        Denominator factors proportional to var must cancel against the
        numerator; afterwards var is set to 0.  NoLimit otherwise.
        """
        num = self.num
        factors = []
        pure = 0
        for f, m in self.den:
            if f.variables() == {var}:
                pure += m
            else:
                factors.append((f, m))
        for _ in range(pure):
            q = num.divide_by_linear(Polynomial.variable(var))
            if q is None:
                raise NoLimit(f"pole of order {pure} in {var} at 0")
            num = q
        out_num = num.substitute({var: Fraction(0)})
        out_factors = []
        for f, m in factors:
            g = f.substitute({var: Fraction(0)})
            if g.is_zero():
                raise NoLimit(f"denominator factor {f} vanishes at {var}=0")
            out_factors.append((g, m))
        return RationalFunction.make(out_num, out_factors)

    def derivative(self, var: str) -> "RationalFunction":
        """d/dvar, exact (quotient rule on the factored denominator)."""
        # self = N / prod f_i^{m_i}
        # d = N' / D - N * sum m_i f_i' / (f_i * D)
        out = RationalFunction.make(self.num.derivative(var), self.den)
        for i, (f, m) in enumerate(self.den):
            fp = f.derivative(var)
            if fp.is_zero():
                continue
            factors = list(self.den)
            factors[i] = (f, m + 1)
            out = out - RationalFunction.make(self.num * fp * m, factors)
        return out

    # -- structure in one variable -------------------------------------------

    def degree_in(self, var: str) -> int:
        return self.num.degree_in(var) - sum(f.degree_in(var) * m for f, m in self.den)

    def polynomial_part_in(self, var: str) -> bool:
        """True if the expansion at var -> infinity has no polynomial part.

        Equivalently deg_var(num) < deg_var(den); used for the cone
        polarization check.
        """
        return self.is_zero() or self.degree_in(var) < 0

    # -- rendering -------------------------------------------------------------

    def __str__(self) -> str:
        num = str(self.num)
        if not self.den:
            return num
        pieces = []
        for f, m in self.den:
            base = str(f)
            if len(f.terms) > 1:
                base = f"({base})"
            pieces.append(base if m == 1 else f"{base}^{m}")
        den = "*".join(pieces)
        if len(self.num.terms) > 1:
            num = f"({num})"
        return f"{num}/({den})" if len(pieces) > 1 else f"{num}/{den}"

    def __repr__(self) -> str:
        return f"RationalFunction({self})"


RF = RationalFunction


# ---------------------------------------------------------------------------
# Factoring products of linear forms
# ---------------------------------------------------------------------------


def _rational_roots(coeffs: list[Fraction]) -> dict[Fraction, int]:
    """All rational roots (with multiplicity) of sum coeffs[i] * t**i."""
    den = lcm(*(c.denominator for c in coeffs))
    ints = [c.numerator * (den // c.denominator) for c in coeffs]
    while ints and ints[-1] == 0:
        ints.pop()
    roots: dict[Fraction, int] = {}
    # deflate t = 0 roots first
    while ints and ints[0] == 0:
        roots[Fraction(0)] = roots.get(Fraction(0), 0) + 1
        ints = ints[1:]
    if len(ints) <= 1:
        return roots

    def divisors(n: int) -> list[int]:
        n = abs(n)
        out = []
        d = 1
        while d * d <= n:
            if n % d == 0:
                out.append(d)
                out.append(n // d)
            d += 1
        return out

    candidates = sorted(
        {
            Fraction(s * p, q)
            for p in divisors(ints[0])
            for q in divisors(ints[-1])
            for s in (1, -1)
        },
        key=lambda r: (abs(r), r < 0),
    )

    def horner(poly: list[int], r: Fraction):
        # returns (value, deflated coefficients) for division by (t - r)
        out = []
        acc = Fraction(0)
        for c in reversed(poly):
            acc = acc * r + c
            out.append(acc)
        value = out.pop()
        out.reverse()
        return value, out

    poly = [Fraction(c) for c in ints]
    for r in candidates:
        while len(poly) > 1:
            value, deflated = horner(poly, r)
            if value != 0:
                break
            roots[r] = roots.get(r, 0) + 1
            poly = deflated
        if len(poly) <= 1:
            break
    return roots


def factor_into_linear(
    poly: Polynomial, rng: random.Random | None = None
) -> tuple[Fraction, list[tuple[Polynomial, int]]]:
    """Factor `poly` as constant * product of normalized degree-one forms.

    Raises NotLinearProduct when an irreducible factor of degree >= 2 (over Q)
    is present.  The algorithm restricts to a generic rational line P + t*Q:
    every linear factor contributes a rational root there, whose form is then
    reconstructed from the first non-vanishing jet and certified by exact
    trial division.
    """
    if poly.is_zero():
        raise ValueError("cannot factor zero")
    if poly.is_constant():
        return poly.constant_value(), []
    if poly.degree() == 1:
        form, scale = normalize_linear(poly)
        return scale, [(form, 1)]
    rng = rng or random.Random(0x1EA5)
    variables = sorted(poly.variables(), key=var_key)
    deg = poly.degree()

    for _ in range(8):
        P = {v: Fraction(rng.randint(-30, 30)) for v in variables}
        Q = {v: Fraction(rng.randint(1, 30) * rng.choice((1, -1))) for v in variables}
        # restrict to the line P + t Q
        tvar = "t#"
        line = {
            v: Polynomial.constant(P[v]) + Polynomial.variable(tvar) * Q[v] for v in variables
        }
        g = poly.substitute(line)
        if g.degree_in(tvar) != deg:
            continue  # Q on a factor hyperplane; retry
        coeffs = [g.coefficient(tvar, i).constant_value() for i in range(deg + 1)]
        roots = _rational_roots(coeffs)
        if sum(roots.values()) != deg:
            raise NotLinearProduct(f"irreducible factor of degree >= 2 in {poly}")
        factors: list[tuple[Polynomial, int]] = []
        rest = poly
        const = Fraction(1)
        ok = True
        for root, mult in roots.items():
            at = {v: P[v] + root * Q[v] for v in variables}
            h = poly
            for _ in range(mult - 1):
                h = sum(
                    (h.derivative(v) * Q[v] for v in variables),
                    start=Polynomial.ZERO,
                )
            grad = {v: h.derivative(v).eval(at) for v in variables}
            form = sum(
                (Polynomial.variable(v) * c for v, c in grad.items() if c),
                start=Polynomial.ZERO,
            )
            shift = sum(c * at[v] for v, c in grad.items())
            form = form - Polynomial.constant(shift)
            if form.is_zero() or form.degree() != 1:
                ok = False
                break
            form, _ = normalize_linear(form)
            for _ in range(mult):
                quot = rest.divide_by_linear(form)
                if quot is None:
                    ok = False
                    break
                rest = quot
            if not ok:
                break
            factors.append((form, mult))
        if ok and rest.is_constant():
            const = rest.constant_value()
            return const, sorted(factors, key=lambda t: t[0].sort_key())
        # a root collision between distinct hyperplanes; retry with a new line
    raise NotLinearProduct(f"could not certify a linear factorization of {poly}")


def ring_ops(a: RationalFunction, b: RationalFunction, op: str) -> RationalFunction:
    """Named ring operations; add re-cancels over the merged denominators."""
    a, b = RationalFunction.of(a), RationalFunction.of(b)
    if op == "add":
        return a + b
    if op == "mul":
        return a * b
    if op == "neg":
        return -a
    raise ValueError(f"unknown op {op!r}")


def invert_linear_product(f: RationalFunction) -> RationalFunction:
    """1/f for f whose numerator is a product of degree-one forms."""
    return RationalFunction.of(f).inverted()


def evaluate(f: RationalFunction, point: dict[str, Fraction]) -> Fraction:
    return RationalFunction.of(f).evaluate(point)


def limit_at_zero(f: RationalFunction, var: str) -> RationalFunction:
    return RationalFunction.of(f).limit_at_zero(var)
