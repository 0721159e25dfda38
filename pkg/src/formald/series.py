"""Truncated multivariate formal power series over exact rationals.

A :class:`Series` stores the coefficients of total degree <= ``precision``
of an element of Q[[x_1..x_n]]; everything above the precision is unknown.
All arithmetic is exact on the known window and reports the precision of
its result.  Floating point is rejected everywhere.

Conventions used throughout the package:

* exponent vectors are tuples of nonnegative ints of length ``num_vars``;
* axes are 1-based, matching the printed names ``x1..xn``;
* the distinguished variable for regularity questions is always the last.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction

from .errors import (
    InsufficientPrecision,
    NotAUnit,
    NotFoundWithinBudget,
    NotRegular,
    UnsupportedExponent,
)


def as_coeff(value):
    """Coerce to Fraction; floats are rejected to keep computations exact."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    raise TypeError(f"exact rational coefficient expected, got {type(value).__name__}")


def monomials_upto(num_vars, max_degree):
    """All exponent vectors of total degree <= max_degree, graded-lex order."""
    if max_degree < 0:
        return []
    if num_vars == 0:
        return [()]
    out = []
    for deg in range(max_degree + 1):
        out.extend(_homogeneous(num_vars, deg))
    return out


def _homogeneous(num_vars, deg):
    if num_vars == 1:
        return [(deg,)]
    out = []
    for first in range(deg + 1):
        for rest in _homogeneous(num_vars - 1, deg - first):
            out.append((first,) + rest)
    return out


def _grlex_key(exps):
    return (sum(exps), exps)


class Series:
    """A formal power series known exactly up to a total-degree bound.

    Instances are immutable; every operation returns a fresh value.  Two
    series are equal iff the variable count, the precision, and the stored
    terms all coincide.
    """

    __slots__ = ("num_vars", "precision", "terms")

    def __init__(self, num_vars, precision, terms=None):
        if num_vars < 0:
            raise ValueError("num_vars must be >= 0")
        if precision < 0:
            raise ValueError("precision must be >= 0")
        clean = {}
        for exps, coeff in (terms or {}).items():
            exps = tuple(int(e) for e in exps)
            if len(exps) != num_vars:
                raise ValueError(f"exponent {exps} has wrong length for {num_vars} variables")
            if any(e < 0 for e in exps):
                raise ValueError(f"negative exponent in {exps}")
            if sum(exps) > precision:
                raise ValueError(f"term {exps} lies beyond precision {precision}")
            coeff = as_coeff(coeff)
            if coeff:
                clean[exps] = coeff
        self.num_vars = num_vars
        self.precision = precision
        self.terms = clean

    @classmethod
    def _raw(cls, num_vars, precision, terms):
        # internal fast path: terms already validated and nonzero
        obj = object.__new__(cls)
        obj.num_vars = num_vars
        obj.precision = precision
        obj.terms = terms
        return obj

    # -- constructors -------------------------------------------------

    @classmethod
    def zero(cls, num_vars, precision):
        return cls._raw(num_vars, precision, {})

    @classmethod
    def constant(cls, num_vars, value, precision):
        value = as_coeff(value)
        terms = {(0,) * num_vars: value} if value else {}
        return cls._raw(num_vars, precision, terms)

    @classmethod
    def one(cls, num_vars, precision):
        return cls.constant(num_vars, 1, precision)

    @classmethod
    def variable(cls, num_vars, axis, precision):
        """The series x_axis (axis is 1-based)."""
        if not 1 <= axis <= num_vars:
            raise ValueError(f"axis {axis} out of range for {num_vars} variables")
        if precision < 1:
            raise ValueError("precision must be >= 1 to hold a variable")
        exps = tuple(1 if j == axis - 1 else 0 for j in range(num_vars))
        return cls._raw(num_vars, precision, {exps: Fraction(1)})

    @classmethod
    def monomial(cls, num_vars, exps, precision, coeff=1):
        return cls(num_vars, precision, {tuple(exps): coeff})

    # -- basic queries ------------------------------------------------

    def is_zero(self):
        return not self.terms

    @property
    def constant_term(self):
        return self.terms.get((0,) * self.num_vars, Fraction(0))

    def is_unit(self):
        return bool(self.constant_term)

    def coefficient(self, exps):
        exps = tuple(exps)
        if sum(exps) > self.precision:
            raise InsufficientPrecision(
                f"coefficient at {exps} is beyond precision {self.precision}")
        return self.terms.get(exps, Fraction(0))

    def order(self):
        """Least total degree of a stored term, or None if zero to precision."""
        if not self.terms:
            return None
        return min(sum(e) for e in self.terms)

    def degree(self):
        """Largest total degree of a stored term (-1 when zero to precision)."""
        if not self.terms:
            return -1
        return max(sum(e) for e in self.terms)

    def sorted_terms(self):
        """Terms in graded-lexicographic order."""
        return sorted(self.terms.items(), key=lambda kv: _grlex_key(kv[0]))

    # -- structural maps ----------------------------------------------

    def truncate(self, precision):
        """Forget everything above the given (not larger) precision."""
        if precision > self.precision:
            raise InsufficientPrecision(
                f"cannot extend precision {self.precision} to {precision}")
        if precision == self.precision:
            return self
        terms = {e: c for e, c in self.terms.items() if sum(e) <= precision}
        return Series._raw(self.num_vars, precision, terms)

    def lift(self, num_vars):
        """Embed into a ring with extra trailing variables."""
        if num_vars < self.num_vars:
            raise ValueError("lift cannot drop variables")
        pad = (0,) * (num_vars - self.num_vars)
        terms = {e + pad: c for e, c in self.terms.items()}
        return Series._raw(num_vars, self.precision, terms)

    def set_var_zero(self, axis):
        """Substitute x_axis = 0 (result keeps the same variable count)."""
        j = axis - 1
        terms = {e: c for e, c in self.terms.items() if e[j] == 0}
        return Series._raw(self.num_vars, self.precision, terms)

    def drop_var(self, axis):
        """Remove a variable the series does not depend on."""
        j = axis - 1
        terms = {}
        for e, c in self.terms.items():
            if e[j] != 0:
                raise ValueError(f"series depends on x{axis}")
            terms[e[:j] + e[j + 1:]] = c
        return Series._raw(self.num_vars - 1, self.precision, terms)

    def restrict_to_last(self):
        """f(0, ..., 0, x_n) as a one-variable series."""
        n = self.num_vars
        terms = {}
        for e, c in self.terms.items():
            if all(v == 0 for v in e[:-1]):
                terms[(e[-1],)] = c
        return Series._raw(1, self.precision, terms)

    # -- arithmetic ----------------------------------------------------

    def _check_compatible(self, other):
        if self.num_vars != other.num_vars:
            raise ValueError(
                f"mismatched variable counts: {self.num_vars} vs {other.num_vars}")

    def __add__(self, other):
        if isinstance(other, (int, Fraction)):
            other = Series.constant(self.num_vars, other, self.precision)
        if not isinstance(other, Series):
            return NotImplemented
        self._check_compatible(other)
        prec = min(self.precision, other.precision)
        terms = {e: c for e, c in self.terms.items() if sum(e) <= prec}
        for e, c in other.terms.items():
            if sum(e) > prec:
                continue
            new = terms.get(e, Fraction(0)) + c
            if new:
                terms[e] = new
            else:
                terms.pop(e, None)
        return Series._raw(self.num_vars, prec, terms)

    __radd__ = __add__

    def __neg__(self):
        return Series._raw(self.num_vars, self.precision,
                           {e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        if isinstance(other, (int, Fraction)):
            other = Series.constant(self.num_vars, other, self.precision)
        if not isinstance(other, Series):
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            c = as_coeff(other)
            if not c:
                return Series.zero(self.num_vars, self.precision)
            return Series._raw(self.num_vars, self.precision,
                               {e: v * c for e, v in self.terms.items()})
        if not isinstance(other, Series):
            return NotImplemented
        self._check_compatible(other)
        prec = min(self.precision, other.precision)
        terms = {}
        for ea, ca in self.terms.items():
            da = sum(ea)
            if da > prec:
                continue
            for eb, cb in other.terms.items():
                if da + sum(eb) > prec:
                    continue
                key = tuple(a + b for a, b in zip(ea, eb))
                new = terms.get(key, Fraction(0)) + ca * cb
                if new:
                    terms[key] = new
                else:
                    del terms[key]
        return Series._raw(self.num_vars, prec, terms)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            c = as_coeff(other)
            if not c:
                raise ZeroDivisionError("division by zero scalar")
            return self * (Fraction(1) / c)
        return NotImplemented

    def __pow__(self, exponent):
        if not isinstance(exponent, int) or exponent < 0:
            raise ValueError("series powers take nonnegative integer exponents")
        result = Series.one(self.num_vars, self.precision)
        for _ in range(exponent):
            result = result * self
        return result

    def __eq__(self, other):
        if not isinstance(other, Series):
            return NotImplemented
        return (self.num_vars == other.num_vars
                and self.precision == other.precision
                and self.terms == other.terms)

    __hash__ = None

    def __repr__(self):
        return f"Series({self.num_vars}, N={self.precision}, {self})"

    def __str__(self):
        names = [f"x{i}" for i in range(1, self.num_vars + 1)]
        return format_poly(self.terms, names)

    # -- calculus -------------------------------------------------------

    def partial(self, axis):
        """Partial derivative with respect to x_axis; precision drops by 1."""
        if not 1 <= axis <= self.num_vars:
            raise ValueError(f"axis {axis} out of range for {self.num_vars} variables")
        if self.precision < 1:
            raise InsufficientPrecision("cannot differentiate at precision 0")
        j = axis - 1
        terms = {}
        for e, c in self.terms.items():
            if e[j] == 0:
                continue
            key = e[:j] + (e[j] - 1,) + e[j + 1:]
            terms[key] = c * e[j]
        return Series._raw(self.num_vars, self.precision - 1, terms)

    def partial_multi(self, exps):
        out = self
        for axis, k in enumerate(exps, start=1):
            for _ in range(k):
                out = out.partial(axis)
        return out

    def inverse(self):
        return invert_unit(self)


def format_poly(terms, names):
    """Canonical graded-lex rendering of an exponent->Fraction mapping.

    The output reparses under the expression grammar: ``1/2*x1^2 - x2``.
    """
    if not terms:
        return "0"
    parts = []
    for exps, coeff in sorted(terms.items(), key=lambda kv: _grlex_key(kv[0])):
        factors = []
        for name, e in zip(names, exps):
            if e == 1:
                factors.append(name)
            elif e > 1:
                factors.append(f"{name}^{e}")
        mono = "*".join(factors)
        mag = abs(coeff)
        if not mono:
            body = str(mag)
        elif mag == 1:
            body = mono
        else:
            body = f"{mag}*{mono}"
        if not parts:
            parts.append(body if coeff > 0 else f"-{body}")
        else:
            parts.append(f"+ {body}" if coeff > 0 else f"- {body}")
    return " ".join(parts)


# -- units, exponentials, coefficient extraction -----------------------


def invert_unit(a):
    """Multiplicative inverse of a unit, exact to a's precision."""
    c0 = a.constant_term
    if not c0:
        raise NotAUnit("series has zero constant term")
    n, prec = a.num_vars, a.precision
    # geometric series in e = 1 - a/c0, which lies in the maximal ideal
    e = Series.one(n, prec) - a / c0
    acc = Series.one(n, prec)
    power = Series.one(n, prec)
    for _ in range(prec):
        power = power * e
        if power.is_zero():
            break
        acc = acc + power
    return acc / c0


def exp_series(a):
    """exp(a) for a series with zero constant term, truncated at a's precision."""
    if a.constant_term:
        raise UnsupportedExponent("exp needs a zero constant term")
    n, prec = a.num_vars, a.precision
    acc = Series.one(n, prec)
    power = Series.one(n, prec)
    for k in range(1, prec + 1):
        power = power * a
        if power.is_zero():
            break
        acc = acc + power / math.factorial(k)
    return acc


def xn_coefficient(f, j):
    """The coefficient of x_n^j, as a series in the first n-1 variables.

    Known to precision prec(f) - j; beyond the precision the zero series
    with precision 0 is returned.
    """
    if j < 0:
        raise ValueError("coefficient index must be >= 0")
    n = f.num_vars
    prec = f.precision - j
    if prec < 0:
        return Series.zero(n - 1, 0)
    terms = {}
    for e, c in f.terms.items():
        if e[-1] == j and sum(e) - j <= prec:
            terms[e[:-1]] = c
    return Series._raw(n - 1, prec, terms)


@dataclass(frozen=True)
class XnRegularity:
    """Outcome of the last-variable regularity test.

    ``order`` is the least d with a nonzero x_n^d term on the axis
    x_1 = ... = x_{n-1} = 0, or None when the restriction vanishes to the
    stated precision (a precision-relative answer, not a certificate).
    """

    order: int | None
    certified_to_precision: int

    def __bool__(self):
        return self.order is not None


def is_xn_regular(f):
    restriction = f.restrict_to_last()
    order = None
    if restriction.terms:
        order = min(e[0] for e in restriction.terms)
    return XnRegularity(order=order, certified_to_precision=f.precision)


# -- Weierstrass division and preparation ------------------------------


def _split_last(f, d):
    """f = low + x_n^d * high, split at last-variable exponent d."""
    low, high = {}, {}
    for e, c in f.terms.items():
        if e[-1] < d:
            low[e] = c
        else:
            high[e[:-1] + (e[-1] - d,)] = c
    return (Series._raw(f.num_vars, f.precision, low),
            Series._raw(f.num_vars, f.precision, high))


def _shift_down_last(h, d):
    """The x_n^d-quotient of h (terms with smaller x_n-exponent are dropped)."""
    terms = {}
    for e, c in h.terms.items():
        if e[-1] >= d:
            terms[e[:-1] + (e[-1] - d,)] = c
    return Series._raw(h.num_vars, h.precision, terms)


def weierstrass_divide(g, f):
    """Divide g by an x_n-regular f: g = q*f + sum_{i<d} r_i*x_n^i.

    Splitting f = f_low + x_n^d*f_high (f_high a unit), the quotient is the
    fixed point of q -> f_high^{-1} * T(g - q*f_low) where T extracts the
    x_n^d-quotient.  Corrections gain one order in (x_1..x_{n-1}) per pass,
    so at window precision N the iteration stabilizes within N+1 rounds.

    Returns (q, [r_0..r_{d-1}]) with the r_i in n-1 variables; outputs are
    reported at the conservative precision N - d.
    """
    if g.num_vars != f.num_vars:
        raise ValueError("mismatched variable counts")
    reg = is_xn_regular(f)
    if reg.order is None:
        raise NotRegular(
            f"divisor is not regular in the last variable to precision {f.precision}")
    d = reg.order
    window = min(g.precision, f.precision)
    if window < d:
        raise InsufficientPrecision(
            f"precision {window} is below the regularity order {d}")
    g = g.truncate(window)
    f = f.truncate(window)
    f_low, f_high = _split_last(f, d)
    inv_high = invert_unit(f_high)
    q = Series.zero(f.num_vars, window)
    for _ in range(window + 2):
        h = g - q * f_low
        new_q = inv_high * _shift_down_last(h, d)
        if new_q == q:
            break
        q = new_q
    remainder = g - q * f
    if any(e[-1] >= d for e in remainder.terms):
        raise AssertionError("division iteration failed to stabilize")
    out_prec = window - d
    q_out = q.truncate(out_prec)
    r_out = [xn_coefficient(remainder, i).truncate(out_prec) for i in range(d)]
    return q_out, r_out


@dataclass(frozen=True)
class WeierstrassForm:
    """f = unit * (x_n^d + tail[d-1]*x_n^{d-1} + ... + tail[0]).

    The tail entries are series in the first n-1 variables with zero
    constant term; ``precision`` is the reported output precision.
    """

    unit: Series
    degree: int
    tail: tuple
    precision: int

    def reconstruct(self):
        """unit * (x_n^d + sum tail_i x_n^i) at the stated precision."""
        n = self.unit.num_vars
        poly = Series.monomial(n, (0,) * (n - 1) + (self.degree,),
                               self.precision)
        for i, b in enumerate(self.tail):
            term = b.lift(n) * Series.monomial(n, (0,) * (n - 1) + (i,),
                                               self.precision)
            poly = poly + term
        return self.unit * poly


def weierstrass_prepare(f):
    """Weierstrass preparation of an x_n-regular series.

    Divides x_n^d by f; the quotient is a unit u^{-1} and the remainder
    gives the negated tail of the distinguished polynomial.
    """
    reg = is_xn_regular(f)
    if reg.order is None:
        raise NotRegular(
            f"series is not regular in the last variable to precision {f.precision}")
    d = reg.order
    if f.precision < d:
        raise InsufficientPrecision(
            f"precision {f.precision} is below the regularity order {d}")
    n = f.num_vars
    xnd = Series.monomial(n, (0,) * (n - 1) + (d,), f.precision)
    q, r = weierstrass_divide(xnd, f)
    unit = invert_unit(q)
    tail = tuple(-ri for ri in r)
    for b in tail:
        if b.constant_term:
            raise AssertionError("tail entry with nonzero constant term")
    return WeierstrassForm(unit=unit, degree=d, tail=tail,
                           precision=f.precision - d)


# -- linear coordinate changes -----------------------------------------


class LinearSubstitution:
    """An invertible linear change of coordinates x_i -> sum_j c_ij x_j."""

    __slots__ = ("num_vars", "rows")

    def __init__(self, rows):
        rows = tuple(tuple(as_coeff(v) for v in row) for row in rows)
        n = len(rows)
        if any(len(row) != n for row in rows):
            raise ValueError("substitution matrix must be square")
        self.num_vars = n
        self.rows = rows
        if _det(rows) == 0:
            raise ValueError("substitution matrix is singular")

    @classmethod
    def identity(cls, num_vars):
        return cls([[1 if i == j else 0 for j in range(num_vars)]
                    for i in range(num_vars)])

    @classmethod
    def permutation(cls, images):
        """x_i -> x_{images[i]+1} for a permutation of 0..n-1."""
        n = len(images)
        return cls([[1 if j == images[i] else 0 for j in range(n)]
                    for i in range(n)])

    @classmethod
    def shear_last(cls, coeffs):
        """x_i -> x_i + c_i*x_n for i < n; x_n fixed."""
        n = len(coeffs) + 1
        rows = [[0] * n for _ in range(n)]
        for i, c in enumerate(coeffs):
            rows[i][i] = 1
            rows[i][n - 1] = c
        rows[n - 1][n - 1] = 1
        return cls(rows)

    def inverse(self):
        return LinearSubstitution(_invert_matrix(self.rows))

    def compose(self, other):
        """self after other (matrix product self.rows * other.rows)."""
        n = self.num_vars
        rows = [[sum(self.rows[i][k] * other.rows[k][j] for k in range(n))
                 for j in range(n)] for i in range(n)]
        return LinearSubstitution(rows)

    def __eq__(self, other):
        return isinstance(other, LinearSubstitution) and self.rows == other.rows

    __hash__ = None

    def __repr__(self):
        body = "; ".join(",".join(str(v) for v in row) for row in self.rows)
        return f"LinearSubstitution[{body}]"


def _det(rows):
    n = len(rows)
    m = [list(row) for row in rows]
    det = Fraction(1)
    for col in range(n):
        pivot = next((r for r in range(col, n) if m[r][col]), None)
        if pivot is None:
            return Fraction(0)
        if pivot != col:
            m[col], m[pivot] = m[pivot], m[col]
            det = -det
        det *= m[col][col]
        for r in range(col + 1, n):
            if m[r][col]:
                factor = m[r][col] / m[col][col]
                for c in range(col, n):
                    m[r][c] -= factor * m[col][c]
    return det


def _invert_matrix(rows):
    n = len(rows)
    m = [list(row) + [Fraction(1 if i == j else 0) for j in range(n)]
         for i, row in enumerate(rows)]
    for col in range(n):
        pivot = next((r for r in range(col, n) if m[r][col]), None)
        if pivot is None:
            raise ValueError("singular matrix")
        m[col], m[pivot] = m[pivot], m[col]
        inv = Fraction(1) / m[col][col]
        m[col] = [v * inv for v in m[col]]
        for r in range(n):
            if r != col and m[r][col]:
                factor = m[r][col]
                m[r] = [a - factor * b for a, b in zip(m[r], m[col])]
    return [row[n:] for row in m]


def apply_linear_substitution(f, sub):
    """Exact substitution f(L x); precision is preserved."""
    if f.num_vars != sub.num_vars:
        raise ValueError("mismatched variable counts")
    n, prec = f.num_vars, f.precision
    images = []
    for i in range(n):
        terms = {}
        for j, c in enumerate(sub.rows[i]):
            if c:
                exps = tuple(1 if k == j else 0 for k in range(n))
                terms[exps] = c
        images.append(Series._raw(n, prec, terms))
    result = Series.zero(n, prec)
    for exps, coeff in f.sorted_terms():
        term = Series.constant(n, coeff, prec)
        for i, e in enumerate(exps):
            for _ in range(e):
                term = term * images[i]
        result = result + term
    return result


def find_regularizing_substitution(f, shear_bound=4):
    """A deterministic search for L making f regular in the last variable.

    Tries the identity, then coordinate permutations in itertools order,
    then shears x_i -> x_i + c_i*x_n with integer c enumerated by rising
    max|c_i| (and product order inside each shell).  Returns (L, order).
    """
    if f.is_zero():
        raise NotFoundWithinBudget("series is zero to precision")
    n = f.num_vars

    def candidates():
        yield LinearSubstitution.identity(n)
        for perm in itertools.permutations(range(n)):
            if perm != tuple(range(n)):
                yield LinearSubstitution.permutation(perm)
        if n > 1:
            for bound in range(1, shear_bound + 1):
                for coeffs in itertools.product(range(-bound, bound + 1),
                                                repeat=n - 1):
                    if max(abs(c) for c in coeffs) == bound:
                        yield LinearSubstitution.shear_last(coeffs)

    for sub in candidates():
        reg = is_xn_regular(apply_linear_substitution(f, sub))
        if reg.order is not None:
            return sub, reg.order
    raise NotFoundWithinBudget(
        f"no regularizing substitution with shear bound {shear_bound}")


def try_divide(g, f):
    """Exact quotient q with g = q*f detectable at truncation, else None.

    Units divide directly; otherwise f is made regular in the last variable
    by a deterministic substitution and Weierstrass division decides
    divisibility (zero remainder at the output precision).
    """
    if f.is_zero():
        raise ValueError("division by a series that is zero to precision")
    if f.num_vars != g.num_vars:
        raise ValueError("mismatched variable counts")
    if f.is_unit():
        prec = min(f.precision, g.precision)
        return invert_unit(f.truncate(prec)) * g.truncate(prec)
    if is_xn_regular(f):
        sub = None
        gg, ff = g, f
    else:
        try:
            sub, _ = find_regularizing_substitution(f)
        except NotFoundWithinBudget:
            return None
        gg = apply_linear_substitution(g, sub)
        ff = apply_linear_substitution(f, sub)
    q, r = weierstrass_divide(gg, ff)
    if any(not ri.is_zero() for ri in r):
        return None
    if sub is not None:
        q = apply_linear_substitution(q, sub.inverse())
    return q
