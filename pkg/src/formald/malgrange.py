"""One-variable operators with finite cokernel, and the multivariate
reduction producing generators of R/Delta(R) over the smaller ring.

For Delta = sum r_i d^i with r_l != 0 acting on k[[x]], the indicial data
(the degree shift s, the index set I where it is attained, the indicial
polynomial P, and the threshold t0 past which P has no integer roots)
turns Delta into an isomorphism m^t -> m^{t-s} for t >= t0.  The snake
lemma then reduces kernel and cokernel of Delta on the whole ring to a
single finite matrix, which is computed exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .errors import (InsufficientPrecision, NotRegularLeadingCoefficient,
                     PreconditionViolated, ZeroOperator)
from .linalg import ColumnEchelon, Matrix
from .series import Series, is_xn_regular, monomials_upto


def valuation(series):
    """Least exponent with a nonzero coefficient; None when the series is
    zero to its precision (read: 'at least precision + 1')."""
    return series.order()


class OneVarOp:
    """Delta = sum_{i<=l} r_i d^i acting on k[[x]]."""

    __slots__ = ("coefficients",)

    def __init__(self, coefficients):
        coefficients = list(coefficients)
        while coefficients and coefficients[-1].is_zero():
            coefficients.pop()
        for r in coefficients:
            if r.num_vars != 1:
                raise ValueError("coefficients must be one-variable series")
        self.coefficients = tuple(coefficients)

    @property
    def order(self):
        return len(self.coefficients) - 1 if self.coefficients else None

    def is_zero(self):
        return not self.coefficients

    def min_precision(self):
        if not self.coefficients:
            return 0
        return min(r.precision for r in self.coefficients)

    def apply(self, g):
        out = Series.zero(1, max(g.precision - (self.order or 0), 0))
        deriv = g
        for i, r in enumerate(self.coefficients):
            if i > 0:
                deriv = deriv.partial(1)
            if not r.is_zero():
                out = out + r * deriv
        return out

    def apply_monomial(self, j, out_bound):
        """Exact coefficients of Delta(x^j) up to degree out_bound.

        Stored coefficient terms are used as exact data, so out_bound must
        stay within the coefficient precision."""
        if out_bound > self.min_precision():
            raise InsufficientPrecision(
                f"need coefficients to degree {out_bound}, have {self.min_precision()}")
        out = {}
        for i, r in enumerate(self.coefficients):
            if j < i:
                continue
            falling = 1
            for step in range(i):
                falling *= j - step
            if falling == 0:
                continue
            for (e,), c in r.terms.items():
                deg = e + j - i
                if deg > out_bound:
                    continue
                new = out.get(deg, Fraction(0)) + c * falling
                if new:
                    out[deg] = new
                else:
                    del out[deg]
        return out

    def __str__(self):
        if not self.coefficients:
            return "0"
        parts = []
        for i, r in enumerate(self.coefficients):
            if r.is_zero():
                continue
            head = "" if i == 0 else ("d" if i == 1 else f"d^{i}")
            text = str(r)
            plain = len(r.terms) == 1 and not text.startswith("-")
            if not head:
                parts.append(text if plain else f"({text})")
            elif text == "1":
                parts.append(head)
            else:
                parts.append(f"{text}*{head}" if plain else f"({text})*{head}")
        return " + ".join(parts)

    __repr__ = __str__


@dataclass(frozen=True)
class IndicialData:
    """The recursion data of a one-variable operator.

    P(t) = sum_{i in I} t(t-1)...(t-i+1) * rho_i(0) with rho_i the unit
    part of r_i = x^{i-s} rho_i; P is stored by its coefficient tuple
    (low to high).  P(t) != 0 for every integer t >= t0 and t0 >= max(s, 0).
    """

    s: int
    index_set: tuple
    poly: tuple
    t0: int

    def eval(self, t):
        acc = Fraction(0)
        power = 1
        for c in self.poly:
            acc += c * power
            power *= t
        return acc


def _falling_factorial_poly(i):
    """Coefficients of t(t-1)...(t-i+1), low to high."""
    poly = [Fraction(1)]
    for step in range(i):
        shifted = [Fraction(0)] + poly            # t * poly
        scaled = [-step * c for c in poly] + [Fraction(0)]
        poly = [a + b for a, b in zip(shifted, scaled)]
    return poly


def _integer_roots(poly):
    """All integer roots, by testing up to the Cauchy bound."""
    coeffs = list(poly)
    while coeffs and coeffs[-1] == 0:
        coeffs.pop()
    if len(coeffs) <= 1:
        return []
    lead = abs(coeffs[-1])
    bound = 1 + max(abs(c) for c in coeffs[:-1]) / lead
    limit = math.floor(bound)
    roots = []
    for t in range(-limit, limit + 1):
        acc = Fraction(0)
        power = 1
        for c in coeffs:
            acc += c * power
            power *= t
        if acc == 0:
            roots.append(t)
    return roots


def indicial_data(op):
    if op.is_zero():
        raise ZeroOperator("indicial data needs a nonzero operator")
    shifts = {}
    for i, r in enumerate(op.coefficients):
        nu = valuation(r)
        if nu is not None:
            shifts[i] = i - nu
    if not shifts:
        raise ZeroOperator("all coefficients vanish to precision")
    s = max(shifts.values())
    index_set = tuple(sorted(i for i, v in shifts.items() if v == s))
    size = max(index_set) + 1
    poly = [Fraction(0)] * size
    for i in index_set:
        r = op.coefficients[i]
        rho0 = r.terms[(valuation(r),)]
        for pos, c in enumerate(_falling_factorial_poly(i)):
            poly[pos] += c * rho0
    while poly and poly[-1] == 0:
        poly.pop()
    roots = [t for t in _integer_roots(poly)]
    t0 = max(s, 0)
    if roots:
        t0 = max(t0, max(roots) + 1)
    return IndicialData(s=s, index_set=index_set, poly=tuple(poly), t0=t0)


def solve(op, g, t):
    """The unique f in m^t with Delta(f) = g, for t >= t0 and nu(g) >= t - s.

    Solves coefficient by coefficient from degree t upward; every step
    divides by P(j), which is nonzero by the threshold condition."""
    data = indicial_data(op)
    if t < data.t0:
        raise PreconditionViolated(f"t = {t} is below the threshold t0 = {data.t0}")
    nu_g = valuation(g)
    if nu_g is not None and nu_g < t - data.s:
        raise PreconditionViolated(
            f"right-hand side has valuation {nu_g} < t - s = {t - data.s}")
    out_prec = min(g.precision, op.min_precision()) + data.s
    if out_prec < t:
        raise InsufficientPrecision("not enough precision to solve past degree t")
    residual = {e[0]: c for e, c in g.terms.items()}
    coeffs = {}
    for j in range(t, out_prec + 1):
        want = residual.get(j - data.s, Fraction(0))
        if not want:
            continue
        cj = want / data.eval(j)
        coeffs[(j,)] = cj
        for deg, c in op.apply_monomial(j, out_prec - data.s).items():
            new = residual.get(deg, Fraction(0)) - c * cj
            if new:
                residual[deg] = new
            else:
                residual.pop(deg, None)
    return Series(1, out_prec, coeffs)


@dataclass(frozen=True)
class FiniteDims:
    """Exact kernel and cokernel dimensions of Delta on k[[x]]."""

    cokernel: int
    kernel: int
    t0: int
    s: int
    representatives: tuple  # monomial degrees spanning the cokernel


def finite_dims(op):
    """The snake-lemma computation at t = t0.

    Delta restricts to an isomorphism m^{t0} -> m^{t0-s}, so kernel and
    cokernel agree with those of the induced finite map
    R/m^{t0} -> R/m^{t0-s}, read off one exact matrix."""
    data = indicial_data(op)
    t = data.t0
    rows = t - data.s
    matrix = _truncated_matrix(op, t, rows)
    ech = ColumnEchelon()
    for j, col in enumerate(matrix.cols):
        ech.add(col, j)
    rank = ech.rank
    pivots = set(ech.pivots())
    reps = tuple(i for i in range(rows) if i not in pivots)
    return FiniteDims(cokernel=rows - rank, kernel=t - rank,
                      t0=t, s=data.s, representatives=reps)


def cokernel_dim(op):
    return finite_dims(op).cokernel


def kernel_dim(op):
    return finite_dims(op).kernel


def _truncated_matrix(op, ncols, nrows):
    """Columns Delta(x^j) mod x^{nrows}, for j < ncols."""
    cols = []
    out_bound = max(nrows - 1, 0)
    for j in range(ncols):
        image = op.apply_monomial(j, out_bound)
        cols.append({deg: c for deg, c in image.items() if deg < nrows})
    return Matrix.from_cols(cols, nrows)


def truncated_cokernel_rank(op, size):
    """Brute-force oracle: cokernel of Delta on x^{<size} mapped into
    x^{<size-s}.  Rows below size - s receive no contribution from
    excluded columns, so the count is honest and stabilizes in size."""
    data = indicial_data(op)
    nrows = size - data.s
    matrix = _truncated_matrix(op, size, nrows)
    return nrows - matrix.rank()


# -- multivariate reduction --------------------------------------------


@dataclass
class GeneratorEvidence:
    """Generators g_j with R = sum R_{n-1} g_j + Delta(R) verified up to a
    truncation degree (never claimed beyond it)."""

    generators: tuple        # Series in n variables
    verified: bool
    degree: int
    failed_monomial: tuple | None


def _coefficients_of_dn(op):
    """Extract (r_0..r_l) from an operator that is polynomial in d_n."""
    n = op.num_vars
    coeffs = {}
    top = 0
    for alpha, series in op.coeffs.items():
        if any(a != 0 for a in alpha[:-1]):
            raise ValueError("operator must involve only the last derivative")
        coeffs[alpha[-1]] = series
        top = max(top, alpha[-1])
    return [coeffs.get(i, Series.zero(n, op_min_precision(op)))
            for i in range(top + 1)]


def op_min_precision(op):
    if not op.coeffs:
        return 0
    return min(s.precision for s in op.coeffs.values())


def cokernel_generators(op, trunc):
    """Generators of R/Delta(R) as a module over the first n-1 variables.

    Restricting every coefficient to x_1 = ... = x_{n-1} = 0 leaves a
    one-variable operator whose cokernel representatives x_n^j lift to
    generator candidates; the containment of every monomial of total
    degree <= trunc in sum R_{n-1} g_j + Delta(R) is then verified as a
    finite linear system."""
    rs = _coefficients_of_dn(op)
    n = op.num_vars
    if not rs or rs[-1].is_zero():
        raise ZeroOperator("operator is zero to precision")
    if not is_xn_regular(rs[-1]):
        raise NotRegularLeadingCoefficient(
            "top coefficient is not regular in the last variable")

    one_var = OneVarOp([r.restrict_to_last() for r in rs])
    dims = finite_dims(one_var)
    generators = tuple(
        Series.monomial(n, (0,) * (n - 1) + (j,), trunc)
        for j in dims.representatives)

    # verification system over monomials of degree <= trunc
    shift = max((i - (valuation(r.restrict_to_last()) or 0)
                 for i, r in enumerate(rs) if not r.is_zero()), default=0)
    h_bound = trunc + max(shift, 0) + 1
    needed = h_bound + max(0, -min(0, shift))
    if op_min_precision(op) < trunc:
        raise InsufficientPrecision(
            f"coefficients known to {op_min_precision(op)}, need >= {trunc}")

    index = {e: i for i, e in enumerate(monomials_upto(n, trunc))}
    ech = ColumnEchelon()
    count = 0
    # columns from the R_{n-1}-multiples of the generators
    for gen in generators:
        gexp = next(iter(gen.terms))
        for mu in monomials_upto(n - 1, trunc):
            key = tuple(mu) + (gexp[-1],)
            if sum(key) <= trunc:
                ech.add({index[key]: Fraction(1)}, count)
                count += 1
    # columns Delta(x^e) truncated to degree <= trunc
    for e in monomials_upto(n, h_bound):
        col = {}
        for i, r in enumerate(rs):
            if e[-1] < i:
                continue
            falling = 1
            for step in range(i):
                falling *= e[-1] - step
            if falling == 0:
                continue
            base = e[:-1] + (e[-1] - i,)
            for re_, c in r.terms.items():
                key = tuple(a + b for a, b in zip(base, re_))
                if sum(key) > trunc:
                    continue
                pos = index[key]
                new = col.get(pos, Fraction(0)) + c * falling
                if new:
                    col[pos] = new
                else:
                    del col[pos]
        if col:
            ech.add(col, count)
            count += 1

    failed = None
    for e in monomials_upto(n, trunc):
        if not ech.contains({index[e]: Fraction(1)}):
            failed = e
            break
    return GeneratorEvidence(generators=generators, verified=failed is None,
                             degree=trunc, failed_monomial=failed)
