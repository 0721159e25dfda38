"""The commutative symbol calculus on the associated graded ring.

Symbols are polynomials in the commuting generators z_1..z_n (the classes
of the derivatives under the order filtration) with truncated series
coefficients.  The module provides the Poisson bracket in closed form,
truncated ideal-membership tests with three-valued verdicts, involutivity
probing, and the repeated-bracket chain probe.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .errors import BoundOverflow, InsufficientPrecision
from .linalg import ColumnEchelon
from .series import Series, as_coeff, format_poly, monomials_upto

_COLUMN_GUARD = 50000

NOT_MEMBER = "NotMember_certified"
MEMBER = "MemberWitness"
INCONCLUSIVE = "Inconclusive"


class Symbol:
    """An element of R[z_1..z_n]: dict from z-exponent to series coefficient."""

    __slots__ = ("num_vars", "coeffs")

    def __init__(self, num_vars, coeffs=None):
        clean = {}
        for zexp, series in (coeffs or {}).items():
            zexp = tuple(int(z) for z in zexp)
            if len(zexp) != num_vars or any(z < 0 for z in zexp):
                raise ValueError(f"bad z-exponent {zexp}")
            if series.num_vars != num_vars:
                raise ValueError("coefficient has wrong variable count")
            if not series.is_zero():
                clean[zexp] = series
        self.num_vars = num_vars
        self.coeffs = clean

    @classmethod
    def from_series(cls, series):
        return cls(series.num_vars, {(0,) * series.num_vars: series})

    @classmethod
    def zeta(cls, num_vars, axis, precision):
        """The generator z_axis (axis is 1-based)."""
        if not 1 <= axis <= num_vars:
            raise ValueError(f"axis {axis} out of range")
        zexp = tuple(1 if j == axis - 1 else 0 for j in range(num_vars))
        return cls(num_vars, {zexp: Series.one(num_vars, precision)})

    @classmethod
    def zero(cls, num_vars):
        return cls(num_vars, {})

    def is_zero(self):
        return not self.coeffs

    @property
    def zeta_degree(self):
        if not self.coeffs:
            return None
        return max(sum(z) for z in self.coeffs)

    def zeta_order(self):
        if not self.coeffs:
            return None
        return min(sum(z) for z in self.coeffs)

    @property
    def constant_term(self):
        c = self.coeffs.get((0,) * self.num_vars)
        return c.constant_term if c is not None else Fraction(0)

    def homogeneous_part(self, j):
        """The part of z-degree exactly j."""
        return Symbol(self.num_vars,
                      {z: s for z, s in self.coeffs.items() if sum(z) == j})

    def sorted_terms(self):
        return sorted(self.coeffs.items(), key=lambda kv: (sum(kv[0]), kv[0]))

    def _check(self, other):
        if self.num_vars != other.num_vars:
            raise ValueError("mismatched variable counts")

    def __add__(self, other):
        if isinstance(other, (int, Fraction, Series)):
            other = _promote(other, self.num_vars, self.min_precision())
        if not isinstance(other, Symbol):
            return NotImplemented
        self._check(other)
        coeffs = dict(self.coeffs)
        for z, s in other.coeffs.items():
            if z in coeffs:
                t = coeffs[z] + s
                if t.is_zero():
                    del coeffs[z]
                else:
                    coeffs[z] = t
            else:
                coeffs[z] = s
        return Symbol(self.num_vars, coeffs)

    __radd__ = __add__

    def __neg__(self):
        return Symbol(self.num_vars, {z: -s for z, s in self.coeffs.items()})

    def __sub__(self, other):
        if isinstance(other, (int, Fraction, Series)):
            other = _promote(other, self.num_vars, self.min_precision())
        if not isinstance(other, Symbol):
            return NotImplemented
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            c = as_coeff(other)
            return Symbol(self.num_vars,
                          {z: s * c for z, s in self.coeffs.items()})
        if isinstance(other, Series):
            other = Symbol.from_series(other)
        if not isinstance(other, Symbol):
            return NotImplemented
        self._check(other)
        out = {}
        for za, sa in self.coeffs.items():
            for zb, sb in other.coeffs.items():
                key = tuple(a + b for a, b in zip(za, zb))
                prod = sa * sb
                if prod.is_zero():
                    continue
                if key in out:
                    t = out[key] + prod
                    if t.is_zero():
                        del out[key]
                    else:
                        out[key] = t
                else:
                    out[key] = prod
        return Symbol(self.num_vars, out)

    __rmul__ = __mul__

    def __pow__(self, exponent):
        if not isinstance(exponent, int) or exponent < 0:
            raise ValueError("symbol powers take nonnegative integer exponents")
        result = Symbol.from_series(Series.one(self.num_vars, self.min_precision()))
        for _ in range(exponent):
            result = result * self
        return result

    def __eq__(self, other):
        if not isinstance(other, Symbol):
            return NotImplemented
        return self.num_vars == other.num_vars and self.coeffs == other.coeffs

    __hash__ = None

    def min_precision(self):
        if not self.coeffs:
            return 0
        return min(s.precision for s in self.coeffs.values())

    def x_partial(self, axis):
        out = {}
        for z, s in self.coeffs.items():
            d = s.partial(axis)
            if not d.is_zero():
                out[z] = d
        return Symbol(self.num_vars, out)

    def zeta_partial(self, axis):
        j = axis - 1
        out = {}
        for z, s in self.coeffs.items():
            if z[j] == 0:
                continue
            key = z[:j] + (z[j] - 1,) + z[j + 1:]
            t = s * z[j]
            if key in out:
                t = out[key] + t
            out[key] = t
        return Symbol(self.num_vars, out)

    def truncate_x(self, precision):
        return Symbol(self.num_vars,
                      {z: s.truncate(min(precision, s.precision))
                       for z, s in self.coeffs.items()})

    def __str__(self):
        if not self.coeffs:
            return "0"
        n = self.num_vars
        names = [f"x{i}" for i in range(1, n + 1)] + [f"z{i}" for i in range(1, n + 1)]
        joint = {}
        for z, s in self.coeffs.items():
            for e, c in s.terms.items():
                joint[e + z] = c
        return format_poly(joint, names)

    __repr__ = __str__


def _promote(value, num_vars, precision):
    if isinstance(value, Series):
        return Symbol.from_series(value)
    return Symbol.from_series(Series.constant(num_vars, value, precision))


def poisson_bracket(a, b):
    """{a, b} = sum_i (da/dz_i * db/dx_i - da/dx_i * db/dz_i).

    On principal symbols this closed formula agrees with the symbol of the
    commutator of lifts whenever that commutator has the expected order;
    the lift construction is kept as a test oracle only.
    """
    a._check(b)
    n = a.num_vars
    out = Symbol.zero(n)
    for i in range(1, n + 1):
        out = out + a.zeta_partial(i) * b.x_partial(i)
        out = out - a.x_partial(i) * b.zeta_partial(i)
    return out


# -- truncated ideal membership ------------------------------------------


@dataclass
class MembershipVerdict:
    """Three-valued membership outcome; only NotMember is a certificate."""

    status: str
    multipliers: list | None
    x_bound: int
    zeta_bound: int
    x_bound_used: int

    def __bool__(self):
        return self.status == MEMBER


def membership_truncated(target, gens, x_bound, zeta_bound):
    """Decide target in (gens) by a finite linear system.

    Multiplier coefficients range over x-degree <= x_bound and z-degree
    <= zeta_bound - (least z-degree of the generator); equations compare
    all coefficients with x-degree <= x_bound (clamped to the available
    precision) and z-degree <= zeta_bound.  Infeasibility of these
    necessary constraints certifies non-membership; feasibility produces
    multipliers valid modulo the truncation.
    """
    if x_bound < 0 or zeta_bound < 0:
        raise ValueError("bounds must be nonnegative")
    n = target.num_vars
    live = [(i, g) for i, g in enumerate(gens) if not g.is_zero()]
    precs = [g.min_precision() for _, g in live] + [target.min_precision()]
    x_used = min([x_bound] + precs)
    if x_used < 0 or (target.is_zero() and not live):
        return MembershipVerdict(INCONCLUSIVE if not target.is_zero() else MEMBER,
                                 None, x_bound, zeta_bound, max(x_used, 0))

    def row_index(e, z):
        return (e, z)

    columns = []
    labels = []
    for i, g in live:
        zmin = g.zeta_order()
        zmax = zeta_bound - zmin
        if zmax < 0:
            continue
        for zu in monomials_upto(n, zmax):
            for mu in monomials_upto(n, x_used):
                col = {}
                for zg, s in g.coeffs.items():
                    zrow = tuple(a + b for a, b in zip(zu, zg))
                    if sum(zrow) > zeta_bound:
                        continue
                    for eg, c in s.terms.items():
                        erow = tuple(a + b for a, b in zip(mu, eg))
                        if sum(erow) > x_used:
                            continue
                        key = row_index(erow, zrow)
                        col[key] = col.get(key, Fraction(0)) + c
                if col:
                    columns.append(col)
                    labels.append((i, mu, zu))
                if len(columns) > _COLUMN_GUARD:
                    raise BoundOverflow("membership system exceeds the size guard")

    rhs = {}
    for z, s in target.coeffs.items():
        if sum(z) > zeta_bound:
            continue
        for e, c in s.terms.items():
            if sum(e) <= x_used:
                rhs[row_index(e, z)] = c

    ech = ColumnEchelon()
    for j, col in enumerate(columns):
        ech.add(col, j)
    combo = ech.express(rhs)
    if combo is None:
        return MembershipVerdict(NOT_MEMBER, None, x_bound, zeta_bound, x_used)
    multipliers = [Symbol.zero(n) for _ in gens]
    for j, value in sorted(combo.items()):
        i, mu, zu = labels[j]
        term = Symbol(n, {zu: Series.monomial(n, mu, x_used, value)})
        multipliers[i] = multipliers[i] + term
    return MembershipVerdict(MEMBER, multipliers, x_bound, zeta_bound, x_used)


@dataclass
class InvolutivityReport:
    status: str  # "pass", "fail", or "inconclusive"
    witness_pair: tuple | None
    witness_bracket: Symbol | None
    verdicts: list = field(default_factory=list)


def involutivity_check(gens, x_bound, zeta_bound):
    """Test every pairwise bracket for membership in the generated ideal.

    Pairs are taken as {g_j, g_i} with i < j so that the canonical failing
    pair (x_n, z_n) reports the unit bracket with positive sign.
    """
    gens = list(gens)
    verdicts = []
    status = "pass"
    witness_pair = None
    witness_bracket = None
    for j in range(len(gens)):
        for i in range(j):
            bracket = poisson_bracket(gens[j], gens[i])
            if bracket.is_zero():
                verdicts.append(((j, i), MEMBER))
                continue
            verdict = membership_truncated(bracket, gens, x_bound, zeta_bound)
            verdicts.append(((j, i), verdict.status))
            if verdict.status == NOT_MEMBER and status != "fail":
                status = "fail"
                witness_pair = (j, i)
                witness_bracket = bracket
            elif verdict.status == INCONCLUSIVE and status == "pass":
                status = "inconclusive"
    return InvolutivityReport(status, witness_pair, witness_bracket, verdicts)


# -- the repeated-bracket chain probe -------------------------------------


@dataclass
class ChainProbeResult:
    status: str  # "unit_reached", "stable", or "budget_exhausted"
    step: int | None
    last: Symbol | None
    certified_to_precision: int


def bracket_chain_probe(f, seed, steps):
    """Iterate g_0 = f, g_{l+1} = {seed, g_l} with seed the last-variable
    symbol generator, reporting the first unit (nonzero constant term).

    For an f regular of order d in the last variable the unit appears at
    exactly step d; a chain that is zero to precision is reported stable
    and exhaustion of steps or precision is reported honestly.
    """
    n = f.num_vars
    expected = {tuple(1 if j == n - 1 else 0 for j in range(n))}
    if set(seed.coeffs) != expected or not all(
            s.terms == {(0,) * n: Fraction(1)} for s in seed.coeffs.values()):
        raise ValueError("seed must be the last-variable symbol generator")
    g = Symbol.from_series(f)
    for step in range(steps + 1):
        remaining = f.precision - step
        if g.constant_term:
            return ChainProbeResult("unit_reached", step, g, remaining)
        if g.is_zero() and remaining > 0:
            # zero with coefficients still known: the chain stays zero
            return ChainProbeResult("stable", step, g, remaining)
        if step == steps or remaining < 1:
            return ChainProbeResult("budget_exhausted", step, g,
                                    max(remaining, 0))
        zeta = Symbol.zeta(n, n, remaining)
        g = poisson_bracket(zeta, g)
    raise AssertionError("unreachable")
