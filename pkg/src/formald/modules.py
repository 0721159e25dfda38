"""Desk-scale module presentations the de Rham machinery operates on.

Three variants: the ring itself, a localization at a nonzero series with a
pole-order budget, and a rank-r presentation by connection matrices.
Elements are plain series, LocElement fractions, or tuples of series.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import NonIntegrable, PoleBudgetExceeded, WrongVariant
from .series import Series, try_divide

STRUCTURE = "structure"
LOCALIZATION = "localization"
CONNECTION = "connection"


class ModulePresentation:
    """One of: the ring R, a localization R_f, or connection matrices."""

    __slots__ = ("kind", "num_vars", "f", "pole_bound", "rank", "matrices")

    def __init__(self, kind, num_vars, f=None, pole_bound=None,
                 rank=None, matrices=None):
        self.kind = kind
        self.num_vars = num_vars
        self.f = f
        self.pole_bound = pole_bound
        self.rank = rank
        self.matrices = matrices

    @classmethod
    def structure(cls, num_vars):
        """The ring itself, i.e. the rank-1 connection with zero matrices."""
        return cls(STRUCTURE, num_vars)

    @classmethod
    def localization(cls, f, pole_bound):
        if f.is_zero():
            raise ValueError("cannot localize at a series that is zero to precision")
        if pole_bound < 0:
            raise ValueError("pole bound must be >= 0")
        return cls(LOCALIZATION, f.num_vars, f=f, pole_bound=pole_bound)

    @classmethod
    def connection(cls, matrices):
        matrices = tuple(tuple(tuple(row) for row in m) for m in matrices)
        num_vars = len(matrices)
        if num_vars == 0:
            raise ValueError("need one matrix per variable")
        rank = len(matrices[0])
        for m in matrices:
            if len(m) != rank or any(len(row) != rank for row in m):
                raise ValueError("connection matrices must be square of equal size")
            for row in m:
                for entry in row:
                    if entry.num_vars != num_vars:
                        raise ValueError("matrix entry has wrong variable count")
        return cls(CONNECTION, num_vars, rank=rank, matrices=matrices)

    def describe(self):
        if self.kind == STRUCTURE:
            return "R"
        if self.kind == LOCALIZATION:
            return f"R_loc({self.f})"
        return f"conn(rank {self.rank})"

    def __repr__(self):
        return f"ModulePresentation<{self.describe()}, n={self.num_vars}>"


@dataclass(frozen=True)
class LocElement:
    """numerator / f^pole_order inside a localization presentation."""

    numerator: Series
    pole_order: int

    def __str__(self):
        if self.pole_order == 0:
            return str(self.numerator)
        return f"({self.numerator}) / f^{self.pole_order}"


@dataclass(frozen=True)
class IntegrabilityReport:
    integrable: bool
    witness: tuple | None  # (axis_i, axis_j, row, col, residual series)
    precision: int


def check_integrability(module):
    """Flatness residual d_i(A_j) - d_j(A_i) + A_i A_j - A_j A_i per pair.

    Returns the first violating entry in deterministic order, or a clean
    report when the residual vanishes to precision.
    """
    if module.kind != CONNECTION:
        raise WrongVariant("integrability applies to connection presentations")
    n, r = module.num_vars, module.rank
    precision = None
    witness = None
    for i in range(1, n + 1):
        for j in range(i + 1, n + 1):
            ai = module.matrices[i - 1]
            aj = module.matrices[j - 1]
            for row in range(r):
                for col in range(r):
                    entry = ai[row][col].partial(j) - aj[row][col].partial(i)
                    for k in range(r):
                        entry = entry + ai[row][k] * aj[k][col]
                        entry = entry - aj[row][k] * ai[k][col]
                    if precision is None or entry.precision < precision:
                        precision = entry.precision
                    if not entry.is_zero() and witness is None:
                        witness = (i, j, row, col, entry)
    return IntegrabilityReport(integrable=witness is None, witness=witness,
                               precision=precision if precision is not None else 0)


def loc_partial_raw(numerator, f, pole_order, axis):
    """Quotient rule without normalization:
    d(g/f^k) = (d(g) f - k g d(f)) / f^{k+1} for k >= 1."""
    if pole_order == 0:
        return numerator.partial(axis), 0
    new = numerator.partial(axis) * f - numerator * f.partial(axis) * pole_order
    return new, pole_order + 1


def loc_normalize(element, f):
    """Strip every f-factor of the numerator detectable at precision."""
    numerator, pole = element.numerator, element.pole_order
    while pole > 0:
        if numerator.is_zero():
            pole = 0
            break
        quotient = try_divide(numerator, f)
        if quotient is None:
            break
        numerator, pole = quotient, pole - 1
    return LocElement(numerator, pole)


def partial_action(module, element, axis):
    """The derivative action in the given presentation.

    Localization elements are normalized afterwards and must stay within
    the pole budget; connection elements get the matrix correction.
    """
    if module.kind == STRUCTURE:
        return element.partial(axis)
    if module.kind == LOCALIZATION:
        numerator, pole = loc_partial_raw(element.numerator, module.f,
                                          element.pole_order, axis)
        result = loc_normalize(LocElement(numerator, pole), module.f)
        if result.pole_order > module.pole_bound:
            raise PoleBudgetExceeded(
                f"pole order {result.pole_order} exceeds budget {module.pole_bound}")
        return result
    if module.kind == CONNECTION:
        a = module.matrices[axis - 1]
        out = []
        for row in range(module.rank):
            entry = element[row].partial(axis)
            for col in range(module.rank):
                entry = entry + a[row][col] * element[col]
            out.append(entry)
        return tuple(out)
    raise WrongVariant(f"unknown presentation kind {module.kind}")


def scalar_action(module, element, series):
    """Multiplication by a ring element in the given presentation."""
    if module.kind == STRUCTURE:
        return series * element
    if module.kind == LOCALIZATION:
        return LocElement(series * element.numerator, element.pole_order)
    if module.kind == CONNECTION:
        return tuple(series * component for component in element)
    raise WrongVariant(f"unknown presentation kind {module.kind}")


def require_integrable(module):
    if module.kind == CONNECTION:
        report = check_integrability(module)
        if not report.integrable:
            i, j, row, col, entry = report.witness
            raise NonIntegrable(
                f"flatness fails at pair ({i},{j}) entry ({row},{col}): {entry}")
