"""Finite-generation probes for iterates of twisted derivations, and the
desk-scale verifiers for the kernel/cokernel lemmas.

Everything here is a truncated linear-algebra question about elements of a
module presentation: iterates tau^i(m) for tau = f*d_n, dependence
relations with series coefficients, homogeneous components of relations
among kernel elements, and coverage of a cyclic module by a finitely
generated slice plus the image of d_n.  All verdicts are three-valued
(yes at truncation / no evidence within budget / inconclusive); finite
data can support the underlying statements but never refute them.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .errors import PoleBudgetExceeded, PreconditionViolated
from .linalg import ColumnEchelon
from .modules import (CONNECTION, LOCALIZATION, STRUCTURE, LocElement,
                      ModulePresentation, loc_partial_raw, partial_action,
                      scalar_action)
from .series import Series, is_xn_regular, monomials_upto, xn_coefficient


class TruncatedSpace:
    """Common coordinates for comparing module elements at a truncation.

    Localization elements are put over the common denominator f^pole;
    the stored terms of f are treated as an exact polynomial."""

    def __init__(self, module, trunc, pole=None):
        self.module = module
        self.trunc = trunc
        self.num_vars = module.num_vars
        if module.kind == LOCALIZATION:
            if pole is None:
                pole = module.pole_bound
            self.pole = pole
            self.f_terms = dict(module.f.terms)
            self.f_deg = max((sum(e) for e in self.f_terms), default=0)
            self.f_ord = min((sum(e) for e in self.f_terms), default=0)
            self.bound = trunc + pole * self.f_deg
        else:
            self.pole = None
            self.bound = trunc
        if module.kind == CONNECTION:
            labels = [(comp, e) for e in monomials_upto(self.num_vars, self.bound)
                      for comp in range(module.rank)]
        else:
            labels = monomials_upto(self.num_vars, self.bound)
        self.labels = labels
        self.index = {lab: i for i, lab in enumerate(labels)}

    def key_degree(self, label):
        if self.module.kind == CONNECTION:
            return sum(label[1])
        return sum(label)

    def embed(self, element):
        """Coordinates of an element plus the degree its data is exact to."""
        if self.module.kind == STRUCTURE:
            vec = {self.index[e]: c for e, c in element.terms.items()
                   if sum(e) <= self.bound}
            return vec, min(element.precision, self.bound)
        if self.module.kind == CONNECTION:
            vec = {}
            known = self.bound
            for comp, series in enumerate(element):
                known = min(known, series.precision)
                for e, c in series.terms.items():
                    if sum(e) <= self.bound:
                        vec[self.index[(comp, e)]] = c
            return vec, known
        # localization: numerator * f^(pole - k) over f^pole
        if element.pole_order > self.pole:
            raise PoleBudgetExceeded(
                f"element pole {element.pole_order} exceeds space pole {self.pole}")
        steps = self.pole - element.pole_order
        terms = {e: c for e, c in element.numerator.terms.items()
                 if sum(e) <= self.bound}
        for _ in range(steps):
            new = {}
            for e, c in terms.items():
                for ef, cf in self.f_terms.items():
                    key = tuple(a + b for a, b in zip(e, ef))
                    if sum(key) > self.bound:
                        continue
                    acc = new.get(key, Fraction(0)) + c * cf
                    if acc:
                        new[key] = acc
                    else:
                        del new[key]
            terms = new
        known = min(element.numerator.precision + steps * self.f_ord, self.bound)
        vec = {self.index[e]: c for e, c in terms.items()}
        return vec, known

    def restrict(self, vec, degree):
        return {i: c for i, c in vec.items()
                if self.key_degree(self.labels[i]) <= degree}


def _tau_apply(module, f, element, axis=None):
    """tau(e) = f * d_n(e) in the given presentation."""
    axis = module.num_vars if axis is None else axis
    return scalar_action(module, partial_action(module, element, axis), f)


def _monomial_series(num_vars, exps, precision):
    return Series.monomial(num_vars, exps, precision)


@dataclass
class RecurrenceReport:
    """Least p with tau^p(m) = sum_{i<p} r_i tau^i(m) at truncation."""

    order: int | None
    coefficients: tuple | None
    p_max: int
    trunc: int
    pole: int | None
    degree_checked: int | None

    def found(self):
        return self.order is not None


def _working_module(module, pole):
    if module.kind == LOCALIZATION and pole is not None:
        return ModulePresentation.localization(module.f, pole)
    return module


def iterate_recurrence(module, element, f, p_max, trunc, pole=None):
    """Search for an R-linear recurrence among the iterates of f*d_n.

    Coefficients are sought degree by degree (so the first hit is the
    minimal-degree relation) and the comparison only uses coordinates
    exact at the available precision; the report carries that degree."""
    work = _working_module(module, pole)
    space = TruncatedSpace(work, trunc, pole)
    iterates = [element]
    for _ in range(p_max):
        iterates.append(_tau_apply(work, f, iterates[-1]))
    embedded = []
    known = space.bound
    for it in iterates:
        vec, k = space.embed(it)
        embedded.append(vec)
        known = min(known, k)
    mult_cache = {}

    def column(i, mu):
        if (i, mu) not in mult_cache:
            series = _monomial_series(space.num_vars, mu, trunc)
            vec, k = space.embed(scalar_action(work, iterates[i], series))
            mult_cache[(i, mu)] = (vec, k)
        return mult_cache[(i, mu)]

    for p in range(1, p_max + 1):
        cols = []
        labels = []
        degree_known = known
        for i in range(p):
            for mu in monomials_upto(space.num_vars, trunc):
                vec, k = column(i, mu)
                degree_known = min(degree_known, k)
                cols.append((sum(mu), i, mu, vec))
        cols.sort(key=lambda item: (item[0], item[1], item[2]))
        target = space.restrict(embedded[p], degree_known)
        ech = ColumnEchelon()
        count = 0
        solution = None
        by_degree = {}
        for deg, i, mu, vec in cols:
            by_degree.setdefault(deg, []).append((i, mu, vec))
        for deg in sorted(by_degree):
            for i, mu, vec in by_degree[deg]:
                ech.add(space.restrict(vec, degree_known), count)
                labels.append((i, mu))
                count += 1
            combo = ech.express(target)
            if combo is not None:
                solution = combo
                break
        if solution is None:
            continue
        coefficients = [Series.zero(space.num_vars, trunc) for _ in range(p)]
        for pos, value in sorted(solution.items()):
            i, mu = labels[pos]
            coefficients[i] = coefficients[i] + _monomial_series(
                space.num_vars, mu, trunc) * value
        return RecurrenceReport(order=p, coefficients=tuple(coefficients),
                                p_max=p_max, trunc=trunc, pole=space.pole,
                                degree_checked=degree_known)
    return RecurrenceReport(order=None, coefficients=None, p_max=p_max,
                            trunc=trunc, pole=space.pole, degree_checked=known)


@dataclass
class RegularElementVerdict:
    status: str                    # "yes", "no-evidence", or "inconclusive"
    recurrence: RecurrenceReport | None
    f_regular_order: int | None
    certified_to_precision: int


def xn_regular_element_check(module, element, f, p_max, trunc, pole=None):
    """Is the element regular for the last variable, witnessed by f?

    yes: f is x_n-regular and a recurrence was found; no-evidence: f is
    regular but no recurrence exists within budget; inconclusive: the
    regularity of f itself cannot be certified from its precision."""
    reg = is_xn_regular(f)
    if reg.order is None:
        return RegularElementVerdict("inconclusive", None, None,
                                     reg.certified_to_precision)
    report = iterate_recurrence(module, element, f, p_max, trunc, pole)
    status = "yes" if report.found() else "no-evidence"
    return RegularElementVerdict(status, report, reg.order,
                                 reg.certified_to_precision)


@dataclass
class PowerSearchReport:
    found_s: int | None
    s_max: int
    recurrence: RecurrenceReport | None


def power_search(module, element, f, s_max, p_max, trunc, pole=None):
    """Least s such that f^s * d_n admits an iterate recurrence at budget."""
    for s in range(s_max + 1):
        twist = f ** s
        report = iterate_recurrence(module, element, twist, p_max, trunc, pole)
        if report.found():
            return PowerSearchReport(found_s=s, s_max=s_max, recurrence=report)
    return PowerSearchReport(found_s=None, s_max=s_max, recurrence=None)


@dataclass
class KernelRelationReport:
    passed: bool
    failed_index: int | None
    degree_checked: int


def kernel_relation_homogeneity(module, elements, coefficients, trunc, pole=None):
    """Check that a relation sum f_i m_i = 0 among kernel elements of d_n
    holds in every x_n-homogeneous component.

    The preconditions (each m_i killed by d_n, and the relation itself)
    are verified first; a component failure on honest inputs indicates a
    truncation artifact or caller error, so it is reported, never
    interpreted as a counterexample."""
    if len(elements) != len(coefficients):
        raise ValueError("need one coefficient per element")
    work = _working_module(module, pole)
    space = TruncatedSpace(work, trunc, pole)
    n = space.num_vars
    known = space.bound
    for m in elements:
        vec, k = space.embed(partial_action(work, m, n))
        known = min(known, k)
        if space.restrict(vec, known):
            raise PreconditionViolated("an element is not killed by d_n at truncation")
    total = {}
    for f_i, m in zip(coefficients, elements):
        vec, k = space.embed(scalar_action(work, m, f_i))
        known = min(known, k)
        for pos, c in vec.items():
            acc = total.get(pos, Fraction(0)) + c
            if acc:
                total[pos] = acc
            else:
                del total[pos]
    if space.restrict(total, known):
        raise PreconditionViolated("the relation does not vanish at truncation")
    for j in range(trunc + 1):
        component = {}
        comp_known = known
        for f_i, m in zip(coefficients, elements):
            fij = xn_coefficient(f_i, j)
            vec, k = space.embed(scalar_action(work, m, fij.lift(n)))
            comp_known = min(comp_known, k)
            for pos, c in vec.items():
                acc = component.get(pos, Fraction(0)) + c
                if acc:
                    component[pos] = acc
                else:
                    del component[pos]
        if space.restrict(component, comp_known):
            return KernelRelationReport(passed=False, failed_index=j,
                                        degree_checked=known)
    return KernelRelationReport(passed=True, failed_index=None,
                                degree_checked=known)


@dataclass
class CoverReport:
    """Evidence that R*m sits inside a finitely generated slice plus d_n(M)."""

    status: str                 # "yes", "no-evidence", or "inconclusive"
    slice_bound: int | None     # largest x_n-power of m used as a generator
    generator_texts: tuple
    recurrence_order: int | None
    trunc: int
    pole: int | None


def cover_check(module, element, f, trunc, pole=None, p_max=8, slice_max=6):
    """Verify R*m subset E0 + d_n(M) at truncation, where E0 is the module
    generated over the first n-1 variables by m, x_n m, ..., x_n^a m.

    The x_n-power slice is grown until every monomial multiple of m up to
    the truncation degree lies in the span of the slice columns and the
    d_n-image columns; the successful bound is reported."""
    verdict = xn_regular_element_check(module, element, f, p_max, trunc, pole)
    if verdict.status != "yes":
        return CoverReport(status="inconclusive", slice_bound=None,
                           generator_texts=(), recurrence_order=None,
                           trunc=trunc, pole=pole)
    work = _working_module(module, pole)
    space = TruncatedSpace(work, trunc, pole)
    n = space.num_vars

    known = space.bound
    targets = []
    for e in monomials_upto(n, trunc):
        vec, k = space.embed(scalar_action(work, element,
                                           _monomial_series(n, e, trunc + 1)))
        known = min(known, k)
        targets.append((e, vec))

    ech = ColumnEchelon()
    count = 0
    # image-of-d_n columns
    for w_vec, k in _dn_image_columns(work, space, trunc):
        known = min(known, k)
        ech.add(space.restrict(w_vec, known), count)
        count += 1

    slice_cols = {}
    for a in range(slice_max + 1):
        xn_a = (0,) * (n - 1) + (a,)
        base = scalar_action(work, element, _monomial_series(n, xn_a, trunc + 1))
        cols = []
        for mu in monomials_upto(n - 1, trunc):
            series = _monomial_series(n, tuple(mu) + (0,), trunc + 1)
            vec, k = space.embed(scalar_action(work, base, series))
            known = min(known, k)
            cols.append(vec)
        slice_cols[a] = cols

    for a in range(slice_max + 1):
        for vec in slice_cols[a]:
            ech.add(space.restrict(vec, known), count)
            count += 1
        if all(ech.contains(space.restrict(vec, known)) for _, vec in targets):
            texts = tuple("m" if b == 0 else
                          (f"x{n}*m" if b == 1 else f"x{n}^{b}*m")
                          for b in range(a + 1))
            return CoverReport(status="yes", slice_bound=a,
                               generator_texts=texts,
                               recurrence_order=verdict.recurrence.order,
                               trunc=trunc, pole=space.pole)
    return CoverReport(status="no-evidence", slice_bound=None,
                       generator_texts=(),
                       recurrence_order=verdict.recurrence.order,
                       trunc=trunc, pole=space.pole)


def _dn_image_columns(module, space, trunc):
    """Columns spanning d_n(M) inside the comparison space."""
    n = space.num_vars
    cols = []
    if module.kind == STRUCTURE:
        for e in monomials_upto(n, trunc + 1):
            if e[-1] == 0:
                continue
            series = _monomial_series(n, e, trunc + 1)
            cols.append(space.embed(series.partial(n)))
    elif module.kind == LOCALIZATION:
        k = space.pole - 1
        if k < 0:
            return cols
        w_bound = space.trunc + k * space.f_deg + space.f_deg
        for e in monomials_upto(n, w_bound):
            numerator = _monomial_series(n, e, w_bound + space.f_deg + 1)
            new, new_pole = loc_partial_raw(numerator, module.f, k, n)
            cols.append(space.embed(LocElement(new, new_pole)))
    else:  # connection
        for comp in range(module.rank):
            for e in monomials_upto(n, trunc + 1):
                series = _monomial_series(n, e, trunc + 1)
                w = tuple(series if c == comp else
                          Series.zero(n, trunc + 1) for c in range(module.rank))
                cols.append(space.embed(partial_action(module, w, n)))
    return cols
