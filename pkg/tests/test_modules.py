"""Module presentations: integrability, derivative actions, normalization."""

import random

import pytest

from formald.errors import PoleBudgetExceeded, WrongVariant
from formald.modules import (LocElement, ModulePresentation,
                             check_integrability, loc_normalize,
                             partial_action, scalar_action)
from formald.series import Series

from conftest import random_series, series_agree


def test_zero_connection_is_integrable():
    n, prec = 2, 6
    zero = Series.zero(n, prec)
    M = ModulePresentation.connection([[[zero]], [[zero]]])
    assert check_integrability(M).integrable


def test_exponential_twist_is_integrable():
    n, prec = 2, 8
    g = Series.variable(n, 1, prec) * Series.variable(n, 2, prec)
    M = ModulePresentation.connection([[[g.partial(1)]], [[g.partial(2)]]])
    assert check_integrability(M).integrable


def test_noncommuting_matrices_fail_integrability():
    n, prec = 2, 6
    zero = Series.zero(n, prec)
    one = Series.one(n, prec)
    a1 = [[zero, one], [zero, zero]]
    a2 = [[zero, zero], [one, zero]]
    M = ModulePresentation.connection([a1, a2])
    report = check_integrability(M)
    assert not report.integrable
    assert report.witness is not None


def test_integrability_needs_connection():
    with pytest.raises(WrongVariant):
        check_integrability(ModulePresentation.structure(2))


def test_partial_action_on_localization():
    prec = 10
    x = Series.variable(1, 1, prec)
    M = ModulePresentation.localization(x, 4)
    e = LocElement(Series.one(1, prec), 1)             # 1/x
    d = partial_action(M, e, 1)
    assert d.pole_order == 2
    assert series_agree(d.numerator, -Series.one(1, prec))

    n2 = 2
    x1 = Series.variable(n2, 1, prec)
    x2 = Series.variable(n2, 2, prec)
    M2 = ModulePresentation.localization(x1, 4)
    e2 = LocElement(x2, 1)                             # x2/x1
    d2 = partial_action(M2, e2, 1)
    assert d2.pole_order == 2
    assert series_agree(d2.numerator, -x2)


def test_partial_action_cancels_pole():
    prec = 10
    x = Series.variable(1, 1, prec)
    M = ModulePresentation.localization(x, 2)
    e = LocElement(x * x, 1)                           # x^2/x
    d = partial_action(M, e, 1)
    assert d.pole_order == 0
    assert series_agree(d.numerator, Series.one(1, prec))


def test_loc_normalize():
    prec = 9
    x = Series.variable(1, 1, prec)
    f = x
    e = loc_normalize(LocElement(x, 1), f)
    assert e.pole_order == 0 and series_agree(e.numerator, Series.one(1, prec))
    e = loc_normalize(LocElement(x * x, 2), f)
    assert e.pole_order == 0 and series_agree(e.numerator, Series.one(1, prec))
    rng = random.Random(50)
    g = random_series(rng, 1, prec)
    e = loc_normalize(LocElement(x * g, 1), f)
    assert e.pole_order == 0
    assert series_agree(e.numerator, g)
    # idempotence
    again = loc_normalize(e, f)
    assert again == e


def test_pole_budget_enforced():
    prec = 8
    x = Series.variable(1, 1, prec)
    M = ModulePresentation.localization(x, 1)
    e = LocElement(Series.one(1, prec), 1)
    with pytest.raises(PoleBudgetExceeded):
        partial_action(M, e, 1)


def test_mixed_partials_commute_on_localization():
    rng = random.Random(51)
    prec = 12
    n = 2
    x1 = Series.variable(n, 1, prec)
    x2 = Series.variable(n, 2, prec)
    M = ModulePresentation.localization(x1 * x2 + x1, 8)
    for _ in range(10):
        e = LocElement(random_series(rng, n, prec, degree=3), rng.randint(0, 2))
        d12 = partial_action(M, partial_action(M, e, 1), 2)
        d21 = partial_action(M, partial_action(M, e, 2), 1)
        space_prec = min(d12.numerator.precision, d21.numerator.precision)
        # compare over the common denominator
        k = max(d12.pole_order, d21.pole_order)
        lhs = d12.numerator * (M.f ** (k - d12.pole_order))
        rhs = d21.numerator * (M.f ** (k - d21.pole_order))
        assert series_agree(lhs, rhs, precision=space_prec - 2)


def test_leibniz_on_localization():
    rng = random.Random(52)
    prec = 12
    x = Series.variable(1, 1, prec)
    M = ModulePresentation.localization(x, 8)
    for _ in range(10):
        r = random_series(rng, 1, prec, degree=3)
        e = LocElement(random_series(rng, 1, prec, degree=3), rng.randint(0, 3))
        lhs = partial_action(M, scalar_action(M, e, r), 1)
        d_e = partial_action(M, e, 1)
        rhs_a = scalar_action(M, e, r.partial(1))
        rhs_b = scalar_action(M, d_e, r)
        k = max(lhs.pole_order, rhs_a.pole_order, rhs_b.pole_order)
        combine = (rhs_a.numerator * x ** (k - rhs_a.pole_order)
                   + rhs_b.numerator * x ** (k - rhs_b.pole_order))
        assert series_agree(lhs.numerator * x ** (k - lhs.pole_order),
                            combine, precision=prec - 5)


def test_connection_action():
    n, prec = 2, 8
    zero = Series.zero(n, prec)
    one = Series.one(n, prec)
    # rank-2 with A_1 upper triangular constant: integrable with A_2 = 0
    a1 = [[zero, one], [zero, zero]]
    a2 = [[zero, zero], [zero, zero]]
    M = ModulePresentation.connection([a1, a2])
    assert check_integrability(M).integrable
    v = (Series.variable(n, 1, prec), Series.one(n, prec))
    out = partial_action(M, v, 1)
    assert series_agree(out[0], 2 * Series.one(n, prec))
    assert out[1].is_zero()
