"""Normal-form operator arithmetic, principal symbols, the tau calculus."""

import random
from fractions import Fraction

import pytest

from formald.errors import ZeroOperator
from formald.series import Series
from formald.symbols import Symbol
from formald.weyl import DiffOp, TauOp, commutator, op_product, order_of

from conftest import diffop_agree, random_series, series_agree


def random_op(rng, num_vars, precision, max_order=2, density=0.5):
    coeffs = {}
    from formald.series import monomials_upto
    for alpha in monomials_upto(num_vars, max_order):
        if rng.random() < density:
            s = random_series(rng, num_vars, precision, degree=2)
            if not s.is_zero():
                coeffs[alpha] = s
    if not coeffs:
        coeffs[(0,) * num_vars] = Series.one(num_vars, precision)
    return DiffOp(num_vars, coeffs)


def test_commutation_relation():
    d = DiffOp.partial(1, 1, 8)
    xop = DiffOp.from_series(Series.variable(1, 1, 8))
    prod = op_product(d, xop)
    expected = xop * d + DiffOp.from_series(Series.one(1, 7))
    assert diffop_agree(prod, expected)


def test_left_coefficients_already_normal():
    d = DiffOp.partial(1, 1, 8)
    xop = DiffOp.from_series(Series.variable(1, 1, 8))
    prod = op_product(xop, d)
    assert set(prod.coeffs) == {(1,)}
    assert prod.coeffs[(1,)] == Series.variable(1, 1, 8)


def test_product_matches_action_composition():
    rng = random.Random(20)
    for _ in range(20):
        n = rng.choice([1, 2])
        a = random_op(rng, n, 10)
        b = random_op(rng, n, 10)
        g = random_series(rng, n, 10)
        via_product = op_product(a, b).apply(g)
        via_actions = a.apply(b.apply(g))
        assert series_agree(via_product, via_actions)


def test_apply_basics():
    d = DiffOp.partial(1, 1, 9)
    t = Series.variable(1, 1, 9)
    assert d.apply(t ** 3) == (3 * t * t).truncate(8)
    euler = op_product(DiffOp.from_series(t), d)
    for i in range(1, 6):
        assert series_agree(euler.apply(t ** i), i * t ** i)


def test_apply_leibniz_expansion():
    # (f d)^2 = f d(f) d + f^2 d^2 as actions
    rng = random.Random(21)
    for _ in range(10):
        f = random_series(rng, 1, 10)
        g = random_series(rng, 1, 10)
        d = DiffOp.partial(1, 1, 10)
        fd = DiffOp.from_series(f) * d
        lhs = op_product(fd, fd).apply(g)
        rhs = f * f.partial(1) * g.partial(1) + f * f * g.partial(1).partial(1)
        assert series_agree(lhs, rhs)


def test_order():
    n, prec = 2, 6
    d1 = DiffOp.partial(n, 1, prec)
    d2 = DiffOp.partial(n, 2, prec)
    assert order_of(op_product(d1, d2)) == 2
    assert order_of(DiffOp.from_series(Series.variable(n, 1, prec) ** 5)) == 0
    f = random_series(random.Random(22), n, prec)
    op = DiffOp.from_series(f) * (d2 * d2) + d1
    assert order_of(op) == 2
    with pytest.raises(ZeroOperator):
        order_of(DiffOp.zero(n))


def test_principal_symbol_examples():
    n, prec = 2, 8
    d2 = DiffOp.partial(n, 2, prec)
    assert d2.principal_symbol() == Symbol.zeta(n, 2, prec)
    f = Series.variable(n, 1, prec)
    op = DiffOp.from_series(f) * (d2 * d2) + DiffOp.partial(n, 1, prec)
    sym = op.principal_symbol()
    assert sym == Symbol(n, {(0, 2): f})


def test_symbol_of_twisted_derivation_powers():
    rng = random.Random(23)
    n, prec = 2, 12
    d2 = DiffOp.partial(n, 2, prec)
    for q in range(1, 5):
        f = random_series(rng, n, prec, degree=2)
        if f.is_zero():
            continue
        fd = DiffOp.from_series(f) * d2
        sym = (fd ** q).principal_symbol()
        fz = Symbol(n, {(0, 1): f})
        assert sym == fz ** q


def test_commutator_examples():
    n, prec = 2, 8
    d1, d2 = DiffOp.partial(n, 1, prec), DiffOp.partial(n, 2, prec)
    x1 = Series.variable(n, 1, prec)
    x2 = Series.variable(n, 2, prec)
    one = commutator(DiffOp.partial(1, 1, prec),
                     DiffOp.from_series(Series.variable(1, 1, prec)))
    assert diffop_agree(one, DiffOp.from_series(Series.one(1, prec)))
    assert commutator(d1, d2).is_zero()
    got = commutator(op_product(d1, d2), DiffOp.from_series(x1 * x2))
    expected = (DiffOp.from_series(x1) * d1 + DiffOp.from_series(x2) * d2
                + DiffOp.from_series(Series.one(n, prec)))
    assert diffop_agree(got, expected)


def test_product_associativity():
    rng = random.Random(24)
    for _ in range(15):
        n = rng.choice([1, 2])
        a, b, c = (random_op(rng, n, 9, max_order=1) for _ in range(3))
        assert diffop_agree(op_product(op_product(a, b), c),
                            op_product(a, op_product(b, c)))


def test_normal_form_faithful_on_actions():
    rng = random.Random(25)
    for _ in range(100):
        n = rng.choice([1, 2])
        a = random_op(rng, n, 8, max_order=1, density=0.4)
        b = random_op(rng, n, 8, max_order=1, density=0.4)
        g = random_series(rng, n, 8, degree=3)
        assert series_agree(op_product(a, b).apply(g), a.apply(b.apply(g)))


def test_symbol_multiplicativity_when_orders_add():
    rng = random.Random(26)
    checked = 0
    while checked < 30:
        n = 2
        a = random_op(rng, n, 8, max_order=2)
        b = random_op(rng, n, 8, max_order=2)
        ab = op_product(a, b)
        if ab.is_zero() or ab.order != a.order + b.order:
            continue
        assert ab.principal_symbol() == a.principal_symbol() * b.principal_symbol()
        checked += 1


# -- tau calculus -----------------------------------------------------------


def test_tau_expand_generator():
    f = Series.variable(1, 1, 10)
    tau = TauOp.tau(f)
    expanded = tau.expand()
    expected = DiffOp.from_series(f) * DiffOp.partial(1, 1, 10)
    assert diffop_agree(expanded, expected)


def test_tau_square_euler():
    f = Series.variable(1, 1, 10)
    tau = TauOp.tau(f)
    sq = (tau * tau).expand()
    x = f
    d = DiffOp.partial(1, 1, 10)
    expected = DiffOp.from_series(x * x) * (d * d) + DiffOp.from_series(x) * d
    assert diffop_agree(sq, expected)
    for i in range(1, 5):
        assert series_agree(sq.apply(x ** i), (i * i) * x ** i)


def test_constant_tau_op_is_multiplication():
    rng = random.Random(27)
    f = Series.variable(1, 1, 9)
    g = random_series(rng, 1, 9)
    op = TauOp.from_series(f, g)
    h = random_series(rng, 1, 9)
    assert series_agree(op.apply(h), g * h)


def test_transpose_of_tau_is_minus_tau():
    f = Series.variable(1, 1, 10)
    tau = TauOp.tau(f)
    got = tau.transpose()
    expected = -tau
    for i in range(2):
        assert series_agree(got.coefficient(i), expected.coefficient(i))


def test_transpose_of_tau_powers():
    f = Series.variable(1, 1, 16)
    tau = TauOp.tau(f)
    power = tau
    for p in range(2, 6):
        power = power * tau
        transposed = power.transpose()
        sign = -1 if p % 2 else 1
        expected = power * sign
        for i in range(len(power.coeffs)):
            assert series_agree(transposed.coefficient(i),
                                expected.coefficient(i))


def test_transpose_of_series_times_tau():
    # (g tau)* = -g tau - tau(g)
    rng = random.Random(28)
    for _ in range(10):
        f = random_series(rng, 2, 10, unit=rng.random() < 0.5)
        if f.is_zero():
            continue
        g = random_series(rng, 2, 10)
        tau = TauOp.tau(f)
        gtau = TauOp.from_series(f, g) * tau
        got = gtau.transpose()
        tau_g = f * g.partial(2)
        assert series_agree(got.coefficient(0), -tau_g)
        assert series_agree(got.coefficient(1), -g)


def test_transpose_is_involution():
    rng = random.Random(29)
    for _ in range(20):
        f = random_series(rng, 1, 14, unit=True)
        coeffs = [random_series(rng, 1, 14, degree=2) for _ in range(3)]
        s = TauOp(f, coeffs)
        back = s.transpose().transpose()
        for i in range(max(len(s.coeffs), len(back.coeffs))):
            assert series_agree(s.coefficient(i), back.coefficient(i),
                                precision=8)


def test_right_multiplication_congruence():
    # residue(g*S) modulo tau-multiples equals the transpose acting on g
    rng = random.Random(30)
    for _ in range(50):
        f = random_series(rng, 1, 12, unit=True)
        g = random_series(rng, 1, 12, degree=3)
        coeffs = [random_series(rng, 1, 12, degree=2) for _ in range(3)]
        s = TauOp(f, coeffs)
        left = TauOp.from_series(f, g) * s         # the element g*S
        assert series_agree(left.residue(), s.transpose().apply(g),
                            precision=8)
