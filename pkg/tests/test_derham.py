"""Truncated de Rham complexes: exact differentials, dimensions, ladders."""

import random
from fractions import Fraction

import pytest

from formald.derham import (build_complex, cohomology_dims, cokernel_of_dn,
                            kernel_of_dn, les_consistency,
                            stable_cohomology_dims, stabilized_dims)
from formald.errors import NonIntegrable
from formald.linalg import intersection_dim
from formald.modules import ModulePresentation
from formald.series import (LinearSubstitution, Series,
                            apply_linear_substitution)

from conftest import random_series


def test_structure_dzero_shape():
    M = ModulePresentation.structure(1)
    C = build_complex(M, 4)
    d0 = C.differentials[0]
    assert d0.ncols == 5 and d0.nrows == 4     # x^0..x^4 -> x^0..x^3
    # x^i maps to i*x^{i-1}
    assert d0.cols[3] == {2: Fraction(3)}
    assert d0.cols[0] == {}


def test_d_squared_zero_structure():
    M = ModulePresentation.structure(3)
    C = build_complex(M, 5)
    for j in range(len(C.differentials) - 1):
        assert C.differentials[j + 1].compose(C.differentials[j]).is_zero()


def test_localization_dzero_sends_inverse_to_derivative():
    x = Series.variable(1, 1, 30)
    M = ModulePresentation.localization(x, 3)
    C = build_complex(M, 4, 3)
    # level-0 basis is x^e/f^3; the element x^2/f^3 = 1/x maps to -1/x^2,
    # i.e. to -1 * x^2/f^4 at level 1
    labels0 = [lab for lab, _ in C.space_labels[0]]
    labels1 = [lab for lab, _ in C.space_labels[1]]
    src = labels0.index("(x1^2)/f^3")
    dst = labels1.index("(x1^2)/f^4")
    assert C.differentials[0].cols[src] == {dst: Fraction(-1)}


def test_dims_structure():
    for n in (1, 2):
        M = ModulePresentation.structure(n)
        report = cohomology_dims(build_complex(M, 6))
        assert report.dims == (1,) + (0,) * n


def test_dims_localization_single_run_matches_deepening():
    x = Series.variable(1, 1, 30)
    M = ModulePresentation.localization(x, 4)
    a = stable_cohomology_dims(M, 6, 4)
    b = stable_cohomology_dims(M, 8, 5)
    assert a.dims == b.dims == (1, 1)


def test_stabilized_dims_product_of_lines():
    # R localized at x1*x2 behaves like the product of two punctured lines:
    # the one-variable answers (1,1) give (1, 2, 1)
    x1 = Series.variable(2, 1, 40)
    x2 = Series.variable(2, 2, 40)
    M = ModulePresentation.localization(x1 * x2, 4)
    report = stabilized_dims(M, [(6, 4), (8, 5)])
    assert report.dims == (1, 2, 1)
    assert all(report.stabilized)


def test_stabilized_dims_partial_localization():
    x1 = Series.variable(2, 1, 40)
    M = ModulePresentation.localization(x1, 4)
    report = stabilized_dims(M, [(6, 4), (8, 5)])
    assert report.dims == (1, 1, 0)
    assert all(report.stabilized)


def test_smooth_hypersurface_matches_linear_model():
    # x2^2 + x1 is a coordinate away from x1: the dims must agree
    x1 = Series.variable(2, 1, 40)
    x2 = Series.variable(2, 2, 40)
    M = ModulePresentation.localization(x2 * x2 + x1, 3)
    report = stabilized_dims(M, [(6, 3), (8, 4)])
    assert report.dims == (1, 1, 0)


def test_monotone_under_budget_growth():
    x = Series.variable(1, 1, 40)
    M = ModulePresentation.localization(x, 3)
    reports = [stable_cohomology_dims(M, n, k)
               for n, k in [(5, 3), (7, 4), (9, 5)]]
    for earlier, later in zip(reports, reports[1:]):
        for i, d in enumerate(earlier.dims):
            assert later.dims[i] >= d


def test_kernel_of_dn_structure():
    M = ModulePresentation.structure(2)
    data = kernel_of_dn(M, 6)
    # kernel of d_2 on truncated R is the x2-free part
    assert data.dims[0] == 7
    assert all("x2" not in text for text in data.basis_texts)


def test_kernel_of_dn_localization():
    x = Series.variable(1, 1, 30)
    M = ModulePresentation.localization(x, 4)
    data = kernel_of_dn(M, 8, 4)
    assert data.dims[0] == 1                      # constants only


def test_cokernel_of_dn():
    x = Series.variable(1, 1, 30)
    M = ModulePresentation.localization(x, 4)
    data = cokernel_of_dn(M, 8, 4)
    assert data.dims[0] == 1
    assert data.basis_texts[0] == "(x1^4)/f^5"    # the class of 1/x

    M2 = ModulePresentation.structure(2)
    assert cokernel_of_dn(M2, 6).dims[0] == 0

    x1 = Series.variable(2, 1, 40)
    M3 = ModulePresentation.localization(x1, 4)
    assert cokernel_of_dn(M3, 6, 4).dims[0] == 0


def test_kernel_actions_stay_in_kernel():
    x1 = Series.variable(2, 1, 40)
    M = ModulePresentation.localization(x1, 4)
    data = kernel_of_dn(M, 6, 4)
    # induced first-variable derivative and multiplication close on the ladder
    data.partial_matrix(1, 0)
    data.multiply_matrix(1, 0)


def test_kernel_meets_xn_multiples_trivially():
    # the kernel ladder only meets x_n * (truncated module) in 0
    for M, pole in [(ModulePresentation.structure(2), None)]:
        base_n = 7
        data = kernel_of_dn(M, base_n, pole)
        kernel_vecs = data.family.vectors(0)
        # x2-multiples of the one-step-smaller truncation, embedded exactly
        family = data.family.base
        small = ModulePresentation.structure(2)
        from formald.derham import ModuleFamily
        fam_small = ModuleFamily(small, base_n - 1, None)
        index = family.index(0)
        image = []
        for e in fam_small.basis(0):
            key = e[:-1] + (e[-1] + 1,)
            image.append({index[key]: Fraction(1)})
        assert intersection_dim(kernel_vecs, image) == 0


def test_kernel_of_twist_meets_xn_multiples_trivially():
    n, prec = 2, 40
    g = Series.variable(n, 1, prec) * Series.variable(n, 2, prec)
    M = ModulePresentation.connection([[[g.partial(1)]], [[g.partial(2)]]])
    data = kernel_of_dn(M, 6)
    kernel_vecs = data.family.vectors(0)
    assert len(kernel_vecs) > 0
    family = data.family.base
    index = family.index(0)
    image = []
    for comp, e in family.basis(0):
        if sum(e) >= family.bound(0):
            continue
        key = (comp, e[:-1] + (e[-1] + 1,))
        image.append({index[key]: Fraction(1)})
    assert intersection_dim(kernel_vecs, image) == 0


def test_les_consistency_cases():
    x = Series.variable(1, 1, 30)
    cases = [
        (ModulePresentation.structure(1), 8, None, (1, 0), (1,), (0,)),
        (ModulePresentation.structure(2), 8, None, (1, 0, 0), (1, 0), (0, 0)),
        (ModulePresentation.localization(x, 4), 8, 5, (1, 1), (1,), (1,)),
    ]
    for M, trunc, pole, dims_m, dims_k, dims_c in cases:
        report = les_consistency(M, trunc, pole)
        assert report.dims_module == dims_m
        assert report.dims_kernel == dims_k
        assert report.dims_cokernel == dims_c
        assert report.consistent


def test_coordinate_invariance_of_dims():
    rng = random.Random(60)
    x1 = Series.variable(2, 1, 40)
    base = ModulePresentation.localization(x1, 4)
    expected = stabilized_dims(base, [(6, 4), (8, 5)]).dims
    for _ in range(2):
        while True:
            rows = [[rng.randint(-2, 2) for _ in range(2)] for _ in range(2)]
            try:
                sub = LinearSubstitution(rows)
                break
            except ValueError:
                continue
        f = apply_linear_substitution(x1, sub)
        M = ModulePresentation.localization(f, 4)
        assert stabilized_dims(M, [(6, 4), (8, 5)]).dims == expected


def test_nonintegrable_connection_rejected():
    n, prec = 2, 6
    zero = Series.zero(n, prec)
    one = Series.one(n, prec)
    M = ModulePresentation.connection([[[zero, one], [zero, zero]],
                                       [[zero, zero], [one, zero]]])
    with pytest.raises(NonIntegrable):
        build_complex(M, 4)


def test_twisted_connection_dims():
    # conjugation by the unit exp(g) trivializes the twist
    n, prec = 2, 40
    g = Series.variable(n, 1, prec) * Series.variable(n, 2, prec)
    M = ModulePresentation.connection([[[g.partial(1)]], [[g.partial(2)]]])
    report = stabilized_dims(M, [(5, None), (7, None)])
    assert report.dims == (1, 0, 0)
