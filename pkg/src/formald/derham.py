"""Truncated de Rham complexes and exact cohomology dimensions.

A module presentation is sliced into a ladder of finite-dimensional
truncations ("levels"); each derivative maps level t into level t+1, so
composites never silently lose coefficients and d o d = 0 holds exactly
as a matrix identity.  Cohomology of the filtered union is approximated
by running a schedule of truncation parameters and marking a degree
stabilized when two consecutive runs agree; the report never upgrades
truncation evidence to a proof.

Level layout per variant (N = series bound, K = pole budget):

* ring:        degree <= N - t monomials;
* localization at f: monomials x^e / f^(K+t) with
  |e| <= N + K*deg f + t*(deg f - 1), f's stored terms being treated as an
  exact polynomial.  The baseline N + K*deg f keeps every x^e/f^k with
  k <= K and |e| <= N representable at the common denominator, and the
  per-level growth of deg f - 1 matches exactly what the quotient rule
  adds, so no top-of-window shell escapes the differential;
* connection:  component tags times degree <= N - t monomials, with maps
  truncated to the target bound (this is what keeps d o d = 0 exact when
  flatness only holds to precision).

The kernel and cokernel of the last derivative acting on the ladder are
again ladders with one variable less, so the same complex builder serves
the long-exact-sequence checks.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction

from .errors import InsufficientPrecision, NonIntegrable
from .linalg import ColumnEchelon, Matrix, vec_add_scaled
from .modules import (CONNECTION, LOCALIZATION, STRUCTURE, ModulePresentation,
                      check_integrability)
from .series import Series, format_poly, monomials_upto

# -- raw polynomial helpers (exponent dict -> Fraction) -------------------


def _terms_mult(a, b, bound):
    out = {}
    for ea, ca in a.items():
        for eb, cb in b.items():
            key = tuple(i + j for i, j in zip(ea, eb))
            if sum(key) > bound:
                continue
            new = out.get(key, Fraction(0)) + ca * cb
            if new:
                out[key] = new
            else:
                del out[key]
    return out


def _terms_partial(terms, axis):
    j = axis - 1
    out = {}
    for e, c in terms.items():
        if e[j]:
            out[e[:j] + (e[j] - 1,) + e[j + 1:]] = c * e[j]
    return out


def _terms_scale(terms, factor):
    return {e: c * factor for e, c in terms.items()}


def _terms_add(a, b):
    out = dict(a)
    for e, c in b.items():
        new = out.get(e, Fraction(0)) + c
        if new:
            out[e] = new
        else:
            del out[e]
    return out


def _terms_truncate(terms, bound):
    return {e: c for e, c in terms.items() if sum(e) <= bound}


# -- level families --------------------------------------------------------


class ModuleFamily:
    """The truncation ladder of a module presentation."""

    def __init__(self, module, trunc, pole=None):
        self.module = module
        self.num_vars = module.num_vars
        self.trunc = trunc
        if module.kind == LOCALIZATION:
            if pole is None:
                raise ValueError("localization ladders need a pole budget")
            self.pole0 = pole
            self.f_terms = dict(module.f.terms)
            self.f_deg = max((sum(e) for e in self.f_terms), default=0)
            self.df_terms = [
                _terms_partial(self.f_terms, axis)
                for axis in range(1, self.num_vars + 1)
            ]
        elif module.kind == CONNECTION:
            prec = min(entry.precision for m in module.matrices
                       for row in m for entry in row)
            if prec < trunc - 1:
                raise InsufficientPrecision(
                    f"connection entries known to {prec}, need >= {trunc - 1}")
        self.axes = list(range(1, self.num_vars + 1))
        self._basis_cache = {}
        self._index_cache = {}

    def bound(self, t):
        if self.module.kind == LOCALIZATION:
            return (self.trunc + self.pole0 * self.f_deg
                    + t * max(self.f_deg - 1, 0))
        return self.trunc - t

    def pole(self, t):
        if self.module.kind == LOCALIZATION:
            return self.pole0 + t
        return None

    def basis(self, t):
        if t not in self._basis_cache:
            monos = monomials_upto(self.num_vars, self.bound(t))
            if self.module.kind == CONNECTION:
                labels = [(comp, e) for e in monos
                          for comp in range(self.module.rank)]
            else:
                labels = monos
            self._basis_cache[t] = labels
            self._index_cache[t] = {lab: i for i, lab in enumerate(labels)}
        return self._basis_cache[t]

    def dim(self, t):
        return len(self.basis(t))

    def index(self, t):
        self.basis(t)
        return self._index_cache[t]

    def label_text(self, t, label):
        names = [f"x{i}" for i in range(1, self.num_vars + 1)]
        if self.module.kind == CONNECTION:
            comp, e = label
            mono = format_poly({e: Fraction(1)}, names)
            return f"e{comp + 1}*{mono}"
        mono = format_poly({label: Fraction(1)}, names)
        if self.module.kind == LOCALIZATION:
            return f"({mono})/f^{self.pole(t)}"
        return mono

    def partial_columns(self, axis, t):
        """Images of the level-t basis under d_axis, in level t+1 coordinates."""
        index = self.index(t + 1)
        bound = self.bound(t + 1)
        cols = []
        if self.module.kind == STRUCTURE:
            j = axis - 1
            for e in self.basis(t):
                col = {}
                if e[j]:
                    key = e[:j] + (e[j] - 1,) + e[j + 1:]
                    col[index[key]] = Fraction(e[j])
                cols.append(col)
        elif self.module.kind == LOCALIZATION:
            k = self.pole(t)
            for e in self.basis(t):
                mono = {e: Fraction(1)}
                part = _terms_mult(_terms_partial(mono, axis), self.f_terms, bound)
                part = _terms_add(
                    part,
                    _terms_scale(_terms_mult(mono, self.df_terms[axis - 1], bound), -k))
                cols.append({index[exps]: c for exps, c in part.items()})
        else:  # connection
            a = self.module.matrices[axis - 1]
            for comp, e in self.basis(t):
                mono = {e: Fraction(1)}
                acc = {}
                deriv = _terms_partial(mono, axis)
                for exps, c in _terms_truncate(deriv, bound).items():
                    acc[(comp, exps)] = c
                for row in range(self.module.rank):
                    entry = _terms_truncate(
                        _terms_mult(a[row][comp].terms, mono, bound), bound)
                    for exps, c in entry.items():
                        key = (row, exps)
                        new = acc.get(key, Fraction(0)) + c
                        if new:
                            acc[key] = new
                        else:
                            del acc[key]
                cols.append({index[lab]: c for lab, c in acc.items()})
        return cols

    def partial_matrix(self, axis, t):
        return Matrix.from_cols(self.partial_columns(axis, t), self.dim(t + 1))

    def multiply_columns(self, axis, t):
        """Images of the level-t basis under x_axis, truncated to level t."""
        index = self.index(t)
        bound = self.bound(t)
        j = axis - 1
        cols = []
        for label in self.basis(t):
            e = label[1] if self.module.kind == CONNECTION else label
            key = e[:j] + (e[j] + 1,) + e[j + 1:]
            col = {}
            if sum(key) <= bound:
                lab = ((label[0], key) if self.module.kind == CONNECTION
                       else key)
                col[index[lab]] = Fraction(1)
            cols.append(col)
        return cols


class KernelFamily:
    """ker(d_n) on a ladder, with the surviving d_1..d_{n-1} actions."""

    def __init__(self, base):
        self.base = base
        self.num_vars = base.num_vars - 1
        self.axes = list(range(1, base.num_vars))
        self._vectors_cache = {}
        self._echelon_cache = {}

    def vectors(self, t):
        if t not in self._vectors_cache:
            matrix = self.base.partial_matrix(self.base.num_vars, t)
            self._vectors_cache[t] = matrix.nullspace()
        return self._vectors_cache[t]

    def _echelon(self, t):
        if t not in self._echelon_cache:
            ech = ColumnEchelon()
            for i, v in enumerate(self.vectors(t)):
                ech.add(v, i)
            self._echelon_cache[t] = ech
        return self._echelon_cache[t]

    def basis(self, t):
        return list(range(len(self.vectors(t))))

    def dim(self, t):
        return len(self.vectors(t))

    def label_text(self, t, label):
        vec = self.vectors(t)[label]
        base_labels = self.base.basis(t)
        parts = [f"{c}*{self.base.label_text(t, base_labels[i])}"
                 for i, c in sorted(vec.items())]
        return " + ".join(parts)

    def partial_columns(self, axis, t):
        base_matrix = self.base.partial_matrix(axis, t)
        target = self._echelon(t + 1)
        cols = []
        for vec in self.vectors(t):
            image = base_matrix.apply(vec)
            combo = target.express(image)
            if combo is None:
                raise AssertionError("derivative left the kernel ladder")
            cols.append(combo)
        return cols

    def multiply_columns(self, axis, t):
        raw = Matrix.from_cols(self.base.multiply_columns(axis, t),
                               self.base.dim(t))
        target = self._echelon(t)
        cols = []
        for vec in self.vectors(t):
            image = raw.apply(vec)
            combo = target.express(image)
            if combo is None:
                raise AssertionError("multiplication left the kernel ladder")
            cols.append(combo)
        return cols


class CokernelFamily:
    """coker(d_n) on a ladder: level t is base level t+1 modulo the image."""

    def __init__(self, base):
        self.base = base
        self.num_vars = base.num_vars - 1
        self.axes = list(range(1, base.num_vars))
        self._ech_cache = {}
        self._reps_cache = {}

    def _image(self, t):
        if t not in self._ech_cache:
            ech = ColumnEchelon()
            cols = self.base.partial_columns(self.base.num_vars, t)
            for i, col in enumerate(cols):
                ech.add(col, i)
            self._ech_cache[t] = ech
            pivots = set(ech.pivots())
            self._reps_cache[t] = [i for i in range(self.base.dim(t + 1))
                                   if i not in pivots]
        return self._ech_cache[t]

    def representatives(self, t):
        self._image(t)
        return self._reps_cache[t]

    def basis(self, t):
        return list(range(len(self.representatives(t))))

    def dim(self, t):
        return len(self.representatives(t))

    def label_text(self, t, label):
        pos = self.representatives(t)[label]
        return self.base.label_text(t + 1, self.base.basis(t + 1)[pos])

    def partial_columns(self, axis, t):
        ech_target = self._image(t + 1)
        reps_target = {pos: i for i, pos in enumerate(self.representatives(t + 1))}
        base_cols = self.base.partial_columns(axis, t + 1)
        cols = []
        for pos in self.representatives(t):
            residual = ech_target.project(base_cols[pos])
            cols.append({reps_target[p]: c for p, c in residual.items()})
        return cols


# -- complexes -------------------------------------------------------------


@dataclass
class TruncatedComplex:
    """Explicit bases and exact differentials of a truncated de Rham complex."""

    num_vars: int
    space_labels: list       # per degree: list of (basis label text, form tuple)
    dims: list               # per degree: space dimension
    differentials: list      # Matrix, one per degree 0..len(axes)-1
    truncation: tuple        # (N, K)
    description: str


def _forms(axes, degree):
    return list(itertools.combinations(axes, degree))


def complex_from_family(family, truncation, description):
    """Assemble spaces and differentials; d o d = 0 is verified exactly."""
    axes = family.axes
    n_forms = len(axes)
    space_labels = []
    dims = []
    for j in range(n_forms + 1):
        forms = _forms(axes, j)
        labels = [(family.label_text(j, lab), form)
                  for lab in family.basis(j) for form in forms]
        space_labels.append(labels)
        dims.append(family.dim(j) * len(forms))
    differentials = []
    for j in range(n_forms):
        forms = _forms(axes, j)
        forms_next = _forms(axes, j + 1)
        next_pos = {form: i for i, form in enumerate(forms_next)}
        partial_cols = {axis: family.partial_columns(axis, j) for axis in axes}
        nf, nf_next = len(forms), len(forms_next)
        dim_next = family.dim(j + 1)
        cols = []
        for key_pos in range(family.dim(j)):
            for form in forms:
                col = {}
                for axis in axes:
                    if axis in form:
                        continue
                    before = sum(1 for a in form if a < axis)
                    sign = -1 if before % 2 else 1
                    target_form = tuple(sorted(form + (axis,)))
                    fpos = next_pos[target_form]
                    for row, val in partial_cols[axis][key_pos].items():
                        idx = row * nf_next + fpos
                        new = col.get(idx, Fraction(0)) + sign * val
                        if new:
                            col[idx] = new
                        else:
                            del col[idx]
                cols.append(col)
        differentials.append(Matrix.from_cols(cols, dim_next * nf_next))
    for j in range(len(differentials) - 1):
        if not differentials[j + 1].compose(differentials[j]).is_zero():
            raise AssertionError(f"d^{j + 1} o d^{j} != 0 in {description}")
    return TruncatedComplex(num_vars=len(axes), space_labels=space_labels,
                            dims=dims, differentials=differentials,
                            truncation=truncation, description=description)


def module_family(module, trunc, pole=None):
    if module.kind == CONNECTION:
        report = check_integrability(module)
        if not report.integrable:
            i, j, row, col, entry = report.witness
            raise NonIntegrable(
                f"flatness fails at pair ({i},{j}) entry ({row},{col})")
    return ModuleFamily(module, trunc, pole)


def build_complex(module, trunc, pole=None):
    family = module_family(module, trunc, pole)
    return complex_from_family(family, (trunc, pole), module.describe())


@dataclass
class CohomologyReport:
    """Per-degree dimensions with the truncation evidence that produced them."""

    dims: tuple
    truncation: tuple
    stabilized: tuple | None = None
    history: tuple | None = None
    deepened: tuple | None = None

    def format_lines(self):
        lines = []
        for i, d in enumerate(self.dims):
            flag = ""
            if self.stabilized is not None:
                flag = " stabilized" if self.stabilized[i] else " UNSTABLE"
            lines.append(f"H^{i}: {d}{flag}")
        return lines


def cohomology_dims(complex_):
    """dims[i] = nullity(d^i) - rank(d^{i-1}), by exact rank computation."""
    ranks = [m.rank() for m in complex_.differentials]
    n = len(complex_.differentials)
    dims = []
    for i in range(n + 1):
        nullity = complex_.dims[i] - (ranks[i] if i < n else 0)
        image = ranks[i - 1] if i > 0 else 0
        dims.append(nullity - image)
    return CohomologyReport(dims=tuple(dims), truncation=complex_.truncation)


def _embedding_columns(fam_a, fam_b, t):
    """Inclusion of fam_a's level t into fam_b's, in target coordinates.

    For localizations this multiplies numerators by f once per extra pole;
    rings embed label-by-label.  Both are exact chain maps because no
    differential in either ladder truncates."""
    index_b = fam_b.index(t)
    cols = []
    if fam_a.module.kind == LOCALIZATION:
        steps = fam_b.pole(t) - fam_a.pole(t)
        power = {(0,) * fam_a.num_vars: Fraction(1)}
        for _ in range(steps):
            power = _terms_mult(power, fam_a.f_terms, fam_b.bound(t))
        for e in fam_a.basis(t):
            col = {}
            for ef, c in power.items():
                key = tuple(i + j for i, j in zip(e, ef))
                col[index_b[key]] = c
            cols.append(col)
    else:
        for label in fam_a.basis(t):
            cols.append({index_b[label]: Fraction(1)})
    return cols


def _projection_columns(fam_b, fam_a, t):
    """Truncation of fam_b's level t onto fam_a's (a chain map even when
    the differentials themselves truncate, as connection ladders do)."""
    index_a = fam_a.index(t)
    bound_a = fam_a.bound(t)
    cols = []
    for label in fam_b.basis(t):
        degree = sum(label[1]) if fam_b.module.kind == CONNECTION else sum(label)
        if degree <= bound_a:
            cols.append({index_a[label]: Fraction(1)})
        else:
            cols.append({})
    return cols


def _deepened_family(module, fam_a, trunc, pole):
    if module.kind == LOCALIZATION:
        trunc_b, pole_b = trunc + max(fam_a.f_deg, 1), pole + 1
    else:
        trunc_b, pole_b = trunc + 1, pole
    return module_family(module, trunc_b, pole_b), (trunc_b, pole_b)


def _comparison_pair(module, trunc, pole):
    """(source family, target family, level column maps, deepened params).

    The stable dimensions are ranks of H(source) mapped into H(target)
    along an exact chain map: the deepening embedding for rings and
    localizations, the truncation projection for connections."""
    fam_a = module_family(module, trunc, pole)
    fam_b, deepened = _deepened_family(module, fam_a, trunc, pole)
    if module.kind == CONNECTION:
        maps = lambda t: _projection_columns(fam_b, fam_a, t)
        return fam_b, fam_a, maps, deepened
    maps = lambda t: _embedding_columns(fam_a, fam_b, t)
    return fam_a, fam_b, maps, deepened


def _mapped_cocycles(complex_src, level_cols, n_forms, i):
    top = len(complex_src.differentials)
    if i < top:
        cocycles = complex_src.differentials[i].nullspace()
    else:
        cocycles = [{j: Fraction(1)} for j in range(complex_src.dims[i])]
    mapped = []
    for z in cocycles:
        vec = {}
        for idx, val in z.items():
            key_pos, fpos = divmod(idx, n_forms)
            for row, c in level_cols[key_pos].items():
                vec_add_scaled(vec, {row * n_forms + fpos: c}, val)
        mapped.append(vec)
    return mapped


def stable_cohomology_dims(module, trunc, pole=None):
    """Dimension of the image of H(C_{N,K}) in H of a one-step deepening.

    A single truncated complex can carry classes invisible to any single
    window: for f = x1*x2 the class of dx1^dx2/f^{K+2} needs a potential
    of pole K+2, one more than the ladder provides, at every truncation.
    Comparing along a chain map between two windows removes exactly the
    classes that die deeper in the filtered union, so these are the
    dimensions a schedule can meaningfully compare."""
    fam_src, fam_tgt, maps, deepened = _comparison_pair(module, trunc, pole)
    complex_src = complex_from_family(
        fam_src, (fam_src.trunc, getattr(fam_src, "pole0", None)),
        module.describe())
    complex_tgt = complex_from_family(
        fam_tgt, (fam_tgt.trunc, getattr(fam_tgt, "pole0", None)),
        module.describe())
    axes = fam_src.axes
    top = len(axes)
    dims = []
    for i in range(top + 1):
        n_forms = len(_forms(axes, i))
        mapped = _mapped_cocycles(complex_src, maps(i), n_forms, i)
        ech = ColumnEchelon()
        count = 0
        if i > 0:
            for col in complex_tgt.differentials[i - 1].cols:
                ech.add(col, count)
                count += 1
        boundary_rank = ech.rank
        for vec in mapped:
            ech.add(vec, count)
            count += 1
        dims.append(ech.rank - boundary_rank)
    return CohomologyReport(dims=tuple(dims), truncation=(trunc, pole),
                            deepened=deepened)


def stabilized_dims(module, schedule):
    """Run a schedule of (N, K) truncations; a degree is stabilized when the
    last two runs agree.  Stabilization is evidence, never a proof."""
    schedule = list(schedule)
    if len(schedule) < 2:
        raise ValueError("schedule needs at least two (N, K) steps")
    history = []
    for trunc, pole in schedule:
        report = stable_cohomology_dims(module, trunc, pole)
        history.append(((trunc, pole), report.dims))
    last, prev = history[-1][1], history[-2][1]
    stabilized = tuple(a == b for a, b in zip(last, prev))
    return CohomologyReport(dims=last, truncation=schedule[-1],
                            stabilized=stabilized, history=tuple(history))


# -- kernel / cokernel of the last derivative ------------------------------


@dataclass
class DnSubquotient:
    """A kernel or cokernel ladder presented by explicit bases."""

    kind: str                  # "kernel" or "cokernel"
    family: object
    dims: tuple                # per level
    basis_texts: tuple         # level-0 basis descriptions

    def partial_matrix(self, axis, t=0):
        cols = self.family.partial_columns(axis, t)
        return Matrix.from_cols(cols, self.family.dim(t + 1))

    def multiply_matrix(self, axis, t=0):
        if not hasattr(self.family, "multiply_columns"):
            raise NotImplementedError("multiplication is exposed on kernels only")
        cols = self.family.multiply_columns(axis, t)
        return Matrix.from_cols(cols, self.family.dim(t))


def kernel_of_dn(module, trunc, pole=None, levels=None):
    """Exact nullspace ladder of d_n with induced x_i, d_i (i < n) actions."""
    base = module_family(module, trunc, pole)
    family = KernelFamily(base)
    levels = base.num_vars if levels is None else levels
    dims = tuple(family.dim(t) for t in range(levels))
    texts = tuple(family.label_text(0, lab) for lab in family.basis(0))
    return DnSubquotient("kernel", family, dims, texts)


def cokernel_of_dn(module, trunc, pole=None, levels=None):
    """Cokernel ladder of d_n, counted stably across a deepening.

    Raw quotients V_{t+1}/d_n(V_t) carry classes whose antiderivative
    needs one pole more than the window holds (x2^j/x1^{K+1} for the
    localization at x1); the reported dimensions count the image of the
    raw quotient inside the deepened one, and the representative labels
    are the basis elements that stay independent there."""
    fam_src, fam_tgt, maps, _ = _comparison_pair(module, trunc, pole)
    axis = module.num_vars
    levels = module.num_vars if levels is None else levels
    dims = []
    texts = None
    for t in range(levels):
        ech = ColumnEchelon()
        count = 0
        for col in fam_tgt.partial_columns(axis, t):
            ech.add(col, count)
            count += 1
        level_cols = maps(t + 1)
        reps = []
        for pos, label in enumerate(fam_src.basis(t + 1)):
            if ech.add(level_cols[pos], count) is None:
                reps.append(label)
            count += 1
        dims.append(len(reps))
        if t == 0:
            texts = tuple(fam_src.label_text(1, label) for label in reps)
    family = CokernelFamily(module_family(module, trunc, pole))
    return DnSubquotient("cokernel", family, tuple(dims), texts or ())


# -- long-exact-sequence consistency ---------------------------------------


@dataclass
class LesReport:
    dims_module: tuple
    dims_kernel: tuple
    dims_cokernel: tuple
    bound_ok: tuple          # per degree: dim H^i(M) <= H^i(ker) + H^{i-1}(coker)
    euler_ok: bool
    truncation: tuple

    @property
    def consistent(self):
        return self.euler_ok and all(self.bound_ok)


def les_consistency(module, trunc, pole=None):
    """Dimension constraints a long exact sequence forces on the three
    cohomologies: H^i(M) <= H^i(ker d_n) + H^{i-1}(coker d_n) and the
    Euler characteristic identity chi(M) = chi(ker) - chi(coker)."""
    base = module_family(module, trunc, pole)
    full = complex_from_family(base, (trunc, pole), module.describe())
    dims_m = cohomology_dims(full).dims
    if base.num_vars == 1:
        kernel = KernelFamily(base)
        cokernel = CokernelFamily(base)
        dims_k = (kernel.dim(0),)
        dims_c = (cokernel.dim(0),)
    else:
        kernel_cx = complex_from_family(KernelFamily(base), (trunc, pole),
                                        "ker d_n")
        cokernel_cx = complex_from_family(CokernelFamily(base), (trunc, pole),
                                          "coker d_n")
        dims_k = cohomology_dims(kernel_cx).dims
        dims_c = cohomology_dims(cokernel_cx).dims

    def at(dims, i):
        return dims[i] if 0 <= i < len(dims) else 0

    bound_ok = tuple(
        dims_m[i] <= at(dims_k, i) + at(dims_c, i - 1)
        for i in range(len(dims_m)))
    chi = lambda dims: sum((-1) ** i * d for i, d in enumerate(dims))
    euler_ok = chi(dims_m) == chi(dims_k) - chi(dims_c)
    return LesReport(dims_module=dims_m, dims_kernel=dims_k,
                     dims_cokernel=dims_c, bound_ok=bound_ok,
                     euler_ok=euler_ok, truncation=(trunc, pole))
