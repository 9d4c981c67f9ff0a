"""Band-limited endomorphism-valued differential forms on the flat 4-torus.

A MatrixForm stores the Fourier coefficients of an element of
Lambda^p(T^4) (x) End(C^r); the torus is R^4 / (2 pi Z)^4 with volume
normalized to 1, so modes e^{i<k,x>} with integer k are orthonormal.
Coefficients are kept sparse in frequency space: parallel arrays
(component index, frequency 4-vector, r x r complex matrix) sorted by
(component, frequency).  All operations return canonical forms; entries
below 1e-14 of the largest magnitude are pruned.

The real structure real_T conjugates the function part and sends an
endomorphism to minus its Hermitian adjoint; its fixed points are the
u(r)-valued real forms.
"""

import json

import numpy as np

from ._kernels import conv_scatter
from .combinat import insert_table, n_components, subset_index, subsets, wedge_table
from .errors import BandwidthOverflow, DegreeZero, ShapeMismatch, WrongType

DIM = 4
PRUNE_REL = 1e-14


def _empty(rank):
    return (
        np.empty(0, dtype=np.int64),
        np.empty((0, DIM), dtype=np.int64),
        np.empty((0, rank, rank), dtype=complex),
    )


class MatrixForm:
    """Immutable band-limited End(C^r)-valued p-form."""

    __slots__ = ("rank", "degree", "cutoff", "comps", "freqs", "coefs")

    def __init__(self, rank, degree, cutoff, comps=None, freqs=None, coefs=None,
                 canonical=False):
        self.rank = int(rank)
        self.degree = int(degree)
        self.cutoff = int(cutoff)
        if comps is None:
            comps, freqs, coefs = _empty(self.rank)
        comps = np.asarray(comps, dtype=np.int64)
        freqs = np.asarray(freqs, dtype=np.int64).reshape(len(comps), DIM)
        coefs = np.ascontiguousarray(coefs, dtype=complex).reshape(
            len(comps), self.rank, self.rank
        )
        if not canonical:
            comps, freqs, coefs = _canonicalize(comps, freqs, coefs)
        self.comps = comps
        self.freqs = freqs
        self.coefs = coefs
        if len(self.freqs) and np.abs(self.freqs).max() > self.cutoff:
            raise BandwidthOverflow(
                f"bandwidth {np.abs(self.freqs).max()} exceeds cutoff {self.cutoff}"
            )

    # ---- basic queries -------------------------------------------------

    @property
    def n_entries(self):
        return len(self.comps)

    @property
    def bandwidth(self):
        if not len(self.freqs):
            return 0
        return int(np.abs(self.freqs).max())

    def is_zero(self):
        return self.n_entries == 0

    def component_slices(self):
        """Mapping component index -> slice into the entry arrays."""
        out = {}
        if not len(self.comps):
            return out
        bounds = np.flatnonzero(np.diff(self.comps)) + 1
        starts = np.concatenate(([0], bounds))
        stops = np.concatenate((bounds, [len(self.comps)]))
        for s, t in zip(starts, stops):
            out[int(self.comps[s])] = slice(int(s), int(t))
        return out

    def __repr__(self):
        return (
            f"MatrixForm(rank={self.rank}, degree={self.degree}, "
            f"cutoff={self.cutoff}, entries={self.n_entries}, "
            f"bandwidth={self.bandwidth})"
        )

    # ---- linear structure ----------------------------------------------

    def __add__(self, other):
        _check_compat(self, other, same_degree=True)
        return MatrixForm(
            self.rank, self.degree, self.cutoff,
            np.concatenate([self.comps, other.comps]),
            np.concatenate([self.freqs, other.freqs]),
            np.concatenate([self.coefs, other.coefs]),
        )

    def __sub__(self, other):
        return self + (-1.0) * other

    def __mul__(self, scalar):
        return MatrixForm(self.rank, self.degree, self.cutoff, self.comps,
                          self.freqs, scalar * self.coefs)

    __rmul__ = __mul__

    def __neg__(self):
        return (-1.0) * self

    def with_cutoff(self, cutoff):
        """Same form viewed at a different working cutoff."""
        if self.bandwidth > cutoff:
            raise BandwidthOverflow("form does not fit in the requested cutoff")
        return MatrixForm(self.rank, self.degree, cutoff, self.comps, self.freqs,
                          self.coefs, canonical=True)

    def truncated(self, cutoff=None):
        """Drop coefficients outside |k|_inf <= cutoff."""
        cutoff = self.cutoff if cutoff is None else cutoff
        keep = np.abs(self.freqs).max(axis=1) <= cutoff if len(self.freqs) else slice(0, 0)
        return MatrixForm(self.rank, self.degree, cutoff, self.comps[keep],
                          self.freqs[keep], self.coefs[keep], canonical=True)


def _canonicalize(comps, freqs, coefs):
    if not len(comps):
        return comps, freqs, coefs
    order = np.lexsort((freqs[:, 3], freqs[:, 2], freqs[:, 1], freqs[:, 0], comps))
    comps, freqs, coefs = comps[order], freqs[order], coefs[order]
    key = np.concatenate([comps[:, None], freqs], axis=1)
    new_group = np.any(np.diff(key, axis=0) != 0, axis=1)
    starts = np.concatenate(([0], np.flatnonzero(new_group) + 1))
    comps = comps[starts]
    freqs = freqs[starts]
    coefs = np.add.reduceat(coefs, starts, axis=0)
    mags = np.abs(coefs).max(axis=(1, 2))
    top = mags.max() if len(mags) else 0.0
    keep = mags > PRUNE_REL * top if top > 0 else np.zeros(len(mags), dtype=bool)
    return (
        np.ascontiguousarray(comps[keep]),
        np.ascontiguousarray(freqs[keep]),
        np.ascontiguousarray(coefs[keep]),
    )


def _check_compat(a, b, same_degree=False):
    if a.rank != b.rank or a.cutoff != b.cutoff:
        raise ShapeMismatch(
            f"rank/cutoff mismatch: ({a.rank},{a.cutoff}) vs ({b.rank},{b.cutoff})"
        )
    if same_degree and a.degree != b.degree:
        raise ShapeMismatch(f"degree mismatch: {a.degree} vs {b.degree}")


# ---- constructors ------------------------------------------------------


def zero_form(rank, degree, cutoff):
    return MatrixForm(rank, degree, cutoff)


def monomial(rank, degree, cutoff, comp, k, matrix):
    """matrix * dx_comp * e^{i<k,x>} with comp a sorted tuple of axes."""
    idx = subset_index(DIM, degree)[tuple(comp)]
    return MatrixForm(rank, degree, cutoff, [idx], [list(k)], [matrix])


def from_fiber(fiber_vec, rank, cutoff, degree, matrix=None, k=(0, 0, 0, 0)):
    """Constant form (fiber component vector) tensor a fixed matrix."""
    matrix = np.eye(rank) if matrix is None else np.asarray(matrix)
    nz = np.flatnonzero(np.abs(np.asarray(fiber_vec)) > 0)
    comps = nz.astype(np.int64)
    freqs = np.tile(np.asarray(k, dtype=np.int64), (len(nz), 1))
    coefs = np.asarray(fiber_vec)[nz][:, None, None] * matrix[None, :, :]
    return MatrixForm(rank, degree, cutoff, comps, freqs, coefs)


def random_form(rng, rank, degree, cutoff, bandwidth, amplitude=1.0):
    """Dense seeded random form supported on |k|_inf <= bandwidth."""
    if bandwidth > cutoff:
        raise BandwidthOverflow("bandwidth exceeds cutoff")
    side = 2 * bandwidth + 1
    grid = np.stack(
        np.meshgrid(*([np.arange(-bandwidth, bandwidth + 1)] * DIM), indexing="ij"),
        axis=-1,
    ).reshape(-1, DIM)
    nc = n_components(DIM, degree)
    m = nc * side**DIM
    comps = np.repeat(np.arange(nc, dtype=np.int64), side**DIM)
    freqs = np.tile(grid, (nc, 1))
    coefs = amplitude * (
        rng.standard_normal((m, rank, rank)) + 1j * rng.standard_normal((m, rank, rank))
    )
    return MatrixForm(rank, degree, cutoff, comps, freqs, coefs)


# ---- inner product and norms -------------------------------------------


def _entry_keys(form):
    c = form.cutoff
    base = 2 * c + 1
    key = form.comps.astype(np.int64)
    for mu in range(DIM):
        key = key * base + (form.freqs[:, mu] + c)
    return key


def l2_inner(a, b):
    """<a, b> = sum tr(a_k b_k^dagger) over components and frequencies."""
    _check_compat(a, b, same_degree=True)
    ka, kb = _entry_keys(a), _entry_keys(b)
    ia = np.searchsorted(kb, ka)
    ia_clip = np.minimum(ia, len(kb) - 1) if len(kb) else ia
    match = np.zeros(len(ka), dtype=bool)
    if len(kb):
        match = kb[ia_clip] == ka
    if not match.any():
        return 0.0 + 0.0j
    left = a.coefs[match]
    right = b.coefs[ia_clip[match]]
    return complex(np.einsum("eij,eij->", left, right.conj()))


def norm(a):
    if a.is_zero():
        return 0.0
    return float(np.sqrt(np.einsum("eij,eij->", a.coefs, a.coefs.conj()).real))


# ---- exterior calculus -------------------------------------------------


def wedge(a, b, truncate=False):
    """Graded product with matrix multiplication on coefficients.

    The frequency convolution is exact; if the result cannot fit in the
    working cutoff this raises BandwidthOverflow unless truncate is set,
    in which case the exact product is computed in a larger scratch box
    and then clipped back to the cutoff.
    """
    _check_compat(a, b)
    p, q = a.degree, b.degree
    if p + q > DIM:
        raise ShapeMismatch(f"wedge degree {p}+{q} exceeds {DIM}")
    if a.is_zero() or b.is_zero():
        return zero_form(a.rank, p + q, a.cutoff)
    bw = a.bandwidth + b.bandwidth
    if bw > a.cutoff and not truncate:
        raise BandwidthOverflow(
            f"wedge bandwidth {bw} exceeds cutoff {a.cutoff}"
        )
    out = _conv_bilinear(a, b, wedge_table(DIM, p, q), p + q, halfwidth=bw,
                         side=0, freq_sign_a=1, out_cutoff=max(bw, a.cutoff))
    if bw > a.cutoff:
        out = out.truncated(a.cutoff)
    return out


def _conv_bilinear(a, b, table, out_degree, halfwidth, side, freq_sign_a,
                   a_coef_map=None, out_cutoff=None):
    """Shared driver for wedge-like convolutions.

    table entries (ia, ib, out, sign) name the component pairing; for each
    pair the kernel scatters matrix products into a dense box per output
    component, which is then re-sparsified.
    """
    rank = a.rank
    base = 2 * halfwidth + 1
    strides = np.array([base**3, base**2, base, 1], dtype=np.int64)
    n_lin = base**DIM
    sl_a = a.component_slices()
    sl_b = b.component_slices()
    boxes = {}
    for ia, ib, out, sign in table:
        if ia not in sl_a or ib not in sl_b:
            continue
        fa = a.freqs[sl_a[ia]]
        ca = a.coefs[sl_a[ia]]
        if a_coef_map is not None:
            ca = a_coef_map(ca)
        fb = b.freqs[sl_b[ib]]
        cb = b.coefs[sl_b[ib]]
        box = boxes.setdefault(out, np.zeros((n_lin, rank, rank), dtype=complex))
        conv_scatter(
            np.ascontiguousarray(fa), np.ascontiguousarray(ca),
            np.ascontiguousarray(fb), np.ascontiguousarray(cb),
            complex(sign), side, freq_sign_a, box, halfwidth, strides,
        )
    comps, freqs, coefs = [], [], []
    for out in sorted(boxes):
        box = boxes[out]
        mags = np.abs(box).max(axis=(1, 2))
        nz = np.flatnonzero(mags > 0)
        if not len(nz):
            continue
        k = np.empty((len(nz), DIM), dtype=np.int64)
        rem = nz.copy()
        for mu in range(DIM):
            k[:, mu] = rem // strides[mu] - halfwidth
            rem = rem % strides[mu]
        comps.append(np.full(len(nz), out, dtype=np.int64))
        freqs.append(k)
        coefs.append(box[nz])
    cutoff = a.cutoff if out_cutoff is None else out_cutoff
    if not comps:
        return zero_form(a.rank, out_degree, cutoff)
    return MatrixForm(
        a.rank, out_degree, cutoff,
        np.concatenate(comps), np.concatenate(freqs), np.concatenate(coefs),
    )


def _dagger_map(coefs):
    return np.conj(np.swapaxes(coefs, 1, 2))


def wedge_adjoint_left(pot, beta):
    """Exact adjoint of (x -> pot ^ x) applied to beta.

    Contraction with the conjugate of pot at negated frequency offsets;
    the result is clipped to the working cutoff, which is exactly the
    adjoint on the band-limited space.
    """
    _check_compat(pot, beta)
    p_out = beta.degree - pot.degree
    if p_out < 0:
        raise ShapeMismatch("adjoint contraction below degree 0")
    if pot.is_zero() or beta.is_zero():
        return zero_form(beta.rank, p_out, beta.cutoff)
    hw = pot.bandwidth + beta.bandwidth
    table = tuple(
        (iu, out_t, js, sign) for (iu, js, out_t, sign) in wedge_table(DIM, pot.degree, p_out)
    )
    out = _conv_bilinear(pot, beta, table, p_out, halfwidth=hw, side=0,
                         freq_sign_a=-1, a_coef_map=_dagger_map,
                         out_cutoff=max(hw, beta.cutoff))
    return out.truncated(beta.cutoff)


def wedge_adjoint_right(pot, beta):
    """Exact adjoint of (x -> x ^ pot) applied to beta."""
    _check_compat(pot, beta)
    p_out = beta.degree - pot.degree
    if p_out < 0:
        raise ShapeMismatch("adjoint contraction below degree 0")
    if pot.is_zero() or beta.is_zero():
        return zero_form(beta.rank, p_out, beta.cutoff)
    hw = pot.bandwidth + beta.bandwidth
    table = tuple(
        (ju, out_t, i_s, sign) for (i_s, ju, out_t, sign) in wedge_table(DIM, p_out, pot.degree)
    )
    out = _conv_bilinear(pot, beta, table, p_out, halfwidth=hw, side=1,
                         freq_sign_a=-1, a_coef_map=_dagger_map,
                         out_cutoff=max(hw, beta.cutoff))
    return out.truncated(beta.cutoff)


def d(a):
    """Flat exterior derivative: inserts i k_mu dx_mu; d of d vanishes."""
    if a.degree >= DIM:
        raise ShapeMismatch("d undefined on top forms")
    if a.is_zero():
        return zero_form(a.rank, a.degree + 1, a.cutoff)
    slices = a.component_slices()
    comps, freqs, coefs = [], [], []
    for cin, axis, cout, sign in insert_table(DIM, a.degree):
        if cin not in slices:
            continue
        sl = slices[cin]
        factor = 1j * sign * a.freqs[sl, axis]
        nz = np.flatnonzero(factor != 0)
        if not len(nz):
            continue
        comps.append(np.full(len(nz), cout, dtype=np.int64))
        freqs.append(a.freqs[sl][nz])
        coefs.append(factor[nz, None, None] * a.coefs[sl][nz])
    if not comps:
        return zero_form(a.rank, a.degree + 1, a.cutoff)
    return MatrixForm(a.rank, a.degree + 1, a.cutoff, np.concatenate(comps),
                      np.concatenate(freqs), np.concatenate(coefs))


def d_star(b):
    """Exact adjoint of d in the orthonormal monomial basis."""
    if b.degree == 0:
        raise DegreeZero("d* undefined on 0-forms")
    if b.is_zero():
        return zero_form(b.rank, b.degree - 1, b.cutoff)
    slices = b.component_slices()
    comps, freqs, coefs = [], [], []
    for cin, axis, cout, sign in insert_table(DIM, b.degree - 1):
        if cout not in slices:
            continue
        sl = slices[cout]
        factor = -1j * sign * b.freqs[sl, axis]
        nz = np.flatnonzero(factor != 0)
        if not len(nz):
            continue
        comps.append(np.full(len(nz), cin, dtype=np.int64))
        freqs.append(b.freqs[sl][nz])
        coefs.append(factor[nz, None, None] * b.coefs[sl][nz])
    if not comps:
        return zero_form(b.rank, b.degree - 1, b.cutoff)
    return MatrixForm(b.rank, b.degree - 1, b.cutoff, np.concatenate(comps),
                      np.concatenate(freqs), np.concatenate(coefs))


# ---- real structures and fiber actions ---------------------------------


def real_T(a, structure="end"):
    """Antilinear real structure: f(k) -> conj f(-k), values -> -(.)^dagger.

    structure "scalar" conjugates the function part only (for C-valued
    forms embedded as multiples of the identity).
    """
    if structure == "end":
        coefs = -np.conj(np.swapaxes(a.coefs, 1, 2))
    elif structure == "scalar":
        coefs = np.conj(a.coefs)
    else:
        raise ValueError(f"unknown real structure {structure!r}")
    return MatrixForm(a.rank, a.degree, a.cutoff, a.comps, -a.freqs, coefs)


def tilde_T(a, structure="end"):
    """Leibniz extension of real_T over the canonical monomial presentation.

    Acts as real_T + (p - 1) Id on p-forms, so a T-real p-form is an
    eigenvector with eigenvalue p.
    """
    if a.degree == 0:
        raise DegreeZero("tilde_T undefined on 0-forms")
    return real_T(a, structure) + (a.degree - 1) * a


def is_t_real(a, tol=1e-12):
    diff = a - real_T(a)
    return norm(diff) <= tol * max(norm(a), 1.0)


def t_real_part(a):
    return 0.5 * (a + real_T(a))


def apply_fiber(a, fiber_op):
    """Apply a FiberOperator (frequency-preserving component mixing)."""
    blk = fiber_op.block(a.degree)
    out_degree = a.degree + fiber_op.shift
    if a.is_zero():
        return zero_form(a.rank, out_degree, a.cutoff)
    slices = a.component_slices()
    comps, freqs, coefs = [], [], []
    for cin, sl in slices.items():
        col = blk[:, cin]
        for cout in np.flatnonzero(np.abs(col) > 0):
            comps.append(np.full(sl.stop - sl.start, cout, dtype=np.int64))
            freqs.append(a.freqs[sl])
            coefs.append(col[cout] * a.coefs[sl])
    if not comps:
        return zero_form(a.rank, out_degree, a.cutoff)
    return MatrixForm(a.rank, out_degree, a.cutoff, np.concatenate(comps),
                      np.concatenate(freqs), np.concatenate(coefs))


def type_project(a, structure, p, q):
    from .frame import type_projector

    if p + q != a.degree or min(p, q) < 0:
        raise WrongType(f"(p,q)=({p},{q}) invalid for degree {a.degree}")
    return apply_fiber(a, type_projector(structure, p, q))


def type_residual(a, structure, p, q):
    """Relative norm of the part of a outside Lambda^{p,q}_L."""
    na = norm(a)
    if na == 0:
        return 0.0
    return norm(a - type_project(a, structure, p, q)) / na


def bar_J(a, frame=None, tol=1e-12, structure="end"):
    """Composition of the multiplicative J action with the real structure.

    Defined on (p,0)-forms w.r.t. I; squares to (-1)^p there.
    """
    from .frame import make_frame, mult_extension, structure_I

    frame = frame or make_frame()
    if not a.is_zero() and type_residual(a, structure_I(frame), a.degree, 0) > tol:
        raise WrongType("bar_J requires a (p,0)-form w.r.t. I")
    return apply_fiber(real_T(a, structure), _mult_cached(frame, "J"))


def bar_J_inv(a, frame=None, tol=1e-12, structure="end"):
    sign = 1.0 if a.degree % 2 == 0 else -1.0
    return sign * bar_J(a, frame, tol, structure)


_MULT_CACHE = {}


def _mult_cached(frame, which):
    from .frame import mult_extension

    key = (id(frame), which)
    if key not in _MULT_CACHE:
        _MULT_CACHE[key] = mult_extension(getattr(frame, which), label=which)
    return _MULT_CACHE[key]


def mult_apply(a, matrix, label="L"):
    """Multiplicative (degree-wise minor) action of a coframe matrix."""
    from .frame import mult_extension

    key = ("mat", matrix.tobytes(), matrix.shape)
    if key not in _MULT_CACHE:
        _MULT_CACHE[key] = mult_extension(matrix, label)
    return apply_fiber(a, _MULT_CACHE[key])


# ---- serialization ------------------------------------------------------


def to_json_dict(a):
    """Documented JSON layout; floats round-trip bit-exactly."""
    entries = []
    comps = subsets(DIM, a.degree)
    for i in range(a.n_entries):
        matrix = []
        for row in a.coefs[i]:
            for z in row:
                matrix.append([float(z.real), float(z.imag)])
        entries.append(
            {
                "component": [axis + 1 for axis in comps[a.comps[i]]],
                "k": [int(x) for x in a.freqs[i]],
                "matrix": matrix,
            }
        )
    return {"rank": a.rank, "degree": a.degree, "cutoff": a.cutoff, "entries": entries}


def from_json_dict(obj):
    rank = int(obj["rank"])
    degree = int(obj["degree"])
    index = subset_index(DIM, degree)
    comps, freqs, coefs = [], [], []
    for entry in obj["entries"]:
        comps.append(index[tuple(axis - 1 for axis in entry["component"])])
        freqs.append(entry["k"])
        flat = np.array([re + 1j * im for re, im in entry["matrix"]])
        coefs.append(flat.reshape(rank, rank))
    return MatrixForm(rank, degree, int(obj["cutoff"]), comps, freqs, coefs)


def dumps(a, **kwargs):
    return json.dumps(to_json_dict(a), **kwargs)


def loads(text):
    return from_json_dict(json.loads(text))
