"""Quaternionic linear algebra on the model cotangent fiber R^(4n).

Conventions (fixed once, used everywhere):

* R^4 is identified with the quaternions via
  (x1, x2, x3, x4) <-> x1 + x2 i + x3 j + x4 k, and I, J, K act on tangent
  vectors by left quaternion multiplication.  The coframe carries the same
  matrices (inverse-transpose of an orthogonal matrix).  For n > 1 the
  action is blockwise on R^4 x ... x R^4.
* Orientation dx1^dx2^dx3^dx4 (per block).  With these choices the Kaehler
  forms w_I, w_J, w_K are self-dual and the isotropy-invariant 2-forms are
  exactly the anti-self-dual ones.
* Hodge types: a form of type (p, q) w.r.t. an induced structure L is an
  eigenvector of the derivation extension of L with eigenvalue (p - q) i.
  The holomorphic coframe for I is spanned by dx1 - i dx2, dx3 - i dx4.
* In this frame the (2,0) holomorphic symplectic form is w_J - i w_K.
  (The opposite-chirality combination w_J + i w_K is of type (0,2); which
  one is "holomorphic" is a pure orientation convention.)
"""

from dataclasses import dataclass, field
from functools import lru_cache
from itertools import product

import numpy as np

from .combinat import merge_sign, n_components, subset_index, subsets
from .errors import NotUnitTriple

# Left multiplication by i, j, k on coordinates (x1, x2, x3, x4).
_BLOCK_I = np.array(
    [[0, -1, 0, 0], [1, 0, 0, 0], [0, 0, 0, -1], [0, 0, 1, 0]], dtype=float
)
_BLOCK_J = np.array(
    [[0, 0, -1, 0], [0, 0, 0, 1], [1, 0, 0, 0], [0, -1, 0, 0]], dtype=float
)
_BLOCK_K = np.array(
    [[0, 0, 0, -1], [0, 0, -1, 0], [0, 1, 0, 0], [1, 0, 0, 0]], dtype=float
)


def _blockdiag(block: np.ndarray, n: int) -> np.ndarray:
    out = np.zeros((4 * n, 4 * n))
    for b in range(n):
        out[4 * b : 4 * b + 4, 4 * b : 4 * b + 4] = block
    return out


@dataclass(frozen=True)
class QuaternionFrame:
    """The three constant complex-structure matrices on the coframe."""

    I: np.ndarray
    J: np.ndarray
    K: np.ndarray

    @property
    def dim(self) -> int:
        return self.I.shape[0]

    @property
    def n_quat(self) -> int:
        return self.dim // 4


@lru_cache(maxsize=8)
def make_frame(n_quat: int = 1) -> QuaternionFrame:
    """Canonical frame from the fixed left-multiplication convention."""
    return QuaternionFrame(
        I=_blockdiag(_BLOCK_I, n_quat),
        J=_blockdiag(_BLOCK_J, n_quat),
        K=_blockdiag(_BLOCK_K, n_quat),
    )


@dataclass(frozen=True)
class InducedStructure:
    """Complex structure a I + b J + c K with (a, b, c) on the unit sphere."""

    coeffs: tuple
    matrix: np.ndarray
    frame: QuaternionFrame


def induced(a: float, b: float, c: float, frame: QuaternionFrame | None = None) -> InducedStructure:
    frame = frame or make_frame()
    norm2 = a * a + b * b + c * c
    if abs(norm2 - 1.0) > 1e-9:
        raise NotUnitTriple(f"|a^2+b^2+c^2 - 1| = {abs(norm2 - 1.0):.3e} > 1e-9")
    s = 1.0 / np.sqrt(norm2)
    a, b, c = a * s, b * s, c * s
    mat = a * frame.I + b * frame.J + c * frame.K
    return InducedStructure(coeffs=(a, b, c), matrix=mat, frame=frame)


def structure_I(frame: QuaternionFrame | None = None) -> InducedStructure:
    return induced(1.0, 0.0, 0.0, frame)


def structure_J(frame: QuaternionFrame | None = None) -> InducedStructure:
    return induced(0.0, 1.0, 0.0, frame)


def structure_K(frame: QuaternionFrame | None = None) -> InducedStructure:
    return induced(0.0, 0.0, 1.0, frame)


def random_induced(rng: np.random.Generator, frame: QuaternionFrame | None = None) -> InducedStructure:
    v = rng.normal(size=3)
    v /= np.linalg.norm(v)
    return induced(*v, frame)


class FiberOperator:
    """Degree-indexed family of matrices acting on the exterior fiber.

    blocks[p] maps degree-p component vectors to degree-(p + shift) ones.
    Missing degrees act as zero.
    """

    __slots__ = ("label", "dim", "shift", "blocks")

    def __init__(self, label: str, dim: int, shift: int, blocks: dict):
        self.label = label
        self.dim = dim
        self.shift = shift
        self.blocks = {p: np.asarray(m, dtype=complex) for p, m in blocks.items()}

    def block(self, p: int) -> np.ndarray:
        blk = self.blocks.get(p)
        if blk is None:
            return np.zeros((n_components(self.dim, p + self.shift), n_components(self.dim, p)), dtype=complex)
        return blk

    def compose(self, other: "FiberOperator", label: str | None = None) -> "FiberOperator":
        """self after other."""
        blocks = {}
        for p, m in other.blocks.items():
            q = p + other.shift
            if q in self.blocks:
                blocks[p] = self.blocks[q] @ m
        return FiberOperator(label or f"{self.label}*{other.label}", self.dim, self.shift + other.shift, blocks)

    def adjoint(self, label: str | None = None) -> "FiberOperator":
        blocks = {p + self.shift: m.conj().T for p, m in self.blocks.items()}
        return FiberOperator(label or f"{self.label}^*", self.dim, -self.shift, blocks)

    def add(self, other: "FiberOperator", coeff=1.0, label: str | None = None) -> "FiberOperator":
        assert self.shift == other.shift and self.dim == other.dim
        degrees = set(self.blocks) | set(other.blocks)
        blocks = {p: self.block(p) + coeff * other.block(p) for p in degrees}
        return FiberOperator(label or f"{self.label}+{other.label}", self.dim, self.shift, blocks)

    def scale(self, coeff, label: str | None = None) -> "FiberOperator":
        return FiberOperator(label or self.label, self.dim, self.shift,
                             {p: coeff * m for p, m in self.blocks.items()})

    def commutator(self, other: "FiberOperator", label: str | None = None) -> "FiberOperator":
        ab = self.compose(other)
        ba = other.compose(self)
        return ab.add(ba, coeff=-1.0, label=label or f"[{self.label},{other.label}]")


def mult_extension(mat: np.ndarray, label: str = "L") -> FiberOperator:
    """Multiplicative extension M(a ^ b) = M(a) ^ M(b) to all degrees.

    The degree-p block entries are the p x p minors of the coframe matrix.
    """
    mat = np.asarray(mat)
    dim = mat.shape[0]
    blocks = {0: np.ones((1, 1), dtype=complex)}
    for p in range(1, dim + 1):
        rows = subsets(dim, p)
        cols = subsets(dim, p)
        blk = np.empty((len(rows), len(cols)), dtype=complex)
        for a, t in enumerate(rows):
            for b, s in enumerate(cols):
                blk[a, b] = np.linalg.det(mat[np.ix_(t, s)])
        blocks[p] = blk
    return FiberOperator(label, dim, 0, blocks)


def ad_extension(mat: np.ndarray, label: str = "ad L") -> FiberOperator:
    """Derivation (Leibniz) extension of a coframe matrix to all degrees."""
    mat = np.asarray(mat)
    dim = mat.shape[0]
    blocks = {0: np.zeros((1, 1), dtype=complex)}
    for p in range(1, dim + 1):
        comps = subsets(dim, p)
        index = subset_index(dim, p)
        blk = np.zeros((len(comps), len(comps)), dtype=complex)
        for b, s in enumerate(comps):
            for pos, axis in enumerate(s):
                rest = s[:pos] + s[pos + 1 :]
                for new in range(dim):
                    coeff = mat[new, axis]
                    if coeff == 0 or new in rest:
                        continue
                    # sign moving dx_new from slot pos into sorted position
                    before = sum(1 for y in rest if y < new)
                    sign = -1 if (pos + before) % 2 else 1
                    target = tuple(sorted(rest + (new,)))
                    blk[index[target], b] += sign * coeff
        blocks[p] = blk
    return FiberOperator(label, dim, 0, blocks)


def ad_operator(structure: InducedStructure, p: int | None = None):
    """Derivation extension of an induced structure; one degree or all."""
    op = ad_extension(structure.matrix, label="ad L")
    if p is None:
        return op
    return op.block(p)


@lru_cache(maxsize=None)
def _type_eigenvalues(degree: int) -> tuple:
    return tuple(degree - 2 * q for q in range(degree + 1))


def type_projector(structure: InducedStructure, p: int, q: int) -> FiberOperator:
    """Orthogonal projector onto the (p, q) eigenspace of ad L on degree p+q.

    Spectral projector via the product formula; eigenvalues of ad L on
    degree d are exactly (d - 2q) i, so the result is exact to rounding.
    """
    d = p + q
    ad = ad_extension(structure.matrix).block(d)
    target = p - q
    proj = np.eye(ad.shape[0], dtype=complex)
    for m in _type_eigenvalues(d):
        if m == target:
            continue
        proj = proj @ (ad - 1j * m * np.eye(ad.shape[0])) / (1j * target - 1j * m)
    return FiberOperator(f"Pi^{p},{q}", structure.frame.dim, 0, {d: proj})


def omega_form(structure_or_matrix) -> np.ndarray:
    """Kaehler 2-form of a structure as a fiber component vector.

    omega_L(e_a, e_b) = <L e_a, e_b> = L[b, a] for a < b.
    """
    mat = getattr(structure_or_matrix, "matrix", structure_or_matrix)
    dim = mat.shape[0]
    comps = subsets(dim, 2)
    return np.array([mat[b, a] for (a, b) in comps], dtype=complex)


def x_frame(frame: QuaternionFrame):
    """Holomorphic coframe pairs (x_i, x_i') with x_i' = Jbar(x_i).

    Per quaternionic block: x = dx1 - i dx2 and x' = dx3 - i dx4; together
    the 2n covectors form a basis of the (1,0) space for I, and
    sum_i x_i ^ x_i' equals the holomorphic symplectic form w_J - i w_K.
    """
    xs, xps = [], []
    for b in range(frame.n_quat):
        x = np.zeros(frame.dim, dtype=complex)
        xp = np.zeros(frame.dim, dtype=complex)
        x[4 * b] = 1.0
        x[4 * b + 1] = -1.0j
        xp[4 * b + 2] = 1.0
        xp[4 * b + 3] = -1.0j
        xs.append(x)
        xps.append(xp)
    return xs, xps


def holomorphic_symplectic(frame: QuaternionFrame) -> np.ndarray:
    """The (2,0) symplectic fiber form w_J - i w_K = sum_i x_i ^ x_i'."""
    return omega_form(frame.J) - 1j * omega_form(frame.K)


def fiber_wedge_vectors(dim: int, u: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Wedge of two covectors as a degree-2 component vector."""
    comps = subsets(dim, 2)
    out = np.empty(len(comps), dtype=complex)
    for idx, (a, b) in enumerate(comps):
        out[idx] = u[a] * v[b] - u[b] * v[a]
    return out


# 24 unit Hurwitz quaternions: the binary tetrahedral group.
def _hurwitz_units():
    units = []
    for axis in range(4):
        for s in (1.0, -1.0):
            q = np.zeros(4)
            q[axis] = s
            units.append(q)
    for signs in product((0.5, -0.5), repeat=4):
        units.append(np.array(signs))
    return units


def quaternion_action_matrix(q: np.ndarray, frame: QuaternionFrame) -> np.ndarray:
    """Coframe matrix of a unit quaternion (w, x, y, z) acting by left mult."""
    w, x, y, z = q
    return w * np.eye(frame.dim) + x * frame.I + y * frame.J + z * frame.K


def su2_invariant_projector(frame: QuaternionFrame | None = None, n_random: int = 100,
                            seed: int = 20240601) -> FiberOperator:
    """Orthogonal projector on 2-forms onto the isotropy-invariant subspace.

    Averages the multiplicative action of the 24 Hurwitz units plus seeded
    random unit quaternions, then snaps the average to an exact projector
    through its eigenvectors.  On R^4 the image is the anti-self-dual
    3-space, the complement of span{w_I, w_J, w_K}.
    """
    frame = frame or make_frame()
    rng = np.random.default_rng(seed)
    qs = _hurwitz_units()
    for _ in range(n_random):
        q = rng.normal(size=4)
        qs.append(q / np.linalg.norm(q))
    avg = np.zeros((n_components(frame.dim, 2),) * 2, dtype=complex)
    for q in qs:
        avg += mult_extension(quaternion_action_matrix(q, frame)).block(2)
    avg /= len(qs)
    # eigenvalue 1 <-> invariant subspace; everything else is < 1 in modulus
    w, v = np.linalg.eigh((avg + avg.conj().T) / 2)
    cols = v[:, w > 0.9]
    proj = cols @ cols.conj().T
    return FiberOperator("Pi_inv", frame.dim, 0, {2: proj})


def conjugate_structure(structure: InducedStructure, rot: InducedStructure) -> InducedStructure:
    """The induced structure R L R^{-1}, computed on coefficient triples.

    Conjugation by a unit imaginary quaternion r is the 180 degree rotation
    of the coefficient sphere about r: l -> 2 (l . r) r - l.
    """
    l = np.array(structure.coeffs)
    r = np.array(rot.coeffs)
    out = 2.0 * float(l @ r) * r - l
    return induced(*out, structure.frame)


def rotation_between(structure: InducedStructure, target: InducedStructure) -> InducedStructure:
    """An induced R with R L R^{-1} = target (great-circle midpoint).

    Tie-breaks: R = L when target = L; when target = -L the result is the
    lexicographically smallest unit triple orthogonal to L (coefficients
    rounded at 1e-12).
    """
    frame = structure.frame
    l = np.array(structure.coeffs)
    m = np.array(target.coeffs)
    if np.linalg.norm(m - l) <= 1e-12:
        return induced(*l, frame)
    if np.linalg.norm(m + l) <= 1e-12:
        for basis_axis in range(3):
            e = np.zeros(3)
            e[basis_axis] = 1.0
            v = e - float(e @ l) * l
            nv = np.linalg.norm(v)
            if nv > 1e-12:
                v = -v / nv
                v[np.abs(v) < 1e-12] = 0.0
                return induced(*(v / np.linalg.norm(v)), frame)
    mid = l + m
    mid /= np.linalg.norm(mid)
    return induced(*mid, frame)
