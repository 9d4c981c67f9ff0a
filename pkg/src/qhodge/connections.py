"""Hermitian connections on trivial bundles over T^4 and their operators.

The potential A is a T-real (u(r)-valued) 1-form; the covariant derivative
on End-valued p-forms is nabla a = d a + A ^ a - (-1)^p a ^ A and the
curvature is Theta = dA + A ^ A.  All first-order operators are built from
d, wedge multiplication by A, and constant fiber maps; adjoints are exact
adjoints of the discretized operators, so Laplacians are Hermitian
nonnegative by construction.

Sign conventions that depend on the orientation chirality of the frame
(see frame module docstring) are centralized here:

* KODAIRA_SIGN: [Lambda_L, partial_L] = KODAIRA_SIGN * i * dbar_L^* on the
  flat bundle (and with hyperholomorphic twists).
* DELTA_SIGN: delta = (partial + DELTA_SIGN * i * partial_j) / 2 makes the
  commutation [L_J, delta^*] = i * delta_bar hold with a plus sign.

Both are verified by the identity suite tests.
"""

import json

import numpy as np

from . import forms as F
from .errors import BandwidthOverflow, NotHermitian, ShapeMismatch, WrongType
from .frame import (
    FiberOperator,
    InducedStructure,
    holomorphic_symplectic,
    make_frame,
    mult_extension,
    omega_form,
    structure_I,
    structure_J,
    structure_K,
    type_projector,
)
from .combinat import n_components, subsets, wedge_table

KODAIRA_SIGN = -1.0
DELTA_SIGN = -1.0


# ---- operator algebra ----------------------------------------------------


class Operator:
    """Lazy linear operator on MatrixForms with an exact adjoint."""

    __slots__ = ("label", "_apply", "_adjoint_factory", "_adjoint")

    def __init__(self, label, apply_fn, adjoint_factory):
        self.label = label
        self._apply = apply_fn
        self._adjoint_factory = adjoint_factory
        self._adjoint = None

    def __call__(self, form):
        return self._apply(form)

    def adjoint(self):
        if self._adjoint is None:
            self._adjoint = self._adjoint_factory()
            self._adjoint._adjoint = self
        return self._adjoint


def op_compose(after, before, label=None):
    label = label or f"{after.label}*{before.label}"
    return Operator(
        label,
        lambda x: after(before(x)),
        lambda: op_compose(before.adjoint(), after.adjoint(), label=label + "^*"),
    )


def op_add(a, b, coeff=1.0, label=None):
    label = label or f"({a.label}+{b.label})"
    return Operator(
        label,
        lambda x: a(x) + coeff * b(x),
        lambda: op_add(a.adjoint(), b.adjoint(), np.conj(coeff), label=label + "^*"),
    )


def op_scale(a, coeff, label=None):
    label = label or f"{coeff}*{a.label}"
    return Operator(
        label,
        lambda x: coeff * a(x),
        lambda: op_scale(a.adjoint(), np.conj(coeff), label=label + "^*"),
    )


def op_from_fiber(fiber_op):
    return Operator(
        fiber_op.label,
        lambda x: F.apply_fiber(x, fiber_op),
        lambda: op_from_fiber(fiber_op.adjoint()),
    )


def fiber_wedge_operator(fiber_vec, dim=4, label="w^"):
    """Fiber map of wedging with a constant scalar 2-form."""
    vec = np.asarray(fiber_vec, dtype=complex)
    blocks = {}
    for p in range(dim - 1):
        blk = np.zeros((n_components(dim, p + 2), n_components(dim, p)), dtype=complex)
        for iu, js, out, sign in wedge_table(dim, 2, p):
            blk[out, js] += sign * vec[iu]
        blocks[p] = blk
    return FiberOperator(label, dim, 2, blocks)


def laplace_of(op):
    """op op^* + op^* op."""
    return op_add(op_compose(op, op.adjoint()), op_compose(op.adjoint(), op),
                  label=f"Delta_{op.label}")


# ---- the connection ------------------------------------------------------


class HermitianConnection:
    """Trivial rank-r bundle with Hermitian potential A (degree-1, T-real)."""

    def __init__(self, potential, frame=None, tol=1e-12):
        if potential.degree != 1:
            raise ShapeMismatch("potential must be a 1-form")
        herm = F.norm(potential - F.real_T(potential))
        if herm > tol * max(1.0, F.norm(potential)):
            raise NotHermitian(f"T(A) != A, residual {herm:.3e}")
        self.potential = potential
        self.rank = potential.rank
        self.cutoff = potential.cutoff
        self.frame = frame or make_frame()
        self._curvature = None
        self._proj_cache = {}

    # -- curvature ---------------------------------------------------------

    def curvature(self):
        """Theta = dA + A ^ A (cached)."""
        if self._curvature is None:
            a = self.potential
            if 2 * a.bandwidth > self.cutoff:
                raise BandwidthOverflow("curvature would exceed the cutoff")
            self._curvature = F.d(a) + F.wedge(a, a)
        return self._curvature

    def bianchi_residual(self):
        th = self.curvature()
        if th.is_zero():
            return 0.0
        r = F.d(th) + F.wedge(self.potential, th) - F.wedge(th, self.potential)
        return F.norm(r) / max(F.norm(th), 1.0)

    # -- fiber projector cache ----------------------------------------------

    def projector(self, structure, p, q):
        key = (tuple(np.round(structure.coeffs, 14)), p, q)
        if key not in self._proj_cache:
            self._proj_cache[key] = type_projector(structure, p, q)
        return self._proj_cache[key]

    # -- first order operators ----------------------------------------------

    def nabla(self):
        A = self.potential

        def apply(x):
            out = F.d(x)
            if not A.is_zero():
                sign = -1.0 if x.degree % 2 else 1.0
                out = out + F.wedge(A, x) - sign * F.wedge(x, A)
            return out

        def adj_apply(y):
            out = F.d_star(y)
            if not A.is_zero():
                sign = -1.0 if (y.degree - 1) % 2 else 1.0
                out = (out + F.wedge_adjoint_left(A, y)
                       - sign * F.wedge_adjoint_right(A, y))
            return out

        def adjoint_factory():
            return Operator("nabla^*", adj_apply, lambda: self.nabla())

        return Operator("nabla", apply, adjoint_factory)

    def partial(self, structure=None):
        """(1,0)-part of nabla w.r.t. an induced structure (default I)."""
        structure = structure or structure_I(self.frame)
        nab = self.nabla()

        def apply(x):
            deg = x.degree
            out = F.zero_form(self.rank, deg + 1, self.cutoff)
            for q in range(deg + 1):
                p = deg - q
                piece = F.apply_fiber(x, self.projector(structure, p, q))
                if piece.is_zero():
                    continue
                out = out + F.apply_fiber(nab(piece), self.projector(structure, p + 1, q))
            return out

        def adj_apply(y):
            deg = y.degree - 1
            nab_star = nab.adjoint()
            out = F.zero_form(self.rank, deg, self.cutoff)
            for q in range(deg + 1):
                p = deg - q
                piece = F.apply_fiber(y, self.projector(structure, p + 1, q))
                if piece.is_zero():
                    continue
                out = out + F.apply_fiber(nab_star(piece), self.projector(structure, p, q))
            return out

        def adjoint_factory():
            return Operator("partial^*", adj_apply, lambda: self.partial(structure))

        return Operator("partial", apply, adjoint_factory)

    def dbar(self, structure=None):
        """(0,1)-part of nabla w.r.t. an induced structure (default I)."""
        structure = structure or structure_I(self.frame)
        nab = self.nabla()

        def apply(x):
            deg = x.degree
            out = F.zero_form(self.rank, deg + 1, self.cutoff)
            for q in range(deg + 1):
                p = deg - q
                piece = F.apply_fiber(x, self.projector(structure, p, q))
                if piece.is_zero():
                    continue
                out = out + F.apply_fiber(nab(piece), self.projector(structure, p, q + 1))
            return out

        def adj_apply(y):
            deg = y.degree - 1
            nab_star = nab.adjoint()
            out = F.zero_form(self.rank, deg, self.cutoff)
            for q in range(deg + 1):
                p = deg - q
                piece = F.apply_fiber(y, self.projector(structure, p, q + 1))
                if piece.is_zero():
                    continue
                out = out + F.apply_fiber(nab_star(piece), self.projector(structure, p, q))
            return out

        def adjoint_factory():
            return Operator("dbar^*", adj_apply, lambda: self.dbar(structure))

        return Operator("dbar", apply, adjoint_factory)

    def partial_j(self, tol=1e-9):
        """J-conjugate holomorphic derivative on (p,0)-forms w.r.t. I."""
        par = self.partial()
        frame = self.frame

        def apply(x):
            if not x.is_zero() and F.type_residual(x, structure_I(frame), x.degree, 0) > tol:
                raise WrongType("partial_j requires a (p,0)-form w.r.t. I")
            return F.bar_J(par(F.bar_J_inv(x, frame, tol=np.inf)), frame, tol=np.inf)

        def adj_apply(y):
            return F.bar_J(par.adjoint()(F.bar_J_inv(y, frame, tol=np.inf)), frame,
                           tol=np.inf)

        def adjoint_factory():
            return Operator("partial_j^*", adj_apply, lambda: self.partial_j(tol))

        return Operator("partial_j", apply, adjoint_factory)

    def delta(self):
        """(1,0)-part of partial for the Jbar-type decomposition."""
        return op_scale(op_add(self.partial(), self.partial_j(), coeff=DELTA_SIGN * 1j),
                        0.5, label="delta")

    def delta_bar(self):
        return op_scale(op_add(self.partial(), self.partial_j(), coeff=-DELTA_SIGN * 1j),
                        0.5, label="delta_bar")

    def lop(self, structure):
        """Wedge with the Kaehler form of an induced structure."""
        vec = omega_form(structure)
        return op_from_fiber(fiber_wedge_operator(vec, self.frame.dim, label="L_om"))

    def lambdaop(self, structure):
        return op_from_fiber(
            fiber_wedge_operator(omega_form(structure), self.frame.dim, "L_om").adjoint("Lambda")
        )

    def l_c(self, normalized=False):
        """Wedge with the (2,0) holomorphic symplectic form."""
        vec = holomorphic_symplectic(self.frame)
        if normalized:
            vec = vec / np.sqrt(2.0)
        return op_from_fiber(fiber_wedge_operator(vec, self.frame.dim, label="L_c"))

    def lambda_c(self, normalized=False):
        vec = holomorphic_symplectic(self.frame)
        if normalized:
            vec = vec / np.sqrt(2.0)
        return op_from_fiber(fiber_wedge_operator(vec, self.frame.dim, "L_c").adjoint("Lambda_c"))

    def d_c(self, structure):
        """L nabla L^{-1} for the multiplicative action of a structure."""
        u = mult_extension(structure.matrix, label="L")
        u_inv = mult_extension(-structure.matrix, label="L^-1")
        return op_compose(op_from_fiber(u), op_compose(self.nabla(), op_from_fiber(u_inv)),
                          label="d_c")

    def conjugated(self, op, structure):
        """L op L^{-1} with the multiplicative form action of a structure."""
        u = mult_extension(structure.matrix, label="L")
        u_inv = mult_extension(-structure.matrix, label="L^-1")
        return op_compose(op_from_fiber(u), op_compose(op, op_from_fiber(u_inv)),
                          label=f"({op.label})^L")

    def curvature_operator(self):
        """End(B) curvature action x -> Theta ^ x - x ^ Theta."""
        th = self.curvature()

        def apply(x):
            if th.is_zero():
                return F.zero_form(self.rank, x.degree + 2, self.cutoff)
            return F.wedge(th, x) - F.wedge(x, th)

        def adj_apply(y):
            if th.is_zero():
                return F.zero_form(self.rank, y.degree - 2, self.cutoff)
            return F.wedge_adjoint_left(th, y) - F.wedge_adjoint_right(th, y)

        def adjoint_factory():
            return Operator("Theta^*", adj_apply, lambda: self.curvature_operator())

        return Operator("Theta", apply, adjoint_factory)

    # -- diagnostics ---------------------------------------------------------

    def newlander_test(self, structure):
        """Relative norm of the (2,0)+(0,2) curvature part; 0 = integrable."""
        th = self.curvature()
        if th.is_zero():
            return 0.0
        bad = (F.apply_fiber(th, self.projector(structure, 2, 0))
               + F.apply_fiber(th, self.projector(structure, 0, 2)))
        floor = 1e-14 * (1.0 + F.norm(self.potential)) ** 2
        return F.norm(bad) / max(F.norm(th), floor)

    # -- serialization --------------------------------------------------------

    def to_json_dict(self):
        return {
            "rank": self.rank,
            "cutoff": self.cutoff,
            "potential": F.to_json_dict(self.potential),
        }

    @classmethod
    def from_json_dict(cls, obj, frame=None):
        return cls(F.from_json_dict(obj["potential"]), frame=frame)


# ---- named constructors ---------------------------------------------------


def zero_connection(rank, cutoff, frame=None):
    return HermitianConnection(F.zero_form(rank, 1, cutoff), frame=frame)


def constant_commuting(rank, cutoff, theta=None, frame=None):
    """Flat connection with holonomy: A_mu = i diag(theta[:, mu])."""
    if theta is None:
        theta = np.array([[0.1 * (a + 1) + 0.05 * b for a in range(4)] for b in range(rank)])
    theta = np.asarray(theta, dtype=float).reshape(rank, 4)
    form = F.zero_form(rank, 1, cutoff)
    for mu in range(4):
        form = form + F.monomial(rank, 1, cutoff, (mu,), (0, 0, 0, 0),
                                 1j * np.diag(theta[:, mu]))
    return HermitianConnection(form, frame=frame)


def constant_noncommuting(rank, cutoff, scale=1.0, frame=None):
    """Constant potential with noncommuting components (nonzero curvature)."""
    if rank < 2:
        raise ShapeMismatch("need rank >= 2 for noncommuting components")
    x = np.zeros((rank, rank), dtype=complex)
    y = np.zeros((rank, rank), dtype=complex)
    x[0, 1], x[1, 0] = 1.0, -1.0
    y[0, 1], y[1, 0] = 1.0j, 1.0j
    form = (F.monomial(rank, 1, cutoff, (0,), (0, 0, 0, 0), scale * x)
            + F.monomial(rank, 1, cutoff, (1,), (0, 0, 0, 0), scale * y))
    return HermitianConnection(form, frame=frame)


def random_connection(rng, rank, cutoff, bandwidth=1, amplitude=0.1, frame=None):
    """Seeded random Hermitian potential with the given bandwidth."""
    raw = F.random_form(rng, rank, 1, cutoff, bandwidth, amplitude)
    return HermitianConnection(F.t_real_part(raw), frame=frame)
