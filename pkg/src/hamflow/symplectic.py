"""Symplectic and Lagrangian linear algebra in R^{2n}.

A symplectic space is R^{2n} together with a compatible complex structure J
(J^2 = -I, J^T = -J); the symplectic form is w(x, y) = <Jx, y>.  Subspaces are
represented by orthonormal column frames, projections are derived from frames,
and the real <-> complex dictionary runs through an orthonormal basis adapted
to J, so that complexification is an exact algebra map.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

TOL_STRUCTURE = 1e-10
TOL_FRAME = 1e-10
TOL_EIG = 1e-6
RANK_RTOL = 1e-8


class SymplecticError(ValueError):
    """Raised when an input violates a symplectic/Lagrangian contract."""


def _spectral_norm(m):
    return float(np.linalg.norm(m, 2))


def _rank(m, rtol=RANK_RTOL):
    """Rank by singular values with a scale-invariant threshold."""
    if m.size == 0:
        return 0
    s = np.linalg.svd(m, compute_uv=False)
    if s.size == 0 or s[0] == 0.0:
        return 0
    return int(np.count_nonzero(s > rtol * s[0]))


@dataclass(frozen=True)
class SymplecticSpace:
    """R^{2n} with a compatible complex structure J.

    The constructor verifies J^2 = -I and J^T = -J and builds, once, an
    orthonormal basis (v_1..v_n, Jv_1..Jv_n).  In that basis J takes the
    standard block form [[0, -I], [I, 0]], which makes the complex
    identification z_k = x_k + i x_{n+k} exact.
    """

    J: np.ndarray
    tol_structure: float = TOL_STRUCTURE
    # orthogonal change of basis: C^T J C = J_standard
    adapted_basis: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        J = np.asarray(self.J, dtype=float)
        if J.ndim != 2 or J.shape[0] != J.shape[1] or J.shape[0] % 2 != 0 or J.shape[0] == 0:
            raise SymplecticError(f"J must be a nonempty even-dimensional square matrix, got shape {J.shape}")
        dim = J.shape[0]
        eye = np.eye(dim)
        if _spectral_norm(J @ J + eye) > self.tol_structure:
            raise SymplecticError("J^2 + I exceeds tolerance; J is not a complex structure")
        if _spectral_norm(J.T + J) > self.tol_structure:
            raise SymplecticError("J is not antisymmetric within tolerance")
        object.__setattr__(self, "J", J)
        object.__setattr__(self, "adapted_basis", _adapted_basis(J))

    @property
    def dim(self) -> int:
        return self.J.shape[0]

    @property
    def n(self) -> int:
        return self.J.shape[0] // 2

    def omega(self, x, y) -> float:
        """Symplectic form w(x, y) = <Jx, y>."""
        return float(np.dot(self.J @ np.asarray(x, dtype=float), np.asarray(y, dtype=float)))

    def product(self, other: "SymplecticSpace") -> "SymplecticSpace":
        """Product space carrying the form w x (-w'), i.e. J~ = diag(J, -J')."""
        d1, d2 = self.dim, other.dim
        Jt = np.zeros((d1 + d2, d1 + d2))
        Jt[:d1, :d1] = self.J
        Jt[d1:, d1:] = -other.J
        return SymplecticSpace(Jt)


def _adapted_basis(J):
    """Orthonormal basis (v_1..v_n, Jv_1..Jv_n) for which J becomes standard."""
    dim = J.shape[0]
    n = dim // 2
    vs = np.zeros((dim, n))
    chosen = np.zeros((dim, 0))
    for k in range(n):
        # any unit vector orthogonal to span{v_i, Jv_i : i < k} works
        resid = np.eye(dim) - chosen @ chosen.T
        # pick the residual column with the largest norm for stability
        norms = np.linalg.norm(resid, axis=0)
        v = resid[:, int(np.argmax(norms))]
        v = v / np.linalg.norm(v)
        vs[:, k] = v
        chosen = np.column_stack([chosen, v, J @ v])
        # re-orthonormalize accumulated block to fight drift
        chosen, _ = np.linalg.qr(chosen)
    return np.column_stack([vs, J @ vs])


def standard_space(n: int) -> SymplecticSpace:
    """Standard model: J with blocks [[0, -I], [I, 0]] on R^{2n}."""
    if n < 1:
        raise SymplecticError("n must be a positive integer")
    J = np.zeros((2 * n, 2 * n))
    J[:n, n:] = -np.eye(n)
    J[n:, :n] = np.eye(n)
    return SymplecticSpace(J)


@dataclass(frozen=True)
class LagrangianFrame:
    """Orthonormal 2n x n frame spanning a J-Lagrangian subspace."""

    columns: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "columns", np.asarray(self.columns, dtype=float))

    @property
    def dim_ambient(self) -> int:
        return self.columns.shape[0]

    @property
    def dim(self) -> int:
        return self.columns.shape[1]

    def projection(self) -> np.ndarray:
        return self.columns @ self.columns.T

    def check(self, space: SymplecticSpace, tol: float = TOL_FRAME) -> None:
        F = self.columns
        if _spectral_norm(F.T @ F - np.eye(self.dim)) > tol:
            raise SymplecticError("frame columns are not orthonormal within tolerance")
        if _spectral_norm(F.T @ space.J @ F) > tol:
            raise SymplecticError("frame is not isotropic within tolerance")


@dataclass
class SubspacePair:
    """A pair of Lagrangian frames; in finite dimension always a Fredholm pair.

    The Fredholm index of the pair vanishes (dim intersection equals the
    codimension of the sum); the intersection dimension is cached once
    computed.
    """

    first: LagrangianFrame
    second: LagrangianFrame
    _intersection_dim: Optional[int] = field(default=None, repr=False)

    def __post_init__(self):
        if self.first.dim_ambient != self.second.dim_ambient:
            raise SymplecticError("paired frames live in different ambient dimensions")

    def intersection_dim(self) -> int:
        if self._intersection_dim is None:
            self._intersection_dim = intersection_dimension_rank(self.first, self.second)
        return self._intersection_dim

    def fredholm_index(self) -> int:
        stacked = np.column_stack([self.first.columns, self.second.columns])
        codim_sum = self.first.dim_ambient - _rank(stacked)
        return self.intersection_dim() - codim_sum


def lagrangian_from_matrix(raw, space: SymplecticSpace, tol: float = TOL_FRAME) -> LagrangianFrame:
    """Orthonormalize the columns of ``raw`` and certify the span is Lagrangian.

    Rejects rank-deficient input and spans on which the symplectic form does
    not vanish.
    """
    raw = np.atleast_2d(np.asarray(raw, dtype=float))
    if raw.shape[0] == 1 and space.dim > 1:
        raw = raw.T
    n = space.n
    if raw.shape[0] != space.dim:
        raise SymplecticError(f"expected {space.dim} rows, got {raw.shape[0]}")
    if _rank(raw) != n:
        raise SymplecticError(f"input matrix must have rank exactly n = {n}")
    u, s, _ = np.linalg.svd(raw, full_matrices=False)
    F = u[:, :n]
    resid = _spectral_norm(F.T @ space.J @ F)
    if resid > tol:
        raise SymplecticError(f"span is not Lagrangian: |F^T J F| = {resid:.3e} > {tol:.1e}")
    return LagrangianFrame(F)


def orthogonal_projection(frame: LagrangianFrame) -> np.ndarray:
    """P = F F^T, the orthogonal projection onto the frame's span."""
    return frame.projection()


def _signed_norm(diff):
    """Spectral norm of a difference, bitwise symmetric in the operand order."""
    flat = diff.ravel()
    nz = np.flatnonzero(flat)
    if nz.size and flat[nz[0]] < 0:
        diff = -diff
    return _spectral_norm(diff)


def gap_distance(U: LagrangianFrame, V: LagrangianFrame) -> float:
    """Gap metric between subspaces: the spectral norm of P_U - P_V."""
    if U.dim_ambient != V.dim_ambient:
        raise SymplecticError("frames live in different ambient dimensions")
    return _signed_norm(U.projection() - V.projection())


def graph_gap_distance(A, B) -> float:
    """Gap metric between operators A, B via their graphs in R^{2N}."""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    B = np.atleast_2d(np.asarray(B, dtype=float))
    if A.shape != B.shape or A.shape[0] != A.shape[1]:
        raise SymplecticError("A and B must be square matrices of equal size")
    N = A.shape[0]
    ga, _ = np.linalg.qr(np.vstack([np.eye(N), A]))
    gb, _ = np.linalg.qr(np.vstack([np.eye(N), B]))
    return _signed_norm(ga @ ga.T - gb @ gb.T)


def complexify_commuting_operator(M, space: SymplecticSpace, tol: float = 1e-8) -> np.ndarray:
    """Matrix of a J-commuting real operator as a C-linear map on C^n.

    In the adapted basis a commuting M has the block form [[A, B], [-B, A]]
    and acts on z = x + iy as A - iB.
    """
    M = np.asarray(M, dtype=float)
    comm = _spectral_norm(M @ space.J - space.J @ M)
    if comm > tol * max(1.0, _spectral_norm(M)):
        raise SymplecticError(f"operator does not commute with J: residual {comm:.3e}")
    C = space.adapted_basis
    Mc = C.T @ M @ C
    n = space.n
    A = 0.5 * (Mc[:n, :n] + Mc[n:, n:])
    B = 0.5 * (Mc[:n, n:] - Mc[n:, :n])
    return A - 1j * B


def souriau_map(W: LagrangianFrame, L: LagrangianFrame, space: SymplecticSpace,
                tol_unitary: float = 1e-8) -> np.ndarray:
    """Unitary -(I - 2 P_L)(I - 2 P_W) on C^n for Lagrangian L, W.

    dim(L /\\ W) equals the multiplicity of -1 in the spectrum of the result.
    """
    eye = np.eye(space.dim)
    S = -(eye - 2.0 * L.projection()) @ (eye - 2.0 * W.projection())
    U = complexify_commuting_operator(S, space)
    resid = _spectral_norm(U @ U.conj().T - np.eye(space.n))
    if resid > tol_unitary:
        raise SymplecticError(f"Souriau image is not unitary: residual {resid:.3e}; inputs likely not Lagrangian")
    return U


def intersection_dimension(W: LagrangianFrame, L: LagrangianFrame, space: SymplecticSpace,
                           tol_eig: float = TOL_EIG) -> int:
    """dim(L /\\ W), counted as eigenvalues of the Souriau unitary near -1.

    Cross-checked against the rank oracle 2n - rank[F_L | F_W]; a warning is
    emitted when an eigenvalue sits ambiguously near the tol_eig boundary and
    the two counts disagree.
    """
    U = souriau_map(W, L, space)
    phases = np.angle(-np.linalg.eigvals(U))  # 0 <=> eigenvalue -1
    count_s = int(np.count_nonzero(np.abs(phases) <= tol_eig))
    count_rank = 2 * space.n - _rank(np.column_stack([L.columns, W.columns]))
    if count_s != count_rank:
        near = np.abs(np.abs(phases) - tol_eig) < 10 * tol_eig
        warnings.warn(
            f"intersection dimension ambiguous: Souriau count {count_s}, rank count {count_rank}"
            + (" (eigenphases near the tolerance boundary)" if near.any() else ""),
            RuntimeWarning,
        )
    return count_s


def intersection_dimension_rank(W: LagrangianFrame, L: LagrangianFrame) -> int:
    """Independent oracle: dim(L /\\ W) = 2n - rank[F_L | F_W]."""
    stacked = np.column_stack([L.columns, W.columns])
    return stacked.shape[0] - _rank(stacked)


def intersection_basis(W: LagrangianFrame, L: LagrangianFrame, rtol: float = RANK_RTOL) -> np.ndarray:
    """Orthonormal basis of L /\\ W (possibly zero columns)."""
    stacked = np.column_stack([L.columns, -W.columns])
    _, s, vh = np.linalg.svd(stacked, full_matrices=True)
    ncols = stacked.shape[1]
    thresh = rtol * (s[0] if s.size and s[0] > 0 else 1.0)
    idx = np.concatenate([np.flatnonzero(s <= thresh), np.arange(s.size, ncols)])
    if idx.size == 0:
        return np.zeros((L.dim_ambient, 0))
    # null vectors (a; b) satisfy L a = W b, which lies in the intersection
    null_vecs = vh[idx].T
    vecs = L.columns @ null_vecs[: L.dim, :]
    q, _ = np.linalg.qr(vecs)
    return q[:, : idx.size]
