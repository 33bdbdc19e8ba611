"""Winding number for paths of unitaries and the Maslov index.

The Maslov index of a path of Lagrangian subspaces against a reference
Lagrangian W is the winding number, through the eigenvalue -1, of the path
of unitaries obtained from the Souriau map.  Counting is certified on an
adaptive partition: on each subinterval an angular window around -1 is
chosen whose boundary phases are provably avoided by the spectrum, and the
index is the telescoping sum of window counts at the partition nodes.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .symplectic import (
    LagrangianFrame,
    SymplecticSpace,
    SymplecticError,
    intersection_basis,
    souriau_map,
)

UNITARY_BUDGET = 0.4  # max ||U_{i+1} - U_i|| per certified subinterval
MAX_REFINE_DEPTH = 48
SNAP_TOL = 1e-8  # node eigenphases this close to -1 count as crossings


class RefinementError(RuntimeError):
    """A continuity budget could not be met on some subinterval."""


def _eigenphases(U):
    """Signed angular distance of each eigenvalue from -1, in (-pi, pi]."""
    return np.angle(-np.linalg.eigvals(U))


def _phase_margin(dU_norm):
    """Certified bound on eigenphase motion for a unitary step of given norm."""
    half = min(1.0, 0.5 * dU_norm)
    return 2.0 * np.arcsin(half) * 1.25 + 1e-7


def _choose_eps(psi_pair, margin):
    """Window half-width eps with exp(i(pi +- eps)) avoided by both spectra.

    Forbidden zones are intervals of width 2*margin around |psi| (and around
    2*pi - |psi| for wrap safety).  Returns the midpoint of the first free gap
    in (0, pi), or None when the zones cover everything.
    """
    centers = np.abs(np.concatenate(psi_pair))
    centers = np.concatenate([centers, 2.0 * np.pi - centers])
    zones = sorted((c - margin, c + margin) for c in centers)
    lo = 1e-9
    for zlo, zhi in zones:
        if zhi <= lo:
            continue
        if zlo > lo:
            break
        lo = zhi
    if lo >= np.pi - 1e-9:
        return None
    hi = np.pi
    for zlo, zhi in zones:
        if zlo > lo:
            hi = min(hi, zlo)
            break
    if hi - lo < 1e-7:
        return None
    return 0.5 * (lo + hi)


def _count_window(psi, eps, snap_tol):
    """Number of eigenphases in [0, eps], snapping near-zero phases to zero."""
    snapped = np.where(np.abs(psi) <= snap_tol, 0.0, psi)
    return int(np.count_nonzero((snapped >= 0.0) & (snapped <= eps)))


@dataclass
class UnitaryPath:
    """Sampled path of complex unitaries, optionally refinable.

    ``samples`` is a list of (lam, U) with strictly increasing lam; the
    canonical parameter domain is [0, 1].  When ``evaluator`` is provided it
    is used to insert midpoints during certification.
    """

    samples: list
    evaluator: Optional[Callable[[float], np.ndarray]] = None
    tol_unitary: float = 1e-8

    def __post_init__(self):
        if len(self.samples) < 2:
            raise ValueError("a unitary path needs at least two samples")
        lams = [s[0] for s in self.samples]
        if any(b <= a for a, b in zip(lams, lams[1:])):
            raise ValueError("sample parameters must be strictly increasing")
        for lam, U in self.samples:
            U = np.asarray(U)
            n = U.shape[0]
            resid = np.linalg.norm(U @ U.conj().T - np.eye(n), 2)
            if resid > self.tol_unitary:
                raise ValueError(f"sample at lam={lam} is not unitary (residual {resid:.2e})")

    def evaluate(self, lam):
        for s_lam, U in self.samples:
            if s_lam == lam:
                return U
        if self.evaluator is None:
            raise RefinementError(f"path is not refinable and lam={lam} is not sampled")
        return np.asarray(self.evaluator(lam))


def winding_number(d: UnitaryPath, budget: float = UNITARY_BUDGET,
                   snap_tol: float = SNAP_TOL, max_depth: int = MAX_REFINE_DEPTH,
                   endpoint_kernel_dims=None) -> int:
    """Winding number of a path of unitaries through the eigenvalue -1.

    Counts, with sign, the net number of eigenvalues crossing -1 counter-
    clockwise.  The partition is refined adaptively until on each subinterval
    the step norm is below ``budget`` and an admissible counting window
    exists; the result is independent of the admissible partition.

    ``endpoint_kernel_dims`` optionally declares (k0, k1) eigenvalues at -1
    at the two path endpoints; their eigenphases are snapped with a looser
    tolerance so that restrictions cut exactly at a crossing count it.
    """
    nodes = [(lam, np.asarray(U)) for lam, U in d.samples]
    phases = {}

    def psi_at(lam, U):
        if lam not in phases:
            phases[lam] = _eigenphases(U)
        return phases[lam]

    if endpoint_kernel_dims is not None:
        for (lam, U), k in zip((nodes[0], nodes[-1]), endpoint_kernel_dims):
            psi = psi_at(lam, U)
            order = np.argsort(np.abs(psi))
            loose = max(snap_tol, 1e-5)
            if k and np.abs(psi[order[: int(k)]]).max() > loose:
                warnings.warn("declared endpoint kernel not visible in eigenphases", RuntimeWarning)
            psi = psi.copy()
            psi[order[: int(k)]] = 0.0
            phases[lam] = psi

    total = 0

    def accumulate(lamL, UL, lamR, UR, depth):
        nonlocal total
        dU = float(np.linalg.norm(UR - UL, 2))
        eps = None
        if dU <= budget:
            margin = _phase_margin(dU)
            eps = _choose_eps((psi_at(lamL, UL), psi_at(lamR, UR)), margin)
        if eps is None:
            if depth >= max_depth:
                raise RefinementError(
                    f"refinement exhausted on [{lamL:.6g}, {lamR:.6g}] (step norm {dU:.3g})")
            mid = 0.5 * (lamL + lamR)
            UM = d.evaluate(mid)
            accumulate(lamL, UL, mid, UM, depth + 1)
            accumulate(mid, UM, lamR, UR, depth + 1)
            return
        kL = _count_window(psi_at(lamL, UL), eps, snap_tol)
        kR = _count_window(psi_at(lamR, UR), eps, snap_tol)
        total += kR - kL

    for (lamL, UL), (lamR, UR) in zip(nodes, nodes[1:]):
        accumulate(lamL, UL, lamR, UR, 0)
    return total


@dataclass
class LagrangianPath:
    """Path of Lagrangian subspaces of a fixed symplectic space.

    Carries samples (lam, LagrangianFrame) and, optionally, a frame evaluator
    used for adaptive refinement and restriction.
    """

    space: SymplecticSpace
    samples: list
    evaluator: Optional[Callable[[float], LagrangianFrame]] = None

    def __post_init__(self):
        lams = [s[0] for s in self.samples]
        if len(lams) < 2:
            raise ValueError("a Lagrangian path needs at least two samples")
        if any(b <= a for a, b in zip(lams, lams[1:])):
            raise ValueError("sample parameters must be strictly increasing")

    @classmethod
    def from_callable(cls, space: SymplecticSpace, fn: Callable[[float], LagrangianFrame],
                      grid=17, lo: float = 0.0, hi: float = 1.0) -> "LagrangianPath":
        lams = np.linspace(lo, hi, grid) if np.isscalar(grid) else np.asarray(grid, dtype=float)
        return cls(space, [(float(l), fn(float(l))) for l in lams], evaluator=fn)

    @property
    def lo(self) -> float:
        return self.samples[0][0]

    @property
    def hi(self) -> float:
        return self.samples[-1][0]

    def frame(self, lam) -> LagrangianFrame:
        for s_lam, F in self.samples:
            if s_lam == lam:
                return F
        if self.evaluator is None:
            raise RefinementError(f"path is not refinable and lam={lam} is not sampled")
        return self.evaluator(lam)

    def reverse(self) -> "LagrangianPath":
        lo, hi = self.lo, self.hi
        rev = [(lo + hi - lam, F) for lam, F in reversed(self.samples)]
        ev = None
        if self.evaluator is not None:
            fn = self.evaluator
            ev = lambda lam: fn(lo + hi - lam)
        return LagrangianPath(self.space, rev, ev)

    def restrict(self, a: float, b: float) -> "LagrangianPath":
        inner = [(lam, F) for lam, F in self.samples if a < lam < b]
        ends = [(a, self.frame(a))], [(b, self.frame(b))]
        return LagrangianPath(self.space, ends[0] + inner + ends[1], self.evaluator)

    def souriau_path(self, W: LagrangianFrame) -> UnitaryPath:
        space = self.space
        samples = [(lam, souriau_map(W, F, space)) for lam, F in self.samples]
        ev = None
        if self.evaluator is not None:
            fn = self.evaluator
            ev = lambda lam: souriau_map(W, fn(lam), space)
        return UnitaryPath(samples, ev)


@dataclass
class CrossingRecord:
    """An isolated intersection of a Lagrangian path with the reference."""

    lam: float
    intersection_dim: int
    signature: Optional[int]
    regular: bool
    form: Optional[np.ndarray] = field(default=None, repr=False)

    def __post_init__(self):
        if self.signature is not None and abs(self.signature) > self.intersection_dim:
            raise ValueError("signature cannot exceed the intersection dimension")


def maslov_index(path: LagrangianPath, W: LagrangianFrame, **winding_kwargs) -> int:
    """Maslov index of a Lagrangian path against the reference W."""
    return winding_number(path.souriau_path(W), **winding_kwargs)


def _product_frame(F1: LagrangianFrame, F2: LagrangianFrame) -> LagrangianFrame:
    d1, k1 = F1.columns.shape
    d2, k2 = F2.columns.shape
    cols = np.zeros((d1 + d2, k1 + k2))
    cols[:d1, :k1] = F1.columns
    cols[d1:, k1:] = F2.columns
    return LagrangianFrame(cols)


def _diagonal_frame(dim: int) -> LagrangianFrame:
    eye = np.eye(dim)
    return LagrangianFrame(np.vstack([eye, eye]) / np.sqrt(2.0))


def pair_to_product_path(path1: LagrangianPath, path2: LagrangianPath):
    """Product path Lam1 x Lam2 in (E x E, w x (-w)) plus the diagonal frame."""
    if path1.space.dim != path2.space.dim:
        raise SymplecticError("paired paths must share the ambient dimension")
    prod_space = path1.space.product(path2.space)
    lams1 = [lam for lam, _ in path1.samples]
    lams2 = [lam for lam, _ in path2.samples]
    if lams1 != lams2:
        if path1.evaluator is None or path2.evaluator is None:
            raise RefinementError("pair paths sampled on different grids and not refinable")
        lams1 = sorted(set(lams1) | set(lams2))
    samples = [(lam, _product_frame(path1.frame(lam), path2.frame(lam))) for lam in lams1]
    ev = None
    if path1.evaluator is not None and path2.evaluator is not None:
        f1, f2 = path1.evaluator, path2.evaluator
        ev = lambda lam: _product_frame(f1(lam), f2(lam))
    product = LagrangianPath(prod_space, samples, ev)
    return product, _diagonal_frame(path1.space.dim)


def maslov_index_pair(path1: LagrangianPath, path2: LagrangianPath, **winding_kwargs) -> int:
    """Maslov index of a path of Lagrangian pairs.

    Computed as the index of Lam1(.) x Lam2(.) against the diagonal in the
    product space with form w x (-w); for constant path2 this agrees with
    ``maslov_index(path1, W)``.
    """
    product, diag = pair_to_product_path(path1, path2)
    return maslov_index(product, diag, **winding_kwargs)


def partial_maslov_index(path: LagrangianPath, W: LagrangianFrame, lam0: float,
                         side: str, **winding_kwargs) -> int:
    """Maslov index of the restriction to [lo, lam0] ('left') or [lam0, hi] ('right')."""
    if not (path.lo < lam0 < path.hi):
        raise ValueError(f"lam0 must lie strictly inside ({path.lo}, {path.hi})")
    if side not in ("left", "right"):
        raise ValueError("side must be 'left' or 'right'")
    if side == "left":
        sub = path.restrict(path.lo, lam0)
    else:
        sub = path.restrict(lam0, path.hi)
    return maslov_index(sub, W, **winding_kwargs)


def _graph_operator(F0: LagrangianFrame, F: LagrangianFrame, J, cond_max=1e8):
    """Operator A with span(F) = {u + J A u : u in span(F0)}, in F0 coordinates."""
    Uc = F0.columns.T @ F.columns
    Wc = -(F0.columns.T @ J @ F.columns)
    if np.linalg.cond(Uc) > cond_max:
        raise SymplecticError("graph representation over the crossing frame is unsolvable")
    A = Wc @ np.linalg.inv(Uc)
    return 0.5 * (A + A.T)


def crossing_form_index(path: LagrangianPath, W: LagrangianFrame, lam0: float,
                        h: float = 1e-4, reg_rtol: float = 1e-3) -> CrossingRecord:
    """Signature of the crossing form at an isolated crossing.

    Near lam0 the path is written as a graph {u + J A(lam) u : u in Lam(lam0)};
    the form is the derivative of <u, A(lam) u> on the intersection with W,
    obtained by central differences with a Richardson consistency check at
    h/2.  For regular crossings the signature is the local index contribution.
    """
    space = path.space
    F0 = path.frame(lam0)
    basis = intersection_basis(W, F0)
    k = basis.shape[1]
    if k == 0:
        raise SymplecticError(f"lam0={lam0} is not a crossing: the intersection is trivial")

    bcoef = F0.columns.T @ basis  # intersection basis in F0 coordinates

    def form_at(step):
        Ap = _graph_operator(F0, path.frame(lam0 + step), space.J)
        Am = _graph_operator(F0, path.frame(lam0 - step), space.J)
        return bcoef.T @ ((Ap - Am) / (2.0 * step)) @ bcoef

    gamma = form_at(h)
    gamma_half = form_at(h / 2.0)
    if np.linalg.norm(gamma_half - gamma, 2) > 0.25 * max(1.0, np.linalg.norm(gamma_half, 2)):
        warnings.warn("crossing form finite differences did not stabilize under h/2", RuntimeWarning)
    gamma = gamma_half
    gamma = 0.5 * (gamma + gamma.T)

    eigs = np.linalg.eigvalsh(gamma)
    scale = max(np.abs(eigs).max(), 1e-12)
    regular = bool(np.all(np.abs(eigs) > reg_rtol * scale)) and np.abs(eigs).min() > 1e-10
    signature = int(np.count_nonzero(eigs > 0) - np.count_nonzero(eigs < 0)) if regular else None
    return CrossingRecord(lam=float(lam0), intersection_dim=int(k),
                          signature=signature, regular=regular, form=gamma)


def _nearest_phase(path: LagrangianPath, W: LagrangianFrame, lam: float) -> float:
    """Signed Souriau eigenphase closest to -1 (zero exactly at a crossing)."""
    psi = _eigenphases(souriau_map(W, path.frame(lam), path.space))
    return float(psi[np.argmin(np.abs(psi))])


def find_crossings(path: LagrangianPath, W: LagrangianFrame, coarse: int = 64,
                   tol_lambda: float = 1e-10, phase_tol: float = 1e-6) -> list:
    """Locate parameter values where the path intersects W.

    Scans the Souriau eigenphase nearest -1 on a coarse grid and bisects its
    sign changes; grid points already within ``phase_tol`` of a crossing are
    reported directly.  Crossings at the path endpoints are flagged.
    """
    lams = np.linspace(path.lo, path.hi, coarse + 1)
    vals = np.array([_nearest_phase(path, W, lam) for lam in lams])
    records = []

    def record_at(lam):
        psi = _eigenphases(souriau_map(W, path.frame(lam), path.space))
        dim = int(np.count_nonzero(np.abs(psi) <= max(phase_tol, 1e3 * tol_lambda)))
        dim = max(dim, 1)
        records.append(CrossingRecord(lam=float(lam), intersection_dim=dim,
                                      signature=None, regular=False))

    for i, v in enumerate(vals):
        if abs(v) <= phase_tol:
            if i in (0, len(vals) - 1):
                warnings.warn(f"crossing at path endpoint lam={lams[i]:.6g}", RuntimeWarning)
            record_at(lams[i])

    for i in range(len(lams) - 1):
        a, b = lams[i], lams[i + 1]
        fa, fb = vals[i], vals[i + 1]
        if abs(fa) <= phase_tol or abs(fb) <= phase_tol:
            continue
        if np.sign(fa) == np.sign(fb):
            continue
        while b - a > tol_lambda:
            m = 0.5 * (a + b)
            fm = _nearest_phase(path, W, m)
            if abs(fm) <= 1e-15 or np.sign(fm) == np.sign(fa):
                a, fa = m, fm
            else:
                b, fb = m, fm
        record_at(0.5 * (a + b))

    records.sort(key=lambda r: r.lam)
    return records
