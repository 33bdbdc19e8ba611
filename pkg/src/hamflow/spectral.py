"""Spectral flow of symmetric/Hermitian matrix paths and Chern winding.

The spectral flow is computed from a certified adaptive partition of the
parameter interval: on each subinterval a window boundary eps is chosen so
that +-eps provably avoids the spectrum, and the flow is the telescoping sum
of eigenvalue counts in [0, eps] at the partition nodes.  The same counting
engine runs on precomputed node spectra, which is how discretized operator
pencils are handled.  The Chern route computes the winding number of
det(A(lam) + i s I) along a rectangle enclosing the singular set; both
integers agree for admissible paths.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

MAX_FLOW_DEPTH = 40


class EndpointKernelError(ValueError):
    """An operation requiring invertible path endpoints found a kernel."""


class FlowRefinementError(RuntimeError):
    """The certified partition could not be refined to admissibility."""


@dataclass
class SymmetricMatrixPath:
    """Path lam in [0,1] -> symmetric (or Hermitian) N x N matrix."""

    evaluator: Callable[[float], np.ndarray]
    lipschitz: Optional[float] = None
    sym_tol: float = 1e-9

    def evaluate(self, lam: float) -> np.ndarray:
        A = np.asarray(self.evaluator(float(lam)))
        resid = np.linalg.norm(A - A.conj().T, 2)
        if resid > self.sym_tol * max(1.0, np.linalg.norm(A, 2)):
            raise ValueError(f"path value at lam={lam} is not symmetric (residual {resid:.2e})")
        return 0.5 * (A + A.conj().T)

    __call__ = evaluate

    def reverse(self) -> "SymmetricMatrixPath":
        fn = self.evaluator
        return SymmetricMatrixPath(lambda lam: fn(1.0 - lam), self.lipschitz, self.sym_tol)

    def shifted(self, delta: float) -> "SymmetricMatrixPath":
        fn = self.evaluator

        def shifted_eval(lam):
            A = np.asarray(fn(lam))
            return A + delta * np.eye(A.shape[0], dtype=A.dtype)

        return SymmetricMatrixPath(shifted_eval, self.lipschitz, self.sym_tol)


@dataclass
class FlowCertificate:
    """Partition, window half-widths and node counts backing a flow value."""

    nodes: np.ndarray
    eps: np.ndarray          # per subinterval
    counts: np.ndarray       # per subinterval: (count at left node, count at right node)
    drifts: np.ndarray       # per subinterval certified/sampled drift bound
    endpoint_gaps: tuple     # min |eigenvalue| at the two path endpoints
    total: int = 0

    def summary(self) -> str:
        lines = [f"subintervals={len(self.eps)} total={self.total} "
                 f"endpoint_gaps=({self.endpoint_gaps[0]:.3e}, {self.endpoint_gaps[1]:.3e})"]
        return "\n".join(lines)


def _choose_eps_line(vals_pair, margin, cap):
    """Window bound eps in (0, cap) with +-eps at distance > margin from all values."""
    centers = np.abs(np.concatenate(vals_pair))
    zones = sorted((c - margin, c + margin) for c in centers)
    lo = 0.0
    for zlo, zhi in zones:
        if zhi <= lo:
            continue
        if zlo > lo:
            break
        lo = zhi
    if lo >= cap:
        return None
    hi = cap
    for zlo, zhi in zones:
        if zlo > lo:
            hi = min(hi, zlo)
            break
    if np.isinf(hi):
        return lo + 1.0
    if hi - lo <= max(1e-14, 1e-9 * margin):
        return None
    return 0.5 * (lo + hi)


def _count_upto(vals, eps, zero_snap):
    return int(np.count_nonzero((vals >= -zero_snap) & (vals <= eps)))


def _set_drift(sa, sb, interior_band=None):
    """Symmetric set distance between two spectra (drift proxy).

    Values beyond ``interior_band`` are reporting-boundary traffic: they may
    enter or leave the reported set between nodes, so they are excluded from
    the drift maximum (their exclusion zones are still honored elsewhere).
    """
    def filt(x):
        return x if interior_band is None else x[np.abs(x) <= interior_band]

    def one_sided(x, y):
        if len(x) == 0:
            return 0.0
        if len(y) == 0:
            return np.inf
        return float(np.min(np.abs(x[:, None] - y[None, :]), axis=1).max())

    return max(one_sided(filt(sa), sb), one_sided(filt(sb), sa))


def flow_from_spectra(node_fn, lo=0.0, hi=1.0, initial_nodes=17, window=None,
                      drift_fn=None, drift_budget=None, zero_snap=1e-9,
                      max_depth=MAX_FLOW_DEPTH, endpoint_gap_min=1e-8,
                      check_endpoints=True, drift_band=None, report_window=None):
    """Certified spectral flow from node eigenvalue data.

    ``node_fn(lam)`` returns the (real) eigenvalues relevant for counting.
    With a ``window``, counting boundaries stay below it; ``report_window``
    (>= window, default equal) declares how far out ``node_fn`` reports, so
    unreported eigenvalues are known to be at least that far from zero at the
    nodes and the boundary eps additionally stays below report_window minus
    the drift.  ``drift_fn(lamL, lamR)``, when provided, must return a
    certified bound on spectral motion over the subinterval (e.g. a Weyl or
    Lipschitz bound); otherwise the sampled set distance between node spectra
    is used.
    """
    cache = {}

    def spec(lam):
        if lam not in cache:
            cache[lam] = np.sort(np.asarray(node_fn(lam), dtype=float))
        return cache[lam]

    if np.isscalar(initial_nodes):
        nodes = list(np.linspace(lo, hi, int(initial_nodes)))
    else:
        nodes = sorted(set(float(x) for x in initial_nodes) | {lo, hi})

    gaps = []
    for lam in (lo, hi):
        s = spec(lam)
        gaps.append(float(np.min(np.abs(s))) if len(s) else np.inf)
    if check_endpoints and min(gaps) <= endpoint_gap_min:
        raise EndpointKernelError(
            f"endpoint kernel detected: smallest |eigenvalue| at the ends is {min(gaps):.3e}")

    rw = report_window if report_window is not None else window
    band = drift_band if drift_band is not None else (0.85 * rw if rw else None)
    intervals = []

    def process(a, b, depth):
        sa, sb = spec(a), spec(b)
        m = drift_fn(a, b) if drift_fn is not None else _set_drift(sa, sb, band)
        m = m * 1.0 + 1e-12
        budget_ok = True
        if drift_budget is not None and m > drift_budget:
            budget_ok = False
        eps = None
        if budget_ok:
            cap = min(window, rw - m) if window is not None else np.inf
            if cap > 0:
                eps = _choose_eps_line((sa, sb), m, cap)
        if eps is None:
            mid = 0.5 * (a + b)
            if depth >= max_depth or mid <= a or mid >= b:
                raise FlowRefinementError(
                    f"flow refinement exhausted on [{a:.6g}, {b:.6g}] (drift {m:.3g})")
            process(a, mid, depth + 1)
            process(mid, b, depth + 1)
            return
        kL = _count_upto(sa, eps, zero_snap)
        kR = _count_upto(sb, eps, zero_snap)
        intervals.append((a, b, eps, kL, kR, m))

    for a, b in zip(nodes, nodes[1:]):
        process(a, b, 0)

    intervals.sort(key=lambda item: item[0])
    total = int(sum(kR - kL for (_, _, _, kL, kR, _) in intervals))
    cert = FlowCertificate(
        nodes=np.array([iv[0] for iv in intervals] + [intervals[-1][1]]),
        eps=np.array([iv[2] for iv in intervals]),
        counts=np.array([(iv[3], iv[4]) for iv in intervals]),
        drifts=np.array([iv[5] for iv in intervals]),
        endpoint_gaps=(gaps[0], gaps[1]),
        total=total,
    )
    return total, cert


def spectral_flow(path: SymmetricMatrixPath, initial_nodes=17,
                  endpoint_gap_min=1e-8, check_endpoints=True, max_depth=MAX_FLOW_DEPTH):
    """Net signed count of eigenvalues of A(lam) crossing zero on [0, 1].

    Returns (flow, certificate).  Subintervals are refined until the window
    boundary is provably clear of the spectrum, using the operator-norm step
    as a Weyl drift bound (or the declared Lipschitz constant when present).
    """
    mats = {}

    def mat(lam):
        if lam not in mats:
            mats[lam] = path.evaluate(lam)
        return mats[lam]

    def node_fn(lam):
        return np.linalg.eigvalsh(mat(lam))

    def drift_fn(a, b):
        step = float(np.linalg.norm(mat(b) - mat(a), 2))
        if path.lipschitz is not None:
            step = min(step if step > 0 else np.inf, path.lipschitz * (b - a))
        return step

    return flow_from_spectra(node_fn, 0.0, 1.0, initial_nodes=initial_nodes,
                             drift_fn=drift_fn, endpoint_gap_min=endpoint_gap_min,
                             check_endpoints=check_endpoints, max_depth=max_depth)


def normalization_path(dim_minus: int, dim_plus: int) -> SymmetricMatrixPath:
    """Reference path with spectral flow one.

    A(lam) = -P_minus + (lam - 1/2) P_0 + P_plus with complementary orthogonal
    projections, rank P_0 = 1; the only eigenvalue branch meeting zero is
    lam - 1/2, crossing upward at lam = 1/2.
    """
    if dim_minus < 1 or dim_plus < 1:
        raise ValueError("dim_minus and dim_plus must be at least 1")
    diag_fixed = np.concatenate([-np.ones(dim_minus), [0.0], np.ones(dim_plus)])
    mid = dim_minus

    def evaluate(lam):
        d = diag_fixed.copy()
        d[mid] = lam - 0.5
        return np.diag(d)

    return SymmetricMatrixPath(evaluate, lipschitz=1.0)


def shifted_flow(path: SymmetricMatrixPath, delta: float, **kwargs) -> int:
    """Spectral flow of lam -> A(lam) + delta I.

    For small positive delta this equals spectral_flow(path); a warning is
    emitted when delta is large relative to the endpoint gaps.
    """
    shifted = path.shifted(delta)
    gap = min(float(np.min(np.abs(np.linalg.eigvalsh(path.evaluate(lam))))) for lam in (0.0, 1.0))
    if abs(delta) > 0.5 * gap > 0:
        warnings.warn(
            f"shift delta={delta:.3g} exceeds half the endpoint gap {gap:.3g}; "
            "the shifted flow may differ from the unshifted one", RuntimeWarning)
    flow, _ = spectral_flow(shifted, **kwargs)
    return flow


def complexify_path(path: SymmetricMatrixPath) -> SymmetricMatrixPath:
    """The same path viewed as complex Hermitian matrices."""
    fn = path.evaluator
    return SymmetricMatrixPath(lambda lam: np.asarray(fn(lam)).astype(complex),
                               path.lipschitz, path.sym_tol)


def _rectangle_points(margin, half_height, samples):
    """Counterclockwise rectangle boundary around [0,1] x {0} in the (lam, s) plane."""
    corners = [(-margin, -half_height), (1.0 + margin, -half_height),
               (1.0 + margin, half_height), (-margin, half_height)]
    lengths = []
    for i in range(4):
        x0, y0 = corners[i]
        x1, y1 = corners[(i + 1) % 4]
        lengths.append(abs(x1 - x0) + abs(y1 - y0))
    per_edge = [max(2, int(round(samples * L / sum(lengths)))) for L in lengths]
    pts = []
    for i in range(4):
        x0, y0 = corners[i]
        x1, y1 = corners[(i + 1) % 4]
        ts = np.linspace(0.0, 1.0, per_edge[i], endpoint=False)
        pts.extend((x0 + t * (x1 - x0), y0 + t * (y1 - y0)) for t in ts)
    pts.append(pts[0])
    return pts


def winding_of_function(f, points, max_refine=18, step_cap=0.5 * np.pi):
    """Winding number of a nonvanishing complex function along a closed polyline.

    ``f`` maps a point (2-tuple) to a complex number of unit modulus times a
    positive scale (only the argument is used).  Segments whose argument
    increment reaches ``step_cap`` are split until every step is below it.
    """
    pts = list(points)
    vals = [f(p) for p in pts]

    def arg_inc(z0, z1):
        return float(np.angle(z1 * np.conj(z0)))

    for _ in range(max_refine):
        incs = [arg_inc(vals[i], vals[i + 1]) for i in range(len(vals) - 1)]
        bad = [i for i, inc in enumerate(incs) if abs(inc) >= step_cap]
        if not bad:
            break
        for i in reversed(bad):
            mid = (0.5 * (pts[i][0] + pts[i + 1][0]), 0.5 * (pts[i][1] + pts[i + 1][1]))
            pts.insert(i + 1, mid)
            vals.insert(i + 1, f(mid))
    else:
        raise FlowRefinementError("contour argument steps did not settle under refinement")

    total = sum(arg_inc(vals[i], vals[i + 1]) for i in range(len(vals) - 1))
    wind = total / (2.0 * np.pi)
    if abs(wind - round(wind)) > 0.05:
        raise FlowRefinementError(f"accumulated argument {wind:.4f} turns is not near an integer")
    return int(round(wind))


def chern_winding(path: SymmetricMatrixPath, margin: float = 0.05,
                  half_height: Optional[float] = None, samples: int = 256) -> int:
    """Winding number of det(A(lam) + i s I) along a rectangle around [0,1] x {0}.

    The path is extended by constants beyond [0, 1]; since the endpoints are
    invertible and A + i s I is invertible for s != 0, the determinant is
    nonvanishing on the contour and the winding equals the spectral flow.
    """
    for lam in (0.0, 1.0):
        eigs = np.linalg.eigvalsh(path.evaluate(lam))
        if np.min(np.abs(eigs)) <= 1e-10:
            raise EndpointKernelError("chern_winding requires invertible endpoints")

    if half_height is None:
        norms = [np.linalg.norm(path.evaluate(lam), 2) for lam in np.linspace(0, 1, 9)]
        half_height = float(max(norms)) + 1.0

    cache = {}

    def matrix_at(lam):
        lam = float(np.clip(lam, 0.0, 1.0))
        if lam not in cache:
            A = path.evaluate(lam)
            cache[lam] = A.astype(complex)
        return cache[lam]

    def f(point):
        lam, s = point
        A = matrix_at(lam)
        sign, _ = np.linalg.slogdet(A + 1j * s * np.eye(A.shape[0]))
        if sign == 0:
            raise FlowRefinementError(f"determinant vanished on the contour at {point}")
        return sign

    return winding_of_function(f, _rectangle_points(margin, half_height, samples))
