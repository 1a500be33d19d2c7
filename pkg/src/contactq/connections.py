"""Operator-valued connection forms and their verification machinery.

Connections are stored as ``d + A`` with curvature
``F_ij = d_i A_j - d_j A_i + [A_i, A_j]``.  The paper-facing models perform
their ``i*hbar`` division once at build time, so coefficients here are the
plain matrices ``A_i(point)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.linalg import expm

from .geometry import Chart, ChartField, Coframe
from .operators import HilbertRep, Operator, commutator, grading_derivative

__all__ = [
    "QuantumConnection",
    "PathSpec",
    "CurvatureReport",
    "curvature",
    "flatness_residual",
    "classical_limit_check",
    "induced_xi_connection",
    "parallel_transport",
    "transition_probability",
    "charge_commutation_check",
    "equivariance_residual",
]

DEFAULT_STEPS_PER_UNIT = 4096


class StepSizeError(RuntimeError):
    """Transport norm drift exceeded the declared budget."""


@dataclass
class QuantumConnection:
    """Connection form A of d^A = d + A over a chart.

    ``coefficient(point, i)`` returns the operator matrix A_i; the optional
    ``coefficient_derivative(point, i, j)`` returns d_j A_i analytically,
    otherwise central differences with the chart step are used.  ``interior``
    masks the representation indices on which truncated identities are exact
    (True = keep); residual norms are taken on that block.
    """

    chart: Chart
    rep: HilbertRep
    hbar: float
    coefficient: Callable[[np.ndarray, int], np.ndarray]
    coefficient_derivative: Optional[Callable[[np.ndarray, int, int], np.ndarray]] = None
    interior: Optional[np.ndarray] = None
    name: str = ""

    def coeff(self, point, i: int) -> np.ndarray:
        return np.asarray(self.coefficient(np.asarray(point, dtype=float), i), dtype=complex)

    def dcoeff(self, point, i: int, j: int) -> np.ndarray:
        """d/dx^j of A_i at the point."""
        point = np.asarray(point, dtype=float)
        if self.coefficient_derivative is not None:
            return np.asarray(self.coefficient_derivative(point, i, j), dtype=complex)
        h = self.chart.h
        step = np.zeros(self.chart.dim)
        step[j] = h
        return (self.coeff(point + step, i) - self.coeff(point - step, i)) / (2 * h)

    def masked_norm(self, mat: np.ndarray) -> float:
        if self.interior is None:
            return float(np.linalg.norm(mat, 2))
        keep = np.asarray(self.interior, dtype=bool)
        sub = mat[np.ix_(keep, keep)]
        return float(np.linalg.norm(sub, 2)) if sub.size else 0.0

    def method_tag(self) -> str:
        return "analytic" if self.coefficient_derivative is not None else "finite-difference"


@dataclass
class PathSpec:
    curve: Callable[[float], np.ndarray]
    t0: float
    t1: float
    steps: int = 0

    def __post_init__(self):
        if self.steps == 0:
            self.steps = max(16, int(DEFAULT_STEPS_PER_UNIT * abs(self.t1 - self.t0)))
        if self.steps < 16:
            raise ValueError("paths need at least 16 integration steps")


@dataclass
class CurvatureReport:
    pair_residuals: Dict[Tuple[int, int], float]
    max_residual: float
    method: str


def curvature(conn: QuantumConnection, point, i: int, j: int) -> np.ndarray:
    """F_ij = d_i A_j - d_j A_i + [A_i, A_j] at a point."""
    if i == j:
        raise ValueError("curvature components need i != j")
    ai = conn.coeff(point, i)
    aj = conn.coeff(point, j)
    return conn.dcoeff(point, j, i) - conn.dcoeff(point, i, j) + ai @ aj - aj @ ai


def flatness_residual(conn: QuantumConnection, sample_points) -> CurvatureReport:
    """Masked curvature norms over all coordinate pairs and samples."""
    dim = conn.chart.dim
    pairs = [(i, j) for i in range(dim) for j in range(i + 1, dim)]
    residuals = {pair: 0.0 for pair in pairs}
    for point in sample_points:
        for pair in pairs:
            f = curvature(conn, point, *pair)
            residuals[pair] = max(residuals[pair], conn.masked_norm(f))
    worst = max(residuals.values()) if residuals else 0.0
    return CurvatureReport(residuals, worst, conn.method_tag())


def classical_limit_check(
    conn_family: Callable[[float], QuantumConnection],
    alpha: ChartField,
    point,
    hbar_list: Sequence[float],
) -> Tuple[np.ndarray, float]:
    """Fit i*hbar*(scalar part of A_i) against {1, sqrt(hbar), hbar}.

    Returns (constant terms per coordinate, worst fit residual); the constant
    terms must reproduce alpha(point) for a dynamical quantization.  The
    scalar part is the normalized trace, which is exact for the shipped
    models whose non-scalar coefficient parts are traceless.
    """
    hbars = sorted(hbar_list)
    if len(hbars) < 3 or max(hbars) > 0.5 or min(hbars) <= 0:
        raise ValueError("need >= 3 hbar values inside (0, 0.5]")
    point = np.asarray(point, dtype=float)
    conns = [conn_family(h) for h in hbars]
    dim = conns[0].chart.dim
    design = np.stack([np.ones(len(hbars)), np.sqrt(hbars), np.asarray(hbars)], axis=1)
    consts = np.zeros(dim)
    worst_fit = 0.0
    for i in range(dim):
        y = []
        for h, cn in zip(hbars, conns):
            mat = cn.coeff(point, i)
            y.append((1j * h * np.trace(mat) / mat.shape[0]).real)
        sol, _, _, _ = np.linalg.lstsq(design, np.asarray(y), rcond=None)
        fit = design @ sol
        worst_fit = max(worst_fit, float(np.max(np.abs(fit - y))))
        consts[i] = sol[0]
    return consts, worst_fit


def induced_xi_connection(
    conn_grade0: Callable[[np.ndarray, int], np.ndarray],
    calibration: Callable[[np.ndarray, int], np.ndarray],
    chart: Chart,
    n_frames: int,
    point,
    h: float = 1e-6,
    interior: Optional[np.ndarray] = None,
) -> np.ndarray:
    """Extract the distribution connection from [grade-0 part, calibration].

    ``calibration(point, a)`` is the operator s(u_a) for the a-th coframe-dual
    vector; ``conn_grade0(point, i)`` the grade-0 coefficient of the
    connection (the i-th chart direction, exterior derivative excluded).
    Solves s(w) = d_i s(u_a) + [A0_i, s(u_a)] for frame components w by least
    squares on the interior block; returns gamma[a, b, i] with
    nabla^xi_i u_a = gamma[b, a, i] u_b (matrix convention: column a).
    """
    point = np.asarray(point, dtype=float)
    dim = chart.dim
    s_ops = [np.asarray(calibration(point, a), dtype=complex) for a in range(n_frames)]
    full = s_ops[0].shape[0]
    if interior is None:
        # quadratic grade-0 parts couple levels two apart; default to
        # excluding the top two Fock levels from the fit
        keep = np.arange(full) < max(1, full - 2)
    else:
        keep = np.asarray(interior, dtype=bool)
    sel = np.ix_(keep, keep)
    basis = np.stack([op[sel].ravel() for op in s_ops], axis=1)
    gamma = np.zeros((n_frames, n_frames, dim))
    worst = 0.0
    for i in range(dim):
        a0 = np.asarray(conn_grade0(point, i), dtype=complex)
        step = np.zeros(dim)
        step[i] = h
        for a in range(n_frames):
            up = np.asarray(calibration(point + step, a), dtype=complex)
            dn = np.asarray(calibration(point - step, a), dtype=complex)
            total = ((up - dn) / (2 * h) + a0 @ s_ops[a] - s_ops[a] @ a0)[sel]
            sol, _, _, _ = np.linalg.lstsq(basis, total.ravel(), rcond=None)
            recon = basis @ sol
            worst = max(worst, float(np.max(np.abs(recon - total.ravel()))))
            if np.max(np.abs(sol.imag)) > 1e-6:
                raise ValueError("extracted connection has non-real components")
            gamma[:, a, i] = sol.real
    if worst > 1e-5:
        raise ValueError(
            f"commutator does not close on the calibration image (residual {worst:.2e}); "
            "grade mismatch between connection and coframe"
        )
    return gamma


def parallel_transport(
    conn: QuantumConnection, path: PathSpec, psi0: np.ndarray
) -> Tuple[np.ndarray, float]:
    """RK4 integration of d(psi)/dt = -A(gamma'(t)) psi along the path.

    Returns (psi1, norm drift).  The tangent is differenced from the curve;
    norm drift beyond 1e-3 signals an inadequate step count.
    """
    psi = np.asarray(psi0, dtype=complex).copy()
    n0 = np.linalg.norm(psi)
    if n0 == 0:
        raise ValueError("initial state must be nonzero")
    ts = np.linspace(path.t0, path.t1, path.steps + 1)
    dt = ts[1] - ts[0]
    eps = max(1e-7, abs(dt) * 1e-3)

    def rhs(t, v):
        pt = path.curve(t)
        tangent = (np.asarray(path.curve(t + eps)) - np.asarray(path.curve(t - eps))) / (2 * eps)
        a = np.zeros((conn.rep.dim, conn.rep.dim), dtype=complex)
        for i in range(conn.chart.dim):
            if tangent[i] != 0.0:
                a += tangent[i] * conn.coeff(pt, i)
        return -(a @ v)

    for t in ts[:-1]:
        k1 = rhs(t, psi)
        k2 = rhs(t + dt / 2, psi + dt / 2 * k1)
        k3 = rhs(t + dt / 2, psi + dt / 2 * k2)
        k4 = rhs(t + dt, psi + dt * k3)
        psi = psi + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
    drift = abs(np.linalg.norm(psi) - n0) / n0
    if drift > 1e-3:
        raise StepSizeError(f"norm drift {drift:.2e} exceeds 1e-3; increase steps")
    return psi, float(drift)


def transition_probability(
    conn: QuantumConnection, path: PathSpec, psi_i: np.ndarray, psi_f: np.ndarray
) -> float:
    """|<psi_f | P exp(-int A) psi_i>|^2 for normalized states."""
    psi_i = np.asarray(psi_i, dtype=complex)
    psi_f = np.asarray(psi_f, dtype=complex)
    for v in (psi_i, psi_f):
        if abs(np.linalg.norm(v) - 1.0) > 1e-8:
            raise ValueError("states must be normalized")
    out, _ = parallel_transport(conn, path, psi_i)
    amp = np.vdot(psi_f, out)
    return float(abs(amp) ** 2)


def charge_commutation_check(
    conn: QuantumConnection,
    q_field: Callable[[np.ndarray], np.ndarray],
    q_derivative: Callable[[np.ndarray, int], np.ndarray],
    sample_points,
) -> float:
    """max over samples and directions of || d_i Q + [A_i, Q] || (masked)."""
    worst = 0.0
    for point in sample_points:
        q = np.asarray(q_field(np.asarray(point, dtype=float)), dtype=complex)
        for i in range(conn.chart.dim):
            ai = conn.coeff(point, i)
            resid = np.asarray(q_derivative(point, i), dtype=complex) + ai @ q - q @ ai
            worst = max(worst, conn.masked_norm(resid))
    return worst


def equivariance_residual(
    coefficient_family: Callable[[float, np.ndarray], np.ndarray],
    g0: np.ndarray,
    x_flow: Callable[[np.ndarray, float], np.ndarray],
    point,
    hbar0: float,
    masked_norm: Callable[[np.ndarray], float],
    rel_step: float = 1e-4,
    flow_step: float = 1e-5,
) -> float:
    """Residual of [nabla^0_X + gr, nabla_U] = 0 for one homogeneous direction.

    ``coefficient_family(hbar, point)`` evaluates A^hbar(U) at the point;
    ``g0`` is the grade-0 coefficient of the connection along X (constant in
    the shipped models); ``x_flow(point, t)`` flows the point along X.  The
    three ingredients are evaluated by independent paths: the X-derivative by
    central differences along the flow, the grading by central differences in
    hbar, and the g0 term by a matrix commutator.
    """
    point = np.asarray(point, dtype=float)
    a_u = coefficient_family(hbar0, point)
    lie_x = (
        coefficient_family(hbar0, x_flow(point, flow_step))
        - coefficient_family(hbar0, x_flow(point, -flow_step))
    ) / (2 * flow_step)
    grading = (
        coefficient_family(hbar0 * (1 + rel_step), point)
        - coefficient_family(hbar0 * (1 - rel_step), point)
    ) / rel_step
    resid = lie_x + g0 @ a_u - a_u @ g0 + grading
    return masked_norm(resid)
