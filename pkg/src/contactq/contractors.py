"""Contractor (contact tractor) calculus.

Contractor triples in a scale, the parabolic rescaling cocycle, the
symplectic pairing, the contact D-operator, contractor connections with
(P, Q) data, parallel scale tractors, and the metaplectic lift of the
parabolic rescaling on (y, x)-wavefunctions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Tuple

import numpy as np
from scipy import ndimage

from .geometry import Chart, ChartField, Coframe, exterior_derivative, reeb_vector, sharp

__all__ = [
    "Contractor",
    "RescaleData",
    "Density",
    "ContractorConnectionData",
    "ContractorField",
    "ParabolicWavefunction",
    "rescale_contractor",
    "pairing_J",
    "d_operator",
    "connection_apply",
    "parallel_scale_check",
    "parabolic_lift",
    "upsilon_sharp_components",
]


class ResolutionError(ValueError):
    """Grid cannot resolve the chirp phases of a parabolic lift."""


@dataclass(frozen=True)
class Contractor:
    """Weighted triple (v+, v_mid, v-) expressed in a named scale.

    v_mid holds the distribution components in the model coframe basis
    (normalized so the Levi pairing is the constant matrix j).
    """

    scale: str
    v_plus: float
    v_mid: np.ndarray
    v_minus: float
    weight: float = 0.0

    def __post_init__(self):
        mid = np.asarray(self.v_mid, dtype=float)
        if not (np.all(np.isfinite(mid)) and math.isfinite(self.v_plus) and math.isfinite(self.v_minus)):
            raise ValueError("contractor entries must be finite")
        object.__setattr__(self, "v_mid", mid)

    def as_array(self) -> np.ndarray:
        return np.concatenate([[self.v_plus], self.v_mid, [self.v_minus]])


@dataclass(frozen=True)
class Density:
    value: float
    weight: float

    def rescaled(self, omega: float) -> "Density":
        return Density(self.value * omega**self.weight, self.weight)


@dataclass
class RescaleData:
    """Data of a contact-form rescaling alpha -> Omega^2 alpha at a point.

    Upsilon holds the covector components Upsilon(f_a) in the coframe basis,
    upsilon_sharp the vector components of its Levi raise, chi the Reeb
    derivative of log(Omega), and M the Sp(2n) change of distribution basis.
    """

    omega: float
    upsilon: np.ndarray
    chi: float
    j: np.ndarray
    M: Optional[np.ndarray] = None
    scale_from: str = "base"
    scale_to: str = "rescaled"

    def __post_init__(self):
        self.upsilon = np.asarray(self.upsilon, dtype=float)
        self.j = np.asarray(self.j, dtype=float)
        n2 = self.upsilon.shape[0]
        if self.M is None:
            self.M = np.eye(n2)
        self.M = np.asarray(self.M, dtype=float)
        if self.omega <= 0:
            raise ValueError("Omega must be positive")
        if np.max(np.abs(self.M.T @ self.j @ self.M - self.j)) > 1e-10:
            raise ValueError("M is not symplectic for the given pairing j")

    @property
    def upsilon_sharp(self) -> np.ndarray:
        return upsilon_sharp_components(self.j, self.upsilon)


def upsilon_sharp_components(j: np.ndarray, upsilon: np.ndarray) -> np.ndarray:
    """Frame components of the Levi raise: phi(Y^sharp, f_b) = Y_b."""
    return np.linalg.solve(j.T, upsilon)


def rescale_contractor(c: Contractor, data: RescaleData) -> Contractor:
    """Apply the parabolic rescaling to a contractor triple.

    In order: the unipotent lower-triangular map
    (v+, v - v+ Y^sharp, v- + Y(v) - chi v+/2), then M on the middle slot,
    then the scale factors (Omega, Id, Omega^-1) together with the overall
    Omega^w density weight.
    """
    if c.scale != data.scale_from:
        raise ValueError(f"contractor is in scale {c.scale!r}, data expects {data.scale_from!r}")
    vp, vm, vmn = c.v_plus, c.v_mid, c.v_minus
    mid1 = vm - vp * data.upsilon_sharp
    bot1 = vmn + float(data.upsilon @ vm) - 0.5 * vp * data.chi
    mid2 = data.M @ mid1
    w = c.weight
    om = data.omega
    return Contractor(
        scale=data.scale_to,
        v_plus=om ** (w + 1) * vp,
        v_mid=om**w * mid2,
        v_minus=om ** (w - 1) * bot1,
        weight=w,
    )


def pairing_J(u: Contractor, v: Contractor, j: np.ndarray) -> Density:
    """Contractor symplectic pairing J(V, U) = u+ v- - u- v+ + phi(u, v)."""
    if u.scale != v.scale:
        raise ValueError("pairing requires both contractors in the same scale")
    val = u.v_plus * v.v_minus - u.v_minus * v.v_plus + float(u.v_mid @ j @ v.v_mid)
    return Density(val, u.weight + v.weight)


@dataclass
class DOperatorResult:
    """Cocontractor triple (L_rho nu / 2, d^alpha nu, w nu) of weight w - 1."""

    top: float
    mid_covector: np.ndarray
    bottom: float
    weight: float


def d_operator(density_field: ChartField, weight: float, alpha: ChartField, point) -> DOperatorResult:
    """Contact D-operator on a weight-w density (function in the base scale)."""
    point = alpha.chart.check(point)
    rho = reeb_vector(alpha, point)
    grad = density_field.partials_at(point)
    lrho = float(grad @ rho)
    d_alpha = grad - lrho * alpha(point)
    return DOperatorResult(0.5 * lrho, d_alpha, weight * float(density_field(point)), weight - 1.0)


@dataclass
class ContractorConnectionData:
    """(alpha, xi-connection, P, Q) data determining a contractor connection.

    ``omega_mixed(point)`` returns the (2n, 2n, dim) matrix of 1-form
    coefficients acting on frame components; ``P(point)`` is (dim, 2n) with
    P_z^a = z^i P[i, a]; ``Q(point)`` is a chart covector.
    """

    alpha: ChartField
    coframe: Coframe
    omega_mixed: Callable[[np.ndarray], np.ndarray]
    P: Callable[[np.ndarray], np.ndarray]
    Q: Callable[[np.ndarray], np.ndarray]


@dataclass
class ContractorField:
    """Contractor whose components are fields over the chart (for derivatives)."""

    v_plus: Callable[[np.ndarray], float]
    v_mid: Callable[[np.ndarray], np.ndarray]
    v_minus: Callable[[np.ndarray], float]
    weight: float = 0.0


def _component_derivative(fn, point, direction, h):
    up = np.asarray(fn(point + h * direction), dtype=float)
    dn = np.asarray(fn(point - h * direction), dtype=float)
    return (up - dn) / (2 * h)


def connection_apply(
    conn: ContractorConnectionData,
    z_vector: np.ndarray,
    V: ContractorField,
    point,
) -> Contractor:
    """Contractor connection along z on a weight-0 contractor field.

    Components: top = L_z v+ + phi(v, z) + 2 v- alpha(z);
    mid = L_z v + omega_z v - v+ P_z + v- z_bar; bottom = L_z v- + Q_z v+/2
    + phi(v, P_z), with z_bar the distribution projection of z.
    """
    if V.weight != 0.0:
        raise ValueError("connection_apply is defined on weight-0 contractors")
    chart = conn.alpha.chart
    point = chart.check(point)
    z = np.asarray(z_vector, dtype=float)
    h = chart.h
    alpha_z = float(conn.alpha(point) @ z)
    rho = reeb_vector(conn.alpha, point)
    z_bar = z - alpha_z * rho
    frames = conn.coframe.matrix(point)
    j = conn.coframe.j
    z_bar_frame = frames @ z_bar

    vp = float(V.v_plus(point))
    vm = np.asarray(V.v_mid(point), dtype=float)
    vmn = float(V.v_minus(point))
    dz_vp = float(_component_derivative(V.v_plus, point, z, h))
    dz_vm = _component_derivative(V.v_mid, point, z, h)
    dz_vmn = float(_component_derivative(V.v_minus, point, z, h))

    phi_vz = float(vm @ j @ z_bar_frame)  # phi(v, z) in frame components
    P_mat = np.asarray(conn.P(point), dtype=float)
    P_z = z @ P_mat
    Q_z = float(np.asarray(conn.Q(point), dtype=float) @ z)
    omega = np.asarray(conn.omega_mixed(point), dtype=float)
    omega_z = omega @ z  # (2n, 2n) matrix acting on frame components

    top = dz_vp + phi_vz + 2.0 * vmn * alpha_z
    mid = dz_vm + omega_z @ vm - vp * P_z + vmn * z_bar_frame
    bottom = dz_vmn + 0.5 * Q_z * vp + float(vm @ j @ P_z)
    return Contractor("base", top, mid, bottom, weight=0.0)


def scale_tractor_field(
    sigma: ChartField, alpha: ChartField, coframe: Coframe
) -> ContractorField:
    """I = D^A sigma for a positive weight-1 scale sigma (frame components)."""

    def v_plus(p):
        return float(sigma(p))

    def v_mid(p):
        rho = reeb_vector(alpha, p)
        grad = sigma.partials_at(p)
        d_alpha = grad - float(grad @ rho) * alpha(p)
        vec = sharp(d_alpha, alpha, p)
        return -(coframe.matrix(p) @ vec)

    def v_minus(p):
        rho = reeb_vector(alpha, p)
        return -0.5 * float(sigma.partials_at(p) @ rho)

    return ContractorField(v_plus, v_mid, v_minus, weight=0.0)


def parallel_scale_check(
    conn: ContractorConnectionData,
    sigma: ChartField,
    sample_points: Sequence[np.ndarray],
) -> float:
    """Max residual of the parallel condition for I = D^A sigma.

    Sweeps all coordinate directions at every sample; a parallel scale
    tractor certifies that sigma trivializes (P, Q) for the connection.
    """
    chart = conn.alpha.chart
    I_field = scale_tractor_field(sigma, conn.alpha, conn.coframe)
    worst = 0.0
    for point in sample_points:
        if float(sigma(point)) <= 0:
            raise ValueError("sigma must be positive on the samples")
        for i in range(chart.dim):
            z = np.zeros(chart.dim)
            z[i] = 1.0
            out = connection_apply(conn, z, I_field, point)
            worst = max(worst, float(np.max(np.abs(out.as_array()))))
    return worst


@dataclass
class ParabolicWavefunction:
    """Samples of Psi(y, x) on a rectangular grid (row index y, column x)."""

    samples: np.ndarray
    y: np.ndarray
    x: np.ndarray

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=complex)
        if self.samples.shape != (len(self.y), len(self.x)):
            raise ValueError("sample grid shape mismatch")
        if not np.all(np.isfinite(self.samples)):
            raise ValueError("wavefunction must have finite samples")

    def norm(self) -> float:
        dy = self.y[1] - self.y[0]
        dx = self.x[1] - self.x[0]
        return float(np.sqrt(np.sum(np.abs(self.samples) ** 2) * dy * dx))


def parabolic_lift(data: RescaleData, psi: ParabolicWavefunction) -> ParabolicWavefunction:
    """Metaplectic action of a parabolic rescaling on Psi(y, x).

    Psi(y, x) -> exp(-i Om y (chi Om y / 4 + pi2(Y)# (x + Om y pi1(Y)# / 2)))
                 * Psi(Om y, x + Om y pi1(Y)#),
    the chirp x translation x dilation factorization of the lower-triangular
    block composed with the scale dilation.  Resampling uses cubic
    interpolation with zero extension.  The Lagrangian polarization takes
    pi1/pi2 as the first/second halves of the distribution basis.
    """
    ups_sharp = data.upsilon_sharp
    n2 = len(ups_sharp)
    if n2 != 2:
        raise ValueError("parabolic_lift ships the n=1 (two-component) case")
    pi1, pi2 = float(ups_sharp[0]), float(ups_sharp[1])
    om, chi = data.omega, data.chi

    y = psi.y
    x = psi.x
    # Nyquist guard: the chirp phase must advance < pi per grid step
    dy = y[1] - y[0]
    ymax = max(abs(y[0]), abs(y[-1]))
    xmax = max(abs(x[0]), abs(x[-1]))
    dphase = abs(om) * (abs(chi) * om * ymax / 2 + abs(pi2) * (xmax + om * ymax * abs(pi1))) * dy
    if dphase >= math.pi:
        raise ResolutionError(
            f"grid cannot resolve the lift phases (step advance {dphase:.3f} rad >= pi)"
        )

    yy = om * y[:, None]
    xx = x[None, :] + yy * pi1
    # fractional indices for map_coordinates
    iy = (yy - y[0]) / dy
    ix = (xx - x[0]) / (x[1] - x[0])
    coords = np.broadcast_arrays(iy, ix)
    coords = np.stack([np.ascontiguousarray(c) for c in coords])
    re = ndimage.map_coordinates(psi.samples.real, coords, order=3, mode="constant", cval=0.0)
    im = ndimage.map_coordinates(psi.samples.imag, coords, order=3, mode="constant", cval=0.0)
    resampled = re + 1j * im
    phase = np.exp(-1j * yy * (chi * yy / 4.0 + pi2 * (x[None, :] + yy * pi1 / 2.0)))
    return ParabolicWavefunction(phase * resampled, y, x)
