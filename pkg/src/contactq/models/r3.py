"""R^3 model: alpha = r^2/2 dtheta - dz with theta-dependent calibration.

The flat connection carries, besides alpha/(i hbar) and the calibration
term, the quadratic piece dtheta (s1^2 + s2^2)/(i hbar); dropping it is the
shipped negative control (the curvature then equals the dtheta term it was
cancelling).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..connections import QuantumConnection
from ..geometry import Chart, ChartField, Coframe
from ..operators import HilbertRep, fock_rep

__all__ = ["R3Model", "r3_model"]


@dataclass
class R3Model:
    name: str
    hbar: float
    chart: Chart
    alpha: ChartField
    coframe: Coframe
    connection: QuantumConnection
    x_op: np.ndarray
    p_op: np.ndarray

    def s_minus(self, theta: float) -> np.ndarray:
        return np.sin(theta) * self.x_op - np.cos(theta) * self.p_op

    def s_plus(self, theta: float) -> np.ndarray:
        return -(np.cos(theta) * self.x_op + np.sin(theta) * self.p_op)

    def calibration(self, point, a: int) -> np.ndarray:
        """s(u_a) for the coframe duals (dr, r dtheta)."""
        theta = point[1]
        return self.s_minus(theta) if a == 0 else self.s_plus(theta)

    def grade0_coefficient(self, point, i: int) -> np.ndarray:
        """The omega-hat part (grade-0, exterior derivative excluded)."""
        if i == 1:
            return (self.x_op @ self.x_op + self.p_op @ self.p_op) / (1j * self.hbar)
        return np.zeros_like(self.x_op)


def r3_model(hbar: float, fock_dim: int, drop_omega_term: bool = False) -> R3Model:
    chart = Chart(("r", "theta", "z"), domain=lambda p: p[0] > 1e-3)

    def alpha_eval(pt):
        return np.array([0.0, 0.5 * pt[0] ** 2, -1.0])

    def alpha_partials(pt):
        jac = np.zeros((3, 3))
        jac[0, 1] = pt[0]
        return jac

    alpha = ChartField(chart, "1-form", alpha_eval, partials=alpha_partials, name="alpha")
    zeros = np.zeros((3, 3))
    e1 = ChartField(chart, "1-form", lambda p: np.array([1.0, 0.0, 0.0]), partials=lambda p: zeros)

    def e2_partials(pt):
        jac = np.zeros((3, 3))
        jac[0, 1] = 1.0
        return jac

    e2 = ChartField(chart, "1-form", lambda p: np.array([0.0, p[0], 0.0]), partials=e2_partials)
    coframe = Coframe([e1, e2], np.array([[0.0, 1.0], [-1.0, 0.0]]))

    _, _, s1, s2, _ = fock_rep(fock_dim, hbar)
    x_op, p_op = s2.entries, s1.entries
    rep = HilbertRep("fock", fock_dim, hbar)
    ih = 1j * hbar
    eye = np.eye(fock_dim, dtype=complex)
    quad = x_op @ x_op + p_op @ p_op

    def s_minus(theta):
        return np.sin(theta) * x_op - np.cos(theta) * p_op

    def s_plus(theta):
        return -(np.cos(theta) * x_op + np.sin(theta) * p_op)

    def coefficient(pt, i):
        r, theta = pt[0], pt[1]
        if i == 0:
            return s_minus(theta) / ih
        if i == 1:
            out = (0.5 * r**2) * eye + r * s_plus(theta)
            if not drop_omega_term:
                out = out + quad
            return out / ih
        return -eye / ih

    def coefficient_derivative(pt, i, jdir):
        r, theta = pt[0], pt[1]
        if i == 0 and jdir == 1:
            return -s_plus(theta) / ih  # d(s_-)/dtheta = -s_+
        if i == 1 and jdir == 0:
            return (r * eye + s_plus(theta)) / ih
        if i == 1 and jdir == 1:
            return r * s_minus(theta) / ih  # d(s_+)/dtheta = s_-
        return np.zeros_like(eye)

    keep = (np.arange(fock_dim) < fock_dim - 1).astype(bool)
    conn = QuantumConnection(
        chart,
        rep,
        hbar,
        coefficient,
        coefficient_derivative=coefficient_derivative,
        interior=keep,
        name="r3" + ("-broken" if drop_omega_term else ""),
    )
    return R3Model("r3", hbar, chart, alpha, coframe, conn, x_op, p_op)
