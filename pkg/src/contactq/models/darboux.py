"""Darboux-ball quantization: alpha = p_a dx^a - dt, flat by construction."""

from __future__ import annotations

from dataclasses import dataclass
from typing import List

import numpy as np

from ..connections import QuantumConnection
from ..geometry import Chart, ChartField, Coframe
from ..operators import HilbertRep, Operator, fock_rep

__all__ = ["DarbouxModel", "darboux_model"]


def _kron_chain(mats: List[np.ndarray]) -> np.ndarray:
    out = mats[0]
    for m in mats[1:]:
        out = np.kron(out, m)
    return out


def _mode_operator(single: np.ndarray, mode: int, n_modes: int) -> np.ndarray:
    dim = single.shape[0]
    eye = np.eye(dim, dtype=complex)
    return _kron_chain([single if k == mode else eye for k in range(n_modes)])


@dataclass
class DarbouxModel:
    name: str
    n: int
    hbar: float
    chart: Chart
    alpha: ChartField
    coframe: Coframe
    connection: QuantumConnection
    x_ops: List[np.ndarray]
    p_ops: List[np.ndarray]

    def calibration(self, point, a: int) -> np.ndarray:
        """s(u_a) for the coframe duals, ordered (dp_1.., dx^1..)."""
        if a < self.n:
            return self.x_ops[a]
        return -self.p_ops[a - self.n]


def darboux_model(n: int, hbar: float, fock_dim: int) -> DarbouxModel:
    """Build the local Darboux solution with one Fock mode per pair (x^a, p_a).

    Chart order is (x^1..x^n, p_1..p_n, t).  Coefficients:
    A_{x^a} = (p_a - p_hat_a)/(i hbar), A_{p_a} = x_hat_a/(i hbar),
    A_t = -1/(i hbar); the connection is flat on the interior Fock block.
    """
    if n < 1:
        raise ValueError("need at least one mode")
    names = tuple(f"x{a+1}" for a in range(n)) + tuple(f"p{a+1}" for a in range(n)) + ("t",)
    chart = Chart(names)
    dim = 2 * n + 1

    def alpha_eval(pt):
        out = np.zeros(dim)
        out[:n] = pt[n : 2 * n]  # p_a dx^a
        out[-1] = -1.0
        return out

    def alpha_partials(pt):
        jac = np.zeros((dim, dim))
        for a in range(n):
            jac[n + a, a] = 1.0  # d/dp_a of the dx^a coefficient
        return jac

    alpha = ChartField(chart, "1-form", alpha_eval, partials=alpha_partials, name="alpha")

    frames: List[ChartField] = []
    zeros = np.zeros((dim, dim))
    for a in range(n):  # e^a = dp_a
        coeff = np.zeros(dim)
        coeff[n + a] = 1.0
        frames.append(ChartField(chart, "1-form", lambda p, c=coeff: c, partials=lambda p: zeros))
    for a in range(n):  # e^{n+a} = dx^a
        coeff = np.zeros(dim)
        coeff[a] = 1.0
        frames.append(ChartField(chart, "1-form", lambda p, c=coeff: c, partials=lambda p: zeros))
    j = np.zeros((2 * n, 2 * n))
    for a in range(n):
        j[a, n + a] = 1.0
        j[n + a, a] = -1.0
    coframe = Coframe(frames, j)

    _, _, s1, s2, _ = fock_rep(fock_dim, hbar)
    x_ops = [_mode_operator(s2.entries, a, n) for a in range(n)]
    p_ops = [_mode_operator(s1.entries, a, n) for a in range(n)]
    joint = HilbertRep("fock", fock_dim**n, hbar)
    ih = 1j * hbar
    eye = np.eye(fock_dim**n, dtype=complex)

    def coefficient(pt, i):
        if i < n:  # dx^a directions
            return (pt[n + i] * eye - p_ops[i]) / ih
        if i < 2 * n:  # dp_a directions
            return x_ops[i - n] / ih
        return -eye / ih

    def coefficient_derivative(pt, i, jdir):
        if i < n and jdir == n + i:  # d/dp_a of A_{x^a}
            return eye / ih
        return np.zeros_like(eye)

    keep1 = np.arange(fock_dim) < fock_dim - 1
    keep = keep1.copy()
    for _ in range(n - 1):
        keep = np.kron(keep, keep1)
    conn = QuantumConnection(
        chart,
        joint,
        hbar,
        coefficient,
        coefficient_derivative=coefficient_derivative,
        interior=keep.astype(bool),
        name="darboux",
    )
    return DarbouxModel("darboux", n, hbar, chart, alpha, coframe, conn, x_ops, p_ops)
