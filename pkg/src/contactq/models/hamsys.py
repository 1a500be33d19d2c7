"""Hamiltonian-system quantization on (q, p, t): alpha = p dq - H(q, p) dt.

The dt coefficient is the (negative, i*hbar-divided) Weyl quantization of H
under the shift substitution q -> q + x_hat, p -> p + p_hat, which at the
phase-space origin reduces to the canonical Weyl-quantized Hamiltonian; the
conserved charge is i times the same operator.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, Tuple

import numpy as np

from ..connections import QuantumConnection
from ..geometry import Chart, ChartField, Coframe
from ..operators import (
    HilbertRep,
    Operator,
    PolynomialObservable,
    fock_rep,
    weyl_quantize,
)

__all__ = ["HamsysModel", "hamsys_model"]


@dataclass
class HamsysModel:
    name: str
    hbar: float
    H: PolynomialObservable
    chart: Chart
    alpha: ChartField
    coframe: Coframe
    connection: QuantumConnection
    x_op: np.ndarray
    p_op: np.ndarray
    rep: HilbertRep

    def weyl_shifted(self, poly: PolynomialObservable, q: float, p: float) -> np.ndarray:
        """Weyl[poly(q + x_hat, p + p_hat)] at the phase-space point."""
        eye = np.eye(self.rep.dim, dtype=complex)
        q_sub = Operator(self.rep, q * eye + self.x_op)
        p_sub = Operator(self.rep, p * eye + self.p_op)
        return weyl_quantize(poly, self.rep, {"q": q_sub, "p": p_sub}).entries

    def charge(self, point) -> np.ndarray:
        """Quantum charge of the time-translation symmetry (anti-hermitean)."""
        return 1j * self.weyl_shifted(self.H, point[0], point[1])

    def charge_derivative(self, point, i: int) -> np.ndarray:
        if i == 0:
            return 1j * self.weyl_shifted(self.H.derivative("q"), point[0], point[1])
        if i == 1:
            return 1j * self.weyl_shifted(self.H.derivative("p"), point[0], point[1])
        return np.zeros((self.rep.dim, self.rep.dim), dtype=complex)

    def calibration(self, point, a: int) -> np.ndarray:
        """s(u_a) for the coframe duals of (dp + H_q dt, dq - H_p dt)."""
        return -self.x_op if a == 0 else self.p_op


def hamsys_model(H: PolynomialObservable | Dict[Tuple[int, int], complex], hbar: float, fock_dim: int) -> HamsysModel:
    if not isinstance(H, PolynomialObservable):
        H = PolynomialObservable(dict(H))
    chart = Chart(("q", "p", "t"))
    Hq = H.derivative("q")
    Hp = H.derivative("p")

    def alpha_eval(pt):
        return np.array([pt[1], 0.0, -H(pt[0], pt[1]).real])

    def alpha_partials(pt):
        jac = np.zeros((3, 3))
        jac[1, 0] = 1.0
        jac[0, 2] = -Hq(pt[0], pt[1]).real
        jac[1, 2] = -Hp(pt[0], pt[1]).real
        return jac

    alpha = ChartField(chart, "1-form", alpha_eval, partials=alpha_partials, name="alpha")

    def e1_eval(pt):  # dp + H_q dt
        return np.array([0.0, 1.0, Hq(pt[0], pt[1]).real])

    def e2_eval(pt):  # dq - H_p dt
        return np.array([1.0, 0.0, -Hp(pt[0], pt[1]).real])

    e1 = ChartField(chart, "1-form", e1_eval)
    e2 = ChartField(chart, "1-form", e2_eval)
    coframe = Coframe([e1, e2], np.array([[0.0, 1.0], [-1.0, 0.0]]))

    _, _, s1, s2, _ = fock_rep(fock_dim, hbar)
    x_op, p_op = s2.entries, s1.entries
    rep = HilbertRep("fock", fock_dim, hbar)
    ih = 1j * hbar
    eye = np.eye(fock_dim, dtype=complex)

    model = HamsysModel("hamsys", hbar, H, chart, alpha, coframe, None, x_op, p_op, rep)

    def coefficient(pt, i):
        if i == 0:
            return (pt[1] * eye + p_op) / ih
        if i == 1:
            return -(s2.entries) / ih
        return -model.weyl_shifted(H, pt[0], pt[1]) / ih

    def coefficient_derivative(pt, i, jdir):
        if i == 0 and jdir == 1:
            return eye / ih
        if i == 2 and jdir == 0:
            return -model.weyl_shifted(Hq, pt[0], pt[1]) / ih
        if i == 2 and jdir == 1:
            return -model.weyl_shifted(Hp, pt[0], pt[1]) / ih
        return np.zeros_like(eye)

    # the Weyl tail couples levels up to degree(H) apart, so the truncation
    # corruption reaches that far down from the top of the Fock block
    drop = max(1, H.degree() + 1)
    keep = (np.arange(fock_dim) < fock_dim - drop).astype(bool)
    conn = QuantumConnection(
        chart,
        rep,
        hbar,
        coefficient,
        coefficient_derivative=coefficient_derivative,
        interior=keep,
        name="hamsys",
    )
    model.connection = conn
    return model
