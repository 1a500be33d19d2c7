"""Contactization of the symplectization: A = e^{2 mu} alpha + d nu.

Built over a Darboux or R^3 base.  The ambient frames, the contractor
connection matrix with (omega, P, Q) from the base Levi solve (P = Q = 0
closes the constraint system for both shipped bases), the ambient
D-operator instance, the parallel scale tractor sigma = e^mu, and the
R+-equivariant quantum connection on a two-factor Fock space.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional

import numpy as np

from ..geometry import Chart, ChartField, exterior_derivative, levi_connection_solve, lie_derivative, reeb_vector
from ..operators import fock_rep
from .darboux import darboux_model
from .r3 import r3_model

__all__ = ["ContactizationModel", "contactization_model"]


@dataclass
class ContactizationModel:
    name: str
    hbar: float
    base_name: str
    chart: Chart
    A: ChartField
    base_alpha_lift: ChartField
    frames: List[ChartField]  # (E+, E^1, E^2, E-)
    J: np.ndarray
    omega_matrix: Callable[[np.ndarray], np.ndarray]  # (4, 4, 5)
    base_model: object
    fock_dim_pm: int
    fock_dim_base: int

    # -- geometry -----------------------------------------------------------

    def x_vector(self, p) -> np.ndarray:
        out = np.zeros(5)
        out[0] = 1.0
        out[1] = 2.0 * p[1]
        return out

    def base_point(self, p) -> np.ndarray:
        return np.asarray(p[2:], dtype=float)

    def canonical_tractor_residual(self, points) -> float:
        worst = 0.0
        for p in points:
            om = self.omega_matrix(p)
            for a in range(4):
                worst = max(worst, float(np.max(np.abs(om[a, 3] - self.frames[a](p)))))
        return worst

    def frame_struct_residual(self, points) -> float:
        worst = 0.0
        for p in points:
            om = self.omega_matrix(p)
            coeffs = [f(p) for f in self.frames]
            for a in range(4):
                acc = exterior_derivative(self.frames[a], p)
                for b in range(4):
                    acc = acc + np.outer(om[a, b], coeffs[b]) - np.outer(coeffs[b], om[a, b])
                worst = max(worst, float(np.max(np.abs(acc))))
        return worst

    def curvature_matrix(self, p) -> np.ndarray:
        p = np.asarray(p, dtype=float)
        h = self.chart.h
        om0 = self.omega_matrix(p)
        f = np.zeros((4, 4, 5, 5))
        for i in range(5):
            step = np.zeros(5)
            step[i] = h
            diff = (self.omega_matrix(p + step) - self.omega_matrix(p - step)) / (2 * h)
            for a in range(4):
                for b in range(4):
                    f[a, b, i, :] += diff[a, b]
                    f[a, b, :, i] -= diff[a, b]
        for a in range(4):
            for b in range(4):
                for c in range(4):
                    outer = np.outer(om0[a, c], om0[c, b])
                    f[a, b] += outer - outer.T
        return f

    def curvature_annihilates_x_residual(self, points) -> float:
        """F^A_B X^B = 0 with X^A = (0, 0, 0, 1)."""
        worst = 0.0
        for p in points:
            f = self.curvature_matrix(p)
            worst = max(worst, float(np.max(np.abs(f[:, 3]))))
        return worst

    def frame_homogeneity_residual(self, points) -> float:
        """L_X E^A = diag(2, 1, 1, 0) E^A."""
        xfield = ChartField(self.chart, "vector", lambda q: self.x_vector(q))
        weights = (2.0, 1.0, 1.0, 0.0)
        worst = 0.0
        for p in points:
            for a, w in enumerate(weights):
                r = lie_derivative(xfield, self.frames[a], p) - w * self.frames[a](p)
                worst = max(worst, float(np.max(np.abs(r))))
        return worst

    def parallel_scale_residual(self, points) -> float:
        """d I^A + Omega^A_B I^B for I^A = (sigma, 0, 0, 0), sigma = e^mu."""
        worst = 0.0
        h = self.chart.h
        for p in points:
            om = self.omega_matrix(p)
            sigma = math.exp(p[0])
            grad = np.zeros(5)
            grad[0] = sigma  # d(e^mu)
            resid = [grad + om[0, 0] * sigma, om[1, 0] * sigma, om[2, 0] * sigma, om[3, 0] * sigma]
            worst = max(worst, float(np.max(np.abs(np.stack(resid)))))
        return worst

    def ambient_d_check(self, base_scalar: Callable, weight: float, points) -> float:
        """Ambient D of f = e^{w mu} F(base) against the intrinsic triple.

        Decomposes D f in the coframe (d mu, e^a, alpha, d nu) at mu = nu = 0
        and compares with (w F, d-bar F, L_rho F / 2) from the base geometry.
        """
        base = self.base_model
        worst = 0.0
        for p in points:
            p = np.asarray(p, dtype=float)
            bp = self.base_point(p)
            fval = float(base_scalar(bp))

            def f_big(q):
                return math.exp(weight * q[0]) * float(base_scalar(self.base_point(q)))

            h = self.chart.h
            df = np.zeros(5)
            for i in range(5):
                step = np.zeros(5)
                step[i] = h
                df[i] = (f_big(p + step) - f_big(p - step)) / (2 * h)
            # L_R f with R = d/dnu vanishes for nu-independent f; keep the
            # honest evaluation so the ambient formula is used as stated
            lrf = df[1]
            xflat = 2.0 * math.exp(2 * p[0]) * self._alpha_coeffs(p)
            d_ambient = df - (self.A(p) - 0.5 * xflat) * lrf

            rows = [self._dmu(), self._lift(base.coframe.forms[0](bp)),
                    self._lift(base.coframe.forms[1](bp)), self._alpha_coeffs(p), self._dnu()]
            sol, _, _, _ = np.linalg.lstsq(np.stack(rows).T, d_ambient, rcond=None)
            c_mu, c_1, c_2, c_alpha, c_nu = sol

            rho = reeb_vector(base.alpha, bp)
            scal = ChartField(base.chart, "scalar", lambda q: float(base_scalar(q)))
            grad = scal.partials_at(bp)
            lrho_f = float(grad @ rho)
            dbar = grad - lrho_f * base.alpha(bp)
            duals = base.coframe.dual_vectors(base.alpha, bp)
            dbar_frame = np.array([float(dbar @ duals[0]), float(dbar @ duals[1])])

            worst = max(worst, abs(c_mu - weight * fval))
            worst = max(worst, float(np.max(np.abs(np.array([c_1, c_2]) - dbar_frame))))
            worst = max(worst, abs(0.5 * c_alpha - 0.5 * lrho_f))
            worst = max(worst, abs(c_nu))
        return worst

    def _dmu(self):
        out = np.zeros(5)
        out[0] = 1.0
        return out

    def _dnu(self):
        out = np.zeros(5)
        out[1] = 1.0
        return out

    def _lift(self, base_cov):
        out = np.zeros(5)
        out[2:] = base_cov
        return out

    def _alpha_coeffs(self, p):
        return self._lift(self.base_model.alpha(self.base_point(p)))

    # -- quantum ------------------------------------------------------------

    @property
    def joint_dim(self) -> int:
        return self.fock_dim_pm * self.fock_dim_base

    def _base_frame_ops_at(self, hbar: float, base_point):
        _, _, s1, s2, _ = fock_rep(self.fock_dim_base, hbar)
        if self.base_name == "darboux":
            return [s2.entries, -s1.entries]
        theta = base_point[1]
        s_minus = math.sin(theta) * s2.entries - math.cos(theta) * s1.entries
        s_plus = -(math.cos(theta) * s2.entries + math.sin(theta) * s1.entries)
        return [s_minus, s_plus]

    def frame_ops_at(self, hbar: float, point) -> List[np.ndarray]:
        _, _, s1p, s2p, _ = fock_rep(self.fock_dim_pm, hbar)
        eye_pm = np.eye(self.fock_dim_pm, dtype=complex)
        eye_b = np.eye(self.fock_dim_base, dtype=complex)
        b1, b2 = self._base_frame_ops_at(hbar, self.base_point(point))
        return [
            np.kron(s2p.entries, eye_b),
            np.kron(eye_pm, b1),
            np.kron(eye_pm, b2),
            np.kron(s1p.entries, eye_b),
        ]

    def omega_upper(self, p) -> np.ndarray:
        """Omega^{AB} = Omega^A_C J_CB (symmetric in AB), shape (4, 4, 5)."""
        om = self.omega_matrix(p)
        return np.einsum("acd,cb->abd", om, self.J)

    def coefficient_for_direction(self, hbar: float, point, u_field) -> np.ndarray:
        point = np.asarray(point, dtype=float)
        u = np.asarray(u_field(point), dtype=float)
        ops = self.frame_ops_at(hbar, point)
        eye = np.eye(self.joint_dim, dtype=complex)
        acc = float(self.A(point) @ u) * eye
        for a in range(4):
            acc = acc + float(self.frames[a](point) @ u) * ops[a]
        upper = self.omega_upper(point)
        for a in range(4):
            for b in range(4):
                c = float(upper[a, b] @ u)
                if c != 0.0:
                    acc = acc + 0.5 * c * (ops[a] @ ops[b])
        return acc / (1j * hbar)

    def g0_matrix(self, hbar: float, point) -> np.ndarray:
        """Grade-0 part of the connection along X at a cone point."""
        point = np.asarray(point, dtype=float)
        xv = self.x_vector(point)
        ops = self.frame_ops_at(hbar, point)
        upper = self.omega_upper(point)
        acc = np.zeros((self.joint_dim, self.joint_dim), dtype=complex)
        for a in range(4):
            for b in range(4):
                c = float(upper[a, b] @ xv)
                if c != 0.0:
                    acc = acc + 0.5 * c * (ops[a] @ ops[b])
        return acc / (1j * hbar)

    def x_flow(self, point, t: float) -> np.ndarray:
        p = np.asarray(point, dtype=float).copy()
        p[0] += t
        p[1] *= math.exp(2 * t)
        return p

    def interior_mask(self) -> np.ndarray:
        keep_pm = np.arange(self.fock_dim_pm) < self.fock_dim_pm - 2
        keep_b = np.arange(self.fock_dim_base) < self.fock_dim_base - 2
        return np.kron(keep_pm, keep_b).astype(bool)

    def masked_norm(self, mat: np.ndarray) -> float:
        keep = self.interior_mask()
        sub = mat[np.ix_(keep, keep)]
        return float(np.linalg.norm(sub, 2))

    def equivariance_residual(self, u_field, point, hbar0: Optional[float] = None,
                              rel_step: float = 1e-4) -> float:
        point = np.asarray(point, dtype=float)
        if abs(point[1]) > 1e-10:
            raise ValueError("equivariance is checked on the cone nu = 0")
        h0 = self.hbar if hbar0 is None else hbar0
        g0 = self.g0_matrix(h0, point)
        a_u = self.coefficient_for_direction(h0, point, u_field)
        fs = 1e-5
        lie_x = (
            self.coefficient_for_direction(h0, self.x_flow(point, fs), u_field)
            - self.coefficient_for_direction(h0, self.x_flow(point, -fs), u_field)
        ) / (2 * fs)
        grading = (
            self.coefficient_for_direction(h0 * (1 + rel_step), point, u_field)
            - self.coefficient_for_direction(h0 * (1 - rel_step), point, u_field)
        ) / rel_step
        resid = lie_x + g0 @ a_u - a_u @ g0 + grading
        return self.masked_norm(resid)


def contactization_model(
    base: str,
    hbar: float,
    fock_dim_pm: int = 10,
    fock_dim_base: int = 10,
) -> ContactizationModel:
    """Contactization (mu, nu) x base with frames E = (2 e^{2mu} alpha,
    e^mu e^a, d mu) and the P = Q = 0 contractor connection matrix."""
    if base == "darboux":
        base_model = darboux_model(1, hbar, fock_dim_base)
        base_names = base_model.chart.names
        base_domain = base_model.chart.domain
    elif base == "r3":
        base_model = r3_model(hbar, fock_dim_base)
        base_names = base_model.chart.names
        base_domain = base_model.chart.domain
    else:
        raise ValueError(f"unsupported contactization base {base!r}")

    chart = Chart(("mu", "nu") + base_names, domain=lambda p: base_domain(p[2:]))

    def lift_cov(c):
        out = np.zeros(5)
        out[2:] = c
        return out

    def a_eval(p):
        out = lift_cov(base_model.alpha(p[2:]) * math.exp(2 * p[0]))
        out[1] = 1.0
        return out

    a_field = ChartField(chart, "1-form", a_eval, name="A")

    def e_plus(p):
        return lift_cov(2 * math.exp(2 * p[0]) * base_model.alpha(p[2:]))

    def make_frame(a):
        def ev(p):
            return lift_cov(math.exp(p[0]) * base_model.coframe.forms[a](p[2:]))
        return ev

    def e_minus(p):
        out = np.zeros(5)
        out[0] = 1.0
        return out

    frames = [
        ChartField(chart, "1-form", e_plus),
        ChartField(chart, "1-form", make_frame(0)),
        ChartField(chart, "1-form", make_frame(1)),
        ChartField(chart, "1-form", e_minus),
    ]
    jmat = np.array(
        [
            [0.0, 0.0, 0.0, -1.0],
            [0.0, 0.0, 1.0, 0.0],
            [0.0, -1.0, 0.0, 0.0],
            [1.0, 0.0, 0.0, 0.0],
        ]
    )
    j_base = base_model.coframe.j

    def omega_matrix(p):
        p = np.asarray(p, dtype=float)
        bp = p[2:]
        emu = math.exp(p[0])
        om = np.zeros((4, 4, 5))
        coeffs = [base_model.coframe.forms[a](bp) for a in range(2)]
        lowered = j_base @ np.stack(coeffs)
        om[0, 0][0] = -1.0  # -d mu
        om[0, 1] = lift_cov(emu * lowered[0])
        om[0, 2] = lift_cov(emu * lowered[1])
        om[0, 3] = lift_cov(2 * emu**2 * base_model.alpha(bp))
        if base_model.name == "r3":
            mixed = levi_connection_solve(base_model.coframe, base_model.alpha, bp).mixed
            for a in range(2):
                for b in range(2):
                    om[1 + a, 1 + b] = lift_cov(mixed[a, b])
        om[1, 3] = lift_cov(emu * coeffs[0])
        om[2, 3] = lift_cov(emu * coeffs[1])
        om[3, 3][0] = 1.0  # d mu
        return om

    return ContactizationModel(
        "contactization", hbar, base, chart, a_field,
        ChartField(chart, "1-form", lambda p: lift_cov(base_model.alpha(p[2:]))),
        frames, jmat, omega_matrix, base_model,
        fock_dim_pm, fock_dim_base,
    )
