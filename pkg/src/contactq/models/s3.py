"""Quantization of the standard contact 3-sphere, strict and ambient.

Strict side: the Holstein-Primakoff connection on the torus chart
(theta1, theta2, psi) with coframe (lambda_j, lambda_k) and the exact
spectrum truncation at 2/hbar integer.  Ambient side: the R^5 model with
contact form A = lambda_I + du, homothety X, frames (2 lambda_I,
lambda_J/r, lambda_K/r, Y), the explicit contractor connection matrix, the
square-root-dressed quantum connection on a grid x Fock representation, and
the reduction back to the strict model on ker S_plus.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np

from ..connections import QuantumConnection
from ..geometry import Chart, ChartField, Coframe, exterior_derivative, lie_derivative
from ..operators import DomainError, HilbertRep, Operator, fock_rep, spectral_fn

__all__ = [
    "s3_chart_fields",
    "S3StrictModel",
    "s3_strict_model",
    "s3_truncation_scan",
    "S3AmbientModel",
    "s3_ambient_model",
    "s3_reduce_to_strict",
]


# ---------------------------------------------------------------------------
# chart geometry shared by the strict model


def s3_chart_fields(margin: float = 0.05):
    """Torus chart (theta1, theta2, psi) with the quaternionic 1-forms.

    Returns (chart, lambda_i, lambda_j, lambda_k) with analytic partials;
    the domain keeps psi away from the solid-torus cores where the coframe
    degenerates.
    """
    chart = Chart(
        ("theta1", "theta2", "psi"),
        domain=lambda p: margin < p[2] < math.pi / 2 - margin,
    )

    def li(p):
        return np.array([2 * math.cos(p[2]) ** 2, 2 * math.sin(p[2]) ** 2, 0.0])

    def li_partials(p):
        s2 = math.sin(2 * p[2])
        return np.array([[0, 0, 0], [0, 0, 0], [-2 * s2, 2 * s2, 0]], dtype=float)

    def lj(p):
        s, c, sn = math.sin(2 * p[2]), math.cos(p[0] + p[1]), math.sin(p[0] + p[1])
        return np.array([s * sn, -s * sn, 2 * c])

    def lj_partials(p):
        s, c, sn = math.sin(2 * p[2]), math.cos(p[0] + p[1]), math.sin(p[0] + p[1])
        c2 = 2 * math.cos(2 * p[2])
        return np.array(
            [[s * c, -s * c, -2 * sn], [s * c, -s * c, -2 * sn], [c2 * sn, -c2 * sn, 0]],
            dtype=float,
        )

    def lk(p):
        s, c, sn = math.sin(2 * p[2]), math.cos(p[0] + p[1]), math.sin(p[0] + p[1])
        return np.array([-s * c, s * c, 2 * sn])

    def lk_partials(p):
        s, c, sn = math.sin(2 * p[2]), math.cos(p[0] + p[1]), math.sin(p[0] + p[1])
        c2 = 2 * math.cos(2 * p[2])
        return np.array(
            [[s * sn, -s * sn, 2 * c], [s * sn, -s * sn, 2 * c], [-c2 * c, c2 * c, 0]],
            dtype=float,
        )

    lam_i = ChartField(chart, "1-form", li, partials=li_partials, name="lambda_i")
    lam_j = ChartField(chart, "1-form", lj, partials=lj_partials, name="lambda_j")
    lam_k = ChartField(chart, "1-form", lk, partials=lk_partials, name="lambda_k")
    return chart, lam_i, lam_j, lam_k


def holstein_primakoff(hbar: float, fock_dim: int, clamp: bool, wrong_sign: bool = False):
    """(L_i, L_j, L_k, E, E_dagger, number) for the truncated representation.

    The number operator is realized by its exact eigenvalues n*hbar so that
    the square-root argument vanishes identically (not merely to rounding) at
    an exact truncation level.
    """
    a, ad, _, _, num = fock_rep(fock_dim, hbar)
    eye = np.eye(fock_dim)
    n_exact = np.diag(np.arange(fock_dim) * hbar)
    sign = 1.0 if wrong_sign else -1.0
    arg = Operator(num.rep, eye + sign * (n_exact + hbar * eye) / 2.0)
    f = spectral_fn(arg, math.sqrt, clamp_negative=clamp)
    e_op = f.entries @ a.entries
    ed_op = ad.entries @ f.entries
    l_i = eye - n_exact - (hbar / 2.0) * eye
    l_j = (1j / math.sqrt(2.0)) * (ed_op - e_op)
    l_k = (ed_op + e_op) / math.sqrt(2.0)
    return l_i.astype(complex), l_j, l_k, e_op, ed_op, n_exact


@dataclass
class S3StrictModel:
    name: str
    hbar: float
    fock_dim: int
    chart: Chart
    alpha: ChartField
    lam_j: ChartField
    lam_k: ChartField
    coframe: Coframe
    connection: QuantumConnection
    L_i: np.ndarray
    L_j: np.ndarray
    L_k: np.ndarray
    E: np.ndarray
    E_dagger: np.ndarray
    truncating: bool

    def su2_residual(self) -> float:
        """max over cyclic triples of || i hbar L_a + [L_b, L_c] ||."""
        worst = 0.0
        for a, b, c in ((self.L_i, self.L_j, self.L_k),
                        (self.L_j, self.L_k, self.L_i),
                        (self.L_k, self.L_i, self.L_j)):
            m = 1j * self.hbar * a + b @ c - c @ b
            worst = max(worst, float(np.linalg.norm(m, 2)))
        return worst

    def casimir_residual(self) -> float:
        """|| L^2 - hbar^2 j (j+1) Id || with j read off the dimension."""
        j = (self.fock_dim - 1) / 2.0
        cas = self.L_i @ self.L_i + self.L_j @ self.L_j + self.L_k @ self.L_k
        target = self.hbar**2 * j * (j + 1) * np.eye(self.fock_dim)
        return float(np.linalg.norm(cas - target, 2))

    def paper_reeb(self) -> np.ndarray:
        """The paper's Reeb vector d/dtheta1 + d/dtheta2 (alpha eats it to 2)."""
        return np.array([1.0, 1.0, 0.0])


def s3_strict_model(
    hbar: float, fock_dim: int, clamp: bool = False, wrong_sqrt_sign: bool = False
) -> S3StrictModel:
    """Holstein-Primakoff quantization of (S^3, lambda_i).

    Without ``clamp`` the Fock dimension must stay within the square-root
    domain, fock_dim <= 2/hbar; at equality the representation truncates
    exactly and the su(2) relations hold on the full block.
    """
    if not clamp and fock_dim * hbar > 2.0 + 1e-12:
        raise DomainError(
            f"fock_dim {fock_dim} exceeds the sqrt domain bound 2/hbar = {2/hbar:.6g}; "
            "enable clamp or reduce the dimension"
        )
    chart, lam_i, lam_j, lam_k = s3_chart_fields()
    coframe = Coframe([lam_j, lam_k], np.array([[0.0, 1.0], [-1.0, 0.0]]))
    l_i, l_j, l_k, e_op, ed_op, _ = holstein_primakoff(hbar, fock_dim, clamp, wrong_sqrt_sign)
    ih = 1j * hbar
    lams = (lam_i, lam_j, lam_k)
    ops = (l_i, l_j, l_k)

    def coefficient(pt, i):
        acc = np.zeros((fock_dim, fock_dim), dtype=complex)
        for lam, op in zip(lams, ops):
            acc += lam(pt)[i] * op
        return acc / ih

    def coefficient_derivative(pt, i, jdir):
        acc = np.zeros((fock_dim, fock_dim), dtype=complex)
        for lam, op in zip(lams, ops):
            acc += lam.partials_at(pt)[jdir, i] * op
        return acc / ih

    truncating = abs(fock_dim * hbar - 2.0) < 1e-12
    if truncating:
        keep = np.ones(fock_dim, dtype=bool)
    else:
        keep = np.arange(fock_dim) < max(1, fock_dim - 2)
    conn = QuantumConnection(
        chart,
        HilbertRep("fock", fock_dim, hbar),
        hbar,
        coefficient,
        coefficient_derivative=coefficient_derivative,
        interior=keep,
        name="s3-strict" + ("-broken" if wrong_sqrt_sign else ""),
    )
    return S3StrictModel(
        "s3-strict", hbar, fock_dim, chart, lam_i, lam_j, lam_k, coframe, conn,
        l_i, l_j, l_k, e_op, ed_op, truncating,
    )


def s3_truncation_scan(hbar_grid) -> List[Dict]:
    """Scan for exact spectrum truncation of the Holstein-Primakoff tower.

    For each hbar reports the lowest level n with 1 - hbar(n+1)/2 = 0 (within
    1e-12), the implied dimension n+1 and spin (dim-1)/2, an operator-level
    verification that E^dagger annihilates |n>, and the paper-stated
    condition (1 - hbar/2 a nonpositive integer, spin (hbar-2)/4), which
    agrees with the operator account only at hbar = 2.
    """
    rows = []
    for hbar in hbar_grid:
        if not 0 < hbar <= 4:
            raise ValueError("scan expects hbar in (0, 4]")
        two_over = 2.0 / hbar
        n = int(round(two_over)) - 1
        exact = n >= 0 and abs(1.0 - hbar * (n + 1) / 2.0) < 1e-12
        row = {
            "hbar": float(hbar),
            "truncates": bool(exact),
            "level": int(n) if exact else None,
            "dim": int(n + 1) if exact else None,
            "spin": (n / 2.0) if exact else None,
            "paper_condition": float(1.0 - hbar / 2.0).is_integer() and (1.0 - hbar / 2.0) <= 0,
            "paper_spin": (hbar - 2.0) / 4.0,
        }
        if exact:
            # operator-level oracle one level above the cut
            _, _, _, _, ed_op, _ = holstein_primakoff(hbar, n + 2, clamp=True)
            basis_state = np.zeros(n + 2)
            basis_state[n] = 1.0
            row["edagger_annihilation"] = float(np.linalg.norm(ed_op @ basis_state))
            row["agrees_with_paper"] = bool(
                row["paper_condition"] and abs(row["paper_spin"] - row["spin"]) < 1e-12
            )
        else:
            row["edagger_annihilation"] = None
            row["agrees_with_paper"] = False
        rows.append(row)
    return rows


# ---------------------------------------------------------------------------
# ambient R^5 model


def _chebyshev_grid(n: int, lo: float, hi: float) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Chebyshev collocation nodes, differentiation matrix, and native nodes.

    Polynomial interpolants of degree < n are differentiated exactly, so the
    canonical-pair identities hold to machine precision on the subspace of
    bounded polynomial degree; all discretization error is pushed into the
    top Chebyshev degrees, which the masked norms exclude.
    """
    if n < 2:
        raise ValueError("need at least two collocation nodes")
    N = n - 1
    x = np.cos(np.pi * np.arange(n) / N)
    c = np.ones(n)
    c[0] = c[-1] = 2.0
    c = c * (-1.0) ** np.arange(n)
    big_x = np.tile(x, (n, 1)).T
    dx = big_x - big_x.T
    d = np.outer(c, 1.0 / c) / (dx + np.eye(n))
    d = d - np.diag(d.sum(axis=1))
    s = lo + (hi - lo) * (1.0 - x) / 2.0
    return s, d * (-2.0 / (hi - lo)), x


def _degree_projector(native_nodes: np.ndarray, buffer: int) -> np.ndarray:
    """Orthogonal projector onto Chebyshev degrees <= n - 1 - buffer."""
    n = len(native_nodes)
    keep = max(1, n - buffer)
    v = np.polynomial.chebyshev.chebvander(native_nodes, n - 1)[:, :keep]
    q, _ = np.linalg.qr(v)
    return q @ q.T


def _r5_forms():
    """Analytic coefficient functions for lambda_I, lambda_J, lambda_K, Y, du."""

    def lam_i(p):
        x, y, z, w, _ = p
        return np.array([-2 * y, 2 * x, -2 * w, 2 * z, 0.0])

    def lam_i_partials(p):
        jac = np.zeros((5, 5))
        jac[0, 1] = 2.0
        jac[1, 0] = -2.0
        jac[2, 3] = 2.0
        jac[3, 2] = -2.0
        return jac

    def lam_j(p):
        x, y, z, w, _ = p
        return np.array([-2 * z, 2 * w, 2 * x, -2 * y, 0.0])

    def lam_j_partials(p):
        jac = np.zeros((5, 5))
        jac[0, 2] = 2.0
        jac[1, 3] = -2.0
        jac[2, 0] = -2.0
        jac[3, 1] = 2.0
        return jac

    def lam_k(p):
        # K = IJ quaternionic partner; the sign pattern is fixed by the
        # structure equations d lambda_I = lambda_J ^ lambda_K / r^2 + 2 Y ^ lambda_I
        x, y, z, w, _ = p
        return np.array([-2 * w, -2 * z, 2 * y, 2 * x, 0.0])

    def lam_k_partials(p):
        jac = np.zeros((5, 5))
        jac[0, 3] = 2.0
        jac[1, 2] = 2.0
        jac[2, 1] = -2.0
        jac[3, 0] = -2.0
        return jac

    def rsq(p):
        return p[0] ** 2 + p[1] ** 2 + p[2] ** 2 + p[3] ** 2

    def y_form(p):
        r2 = rsq(p)
        return np.array([p[0], p[1], p[2], p[3], 0.0]) / r2

    def y_partials(p):
        r2 = rsq(p)
        jac = np.zeros((5, 5))
        for i in range(4):
            for j in range(4):
                jac[i, j] = (1.0 if i == j else 0.0) / r2 - 2 * p[i] * p[j] / r2**2
        return jac

    return lam_i, lam_i_partials, lam_j, lam_j_partials, lam_k, lam_k_partials, y_form, y_partials, rsq


@dataclass
class S3AmbientModel:
    name: str
    hbar: float
    fock_dim: int
    grid_dim: int
    chart: Chart
    A: ChartField
    lam_i: ChartField
    lam_j: ChartField
    lam_k: ChartField
    y_form: ChartField
    frames: List[ChartField]
    rsq: Callable[[np.ndarray], float]
    omega_matrix: Callable[[np.ndarray], np.ndarray]
    # quantum realization
    sigma_grid: np.ndarray
    deriv_matrix: np.ndarray
    grid_projector: np.ndarray
    a_fock: np.ndarray

    # -- geometry -----------------------------------------------------------

    def x_vector(self, p) -> np.ndarray:
        return np.array([p[0], p[1], p[2], p[3], 2 * p[4]])

    def frame_struct_residual(self, points) -> float:
        """max residual of d E^A + Omega^A_B ^ E^B = 0 (FD exterior d)."""
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

    def canonical_tractor_residual(self, points) -> float:
        """d^Omega X^A = E^A with X^A = (0, 0, 0, 1)."""
        worst = 0.0
        for p in points:
            om = self.omega_matrix(p)
            for a in range(4):
                resid = om[a, 3] - self.frames[a](p)
                worst = max(worst, float(np.max(np.abs(resid))))
        return worst

    def curvature_matrix(self, p) -> np.ndarray:
        """F^A_B = d Omega^A_B + Omega^A_C ^ Omega^C_B (FD), shape (4,4,5,5)."""
        p = np.asarray(p, dtype=float)
        h = self.chart.h
        om0 = self.omega_matrix(p)
        dom = np.zeros((4, 4, 5, 5))
        for i in range(5):
            step = np.zeros(5)
            step[i] = h
            diff = (self.omega_matrix(p + step) - self.omega_matrix(p - step)) / (2 * h)
            for a in range(4):
                for b in range(4):
                    dom[a, b, i, :] += diff[a, b]
                    dom[a, b, :, i] -= diff[a, b]
        f = dom
        for a in range(4):
            for b in range(4):
                for c in range(4):
                    outer = np.outer(om0[a, c], om0[c, b])
                    f[a, b] += outer - outer.T
        return f

    def curvature_block_residual(self, points) -> float:
        """F equals +/- lambda_J ^ lambda_K / r^4 in the (1,2) block, else 0."""
        worst = 0.0
        for p in points:
            f = self.curvature_matrix(p)
            lj, lk = self.lam_j(p), self.lam_k(p)
            block = (np.outer(lj, lk) - np.outer(lk, lj)) / self.rsq(p) ** 2
            expect = np.zeros_like(f)
            expect[1, 2] = block
            expect[2, 1] = -block
            worst = max(worst, float(np.max(np.abs(f - expect))))
        return worst

    def curvature_annihilates_x(self, points) -> float:
        """iota_X F = 0 and F^A_B X^B = 0."""
        worst = 0.0
        for p in points:
            f = self.curvature_matrix(p)
            xv = self.x_vector(p)
            worst = max(worst, float(np.max(np.abs(np.einsum("abij,i->abj", f, xv)))))
            worst = max(worst, float(np.max(np.abs(f[:, 3]))))  # X^B = delta_{B,-}
        return worst

    def homothety_residual(self, points) -> float:
        """L_X A = 2 A via the Cartan formula."""
        xfield = ChartField(self.chart, "vector", lambda q: self.x_vector(q))
        worst = 0.0
        for p in points:
            r = lie_derivative(xfield, self.A, p) - 2 * self.A(p)
            worst = max(worst, float(np.max(np.abs(r))))
        return worst

    def parallel_tractor_residual(self, points) -> float:
        """d I^A + Omega^A_B I^B for I^A = (r, 0, 0, 0)."""
        worst = 0.0
        h = self.chart.h
        for p in points:
            om = self.omega_matrix(p)
            grad_r = np.zeros(5)
            for i in range(5):
                step = np.zeros(5)
                step[i] = h
                grad_r[i] = (math.sqrt(self.rsq(p + step)) - math.sqrt(self.rsq(p - step))) / (2 * h)
            r = math.sqrt(self.rsq(p))
            resid = [grad_r + om[0, 0] * r, om[1, 0] * r, om[2, 0] * r, om[3, 0] * r]
            worst = max(worst, float(np.max(np.abs(np.stack(resid)))))
        return worst

    # -- quantum ------------------------------------------------------------

    @property
    def joint_dim(self) -> int:
        return self.grid_dim * self.fock_dim

    def _joint(self, grid_part: np.ndarray, fock_part: np.ndarray) -> np.ndarray:
        return np.kron(grid_part, fock_part)

    def s_plus(self, hbar: float) -> np.ndarray:
        return math.sqrt(hbar) * np.diag(self.sigma_grid).astype(complex)

    def s_minus(self, hbar: float) -> np.ndarray:
        return -1j * math.sqrt(hbar) * self.deriv_matrix.astype(complex)

    def g0_matrix(self) -> np.ndarray:
        """Grade-0 coefficient of nabla along X: (S+S- + S-S+)/(2 i hbar)."""
        sd = np.diag(self.sigma_grid) @ self.deriv_matrix + self.deriv_matrix @ np.diag(self.sigma_grid)
        return self._joint(-(sd.astype(complex)) / 2.0, np.eye(self.fock_dim, dtype=complex))

    def sqrt_argument(self, hbar: float, r: float) -> np.ndarray:
        gamma = math.sqrt(hbar) * self.sigma_grid
        levels = (np.arange(self.fock_dim) + 1) * hbar
        return (1 + gamma[:, None]) ** 2 - levels[None, :] / (2 * r**2)

    def frame_coefficients(self, hbar: float, r: float) -> Dict[str, np.ndarray]:
        """Joint-space coefficient operators per frame form at radius r.

        Keys: "du", "lam_i", "lam_j", "lam_k", "y"; each is the operator
        multiplying that form in the connection (i hbar division included).
        """
        gdim, fdim = self.grid_dim, self.fock_dim
        ih = 1j * hbar
        eye_g = np.eye(gdim, dtype=complex)
        eye_f = np.eye(fdim, dtype=complex)
        a_f = self.a_fock * math.sqrt(hbar)
        n_f = np.diag(np.arange(fdim) * hbar).astype(complex)
        h_f = n_f + (hbar / 2.0) * eye_f
        arg = self.sqrt_argument(hbar, r)
        if np.min(arg) < -1e-12:
            bad = np.unravel_index(np.argmin(arg), arg.shape)
            raise DomainError(
                f"sqrt argument {np.min(arg):.4g} negative at grid node {bad[0]}, level {bad[1]}"
            )
        root = np.sqrt(np.clip(arg, 0.0, None))
        root_joint = np.diag(root.reshape(-1)).astype(complex)  # kron(grid, fock) diagonal
        splus = self.s_plus(hbar)
        one_plus = eye_g + splus
        gi = self._joint(one_plus @ one_plus, eye_f) - self._joint(eye_g, h_f) / r**2
        ad_joint = self._joint(eye_g, a_f.conj().T)
        a_joint = self._joint(eye_g, a_f)
        gj = (1j / math.sqrt(2)) * (ad_joint @ root_joint - root_joint @ a_joint) / r
        gk = (1.0 / math.sqrt(2)) * (ad_joint @ root_joint + root_joint @ a_joint) / r
        sminus = self.s_minus(hbar)
        sym = 0.5 * (splus @ sminus + sminus @ splus)
        gy = self._joint(sminus + sym, eye_f)
        return {
            "du": self._joint(eye_g, eye_f) / ih,
            "lam_i": gi / ih,
            "lam_j": gj / ih,
            "lam_k": gk / ih,
            "y": gy / ih,
        }

    def coefficient_for_direction(self, hbar: float, point, u_field) -> np.ndarray:
        """A^hbar(U) at a point for a vector field U (callable point -> R^5)."""
        point = np.asarray(point, dtype=float)
        u = np.asarray(u_field(point), dtype=float)
        r = math.sqrt(self.rsq(point))
        coeffs = self.frame_coefficients(hbar, r)
        du_u = u[4]
        vals = {
            "du": du_u,
            "lam_i": float(self.lam_i(point) @ u),
            "lam_j": float(self.lam_j(point) @ u),
            "lam_k": float(self.lam_k(point) @ u),
            "y": float(self.y_form(point) @ u),
        }
        acc = np.zeros((self.joint_dim, self.joint_dim), dtype=complex)
        for key, c in vals.items():
            if c != 0.0:
                acc += c * coeffs[key]
        return acc

    def masked_norm(self, mat: np.ndarray) -> float:
        """Spectral norm on the resolved block.

        The grid factor is projected onto bounded Chebyshev degree (the
        analog of the leading Fock block); the Fock factor is exact here.
        """
        p = np.kron(self.grid_projector, np.eye(self.fock_dim)).astype(complex)
        return float(np.linalg.norm(p @ mat @ p, 2))

    def x_flow(self, point, t: float) -> np.ndarray:
        p = np.asarray(point, dtype=float)
        s = math.exp(t)
        return np.array([p[0] * s, p[1] * s, p[2] * s, p[3] * s, p[4] * s * s])

    def equivariance_residual(self, u_field, point, hbar0: Optional[float] = None,
                              rel_step: float = 1e-4) -> float:
        """Residual of [nabla0_X + gr, nabla_U] at a cone point (u = 0)."""
        point = np.asarray(point, dtype=float)
        if abs(point[4]) > 1e-10:
            raise ValueError("equivariance is checked on the cone u = 0")
        h0 = self.hbar if hbar0 is None else hbar0
        # homogeneity precondition: the flow pull-back of U must be stationary
        eps = 1e-5
        du_flow = (self._push(u_field, point, eps) - self._push(u_field, point, -eps)) / (2 * eps)
        if np.max(np.abs(du_flow)) > 1e-6:
            raise ValueError("direction field is not homogeneous (L_X U != 0)")
        g0 = self.g0_matrix()
        a_u = self.coefficient_for_direction(h0, point, u_field)
        flow_step = 1e-5
        lie_x = (
            self.coefficient_for_direction(h0, self.x_flow(point, flow_step), u_field)
            - self.coefficient_for_direction(h0, self.x_flow(point, -flow_step), u_field)
        ) / (2 * flow_step)
        grading = (
            self.coefficient_for_direction(h0 * (1 + rel_step), point, u_field)
            - self.coefficient_for_direction(h0 * (1 - rel_step), point, u_field)
        ) / rel_step
        resid = lie_x + g0 @ a_u - a_u @ g0 + grading
        return self.masked_norm(resid)

    def _push(self, u_field, point, t):
        """Components of (x_{-t})_* U(x_t(point)) minus U(point) scale test."""
        moved = self.x_flow(point, t)
        u_m = np.asarray(u_field(moved), dtype=float)
        s = math.exp(-t)
        pulled = np.array([u_m[0] * s, u_m[1] * s, u_m[2] * s, u_m[3] * s, u_m[4] * s * s])
        return pulled - np.asarray(u_field(point), dtype=float)

    # -- reduction ----------------------------------------------------------

    def reduced_coefficient(self, direction: str, gamma: float = 0.0, r: float = 1.0,
                            hbar: Optional[float] = None) -> np.ndarray:
        """Fock-space coefficient after the S_plus -> gamma substitution.

        direction is one of "lam_i", "lam_j", "lam_k"; the Y and du terms pull
        back to zero on the r = 1, u = 0 sphere.
        """
        h = self.hbar if hbar is None else hbar
        fdim = self.fock_dim
        eye = np.eye(fdim, dtype=complex)
        a_f = self.a_fock * math.sqrt(h)
        n_f = np.diag(np.arange(fdim) * h).astype(complex)
        h_f = n_f + (h / 2.0) * eye
        if direction == "lam_i":
            return ((1 + gamma) ** 2 * eye - h_f / r**2) / (1j * h)
        levels = (np.arange(fdim) + 1) * h
        arg = (1 + gamma) ** 2 - levels / (2 * r**2)
        if np.min(arg) < -1e-12:
            raise DomainError("sqrt argument negative in the reduced coefficient")
        root = np.diag(np.sqrt(np.clip(arg, 0.0, None))).astype(complex)
        if direction == "lam_j":
            return (1j / math.sqrt(2)) * (a_f.conj().T @ root - root @ a_f) / (r * 1j * h)
        if direction == "lam_k":
            return (a_f.conj().T @ root + root @ a_f) / (math.sqrt(2) * r * 1j * h)
        raise ValueError(f"unknown reduced direction {direction!r}")


def s3_ambient_model(
    hbar: float,
    fock_dim: int,
    grid_dim: int = 96,
    sigma_lo: float = 0.25,
    sigma_hi: float = 2.25,
    degree_buffer: int = 30,
) -> S3AmbientModel:
    """Ambient R^5 quantization of the 3-sphere.

    The (1,2)-mode is a truncated Fock space; the (+,-)-mode realizes S_plus
    diagonally on positive Chebyshev collocation nodes (so the square-root
    dressing stays in its domain) with S_minus the collocation derivative.
    Residual norms project the grid factor onto Chebyshev degrees below the
    buffer, where the canonical-pair identities are exact.
    """
    chart = Chart(("x", "y", "z", "w", "u"), domain=lambda p: p[:4] @ p[:4] > 0.04)
    li, lip, lj, ljp, lk, lkp, yf, yp, rsq = _r5_forms()
    lam_i = ChartField(chart, "1-form", li, partials=lip, name="lambda_I")
    lam_j = ChartField(chart, "1-form", lj, partials=ljp, name="lambda_J")
    lam_k = ChartField(chart, "1-form", lk, partials=lkp, name="lambda_K")
    y_form = ChartField(chart, "1-form", yf, partials=yp, name="Y")

    def a_eval(p):
        out = li(p)
        out[4] = 1.0
        return out

    def a_partials(p):
        return lip(p)

    a_field = ChartField(chart, "1-form", a_eval, partials=a_partials, name="A")

    def r_of(p):
        return math.sqrt(rsq(p))

    e_plus = ChartField(chart, "1-form", lambda p: 2 * li(p), partials=lambda p: 2 * lip(p))
    e_one = ChartField(
        chart, "1-form",
        lambda p: lj(p) / r_of(p),
        partials=lambda p: ljp(p) / r_of(p)
        - np.outer(np.array([p[0], p[1], p[2], p[3], 0.0]) / rsq(p), lj(p) / r_of(p)),
    )
    e_two = ChartField(
        chart, "1-form",
        lambda p: lk(p) / r_of(p),
        partials=lambda p: lkp(p) / r_of(p)
        - np.outer(np.array([p[0], p[1], p[2], p[3], 0.0]) / rsq(p), lk(p) / r_of(p)),
    )
    frames = [e_plus, e_one, e_two, y_form]

    def omega_matrix(p):
        r = r_of(p)
        r2 = rsq(p)
        om = np.zeros((4, 4, 5))
        om[0, 0] = -yf(p)
        om[0, 1] = lk(p) / r
        om[0, 2] = -lj(p) / r
        om[0, 3] = 2 * li(p)
        om[1, 2] = li(p) / r2
        om[1, 3] = lj(p) / r
        om[2, 1] = -li(p) / r2
        om[2, 3] = lk(p) / r
        om[3, 3] = yf(p)
        return om

    sigma, deriv, native = _chebyshev_grid(grid_dim, sigma_lo, sigma_hi)
    projector = _degree_projector(native, degree_buffer)
    a_unit, _, _, _, _ = fock_rep(fock_dim, 1.0)

    model = S3AmbientModel(
        "s3-ambient", hbar, fock_dim, grid_dim, chart, a_field,
        lam_i, lam_j, lam_k, y_form, frames, rsq, omega_matrix,
        sigma, deriv, projector, a_unit.entries,
    )
    # validate the sqrt domain once at the tightest radius the suites use
    _ = model.frame_coefficients(hbar, 1.0)
    return model


def s3_reduce_to_strict(ambient: S3AmbientModel, hbar: Optional[float] = None) -> Dict[str, float]:
    """Compare the reduced ambient connection with the strict model.

    Substitutes S_plus -> 0 in the coefficient operators, pulls the forms
    back to the r = 1, u = 0 sphere (du and Y pull back to zero), and
    reports the maximum coefficient difference per coframe direction, plus a
    two-point O(epsilon) constraint-compatibility probe.
    """
    h = ambient.hbar if hbar is None else hbar
    strict = s3_strict_model(h, ambient.fock_dim)
    ih = 1j * h
    diffs = {}
    for label, strict_op in (("lam_i", strict.L_i), ("lam_j", strict.L_j), ("lam_k", strict.L_k)):
        red = ambient.reduced_coefficient(label, gamma=0.0, r=1.0, hbar=h)
        diffs[label] = float(np.max(np.abs(red - strict_op / ih)))
    diffs["max"] = max(diffs.values())
    # constraint compatibility: differences are O(epsilon)
    probes = []
    for eps in (1e-3, 1e-4):
        d = max(
            float(np.max(np.abs(
                ambient.reduced_coefficient(lbl, gamma=eps, r=1.0, hbar=h)
                - ambient.reduced_coefficient(lbl, gamma=0.0, r=1.0, hbar=h)
            )))
            for lbl in ("lam_i", "lam_j", "lam_k")
        )
        probes.append(d / eps)
    diffs["constraint_slope_ratio"] = float(probes[0] / probes[1]) if probes[1] else float("inf")
    return diffs
