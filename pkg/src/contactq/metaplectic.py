"""Numerical metaplectic representation on a 1-D grid.

Generalized Fourier transforms for free symplectic matrices by direct
quadrature, composition checks up to global phase, the Heisenberg
conjugation law, and the sp(2) generator algebra.  Everything is projective:
comparisons align a single global phase and the Maslov/Conley-Zehnder phase
system is deliberately untracked.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, List, Sequence, Tuple

import numpy as np

from .operators import HilbertRep, fock_rep, grid_rep

__all__ = [
    "FreeSymplectic",
    "GridWavefunction",
    "free_metaplectic_apply",
    "lower_triangular_apply",
    "metaplectic_word_apply",
    "phase_aligned_residual",
    "compose_up_to_phase",
    "conjugation_check",
    "sp2_generators",
    "default_grid",
    "gaussian",
]


class NyquistError(ValueError):
    """Grid cannot resolve the quadrature chirp phases."""


@dataclass(frozen=True)
class FreeSymplectic:
    """2x2 symplectic matrix with nonzero B entry (n = 1 blocks)."""

    a: float
    b: float
    c: float
    d: float

    def __post_init__(self):
        if abs(self.a * self.d - self.b * self.c - 1.0) > 1e-10:
            raise ValueError("matrix is not symplectic (det != 1)")
        if abs(self.b) <= 1e-8:
            raise ValueError("matrix is not free (|B| too small)")

    @property
    def matrix(self) -> np.ndarray:
        return np.array([[self.a, self.b], [self.c, self.d]])

    @staticmethod
    def from_matrix(m) -> "FreeSymplectic":
        m = np.asarray(m, dtype=float)
        return FreeSymplectic(m[0, 0], m[0, 1], m[1, 0], m[1, 1])

    def inverse(self) -> "FreeSymplectic":
        # symplectic inverse [[d, -b], [-c, a]]
        return FreeSymplectic(self.d, -self.b, -self.c, self.a)


@dataclass
class GridWavefunction:
    samples: np.ndarray
    x: np.ndarray

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=complex)
        self.x = np.asarray(self.x, dtype=float)
        if self.samples.shape != self.x.shape:
            raise ValueError("samples and grid size mismatch")
        if not np.all(np.isfinite(self.samples)):
            raise ValueError("wavefunction must be finite")

    @property
    def dx(self) -> float:
        return float(self.x[1] - self.x[0])

    def norm(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.samples) ** 2) * self.dx))


def default_grid(n: int = 1024, half_width: float = 20.0) -> np.ndarray:
    return np.linspace(-half_width, half_width, n)


def gaussian(x: np.ndarray, width: float = 1.0, center: float = 0.0) -> GridWavefunction:
    return GridWavefunction(np.exp(-((x - center) ** 2) / (2 * width**2)), x)


def free_metaplectic_apply(f: FreeSymplectic, psi: GridWavefunction) -> GridWavefunction:
    """Trapezoid quadrature of the generalized Fourier transform.

    L_F psi(x) = (2 pi)^{-1/2} |det B|^{-1/2} int exp(i a_F(x, y)) psi(y) dy
    with a_F(x, y) = (B^{-1}A y^2 + D B^{-1} x^2)/2 - (B^{-1} x) y; the
    Conley-Zehnder phase is dropped.
    """
    x = psi.x
    binv = 1.0 / f.b
    # chirp resolution: the integrand phase gradient must advance < pi per
    # step over the effective support of psi (the far tail cannot alias)
    amax = np.max(np.abs(psi.samples))
    support = np.abs(psi.samples) > 1e-13 * amax if amax > 0 else np.zeros_like(x, bool)
    r_eff = float(np.max(np.abs(x[support]))) if support.any() else 0.0
    grad = abs(binv * f.a) * r_eff + abs(binv) * np.max(np.abs(x))
    if grad * psi.dx >= math.pi:
        raise NyquistError(
            f"phase advance {grad * psi.dx:.3f} rad per sample exceeds pi"
        )
    weights = np.full_like(x, psi.dx)
    weights[0] = weights[-1] = psi.dx / 2.0
    quad_y = 0.5 * binv * f.a * x**2
    quad_x = 0.5 * f.d * binv * x**2
    kernel = np.exp(1j * (quad_x[:, None] - binv * np.outer(x, x) + quad_y[None, :]))
    out = (kernel * (weights * psi.samples)[None, :]).sum(axis=1)
    out *= math.sqrt(abs(binv)) / math.sqrt(2 * math.pi)
    return GridWavefunction(out, x)


def lower_triangular_apply(m, psi: GridWavefunction) -> GridWavefunction:
    """Metaplectic action of a non-free lower-triangular matrix [[a,0],[c,d]].

    Acts by the chirp-dilation formula |a|^{-1/2} e^{i c x^2/(2a)} psi(x/a),
    the multiplication form of the S^{-1} T S conjugation identity.
    """
    m = np.asarray(m, dtype=float)
    if abs(m[0, 1]) > 1e-12:
        raise ValueError("matrix is not lower triangular")
    a, c = m[0, 0], m[1, 0]
    if abs(a * m[1, 1] - 1.0) > 1e-10:
        raise ValueError("matrix is not symplectic")
    x = psi.x
    resampled = np.interp(x / a, x, psi.samples.real, left=0.0, right=0.0) + 1j * np.interp(
        x / a, x, psi.samples.imag, left=0.0, right=0.0
    )
    out = np.exp(1j * c * x**2 / (2 * a)) * resampled / math.sqrt(abs(a))
    return GridWavefunction(out, x)


def metaplectic_word_apply(word: Sequence[FreeSymplectic], psi: GridWavefunction) -> GridWavefunction:
    """Apply a product of free factors, leftmost factor acting last."""
    out = psi
    for f in reversed(list(word)):
        out = free_metaplectic_apply(f, out)
    return out


def phase_aligned_residual(candidate: GridWavefunction, reference: GridWavefunction) -> float:
    """Relative L^2 residual after aligning one global phase.

    The candidate is rotated by the phase difference at the reference's
    largest-modulus sample (deterministic projective comparison).
    """
    ref = reference.samples
    cand = candidate.samples
    k = int(np.argmax(np.abs(ref)))
    if abs(cand[k]) == 0.0:
        return 1.0
    phase = (ref[k] / abs(ref[k])) / (cand[k] / abs(cand[k]))
    resid = np.linalg.norm(cand * phase - ref)
    return float(resid / np.linalg.norm(ref))


def compose_up_to_phase(
    f1: FreeSymplectic, f2: FreeSymplectic, psi: GridWavefunction
) -> float:
    """Residual of L_{F1} L_{F2} psi against the oracle for F1 F2.

    The oracle applies F1 F2 directly when the product is free, else the
    lower-triangular multiplication formula.
    """
    lhs = free_metaplectic_apply(f1, free_metaplectic_apply(f2, psi))
    prod = f1.matrix @ f2.matrix
    if abs(prod[0, 1]) > 1e-8:
        rhs = free_metaplectic_apply(FreeSymplectic.from_matrix(prod), psi)
    else:
        rhs = lower_triangular_apply(prod, psi)
    return phase_aligned_residual(lhs, rhs)


def heisenberg_apply(u: Sequence[float], psi: GridWavefunction) -> GridWavefunction:
    """s((u1, u2)) psi = u2 * y psi + u1 * (1/i) d/dy psi (spectral derivative)."""
    x = psi.x
    n = len(x)
    k = 2 * np.pi * np.fft.fftfreq(n, d=psi.dx)
    dpsi = np.fft.ifft(1j * k * np.fft.fft(psi.samples))
    return GridWavefunction(u[1] * x * psi.samples + u[0] * dpsi / 1j, x)


def conjugation_check(
    g_word: Sequence[FreeSymplectic], u: Sequence[float], psi: GridWavefunction
) -> float:
    """Residual of M(g) s(u) M(g^{-1}) = s(g u) on the given state.

    g is supplied as a word of free factors (leftmost acts last); the inverse
    word reverses and inverts the factors.
    """
    g_word = list(g_word)
    g_mat = np.eye(2)
    for f in g_word:
        g_mat = g_mat @ f.matrix
    inv_word = [f.inverse() for f in reversed(g_word)]
    lhs = metaplectic_word_apply(
        g_word, heisenberg_apply(u, metaplectic_word_apply(inv_word, psi))
    )
    gu = g_mat @ np.asarray(u, dtype=float)
    rhs = heisenberg_apply(gu, psi)
    return phase_aligned_residual(lhs, rhs)


def sp2_generators(rep: HilbertRep) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(m_pp, m_mm, m_pm) from the unit-scale pair s_+ = y, s_- = d/dy.

    [s_-, s_+] = 1 on the interior block, so [m_mm, m_pp] = 2 m_pm holds
    there; Fock reps realize the pair through the quadratures, grid reps
    through the sample diagonal and the derivative matrix.
    """
    if rep.kind == "fock":
        _, _, s1, s2, _ = fock_rep(rep.dim, rep.hbar)
        root = math.sqrt(rep.hbar)
        s_plus = s2.entries / root
        s_minus = 1j * s1.entries / root
    else:
        pos, mom = grid_rep(rep.dim, rep.hbar, rep.x_min, rep.x_max)
        s_plus = pos.entries
        s_minus = mom.entries / (1j * rep.hbar)
    m_pp = s_plus @ s_plus
    m_mm = s_minus @ s_minus
    m_pm = s_plus @ s_minus + s_minus @ s_plus
    return m_pp, m_mm, m_pm
