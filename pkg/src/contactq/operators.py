"""Finite-dimensional Heisenberg / sp(2) machinery.

Truncated Fock and spatial-grid representations of the canonical pair,
Weyl (fully symmetrized) quantization of phase-space polynomials, spectral
functions in the number basis, and the hbar-grading derivative
``gr = 2*hbar*d/d(hbar)``.

Sign conventions used throughout the package: ``s1`` is the "position-like"
and ``s2`` the "conjugate" quadrature with ``[s1, s2] = -i*hbar`` on the
leading block.  Equivalently ``x = s2`` and ``p = s1`` satisfy the physics
convention ``[x, p] = i*hbar``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Dict, Iterable, Sequence, Tuple

import numpy as np

__all__ = [
    "HilbertRep",
    "Operator",
    "PolynomialObservable",
    "HBarFamily",
    "fock_rep",
    "grid_rep",
    "commutator",
    "weyl_quantize",
    "spectral_fn",
    "grading_derivative",
    "interior_block_norm",
]

MAX_FOCK_DIM = 256
MAX_GRID_DIM = 2048
MAX_POLY_DEGREE = 12


class DomainError(ValueError):
    """Raised when a spectral function is evaluated outside its domain."""


@dataclass(frozen=True)
class HilbertRep:
    """A concrete finite-dimensional carrier space.

    kind is "fock" (number basis |0..dim-1>) or "grid" (dim uniform samples
    of [x_min, x_max], endpoints included).
    """

    kind: str
    dim: int
    hbar: float
    x_min: float = 0.0
    x_max: float = 0.0

    def __post_init__(self):
        if self.kind not in ("fock", "grid"):
            raise ValueError(f"unknown representation kind {self.kind!r}")
        if self.dim < 1:
            raise ValueError("dim must be a positive integer")
        if self.hbar <= 0:
            raise ValueError("hbar must be positive")
        cap = MAX_GRID_DIM if self.kind == "grid" else MAX_FOCK_DIM
        if self.dim > cap:
            raise ValueError(f"{self.kind} dim {self.dim} exceeds cap {cap}")
        if self.kind == "grid" and not (self.x_min < self.x_max):
            raise ValueError("grid requires x_min < x_max")

    @property
    def points(self) -> np.ndarray:
        if self.kind != "grid":
            raise ValueError("points only defined for grid reps")
        return np.linspace(self.x_min, self.x_max, self.dim)


@dataclass(frozen=True)
class Operator:
    """Dense complex matrix attached to a representation."""

    rep: HilbertRep
    entries: np.ndarray
    hermitean: bool = False

    def __post_init__(self):
        m = np.ascontiguousarray(self.entries, dtype=complex)
        if m.shape != (self.rep.dim, self.rep.dim):
            raise ValueError(f"entries shape {m.shape} != dim {self.rep.dim}")
        if not np.all(np.isfinite(m)):
            raise ValueError("operator entries must be finite")
        object.__setattr__(self, "entries", m)
        if self.hermitean and np.max(np.abs(m - m.conj().T)) > 1e-12:
            raise ValueError("operator tagged hermitean is not self-adjoint")

    # small algebra so model code stays readable
    def __add__(self, other):
        return Operator(self.rep, self.entries + _coerce(other, self).entries)

    __radd__ = __add__

    def __sub__(self, other):
        return Operator(self.rep, self.entries - _coerce(other, self).entries)

    def __rsub__(self, other):
        return Operator(self.rep, _coerce(other, self).entries - self.entries)

    def __mul__(self, scalar):
        return Operator(self.rep, self.entries * scalar)

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        return Operator(self.rep, self.entries / scalar)

    def __neg__(self):
        return Operator(self.rep, -self.entries)

    def __matmul__(self, other):
        _check_same_rep(self, other)
        return Operator(self.rep, self.entries @ other.entries)

    def dagger(self) -> "Operator":
        return Operator(self.rep, self.entries.conj().T)

    def norm(self) -> float:
        return float(np.linalg.norm(self.entries, 2))

    def trace_part(self) -> complex:
        """Normalized trace; the coefficient of the identity for models
        whose non-scalar parts are traceless."""
        return complex(np.trace(self.entries) / self.rep.dim)


def _coerce(value, like: Operator) -> Operator:
    if isinstance(value, Operator):
        _check_same_rep(value, like)
        return value
    return Operator(like.rep, np.eye(like.rep.dim, dtype=complex) * value)


def _check_same_rep(a: Operator, b: Operator):
    if a.rep != b.rep:
        raise ValueError("operators live on different representations")


def identity(rep: HilbertRep) -> Operator:
    return Operator(rep, np.eye(rep.dim, dtype=complex))


def zero(rep: HilbertRep) -> Operator:
    return Operator(rep, np.zeros((rep.dim, rep.dim), dtype=complex))


def fock_rep(dim: int, hbar: float) -> Tuple[Operator, Operator, Operator, Operator, Operator]:
    """Truncated-oscillator ladder pair and quadratures.

    Returns ``(a, a_dagger, s1, s2, number_op)`` with ``a|n> = sqrt(n*hbar)|n-1>``,
    ``s2 = (a + a^)/sqrt(2)``, ``s1 = (a - a^)/(i sqrt(2))`` and
    ``number_op = a^ a``.  ``[a, a^] = hbar`` holds exactly on the leading
    (dim-1) block; the last diagonal entry is the usual truncation artifact.
    """
    rep = HilbertRep("fock", int(dim), float(hbar))
    n = np.arange(1, dim)
    a = np.zeros((dim, dim), dtype=complex)
    a[n - 1, n] = np.sqrt(n * hbar)
    ad = a.conj().T
    a_op = Operator(rep, a)
    ad_op = Operator(rep, ad)
    s2 = Operator(rep, (a + ad) / math.sqrt(2.0), hermitean=True)
    s1 = Operator(rep, (a - ad) / (1j * math.sqrt(2.0)), hermitean=True)
    number_op = Operator(rep, ad @ a, hermitean=True)
    return a_op, ad_op, s1, s2, number_op


def _fourier_derivative_matrix(dim: int, spacing: float) -> np.ndarray:
    """Dense spectral differentiation matrix (periodic Fourier multiplier).

    The implied period is dim*spacing, one sample beyond the last grid point;
    exact for functions supported away from the grid edges.
    """
    k = 2.0 * np.pi * np.fft.fftfreq(dim, d=spacing)
    eye = np.eye(dim)
    return np.real(np.fft.ifft(1j * k[:, None] * np.fft.fft(eye, axis=0), axis=0)) + 0j


def _stencil_derivative_matrix(dim: int, h: float) -> np.ndarray:
    """4th-order central difference with periodic wrap."""
    d = np.zeros((dim, dim))
    for off, c in ((-2, 1 / 12), (-1, -2 / 3), (1, 2 / 3), (2, -1 / 12)):
        d += c * np.roll(np.eye(dim), off, axis=1)
    return (d / h) + 0j


def grid_rep(
    dim: int,
    hbar: float,
    x_min: float,
    x_max: float,
    method: str = "fourier",
) -> Tuple[Operator, Operator]:
    """Spatial-grid pair ``(position, momentum)`` with ``[position, momentum] = -i*hbar``
    on states resolved by the grid.

    ``position`` is the diagonal of sample points.  ``momentum`` is ``i*hbar``
    times the periodic differentiation matrix (``method``: "fourier" spectral
    multiplier or "stencil4" 4th-order central stencil); the orientation is the
    one matching the package quadrature convention [s1, s2] = -i*hbar with
    s1 = position.
    """
    if dim < 8:
        raise ValueError("grid_rep requires dim >= 8")
    rep = HilbertRep("grid", int(dim), float(hbar), float(x_min), float(x_max))
    x = rep.points
    if method == "fourier":
        d = _fourier_derivative_matrix(dim, x[1] - x[0])
    elif method == "stencil4":
        d = _stencil_derivative_matrix(dim, x[1] - x[0])
    else:
        raise ValueError(f"unknown derivative method {method!r}")
    position = Operator(rep, np.diag(x).astype(complex), hermitean=True)
    momentum = Operator(rep, 1j * hbar * d)
    return position, momentum


def commutator(a: Operator, b: Operator) -> Operator:
    _check_same_rep(a, b)
    return Operator(a.rep, a.entries @ b.entries - b.entries @ a.entries)


def interior_block_norm(op: Operator, drop: int = 1) -> float:
    """Spectral norm of the leading (dim-drop) block.

    Truncated-oscillator identities hold only away from the top level; the
    corrupted corner is excluded by contract rather than hidden.
    """
    if drop <= 0:
        return op.norm()
    d = op.rep.dim - drop
    if d <= 0:
        return 0.0
    return float(np.linalg.norm(op.entries[:d, :d], 2))


@dataclass
class PolynomialObservable:
    """Finitely supported real/complex polynomial in (q, p).

    ``coeffs`` maps exponent pairs (deg_q, deg_p) to coefficients; total
    degree is capped at 12 to guard the symmetrization blow-up.
    """

    coeffs: Dict[Tuple[int, int], complex] = field(default_factory=dict)

    def __post_init__(self):
        clean = {}
        for (m, n), c in self.coeffs.items():
            if m < 0 or n < 0:
                raise ValueError("exponents must be non-negative")
            if m + n > MAX_POLY_DEGREE:
                raise ValueError(
                    f"total degree {m + n} exceeds the supported maximum {MAX_POLY_DEGREE}"
                )
            if not np.isfinite(complex(c)):
                raise ValueError("coefficients must be finite")
            if c != 0:
                clean[(int(m), int(n))] = complex(c)
        self.coeffs = clean

    def __call__(self, q: float, p: float) -> complex:
        return sum(c * q**m * p**n for (m, n), c in self.coeffs.items())

    def derivative(self, var: str) -> "PolynomialObservable":
        out: Dict[Tuple[int, int], complex] = {}
        for (m, n), c in self.coeffs.items():
            if var == "q" and m > 0:
                out[(m - 1, n)] = out.get((m - 1, n), 0) + m * c
            elif var == "p" and n > 0:
                out[(m, n - 1)] = out.get((m, n - 1), 0) + n * c
        return PolynomialObservable(out)

    def degree(self) -> int:
        return max((m + n for (m, n) in self.coeffs), default=0)


def _symmetrized_qp_product(q: np.ndarray, p: np.ndarray, m: int, n: int) -> np.ndarray:
    """Average of q^m p^n over all distinct orderings of the m+n factors."""
    dim = q.shape[0]
    if m + n == 0:
        return np.eye(dim, dtype=complex)
    words = list(_multiset_permutations([0] * m + [1] * n))
    mats = (q, p)
    acc = np.zeros((dim, dim), dtype=complex)
    for word in words:
        prod = np.eye(dim, dtype=complex)
        for label in word:
            prod = prod @ mats[label]
        acc += prod
    return acc / len(words)


def _multiset_permutations(items: Sequence[int]) -> Iterable[Tuple[int, ...]]:
    if not items:
        yield ()
        return
    seen = set()
    for i, item in enumerate(items):
        if item in seen:
            continue
        seen.add(item)
        rest = list(items[:i]) + list(items[i + 1 :])
        for tail in _multiset_permutations(rest):
            yield (item,) + tail


def weyl_quantize(
    poly: PolynomialObservable,
    rep: HilbertRep,
    substitution: Dict[str, Operator],
) -> Operator:
    """Weyl (fully symmetrized) quantization of a (q, p)-polynomial.

    Each monomial q^m p^n is replaced by the average over all orderings of m
    copies of substitution["q"] and n copies of substitution["p"].  Full
    symmetrization rather than McCoy recursion: degree <= 12 keeps the
    multiset-permutation count harmless.
    """
    q_op = substitution["q"]
    p_op = substitution["p"]
    if q_op.rep != rep or p_op.rep != rep:
        raise ValueError("substitution operators must live on the target rep")
    if poly.coeffs and poly.degree() > MAX_POLY_DEGREE:
        raise ValueError("polynomial degree exceeds the symmetrization guard")
    acc = np.zeros((rep.dim, rep.dim), dtype=complex)
    for (m, n), c in poly.coeffs.items():
        acc += c * _symmetrized_qp_product(q_op.entries, p_op.entries, m, n)
    return Operator(rep, acc)


def spectral_fn(
    op: Operator,
    f: Callable[[float], float],
    clamp_negative: bool = False,
) -> Operator:
    """Apply f to the eigenvalues of an operator diagonal in the number basis.

    The input must commute with the number operator to 1e-12, which for the
    nondegenerate truncated spectrum means it is already diagonal; off-diagonal
    leakage beyond the tolerance is rejected.  With ``clamp_negative`` set,
    negative arguments reaching a square root are mapped to 0 (the truncation
    boundary policy); otherwise a negative argument raises ``DomainError``
    naming the offending level.
    """
    m = op.entries
    off = m - np.diag(np.diag(m))
    if np.max(np.abs(off)) > 1e-12:
        raise ValueError("operator does not commute with the number operator (not diagonal)")
    diag = np.diag(m)
    if np.max(np.abs(diag.imag)) > 1e-12:
        raise ValueError("diagonal must be real to apply a spectral function")
    vals = []
    for level, x in enumerate(diag.real):
        try:
            vals.append(f(x))
        except ValueError as exc:
            # math.sqrt and friends signal negative arguments this way
            if clamp_negative:
                vals.append(0.0)
            else:
                raise DomainError(
                    f"spectral function rejected argument {x:.6g} at level n={level}"
                ) from exc
    return Operator(op.rep, np.diag(np.asarray(vals, dtype=complex)))


@dataclass(frozen=True)
class HBarFamily:
    """Deterministic rule hbar -> Operator on an hbar-indexed family of reps."""

    build: Callable[[float], Operator]

    def __call__(self, hbar: float) -> Operator:
        return self.build(hbar)


def grading_derivative(family, hbar0: float, rel_step: float = 1e-4) -> Operator:
    """Central-difference evaluation of gr = 2*hbar*d/d(hbar) at hbar0.

    gr F = 2*hbar0*(F(hbar0*(1+d)) - F(hbar0*(1-d))) / (2*hbar0*d); families
    homogeneous of grade k (coefficients ~ hbar^(k/2)) return k*F(hbar0) up to
    the finite-difference error.
    """
    up = family(hbar0 * (1.0 + rel_step))
    down = family(hbar0 * (1.0 - rel_step))
    if up.rep.dim != down.rep.dim:
        raise ValueError("family changes dimension across the hbar step")
    return Operator(up.rep, (up.entries - down.entries) / rel_step)
