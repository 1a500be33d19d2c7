"""Chart-based exterior calculus for the shipped contact models.

Everything is evaluated pointwise in a single coordinate chart: contact forms,
Reeb vectors, Levi pairings, musical maps, symplectic coframes, the
structure-equation residual and the first-order Levi-compatible connection
solve.  Fields carry analytic derivative rules wherever a model can supply
them; central finite differences (step ``chart.h``) are the fallback and the
cross-check path.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

__all__ = [
    "Chart",
    "ChartField",
    "Coframe",
    "exterior_derivative",
    "wedge",
    "interior",
    "lie_derivative",
    "reeb_vector",
    "sharp",
    "flat",
    "structure_residual",
    "levi_connection_solve",
    "rescale_decompose",
]


class DegenerateContactForm(ValueError):
    """The linear system defining the Reeb vector is singular."""


class NotInDistribution(ValueError):
    """Musical-map input violates its annihilation precondition."""


class InconsistentFrame(ValueError):
    """The Levi connection solve failed its verification."""


@dataclass(frozen=True)
class Chart:
    names: Tuple[str, ...]
    domain: Callable[[np.ndarray], bool] = lambda p: True
    h: float = 1e-5

    @property
    def dim(self) -> int:
        return len(self.names)

    def check(self, point: np.ndarray):
        point = np.asarray(point, dtype=float)
        if point.shape != (self.dim,):
            raise ValueError(f"point has shape {point.shape}, chart dim is {self.dim}")
        if not self.domain(point):
            raise ValueError(f"point {point} outside chart domain")
        return point


@dataclass
class ChartField:
    """Scalar / 1-form / 2-form / vector field over a chart.

    ``evaluate`` maps a point to coefficients: a float for scalars, shape
    (dim,) for 1-forms and vectors, an antisymmetric (dim, dim) array for
    2-forms.  ``partials`` (optional) returns all coordinate derivatives of
    those coefficients, indexed as partials[i] = d(coefficients)/dx^i.
    """

    chart: Chart
    rank: str
    evaluate: Callable[[np.ndarray], np.ndarray]
    partials: Optional[Callable[[np.ndarray], np.ndarray]] = None
    name: str = ""

    def __post_init__(self):
        if self.rank not in ("scalar", "1-form", "2-form", "vector"):
            raise ValueError(f"unknown rank {self.rank!r}")

    def __call__(self, point) -> np.ndarray:
        point = self.chart.check(point)
        out = self.evaluate(point)
        return np.asarray(out, dtype=float) if self.rank != "scalar" else float(out)

    def partials_at(self, point) -> np.ndarray:
        """partials[i, ...] = d/dx^i of the coefficient array (FD fallback)."""
        point = self.chart.check(point)
        if self.partials is not None:
            return np.asarray(self.partials(point), dtype=float)
        h = self.chart.h
        rows = []
        for i in range(self.chart.dim):
            step = np.zeros(self.chart.dim)
            step[i] = h
            up = np.asarray(self.evaluate(point + step), dtype=float)
            dn = np.asarray(self.evaluate(point - step), dtype=float)
            rows.append((up - dn) / (2 * h))
        return np.stack(rows)


def constant_field(chart: Chart, rank: str, value, name: str = "") -> ChartField:
    arr = np.asarray(value, dtype=float)
    zeros = np.zeros((chart.dim,) + arr.shape)
    return ChartField(chart, rank, lambda p: arr, partials=lambda p: zeros, name=name)


def exterior_derivative(fld: ChartField, point) -> np.ndarray:
    """Coefficients of d(field) at a point.

    Scalars give 1-forms (gradient); 1-forms give antisymmetrized 2-forms
    (d omega)_ij = d_i omega_j - d_j omega_i.
    """
    if fld.rank == "scalar":
        return fld.partials_at(point)
    if fld.rank == "1-form":
        jac = fld.partials_at(point)  # jac[i, j] = d_i omega_j
        return jac - jac.T
    raise ValueError(f"exterior derivative not defined for rank {fld.rank!r}")


def wedge(a: ChartField, b: ChartField, point) -> np.ndarray:
    av, bv = a(point), b(point)
    if a.rank == "1-form" and b.rank == "1-form":
        return np.outer(av, bv) - np.outer(bv, av)
    if a.rank == "scalar":
        return av * bv
    if b.rank == "scalar":
        return bv * av
    raise ValueError(f"wedge of {a.rank} with {b.rank} unsupported")


def interior(v: ChartField, omega: ChartField, point) -> np.ndarray:
    """Interior product iota_v omega at a point."""
    vv = v(point)
    ov = omega(point)
    if omega.rank == "1-form":
        return float(ov @ vv)
    if omega.rank == "2-form":
        return vv @ ov  # (iota_v omega)_j = v^i omega_ij
    raise ValueError(f"interior product into rank {omega.rank!r} unsupported")


def lie_derivative(v: ChartField, fld: ChartField, point) -> np.ndarray:
    """Cartan formula L_v = iota_v d + d iota_v on scalars and 1-forms."""
    point = fld.chart.check(point)
    if fld.rank == "scalar":
        return float(fld.partials_at(point) @ v(point))
    if fld.rank == "1-form":
        two = exterior_derivative(fld, point)
        first = v(point) @ two
        contraction = ChartField(
            fld.chart,
            "scalar",
            lambda p: float(np.asarray(fld.evaluate(p)) @ np.asarray(v.evaluate(p))),
        )
        second = exterior_derivative(contraction, point)
        return first + second
    raise ValueError(f"Lie derivative of rank {fld.rank!r} unsupported")


def reeb_vector(alpha: ChartField, point, use_fd: bool = False) -> np.ndarray:
    """Unique solution of alpha(rho) = 1, iota_rho d(alpha) = 0.

    Solves the stacked (dim+1) x dim linear system [d(alpha); alpha] rho =
    [0; 1] by least squares and rejects singular systems.
    """
    point = alpha.chart.check(point)
    if use_fd:
        save = alpha.partials
        alpha.partials = None
        try:
            dalpha = exterior_derivative(alpha, point)
        finally:
            alpha.partials = save
    else:
        dalpha = exterior_derivative(alpha, point)
    av = alpha(point)
    sys = np.vstack([dalpha.T, av])  # rows: (d alpha)_{.j} contraction, then alpha
    rhs = np.zeros(alpha.chart.dim + 1)
    rhs[-1] = 1.0
    sol, _, rank, sv = np.linalg.lstsq(sys, rhs, rcond=None)
    if rank < alpha.chart.dim or sv[0] / sv[-1] > 1e12:
        raise DegenerateContactForm("Reeb system is singular at this point")
    resid = sys @ sol - rhs
    if np.max(np.abs(resid)) > 1e-8:
        raise DegenerateContactForm(
            f"Reeb system inconsistent (residual {np.max(np.abs(resid)):.2e})"
        )
    return sol


def flat(v: np.ndarray, alpha: ChartField, point) -> np.ndarray:
    """v-flat = phi(v, .) for a distribution vector v (alpha(v) = 0)."""
    point = alpha.chart.check(point)
    av = alpha(point)
    if abs(av @ v) > 1e-8 * max(1.0, np.linalg.norm(v)):
        raise NotInDistribution("flat input does not lie in the distribution")
    phi = exterior_derivative(alpha, point)
    return v @ phi


def sharp(omega: np.ndarray, alpha: ChartField, point) -> np.ndarray:
    """Solve phi(v, .) = omega for v in the distribution.

    The covector must annihilate the Reeb vector (it lies in ker iota_rho).
    """
    point = alpha.chart.check(point)
    rho = reeb_vector(alpha, point)
    scale = max(1.0, float(np.linalg.norm(omega)))
    if abs(omega @ rho) > 1e-8 * scale:
        raise NotInDistribution("sharp input does not annihilate the Reeb vector")
    phi = exterior_derivative(alpha, point)
    av = alpha(point)
    sys = np.vstack([phi.T, av])  # v^i phi_ij = omega_j and alpha(v) = 0
    rhs = np.concatenate([omega, [0.0]])
    sol, _, _, _ = np.linalg.lstsq(sys, rhs, rcond=None)
    resid = sys @ sol - rhs
    if np.max(np.abs(resid)) > 1e-7 * scale:
        raise NotInDistribution(
            f"sharp solve inconsistent (residual {np.max(np.abs(resid)):.2e})"
        )
    return sol


@dataclass
class Coframe:
    """2n pointwise independent 1-forms with a constant symplectic pairing j."""

    forms: List[ChartField]
    j: np.ndarray

    def __post_init__(self):
        j = np.asarray(self.j, dtype=float)
        n2 = len(self.forms)
        if j.shape != (n2, n2) or np.max(np.abs(j + j.T)) > 1e-12:
            raise ValueError("j must be antisymmetric of matching size")
        if abs(abs(np.linalg.det(j)) - 1.0) > 1e-10:
            raise ValueError("|det j| must equal 1")
        self.j = j

    def matrix(self, point) -> np.ndarray:
        """Rows are the coframe coefficient covectors at the point."""
        return np.stack([e(point) for e in self.forms])

    def rank_ok(self, point) -> bool:
        m = self.matrix(point)
        return np.linalg.matrix_rank(m, tol=1e-10) == len(self.forms)

    def dual_vectors(self, alpha: ChartField, point) -> np.ndarray:
        """Distribution vectors u_a with e^b(u_a) = delta and alpha(u_a) = 0."""
        m = self.matrix(point)
        av = alpha(point)
        sys = np.vstack([m, av])
        outs = []
        for a in range(len(self.forms)):
            rhs = np.zeros(len(self.forms) + 1)
            rhs[a] = 1.0
            sol, _, _, _ = np.linalg.lstsq(sys, rhs, rcond=None)
            if np.max(np.abs(sys @ sol - rhs)) > 1e-8:
                raise InconsistentFrame("coframe duals inconsistent with alpha")
            outs.append(sol)
        return np.stack(outs)


def structure_residual(coframe: Coframe, alpha: ChartField, sample_points) -> float:
    """max-abs residual of d(alpha) = (1/2) j_ab e^a wedge e^b over samples."""
    worst = 0.0
    for point in sample_points:
        dalpha = exterior_derivative(alpha, point)
        acc = np.zeros_like(dalpha)
        coeffs = coframe.matrix(point)
        for a in range(len(coframe.forms)):
            for b in range(len(coframe.forms)):
                if coframe.j[a, b] != 0.0:
                    outer = np.outer(coeffs[a], coeffs[b])
                    acc += 0.5 * coframe.j[a, b] * (outer - outer.T)
        worst = max(worst, float(np.max(np.abs(dalpha - acc))))
    return worst


def _two_form_basis(coframe: Coframe, alpha: ChartField, point):
    """Basis 2-forms {alpha ^ e_b} and {e_b ^ e_c (b < c)} with e_b = j_bc e^c."""
    n2 = len(coframe.forms)
    coeffs = coframe.matrix(point)
    av = alpha(point)
    lowered = coframe.j @ coeffs  # rows e_b
    basis = []
    tags = []
    for b in range(n2):
        basis.append(np.outer(av, lowered[b]) - np.outer(lowered[b], av))
        tags.append(("alpha", b))
    for b in range(n2):
        for c in range(b + 1, n2):
            basis.append(np.outer(lowered[b], lowered[c]) - np.outer(lowered[c], lowered[b]))
            tags.append(("ee", b, c))
    return basis, tags, lowered


@dataclass
class LeviConnection:
    """Output of the first-order connection solve.

    ``w_upper[a, b]`` are the symmetric 1-form coefficients of omega^{ab};
    ``mixed[a, b]`` is omega^a_b = omega^{ac} j_cb, the matrix entering
    d e^a + omega^a_b ^ e^b = 0.  Both are (2n, 2n, dim) arrays of covector
    coefficients at the solve point.
    """

    w_upper: np.ndarray
    mixed: np.ndarray
    residual: float


def levi_connection_solve(coframe: Coframe, alpha: ChartField, point) -> LeviConnection:
    """First-order solve of d^omega e^a = 0 for a Levi-compatible connection.

    Expands -d e^a in the basis {alpha ^ e_b, e_b ^ e_c}, then solves the
    symmetric-coefficient system (minimum-norm in the residual gauge freedom)
    and verifies the reconstruction before returning.
    """
    point = alpha.chart.check(point)
    if structure_residual(coframe, alpha, [point]) > 1e-6:
        raise InconsistentFrame("coframe fails the structure equation at this point")
    n2 = len(coframe.forms)
    dim = alpha.chart.dim
    basis, tags, lowered = _two_form_basis(coframe, alpha, point)
    bmat = np.stack([b[np.triu_indices(dim, 1)] for b in basis], axis=1)

    tau_ab = np.zeros((n2, n2))
    tau_abc = np.zeros((n2, n2, n2))
    for a in range(n2):
        de = exterior_derivative(coframe.forms[a], point)
        rhs = (-de)[np.triu_indices(dim, 1)]
        sol, res, rank, _ = np.linalg.lstsq(bmat, rhs, rcond=None)
        recon = bmat @ sol
        if np.max(np.abs(recon - rhs)) > 1e-8:
            raise InconsistentFrame(
                "-d e^a does not lie in the span of {alpha^e_b, e_b^e_c}"
            )
        for coeff, tag in zip(sol, tags):
            if tag[0] == "alpha":
                tau_ab[a, tag[1]] = coeff
            else:
                _, b, c = tag
                tau_abc[a, b, c] = coeff / 2.0
                tau_abc[a, c, b] = -coeff / 2.0
    if np.max(np.abs(tau_ab - tau_ab.T)) > 1e-8:
        raise InconsistentFrame("alpha-part tau^{ab} is not symmetric")

    # w^{ab} = tau^{ab}; solve w^{abc} = w^{bac} with (w^{abc}-w^{acb})/2 = -tau^{abc}
    # (the sign is fixed by the d^omega e = 0 verification below).
    pairs = [(a, b) for a in range(n2) for b in range(a, n2)]
    pair_index = {}
    for k, (a, b) in enumerate(pairs):
        pair_index[(a, b)] = k
        pair_index[(b, a)] = k
    nvar = len(pairs) * n2
    rows = []
    rhs_rows = []
    for a in range(n2):
        for b in range(n2):
            for c in range(b + 1, n2):
                row = np.zeros(nvar)
                row[pair_index[(a, b)] * n2 + c] += 0.5
                row[pair_index[(a, c)] * n2 + b] -= 0.5
                rows.append(row)
                rhs_rows.append(-tau_abc[a, b, c])
    sol, _, _, _ = np.linalg.lstsq(np.stack(rows), np.asarray(rhs_rows), rcond=None)
    w_abc = np.zeros((n2, n2, n2))
    for (a, b), k in list(pair_index.items()):
        w_abc[a, b, :] = sol[k * n2 : (k + 1) * n2]

    av = alpha(point)
    w_upper = np.zeros((n2, n2, dim))
    for a in range(n2):
        for b in range(n2):
            w_upper[a, b] = tau_ab[a, b] * av
            for c in range(n2):
                w_upper[a, b] += w_abc[a, b, c] * lowered[c]
    mixed = np.einsum("acd,cb->abd", w_upper, coframe.j)

    coeffs = coframe.matrix(point)
    worst = 0.0
    for a in range(n2):
        de = exterior_derivative(coframe.forms[a], point)
        acc = de.copy()
        for b in range(n2):
            acc += np.outer(mixed[a, b], coeffs[b]) - np.outer(coeffs[b], mixed[a, b])
        worst = max(worst, float(np.max(np.abs(acc))))
    if worst > 1e-8:
        raise InconsistentFrame(f"d^omega e^a residual {worst:.2e} exceeds 1e-8")
    return LeviConnection(w_upper=w_upper, mixed=mixed, residual=worst)


def rescale_decompose(
    omega_field: ChartField, alpha: ChartField, point
) -> Tuple[np.ndarray, float]:
    """Split d log(Omega) = Upsilon + chi * alpha with Upsilon(rho) = 0.

    Returns (Upsilon coefficients, chi).
    """
    point = alpha.chart.check(point)
    val = omega_field(point)
    if val <= 0:
        raise ValueError("scale factor Omega must be positive")
    grad = omega_field.partials_at(point) / val  # d log Omega
    rho = reeb_vector(alpha, point)
    chi = float(grad @ rho)
    upsilon = grad - chi * alpha(point)
    if abs(upsilon @ rho) > 1e-10 * max(1.0, np.linalg.norm(upsilon)):
        raise InconsistentFrame("Upsilon fails to annihilate the Reeb vector")
    return upsilon, chi
