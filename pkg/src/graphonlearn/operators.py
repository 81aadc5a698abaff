"""Galerkin estimation of transfer operators and their spectral decompositions.

Covariance matrices are assembled either from snapshot pairs (data-driven) or
by quadrature against a known graphon.  The projected Koopman matrix is
``(C_xx)^-1 C_xy``, its adjoint ``(C_yy)^-1 C_yx`` propagates reweighted
densities, and their composition is the self-adjoint forward-backward matrix
whose eigenpairs yield the singular decomposition used for non-reversible
processes.
"""

import math
import warnings
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy.linalg

from ._validation import check_unit_interval, midpoints
from .errors import (
    ConvergenceError,
    DegeneracyError,
    RankError,
    SingularMatrixError,
    SymmetryError,
)
from .graphons import DEGREE_FLOOR

SYMMETRIC_PAIRING_RTOL = 1e-10
LEFT_COMPONENT_CUTOFF = 1e-12


@dataclass
class CovarianceSet:
    """Uncentered covariance and cross-covariance matrices of a feature map."""

    c_xx: np.ndarray
    c_xy: np.ndarray
    c_yy: np.ndarray
    c_yx: np.ndarray
    source: str
    basis: object = None
    n_samples: Optional[int] = None
    weight: Optional[str] = None

    @property
    def n_features(self):
        return self.c_xx.shape[0]

    def symmetric_pairing(self, rtol=SYMMETRIC_PAIRING_RTOL):
        """Whether the x/y roles are exchangeable (reversible-case structure)."""
        scale = np.linalg.norm(self.c_xy) + 1e-300
        return (
            np.linalg.norm(self.c_xy - self.c_xy.T) <= rtol * scale
            and np.linalg.norm(self.c_xx - self.c_yy) <= rtol * np.linalg.norm(self.c_xx)
        )


def empirical_covariances(basis, pair_data):
    """Monte Carlo covariance matrices from snapshot pairs.

    ``c_xx = mean_k phi(x_k) phi(x_k)^T`` and ``c_xy = mean_k phi(x_k)
    phi(y_k)^T``; ``c_yx`` is exactly the transpose of ``c_xy``.
    """
    px = basis.transform(pair_data.x)
    py = basis.transform(pair_data.y)
    m, n = px.shape
    if m < n:
        warnings.warn(
            f"only {m} pairs for {n} basis functions; covariances will be rank-deficient",
            stacklevel=2,
        )
    c_xx = px.T @ px / m
    c_yy = py.T @ py / m
    c_xy = px.T @ py / m
    c_xx = 0.5 * (c_xx + c_xx.T)
    c_yy = 0.5 * (c_yy + c_yy.T)
    return CovarianceSet(
        c_xx=c_xx,
        c_xy=c_xy,
        c_yy=c_yy,
        c_yx=c_xy.T.copy(),
        source="empirical",
        basis=basis,
        n_samples=m,
    )


def quadrature_covariances(graphon, basis, weight="stationary", grid_size=1000):
    """Covariance matrices by midpoint quadrature against a known graphon.

    All matrices are assembled on one shared midpoint grid with the discrete
    transition matrix normalized to exactly unit row sums, so the algebraic
    operator identities hold to solver precision.  ``weight="stationary"``
    uses the stationary density (symmetric graphons only); ``weight="uniform"``
    uses the Lebesgue reference density, with the image density as y-weight.
    """
    grid = midpoints(grid_size)
    w = np.asarray(graphon(grid[:, None], grid[None, :]), dtype=float)
    row_mass = w.sum(axis=1)
    degree = row_mass / grid_size
    if degree.min() <= DEGREE_FLOOR:
        raise DegeneracyError(
            f"out-degree lower bound {degree.min():.3e} <= {DEGREE_FLOOR} on the quadrature grid"
        )
    transition = w / row_mass[:, None]
    phi = basis.transform(grid)
    if weight == "stationary":
        if not graphon.symmetric:
            raise SymmetryError("stationary weight requires a symmetric graphon")
        weight_x = degree / degree.mean()
        weight_y = weight_x
    elif weight == "uniform":
        weight_x = np.ones(grid_size)
        weight_y = transition.sum(axis=0)
    else:
        raise ValueError(f"unknown weight {weight!r}")
    kphi = transition @ phi
    c_xx = phi.T @ (phi * weight_x[:, None]) / grid_size
    c_xy = phi.T @ (kphi * weight_x[:, None]) / grid_size
    c_yy = phi.T @ (phi * weight_y[:, None]) / grid_size
    c_xx = 0.5 * (c_xx + c_xx.T)
    c_yy = 0.5 * (c_yy + c_yy.T)
    return CovarianceSet(
        c_xx=c_xx,
        c_xy=c_xy,
        c_yy=c_yy,
        c_yx=c_xy.T.copy(),
        source="quadrature",
        basis=basis,
        weight=weight,
    )


@dataclass
class OperatorMatrices:
    """Galerkin matrices of the projected transfer operators."""

    koopman: np.ndarray
    reweighted_pf: np.ndarray
    forward_backward: np.ndarray
    regularization: float
    covariances: CovarianceSet


def _spd_solve(mat, rhs, label):
    try:
        factor = scipy.linalg.cho_factor(mat, check_finite=False)
    except scipy.linalg.LinAlgError as exc:
        raise SingularMatrixError(f"{label} is not positive definite: {exc}") from exc
    return scipy.linalg.cho_solve(factor, rhs, check_finite=False)


def galerkin_matrices(covariances, regularization="auto"):
    """Form the projected Koopman, adjoint, and forward-backward matrices.

    ``regularization="auto"`` adds ``1e-10 * trace(c_xx) / n`` to the
    diagonals before the symmetric positive-definite solves; pass ``0.0`` to
    disable (exact algebraic identities) or a float for manual control.
    """
    c = covariances
    n = c.n_features
    if regularization == "auto":
        eps = 1e-10 * float(np.trace(c.c_xx)) / n
    else:
        eps = float(regularization)
    eye = np.eye(n)
    koopman = _spd_solve(c.c_xx + eps * eye, c.c_xy, "c_xx + eps*I")
    reweighted = _spd_solve(c.c_yy + eps * eye, c.c_yx, "c_yy + eps*I")
    forward_backward = koopman @ reweighted
    return OperatorMatrices(
        koopman=koopman,
        reweighted_pf=reweighted,
        forward_backward=forward_backward,
        regularization=eps,
        covariances=c,
    )


@dataclass
class SpectralModel:
    """Dominant spectral components of a projected transfer operator.

    ``coefficients[:, l]`` expands the ``l``-th eigen- or right singular
    function in the basis; functions are normalized to unit empirical
    (``c_xx``-weighted) norm.  In singular mode ``left_coefficients`` expand
    the left singular functions and ``values`` holds the singular values.
    """

    mode: str
    values: np.ndarray
    coefficients: np.ndarray
    basis: object
    which: str = "koopman"
    left_coefficients: Optional[np.ndarray] = None
    fb_eigenvalues: Optional[np.ndarray] = None
    densities: dict = field(default_factory=dict)

    @property
    def n_components(self):
        return len(self.values)

    def evaluate(self, X, n_components=None):
        """Eigen/right-singular function values at ``X``; shape ``(m, r)``."""
        r = self.n_components if n_components is None else n_components
        phi = self.basis.transform(X)
        return phi @ self.coefficients[:, :r]

    def evaluate_left(self, X, n_components=None):
        if self.left_coefficients is None:
            raise RankError("left singular functions are only available in singular mode")
        r = self.left_coefficients.shape[1] if n_components is None else n_components
        phi = self.basis.transform(X)
        return phi @ self.left_coefficients[:, :r]

    def real_values(self):
        """Values as floats (real part for conjugate-paired eigenvalues)."""
        return np.real(self.values).astype(float)

    def to_payload(self, density_grid=1000):
        grid = midpoints(density_grid)
        densities = {
            name: {"grid_size": density_grid, "values": np.asarray(fn(grid)).tolist()}
            for name, fn in self.densities.items()
        }
        payload = {
            "mode": self.mode,
            "which": self.which,
            "values_real": np.real(self.values).tolist(),
            "values_imag": np.imag(self.values).tolist(),
            "coefficients_real": np.real(self.coefficients).tolist(),
            "coefficients_imag": np.imag(self.coefficients).tolist(),
            "basis": self.basis.descriptor(),
            "densities": densities,
        }
        if self.left_coefficients is not None:
            payload["left_coefficients"] = np.asarray(self.left_coefficients).tolist()
        if self.fb_eigenvalues is not None:
            payload["fb_eigenvalues"] = np.asarray(self.fb_eigenvalues).tolist()
        return payload

    @classmethod
    def from_payload(cls, payload):
        from .dictionaries import basis_from_descriptor

        values = np.asarray(payload["values_real"]) + 1j * np.asarray(payload["values_imag"])
        if np.max(np.abs(values.imag), initial=0.0) == 0.0:
            values = values.real
        coeff = np.asarray(payload["coefficients_real"]) + 1j * np.asarray(
            payload["coefficients_imag"]
        )
        if np.max(np.abs(coeff.imag), initial=0.0) == 0.0:
            coeff = coeff.real
        densities = {}
        for name, entry in payload.get("densities", {}).items():
            grid = midpoints(int(entry["grid_size"]))
            vals = np.asarray(entry["values"], dtype=float)
            densities[name] = _GridDensity(grid, vals)
        left = payload.get("left_coefficients")
        fb = payload.get("fb_eigenvalues")
        return cls(
            mode=payload["mode"],
            values=values,
            coefficients=coeff,
            basis=basis_from_descriptor(payload["basis"]),
            which=payload.get("which", "koopman"),
            left_coefficients=None if left is None else np.asarray(left, dtype=float),
            fb_eigenvalues=None if fb is None else np.asarray(fb, dtype=float),
            densities=densities,
        )


class _GridDensity:
    """Density reconstructed from stored grid samples by linear interpolation."""

    def __init__(self, grid, values):
        self.grid = grid
        self.values = values

    def __call__(self, x):
        return np.interp(np.asarray(x, dtype=float), self.grid, self.values)


def _normalize_columns(vectors, c_xx):
    """Scale columns to unit c_xx-weighted norm and fix their phase.

    The phase convention makes the largest-magnitude entry real and positive,
    which pins the otherwise arbitrary sign of eigenvectors.
    """
    vectors = np.array(vectors)
    for j in range(vectors.shape[1]):
        v = vectors[:, j]
        norm = np.sqrt(np.real(np.conj(v) @ c_xx @ v))
        if norm > 0:
            v = v / norm
        i = int(np.argmax(np.abs(v)))
        pivot = v[i]
        if np.abs(pivot) > 0:
            if np.iscomplexobj(vectors):
                v = v * (np.conj(pivot) / np.abs(pivot))
            elif pivot < 0:
                v = -v
        vectors[:, j] = v
    return vectors


def _matrix_for(om, which):
    matrices = {
        "koopman": om.koopman,
        "reweighted_pf": om.reweighted_pf,
        "forward_backward": om.forward_backward,
        "K": om.koopman,
        "T": om.reweighted_pf,
        "F": om.forward_backward,
    }
    try:
        return matrices[which]
    except KeyError:
        raise ValueError(f"unknown operator selector {which!r}") from None


def eigendecompose(om, which="koopman", r_max=None):
    """Dominant eigenpairs of a projected operator matrix.

    Eigenvalues are sorted by non-increasing real part (conjugate pairs stay
    adjacent); eigenvectors have unit empirical norm with the sign convention
    of :func:`_normalize_columns`.  When the covariance structure is
    reversible the symmetric-definite generalized solver is used, which
    guarantees a real spectrum and exactly ``c_xx``-orthogonal eigenvectors.
    """
    c = om.covariances
    n = c.n_features
    r = n if r_max is None else min(r_max, n)
    eye = np.eye(n)
    forward_backward = which in ("forward_backward", "F")
    symmetric = which in ("koopman", "K", "reweighted_pf", "T") and c.symmetric_pairing()
    try:
        if forward_backward:
            # c_xx @ F is symmetric PSD by construction, so the generalized
            # symmetric-definite solver applies regardless of the data.
            inner = _spd_solve(c.c_yy + om.regularization * eye, c.c_yx, "c_yy + eps*I")
            a = c.c_xy @ inner
            a = 0.5 * (a + a.T)
            b = c.c_xx + om.regularization * eye
            vals, vecs = scipy.linalg.eigh(a, b, check_finite=False)
            vals = vals[::-1]
            vecs = vecs[:, ::-1]
        elif symmetric:
            a = 0.5 * (c.c_xy + c.c_xy.T)
            b = c.c_xx + om.regularization * eye
            vals, vecs = scipy.linalg.eigh(a, b, check_finite=False)
            vals = vals[::-1]
            vecs = vecs[:, ::-1]
        else:
            mat = _matrix_for(om, which)
            vals, vecs = scipy.linalg.eig(mat, check_finite=False)
            order = np.lexsort((-vals.imag, -vals.real))
            vals = vals[order]
            vecs = vecs[:, order]
    except scipy.linalg.LinAlgError as exc:
        raise ConvergenceError(f"eigensolver failed: {exc}") from exc
    if r < n and np.iscomplexobj(vals):
        # do not split a conjugate pair at the truncation point
        if abs(vals[r - 1].imag) > 0 and np.isclose(vals[r - 1], np.conj(vals[r])):
            r += 1
    vals = vals[:r]
    vecs = _normalize_columns(vecs[:, :r], c.c_xx)
    return SpectralModel(
        mode="eigen",
        values=vals,
        coefficients=vecs,
        basis=c.basis,
        which={"K": "koopman", "T": "reweighted_pf", "F": "forward_backward"}.get(which, which),
    )


def singular_decompose(om, r_max=None):
    """Singular triples of the reweighted density-propagation operator.

    Computed from the forward-backward matrix: its eigenvalues are the squared
    singular values, its eigenvectors the right singular coefficient vectors,
    and the left coefficient vectors follow by applying the adjoint matrix and
    rescaling.  Negative eigenvalues (sampling noise) are clamped to zero with
    a warning; left components are only formed above a rank cutoff.
    """
    c = om.covariances
    n = c.n_features
    r = n if r_max is None else min(r_max, n)
    eye = np.eye(n)
    inner = _spd_solve(c.c_yy + om.regularization * eye, c.c_yx, "c_yy + eps*I")
    a = c.c_xy @ inner
    a = 0.5 * (a + a.T)
    b = c.c_xx + om.regularization * eye
    try:
        vals, vecs = scipy.linalg.eigh(a, b, check_finite=False)
    except scipy.linalg.LinAlgError as exc:
        raise ConvergenceError(f"eigensolver failed: {exc}") from exc
    vals = vals[::-1][:r]
    vecs = vecs[:, ::-1][:, :r]
    if r_max is not None and np.any(vals < LEFT_COMPONENT_CUTOFF):
        bad = int(np.argmax(vals < LEFT_COMPONENT_CUTOFF)) + 1
        raise RankError(
            f"component {bad} has squared singular value {vals[bad - 1]:.3e} below "
            f"{LEFT_COMPONENT_CUTOFF}; request fewer components"
        )
    if np.any(vals < 0):
        floor = float(vals.min())
        if floor < -1e-10:
            warnings.warn(
                f"negative forward-backward eigenvalues down to {floor:.3e} clamped to zero",
                stacklevel=2,
            )
        vals = np.maximum(vals, 0.0)
    vecs = _normalize_columns(vecs, c.c_xx)
    sigma = np.sqrt(vals)
    left = np.full((n, r), np.nan)
    usable = vals >= LEFT_COMPONENT_CUTOFF
    if np.any(usable):
        left[:, usable] = (om.reweighted_pf @ vecs[:, usable]) / sigma[usable]
    return SpectralModel(
        mode="singular",
        values=sigma,
        coefficients=vecs,
        basis=c.basis,
        which="reweighted_pf",
        left_coefficients=left,
        fb_eigenvalues=vals,
    )


# -- density estimation ------------------------------------------------------


@dataclass
class KernelDensityEstimate:
    """Gaussian-kernel density on [0, 1] with boundary correction.

    Boundary bias is removed by reflecting the sample about both endpoints
    (or by wrapping, for angular data living on the circle).
    """

    samples: np.ndarray
    bandwidth: float
    periodic: bool = False

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        flat = np.atleast_1d(x).reshape(-1)
        out = np.empty(flat.size)
        h = self.bandwidth
        m = self.samples.size
        chunk = max(1, int(2e6 // max(m, 1)))
        for start in range(0, flat.size, chunk):
            pts = flat[start : start + chunk, None]
            if self.periodic:
                d = pts - self.samples[None, :]
                d = d - np.round(d)
                z2 = (d / h) ** 2
                dens = np.exp(-0.5 * z2).sum(axis=1)
            else:
                z0 = (pts - self.samples[None, :]) / h
                z1 = (pts + self.samples[None, :]) / h
                z2 = (pts - (2.0 - self.samples[None, :])) / h
                dens = (
                    np.exp(-0.5 * z0**2) + np.exp(-0.5 * z1**2) + np.exp(-0.5 * z2**2)
                ).sum(axis=1)
            out[start : start + chunk] = dens / (m * h * math.sqrt(2.0 * math.pi))
        return out.reshape(x.shape) if x.ndim else float(out[0])


def kde_density(samples, bandwidth="auto", periodic=False):
    """Kernel density estimate of samples on [0, 1].

    ``bandwidth="auto"`` applies the ``1.06 * s * m^(-1/5)`` rule with ``s``
    the sample standard deviation; a floor of ``1e-3`` guards against
    degenerate input.
    """
    samples = check_unit_interval(samples, name="samples")
    if samples.size < 10:
        raise ValueError("kernel density estimation needs at least 10 samples")
    if bandwidth == "auto":
        s = float(np.std(samples, ddof=1))
        h = 1.06 * s * samples.size ** (-0.2)
        if h < 1e-3:
            warnings.warn(
                f"computed bandwidth {h:.2e} below floor; using 1e-3", stacklevel=2
            )
            h = 1e-3
    else:
        h = float(bandwidth)
        if h <= 0:
            raise ValueError("bandwidth must be positive")
    return KernelDensityEstimate(samples=samples, bandwidth=h, periodic=periodic)


def pf_eigenfunctions(model, stationary):
    """Density-propagation eigenfunctions: the eigenfunctions scaled by the
    stationary density.

    Returns one callable per spectral component.
    """
    if model.mode != "eigen":
        raise ValueError("density-propagation eigenfunctions require eigen mode")

    def make(idx):
        def fn(x):
            vals = model.evaluate(x)[..., idx]
            return np.real(vals) * stationary(x)

        return fn

    return [make(i) for i in range(model.n_components)]


def laplacian_spectrum(model):
    """Spectrum of the random-walk normalized Laplacian, ``1 - lambda``.

    Eigenfunctions coincide with the propagation-operator eigenfunctions, so
    clustering on either spectrum yields the same partition.
    """
    if model.mode != "eigen":
        raise ValueError("laplacian spectrum requires eigen mode")
    return 1.0 - model.values
