"""Low-rank reconstruction of transition densities and symmetric kernels.

A reversible walk's transition density expands as
``p(x, y) = sum_l lambda_l f_l(x) pi(y) f_l(y)`` over the propagation
eigenfunctions ``f_l``, and the kernel itself as
``w(x, y) = Z * sum_l lambda_l (pi f_l)(x) (pi f_l)(y)`` -- recoverable only
up to the scale ``Z``.  For non-reversible walks the density expands in
singular triples as ``p(x, y) = sum_l sigma_l v_l(x) u_l(y) nu(y)``; the
kernel itself is not identifiable in that case.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from ._validation import midpoints
from .errors import RankError


@dataclass
class RankRModel:
    """Truncated spectral expansion ready for grid evaluation."""

    mode: str
    rank: int
    values: np.ndarray
    coefficients: np.ndarray
    basis: object
    stationary: Optional[object] = None
    y_density: Optional[object] = None
    left_coefficients: Optional[np.ndarray] = None
    normalization: float = 1.0


def symmetric_rank_r(spectral_model, stationary, rank, normalization=1.0):
    """Build a rank-``r`` model from a reversible-pipeline eigendecomposition.

    ``normalization`` is the kernel scale ``Z``: exact when the graphon is
    known (quadrature), otherwise not identifiable from data and left at the
    documented default of 1.
    """
    if spectral_model.mode != "eigen":
        raise ValueError("symmetric reconstruction requires an eigen-mode model")
    if rank < 1 or rank > spectral_model.n_components:
        raise RankError(f"rank must be in [1, {spectral_model.n_components}]")
    values = spectral_model.values[:rank]
    if np.iscomplexobj(values):
        if np.max(np.abs(values.imag)) > 1e-8:
            raise ValueError("leading eigenvalues are not real; data is not reversible")
        values = values.real
    return RankRModel(
        mode="symmetric-eigen",
        rank=rank,
        values=values.astype(float),
        coefficients=np.real(spectral_model.coefficients[:, :rank]),
        basis=spectral_model.basis,
        stationary=stationary,
        normalization=float(normalization),
    )


def asymmetric_rank_r(spectral_model, y_density, rank):
    """Build a rank-``r`` model from a singular decomposition."""
    if spectral_model.mode != "singular":
        raise ValueError("asymmetric reconstruction requires a singular-mode model")
    if rank < 1 or rank > spectral_model.n_components:
        raise RankError(f"rank must be in [1, {spectral_model.n_components}]")
    left = spectral_model.left_coefficients[:, :rank]
    if np.any(~np.isfinite(left)):
        raise RankError("left singular components below the rank cutoff were requested")
    return RankRModel(
        mode="asymmetric-svd",
        rank=rank,
        values=np.asarray(spectral_model.values[:rank], dtype=float),
        coefficients=spectral_model.coefficients[:, :rank],
        basis=spectral_model.basis,
        y_density=y_density,
        left_coefficients=left,
    )


def reconstruct_p_symmetric(model, grid_size=200):
    """Rank-``r`` transition density table on a midpoint grid.

    Truncation can produce negative values; they are reported, not clipped,
    since they are a useful diagnostic of a too-small rank.
    """
    if model.mode != "symmetric-eigen":
        raise ValueError("model is not a symmetric eigen expansion")
    grid = midpoints(grid_size)
    feats = model.basis.transform(grid) @ model.coefficients
    stat = np.asarray(model.stationary(grid), dtype=float)
    table = (feats * model.values[None, :]) @ (feats * stat[:, None]).T
    return table


def reconstruct_w(model, grid_size=200):
    """Rank-``r`` kernel table and the scale used.

    Returns ``(table, normalization)``; the kernel is only determined up to a
    positive factor, so the scale is exact only in quadrature mode.
    """
    if model.mode != "symmetric-eigen":
        raise ValueError("model is not a symmetric eigen expansion")
    grid = midpoints(grid_size)
    feats = model.basis.transform(grid) @ model.coefficients
    stat = np.asarray(model.stationary(grid), dtype=float)
    scaled = feats * stat[:, None]
    table = model.normalization * (scaled * model.values[None, :]) @ scaled.T
    return table, model.normalization


def reconstruct_p_asymmetric(model, grid_size=200):
    """Rank-``r`` transition density table from singular triples."""
    if model.mode != "asymmetric-svd":
        raise ValueError("model is not a singular-value expansion")
    grid = midpoints(grid_size)
    phi = model.basis.transform(grid)
    right = phi @ model.coefficients
    left = phi @ model.left_coefficients
    nu = np.asarray(model.y_density(grid), dtype=float)
    table = (right * model.values[None, :]) @ (left * nu[:, None]).T
    return table


def reconstruct_p(model, grid_size=200):
    """Dispatch to the symmetric or asymmetric density reconstruction."""
    if model.mode == "symmetric-eigen":
        return reconstruct_p_symmetric(model, grid_size=grid_size)
    return reconstruct_p_asymmetric(model, grid_size=grid_size)


@dataclass
class RowNormalizationReport:
    """Per-row deviation of the reconstructed density from unit mass."""

    deviations: np.ndarray
    max_deviation: float
    mean_deviation: float


def row_normalization_report(table):
    """How far each row of a density table is from integrating to one."""
    table = np.asarray(table, dtype=float)
    deviations = np.abs(table.mean(axis=1) - 1.0)
    return RowNormalizationReport(
        deviations=deviations,
        max_deviation=float(deviations.max()),
        mean_deviation=float(deviations.mean()),
    )


def negativity_report(table):
    """Summary of negative values produced by rank truncation."""
    table = np.asarray(table, dtype=float)
    negative = table < 0
    return {
        "min_value": float(table.min()),
        "fraction_negative": float(negative.mean()),
        "negative_mass": float(-table[negative].sum() / table.size) if negative.any() else 0.0,
    }
