"""scikit-learn style estimators for the full data-driven pipeline.

``TransferOperatorEDMD`` learns projected transfer operators from a
trajectory (or snapshot pairs) and exposes their spectral decomposition;
``GraphonSpectralClustering`` stacks gap detection, spectral embedding,
k-means, and transition counting on top of it.
"""

import numpy as np
from sklearn.base import BaseEstimator, ClusterMixin, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import check_trajectory, check_unit_interval
from .clustering import cluster_transitions, detect_gap, embed, kmeans
from .dictionaries import GaussianBasis
from .errors import ConfigError
from .operators import (
    eigendecompose,
    empirical_covariances,
    galerkin_matrices,
    kde_density,
    singular_decompose,
)
from .sampling import PairedData, Trajectory, pairs


def _resolve_input(X, y):
    """Accept a Trajectory, a 1-D state sequence, or explicit (x, y) pairs."""
    periodic = False
    if isinstance(X, Trajectory):
        periodic = X.periodic
        X = X.states
    if isinstance(X, PairedData):
        return X, periodic
    if y is not None:
        return (
            PairedData(x=check_unit_interval(X, "x samples"), y=check_unit_interval(y, "y samples")),
            periodic,
        )
    states = check_trajectory(X)
    return PairedData(x=states[:-1], y=states[1:]), periodic


class TransferOperatorEDMD(BaseEstimator, TransformerMixin):
    """Galerkin estimation of transfer operators from snapshot data.

    Parameters
    ----------
    basis : transformer, optional
        Feature map; defaults to 20 Gaussians of bandwidth 0.05 (periodic when
        the input trajectory is flagged periodic).
    pipeline : {"symmetric", "asymmetric"}
        ``"symmetric"`` assumes a reversible process and eigendecomposes the
        projected propagation operator; ``"asymmetric"`` computes singular
        triples through the forward-backward operator.
    symmetrize : bool
        Append reversed pairs before estimating covariances.  Only valid with
        the symmetric pipeline.
    regularization : "auto" or float
        Diagonal shift used in the covariance solves.
    r_max : int, optional
        Number of spectral components kept (all, by default).
    density_bandwidth : "auto" or float
        Bandwidth of the kernel density estimates attached to the model.

    Attributes
    ----------
    spectral_model_ : SpectralModel
    eigenvalues_ : eigenvalues of the projected propagation operator
        (symmetric pipeline, or reported alongside the singular values).
    singular_values_ : singular values (asymmetric pipeline only).
    """

    def __init__(
        self,
        basis=None,
        pipeline="symmetric",
        symmetrize=False,
        regularization="auto",
        r_max=None,
        density_bandwidth="auto",
    ):
        self.basis = basis
        self.pipeline = pipeline
        self.symmetrize = symmetrize
        self.regularization = regularization
        self.r_max = r_max
        self.density_bandwidth = density_bandwidth

    def _make_basis(self, periodic):
        if self.basis is not None:
            return self.basis
        return GaussianBasis(n=20, bandwidth=0.05, periodic=periodic)

    def fit(self, X, y=None):
        """Estimate operators from a trajectory or from (x, y) snapshot pairs."""
        if self.pipeline not in ("symmetric", "asymmetric"):
            raise ConfigError(f"unknown pipeline {self.pipeline!r}")
        if self.symmetrize and self.pipeline != "symmetric":
            raise ConfigError("symmetrize is only valid with the symmetric pipeline")
        pair_data, periodic = _resolve_input(X, y)
        self.periodic_ = periodic
        self.forward_pairs_ = pair_data
        if self.symmetrize:
            pair_data = PairedData(
                x=np.concatenate([pair_data.x, pair_data.y]),
                y=np.concatenate([pair_data.y, pair_data.x]),
            )
        self.pairs_ = pair_data
        self.basis_ = self._make_basis(periodic)
        self.covariances_ = empirical_covariances(self.basis_, pair_data)
        self.operators_ = galerkin_matrices(self.covariances_, self.regularization)
        if self.pipeline == "symmetric":
            self.spectral_model_ = eigendecompose(
                self.operators_, which="koopman", r_max=self.r_max
            )
            self.eigenvalues_ = self.spectral_model_.values
            stationary = kde_density(
                pair_data.x, bandwidth=self.density_bandwidth, periodic=periodic
            )
            self.spectral_model_.densities["stationary"] = stationary
            self.stationary_density_ = stationary
        else:
            self.spectral_model_ = singular_decompose(self.operators_, r_max=self.r_max)
            self.singular_values_ = self.spectral_model_.values
            # complex eigenvalues of the raw propagation matrix are reported
            # for inspection but never drive the clustering
            self.eigenvalues_ = eigendecompose(
                self.operators_, which="koopman", r_max=self.r_max
            ).values
            x_density = kde_density(
                pair_data.x, bandwidth=self.density_bandwidth, periodic=periodic
            )
            y_density = kde_density(
                pair_data.y, bandwidth=self.density_bandwidth, periodic=periodic
            )
            self.spectral_model_.densities["x"] = x_density
            self.spectral_model_.densities["y"] = y_density
            self.x_density_ = x_density
            self.y_density_ = y_density
        self.n_features_in_ = 1
        return self

    def transform(self, X):
        """Values of the dominant spectral functions at new points."""
        check_is_fitted(self, "spectral_model_")
        pts = check_unit_interval(X, "points")
        values = self.spectral_model_.evaluate(pts)
        return values.real if np.iscomplexobj(values) else values

    def spectral_values(self):
        """Real spectral magnitudes used for gap detection."""
        check_is_fitted(self, "spectral_model_")
        if self.pipeline == "symmetric":
            return np.real(self.eigenvalues_).astype(float)
        return np.asarray(self.singular_values_, dtype=float)


class GraphonSpectralClustering(BaseEstimator, ClusterMixin):
    """Spectral clustering of a stochastic signal on [0, 1].

    Fits transfer operators to the trajectory, picks the cluster count at the
    largest spectral gap (unless fixed), embeds the trajectory points in the
    dominant spectral functions, and partitions them with restarted k-means.

    Attributes
    ----------
    labels_ : cluster label of every pair-starting point of the trajectory
    n_clusters_ : detected or requested cluster count
    transition_matrix_ : row-stochastic matrix of empirical cluster transitions
    boundaries_ : interval cut points on [0, 1] (None when clusters are not
        contiguous)
    """

    def __init__(
        self,
        basis=None,
        pipeline="symmetric",
        symmetrize=False,
        n_clusters="auto",
        r_max=10,
        regularization="auto",
        random_state=0,
        kmeans_restarts=10,
        density_bandwidth="auto",
    ):
        self.basis = basis
        self.pipeline = pipeline
        self.symmetrize = symmetrize
        self.n_clusters = n_clusters
        self.r_max = r_max
        self.regularization = regularization
        self.random_state = random_state
        self.kmeans_restarts = kmeans_restarts
        self.density_bandwidth = density_bandwidth

    def fit(self, X, y=None):
        edmd = TransferOperatorEDMD(
            basis=self.basis,
            pipeline=self.pipeline,
            symmetrize=self.symmetrize,
            regularization=self.regularization,
            density_bandwidth=self.density_bandwidth,
        ).fit(X, y)
        self.edmd_ = edmd
        values = edmd.spectral_values()
        self.gap_ = detect_gap(values, r_max=self.r_max)
        if self.n_clusters == "auto":
            r = self.gap_.n_clusters
        else:
            r = int(self.n_clusters)
        points = edmd.forward_pairs_.x
        embedding = embed(edmd.spectral_model_, points, r)
        self.embedding_ = embedding
        model = kmeans(
            embedding,
            r,
            seed=self.random_state,
            restarts=self.kmeans_restarts,
            periodic=edmd.periodic_,
        )
        self.cluster_model_ = model
        self.labels_ = model.labels
        self.n_clusters_ = r
        self.cluster_centers_ = model.centers
        self.boundaries_ = model.boundaries
        self.inertia_ = model.inertia
        # transitions are always counted on the forward pairs, even when the
        # covariances were symmetrized
        self.transition_matrix_ = cluster_transitions(model, edmd.forward_pairs_)
        return self

    def predict(self, X):
        """Cluster labels for new points on [0, 1]."""
        check_is_fitted(self, "cluster_model_")
        pts = check_unit_interval(X, "points")
        return self.cluster_model_.assign(pts)

    def transform(self, X):
        """Spectral embedding coordinates for new points."""
        check_is_fitted(self, "cluster_model_")
        pts = check_unit_interval(X, "points")
        return embed(self.edmd_.spectral_model_, pts, self.n_clusters_).matrix
