"""Basis-function families for Galerkin projection of transfer operators.

Two families are provided: indicator functions on an equipartition (yielding
the classical cell-counting method) and Gaussian bumps at evenly spaced
centers.  Both are stateless sklearn-style transformers mapping samples in
[0, 1] to feature rows.
"""

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from ._validation import check_unit_interval
from .errors import ConfigError


class IndicatorBasis(BaseEstimator, TransformerMixin):
    """Indicator functions of the equipartition of [0, 1] into ``n`` cells.

    Cell ``i`` is ``[i/n, (i+1)/n)``, the last cell closed at 1.  Feature
    rows are one-hot, so the all-ones coefficient vector represents the
    constant function exactly.
    """

    def __init__(self, n=100):
        self.n = n

    def fit(self, X=None, y=None):
        if self.n < 2:
            raise ConfigError("indicator basis needs at least 2 cells")
        return self

    def transform(self, X):
        """Evaluate all basis functions; returns an ``(m, n)`` one-hot array."""
        self.fit()
        x = check_unit_interval(X, name="samples")
        idx = np.minimum((x * self.n).astype(int), self.n - 1)
        out = np.zeros((x.size, self.n))
        out[np.arange(x.size), idx] = 1.0
        return out

    def cell_index(self, X):
        x = check_unit_interval(X, name="samples")
        return np.minimum((x * self.n).astype(int), self.n - 1)

    @property
    def n_features(self):
        return self.n

    def descriptor(self):
        return {"kind": "indicator", "n": int(self.n)}


class GaussianBasis(BaseEstimator, TransformerMixin):
    """Gaussian bumps ``exp(-(x - c_i)^2 / (2 sigma^2))`` at evenly spaced centers.

    Centers sit at ``(i + 1/2) / n``.  With ``periodic=True`` distances wrap
    around the unit circle, which is appropriate for angular data.
    """

    def __init__(self, n=20, bandwidth=0.05, periodic=False):
        self.n = n
        self.bandwidth = bandwidth
        self.periodic = periodic

    def fit(self, X=None, y=None):
        if self.n < 2:
            raise ConfigError("gaussian basis needs at least 2 functions")
        if self.bandwidth <= 0:
            raise ConfigError("gaussian bandwidth must be positive")
        return self

    @property
    def centers(self):
        return (np.arange(self.n) + 0.5) / self.n

    def transform(self, X):
        """Evaluate all basis functions; returns an ``(m, n)`` array in (0, 1]."""
        self.fit()
        x = check_unit_interval(X, name="samples")
        diff = x[:, None] - self.centers[None, :]
        if self.periodic:
            diff = np.abs(diff)
            diff = np.minimum(diff, 1.0 - diff)
        return np.exp(-(diff**2) / (2.0 * self.bandwidth**2))

    @property
    def n_features(self):
        return self.n

    def descriptor(self):
        return {
            "kind": "gaussian",
            "n": int(self.n),
            "bandwidth": float(self.bandwidth),
            "periodic": bool(self.periodic),
        }


def make_indicator(n):
    """Equipartition indicator dictionary with ``n`` cells."""
    return IndicatorBasis(n=n).fit()


def make_gaussian(n, bandwidth, periodic=False):
    """Gaussian dictionary with ``n`` evenly spaced centers."""
    return GaussianBasis(n=n, bandwidth=bandwidth, periodic=periodic).fit()


def basis_from_descriptor(desc):
    """Rebuild a basis from its JSON descriptor."""
    kind = desc.get("kind")
    if kind == "indicator":
        return make_indicator(int(desc["n"]))
    if kind == "gaussian":
        return make_gaussian(
            int(desc["n"]), float(desc["bandwidth"]), bool(desc.get("periodic", False))
        )
    raise ConfigError(f"unknown basis descriptor kind {kind!r}")
