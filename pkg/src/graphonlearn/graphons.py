"""Graphons, degree functions, transition densities, and the invariant density.

A graphon is a measurable map ``w: [0,1]^2 -> [0,1]`` interpreted as edge
weights of a graph with a continuum of vertices.  The random walk induced by a
graphon steps from ``x`` according to the transition density
``p(x, y) = w(x, y) / d_out(x)``, where ``d_out`` is the out-degree function.
For symmetric graphons the walk is reversible with stationary density
proportional to the degree function.
"""

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from ._validation import midpoints
from .errors import DegeneracyError, DomainError, SymmetryError

DEGREE_FLOOR = 1e-6
SYMMETRY_TOL = 1e-12


class Graphon:
    """An evaluable edge-weight kernel on the unit square.

    Parameters
    ----------
    kernel : callable
        Vectorized map ``(x, y) -> w`` accepting broadcastable float arrays
        with values in ``[0, 1]``.
    symmetric : bool
        Whether ``w(x, y) == w(y, x)``.  Verified on a sample grid at
        construction time.
    representation : str
        One of ``"analytic"``, ``"grid"``, ``"block"``.
    descriptor : dict, optional
        Provenance record (builtin name and parameters, or file path) used in
        run manifests.
    """

    def __init__(self, kernel, symmetric, representation="analytic", descriptor=None):
        self.kernel = kernel
        self.symmetric = bool(symmetric)
        self.representation = representation
        self.descriptor = dict(descriptor) if descriptor else {"kind": representation}
        self._probe()

    def __call__(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        return self.kernel(x, y)

    def _probe(self, n=101):
        """Spot-check range and symmetry on a coarse midpoint grid."""
        g = midpoints(n)
        vals = self(g[:, None], g[None, :])
        if vals.shape != (n, n):
            raise DomainError("graphon kernel does not broadcast over grids")
        if np.min(vals) < -1e-12 or np.max(vals) > 1.0 + 1e-12:
            raise DomainError(
                f"graphon values outside [0, 1]: range [{vals.min()}, {vals.max()}]"
            )
        if self.symmetric and np.max(np.abs(vals - vals.T)) > SYMMETRY_TOL:
            raise SymmetryError("kernel marked symmetric but w(x,y) != w(y,x)")

    # -- constructors -------------------------------------------------------

    @classmethod
    def from_grid(cls, values, symmetric=None, descriptor=None):
        """Piecewise-constant graphon from a square matrix of cell values.

        Row index corresponds to the ``x`` cell, column index to the ``y``
        cell; cell ``(i, j)`` covers ``[i/G, (i+1)/G) x [j/G, (j+1)/G)``.
        """
        values = np.asarray(values, dtype=float)
        if values.ndim != 2 or values.shape[0] != values.shape[1]:
            raise DomainError(f"grid graphon must be square, got {values.shape}")
        if values.min() < 0.0 or values.max() > 1.0:
            raise DomainError("grid graphon values must lie in [0, 1]")
        if symmetric is None:
            symmetric = np.array_equal(values, values.T)
        g = values.shape[0]

        def kernel(x, y):
            ix = np.minimum((np.asarray(x) * g).astype(int), g - 1)
            iy = np.minimum((np.asarray(y) * g).astype(int), g - 1)
            return values[ix, iy]

        obj = cls(kernel, symmetric, representation="grid", descriptor=descriptor)
        obj.grid_values = values
        return obj

    @classmethod
    def from_blocks(cls, boundaries, values, descriptor=None):
        """Block-constant graphon.

        ``boundaries`` is the full increasing cut-point sequence starting at 0
        and ending at 1; ``values`` the matching square block-value matrix.
        """
        boundaries = np.asarray(boundaries, dtype=float)
        values = np.asarray(values, dtype=float)
        k = len(boundaries) - 1
        if values.shape != (k, k):
            raise DomainError(
                f"block value matrix {values.shape} does not match {k} blocks"
            )
        if boundaries[0] != 0.0 or boundaries[-1] != 1.0 or np.any(np.diff(boundaries) <= 0):
            raise DomainError("block boundaries must increase from 0 to 1")
        if values.min() < 0.0 or values.max() > 1.0:
            raise DomainError("block values must lie in [0, 1]")
        symmetric = np.array_equal(values, values.T)
        inner = boundaries[1:-1]

        def kernel(x, y):
            ix = np.searchsorted(inner, np.asarray(x), side="right")
            iy = np.searchsorted(inner, np.asarray(y), side="right")
            return values[ix, iy]

        obj = cls(kernel, symmetric, representation="block", descriptor=descriptor)
        obj.block_boundaries = boundaries
        obj.block_values = values
        return obj

    @classmethod
    def from_csv(cls, path, symmetric=None):
        """Load a grid-sampled graphon from a headerless CSV matrix."""
        values = np.loadtxt(path, delimiter=",", ndmin=2)
        return cls.from_grid(
            values, symmetric=symmetric, descriptor={"kind": "grid", "path": str(path)}
        )

    def to_csv(self, path, grid_size=None):
        """Write the graphon sampled at cell centers as a headerless CSV matrix."""
        if grid_size is None and hasattr(self, "grid_values"):
            values = self.grid_values
        else:
            g = midpoints(grid_size or 200)
            values = self(g[:, None], g[None, :])
        np.savetxt(path, values, delimiter=",")
        return path


# -- degree functions and densities ----------------------------------------


@dataclass
class DegreeProfile:
    """In/out-degree functions of a graphon with their grid lower bound."""

    graphon: Graphon
    d_in: Callable
    d_out: Callable
    d0: float
    grid_size: int
    d_out_grid: np.ndarray = field(repr=False)
    d_in_grid: np.ndarray = field(repr=False)


def degree_profile(graphon, grid_size=2000):
    """Compute in- and out-degree functions by composite midpoint quadrature.

    Raises
    ------
    DegeneracyError
        If the out-degree drops to ``<= 1e-6`` anywhere on the grid, i.e. the
        positivity assumption behind the walk fails.
    """
    if grid_size < 2:
        raise ValueError("grid_size must be at least 2")
    grid = midpoints(grid_size)

    def d_out(x):
        x = np.asarray(x, dtype=float)
        flat = np.atleast_1d(x).reshape(-1)
        vals = graphon(flat[:, None], grid[None, :]).mean(axis=1)
        return vals.reshape(x.shape) if x.ndim else float(vals[0])

    def d_in(x):
        x = np.asarray(x, dtype=float)
        flat = np.atleast_1d(x).reshape(-1)
        vals = graphon(grid[None, :], flat[:, None]).mean(axis=1)
        return vals.reshape(x.shape) if x.ndim else float(vals[0])

    d_out_grid = d_out(grid)
    d0 = float(d_out_grid.min())
    if d0 <= DEGREE_FLOOR:
        raise DegeneracyError(
            f"out-degree lower bound {d0:.3e} <= {DEGREE_FLOOR}; "
            "the random walk is not well-defined everywhere"
        )
    d_in_grid = d_out_grid if graphon.symmetric else d_in(grid)
    return DegreeProfile(
        graphon=graphon,
        d_in=d_in,
        d_out=d_out,
        d0=d0,
        grid_size=grid_size,
        d_out_grid=d_out_grid,
        d_in_grid=d_in_grid,
    )


@dataclass
class TransitionDensity:
    """Evaluable one-step transition density ``p(x, y) = w(x, y) / d_out(x)``."""

    graphon: Graphon
    profile: DegreeProfile
    grid_size: int

    def __call__(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        w = self.graphon(x, y)
        d = self.profile.d_out(x)
        return w / d

    @property
    def upper_bound(self):
        """Pointwise bound ``p <= 1 / d0`` implied by ``w <= 1``."""
        return 1.0 / self.profile.d0


def transition_density(graphon, profile=None, grid_size=2000):
    """Build the transition density of the random walk on ``graphon``."""
    if profile is None:
        profile = degree_profile(graphon, grid_size=grid_size)
    if profile.d0 <= 0:
        raise DegeneracyError("degree profile has non-positive lower bound")
    return TransitionDensity(graphon=graphon, profile=profile, grid_size=profile.grid_size)


@dataclass
class InvariantDensity:
    """Stationary density of the reversible walk, ``pi = d / Z``."""

    profile: DegreeProfile
    normalization: float

    def __call__(self, x):
        return self.profile.d_out(x) / self.normalization


def invariant_density(profile):
    """Stationary density ``pi(x) = d(x) / Z`` with ``Z = integral of d``.

    Only defined for symmetric graphons; raises :class:`SymmetryError`
    otherwise.
    """
    if not profile.graphon.symmetric:
        raise SymmetryError("invariant density requires a symmetric graphon")
    normalization = float(profile.d_out_grid.mean())
    return InvariantDensity(profile=profile, normalization=normalization)


# -- connectivity probe ------------------------------------------------------


@dataclass
class ConnectednessReport:
    """Result of the grid-resolution support-connectivity probe."""

    connected: bool
    witness: Optional[list]
    grid_size: int

    def __bool__(self):
        return self.connected


def connectedness_probe(graphon, grid_size=200):
    """Approximate connectivity check at grid resolution.

    Thresholds the sampled kernel at zero and tests whether the resulting
    support graph over grid cells is connected.  This is a necessary-condition
    probe: the exact notion is measure-theoretic and cannot be verified
    numerically.  When disconnected, the witness is a list of ``(lo, hi)``
    intervals covering one component's cells.
    """
    if grid_size < 2:
        raise ValueError("grid_size must be at least 2")
    g = midpoints(grid_size)
    w = graphon(g[:, None], g[None, :])
    support = (w > 0) | (w.T > 0)
    np.fill_diagonal(support, True)
    n_comp, labels = connected_components(csr_matrix(support), directed=False)
    if n_comp == 1:
        return ConnectednessReport(connected=True, witness=None, grid_size=grid_size)
    cells = np.flatnonzero(labels == labels[0])
    witness = []
    start = cells[0]
    prev = cells[0]
    for c in cells[1:]:
        if c != prev + 1:
            witness.append((start / grid_size, (prev + 1) / grid_size))
            start = c
        prev = c
    witness.append((start / grid_size, (prev + 1) / grid_size))
    return ConnectednessReport(connected=False, witness=witness, grid_size=grid_size)


# -- builtin graphons --------------------------------------------------------


def triple_peak():
    """Symmetric benchmark kernel with metastable peaks near 0.2, 0.5, 0.8."""

    def kernel(x, y):
        return (
            0.2 * np.exp(-((x - 0.2) ** 2 + (y - 0.2) ** 2) / 0.02)
            + 0.1 * np.exp(-((x - 0.5) ** 2 + (y - 0.5) ** 2) / 0.02)
            + 0.2 * np.exp(-((x - 0.8) ** 4 + (y - 0.8) ** 4) / 0.0005)
        )

    return Graphon(kernel, symmetric=True, descriptor={"kind": "builtin", "name": "triple-peak"})


def quadruple_peak():
    """Asymmetric benchmark kernel: a 3-cycle of peaks plus one diagonal peak."""

    def kernel(x, y):
        return (
            0.2 * np.exp(-((x - 0.15) ** 2 + (y - 0.3) ** 2) / 0.008)
            + 0.2 * np.exp(-((x - 0.3) ** 2 + (y - 0.45) ** 2) / 0.008)
            + 0.2 * np.exp(-((x - 0.45) ** 2 + (y - 0.15) ** 2) / 0.008)
            + 0.15 * np.exp(-((x - 0.75) ** 2 + (y - 0.75) ** 2) / 0.02)
        )

    return Graphon(kernel, symmetric=False, descriptor={"kind": "builtin", "name": "quadruple-peak"})


def two_block(a=0.8, b=0.2):
    """Two equal blocks with on-diagonal weight ``a`` and off-diagonal ``b``."""
    g = Graphon.from_blocks(
        [0.0, 0.5, 1.0],
        [[a, b], [b, a]],
        descriptor={"kind": "builtin", "name": "two-block", "a": a, "b": b},
    )
    return g


def constant(c=0.5):
    """Constant kernel ``w == c``."""
    if not 0.0 < c <= 1.0:
        raise DomainError("constant graphon level must lie in (0, 1]")

    def kernel(x, y):
        return np.full(np.broadcast_shapes(np.shape(x), np.shape(y)), float(c))

    return Graphon(kernel, symmetric=True, descriptor={"kind": "builtin", "name": "constant", "c": c})


def bipartite():
    """Bipartite kernel: weight 1 between the two halves of [0, 1], 0 within."""
    return Graphon.from_blocks(
        [0.0, 0.5, 1.0],
        [[0.0, 1.0], [1.0, 0.0]],
        descriptor={"kind": "builtin", "name": "bipartite"},
    )


def row_scaled(graphon, scale):
    """Kernel ``c(x) * w(x, y)`` for a positive scaling function ``c``.

    Used to probe non-identifiability: row scalings leave the transition
    density unchanged.  The result is flagged asymmetric.
    """

    def kernel(x, y):
        return scale(np.asarray(x, dtype=float)) * graphon(x, y)

    return Graphon(
        kernel,
        symmetric=False,
        descriptor={"kind": "derived", "name": "row-scaled", "base": graphon.descriptor},
    )


BUILTIN_GRAPHONS = {
    "triple-peak": triple_peak,
    "quadruple-peak": quadruple_peak,
    "two-block": two_block,
    "constant": constant,
    "bipartite": bipartite,
}


def make_graphon(name, **params):
    """Instantiate a builtin graphon by name, passing through parameters."""
    try:
        factory = BUILTIN_GRAPHONS[name]
    except KeyError:
        raise DomainError(
            f"unknown builtin graphon {name!r}; available: {sorted(BUILTIN_GRAPHONS)}"
        ) from None
    return factory(**params)
