"""Trajectory generation: graphon random walks and a non-reversible SDE.

The walk starts uniformly on [0, 1] and repeatedly samples the next state from
the transition density of the current one.  The SDE produces angular
trajectory data from an overdamped Langevin system with a rotational
(non-gradient) drift component on a periodic multi-well potential.
"""

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ._validation import check_trajectory, midpoints
from .errors import ConfigError, DegeneracyError, ParseError

REJECTION_CAP = 100_000


@dataclass
class Trajectory:
    """Ordered state sequence in [0, 1] together with its provenance."""

    states: np.ndarray
    seed: int | None = None
    source: dict = field(default_factory=dict)
    periodic: bool = False

    def __post_init__(self):
        self.states = check_trajectory(self.states)

    def __len__(self):
        return len(self.states)

    @property
    def n_steps(self):
        return len(self.states) - 1

    def to_csv(self, path):
        """Write one state per line (header ``x``) plus a JSON metadata sidecar."""
        path = Path(path)
        np.savetxt(path, self.states, header="x", comments="")
        meta = {
            "seed": self.seed,
            "m": self.n_steps,
            "source": self.source,
            "periodic": self.periodic,
        }
        path.with_suffix(path.suffix + ".json").write_text(json.dumps(meta, indent=2))
        return path

    @classmethod
    def from_csv(cls, path):
        path = Path(path)
        try:
            first = path.open().readline().strip()
            states = np.loadtxt(path, skiprows=1 if first == "x" else 0)
        except (OSError, ValueError) as exc:
            raise ParseError(f"could not read trajectory from {path}: {exc}") from exc
        meta_path = path.with_suffix(path.suffix + ".json")
        meta = {}
        if meta_path.exists():
            meta = json.loads(meta_path.read_text())
        return cls(
            states=states,
            seed=meta.get("seed"),
            source=meta.get("source", {"kind": "file", "path": str(path)}),
            periodic=bool(meta.get("periodic", False)),
        )


@dataclass
class PairedData:
    """Snapshot pairs ``(x_k, y_k)`` with ``y_k`` the successor of ``x_k``."""

    x: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        self.x = np.asarray(self.x, dtype=float)
        self.y = np.asarray(self.y, dtype=float)
        if self.x.shape != self.y.shape:
            raise ConfigError("paired data requires equally many x and y samples")

    def __len__(self):
        return len(self.x)


def pairs(trajectory, symmetrize=False):
    """Consecutive-state pairs of a trajectory.

    With ``symmetrize=True`` the reversed pairs are appended, which makes the
    empirical covariances exactly symmetric (used when the process is assumed
    reversible).
    """
    states = trajectory.states if isinstance(trajectory, Trajectory) else check_trajectory(trajectory)
    x, y = states[:-1], states[1:]
    if symmetrize:
        return PairedData(x=np.concatenate([x, y]), y=np.concatenate([y, x]))
    return PairedData(x=x.copy(), y=y.copy())


def walk(density, n_steps, seed, method="inverse-transform", grid_size=1000, burn_in=0):
    """Simulate a random walk driven by a transition density.

    Parameters
    ----------
    density : TransitionDensity
        One-step transition density ``p(x, .)``.
    n_steps : int
        Number of steps kept; the trajectory has ``n_steps + 1`` states.
    seed : int
        Seed for the walk's own PCG64 stream; identical seeds give
        bit-identical trajectories.
    method : str
        ``"inverse-transform"`` discretizes ``p(x, .)`` on a midpoint grid,
        forms the cumulative sum and inverts it by binary search with linear
        interpolation inside the hit cell.  ``"rejection"`` draws uniform
        proposals against the grid-maximum envelope.
    burn_in : int
        Extra leading steps that are simulated and discarded.
    """
    if n_steps < 1:
        raise ConfigError("n_steps must be positive")
    if method not in ("inverse-transform", "rejection"):
        raise ConfigError(f"unknown sampling method {method!r}")
    rng = np.random.default_rng(seed)
    grid = midpoints(grid_size)
    kernel = density.graphon
    total = burn_in + n_steps
    states = np.empty(total + 1)
    x = rng.uniform()
    states[0] = x
    for k in range(total):
        # p(x, .) is proportional to w(x, .); the normalization cancels in
        # both samplers, so the kernel row suffices.
        row = np.asarray(kernel(x, grid), dtype=float)
        if method == "inverse-transform":
            cum = np.cumsum(row)
            mass = cum[-1]
            if mass <= 0.0:
                raise DegeneracyError(f"transition density vanishes at x={x:.6f}")
            u = rng.uniform() * mass
            j = int(np.searchsorted(cum, u, side="left"))
            j = min(j, grid_size - 1)
            prev = cum[j - 1] if j > 0 else 0.0
            cell_mass = cum[j] - prev
            frac = (u - prev) / cell_mass if cell_mass > 0 else 0.5
            x = (j + frac) / grid_size
        else:
            envelope = row.max()
            if envelope <= 0.0:
                raise DegeneracyError(f"transition density vanishes at x={x:.6f}")
            for _ in range(REJECTION_CAP):
                proposal = rng.uniform()
                if rng.uniform() * envelope <= float(kernel(x, proposal)):
                    x = proposal
                    break
            else:
                raise DegeneracyError(
                    f"rejection sampler stalled at x={x:.6f} (acceptance too small)"
                )
        states[k + 1] = x
    return Trajectory(
        states=states[burn_in:],
        seed=seed,
        source={
            "kind": "graphon-walk",
            "graphon": density.graphon.descriptor,
            "method": method,
            "grid_size": grid_size,
            "burn_in": burn_in,
        },
        periodic=False,
    )


@dataclass
class SdeConfig:
    """Configuration of the rotational-drift overdamped Langevin system.

    The potential is ``cos(wells * angle) + 10 * (radius - 1)^2``: ``wells``
    minima spread uniformly around the unit circle with a stiff radial
    confinement.  The drift is ``-grad V + rotation @ grad V`` and the noise
    scale is ``sqrt(2 / beta)``.
    """

    wells: int = 5
    rotation: np.ndarray = field(default_factory=lambda: np.array([[0.0, 1.0], [-1.0, 0.0]]))
    beta: float = 2.0
    lag: float = 0.1
    dt: float = 0.005
    origin: tuple = (1.0, 0.0)

    def __post_init__(self):
        self.rotation = np.asarray(self.rotation, dtype=float)
        if self.rotation.shape != (2, 2) or not np.array_equal(self.rotation, -self.rotation.T):
            raise ConfigError("rotation must be an exactly antisymmetric 2x2 matrix")
        if self.wells < 1 or int(self.wells) != self.wells:
            raise ConfigError("wells must be a positive integer")
        if self.beta <= 0 or self.dt <= 0 or self.lag <= 0:
            raise ConfigError("beta, dt, and lag must be positive")
        substeps = self.lag / self.dt
        if abs(substeps - round(substeps)) > 1e-9 or round(substeps) < 1:
            raise ConfigError("lag must be a positive integer multiple of dt")
        self.substeps = int(round(substeps))

    def descriptor(self):
        return {
            "kind": "sde",
            "wells": int(self.wells),
            "rotation": self.rotation.tolist(),
            "beta": self.beta,
            "lag": self.lag,
            "dt": self.dt,
            "origin": list(self.origin),
        }


def sde_walk(config, n_samples, seed, burn_in=0):
    """Integrate the SDE with Euler-Maruyama and record the angular coordinate.

    Every ``lag/dt``-th step is recorded; the output is the polar angle mapped
    to [0, 1) and flagged periodic.  Initial condition and burn-in are
    artifact choices (the origin defaults to (1, 0) on the ring of minima).
    """
    if n_samples < 1:
        raise ConfigError("n_samples must be positive")
    rng = np.random.default_rng(seed)
    k = float(config.wells)
    m00, m01 = config.rotation[0]
    m10, m11 = config.rotation[1]
    dt = config.dt
    sub = config.substeps
    sigma = math.sqrt(2.0 * dt / config.beta)
    total_records = burn_in + n_samples
    noise = rng.standard_normal((total_records * sub, 2)) * sigma
    x1, x2 = float(config.origin[0]), float(config.origin[1])
    angles = np.empty(total_records + 1)
    angles[0] = math.atan2(x2, x1)
    i = 0
    for rec in range(total_records):
        for _ in range(sub):
            r = math.hypot(x1, x2)
            theta = math.atan2(x2, x1)
            pull = -k * math.sin(k * theta)
            radial = 20.0 * (r - 1.0)
            r2 = r * r
            g1 = pull * (-x2 / r2) + radial * (x1 / r)
            g2 = pull * (x1 / r2) + radial * (x2 / r)
            d1 = -g1 + m00 * g1 + m01 * g2
            d2 = -g2 + m10 * g1 + m11 * g2
            x1 += d1 * dt + noise[i, 0]
            x2 += d2 * dt + noise[i, 1]
            i += 1
        angles[rec + 1] = math.atan2(x2, x1)
    unit = ((angles + math.pi) / (2.0 * math.pi)) % 1.0
    return Trajectory(
        states=unit[burn_in:],
        seed=seed,
        source={"kind": "sde-walk", "sde": config.descriptor(), "burn_in": burn_in},
        periodic=True,
    )


def lemon_slice_config(**overrides):
    """The five-well configuration used by the non-reversible benchmark."""
    params = {"wells": 5, "beta": 2.0, "lag": 0.1, "dt": 0.005}
    params.update(overrides)
    return SdeConfig(**params)
