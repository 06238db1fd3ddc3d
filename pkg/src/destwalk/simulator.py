"""Seeded trajectories and replica ensembles.

Random stream
-------------
Every replica owns one ``numpy.random.Generator`` over the counter-based
Philox4x64 bit generator, seeded with :func:`derive_replica_seed`. Steps are
processed in blocks of ``BLOCK`` (a fixed constant, part of the output
contract). For each block the draws are, in order:

1. destinations (sim1: exponential distances then Gaussian directions;
   sim2: Gaussian identification errors),
2. one Gaussian ``n x n`` matrix per step, orthonormalised into the frame
   (degenerate matrices are redrawn immediately, in step order),
3. allocation weights (exponentials for ``simplex``, integers for ``onehot``).

If a step hits a singular rotated component its frame is redrawn from the
same stream at that moment (at most ``MAX_FRAME_RETRIES`` times).

Record convention: record ``t`` (1-based) holds the position ``X(t)`` the
step starts from, the destination drawn at ``t``, ``r = ||D - X(t)||``, the
step length ``l(t) = ||X(t+1) - X(t)||`` and ``r0 = ||X(t)||``. The position
after the last step is kept as ``Trajectory.final_position``.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from . import _kernel
from .core import AT_DESTINATION, BETA_MODES, SINGULAR_REL, StepParams, random_frame, sample_beta
from .destinations import DestinationSpec
from .errors import ConfigError, DegenerateSeriesError, SimulationAbort

BLOCK = 4096
MAX_FRAME_RETRIES = 100
_MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class WalkConfig:
    """Full parameterisation of one run."""

    n: int = 2
    alpha: float = 0.001
    gamma: float = 0.0
    l_max: float = 10.0
    mode: str = "sim1"
    lam: float = 1000.0
    sigma: float = 0.001
    anchor: tuple | None = None
    beta_mode: str = "simplex"
    steps: int = 200_000
    burn_in: int = 100_000
    master_seed: int = 0
    initial_position: tuple | None = None

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise ConfigError("n", "n must be a positive integer")
        object.__setattr__(self, "n", int(self.n))
        for key in ("steps", "burn_in", "master_seed"):
            v = getattr(self, key)
            if int(v) != v:
                raise ConfigError(key, f"{key} must be an integer")
            object.__setattr__(self, key, int(v))
        if self.steps < 1:
            raise ConfigError("steps", "steps must be positive")
        if not (0 <= self.burn_in < self.steps):
            raise ConfigError("burn_in", "burn_in must satisfy 0 <= burn_in < steps")
        if not (0 <= self.master_seed <= _MASK64):
            raise ConfigError("master_seed", "master_seed must be a 64-bit unsigned integer")
        if self.beta_mode not in BETA_MODES:
            raise ConfigError("beta_mode", f"beta_mode must be one of {BETA_MODES}")
        try:
            StepParams(self.alpha, self.gamma, self.l_max)
        except ValueError as exc:
            key = str(exc).split()[0]
            raise ConfigError(key, str(exc)) from None
        try:
            self.destination.anchor_vector(self.n)
        except ValueError as exc:
            msg = str(exc)
            key = "mode" if "mode" in msg else "lam" if "lambda" in msg else "sigma" if "sigma" in msg else "anchor"
            raise ConfigError(key, msg) from None
        if self.anchor is not None:
            object.__setattr__(self, "anchor", tuple(float(a) for a in self.anchor))
        if self.initial_position is not None:
            p = tuple(float(a) for a in self.initial_position)
            if len(p) != self.n or not np.all(np.isfinite(p)):
                raise ConfigError("initial_position", f"initial_position must be {self.n} finite numbers")
            object.__setattr__(self, "initial_position", p)

    @property
    def step_params(self):
        return StepParams(self.alpha, self.gamma, self.l_max)

    @property
    def destination(self):
        return DestinationSpec(self.mode, self.lam, self.sigma, self.anchor)

    def start(self):
        if self.initial_position is None:
            return np.zeros(self.n)
        return np.array(self.initial_position, dtype=float)

    def to_dict(self):
        return asdict(self)

    def with_(self, **changes):
        return replace(self, **changes)


@dataclass(frozen=True)
class StepRecord:
    t: int
    position: np.ndarray
    destination: np.ndarray
    r: float
    l: float
    r0: float


@dataclass
class Trajectory:
    """Column-oriented step log for one replica."""

    t: np.ndarray
    positions: np.ndarray
    destinations: np.ndarray
    r: np.ndarray
    l: np.ndarray
    r0: np.ndarray
    config: WalkConfig | None = None
    l_raw: np.ndarray | None = None
    final_position: np.ndarray | None = None

    def __len__(self):
        return len(self.t)

    def __getitem__(self, k):
        return StepRecord(int(self.t[k]), self.positions[k], self.destinations[k],
                          float(self.r[k]), float(self.l[k]), float(self.r0[k]))

    def records(self):
        for k in range(len(self)):
            yield self[k]

    def after(self, burn_in):
        """Boolean mask of records with ``t > burn_in``."""
        return self.t > burn_in


def splitmix64(x):
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return x ^ (x >> 31)


def derive_replica_seed(master_seed, replica_index):
    """64-bit seed for one replica.

    ``splitmix64(master + index * golden)``: the inner map is injective in the
    index (odd multiplier, modulo 2**64) and the finaliser is a bijection, so
    distinct indices never collide for a fixed master seed.
    """
    x = (int(master_seed) + int(replica_index) * 0x9E3779B97F4A7C15) & _MASK64
    return splitmix64(x)


def make_rng(seed):
    return np.random.Generator(np.random.Philox(int(seed)))


def run_walk(config, seed=None, record_raw=False):
    """Simulate one trajectory.

    ``seed`` defaults to ``derive_replica_seed(config.master_seed, 0)`` so a
    single run is replica 0 of the ensemble with the same master seed.
    """
    if seed is None:
        seed = derive_replica_seed(config.master_seed, 0)
    rng = make_rng(seed)
    n, steps = config.n, config.steps
    params = config.step_params
    dspec = config.destination

    x = config.start()
    pos = np.empty((steps, n))
    dst = np.empty((steps, n))
    r = np.empty(steps)
    l = np.empty(steps)
    l_raw = np.empty(steps)
    scratch = np.empty((3, n))

    for b0 in range(0, steps, BLOCK):
        b1 = min(b0 + BLOCK, steps)
        size = b1 - b0
        draws = np.ascontiguousarray(dspec.draw(n, size, rng))
        frames = random_frame(n, rng, size)
        beta = sample_beta(n, config.beta_mode, rng, size)
        start, retries = 0, 0
        while True:
            done = _kernel.advance(
                x, draws, dspec.relative, frames, beta, params.gamma, params.alpha,
                params.l_max, SINGULAR_REL, AT_DESTINATION, start,
                pos[b0:b1], dst[b0:b1], r[b0:b1], l[b0:b1], l_raw[b0:b1], scratch,
            )
            if done == size:
                break
            retries = retries + 1 if done == start else 1
            if retries > MAX_FRAME_RETRIES:
                raise SimulationAbort(
                    f"step {b0 + done + 1}: singular rotated component persisted "
                    f"after {MAX_FRAME_RETRIES} frame redraws"
                )
            frames[done] = random_frame(n, rng)
            start = done

    if not np.all(np.isfinite(x)):
        raise SimulationAbort("position became non-finite")
    return Trajectory(
        t=np.arange(1, steps + 1),
        positions=pos,
        destinations=dst,
        r=r,
        l=l,
        r0=np.linalg.norm(pos, axis=1),
        config=config,
        l_raw=l_raw if record_raw else None,
        final_position=x,
    )


def _log_corr(a, b):
    from .analysis import pearson

    try:
        return pearson(np.log(a), np.log(b))
    except (DegenerateSeriesError, ValueError, FloatingPointError):
        return float("nan")


@dataclass
class ReplicaAggregate:
    """Merged post-burn-in statistics of an ensemble.

    Arrays are concatenated in replica order; count accumulators are summed.
    Per-replica correlations are ``nan`` where undefined (e.g. a constant
    series of clipped steps).
    """

    config: WalkConfig
    n_replicas: int
    step_lengths: np.ndarray | None = None
    r0: np.ndarray | None = None
    lag1_log_corr: np.ndarray = field(default_factory=lambda: np.empty(0))
    r0_l_log_corr: np.ndarray = field(default_factory=lambda: np.empty(0))
    radial: object = None
    grid: object = None
    n_positions: int = 0


def _replica_summary(config, index, pool, radial, grid):
    from . import analysis

    traj = run_walk(config, derive_replica_seed(config.master_seed, index))
    keep = traj.after(config.burn_in)
    l = traj.l[keep]
    r0 = traj.r0[keep]
    out = {
        "lag1": _log_corr(l[:-1], l[1:]) if np.all(l > 0) else float("nan"),
        "r0l": _log_corr(r0, l) if np.all(l > 0) and np.all(r0 > 0) else float("nan"),
        "n": int(keep.sum()),
    }
    if pool:
        out["l"] = l
        out["r0"] = r0
    if radial is not None:
        out["radial"] = analysis.radial_occupancy_from_r0(r0, *radial)
    if grid is not None:
        out["grid"] = analysis.occupancy_grid(traj.positions[keep], *grid)
    return out


def run_replicas(config, n_replicas, workers=1, pool=True, radial=None, grid=None):
    """Run ``n_replicas`` independent walks and merge their post-burn-in data.

    Parameters
    ----------
    workers : int
        Thread count. Results do not depend on it.
    pool : bool
        Keep the concatenated step lengths and ``r0`` samples.
    radial : (delta_r0, (r_min, r_max)) or None
        Accumulate a radial occupancy histogram.
    grid : (cell, (lo, hi)) or None
        Accumulate a 2-D occupancy grid.
    """
    from . import analysis

    if n_replicas < 1:
        raise ValueError("n_replicas must be >= 1")

    def job(i):
        try:
            return _replica_summary(config, i, pool, radial, grid)
        except SimulationAbort as exc:
            raise SimulationAbort(f"replica {i}: {exc}", replica=i) from exc

    agg = ReplicaAggregate(config=config, n_replicas=n_replicas)
    lag1, r0l, ls, r0s = [], [], [], []
    ex = ThreadPoolExecutor(max_workers=workers) if workers > 1 else None
    try:
        results = ex.map(job, range(n_replicas)) if ex else map(job, range(n_replicas))
        # integer count merges are commutative, so folding in replica order is exact
        for res in results:
            lag1.append(res["lag1"])
            r0l.append(res["r0l"])
            agg.n_positions += res["n"]
            if pool:
                ls.append(res["l"])
                r0s.append(res["r0"])
            if radial is not None:
                agg.radial = res["radial"] if agg.radial is None else analysis.merge_radial([agg.radial, res["radial"]])
            if grid is not None:
                agg.grid = res["grid"] if agg.grid is None else analysis.merge_grids([agg.grid, res["grid"]])
    finally:
        if ex:
            ex.shutdown()
    agg.lag1_log_corr = np.array(lag1)
    agg.r0_l_log_corr = np.array(r0l)
    if pool:
        agg.step_lengths = np.concatenate(ls)
        agg.r0 = np.concatenate(r0s)
    return agg
