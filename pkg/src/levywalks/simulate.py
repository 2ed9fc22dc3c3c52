"""Monte Carlo simulation of standard, undershooting and overshooting Levy walks.

Waiting times are Pareto with survival t^(-alpha) on [1, inf); jump lengths
equal waiting times (unit speed) and directions are uniform on the sphere.
One pass over a renewal sequence yields all three walk kinds at once:

* undershoot -- sum of the completed jumps,
* overshoot  -- completed jumps plus the whole jump in progress,
* standard   -- completed jumps plus the elapsed part of the jump in progress.

Ensembles are split into fixed-size blocks, each with its own counter-based
(Philox) stream keyed by (seed, block index), so the output does not depend
on how many threads process the blocks.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError
from .model import MAX_DIM, WalkKind

BLOCK_SIZE = 4096
MAX_TRAJECTORY = 10_000
THREADS_ENV = "LEVYWALKS_THREADS"


@dataclass(frozen=True)
class RngStream:
    """Independent substream ``stream_id`` of the generator family keyed by ``seed``."""

    seed: int
    stream_id: int = 0

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(int(self.seed) & (2 ** 64 - 1), spawn_key=(int(self.stream_id),))
        return np.random.Generator(np.random.Philox(ss))


def _as_generator(rng) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    if isinstance(rng, RngStream):
        return rng.generator()
    raise TypeError("rng must be an RngStream or a numpy Generator")


def _check_alpha(alpha: float):
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"alpha must lie in (0, 1), got {alpha}")


def _check_dim(d: int):
    if int(d) != d or d < 2 or d > MAX_DIM:
        raise DomainError(f"dimension must be an integer in [2, {MAX_DIM}], got {d}")


def pareto_from_uniform(u, alpha: float):
    """Inverse survival function: T = u^(-1/alpha) for u in (0, 1]."""
    return np.power(u, -1.0 / alpha)


def sample_waiting_time(alpha: float, rng, size=None):
    """Pareto waiting time with P(T > t) = t^(-alpha), t >= 1."""
    _check_alpha(alpha)
    gen = _as_generator(rng)
    u = 1.0 - gen.random(size)  # (0, 1]
    out = pareto_from_uniform(u, alpha)
    return float(out) if size is None else out


def _box_muller(gen: np.random.Generator, count: int) -> np.ndarray:
    """``count`` standard normals, consuming uniforms strictly in pairs."""
    pairs = (count + 1) // 2
    u1 = 1.0 - gen.random(pairs)
    u2 = gen.random(pairs)
    rad = np.sqrt(-2.0 * np.log(u1))
    ang = 2.0 * math.pi * u2
    out = np.empty(2 * pairs)
    out[0::2] = rad * np.cos(ang)
    out[1::2] = rad * np.sin(ang)
    return out[:count]


def sample_direction(d: int, rng, size=None) -> np.ndarray:
    """Uniform direction(s) on the unit sphere in R^d: normalised Gaussian vectors."""
    _check_dim(d)
    gen = _as_generator(rng)
    m = 1 if size is None else int(size)
    out = _box_muller(gen, m * d).reshape(m, d)
    norm = np.linalg.norm(out, axis=1)
    zero = norm == 0
    while np.any(zero):
        out[zero] = _box_muller(gen, int(zero.sum()) * d).reshape(-1, d)
        norm[zero] = np.linalg.norm(out[zero], axis=1)
        zero = norm == 0
    out /= norm[:, None]
    return out[0] if size is None else out


@dataclass
class WalkSample:
    kind: WalkKind
    position: np.ndarray
    scale: float
    time: float
    trajectory: np.ndarray | None = None
    radius: float = field(init=False)
    first_coord: float = field(init=False)

    def __post_init__(self):
        self.position = np.asarray(self.position, dtype=float)
        self.radius = float(np.linalg.norm(self.position))
        self.first_coord = float(self.position[0])


def walk_position(kind: WalkKind | str, d: int, alpha: float, horizon: float, rng,
                  record: bool = False) -> WalkSample:
    """Position at time ``horizon`` of one walk of the given kind.

    With ``record=True`` the renewal points are kept (at most 10^4 of them;
    recording stops silently beyond that).
    """
    kind = WalkKind.parse(kind)
    _check_alpha(alpha)
    _check_dim(d)
    if not horizon > 0:
        raise DomainError("horizon must be positive")
    gen = _as_generator(rng)
    elapsed = 0.0
    pos = np.zeros(d)
    points = [pos.copy()] if record else None
    while True:
        t = float(pareto_from_uniform(1.0 - gen.random(), alpha))
        v = sample_direction(d, gen)
        if elapsed + t > horizon:
            break
        elapsed += t
        pos = pos + t * v
        if record and len(points) < MAX_TRAJECTORY:
            points.append(pos.copy())
    if kind is WalkKind.UNDERSHOOT:
        final = pos
    elif kind is WalkKind.OVERSHOOT:
        final = pos + t * v
    else:
        final = pos + (horizon - elapsed) * v
    traj = np.array(points) if record else None
    return WalkSample(kind, final, 1.0, horizon, traj)


def _simulate_block(d: int, alpha: float, horizon: float, count: int, stream: RngStream):
    """Lockstep simulation of ``count`` walkers; returns final positions of all three kinds."""
    gen = stream.generator()
    elapsed = np.zeros(count)
    pos = np.zeros((count, d))
    under = np.empty((count, d))
    over = np.empty((count, d))
    std = np.empty((count, d))
    active = np.arange(count)
    while active.size:
        m = active.size
        t = pareto_from_uniform(1.0 - gen.random(m), alpha)
        v = sample_direction(d, gen, m)
        done = elapsed[active] + t > horizon
        if np.any(done):
            idx = active[done]
            p = pos[idx]
            under[idx] = p
            over[idx] = p + t[done, None] * v[done]
            std[idx] = p + (horizon - elapsed[idx])[:, None] * v[done]
        keep = ~done
        idx = active[keep]
        elapsed[idx] += t[keep]
        pos[idx] += t[keep, None] * v[keep]
        active = idx
    return {WalkKind.UNDERSHOOT: under, WalkKind.OVERSHOOT: over, WalkKind.STANDARD: std}


def default_threads() -> int:
    env = os.environ.get(THREADS_ENV)
    if env:
        try:
            val = int(env)
        except ValueError:
            raise DomainError(f"{THREADS_ENV} must be an integer, got {env!r}") from None
        if val >= 1:
            return val
    return os.cpu_count() or 1


@dataclass
class CoupledEnsemble:
    """Rescaled final positions of all three kinds, driven by the same renewal sequences."""

    dim: int
    alpha: float
    scale: float
    count: int
    seed: int
    positions: dict

    def radii(self, kind: WalkKind | str) -> np.ndarray:
        kind = WalkKind.parse(kind)
        r = np.linalg.norm(self.positions[kind], axis=1)
        if kind is WalkKind.STANDARD:
            # the path length is exactly the horizon; only summation round-off can exceed it
            r = np.minimum(r, 1.0)
        return r

    def first_coords(self, kind: WalkKind | str) -> np.ndarray:
        return self.positions[WalkKind.parse(kind)][:, 0].copy()


def coupled_ensemble(d: int, alpha: float, scale: float, count: int, seed: int,
                     threads: int | None = None) -> CoupledEnsemble:
    """``count`` walks up to time ``scale``, positions divided by ``scale``.

    Sample i always comes from block i // BLOCK_SIZE with its own stream, so
    results are identical for any thread count.
    """
    _check_alpha(alpha)
    _check_dim(d)
    if scale < 10:
        raise DomainError("the scale must be at least 10")
    if count < 1:
        raise DomainError("count must be at least 1")
    threads = default_threads() if threads is None else int(threads)
    if threads < 1:
        raise DomainError("threads must be at least 1")
    nblocks = -(-count // BLOCK_SIZE)
    sizes = [min(BLOCK_SIZE, count - b * BLOCK_SIZE) for b in range(nblocks)]

    def run(b):
        return _simulate_block(d, alpha, float(scale), sizes[b], RngStream(seed, b))

    if threads == 1 or nblocks == 1:
        parts = [run(b) for b in range(nblocks)]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(run, range(nblocks)))
    positions = {k: np.concatenate([p[k] for p in parts]) / scale for k in WalkKind}
    return CoupledEnsemble(d, alpha, float(scale), count, seed, positions)


def scaled_ensemble(kind: WalkKind | str, d: int, alpha: float, scale: float, count: int, seed: int,
                    threads: int | None = None, params=None):
    """Rescaled ensemble of one walk kind, summarised with KS distances against the analytic laws."""
    from .model import make_params
    from .stats import summarize_ensemble

    kind = WalkKind.parse(kind)
    ens = coupled_ensemble(d, alpha, scale, count, seed, threads)
    params = params or make_params(kind, alpha, d)
    return summarize_ensemble(params, ens.radii(kind), ens.first_coords(kind), scale, seed)
