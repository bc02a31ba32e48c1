"""Loss-stream generators and a repeatable multi-repetition harness.

Randomness contract
-------------------
All randomness flows from one 64-bit counter-based generator (SplitMix64):
output ``i`` of stream ``s`` is ``mix64(s + i * GAMMA)`` where ``GAMMA`` is
the odd constant 0x9E3779B97F4A7C15 and ``mix64`` is the standard
xorshift-multiply finalizer; uniforms in [0, 1) take the top 53 bits.
Repetition ``r`` of an experiment uses the substream seed
``mix64(mix64(base_seed) ^ mix64((r + 1) * GAMMA))``.  Per round the draw
order is fixed (regime first where present, then action 1, then action 2,
...), so every stream is reproducible bit-for-bit from (base_seed, r)
alone, independent of platform, thread count or evaluation order.

Bernoulli sampling emits loss 1 exactly when the uniform draw is < p.

``run_experiment`` may fan repetitions out over a process pool capped by
the ``ADAHEDGE_THREADS`` environment variable (default: available cores);
per-repetition results are merged in repetition order, so aggregate output
is byte-identical for every thread count.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import partial
from pathlib import Path
from typing import Optional, Union

import numpy as np

from .strategies import (
    AdaHedge,
    DoublingHedge,
    RegretTrace,
    StrategyKind,
    run,
)

__all__ = [
    "THREADS_ENV",
    "IidBernoulli",
    "Correlated",
    "AlternatingPair",
    "FtlKiller",
    "GeneratorSpec",
    "ExperimentConfig",
    "AggregateResult",
    "SegmentStats",
    "derive_seed",
    "unit_uniforms",
    "generate",
    "run_experiment",
    "segment_statistics",
]

THREADS_ENV = "ADAHEDGE_THREADS"

_M64 = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15


def _mix64(x: int) -> int:
    """SplitMix64 finalizer: a bijective avalanche on 64-bit integers."""
    x &= _M64
    x ^= x >> 30
    x = (x * 0xBF58476D1CE4E5B9) & _M64
    x ^= x >> 27
    x = (x * 0x94D049BB133111EB) & _M64
    x ^= x >> 31
    return x


def derive_seed(base_seed: int, index: int) -> int:
    """Substream seed for repetition ``index`` under ``base_seed``."""
    base_seed = int(base_seed)
    index = int(index)
    if index < 0:
        raise ValueError(f"repetition index must be >= 0, got {index}")
    return _mix64(_mix64(base_seed) ^ _mix64((index + 1) * _GAMMA))


def unit_uniforms(seed: int, n: int) -> np.ndarray:
    """First ``n`` uniforms in [0, 1) of the SplitMix64 stream ``seed``."""
    n = int(n)
    if n < 0:
        raise ValueError(f"n must be >= 0, got {n}")
    with np.errstate(over="ignore"):
        x = np.arange(1, n + 1, dtype=np.uint64)
        x *= np.uint64(_GAMMA)
        x += np.uint64(int(seed) & _M64)
        x ^= x >> np.uint64(30)
        x *= np.uint64(0xBF58476D1CE4E5B9)
        x ^= x >> np.uint64(27)
        x *= np.uint64(0x94D049BB133111EB)
        x ^= x >> np.uint64(31)
    return (x >> np.uint64(11)) * 2.0**-53


# ---------------------------------------------------------------------------
# generators


def _check_prob(name: str, value: float) -> float:
    value = float(value)
    if not (0.0 <= value <= 1.0):
        raise ValueError(f"{name} must be a probability in [0, 1], got {value!r}")
    return value


@dataclass(frozen=True)
class IidBernoulli:
    """Independent 0/1 losses; action k suffers loss 1 with probs[k]."""

    probs: tuple[float, ...]

    def __init__(self, probs):
        probs = tuple(_check_prob(f"probs[{i}]", p) for i, p in enumerate(probs))
        if len(probs) < 2:
            raise ValueError(f"need at least 2 actions, got {len(probs)}")
        object.__setattr__(self, "probs", probs)

    @property
    def k(self) -> int:
        return len(self.probs)


@dataclass(frozen=True)
class Correlated:
    """Two actions whose 0/1 losses share a per-round hard/easy regime.

    A hard round (probability ``hard_prob``) gives action 1 loss 1 with
    probability 1 - p1/t and action 2 loss 1 with probability 1 - p2/t;
    an easy round gives loss 0 with those same probabilities.
    """

    hard_prob: float = 0.3
    p1: float = 0.01
    p2: float = 0.02

    def __post_init__(self):
        _check_prob("hard_prob", self.hard_prob)
        _check_prob("p1", self.p1)
        _check_prob("p2", self.p2)

    @property
    def k(self) -> int:
        return 2


@dataclass(frozen=True)
class AlternatingPair:
    """Deterministic two-action stream: odd rounds (a+eps, b-eps), even
    rounds (a-eps, b+eps).  Action 2's total falls behind by at least
    (b - a - 2*eps) per round pair."""

    a: float
    b: float
    eps: float

    def __post_init__(self):
        a, b, eps = float(self.a), float(self.b), float(self.eps)
        if eps < 0.0:
            raise ValueError(f"eps must be >= 0, got {eps!r}")
        if not (0.0 < a - eps and b + eps < 1.0):
            raise ValueError("need 0 < a - eps and b + eps < 1")
        if not (b - a > 2.0 * eps):
            raise ValueError("need b - a > 2*eps so action 1 stays ahead")

    @property
    def k(self) -> int:
        return 2


@dataclass(frozen=True)
class FtlKiller:
    """Deterministic leader trap: action 1 yields 0.5, 0, 1, 0, 1, ...;
    action 2 yields 0, 1, 0, 1, 0, ...  Leader play loses every round
    after the first."""

    @property
    def k(self) -> int:
        return 2


GeneratorSpec = Union[IidBernoulli, Correlated, AlternatingPair, FtlKiller]


def generate(spec: GeneratorSpec, horizon_t: int, seed: int) -> np.ndarray:
    """Loss stream of shape (horizon_t, K) for one repetition seed."""
    t_total = int(horizon_t)
    if t_total < 1:
        raise ValueError(f"horizon must be >= 1, got {horizon_t!r}")

    if isinstance(spec, IidBernoulli):
        k = spec.k
        u = unit_uniforms(seed, t_total * k).reshape(t_total, k)
        return (u < np.asarray(spec.probs)).astype(np.float64)

    if isinstance(spec, Correlated):
        u = unit_uniforms(seed, 3 * t_total).reshape(t_total, 3)
        tv = np.arange(1, t_total + 1, dtype=np.float64)
        q1 = spec.p1 / tv
        q2 = spec.p2 / tv
        hard = u[:, 0] < spec.hard_prob
        loss1 = u[:, 1] < np.where(hard, 1.0 - q1, q1)
        loss2 = u[:, 2] < np.where(hard, 1.0 - q2, q2)
        return np.column_stack([loss1, loss2]).astype(np.float64)

    if isinstance(spec, AlternatingPair):
        out = np.empty((t_total, 2), dtype=np.float64)
        out[0::2, 0] = spec.a + spec.eps
        out[0::2, 1] = spec.b - spec.eps
        out[1::2, 0] = spec.a - spec.eps
        out[1::2, 1] = spec.b + spec.eps
        return out

    if isinstance(spec, FtlKiller):
        out = np.zeros((t_total, 2), dtype=np.float64)
        out[0, 0] = 0.5
        out[2::2, 0] = 1.0  # rounds 3, 5, 7, ...
        out[1::2, 1] = 1.0  # rounds 2, 4, 6, ...
        return out

    raise TypeError(f"unknown generator spec {spec!r}")


# ---------------------------------------------------------------------------
# experiment harness


@dataclass(frozen=True)
class ExperimentConfig:
    """One experiment: a generator, a horizon, a strategy roster and a seed."""

    generator: GeneratorSpec
    horizon_t: int
    repetitions: int
    strategies: tuple[StrategyKind, ...]
    base_seed: int
    output_dir: Optional[Path] = None

    def __post_init__(self):
        if int(self.horizon_t) < 1:
            raise ValueError(f"horizon_t must be >= 1, got {self.horizon_t!r}")
        if int(self.repetitions) < 1:
            raise ValueError(f"repetitions must be >= 1, got {self.repetitions!r}")
        object.__setattr__(self, "strategies", tuple(self.strategies))
        if not self.strategies:
            raise ValueError("need at least one strategy")
        slugs = [kind.slug for kind in self.strategies]
        if len(set(slugs)) != len(slugs):
            raise ValueError(f"duplicate strategies in roster: {slugs}")
        seed = int(self.base_seed)
        if not (0 <= seed <= _M64):
            raise ValueError(f"base_seed must fit in 64 bits, got {self.base_seed!r}")
        if self.output_dir is not None:
            object.__setattr__(self, "output_dir", Path(self.output_dir))

    @property
    def k(self) -> int:
        return self.generator.k

    @property
    def slugs(self) -> list[str]:
        return [kind.slug for kind in self.strategies]


@dataclass
class AggregateResult:
    """Across-repetition aggregates, keyed by strategy slug."""

    config: ExperimentConfig
    mean_regret: dict[str, np.ndarray]
    mean_cum_loss: dict[str, np.ndarray]
    mean_eta: dict[str, np.ndarray]
    segment_events: dict[str, np.ndarray]
    final_regrets: dict[str, np.ndarray]
    segments_started: dict[str, np.ndarray]

    @property
    def slugs(self) -> list[str]:
        return self.config.slugs

    @property
    def horizon(self) -> int:
        return int(self.config.horizon_t)

    @property
    def repetitions(self) -> int:
        return int(self.config.repetitions)


@dataclass(frozen=True)
class SegmentStats:
    mean: float
    histogram: dict[int, int]


def _resolve_threads(threads: Optional[int]) -> int:
    if threads is None:
        env = os.environ.get(THREADS_ENV)
        if env is not None:
            try:
                threads = int(env)
            except ValueError:
                raise ValueError(f"{THREADS_ENV} must be an integer, got {env!r}")
        else:
            threads = os.cpu_count() or 1
    threads = int(threads)
    if threads < 1:
        raise ValueError(f"thread count must be >= 1, got {threads}")
    return threads


def _simulate_repetition(config: ExperimentConfig, rep: int):
    """One repetition: every strategy on the repetition's stream.

    Returns compact per-strategy arrays; must stay a module-level function
    so process pools can pickle it.
    """
    stream = generate(config.generator, config.horizon_t, derive_seed(config.base_seed, rep))
    out = []
    for kind in config.strategies:
        trace = run(kind, stream)
        out.append(
            (trace.regret, trace.cum_agent_loss, trace.eta, tuple(trace.segment_starts))
        )
    return out


def run_experiment(
    config: ExperimentConfig, *, threads: Optional[int] = None
) -> AggregateResult:
    """All repetitions of an experiment, merged in repetition order.

    The merge order (and therefore every float in the output) does not
    depend on ``threads``; the pool only changes wall-clock time.  When
    ``config.output_dir`` is set, trace and summary CSVs are written there.
    """
    threads = _resolve_threads(threads)
    reps = int(config.repetitions)
    t_total = int(config.horizon_t)
    slugs = config.slugs

    sum_regret = {s: np.zeros(t_total) for s in slugs}
    sum_cum_loss = {s: np.zeros(t_total) for s in slugs}
    sum_eta = {s: np.zeros(t_total) for s in slugs}
    seg_events = {s: np.zeros(t_total, dtype=np.int64) for s in slugs}
    finals = {s: [] for s in slugs}
    seg_counts = {s: [] for s in slugs}

    worker = partial(_simulate_repetition, config)
    if threads == 1 or reps == 1:
        results = map(worker, range(reps))
        pool = None
    else:
        pool = ProcessPoolExecutor(max_workers=min(threads, reps))
        chunk = max(1, -(-reps // (4 * threads)))
        results = pool.map(worker, range(reps), chunksize=chunk)

    try:
        for per_strategy in results:  # arrives in repetition order
            for slug, (regret, cum_loss, eta, starts) in zip(slugs, per_strategy):
                sum_regret[slug] += regret
                sum_cum_loss[slug] += cum_loss
                sum_eta[slug] += eta
                seg_events[slug][np.asarray(starts, dtype=np.int64) - 1] += 1
                finals[slug].append(float(regret[-1]))
                seg_counts[slug].append(len(starts))
    finally:
        if pool is not None:
            pool.shutdown()

    result = AggregateResult(
        config=config,
        mean_regret={s: sum_regret[s] / reps for s in slugs},
        mean_cum_loss={s: sum_cum_loss[s] / reps for s in slugs},
        mean_eta={s: sum_eta[s] / reps for s in slugs},
        segment_events=seg_events,
        final_regrets={s: np.asarray(finals[s]) for s in slugs},
        segments_started={s: np.asarray(seg_counts[s], dtype=np.int64) for s in slugs},
    )

    if config.output_dir is not None:
        from .reports import write_summary_csv, write_trace_csvs

        write_trace_csvs(result, config.output_dir)
        write_summary_csv(result, config.output_dir)
    return result


def segment_statistics(result: AggregateResult, strategy) -> SegmentStats:
    """Mean and histogram of segments started by a restart strategy.

    ``strategy`` may be the kind record or its slug; it must name an
    AdaHedge or DoublingHedge entry present in the result.
    """
    slug = strategy if isinstance(strategy, str) else strategy.slug
    for kind in result.config.strategies:
        if kind.slug == slug:
            if not isinstance(kind, (AdaHedge, DoublingHedge)):
                raise ValueError(f"{slug} is not a restart (doubling-type) strategy")
            counts = result.segments_started[slug]
            histogram: dict[int, int] = {}
            for c in counts.tolist():
                histogram[c] = histogram.get(c, 0) + 1
            return SegmentStats(
                mean=float(counts.sum() / len(counts)),
                histogram=dict(sorted(histogram.items())),
            )
    raise ValueError(f"strategy {slug!r} not present in this result")
