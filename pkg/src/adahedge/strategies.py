"""Sequential decision strategies over K actions with [0, 1] losses.

Every strategy is a small state machine: ``act()`` returns the probability
vector to play in the coming round, ``observe(loss)`` feeds the realised
losses back.  ``run()`` drives one strategy down a whole loss stream and
records the per-round trace (losses, regret, learning rate, segment index)
that the simulation harness aggregates.

The restart-based strategies (AdaHedge, DoublingHedge) apply a pending
segment rollover at the start of a round, before weights are produced, so
a depletion in the final observed round never opens a segment that plays
no rounds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from . import bounds
from .core import (
    LOSS_RANGE_TOL,
    CumulativeLoss,
    WeightSnapshot,
    _coerce_losses,
    hedge_and_mix_loss,
    log_weights_from_totals,
)

__all__ = [
    "FollowTheLeader",
    "FixedHedge",
    "OracleHedge",
    "DoublingHedge",
    "AdaHedge",
    "VariableHedge",
    "StrategyKind",
    "Strategy",
    "RegretTrace",
    "init",
    "run",
    "oracle_eta",
    "as_loss_array",
]

_NEG_INF = float("-inf")


# ---------------------------------------------------------------------------
# strategy kinds (frozen parameter records)


@dataclass(frozen=True)
class FollowTheLeader:
    """Uniform play over the actions with the smallest cumulative loss."""

    @property
    def slug(self) -> str:
        return "ftl"


@dataclass(frozen=True)
class FixedHedge:
    """Exponential weights at a constant learning rate ``eta``."""

    eta: float

    def __post_init__(self):
        if not (math.isfinite(self.eta) and self.eta > 0.0):
            raise ValueError(f"eta must be positive and finite, got {self.eta!r}")

    @property
    def slug(self) -> str:
        return f"fixed_hedge_eta{self.eta:g}"


@dataclass(frozen=True)
class OracleHedge:
    """Fixed-rate Hedge tuned on the stream's final best loss (hindsight)."""

    @property
    def slug(self) -> str:
        return "oracle_hedge"


@dataclass(frozen=True)
class DoublingHedge:
    """Restarts with eta divided by ``phi`` once the best action's loss
    inside the current segment exhausts the segment's loss budget."""

    phi: float = 2.0

    def __post_init__(self):
        if not (math.isfinite(self.phi) and self.phi > 1.0):
            raise ValueError(f"phi must be finite and > 1, got {self.phi!r}")

    @property
    def slug(self) -> str:
        return f"doubling_hedge_phi{self.phi:g}"


@dataclass(frozen=True)
class AdaHedge:
    """Restarts with eta divided by ``phi`` once the cumulative gap between
    expected and mix loss depletes the budget (1/eta + 1/(e-1)) * ln K."""

    phi: float = 2.0

    def __post_init__(self):
        if not (math.isfinite(self.phi) and self.phi > 1.0):
            raise ValueError(f"phi must be finite and > 1, got {self.phi!r}")

    @property
    def slug(self) -> str:
        return f"adahedge_phi{self.phi:g}"


@dataclass(frozen=True)
class VariableHedge:
    """Hedge at the decreasing rate min(1, sqrt(2 ln K / L*)) where L* is
    the best cumulative loss seen so far (1 while L* is zero)."""

    @property
    def slug(self) -> str:
        return "variable_hedge"


StrategyKind = Union[
    FollowTheLeader, FixedHedge, OracleHedge, DoublingHedge, AdaHedge, VariableHedge
]


def oracle_eta(lstar: float, k: int) -> float:
    """Hindsight tuning sqrt(2 ln K / L*); 1 when the best loss is zero."""
    lstar = float(lstar)
    if not (math.isfinite(lstar) and lstar >= 0.0):
        raise ValueError(f"lstar must be >= 0, got {lstar!r}")
    if k < 2:
        raise ValueError(f"need at least 2 actions, got {k}")
    if lstar == 0.0:
        return 1.0
    return math.sqrt(2.0 * math.log(k) / lstar)


# ---------------------------------------------------------------------------
# strategy state machines


class Strategy:
    """Common state: cumulative losses, round count, segment bookkeeping."""

    def __init__(self, kind: StrategyKind, k: int):
        if int(k) != k or k < 2:
            raise ValueError(f"need an integer number of actions >= 2, got {k!r}")
        self.kind = kind
        self.k = int(k)
        self._totals = [0.0] * self.k
        self._rounds = 0
        self.segment = 1
        self.segment_starts = [1]
        self.delta_sum = 0.0
        self.eta = math.inf

    # -- public API ---------------------------------------------------------

    def act(self) -> WeightSnapshot:
        """Weights for the coming round (applies any pending rollover)."""
        self._pre_act()
        return WeightSnapshot(tuple(self._log_weights_list()))

    def observe(self, loss) -> "Strategy":
        """Consume one round of losses; mutates and returns this state."""
        row = _coerce_losses(loss, self.k)
        self._pre_act()
        self._observe(row)
        return self

    @property
    def cum(self) -> CumulativeLoss:
        return CumulativeLoss(tuple(self._totals), self._rounds)

    @property
    def rounds(self) -> int:
        return self._rounds

    @property
    def log_weights(self) -> tuple[float, ...]:
        self._pre_act()
        return tuple(self._log_weights_list())

    @property
    def weights(self) -> tuple[float, ...]:
        self._pre_act()
        return tuple(self._act_weights())

    @property
    def segments_started(self) -> int:
        return len(self.segment_starts)

    # -- internal fast path (plain float lists, no validation) --------------

    def _pre_act(self):
        pass

    def _act_weights(self) -> list[float]:
        raise NotImplementedError

    def _log_weights_list(self) -> list[float]:
        raise NotImplementedError

    def _observe(self, row: list[float]) -> tuple[float, float]:
        raise NotImplementedError


class _FtlState(Strategy):
    def __init__(self, kind, k):
        super().__init__(kind, k)
        self._w = [1.0 / k] * k
        self._fresh = 0

    def _pre_act(self):
        if self._fresh != self._rounds:
            tot = self._totals
            m = min(tot)
            n = 0
            for v in tot:
                if v == m:
                    n += 1
            inv = 1.0 / n
            self._w = [inv if v == m else 0.0 for v in tot]
            self._fresh = self._rounds

    def _act_weights(self):
        return self._w

    def _log_weights_list(self):
        return [math.log(v) if v > 0.0 else _NEG_INF for v in self._w]

    def _observe(self, row):
        w = self._w
        hedge = 0.0
        for a, b in zip(w, row):
            hedge += a * b
        tot = self._totals
        for i, v in enumerate(row):
            tot[i] += v
        self._rounds += 1
        return hedge, 0.0


class _ExpWeightsState(Strategy):
    """Shared upkeep for all exponential-weights strategies: weights are
    recomputed from per-action totals through ``log_weights_from_totals``,
    the same kernel ``hedge_weights`` uses, so the two agree bitwise."""

    def __init__(self, kind, k):
        super().__init__(kind, k)
        self._lw = [-math.log(k)] * k
        self._w = [1.0 / k] * k

    def _act_weights(self):
        return self._w

    def _log_weights_list(self):
        return self._lw

    def _set_weights_from(self, totals):
        lw = log_weights_from_totals(totals, self.eta)
        self._lw = lw
        self._w = [math.exp(v) for v in lw]


class _FixedHedgeState(_ExpWeightsState):
    def __init__(self, kind, k, eta):
        super().__init__(kind, k)
        self.eta = eta

    def _observe(self, row):
        hedge, mix = hedge_and_mix_loss(self._w, row, self.eta)
        delta = hedge - mix
        self.delta_sum += delta
        tot = self._totals
        for i, v in enumerate(row):
            tot[i] += v
        self._rounds += 1
        self._set_weights_from(tot)
        return hedge, delta


class _AdaHedgeState(_ExpWeightsState):
    def __init__(self, kind, k):
        super().__init__(kind, k)
        self.phi = kind.phi
        self.eta = 1.0  # phi ** (1 - segment) with segment = 1
        self.budget = bounds.budget(self.eta, k)
        self._seg_totals = [0.0] * k

    def _pre_act(self):
        if self.delta_sum >= self.budget:
            self.segment += 1
            self.eta = self.phi ** (1 - self.segment)
            self.budget = bounds.budget(self.eta, self.k)
            self.delta_sum = 0.0
            self._seg_totals = [0.0] * self.k
            self._set_weights_from(self._seg_totals)
            self.segment_starts.append(self._rounds + 1)

    def _observe(self, row):
        hedge, mix = hedge_and_mix_loss(self._w, row, self.eta)
        delta = hedge - mix
        self.delta_sum += delta
        tot = self._totals
        seg = self._seg_totals
        for i, v in enumerate(row):
            tot[i] += v
            seg[i] += v
        self._rounds += 1
        self._set_weights_from(seg)
        return hedge, delta


class _DoublingHedgeState(_ExpWeightsState):
    def __init__(self, kind, k):
        super().__init__(kind, k)
        self.phi = kind.phi
        self.eta = 1.0
        self._two_lnk = 2.0 * math.log(k)
        self.lstar_budget = self._two_lnk  # 2 ln K / eta**2 at eta = 1
        self._seg_totals = [0.0] * k

    def _pre_act(self):
        if min(self._seg_totals) >= self.lstar_budget:
            self.segment += 1
            self.eta = self.phi ** (1 - self.segment)
            self.lstar_budget = self._two_lnk / (self.eta * self.eta)
            self.delta_sum = 0.0
            self._seg_totals = [0.0] * self.k
            self._set_weights_from(self._seg_totals)
            self.segment_starts.append(self._rounds + 1)

    def _observe(self, row):
        hedge, mix = hedge_and_mix_loss(self._w, row, self.eta)
        delta = hedge - mix
        self.delta_sum += delta
        tot = self._totals
        seg = self._seg_totals
        for i, v in enumerate(row):
            tot[i] += v
            seg[i] += v
        self._rounds += 1
        self._set_weights_from(seg)
        return hedge, delta


class _VariableHedgeState(_ExpWeightsState):
    def __init__(self, kind, k):
        super().__init__(kind, k)
        self._two_lnk = 2.0 * math.log(k)
        self.eta = 1.0
        self._fresh = -1

    def _pre_act(self):
        if self._fresh != self._rounds:
            lstar = min(self._totals)
            if lstar <= 0.0:
                self.eta = 1.0
            else:
                self.eta = min(1.0, math.sqrt(self._two_lnk / lstar))
            self._set_weights_from(self._totals)
            self._fresh = self._rounds

    def _observe(self, row):
        hedge, mix = hedge_and_mix_loss(self._w, row, self.eta)
        delta = hedge - mix
        self.delta_sum += delta
        tot = self._totals
        for i, v in enumerate(row):
            tot[i] += v
        self._rounds += 1
        # weights are refreshed lazily at the next act, when the new
        # learning rate for that round is known
        return hedge, delta


def init(kind: StrategyKind, k: int) -> Strategy:
    """Fresh state for ``kind`` over ``k`` actions, uniform first-round play."""
    if isinstance(kind, FollowTheLeader):
        return _FtlState(kind, k)
    if isinstance(kind, FixedHedge):
        return _FixedHedgeState(kind, k, kind.eta)
    if isinstance(kind, OracleHedge):
        raise ValueError(
            "OracleHedge needs the stream's final best loss; use run(), or "
            "FixedHedge(oracle_eta(lstar, k)) once lstar is known"
        )
    if isinstance(kind, DoublingHedge):
        return _DoublingHedgeState(kind, k)
    if isinstance(kind, AdaHedge):
        return _AdaHedgeState(kind, k)
    if isinstance(kind, VariableHedge):
        return _VariableHedgeState(kind, k)
    raise TypeError(f"unknown strategy kind {kind!r}")


# ---------------------------------------------------------------------------
# whole-stream driver


def as_loss_array(losses) -> np.ndarray:
    """Coerce a loss stream to a (T, K) float array and validate it."""
    if isinstance(losses, np.ndarray):
        arr = np.asarray(losses, dtype=np.float64)
    else:
        rows = [
            list(row.losses) if hasattr(row, "losses") else row for row in losses
        ]
        arr = np.asarray(rows, dtype=np.float64)
    if arr.ndim != 2:
        raise ValueError(f"loss stream must be 2-d (rounds x actions), got shape {arr.shape}")
    t_total, k = arr.shape
    if t_total < 1:
        raise ValueError("loss stream is empty")
    if k < 2:
        raise ValueError(f"need at least 2 actions, got {k}")
    if not np.isfinite(arr).all():
        raise ValueError("loss stream contains non-finite values")
    if (arr < -LOSS_RANGE_TOL).any() or (arr > 1.0 + LOSS_RANGE_TOL).any():
        bad = arr[(arr < -LOSS_RANGE_TOL) | (arr > 1.0 + LOSS_RANGE_TOL)][0]
        raise ValueError(f"loss {bad!r} outside [0, 1] by more than {LOSS_RANGE_TOL}")
    return arr


@dataclass
class RegretTrace:
    """Per-round record of one strategy on one loss stream.

    ``cum_gap`` is the strategy's own cumulative expected-vs-mix-loss gap;
    for restart strategies it resets with each segment, and for
    FollowTheLeader it is identically zero (``eta`` is recorded as inf
    there: leader play is the infinite-rate limit).
    """

    kind: StrategyKind
    k: int
    agent_loss: np.ndarray
    cum_agent_loss: np.ndarray
    best_cum_loss: np.ndarray
    regret: np.ndarray
    segment: np.ndarray
    eta: np.ndarray
    cum_gap: np.ndarray
    segment_starts: list[int]

    @property
    def horizon(self) -> int:
        return len(self.agent_loss)

    @property
    def final_regret(self) -> float:
        return float(self.regret[-1])

    @property
    def segments_started(self) -> int:
        return len(self.segment_starts)


def run(kind: StrategyKind, losses) -> RegretTrace:
    """Play ``kind`` against a whole loss stream and trace every round.

    A pure function of its arguments: identical inputs produce bitwise
    identical traces.  For OracleHedge the stream's final best cumulative
    loss is computed first and a fixed-rate Hedge at oracle_eta is run.
    """
    arr = as_loss_array(losses)
    t_total, k = arr.shape
    if isinstance(kind, OracleHedge):
        lstar = float(arr.sum(axis=0).min())
        strat = init(FixedHedge(oracle_eta(lstar, k)), k)
    else:
        strat = init(kind, k)

    rows = arr.tolist()
    seg_l: list[int] = []
    eta_l: list[float] = []
    al_l: list[float] = []
    cal_l: list[float] = []
    bl_l: list[float] = []
    rg_l: list[float] = []
    gap_l: list[float] = []
    seg_app = seg_l.append
    eta_app = eta_l.append
    al_app = al_l.append
    cal_app = cal_l.append
    bl_app = bl_l.append
    rg_app = rg_l.append
    gap_app = gap_l.append

    pre_act = strat._pre_act
    observe = strat._observe
    totals = strat._totals
    cum_agent = 0.0
    for row in rows:
        pre_act()
        seg_app(strat.segment)
        eta_app(strat.eta)
        hedge, _ = observe(row)
        cum_agent += hedge
        best = min(totals)
        al_app(hedge)
        cal_app(cum_agent)
        bl_app(best)
        rg_app(cum_agent - best)
        gap_app(strat.delta_sum)

    return RegretTrace(
        kind=kind,
        k=k,
        agent_loss=np.asarray(al_l),
        cum_agent_loss=np.asarray(cal_l),
        best_cum_loss=np.asarray(bl_l),
        regret=np.asarray(rg_l),
        segment=np.asarray(seg_l, dtype=np.int64),
        eta=np.asarray(eta_l),
        cum_gap=np.asarray(gap_l),
        segment_starts=list(strat.segment_starts),
    )
