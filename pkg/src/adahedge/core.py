"""Scalar primitives for exponential-weights (Hedge) prediction.

Everything works in the log domain on plain Python floats.  The number of
actions K is small (>= 2, typically <= 16) while horizons reach 1e4-1e5
rounds, so scalar ``math.exp`` loops beat vectorised calls by a wide margin
and keep one shared code path between the sequential update used by the
strategies and the batch form computed from cumulative losses.

Tolerances used across the package and its test suite are fixed here:
``PER_OP_TOL`` for single operation chains, ``ACCUMULATED_TOL`` for
quantities accumulated over many rounds, and ``LOSS_RANGE_TOL`` for how far
a loss may stray outside [0, 1] before it is rejected (never clamped).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence, Union

__all__ = [
    "PER_OP_TOL",
    "ACCUMULATED_TOL",
    "LOSS_RANGE_TOL",
    "LossVector",
    "CumulativeLoss",
    "WeightSnapshot",
    "RoundReport",
    "hedge_weights",
    "mix_loss",
    "mixability_gap",
    "posterior_update",
    "log_marginal_likelihood",
    "log_weights_from_totals",
    "hedge_and_mix_loss",
    "argmin_set",
    "argmax_set",
]

PER_OP_TOL = 1e-12
ACCUMULATED_TOL = 1e-9
LOSS_RANGE_TOL = 1e-9

_NEG_INF = float("-inf")


def _check_eta(eta: float) -> float:
    eta = float(eta)
    if not math.isfinite(eta) or eta <= 0.0:
        raise ValueError(f"learning rate must be positive and finite, got {eta!r}")
    return eta


def _coerce_losses(values, k: int | None = None) -> list[float]:
    """Validate one round of losses and return them as a plain float list."""
    if isinstance(values, LossVector):
        out = list(values.losses)
    else:
        out = [float(v) for v in values]
    if len(out) < 2:
        raise ValueError(f"need at least 2 actions, got {len(out)}")
    if k is not None and len(out) != k:
        raise ValueError(f"expected {k} losses, got {len(out)}")
    lo, hi = -LOSS_RANGE_TOL, 1.0 + LOSS_RANGE_TOL
    for v in out:
        # NaN fails both comparisons, so it is rejected here too.
        if not (lo <= v <= hi):
            raise ValueError(f"loss {v!r} outside [0, 1] by more than {LOSS_RANGE_TOL}")
    return out


def _coerce_weights(values) -> list[float]:
    if isinstance(values, WeightSnapshot):
        return list(values.weights)
    out = [float(v) for v in values]
    if len(out) < 2:
        raise ValueError(f"need at least 2 actions, got {len(out)}")
    for v in out:
        if not (0.0 <= v <= 1.0 + PER_OP_TOL):
            raise ValueError(f"weight {v!r} is not a probability")
    if abs(math.fsum(out) - 1.0) > ACCUMULATED_TOL:
        raise ValueError(f"weights sum to {math.fsum(out)!r}, not 1")
    return out


@dataclass(frozen=True)
class LossVector:
    """One round of losses, one entry per action, each in [0, 1]."""

    losses: tuple[float, ...]

    def __init__(self, losses: Iterable[float]):
        object.__setattr__(self, "losses", tuple(_coerce_losses(losses)))

    @property
    def k(self) -> int:
        return len(self.losses)


@dataclass(frozen=True)
class CumulativeLoss:
    """Per-action loss totals after ``rounds`` rounds."""

    totals: tuple[float, ...]
    rounds: int

    def __init__(self, totals: Iterable[float], rounds: int):
        totals = tuple(float(v) for v in totals)
        rounds = int(rounds)
        if len(totals) < 2:
            raise ValueError(f"need at least 2 actions, got {len(totals)}")
        if rounds < 0:
            raise ValueError(f"rounds must be nonnegative, got {rounds}")
        hi = rounds + (rounds + 1) * LOSS_RANGE_TOL
        for v in totals:
            if not (-LOSS_RANGE_TOL * (rounds + 1) <= v <= hi):
                raise ValueError(
                    f"total {v!r} impossible after {rounds} rounds of [0, 1] losses"
                )
        object.__setattr__(self, "totals", totals)
        object.__setattr__(self, "rounds", rounds)

    @classmethod
    def zero(cls, k: int) -> "CumulativeLoss":
        return cls((0.0,) * k, 0)

    @property
    def k(self) -> int:
        return len(self.totals)

    @property
    def best(self) -> float:
        """Smallest total so far (the best action's cumulative loss)."""
        return min(self.totals)

    def updated(self, loss) -> "CumulativeLoss":
        vals = _coerce_losses(loss, self.k)
        return CumulativeLoss(
            tuple(t + v for t, v in zip(self.totals, vals)), self.rounds + 1
        )


@dataclass(frozen=True)
class WeightSnapshot:
    """A probability vector over actions, stored as log weights.

    Zero weights are represented by -inf log weights; NaN and +inf are
    rejected, and the weights must sum to 1 within ``PER_OP_TOL``.
    """

    log_weights: tuple[float, ...]

    def __init__(self, log_weights: Iterable[float]):
        lw = tuple(float(v) for v in log_weights)
        if len(lw) < 2:
            raise ValueError(f"need at least 2 actions, got {len(lw)}")
        for v in lw:
            if math.isnan(v) or v == math.inf:
                raise ValueError(f"log weight {v!r} is not allowed")
        total = math.fsum(math.exp(v) for v in lw)
        if abs(total - 1.0) > PER_OP_TOL:
            raise ValueError(f"weights sum to {total!r}, not 1 within {PER_OP_TOL}")
        object.__setattr__(self, "log_weights", lw)

    @classmethod
    def uniform(cls, k: int) -> "WeightSnapshot":
        if k < 2:
            raise ValueError(f"need at least 2 actions, got {k}")
        return cls((-math.log(k),) * k)

    @classmethod
    def from_weights(cls, weights: Iterable[float]) -> "WeightSnapshot":
        ws = [float(v) for v in weights]
        if len(ws) < 2:
            raise ValueError(f"need at least 2 actions, got {len(ws)}")
        total = math.fsum(ws)
        if not math.isfinite(total) or total <= 0.0 or any(v < 0.0 for v in ws):
            raise ValueError("weights must be nonnegative with a positive sum")
        return cls(
            tuple(math.log(v / total) if v > 0.0 else _NEG_INF for v in ws)
        )

    @property
    def k(self) -> int:
        return len(self.log_weights)

    @property
    def weights(self) -> tuple[float, ...]:
        return tuple(math.exp(v) for v in self.log_weights)


@dataclass(frozen=True)
class RoundReport:
    """Expected loss, mix loss and their gap for one round at rate eta.

    The gap ``delta = hedge_loss - mix_loss`` always lies in
    [0, eta/8] (up to ``PER_OP_TOL``); the constructor enforces this.
    """

    hedge_loss: float
    mix_loss: float
    delta: float
    eta: float

    def __post_init__(self):
        if abs(self.delta - (self.hedge_loss - self.mix_loss)) > PER_OP_TOL:
            raise ValueError("delta does not equal hedge_loss - mix_loss")
        if not (-PER_OP_TOL <= self.delta <= self.eta / 8.0 + PER_OP_TOL):
            raise ValueError(
                f"gap {self.delta!r} outside [0, eta/8] for eta={self.eta!r}"
            )


# ---------------------------------------------------------------------------
# low-level kernels (shared by the typed operations and the strategy loops)


def log_weights_from_totals(totals: Sequence[float], eta: float) -> list[float]:
    """Normalised log weights  -eta*L_k - log(sum_j exp(-eta*L_j)).

    Max-shifted so the result stays finite for eta*L up to at least 1e5:
    the largest scaled value is pinned at 0 before exponentiation.
    """
    best = min(totals)
    scaled = [-eta * (t - best) for t in totals]
    s = 0.0
    for v in scaled:
        s += math.exp(v)
    log_norm = math.log(s)
    return [v - log_norm for v in scaled]


def hedge_and_mix_loss(
    weights: Sequence[float], losses: Sequence[float], eta: float
) -> tuple[float, float]:
    """Return (w . l, -(1/eta) * log(w . exp(-eta*l))) for one round.

    The mix loss is evaluated with the losses shifted by their minimum, so
    no exponential ever overflows; for very large eta it degrades
    gracefully toward min(l).  The sum is accumulated as expm1 terms and
    taken through log1p, because at small eta the plain form loses the
    log to rounding and the division by eta blows that up: the gap
    (expected minus mix) is itself O(eta), so an absolute log error of
    1e-16 would already swamp it near eta = 1e-6.  Weights are divided by
    their exact float sum so a vector that is 1e-12 off normalisation
    cannot shift the mix by 1e-12/eta.
    """
    m = min(losses)
    hedge = 0.0
    wsum = 0.0
    z = 0.0
    for w, l in zip(weights, losses):
        hedge += w * l
        wsum += w
        z += w * math.expm1(-eta * (l - m))
    return hedge / wsum, m - math.log1p(z / wsum) / eta


def argmin_set(values: Sequence[float]) -> list[int]:
    """Indices of all entries equal to the minimum (exact ties)."""
    m = min(values)
    return [i for i, v in enumerate(values) if v == m]


def argmax_set(values: Sequence[float]) -> list[int]:
    """Indices of all entries equal to the maximum (exact ties)."""
    m = max(values)
    return [i for i, v in enumerate(values) if v == m]


# ---------------------------------------------------------------------------
# typed operations


def hedge_weights(cum: CumulativeLoss, eta: float) -> WeightSnapshot:
    """Exponential weights  w_k proportional to exp(-eta * L_k).

    Args:
        cum: cumulative losses after any number of rounds.
        eta: positive, finite learning rate.
    """
    eta = _check_eta(eta)
    return WeightSnapshot(log_weights_from_totals(cum.totals, eta))


def mix_loss(weights, loss, eta: float) -> float:
    """Mix loss -(1/eta) * ln(w . exp(-eta*l)) for one round.

    Lies between min(l) and the expected loss w . l.  Accepts a
    WeightSnapshot or a plain probability vector for ``weights``.
    """
    eta = _check_eta(eta)
    w = _coerce_weights(weights)
    l = _coerce_losses(loss, len(w))
    return hedge_and_mix_loss(w, l, eta)[1]


def mixability_gap(weights, loss, eta: float) -> RoundReport:
    """Expected loss minus mix loss for one round; the gap is in [0, eta/8]."""
    eta = _check_eta(eta)
    w = _coerce_weights(weights)
    l = _coerce_losses(loss, len(w))
    hedge, mix = hedge_and_mix_loss(w, l, eta)
    return RoundReport(hedge, mix, hedge - mix, eta)


def posterior_update(weights, loss, eta: float) -> WeightSnapshot:
    """One multiplicative update  w_k <- w_k * exp(-eta*l_k), renormalised.

    Performed in the log domain with a max shift; applying this
    sequentially from uniform weights matches ``hedge_weights`` on the
    summed losses up to floating-point rounding.
    """
    eta = _check_eta(eta)
    if isinstance(weights, WeightSnapshot):
        lw = list(weights.log_weights)
    else:
        lw = WeightSnapshot.from_weights(weights).log_weights
    l = _coerce_losses(loss, len(lw))
    shifted = [a - eta * b for a, b in zip(lw, l)]
    m = max(shifted)
    if m == _NEG_INF:
        raise ValueError("all weights are zero after the update")
    s = 0.0
    for v in shifted:
        s += math.exp(v - m)
    log_norm = m + math.log(s)
    return WeightSnapshot(tuple(v - log_norm for v in shifted))


def log_marginal_likelihood(cum: CumulativeLoss, eta: float) -> float:
    """ln of the uniform mixture (1/K) * sum_k exp(-eta * L_k).

    Equals the sum over past rounds of ln(w_t . exp(-eta*l_t)) when the
    weights follow the exponential-weights updates, and is always at
    least -eta*min(L) - ln(K).
    """
    eta = _check_eta(eta)
    best = min(cum.totals)
    s = 0.0
    for t in cum.totals:
        s += math.exp(-eta * (t - best))
    return -eta * best + math.log(s) - math.log(cum.k)
