"""Wealth processes and betting strategies for sequential tests.

A test is a gambler.  Starting from unit capital, at each round it
stakes a fraction v of its wealth on a payoff kappa in (-1, 1) whose
conditional mean is zero under the null, so the wealth process is a
nonnegative martingale and Ville's inequality caps the chance of the
wealth ever reaching 1/alpha at alpha.  Crossing 1/alpha is therefore a
level-alpha rejection, valid at any data-dependent stopping time.

The default strategy is Online Newton Step, which adapts the betting
fraction to past payoffs and achieves wealth within a log factor of the
best constant fraction in hindsight.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

__all__ = [
    "ONS_SCALE",
    "BettingStrategy",
    "OnsState",
    "WealthState",
    "ons_init",
    "ons_update",
    "wealth_init",
    "wealth_step",
]

# Step scale 2 / (2 - log 3) from the ONS regret analysis.
ONS_SCALE = 2.0 / (2.0 - math.log(3.0))


@dataclass(frozen=True)
class BettingStrategy:
    """How the betting fraction is chosen each round.

    variant "ons" adapts online; "constant" always bets ``fraction``,
    which must lie in [0, 1].
    """

    variant: str = "ons"
    fraction: float = 0.5

    def __post_init__(self) -> None:
        if self.variant not in ("ons", "constant"):
            raise ValueError(f"unknown betting variant {self.variant!r}")
        if self.variant == "constant" and not 0.0 <= self.fraction <= 1.0:
            raise ValueError("constant betting fraction must lie in [0, 1]")


@dataclass(frozen=True)
class OnsState:
    """Accumulated curvature ``a`` and current fraction ``v``."""

    a: float = 1.0
    v: float = 0.0


def ons_init() -> OnsState:
    """Fresh ONS state: a0 = 1, first bet v1 = 0."""
    return OnsState(a=1.0, v=0.0)


def _check_payoff(kappa: float) -> float:
    kappa = float(kappa)
    if not -1.0 < kappa < 1.0:
        raise ValueError(f"payoff must lie strictly in (-1, 1), got {kappa}")
    return kappa


def ons_update(state: OnsState, kappa: float) -> OnsState:
    """Advance the ONS fraction after observing one payoff.

    z = kappa / (1 + v * kappa) is the negative gradient of the round's
    log-wealth loss; the curvature accumulator and fraction become
    a' = a + z^2 and v' = clip(v + ONS_SCALE * z / a', [0, 1]).
    """
    kappa = _check_payoff(kappa)
    z = kappa / (1.0 + state.v * kappa)
    a = state.a + z * z
    v = state.v + ONS_SCALE * z / a
    v = min(1.0, max(0.0, v))
    return OnsState(a=a, v=v)


@dataclass(frozen=True)
class WealthState:
    """One gambler's running log-wealth and rejection status.

    ``rejected_at`` is the 1-based step at which log-wealth first
    reached log(1/alpha), or None while the test is still running.
    """

    alpha: float
    strategy: BettingStrategy = field(default_factory=BettingStrategy)
    log_wealth: float = 0.0
    step: int = 0
    ons: OnsState = field(default_factory=ons_init)
    rejected_at: int | None = None

    def __post_init__(self) -> None:
        if not 0.0 < self.alpha < 1.0:
            raise ValueError("alpha must lie in (0, 1)")

    @property
    def rejected(self) -> bool:
        return self.rejected_at is not None

    @property
    def threshold(self) -> float:
        """Log-wealth level at which the test rejects."""
        return -math.log(self.alpha)

    def bet_fraction(self) -> float:
        """Fraction staked on the next payoff."""
        if self.strategy.variant == "constant":
            return self.strategy.fraction
        return self.ons.v


def wealth_init(alpha: float, strategy: BettingStrategy | None = None) -> WealthState:
    """Unit starting capital (log-wealth 0) with the given strategy."""
    return WealthState(alpha=alpha, strategy=strategy or BettingStrategy())


def wealth_step(state: WealthState, kappa: float) -> WealthState:
    """Stake the current fraction on one payoff and settle the bet.

    Returns the updated state; raises if the payoff leaves (-1, 1).
    Wealth stays positive because the fraction is in [0, 1] and
    |kappa| < 1.  Betting may continue past the rejection threshold
    (the trajectory is then checked against stricter multiplicity
    thresholds); ``rejected_at`` stays frozen at the first crossing.
    """
    kappa = _check_payoff(kappa)
    v = state.bet_fraction()
    log_wealth = state.log_wealth + math.log1p(v * kappa)
    step = state.step + 1
    rejected_at = state.rejected_at
    if rejected_at is None and log_wealth >= state.threshold:
        rejected_at = step
    ons = ons_update(state.ons, kappa) if state.strategy.variant == "ons" else state.ons
    return replace(
        state,
        log_wealth=log_wealth,
        step=step,
        ons=ons,
        rejected_at=rejected_at,
    )
