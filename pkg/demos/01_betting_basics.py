"""A first look at testing by betting.

A sequential test is a gambler who starts with one unit of capital and,
at each round, stakes a fraction of it on a payoff whose expectation is
zero if the null hypothesis is true.  Under the null the capital is a
nonnegative martingale, so by Ville's inequality it exceeds 1/alpha
with probability at most alpha; the moment it does, we can stop and
reject.  Under an alternative a good betting strategy grows the capital
exponentially, and the crossing time tells us how blatant the signal
was.

This demo bets on a biased coin with the Online Newton Step strategy,
which needs no tuning: it learns the betting fraction from the payoffs
it has already seen.
"""

import numpy as np

from betkit.betting import wealth_init, wealth_step


def play(bias: float, alpha: float = 0.05, horizon: int = 3000, seed: int = 0):
    """Bet on payoffs drawn as +-0.9 coin flips with the given bias."""
    rng = np.random.default_rng(seed)
    state = wealth_init(alpha)
    for _ in range(horizon):
        kappa = 0.9 if rng.random() < 0.5 + bias else -0.9
        state = wealth_step(state, kappa)
        if state.rejected:
            break
    return state


def main() -> None:
    alpha = 0.05
    print(f"rejection threshold: wealth 1/alpha = {1 / alpha:.0f}\n")
    for bias in (0.0, 0.02, 0.05, 0.1):
        state = play(bias)
        verdict = f"rejected at step {state.rejected_at}" if state.rejected else "never rejected"
        print(
            f"coin bias {bias:+.2f}: {verdict:>23}, "
            f"final log-wealth {state.log_wealth:+7.2f}, "
            f"learned fraction {state.bet_fraction():.2f}"
        )
    print(
        "\nA fair coin keeps the wealth low no matter how long we play;"
        "\nthe larger the bias, the sooner the wealth crosses the threshold."
    )


if __name__ == "__main__":
    main()
