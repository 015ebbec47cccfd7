"""Expected outcome probabilities and large-sample power at n=1000, exposure 0.9, w=1.3.

Compares the observed period-2 incidence ratio with the challenge ratio and
gives the normal-approximation power of both delta methods, next to the
simulated rejection rate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from waning import power_study, strata_sim
from waning.waning_test import CONSERVATIVE_DELTA, DIRECT_DELTA, z_quantile


@dataclass(frozen=True)
class Config:
    n: int = 1000
    exposure: float = 0.9
    w: float = 1.3
    dist: tuple[float, float, float, float] = (0.2, 0.6, 0.2, 0.0)
    replications: int = 100
    seed: int = 20240101


def analytic_power(probs, n: int, method: str, alpha: float = 0.05) -> float:
    half = n / 2
    m = {(a, k): half * probs[a, k] for a in (0, 1) for k in (1, 2)}
    log_ratio = math.log((probs[1, 1] / probs[0, 1]) / (probs[1, 2] / probs[0, 2]))
    if method == DIRECT_DELTA:
        var = sum(1 / v for v in m.values())
    else:
        s = [sum((1 - probs[a, k]) / m[(a, k)] for a in (0, 1)) for k in (1, 2)]
        var = (math.sqrt(s[0]) + math.sqrt(s[1])) ** 2
    z, shift = z_quantile(1 - alpha / 2), abs(log_ratio) / math.sqrt(var)
    phi = lambda x: 0.5 * math.erfc(-x / math.sqrt(2))  # noqa: E731
    return phi(shift - z) + phi(-shift - z)


def main(cfg: Config) -> None:
    sim = strata_sim.SimConfig(cfg.n, cfg.dist, cfg.exposure, cfg.exposure, cfg.w)
    probs = strata_sim.expected_outcome_probs(sim)
    print("P(outcome | arm) rows arm0, arm1; columns none, period 1, period 2")
    print(probs.round(4))
    print(f"challenge IR2 = {strata_sim.challenge_ir2(sim.dist, cfg.w, sim.scenario):.4f}; "
          f"observed-scale IR2 = {strata_sim.expected_ir(sim, 2):.4f}")
    grid = power_study.PowerGrid([cfg.n], [cfg.exposure], [cfg.w], methods=(DIRECT_DELTA, CONSERVATIVE_DELTA),
                                 replications=cfg.replications, base_seed=cfg.seed)
    for cell in power_study.run_power_grid(grid, cfg.dist):
        print(f"{cell.method}: analytic power {analytic_power(probs, cfg.n, cell.method):.3f}, "
              f"simulated {cell.rejection_rate:.2f}")


if __name__ == "__main__":
    main(Config())
