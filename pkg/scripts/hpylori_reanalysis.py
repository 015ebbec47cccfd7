"""Reanalysis of the H. pylori vaccine trial summary with both delta methods and the bound curve."""

from __future__ import annotations

import argparse
from dataclasses import dataclass
from pathlib import Path

from waning import bounds, trial_data, waning_test
from waning.errors import WrongMode

ROOT = Path(__file__).resolve().parent.parent


@dataclass(frozen=True)
class Config:
    summary: Path = ROOT / "data" / "hpylori.json"
    alpha: float = 0.05
    p12_grid: tuple[float, ...] = (0.0, 0.25, 0.5, 0.75, 1.0)


def main(cfg: Config) -> None:
    summary = trial_data.parse_summary(cfg.summary.read_text())
    print(f"IR1 = {waning_test.incidence_ratio(summary, 1):.5f}  IR2 = {waning_test.incidence_ratio(summary, 2):.5f}")
    print(f"VE1 (challenge) = {bounds.ve1_challenge(summary):.4f}")
    for method in (waning_test.DIRECT_DELTA, waning_test.CONSERVATIVE_DELTA):
        try:
            r = waning_test.ir_ratio_test(summary, method, cfg.alpha)
        except WrongMode as exc:
            print(f"{method}: skipped ({exc})")
            continue
        print(f"{method}: IR1/IR2 = {r.estimate:.3f}, CI [{r.ci_low:.3f}, {r.ci_high:.3f}], p = {r.p_value:.3f}")
    print()
    print(bounds.curve_to_csv(bounds.ve2_bound_curve(summary, cfg.p12_grid, alpha=cfg.alpha)), end="")


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--summary", type=Path, default=Config.summary)
    ap.add_argument("--alpha", type=float, default=Config.alpha)
    args = ap.parse_args()
    main(Config(summary=args.summary, alpha=args.alpha))
