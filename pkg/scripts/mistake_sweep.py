"""Sweep the deliberate-mistake rate and watch quiz accuracy degrade.

The governor flips a digit in the agent's answer with probability epsilon
just before it reaches the environment. Mean reward should fall roughly
linearly in epsilon while the audit chain stays verifiable throughout.
"""

import argparse

from mindcap.audit import verify_chain
from mindcap.biases import BiasConfig
from mindcap.runner import Scenario, run_scenario


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--episodes", type=int, default=200, help="episodes per rate")
    parser.add_argument("--seed", type=int, default=7, help="base scenario seed")
    args = parser.parse_args()

    print(f"{'rate':>6}  {'mean_reward':>11}  {'degraded':>8}  {'chain':>5}")
    for step in range(11):
        rate = step * 0.05
        scenario = Scenario(
            name=f"mistakes-{step:02d}",
            agent="quiz",
            episodes=args.episodes,
            seed=args.seed,
            bias=BiasConfig(mistake_rate=rate),
        )
        report = run_scenario(scenario)
        ok, _ = verify_chain(report.trail.records())
        mean = sum(report.rewards) / len(report.rewards)
        degraded = sum(1 for r in report.rewards if r < 1.0)
        print(f"{rate:6.2f}  {mean:11.4f}  {degraded:8d}  {'ok' if ok else 'BAD':>5}")


if __name__ == "__main__":
    main()
