"""Map how observation odds and the spotlight bias steer the gridworld route.

The agent picks between a 9-step route through a restricted door and a
27-step sanctioned detour. Higher believed supervision makes the door look
costly; the spotlight bias inflates that belief toward certainty, so at
weight 1.0 the true observation probability stops mattering at all.

At mixed belief the greedy one-step agent can dither: the two route
potentials disagree at the door approach and it oscillates until the step
cap ends the episode. Those rows are labeled rather than smoothed over.
"""

import argparse

from mindcap.biases import BiasConfig, spotlight_adjust
from mindcap.runner import Scenario, run_scenario

PROBS = (0.0, 0.25, 0.5, 0.75, 1.0)


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--seed", type=int, default=21, help="scenario seed")
    args = parser.parse_args()

    print(f"{'weight':>6}  {'obs_prob':>8}  {'believed':>8}  {'steps':>5}  {'reward':>7}  route")
    for weight in (0.0, 0.5, 1.0):
        for prob in PROBS:
            scenario = Scenario(
                name=f"spot-{weight:.1f}-{prob:.2f}",
                agent="gridworld",
                episodes=1,
                seed=args.seed,
                observation_prob=prob,
                bias=BiasConfig(weights={"spotlight": weight}),
            )
            report = run_scenario(scenario)
            steps = len([r for r in report.trail.records() if r.kind == "decide"])
            if report.rewards[0] > 0:
                route = "restricted door" if steps <= 9 else "sanctioned detour"
            else:
                route = "dithers at the door, never arrives"
            believed = spotlight_adjust(prob, weight)
            print(
                f"{weight:6.1f}  {prob:8.2f}  {believed:8.2f}  {steps:5d}"
                f"  {report.rewards[0]:7.2f}  {route}"
            )
        print()


if __name__ == "__main__":
    main()
