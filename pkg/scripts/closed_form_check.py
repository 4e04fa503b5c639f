"""Compare the reference closed-form optimum with the exact critical points.

Prints the reward gradient at both for each fixture's six-term field.
"""

from __future__ import annotations

import numpy as np

from activeview.reward import reward, reward_gradient, stationary_points, unconstrained_optimum
from activeview.scenario import load_scenario


def main() -> None:
    np.set_printoptions(precision=4, suppress=True)
    for name in ("s1", "s2", "s3"):
        sc = load_scenario(name)
        g = unconstrained_optimum(sc.model.theta)
        print(f"{name}: closed form {g}  grad {reward_gradient(sc.model, g)}")
        for q in stationary_points(sc.model.theta):
            print(f"    critical point {q}  C={float(reward(sc.model, q)):.4f}  |grad|={np.linalg.norm(reward_gradient(sc.model, q)):.2e}")


if __name__ == "__main__":
    main()
