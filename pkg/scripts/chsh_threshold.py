"""Bisect the visibility at which noisy singlet statistics at CHSH angles stop admitting a joint."""
from __future__ import annotations

import argparse
import math

import numpy as np

from frustration import quantum
from frustration.marginals import Feasible, MarginalScenario, joint_feasible


def scenario(v: float) -> MarginalScenario:
    singlet = quantum.DensityOp.from_ket(quantum.singlet_ket(), (2, 2))
    rho = quantum.DensityOp((2, 2), v * singlet.matrix + (1 - v) * np.eye(4) / 4)
    a = [quantum.qubit_axis(0.0), quantum.qubit_axis(math.pi / 2)]
    b = [quantum.qubit_axis(math.pi / 4), quantum.qubit_axis(-math.pi / 4)]
    return MarginalScenario.from_tables(quantum.born_pairs(rho, a, b))


def main() -> None:
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--tol", type=float, default=1e-6)
    args = p.parse_args()

    lo, hi = 0.0, 1.0
    steps = 0
    while hi - lo > args.tol:
        mid = 0.5 * (lo + hi)
        if isinstance(joint_feasible(scenario(mid)), Feasible):
            lo = mid
        else:
            hi = mid
        steps += 1
    print(f"threshold visibility in [{lo:.7f}, {hi:.7f}] after {steps} LP solves; 1/sqrt(2) = {1 / math.sqrt(2):.7f}")
    res = joint_feasible(scenario(1.0))
    print(f"pure singlet: witness value {res.value:.6f} against bound {res.bound:.1f}")


if __name__ == "__main__":
    main()
