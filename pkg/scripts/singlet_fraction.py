"""Maximal singlet fraction on qubit rings and its finite-size extrapolation."""
from __future__ import annotations

import argparse
import math

from frustration import graphs, spin


def main() -> None:
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--n-max", type=int, default=12)
    args = p.parse_args()

    f = {n: spin.max_singlet_fraction(graphs.ring(n)) for n in range(3, args.n_max + 1)}
    for n, v in f.items():
        print(f"{n:3d} {v:.8f}")
    for label, parity in (("even", 0), ("odd", 1)):
        ns = [n for n in f if n % 2 == parity][-3:]
        f_inf, a = spin.extrapolate_inverse_square(ns, [f[n] for n in ns])
        print(f"{label} fit over {ns}: f_inf = {f_inf:.5f}, a = {a:.4f}  (ln 2 = {math.log(2):.5f})")


if __name__ == "__main__":
    main()
