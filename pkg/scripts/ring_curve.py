"""Nearest-neighbour entanglement on oscillator rings versus ring size, with the N -> inf limit."""
from __future__ import annotations

import argparse
from pathlib import Path

from frustration import gaussian


def main() -> None:
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--n-max", type=int, default=40)
    p.add_argument("--out", type=Path, default=Path("results/ring_curve.csv"))
    args = p.parse_args()

    rows = gaussian.scan("ring", 3, args.n_max)
    delta, eof = gaussian.ring_limit()
    args.out.parent.mkdir(parents=True, exist_ok=True)
    with args.out.open("w", newline="") as fh:
        gaussian.write_curve_csv(rows, fh, [f"ring_limit delta={delta:.12g} eof_ebits={eof:.12g}",
                                            f"qubit_chain_reference eof_ebits={gaussian.QUBIT_CHAIN_REFERENCE}"])
    for r in rows:
        bar = "#" * int(round(r.eof * 100))
        print(f"{r.N:4d} {r.eof:.4f} {bar}")
    print(f"limit: delta = {delta:.6f}, E_F = {eof:.5f} ebits -> {args.out}")


if __name__ == "__main__":
    main()
