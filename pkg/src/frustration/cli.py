"""Command-line entry point.

Exit codes: 0 success or feasible, 2 input error, 3 infeasible, 4 resource cap.
Curves are written as plain CSV; numbers carry 12 significant digits so
repeated runs with the same arguments give byte-identical files.

The seed defaults to ``DEFAULT_SEED`` and can be overridden with the
``FRUSTRATION_SEED`` environment variable or ``--seed``.
"""
from __future__ import annotations

import argparse
import contextlib
import csv
import json
import os
import sys
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from . import gaussian, graphs, marginals, spin
from .gaussian import fmt_number
from .probability import ProbabilityError, TableTooLarge
from .simplex import FEAS_TOL

DEFAULT_SEED = 20030917
SEED_ENV = "FRUSTRATION_SEED"

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_INFEASIBLE = 3
EXIT_CAP = 4

BUNDLED = ("triangle", "path", "chsh_singlet")
FAMILY_FLAGS = {"ring": "ring", "cluster": "cluster", "hex": "hex_torus", "tri": "tri_torus",
                "platonic": "platonic"}


class CapExceeded(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    inputs: list[str] = field(default_factory=list)
    out: str | None = None
    seed: int = DEFAULT_SEED
    feas_tol: float = FEAS_TOL
    margin: float = marginals.WITNESS_MARGIN
    fmt: str = "csv"


def _default_seed() -> int:
    raw = os.environ.get(SEED_ENV)
    if raw is None:
        return DEFAULT_SEED
    try:
        return int(raw)
    except ValueError:
        raise argparse.ArgumentTypeError(f"{SEED_ENV}={raw!r} is not an integer") from None


@contextlib.contextmanager
def _output(path: str | None):
    if path is None or path == "-":
        yield sys.stdout
    else:
        with open(path, "w", newline="") as fh:
            yield fh


def _write_rows(fh, header, rows, footer=(), fmt="csv"):
    if fmt == "json":
        json.dump({"columns": list(header), "rows": [[fmt_number(v) for v in r] for r in rows],
                   "notes": list(footer)}, fh, indent=1)
        fh.write("\n")
        return
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([fmt_number(v) for v in r])
    for line in footer:
        fh.write(f"# {line}\n")


def _parse_range(text: str) -> list[int]:
    """``3..12`` or ``4,6,8`` (mixed forms allowed)."""
    out = []
    try:
        for part in text.split(","):
            if ".." in part:
                lo, hi = part.split("..")
                out.extend(range(int(lo), int(hi) + 1))
            else:
                out.append(int(part))
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad size list {text!r}") from None
    if not out:
        raise argparse.ArgumentTypeError("empty size list")
    return sorted(set(out))


def _scenario_source(arg: str):
    path = Path(arg)
    if path.exists():
        return path
    if arg in BUNDLED:
        return resources.files("frustration") / "data" / f"{arg}.json"
    raise FileNotFoundError(f"no scenario file {arg!r} (bundled: {', '.join(BUNDLED)})")


# --------------------------------------------------------------------------
# commands


def cmd_bell_check(cfg: RunConfig) -> int:
    src = _scenario_source(cfg.inputs[0])
    scenario = marginals.MarginalScenario.from_dict(json.loads(src.read_text()))
    result = marginals.joint_feasible(scenario, feas_tol=cfg.feas_tol)
    with _output(cfg.out) as fh:
        json.dump(result.to_dict(), fh, indent=1)
        fh.write("\n")
    if result.feasible:
        print(f"feasible: joint over {len(scenario.ids)} observables", file=sys.stderr)
        return EXIT_OK
    ok = marginals.verify_witness(result, scenario, cfg.margin)
    print(f"infeasible: witness value {result.value:.12g} > bound {result.bound:.12g}"
          f" (verified: {ok})", file=sys.stderr)
    return EXIT_INFEASIBLE


def cmd_gaussian_scan(cfg: RunConfig, family: str, n_min: int | None, n_max: int | None) -> int:
    fam = FAMILY_FLAGS[family]
    if fam != "platonic" and (n_min is None or n_max is None):
        raise ValueError(f"--family {family} needs --n-min and --n-max")
    if fam == "ring" and n_max > gaussian.MAX_RING:
        raise CapExceeded(f"ring size {n_max} above {gaussian.MAX_RING}")
    modes = {"cluster": n_max, "hex_torus": 2 * (n_max or 0) ** 2, "tri_torus": (n_max or 0) ** 2}.get(fam, 0)
    if modes > gaussian.MAX_DENSE:
        raise CapExceeded(f"{fam} up to {n_max} needs {modes} modes, above {gaussian.MAX_DENSE}")
    rows = gaussian.scan(fam, n_min, n_max)
    delta, eof = gaussian.ring_limit()
    footer = [f"ring_limit delta={fmt_number(delta)} eof_ebits={fmt_number(eof)}",
              f"qubit_chain_reference eof_ebits={fmt_number(gaussian.QUBIT_CHAIN_REFERENCE)}"]
    with _output(cfg.out) as fh:
        if cfg.fmt == "csv":
            gaussian.write_curve_csv(rows, fh, footer)
        else:
            _write_rows(fh, gaussian.CSV_HEADER, [r.as_tuple() for r in rows], footer, "json")
    print(f"{len(rows)} rows for family {fam}", file=sys.stderr)
    return EXIT_OK


def spin_extrapolation(sizes: list[int], values: list[float]) -> list[str]:
    """Footer lines: ``a/N^2`` fits over the three largest even and odd sizes."""
    lines = []
    for label, parity in (("even", 0), ("odd", 1)):
        picked = [(n, f) for n, f in zip(sizes, values) if n % 2 == parity][-3:]
        if len(picked) >= 2:
            f_inf, a = spin.extrapolate_inverse_square(*zip(*picked))
            used = ";".join(str(n) for n, _ in picked)
            lines.append(f"f_inf_{label}={fmt_number(f_inf)} a={fmt_number(a)} sizes={used}")
    return lines


def cmd_spin_scan(cfg: RunConfig, sizes: list[int]) -> int:
    too_big = [n for n in sizes if n > spin.MAX_QUBITS]
    if too_big:
        raise CapExceeded(f"ring sizes {too_big} exceed the {spin.MAX_QUBITS}-qubit cap")
    values = [spin.max_singlet_fraction(graphs.ring(n)) for n in sizes]
    footer = spin_extrapolation(sizes, values)
    with _output(cfg.out) as fh:
        _write_rows(fh, ("N", "f_max"), list(zip(sizes, values)), footer, cfg.fmt)
    return EXIT_OK


def cmd_qubit_cluster(cfg: RunConfig, n_max: int) -> int:
    with _output(cfg.out) as fh:
        _write_rows(fh, ("N", "concurrence", "eof"), spin.qubit_cluster_curve(n_max), (), cfg.fmt)
    return EXIT_OK


def cmd_cluster_compare(cfg: RunConfig, n_max: int, confirm_upto: int, restarts: int = 6) -> int:
    if n_max > gaussian.MAX_DENSE:
        raise CapExceeded(f"cluster size {n_max} above {gaussian.MAX_DENSE}")
    rows = []
    for n, _, eof_q in spin.qubit_cluster_curve(n_max):
        rows.append((n, eof_q, gaussian.epr_variances(graphs.complete(n)).eof))
    footer = []
    for n in range(3, min(confirm_upto, n_max, 6) + 1):
        c = spin.max_symmetric_concurrence(n, restarts=restarts, seed=cfg.seed)
        footer.append(f"numeric_concurrence N={n} c={c:.6f} seed={cfg.seed}")
    with _output(cfg.out) as fh:
        _write_rows(fh, ("N", "eof_qubit", "eof_gaussian"), rows, footer, cfg.fmt)
    return EXIT_OK


# --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="frustration", description=__doc__.splitlines()[0])
    p.add_argument("--seed", type=int, default=None,
                   help=f"RNG seed (default: ${SEED_ENV} or {DEFAULT_SEED})")
    p.add_argument("--format", dest="fmt", choices=("csv", "json"), default="csv")
    sub = p.add_subparsers(dest="command", required=True)

    b = sub.add_parser("bell-check", help="decide joint feasibility of a pair-marginal scenario")
    b.add_argument("scenario", help=f"JSON path or bundled name ({', '.join(BUNDLED)})")
    b.add_argument("--out")
    b.add_argument("--feas-tol", type=float, default=FEAS_TOL)
    b.add_argument("--margin", type=float, default=marginals.WITNESS_MARGIN)

    g = sub.add_parser("gaussian-scan", help="nearest-neighbour EPR curve for a graph family")
    g.add_argument("--family", choices=tuple(FAMILY_FLAGS), required=True)
    g.add_argument("--n-min", type=int)
    g.add_argument("--n-max", type=int)
    g.add_argument("--out")

    s = sub.add_parser("spin-scan", help="maximal singlet fraction on rings")
    s.add_argument("--rings", type=_parse_range, default=_parse_range("3..12"))
    s.add_argument("--out")

    q = sub.add_parser("qubit-cluster", help="pair concurrence and EoF of the symmetric qubit cluster")
    q.add_argument("--n-max", type=int, default=20)
    q.add_argument("--out")

    c = sub.add_parser("cluster-compare", help="qubit vs oscillator cluster EoF")
    c.add_argument("--n-max", type=int, default=20)
    c.add_argument("--confirm-upto", type=int, default=0,
                   help="numerically confirm the qubit concurrence for N=3..K (K <= 6)")
    c.add_argument("--restarts", type=int, default=6, help="random restarts per confirmation")
    c.add_argument("--out")
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        seed = args.seed if args.seed is not None else _default_seed()
    except argparse.ArgumentTypeError as exc:
        parser.error(str(exc))
    cfg = RunConfig(command=args.command, out=getattr(args, "out", None), seed=seed, fmt=args.fmt)

    try:
        if args.command == "bell-check":
            cfg.inputs = [args.scenario]
            cfg.feas_tol, cfg.margin = args.feas_tol, args.margin
            return cmd_bell_check(cfg)
        if args.command == "gaussian-scan":
            return cmd_gaussian_scan(cfg, args.family, args.n_min, args.n_max)
        if args.command == "spin-scan":
            return cmd_spin_scan(cfg, args.rings)
        if args.command == "qubit-cluster":
            return cmd_qubit_cluster(cfg, args.n_max)
        return cmd_cluster_compare(cfg, args.n_max, args.confirm_upto, args.restarts)
    except (CapExceeded, marginals.ScenarioTooLarge, TableTooLarge, spin.TooManyQubits) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CAP
    except (OSError, json.JSONDecodeError, KeyError, TypeError, ValueError, ProbabilityError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
