"""
Command-line entry point.

Subcommands: ``run`` (full pipeline against the oracle), ``oracle`` (classical
operator-sum curves only), ``validate`` (invariant suite) and ``sweep``
(error versus eps, optionally with a Richardson row).

Exit codes: 0 success, 2 usage or parameter error, 3 validation failure,
4 I/O failure. Output files go to ``--out``, falling back to the
``UNITARY_DECOMP_OUT`` environment variable and then the working directory.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from pathlib import Path

import numpy as np

from .channels import GAMMA_DEFAULT, RHO0_DEFAULT, check_density_matrix
from .experiment import (
    CIRCUIT_FORMS,
    MODES,
    ExperimentConfig,
    PopulationTrace,
    compare_to_oracle,
    oracle_trace,
    run_trace,
    write_trace_csv,
    write_trace_json,
)
from .linalg import ParameterError

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_VALIDATION = 3
EXIT_IO = 4

OUT_ENV = "UNITARY_DECOMP_OUT"
RHO0_PRESETS = {"default": RHO0_DEFAULT}


class UsageError(Exception):
    pass


def _float_list(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise UsageError(f"expected a comma-separated list of numbers, got {text!r}") from None


def _time_grid(text: str) -> tuple[float, ...]:
    try:
        start, stop, points = text.split(":")
        start, stop, points = float(start), float(stop), int(points)
    except ValueError:
        raise UsageError(f"--time-grid expects start:stop:points in ns, got {text!r}") from None
    if points < 1 or stop < start:
        raise UsageError("--time-grid needs points >= 1 and stop >= start")
    return tuple(float(t) * 1e-9 for t in np.linspace(start, stop, points))


def _load_rho0(source: str) -> np.ndarray:
    if source in RHO0_PRESETS:
        return RHO0_PRESETS[source].copy()
    path = Path(source)
    try:
        if path.suffix == ".npy":
            rho = np.load(path)
        else:
            data = np.asarray(json.loads(path.read_text()), dtype=float)
            # nested [re, im] pairs or plain reals
            rho = data[..., 0] + 1j * data[..., 1] if data.ndim == 3 else data
    except OSError as exc:
        raise OSError(f"cannot read rho0 from {source!r}: {exc}") from exc
    except ValueError as exc:
        raise UsageError(f"cannot parse rho0 file {source!r}: {exc}") from None
    try:
        return check_density_matrix(rho)
    except ValueError as exc:
        raise UsageError(f"invalid rho0: {exc}") from None


def _add_experiment_flags(p: argparse.ArgumentParser, *, sampling: bool = True) -> None:
    p.add_argument("--channel", default="amp-damp-zero-T",
                   help="amp-damp-zero-T, amp-damp-infinite-T or amp-damp(beta=...)")
    p.add_argument("--beta", type=float, default=None, help="inverse temperature; overrides --channel")
    p.add_argument("--gamma", type=float, default=GAMMA_DEFAULT, help="decay rate in 1/s")
    p.add_argument("--rho0", default="default", help="'default' ((1/4)[[1,1],[1,3]]) or a .json/.npy density matrix file")
    p.add_argument("--time-grid", default="0:3:13", help="start:stop:points in ns")
    p.add_argument("--out", default=None, help=f"output directory (default ${OUT_ENV} or .)")
    p.add_argument("--format", choices=("csv", "json", "both"), default="csv")
    if not sampling:
        return
    p.add_argument("--epsilon", default="0.2", help="comma-separated expansion parameters")
    p.add_argument("--richardson", action="store_true", help="extrapolate over the epsilon list")
    p.add_argument("--order-schedule", default=None, help="comma-separated Richardson orders (default 2,4,...)")
    p.add_argument("--average-first", action="store_true",
                   help="average repetitions before extrapolating instead of after")
    p.add_argument("--mode", choices=MODES, default="exact")
    p.add_argument("--shots", type=int, default=None)
    p.add_argument("--repetitions", type=int, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--circuit-form", choices=CIRCUIT_FORMS, default="full4")
    p.add_argument("--ensemble", choices=("eigen", "plus-one"), default="eigen")
    p.add_argument("--renormalize", action="store_true")
    p.add_argument("--workers", type=int, default=1)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="unitary-decomp", description=__doc__.split("\n\n")[0].strip())
    sub = parser.add_subparsers(dest="command", required=True)
    _add_experiment_flags(sub.add_parser("run", help="run the circuit pipeline and compare to the oracle"))
    _add_experiment_flags(sub.add_parser("oracle", help="classical Kraus dynamics only"), sampling=False)
    _add_experiment_flags(sub.add_parser("sweep", help="error versus epsilon"))
    v = sub.add_parser("validate", help="run the invariant suite")
    v.add_argument("--epsilon", default="0.2,0.1,1.0")
    return parser


def _channel_name(args) -> str:
    if args.beta is not None:
        return f"amp-damp(beta={args.beta!r})"
    return args.channel


def _config(args, epsilons=None) -> ExperimentConfig:
    if args.mode == "exact":
        if args.shots is not None:
            raise UsageError("--shots only applies with --mode sampled")
        if args.repetitions not in (None, 1):
            raise UsageError("--repetitions only applies with --mode sampled")
    elif args.shots is None:
        raise UsageError("--mode sampled needs --shots")
    if args.order_schedule and not args.richardson:
        raise UsageError("--order-schedule needs --richardson")
    eps = epsilons if epsilons is not None else _float_list(args.epsilon)
    orders = None
    if args.richardson:
        orders = _float_list(args.order_schedule) if args.order_schedule else tuple(
            2 * (k + 1) for k in range(max(len(eps) - 1, 1))
        )
        orders = tuple(int(o) for o in orders)
    return ExperimentConfig(
        channel=_channel_name(args),
        gamma=args.gamma,
        rho0=_load_rho0(args.rho0),
        time_grid=_time_grid(args.time_grid),
        epsilons=eps,
        mode=args.mode,
        shots=args.shots or 1,
        repetitions=args.repetitions or 1,
        master_seed=args.seed,
        circuit_form=args.circuit_form,
        richardson=orders,
        renormalize=args.renormalize,
        ensemble=args.ensemble,
        average_first=args.average_first,
    )


def _out_dir(args) -> Path:
    out = Path(args.out or os.environ.get(OUT_ENV) or ".")
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_trace(trace: PopulationTrace, config: ExperimentConfig, args, stem: str) -> list[Path]:
    out = _out_dir(args)
    written = []
    if args.format in ("csv", "both"):
        write_trace_csv(trace, out / f"{stem}.csv")
        written.append(out / f"{stem}.csv")
    if args.format in ("json", "both"):
        write_trace_json(trace, config, out / f"{stem}.json")
        written.append(out / f"{stem}.json")
    return written


def cmd_run(args) -> int:
    config = _config(args)
    trace = run_trace(config, workers=args.workers)
    paths = _write_trace(trace, config, args, "run")
    m = compare_to_oracle(trace)
    print(f"channel={config.channel} epsilon={config.epsilon_label} mode={config.mode} "
          f"shots={trace.shots} repetitions={config.repetitions}")
    print(f"mae={m.mae:.6e} max_abs_err={m.max_abs_err:.6e}")
    for p in paths:
        print(f"wrote {p}")
    return EXIT_OK


def cmd_oracle(args) -> int:
    config = ExperimentConfig(
        channel=_channel_name(args),
        gamma=args.gamma,
        rho0=_load_rho0(args.rho0),
        time_grid=_time_grid(args.time_grid),
    )
    pops = oracle_trace(config)
    out = _out_dir(args)
    rows = [
        (format(t * 1e9, ".17g"), j, format(pops[i, j], ".17g"))
        for i, t in enumerate(config.time_grid)
        for j in range(pops.shape[1])
    ]
    if args.format in ("csv", "both"):
        with open(out / "oracle.csv", "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(("t_ns", "basis_index", "pop_oracle"))
            w.writerows(rows)
        print(f"wrote {out / 'oracle.csv'}")
    if args.format in ("json", "both"):
        doc = {
            "config": config.to_dict(),
            "rows": [
                {"t_ns": t * 1e9, "basis_index": j, "pop_oracle": float(pops[i, j])}
                for i, t in enumerate(config.time_grid)
                for j in range(pops.shape[1])
            ],
        }
        (out / "oracle.json").write_text(json.dumps(doc, indent=1) + "\n")
        print(f"wrote {out / 'oracle.json'}")
    return EXIT_OK


def cmd_sweep(args) -> int:
    eps_list = _float_list(args.epsilon)
    if not eps_list:
        raise UsageError("--epsilon needs at least one value")
    rows = []
    traces = []
    prev = None
    base = argparse.Namespace(**{**vars(args), "richardson": False, "order_schedule": None})
    for eps in eps_list:
        config = _config(base, epsilons=(eps,))
        trace = run_trace(config, workers=args.workers)
        traces.append(trace)
        m = compare_to_oracle(trace)
        ratio = prev / m.mae if prev is not None and m.mae > 0 else float("nan")
        rows.append((f"{eps:g}", m.mae, m.max_abs_err, ratio))
        prev = m.mae
    if args.richardson:
        if len(eps_list) < 2:
            raise UsageError("--richardson needs at least two epsilons")
        config = _config(args)
        trace = run_trace(config, workers=args.workers)
        m = compare_to_oracle(trace)
        rows.append((f"richardson({config.epsilon_label})", m.mae, m.max_abs_err, float("nan")))
    out = _out_dir(args)
    if args.format in ("csv", "both"):
        with open(out / "sweep.csv", "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(("epsilon", "mae", "max_abs_err", "mae_ratio_to_previous"))
            for label, mae, mx, ratio in rows:
                w.writerow((label, format(mae, ".17g"), format(mx, ".17g"), format(ratio, ".17g")))
    if args.format in ("json", "both"):
        doc = [
            {"epsilon": label, "mae": mae, "max_abs_err": mx, "mae_ratio_to_previous": None if np.isnan(r) else r}
            for label, mae, mx, r in rows
        ]
        (out / "sweep.json").write_text(json.dumps(doc, indent=1) + "\n")
    print(f"{'epsilon':>24} {'mae':>14} {'max_abs_err':>14} {'ratio':>8}")
    for label, mae, mx, ratio in rows:
        print(f"{label:>24} {mae:14.6e} {mx:14.6e} {ratio:8.4f}")
    return EXIT_OK


def cmd_validate(args) -> int:
    from .validation import run_validation

    results = run_validation(_float_list(args.epsilon))
    for r in results:
        print(f"[{'PASS' if r.passed else 'FAIL'}] {r.name}: {r.detail}")
    return EXIT_OK if all(r.passed for r in results) else EXIT_VALIDATION


COMMANDS = {"run": cmd_run, "oracle": cmd_oracle, "sweep": cmd_sweep, "validate": cmd_validate}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    try:
        return COMMANDS[args.command](args)
    except (UsageError, ParameterError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
