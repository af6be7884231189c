"""Command-line front end.

Four subcommands cover the toolkit's workflows:

* ``simulate``: run a scenario against a plant config, writing the 60 s
  grid log as CSV and a run summary (termination, energy audit) as JSON.
* ``fit``: identify a quadratic performance map or a first-order step
  response from a sample CSV, writing coefficients plus diagnostics.
* ``validate``: score simulated channels against measured ones.
* ``plot``: render selected log channels to a deterministic SVG.

Exit codes: 0 success, 1 configuration or input error, 2 numerical failure
during a run.  The environment variable GREYBOX_LOG_LEVEL (error, info,
debug) controls stderr verbosity; stdout stays clean.
"""

import argparse
import csv
import json
import logging
import os
import sys

import numpy as np

from .errors import (AlignmentError, ConfigurationError, DegenerateFitError,
                     DegenerateSeriesError, InsufficientTankTemperatureError,
                     InvalidInputError, NumericalDivergenceError)
from .config import load_plant, load_scenario
from .fitting import Sample, fit_map, fit_step_response, monomial_name, BASIS_EXPONENTS
from .metrics import align, gof, nrmsre, r_squared, rolling_mean
from .simulation import run

log = logging.getLogger("polyplant")


def _setup_logging():
    level = os.environ.get("GREYBOX_LOG_LEVEL", "info").lower()
    numeric = {"error": logging.ERROR, "info": logging.INFO,
               "debug": logging.DEBUG}.get(level, logging.INFO)
    logging.basicConfig(stream=sys.stderr, level=numeric,
                        format="%(levelname)s %(message)s")


class _Parser(argparse.ArgumentParser):
    # argparse exits with status 2 on usage errors, which this tool reserves
    # for numerical failures; remap usage problems to the input-error code.
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(1)


def _fmt_value(v: float) -> str:
    v = float(v)
    if v == 0.0:
        v = 0.0  # fold -0.0 into 0.0 so output is sign-stable
    return f"{v:.6g}"


def _write_csv(path: str, channels, records) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(channels)
        for row in records:
            out = [str(int(round(row[0])))]
            out.extend(_fmt_value(v) for v in row[1:])
            w.writerow(out)


def _write_json(path: str, payload: dict) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")


def _read_csv(path: str):
    """Header list and float matrix of a value CSV."""
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if header is None:
                raise ConfigurationError(f"{path}: empty CSV")
            rows = []
            for ln, row in enumerate(reader, start=2):
                if not row:
                    continue
                try:
                    rows.append([float(c) for c in row])
                except ValueError:
                    raise ConfigurationError(
                        f"{path}:{ln}: non-numeric cell"
                    ) from None
    except OSError as exc:
        raise ConfigurationError(f"cannot read {path}: {exc}") from exc
    if not rows:
        raise ConfigurationError(f"{path}: no data rows")
    width = len(header)
    if any(len(r) != width for r in rows):
        raise ConfigurationError(f"{path}: ragged rows")
    return header, np.array(rows, dtype=float)


def _column(header, data, name, path):
    if name not in header:
        raise ConfigurationError(f"{path}: no channel {name!r}")
    return data[:, header.index(name)]


# ---------------------------------------------------------------------------
# subcommands


def _cmd_simulate(args) -> int:
    plant = load_plant(args.plant)
    scenario = load_scenario(args.scenario)
    simlog = run(plant, scenario)
    os.makedirs(args.out, exist_ok=True)
    _write_csv(os.path.join(args.out, "simlog.csv"),
               simlog.channels, simlog.records)
    summary = {
        "mode": scenario.mode.value,
        "termination_time_s": simlog.termination_time,
        "termination_reason": simlog.termination_reason,
        "records": int(simlog.records.shape[0]),
        "energy_audit": simlog.audit,
    }
    _write_json(os.path.join(args.out, "summary.json"), summary)
    log.info("simulated %s: %.1f min, terminated by %s",
             scenario.mode.value, simlog.termination_time / 60.0,
             simlog.termination_reason)
    return 0


_FIT_ARITY = {"map1": 1, "map2": 2, "map3": 3}


def _cmd_fit(args) -> int:
    header, data = _read_csv(args.samples)
    if args.kind == "step":
        if len(header) != 2:
            raise ConfigurationError(
                f"step fitting needs 2 columns (time, value), got {len(header)}"
            )
        series = [(float(t), float(v)) for t, v in data]
        res = fit_step_response(series, args.step_input)
        payload = {
            "kind": "step",
            "gain": res.k_s,
            "time_constant_s": res.t_s,
            "sse": res.sse,
            "indeterminate": res.indeterminate,
        }
    else:
        n = _FIT_ARITY[args.kind]
        if len(header) != n + 1:
            raise ConfigurationError(
                f"{args.kind} fitting needs {n + 1} columns "
                f"({n} inputs then the output), got {len(header)}"
            )
        samples = [Sample(x=tuple(row[:n]), y=float(row[n])) for row in data]
        res = fit_map(samples, n_vars=n, normalize=not args.unnormalized)
        payload = {
            "kind": args.kind,
            "inputs": header[:n],
            "output": header[n],
            "basis": [monomial_name(e) for e in BASIS_EXPONENTS[n]],
            "coefficients": list(res.map.coeffs),
            "objective": res.objective,
            "normalized": res.normalized,
            "residuals": list(res.residuals),
        }
    _write_json(args.out, payload)
    log.info("fit %s written to %s", args.kind, args.out)
    return 0


def _cmd_validate(args) -> int:
    m_header, m_data = _read_csv(args.measured)
    s_header, s_data = _read_csv(args.simlog)
    channels = [c for c in args.channels.split(",") if c]
    if not channels:
        raise ConfigurationError("empty channel list")
    missing = [c for c in channels
               if c not in m_header or c not in s_header]
    if missing:
        raise ConfigurationError(
            "channels absent from inputs: " + ", ".join(missing)
        )
    t_m = _column(m_header, m_data, "time_s", args.measured)
    t_s = _column(s_header, s_data, "time_s", args.simlog)

    report = {}
    for ch in channels:
        y_m = _column(m_header, m_data, ch, args.measured)
        y_s = _column(s_header, s_data, ch, args.simlog)
        try:
            pair = align(t_m, y_m, t_s, y_s)
            if args.rolling_mean > 1:
                pair = type(pair)(y=rolling_mean(pair.y, args.rolling_mean),
                                  y_star=rolling_mean(pair.y_star,
                                                      args.rolling_mean))
            report[ch] = {
                "nrmsre": nrmsre(pair),
                "r_squared": r_squared(pair),
                "gof": gof(pair),
            }
        except DegenerateSeriesError as exc:
            report[ch] = {"undefined": str(exc)}
    _write_json(args.out, {"channels": report})
    log.info("validation report for %d channels written to %s",
             len(channels), args.out)
    return 0


def _cmd_plot(args) -> int:
    from .plotting import plot_channels

    header, data = _read_csv(args.simlog)
    channels = [c for c in args.channels.split(",") if c]
    if not channels:
        raise ConfigurationError("empty channel list")
    t = _column(header, data, "time_s", args.simlog)
    sim = {}
    for ch in channels:
        sim[ch] = _column(header, data, ch, args.simlog)
    measured = None
    if args.measured:
        mh, md = _read_csv(args.measured)
        tm = _column(mh, md, "time_s", args.measured)
        measured = {}
        for ch in channels:
            if ch in mh:
                measured[ch] = (tm, _column(mh, md, ch, args.measured))
    plot_channels(args.out, t, sim, measured, title=args.title)
    log.info("plot written to %s", args.out)
    return 0


# ---------------------------------------------------------------------------
# argument wiring


def _build_parser() -> _Parser:
    parser = _Parser(prog="polyplant",
                     description="grey-box polygeneration plant toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run a scenario")
    p.add_argument("--plant", required=True)
    p.add_argument("--scenario", required=True)
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("fit", help="identify map or step-response parameters")
    p.add_argument("--samples", required=True, help="sample CSV")
    p.add_argument("--kind", required=True,
                   choices=["map1", "map2", "map3", "step"])
    p.add_argument("--out", required=True, help="output JSON file")
    p.add_argument("--step-input", type=float, default=1.0,
                   help="step input magnitude for kind=step")
    p.add_argument("--unnormalized", action="store_true",
                   help="fit absolute instead of relative residuals")
    p.set_defaults(func=_cmd_fit)

    p = sub.add_parser("validate", help="score simulation against measurement")
    p.add_argument("--measured", required=True)
    p.add_argument("--simlog", required=True)
    p.add_argument("--channels", required=True,
                   help="comma-separated channel names")
    p.add_argument("--out", required=True, help="output JSON file")
    p.add_argument("--rolling-mean", type=int, default=1,
                   help="odd window length in grid points (1 = off)")
    p.set_defaults(func=_cmd_validate)

    p = sub.add_parser("plot", help="render log channels to SVG")
    p.add_argument("--simlog", required=True)
    p.add_argument("--channels", required=True,
                   help="comma-separated channel names")
    p.add_argument("--out", required=True, help="output SVG file")
    p.add_argument("--measured", default=None,
                   help="optional measured CSV overlaid solid")
    p.add_argument("--title", default=None)
    p.set_defaults(func=_cmd_plot)
    return parser


def main(argv=None) -> int:
    _setup_logging()
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 1
    except (NumericalDivergenceError, InsufficientTankTemperatureError) as exc:
        log.error("%s", exc)
        return 2
    except (ConfigurationError, InvalidInputError, DegenerateFitError,
            AlignmentError, DegenerateSeriesError, ValueError) as exc:
        log.error("%s", exc)
        return 1


if __name__ == "__main__":
    sys.exit(main())
