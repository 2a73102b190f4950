"""Command-line entry point: `credal-lln <experiment> [--config file.json] [flags]`.

Exit codes: 0 when every verdict passes, 2 when any verdict fails, 1 on
usage, configuration or input errors.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path
from typing import Any, Dict, List, NoReturn, Optional

from rich.console import Console
from rich.markup import escape
from rich.table import Table

from . import __version__
from .config import Settings, configure_logging, load_settings
from .data_models import ExperimentConfig, ExperimentReport
from .errors import ConfigError, CredalLlnError, VerdictFailedError
from .experiments import EXPERIMENTS, REPORT_NAME, run
from .storage import load_config_json

logger = logging.getLogger("credal_lln.main")

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_FAILED = 2

# flags copied into ExperimentConfig.parameters when given
PARAMETER_FLAGS = (
    "n", "ns", "replicates", "policy", "eps", "m", "rho", "targets", "n0",
    "function", "event", "workers", "runs", "criterion", "interleave", "alpha",
)


class _Parser(argparse.ArgumentParser):
    """Usage errors exit with 1, not argparse's 2, which is reserved for failed verdicts."""

    def error(self, message: str) -> NoReturn:
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="credal-lln",
        description="Exact sub-linear expectations and law-of-large-numbers experiments on credal sets",
    )
    parser.add_argument("experiment", help="one of: " + ", ".join(EXPERIMENTS))
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--config", type=Path, help="experiment config JSON")
    parser.add_argument("--credal", type=Path, help="credal set JSON")
    parser.add_argument("--seed", type=int, help="unsigned 64-bit seed")
    parser.add_argument("--out", type=Path, help="output directory")
    parser.add_argument("--n", type=int, help="horizon")
    parser.add_argument("--ns", help="comma-separated horizons")
    parser.add_argument("--replicates", type=int)
    parser.add_argument("--policy", help="max, min, index:i, periodic:i,j, blocks:t1,t2, ...")
    parser.add_argument("--eps", type=float)
    parser.add_argument("--m", type=float)
    parser.add_argument("--rho", type=float, help="block growth factor")
    parser.add_argument("--targets", help="comma-separated block targets")
    parser.add_argument("--n0", type=int, help="start of the analysis window")
    parser.add_argument("--function", help="identity, square, exp:l, indicator-ge:v, phi, bump, ...")
    parser.add_argument("--event", help="comma-separated support points")
    parser.add_argument("--workers", type=int, help="replicate threads")
    parser.add_argument("--runs", nargs="+", help="run CSVs for `analyze`, or the instance count for `oracle-suite`")
    parser.add_argument("--criterion", help="containment, cluster, final-mean-upper, final-mean-lower")
    parser.add_argument("--interleave", choices=("deterministic", "randomized"))
    parser.add_argument("--alpha", type=float)
    return parser


def build_config(args: argparse.Namespace, settings: Settings) -> ExperimentConfig:
    """Merge the config file (if any) with flags; flags win."""
    doc: Dict[str, Any] = load_config_json(args.config) if args.config else {}
    doc = dict(doc)
    parameters: Dict[str, Any] = dict(doc.pop("parameters", None) or {})
    credal = doc.pop("credal", None)
    seed = doc.pop("seed", None)
    out_dir = doc.pop("out_dir", None)
    experiment = doc.pop("experiment", None)
    # remaining top-level keys are parameters too
    parameters.update(doc)

    if experiment is not None and experiment != args.experiment:
        logger.info("config names experiment %r, command line %r wins", experiment, args.experiment)
    if args.experiment not in EXPERIMENTS:
        raise ConfigError(f"unknown experiment {args.experiment!r}")

    for key in PARAMETER_FLAGS:
        value = getattr(args, key)
        if value is None:
            continue
        if key == "runs" and args.experiment == "oracle-suite":
            value = value[0]
        parameters[key] = value

    if args.config and credal is not None and not Path(credal).is_absolute():
        credal = args.config.parent / credal
    return ExperimentConfig(
        experiment=args.experiment,
        credal=args.credal or (Path(credal) if credal is not None else None),
        parameters=parameters,
        out_dir=args.out or (Path(out_dir) if out_dir is not None else settings.out_dir),
        seed=args.seed if args.seed is not None else seed,
    )


def render(report: ExperimentReport, console: Console) -> None:
    table = Table(title=f"{report.config.experiment}  ({report.elapsed_ms:.0f} ms)")
    table.add_column("criterion")
    table.add_column("measured", justify="right")
    table.add_column("", justify="center")
    table.add_column("threshold", justify="right")
    table.add_column("result")
    for v in report.verdicts:
        table.add_row(
            escape(v.criterion),
            f"{v.measured:.6g}",
            v.comparison,
            f"{v.threshold:.6g}",
            "[green]pass[/green]" if v.passed else "[red]FAIL[/red]",
        )
    console.print(table)
    console.print(f"report: {report.config.out_dir / REPORT_NAME}")


def main(argv: Optional[List[str]] = None) -> int:
    err = Console(stderr=True)
    args = build_parser().parse_args(argv)
    try:
        settings = load_settings()
        configure_logging(settings)
        config = build_config(args, settings)
        report = run(config, settings, strict=True)
    except VerdictFailedError as e:
        render(e.report, Console())
        err.print(f"[red]{escape(str(e))}[/red]")
        return EXIT_FAILED
    except ConfigError as e:
        build_parser().print_usage(sys.stderr)
        err.print(f"[red]error:[/red] {escape(str(e))}")
        return EXIT_ERROR
    except (CredalLlnError, OSError) as e:
        err.print(f"[red]error:[/red] {escape(str(e))}")
        return EXIT_ERROR
    except Exception:
        logger.exception("experiment %s crashed", args.experiment)
        raise

    render(report, Console())
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
