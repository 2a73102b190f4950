"""Numeric constants, environment settings and debug logging setup"""

from __future__ import annotations

import logging
import os
from dataclasses import dataclass
from pathlib import Path

from dotenv import load_dotenv

from .errors import ConfigError

load_dotenv()

# Tolerances
PROB_INPUT_TOL = 1e-9
IDENTITY_TOL = 1e-12
SUPPORT_MERGE_TOL = 1e-9
LATTICE_MERGE_TOL = 1e-9
ORACLE_TOL = 1e-9

# Exact evaluation limits
DEFAULT_LATTICE_CAP = 200_000
ORACLE_MAX_EVALUATIONS = 10**7
ORACLE_MAX_STEPS = 5
MAX_EVENT_ENUMERATION_SUPPORT = 12
GRID_STEP = 1e-4
GRID_CHUNK = 16384  # grid points materialised at a time

# Simulation
DEFAULT_RHO = 1.6
GENERATOR_NAME = "numpy.random.Philox"
SAMPLE_STREAM = 0
POLICY_STREAM = 1
INSTANCE_STREAM = 2
U64_MAX = 2**64 - 1

# Analysis defaults; scaled by the mean gap relative to REFERENCE_GAP
DEFAULT_CONTAINMENT_EPS = 0.05
DEFAULT_CLUSTER_EPS = 0.02
REFERENCE_GAP = 0.4

# Logging
LOGGER_NAME = "credal_lln"
DEBUG_LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"
DEFAULT_DEBUG_LOGFILE = Path.home() / ".credal_lln_debug.log"


@dataclass(frozen=True)
class Settings:
    debug: bool
    debug_logfile: Path
    lattice_cap: int
    workers: int
    out_dir: Path


def _int_env(name: str, default: int, minimum: int = 1) -> int:
    raw = os.getenv(name, "").strip()
    if not raw:
        return default
    try:
        value = int(raw)
    except ValueError as e:
        raise ConfigError(f"{name}={raw!r} is not an integer") from e
    if value < minimum:
        raise ConfigError(f"{name}={value} must be >= {minimum}")
    return value


_TRUE_WORDS = frozenset({"true", "1", "yes", "on"})
_FALSE_WORDS = frozenset({"false", "0", "no", "off"})


def parse_flag(name: str, raw: object) -> bool:
    """A bool from a JSON bool or one of true/false, 1/0, yes/no, on/off."""
    if isinstance(raw, bool):
        return raw
    text = str(raw).strip().lower()
    if text in _TRUE_WORDS:
        return True
    if text in _FALSE_WORDS:
        return False
    raise ConfigError(f"{name}={raw!r} is not a boolean")


def load_settings() -> Settings:
    """Read CREDAL_LLN_* variables (a .env file is honoured)."""
    return Settings(
        debug=bool(os.getenv("CREDAL_LLN_DEBUG")),
        debug_logfile=Path(os.getenv("CREDAL_LLN_DEBUG_LOG", str(DEFAULT_DEBUG_LOGFILE))),
        lattice_cap=_int_env("CREDAL_LLN_LATTICE_CAP", DEFAULT_LATTICE_CAP),
        workers=_int_env("CREDAL_LLN_WORKERS", 1),
        out_dir=Path(os.getenv("CREDAL_LLN_OUT_DIR", "runs")),
    )


def configure_logging(settings: Settings | None = None) -> logging.Logger:
    """Attach the debug file handler to the package logger when enabled.

    Without CREDAL_LLN_DEBUG the package logger gets a NullHandler and stops
    propagating, so nothing reaches logging.lastResort on stderr.
    """
    settings = settings or load_settings()
    logger = logging.getLogger(LOGGER_NAME)
    if settings.debug:
        logfile = str(settings.debug_logfile)
        if not any(
            isinstance(h, logging.FileHandler) and getattr(h, "baseFilename", "") == logfile
            for h in logger.handlers
        ):
            try:
                fh = logging.FileHandler(logfile, encoding="utf-8")
                fh.setLevel(logging.DEBUG)
                fh.setFormatter(logging.Formatter(DEBUG_LOG_FORMAT))
                logger.addHandler(fh)
            except OSError:
                logging.getLogger(__name__).exception("Failed to create debug logfile %s", logfile)
        logger.setLevel(logging.DEBUG)
        logger.propagate = True
    else:
        logger.setLevel(logging.INFO)
        logger.propagate = False
        if not any(isinstance(h, logging.NullHandler) for h in logger.handlers):
            logger.addHandler(logging.NullHandler())
    return logger
