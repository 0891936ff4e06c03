"""Centralized configuration for the cocycle toolkit.

This module exposes the default order, level, working precision, sampling
seed, cache location and logging preferences in a single place so the CLI
and the verification pipeline read them consistently.
"""

from __future__ import annotations

import logging
import os
from pathlib import Path

from dotenv import load_dotenv

# Base directory for the project; used to derive default paths.
BASE_DIR = Path(__file__).resolve().parent

# Values from a local ``.env`` file never override variables already exported.
load_dotenv(BASE_DIR / ".env", override=False)

# Field discriminant of the default order. Desk-scale fields are -8 and -7.
DEFAULT_DISC = int(os.getenv("BIANCHI_DISC", "-8"))

# Generator of the default level ideal, in the CLI's ``x+y*w`` syntax.
DEFAULT_LEVEL = os.getenv("BIANCHI_LEVEL", "sqrt-2")

# Working precision in bits for every evaluation started from the CLI.
DEFAULT_PRECISION = int(os.getenv("BIANCHI_PRECISION", "128"))

# Seed for the matrix and torsion-point samplers.
DEFAULT_SEED = int(os.getenv("BIANCHI_SEED", "7"))

# Number of worker threads used by verification suites.
DEFAULT_WORKERS = int(os.getenv("BIANCHI_WORKERS", "1"))

# Directory holding the lattice constants cache. Created on first write.
CACHE_DIR = Path(os.getenv("BIANCHI_CACHE_DIR", BASE_DIR / ".cache")).resolve()

# Logging level for the entire application. Accepts standard logging level
# names (e.g., ``DEBUG``, ``INFO``, ``WARNING``, ``ERROR``). Defaults to ``INFO``.
LOG_LEVEL = os.getenv("LOG_LEVEL", "INFO").upper()


def configure_logging(level: str | None = None) -> None:
    """Configure the root logger for the toolkit.

    The configuration is idempotent; calling it multiple times has no effect
    after the first. Records go to stderr so JSON written to stdout by the
    CLI stays machine readable.
    """

    logging.basicConfig(
        level=(level or LOG_LEVEL).upper(),
        format="%(asctime)s [%(levelname)s] %(name)s: %(message)s",
    )
