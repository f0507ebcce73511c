"""
Runtime configuration for the sparse prime complements workbench.

All knobs come from the environment (optionally a .env file) so that desk runs
and the HTTP calculator share one source of truth.
"""

import logging
import os

from dotenv import load_dotenv

load_dotenv()

VERSION = "1.0.0"

# Largest number of integers a single PrimeTable may cover
MEMORY_CEILING = int(os.getenv('PRIMES_MEMORY_CEILING', str(200_000_000)))

# Sieve segment length (integers per segment)
SEGMENT_SIZE = int(os.getenv('PRIMES_SEGMENT_SIZE', str(1 << 18)))

# Default worker budget; --threads overrides per run
DEFAULT_THREADS = int(os.getenv('PRIMES_THREADS', str(os.cpu_count() or 1)))

# Arguments up to this bound are factorized through the cached SPF table
SPF_LIMIT = int(os.getenv('PRIMES_SPF_LIMIT', str(10_000_000)))

LOG_LEVEL = os.getenv('PRIMES_LOG_LEVEL', 'INFO').upper()

# Short-interval pair counts need c0 > 7/12
DEFAULT_C0 = 7 / 12 + 0.01

# Report caps; the full counts are always exact
EXCEPTIONAL_CAP = 100_000
FAILURE_CAP = 10_000

# Probabilities are clamped to 1 silently below this element
CLAMP_WARNING_FLOOR = 100


def configure_logging(level=None):
    """Route all logs to standard error at the configured level."""
    logging.basicConfig(
        level=getattr(logging, (level or LOG_LEVEL), logging.INFO),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )


def resolve_threads(threads=None):
    """Return a usable worker count (at least 1)."""
    if threads is None:
        threads = DEFAULT_THREADS
    return max(1, int(threads))
