import csv
import io
import json
import logging
import math
import sys

import numpy as np

logger = logging.getLogger(__name__)

# Artifact formats: structured reports and plot-ready series
ALLOWED_EXTENSIONS = {'json', 'csv'}


def allowed_file(filename):
    return '.' in filename and filename.rsplit('.', 1)[1].lower() in ALLOWED_EXTENSIONS


def get_file_type(filename):
    if not allowed_file(filename):
        return 'unknown'
    return filename.rsplit('.', 1)[1].lower()


def _plain(value):
    """Convert numpy scalars/arrays (and non-finite floats) into JSON-safe values."""
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        value = float(value)
    if isinstance(value, np.ndarray):
        return [_plain(v) for v in value.tolist()]
    if isinstance(value, float) and not math.isfinite(value):
        return None
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    return value


def dumps_artifact(data):
    """Deterministic JSON text: sorted keys, fixed indent, trailing newline."""
    return json.dumps(_plain(data), sort_keys=True, indent=2) + "\n"


def write_artifact(data, path=None):
    """Write JSON to path, or to standard output when no path is given."""
    text = dumps_artifact(data)
    if not path:
        sys.stdout.write(text)
        return
    if get_file_type(path) != 'json':
        raise ValueError(f"artifact path must end in .json: {path}")
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(text)
    logger.info(f"wrote {path}")


def load_artifact(path):
    """
    Reads a JSON artifact.
    Returns (data, None) on success and (None, message) on failure.
    """
    if get_file_type(path) != 'json':
        return None, f"Unsupported artifact format: {path}"
    try:
        with open(path, "r", encoding="utf-8") as f:
            return json.load(f), None
    except (OSError, json.JSONDecodeError) as e:
        logger.error(f"Error reading artifact {path}: {e}")
        return None, str(e)


def csv_text(header, rows):
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_plain(v) for v in row])
    return buffer.getvalue()


def write_csv(header, rows, path=None):
    """Plot-ready series; standard output when no path is given."""
    text = csv_text(header, rows)
    if not path:
        sys.stdout.write(text)
        return
    if get_file_type(path) != 'csv':
        raise ValueError(f"csv path must end in .csv: {path}")
    with open(path, "w", encoding="utf-8", newline="") as f:
        f.write(text)
    logger.info(f"wrote {path}")
