"""
Writers for experiment datasets.

CSV files start with '#'-prefixed header lines echoing the full config,
the package version, the run summary (fits, residuals) and optionally a
timestamp. Floats are printed with 17 significant digits so they
round-trip exactly.
"""

import io
import json
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Dict, List, Optional

import numpy as np
import pandas as pd
from loguru import logger

from fermichain.config import settings
from fermichain.constants import RNG_ALGORITHM, VERSION


def _jsonable(value: Any) -> Any:
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, complex):
        return [value.real, value.imag]
    return value


def header_lines(
    config_json: str,
    timestamp: bool = True,
    summary: Optional[Dict[str, Any]] = None,
) -> List[str]:
    """The '#' lines written above every CSV body."""
    lines = [
        f"# fermichain {VERSION}",
        f"# rng {RNG_ALGORITHM}",
        f"# config {config_json}",
    ]
    if summary:
        lines.append(f"# summary {json.dumps(_jsonable(summary))}")
    if timestamp:
        lines.append(f"# created {datetime.now(timezone.utc).isoformat()}")
    return lines


def format_csv(
    frame: pd.DataFrame,
    config_json: str,
    timestamp: bool = True,
    summary: Optional[Dict[str, Any]] = None,
) -> str:
    """Render a frame as CSV text; fits and scalars go in a summary line."""
    buffer = io.StringIO()
    for line in header_lines(config_json, timestamp, summary):
        buffer.write(line + "\n")
    frame.to_csv(
        buffer,
        index=False,
        float_format=settings.CSV_FLOAT_FORMAT,
        lineterminator="\n",
    )
    return buffer.getvalue()


def format_json(
    frame: pd.DataFrame,
    config_json: str,
    summary: Optional[Dict[str, Any]] = None,
    timestamp: bool = True,
) -> str:
    """Render a frame as a JSON document {config, summary, rows}."""
    document = {
        "version": VERSION,
        "rng": RNG_ALGORITHM,
        "config": json.loads(config_json),
        "summary": _jsonable(summary or {}),
        "rows": _jsonable(frame.to_dict(orient="records")),
    }
    if timestamp:
        document["created"] = datetime.now(timezone.utc).isoformat()
    return json.dumps(document, indent=2)


def write_output(
    text: str, path: Optional[Path] = None
) -> Optional[Path]:
    """
    Write rendered output to a file, or return None so the caller prints it.

    Args:
        text (str): Rendered CSV or JSON.
        path (Optional[Path]): Destination; parent directories are created.

    Returns:
        Optional[Path]: The written path.
    """
    if path is None:
        return None
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)
    logger.info(f"Wrote {path}")
    return path


def read_csv(path: Path) -> pd.DataFrame:
    """Load a CSV written by `format_csv`, skipping the header comments."""
    return pd.read_csv(path, comment="#")


def read_summary(path: Path) -> Dict[str, Any]:
    """The '# summary' header of a CSV written by `format_csv`, or {}."""
    with open(path) as handle:
        for line in handle:
            if not line.startswith("#"):
                break
            if line.startswith("# summary "):
                return json.loads(line[len("# summary "):])
    return {}
