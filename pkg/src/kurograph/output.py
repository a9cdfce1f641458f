"""CSV files with a self-describing comment header.

Layout::

    # kurograph 0.1.0
    # generated: 2026-01-01T00:00:00+00:00
    # seed: 7
    # meta: key = value
    # config: [kernel]
    # config: kind = constant
    ...
    col1,col2
    ...

Everything except the ``generated`` line is a deterministic function of the
inputs, so rerunning the echoed config reproduces the file.
"""

from __future__ import annotations

import csv
import datetime as _dt
import math
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from . import __version__

STAMP_PREFIX = "# generated:"


def fmt(v) -> str:
    """Float formatting with round-trip precision and named infinities."""
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if math.isinf(v):
            return "pos_inf" if v > 0 else "neg_inf"
        if math.isnan(v):
            return "nan"
        return repr(v)
    return str(v)


def parse_value(s: str):
    s = s.strip()
    if s == "pos_inf":
        return math.inf
    if s == "neg_inf":
        return -math.inf
    try:
        return float(s)
    except ValueError:
        return s


def write_csv(path, columns: Sequence[str], rows: Iterable[Sequence], config=None,
              seed: Optional[int] = None, meta: Optional[Dict[str, object]] = None) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    if seed is None and config is not None:
        seed = config.seed
    stamp = _dt.datetime.now(_dt.timezone.utc).replace(microsecond=0).isoformat()
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(f"# kurograph {__version__}\n{STAMP_PREFIX} {stamp}\n")
        fh.write(f"# seed: {'none' if seed is None else seed}\n")
        for k, v in (meta or {}).items():
            fh.write(f"# meta: {k} = {fmt(v)}\n")
        if config is not None:
            for line in config.echo().splitlines():
                fh.write(f"# config: {line}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for row in rows:
            w.writerow([fmt(v) for v in row])
    return path


def read_csv(path) -> Tuple[Dict[str, object], str, Dict[str, np.ndarray]]:
    """Return (meta, config text, columns).  Non-numeric columns stay as strings."""
    meta: Dict[str, object] = {}
    cfg: List[str] = []
    body: List[str] = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if line.startswith("# meta: "):
                k, _, v = line[8:].partition(" = ")
                meta[k.strip()] = parse_value(v)
            elif line.startswith("# seed: "):
                meta["seed"] = parse_value(line[8:])
            elif line.startswith("# config: "):
                cfg.append(line[10:].rstrip("\n"))
            elif not line.startswith("#"):
                body.append(line)
    reader = csv.reader(body)
    header = next(reader)
    data = list(reader)
    cols: Dict[str, np.ndarray] = {}
    for j, name in enumerate(header):
        vals = [parse_value(r[j]) for r in data]
        cols[name] = np.asarray(vals, dtype=float) if all(isinstance(v, float) for v in vals) \
            else np.asarray(vals, dtype=object)
    return meta, "\n".join(cfg) + ("\n" if cfg else ""), cols


def strip_stamp(text: str) -> str:
    """File contents without the timestamp line (for reproducibility checks)."""
    return "".join(l for l in text.splitlines(keepends=True) if not l.startswith(STAMP_PREFIX))
