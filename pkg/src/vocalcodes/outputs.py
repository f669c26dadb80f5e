"""Writers that stamp every output file with its provenance."""

from __future__ import annotations

import csv
import json
from pathlib import Path

from . import __version__


def provenance_line(config_hash):
    return f"# vocalcodes {__version__} config_hash={config_hash}\n"


def write_csv(path, header, rows, config_hash):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        fh.write(provenance_line(config_hash))
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def write_json(path, payload, config_hash):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    payload = {"tool": "vocalcodes", "version": __version__, "config_hash": config_hash, **payload}
    path.write_text(json.dumps(payload, sort_keys=True, indent=1) + "\n")


def read_csv(path):
    """Rows of a CSV written by ``write_csv``, as dicts, provenance line skipped."""
    with open(path, newline="") as fh:
        return list(csv.DictReader(line for line in fh if not line.startswith("#")))


def entropy_rows(record):
    return [(s, repr(b)) for s, b in record.entropy.to_rows()]


def attractor_rows(record):
    return [
        (agent, k, repr(float(p[0])), repr(float(p[1])))
        for agent, points in enumerate(record.attractors)
        for k, p in enumerate(points)
    ]


def field_rows(points, images):
    return [tuple(repr(float(v)) for v in (*x, *y)) for x, y in zip(points, images)]


def write_run(record, out_dir, include_wall_clock=True):
    """Record JSON plus entropy and attractor CSVs for one run."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    h = record.to_dict()["config_hash"]
    (out / "record.json").write_text(record.to_json(include_wall_clock) + "\n")
    write_csv(out / "entropy.csv", ["step", "entropy_bits"], entropy_rows(record), h)
    write_csv(out / "attractors.csv", ["agent_id", "attractor_id", "c0", "c1"], attractor_rows(record), h)
    return out
