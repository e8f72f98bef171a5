"""Output files: CSV with a config header line, JSON reports, YAML configs."""
import csv
import json
from pathlib import Path

import numpy as np
import yaml


def fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    return str(v)


def header_line(config):
    return "# config: " + json.dumps(config, sort_keys=True, default=_jsonable)


def _jsonable(v):
    if isinstance(v, np.generic):
        return v.item()
    if isinstance(v, np.ndarray):
        return v.tolist()
    raise TypeError(f"cannot serialize {type(v).__name__}")


def write_csv(path, columns, rows, config):
    """RFC-4180 body preceded by one ``# config: {...}`` line."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        fh.write(header_line(config) + "\r\n")
        w = csv.writer(fh)
        w.writerow(columns)
        for row in rows:
            w.writerow([fmt(v) for v in row])
    return path


def read_csv(path):
    """Return ``(config, columns, rows)`` with rows as lists of strings."""
    with open(path, newline="") as fh:
        first = fh.readline()
        if not first.startswith("# config: "):
            raise ValueError(f"{path} has no config header")
        config = json.loads(first[len("# config: "):])
        reader = csv.reader(fh)
        columns = next(reader)
        rows = list(reader)
    return config, columns, rows


def numeric_content(path):
    """The CSV body only (header line dropped), for reproducibility checks."""
    text = Path(path).read_text()
    return text.split("\n", 1)[1]


def write_json(path, payload, config):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    body = {"config": config, **payload}
    path.write_text(json.dumps(body, indent=2, sort_keys=True, default=_jsonable) + "\n")
    return path


def load_config_file(path):
    with open(path) as fh:
        data = yaml.safe_load(fh)
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ValueError("config file must hold a mapping of keys to values")
    return data
