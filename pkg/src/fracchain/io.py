"""CSV/JSON output with a metadata header, and config loading."""

from __future__ import annotations

import json
import os
from importlib import resources
from pathlib import Path

import jsonschema

from .params import ConfigError

TOOL_VERSION = "0.1.0"
_HEADER_PREFIX = "# "


def format_value(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        return format(v, ".17g")
    try:
        import numpy as np

        if isinstance(v, np.integer):
            return str(int(v))
        if isinstance(v, np.floating):
            return format(float(v), ".17g")
    except ImportError:  # pragma: no cover
        pass
    return str(v)


def safe_path(out_dir: str | os.PathLike, name: str) -> Path:
    """out_dir / name, refusing names that escape out_dir."""
    base = Path(out_dir).resolve()
    path = (base / name).resolve()
    if base != path.parent and base not in path.parents:
        raise ConfigError(f"output {name!r} would leave the output directory")
    return path


def write_csv(path: Path, columns, rows, config: dict, seed=None) -> Path:
    """Rows of values under a '#' header echoing the tool version, seed and config."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [
        f"{_HEADER_PREFIX}tool: fracchain {TOOL_VERSION}",
        f"{_HEADER_PREFIX}seed: {'none' if seed is None else seed}",
        f"{_HEADER_PREFIX}config: {json.dumps(config, sort_keys=True)}",
        ",".join(columns),
    ]
    for row in rows:
        if len(row) != len(columns):
            raise ValueError("row length does not match the column count")
        lines.append(",".join(format_value(v) for v in row))
    with open(path, "w", newline="\n", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")
    return path


def write_json(path: Path, payload: dict, config: dict, seed=None) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    doc = {"tool": f"fracchain {TOOL_VERSION}", "seed": seed, "config": config, "data": payload}
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True, default=_json_default)
        fh.write("\n")
    return path


def _json_default(o):
    import numpy as np

    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    raise TypeError(f"cannot serialize {type(o).__name__}")


def read_csv(path) -> tuple[dict, list[str], list[list[str]]]:
    """(header dict, column names, rows as strings)."""
    header = {}
    cols = None
    rows = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.rstrip("\n")
            if line.startswith(_HEADER_PREFIX):
                key, _, val = line[len(_HEADER_PREFIX):].partition(": ")
                header[key] = val
            elif cols is None:
                cols = line.split(",")
            elif line:
                rows.append(line.split(","))
    return header, cols or [], rows


def config_from_output(path) -> dict:
    """The config echoed in an output file's header (CSV or JSON)."""
    path = Path(path)
    if path.suffix == ".json":
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)["config"]
    header, _, _ = read_csv(path)
    if "config" not in header:
        raise ConfigError(f"{path} has no config echo")
    return json.loads(header["config"])


def schema() -> dict:
    text = resources.files("fracchain").joinpath("schema/run_config.schema.json").read_text()
    return json.loads(text)


def validate_config(cfg: dict) -> None:
    try:
        jsonschema.validate(cfg, schema())
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError(f"invalid config at {where}: {exc.message}") from None


def load_config(path) -> dict:
    """A JSON config file, or the config echo of a previous output."""
    path = Path(path)
    try:
        if path.suffix in (".csv", ".json") and _looks_like_output(path):
            cfg = config_from_output(path)
        else:
            with open(path, encoding="utf-8") as fh:
                cfg = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    validate_config(cfg)
    return cfg


def _looks_like_output(path: Path) -> bool:
    if path.suffix == ".csv":
        return True
    with open(path, encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError:
            return False
    return isinstance(doc, dict) and "config" in doc and "tool" in doc
