"""CSV, JSON config and ensemble manifest formats."""
from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .attractor import PointCloud, PolylineApproximant
from .errors import ConfigError, FIFError, IoError
from .examples import get_example
from .ifs import InterpolationIFS, ifs_from_data


def fmt(v) -> str:
    """17 significant digits: enough to round-trip any double."""
    return format(float(v), ".17g")


def _write(path, header, rows):
    try:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            w.writerows(rows)
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc


def export_csv(obj, path) -> None:
    """Write a cloud (``x,y,branch``, generation order) or a function sample
    (``x,y``, ascending ``x``): a polyline or an ``(xs, ys)`` pair."""
    if isinstance(obj, PointCloud):
        rows = ((fmt(x), fmt(y), int(t)) for (x, y), t in zip(obj.points, obj.tags))
        _write(path, ["x", "y", "branch"], rows)
        return
    if isinstance(obj, PolylineApproximant):
        xs, ys = obj.xs, obj.ys
    else:
        xs, ys = (np.asarray(v, dtype=float) for v in obj)
        order = np.argsort(xs, kind="stable")
        xs, ys = xs[order], ys[order]
    _write(path, ["x", "y"], ((fmt(x), fmt(y)) for x, y in zip(xs, ys)))


def read_csv(path):
    """Inverse of :func:`export_csv`: a PointCloud or an ``(xs, ys)`` pair."""
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc}") from exc
    header, body = rows[0], rows[1:]
    data = np.array(body, dtype=float).reshape(len(body), len(header))
    if header == ["x", "y", "branch"]:
        return PointCloud(data[:, :2], data[:, 2].astype(np.int64))
    if header == ["x", "y"]:
        return data[:, 0], data[:, 1]
    raise IoError(f"unrecognised CSV header {header}")


_CONFIG_KEYS = {
    "affine_interpolation": {"kind", "nodes", "vertical_scaling", "name"},
    "builtin": {"kind", "name", "params"},
}


def load_config(source) -> InterpolationIFS:
    """IFS from a JSON config (path, JSON text or already-parsed dict)::

        {"kind": "affine_interpolation", "nodes": [[x, y], ...], "vertical_scaling": [d, ...]}
        {"kind": "builtin", "name": "<example id>", "params": {...}}
    """
    if isinstance(source, dict):
        cfg = source
    else:
        text = str(source)
        if not text.lstrip().startswith("{"):
            try:
                text = Path(source).read_text(encoding="utf-8")
            except OSError as exc:
                raise IoError(f"cannot read config {source}: {exc}") from exc
        try:
            cfg = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid JSON: {exc}") from exc
    if not isinstance(cfg, dict):
        raise ConfigError("config must be a JSON object")
    kind = cfg.get("kind")
    if kind not in _CONFIG_KEYS:
        raise ConfigError(f"unknown kind {kind!r}; expected one of {sorted(_CONFIG_KEYS)}")
    extra = set(cfg) - _CONFIG_KEYS[kind]
    if extra:
        raise ConfigError(f"unknown keys for {kind}: {sorted(extra)}")
    try:
        if kind == "affine_interpolation":
            return ifs_from_data(cfg["nodes"], cfg["vertical_scaling"], name=cfg.get("name", ""))
        params = cfg.get("params", {})
        if not isinstance(params, dict):
            raise ConfigError("params must be an object")
        entry = get_example(cfg["name"], **params)
    except KeyError as exc:
        if isinstance(exc, FIFError):
            raise
        raise ConfigError(f"missing key {exc}") from None
    except (TypeError, ValueError) as exc:
        if isinstance(exc, FIFError):
            raise
        raise ConfigError(f"malformed config: {exc}") from exc
    if not isinstance(entry.ifs, InterpolationIFS):
        raise ConfigError(f"example {cfg['name']!r} is not an interpolation IFS")
    return entry.ifs


def export_ensemble(members, clouds, directory) -> Path:
    """One ``<prefix>.csv`` per member plus ``manifest.json``; returns the manifest path."""
    out = Path(directory)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise IoError(f"cannot create {out}: {exc}") from exc
    entries = []
    for m, cloud in zip(members, clouds):
        name = f"{m.label}.csv"
        export_csv(cloud, out / name)
        dom = m.domain
        entries.append({"prefix": m.label, "file": name, "domain": [dom.lo, dom.hi]})
    k = len(members[0].prefix) if members else 0
    manifest = {"k": k, "count": len(entries), "members": entries}
    path = out / "manifest.json"
    try:
        path.write_text(json.dumps(manifest, indent=2) + "\n", encoding="utf-8")
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc
    return path
