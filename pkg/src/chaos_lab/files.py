"""Kernel files and reproducible reports."""
from __future__ import annotations

import hashlib
import json
import warnings
from pathlib import Path

from .errors import DuplicateKey, RepeatedIndex, SchemaError
from .kernels import ChaosCoefficients, SymmetricKernel

__all__ = [
    "UnsortedIndexWarning",
    "kernel_to_json",
    "kernel_from_json",
    "save_kernel",
    "load_kernel",
    "kernel_hash",
    "report_header",
    "dump_report",
]

FORMAT_VERSION = 1


class UnsortedIndexWarning(UserWarning):
    """A kernel file listed an index out of increasing order; it was sorted."""


def _num(v: float) -> str:
    s = format(float(v), ".17g")
    if s in ("inf", "-inf", "nan"):
        raise ValueError(f"non-finite coefficient {v}")
    return s


def kernel_to_json(c: ChaosCoefficients, meta: dict | None = None) -> str:
    """Canonical text: levels ascending, keys ascending, values with 17 significant digits."""
    lines = ["{", f'  "max_level": {c.max_level},', '  "levels": [']
    levels = sorted(c.levels)
    for li, m in enumerate(levels):
        k = c.kernel(m)
        ents = [f"[[{', '.join(map(str, key))}], {_num(v)}]" for key, v in sorted(k.entries.items())]
        body = ",\n      ".join(ents)
        tail = "," if li < len(levels) - 1 else ""
        lines.append(f'    {{"m": {m}, "entries": [\n      {body}\n    ]}}{tail}' if ents
                     else f'    {{"m": {m}, "entries": []}}{tail}')
    lines.append("  ],")
    lines.append(f'  "meta": {json.dumps(meta or {}, sort_keys=True)}')
    lines.append("}")
    return "\n".join(lines) + "\n"


def _is_int(x):
    return isinstance(x, int) and not isinstance(x, bool)


def kernel_from_json(doc) -> ChaosCoefficients:
    """Parse a kernel document (text or already-decoded object)."""
    if isinstance(doc, (str, bytes)):
        try:
            doc = json.loads(doc)
        except json.JSONDecodeError as e:
            raise SchemaError(f"invalid JSON: {e.msg} at line {e.lineno}", "") from None
    if not isinstance(doc, dict):
        raise SchemaError("kernel file must be a JSON object", "")
    if "levels" not in doc:
        raise SchemaError("missing key 'levels'", "/levels")
    levels = doc["levels"]
    if not isinstance(levels, list):
        raise SchemaError("'levels' must be an array", "/levels")
    out = {}
    for li, lv in enumerate(levels):
        ptr = f"/levels/{li}"
        if not isinstance(lv, dict):
            raise SchemaError("level must be an object", ptr)
        m = lv.get("m")
        if not _is_int(m) or m < 1:
            raise SchemaError("'m' must be an integer >= 1", ptr + "/m")
        if m in out:
            raise SchemaError(f"level {m} listed twice", ptr + "/m")
        ents = lv.get("entries")
        if not isinstance(ents, list):
            raise SchemaError("'entries' must be an array", ptr + "/entries")
        data = {}
        for ei, ent in enumerate(ents):
            ep = f"{ptr}/entries/{ei}"
            if not (isinstance(ent, list) and len(ent) == 2):
                raise SchemaError("entry must be [index, value]", ep)
            idx, val = ent
            if not isinstance(idx, list) or not all(_is_int(i) for i in idx):
                raise SchemaError("index must be an array of integers", ep + "/0")
            if isinstance(val, bool) or not isinstance(val, (int, float)):
                raise SchemaError("value must be a number", ep + "/1")
            if len(idx) != m:
                raise SchemaError(f"index has length {len(idx)}, level is {m}", ep + "/0")
            if any(i < 1 for i in idx):
                raise SchemaError("indices are 1-based", ep + "/0")
            key = tuple(sorted(idx))
            if len(set(key)) != len(key):
                raise RepeatedIndex(f"index {idx} has a repeated entry", ep)
            if list(key) != idx:
                warnings.warn(f"index {idx} at {ep} is not increasing; stored as {list(key)}",
                              UnsortedIndexWarning, stacklevel=2)
            if key in data:
                raise DuplicateKey(f"index {list(key)} appears twice (at {ep})")
            data[key] = float(val)
        out[m] = SymmetricKernel(m, data)
    top = max(out, default=1)
    N = doc.get("max_level", top)
    if not _is_int(N) or N < top:
        raise SchemaError(f"'max_level' must be an integer >= {top}", "/max_level")
    return ChaosCoefficients(out, max_level=N)


def save_kernel(c: ChaosCoefficients, path, meta: dict | None = None) -> Path:
    path = Path(path)
    path.write_text(kernel_to_json(c, meta))
    return path


def load_kernel(path) -> ChaosCoefficients:
    path = Path(path)
    try:
        text = path.read_text()
    except FileNotFoundError:
        raise FileNotFoundError(f"kernel file not found: {path}") from None
    return kernel_from_json(text)


def kernel_hash(c: ChaosCoefficients) -> str:
    return hashlib.sha256(kernel_to_json(c).encode()).hexdigest()


def report_header(command: str, seed=None, shards=None, kernel: ChaosCoefficients | None = None,
                  **extra) -> dict:
    from . import __version__
    h = {"tool": "chaos_lab", "version": __version__, "command": command,
         "seed": seed, "shards": shards,
         "kernel_sha256": kernel_hash(kernel) if kernel is not None else None}
    h.update(extra)
    return h


def _clean(x):
    """Make a report JSON-safe: numpy scalars to Python, tuples to lists, non-finite to strings."""
    import math
    import numpy as np
    if isinstance(x, dict):
        return {str(k): _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    if isinstance(x, np.ndarray):
        return [_clean(v) for v in x.tolist()]
    if isinstance(x, (np.bool_, bool)):
        return bool(x)
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, (np.floating, float)):
        x = float(x)
        return x if math.isfinite(x) else repr(x)
    return x


def dump_report(report: dict) -> str:
    """Deterministic JSON text (sorted keys, shortest round-trip floats)."""
    return json.dumps(_clean(report), indent=2, sort_keys=True) + "\n"
