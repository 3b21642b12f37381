"""Reading and writing networks, datasets, polynomials and reports.

Network JSON::

    {"input_dim": d, "hidden": m, "output_dim": o, "activation": "sigmoid",
     "w_in": d rows of m numbers (row i = weights leaving input i),
     "b_hidden": m numbers,
     "w_out": m rows of o numbers (row j = weights leaving hidden neuron j),
     "b_out": o numbers}

Dataset CSV: header ``x_1,...,x_d,y`` plus an optional ``weight`` column;
weights are normalized to sum to one, uniform when absent.
"""
from __future__ import annotations

import csv
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import SPEC_VERSION
from .errors import InputFormatError, LabError
from .landscape import EmpiricalMeasure, TargetFunction
from .net_core import Activation, ParameterVector, Topology, get_activation
from .polyslice import Polynomial


def _read_text(path) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise InputFormatError(f"cannot read file: {exc.strerror}", path=str(path)) from None


def _read_json(path):
    try:
        return json.loads(_read_text(path))
    except json.JSONDecodeError as exc:
        raise InputFormatError(f"invalid JSON: {exc.msg} at line {exc.lineno}", path=str(path)) from None


def _matrix(data, field, rows, cols, path):
    value = data.get(field)
    if not isinstance(value, list) or len(value) != rows:
        raise InputFormatError(f"expected a list of {rows} rows", path, field)
    for k, row in enumerate(value):
        if not isinstance(row, list) or len(row) != cols:
            raise InputFormatError(f"row {k} must hold {cols} numbers (ragged or malformed)", path, field)
        if not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in row):
            raise InputFormatError(f"row {k} contains a non-number", path, field)
    return np.array(value, dtype=float).reshape(rows, cols)


def _vector(data, field, length, path):
    value = data.get(field)
    if not isinstance(value, list) or len(value) != length:
        raise InputFormatError(f"expected a list of {length} numbers", path, field)
    if not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in value):
        raise InputFormatError("contains a non-number", path, field)
    return np.array(value, dtype=float)


def network_from_dict(data: dict, path=None) -> tuple[ParameterVector, Activation]:
    if not isinstance(data, dict):
        raise InputFormatError("network must be a JSON object", path)
    dims = {}
    for key in ("input_dim", "hidden", "output_dim"):
        v = data.get(key)
        if not isinstance(v, int) or isinstance(v, bool):
            raise InputFormatError("missing or non-integer", path, key)
        dims[key] = v
    if not isinstance(data.get("activation"), str):
        raise InputFormatError("missing activation name", path, "activation")
    try:
        topo = Topology(dims["input_dim"], dims["hidden"], dims["output_dim"])
    except LabError as exc:
        raise InputFormatError(str(exc), path) from None
    d, m, o = topo.input_dim, topo.hidden, topo.output_dim
    theta = ParameterVector(_matrix(data, "w_in", d, m, path), _vector(data, "b_hidden", m, path),
                            _matrix(data, "w_out", m, o, path), _vector(data, "b_out", o, path))
    return theta, get_activation(data["activation"])


def network_to_dict(theta: ParameterVector, act: Activation) -> dict:
    return {"input_dim": theta.d, "hidden": theta.m, "output_dim": theta.o, "activation": act.name,
            "w_in": theta.w_in.tolist(), "b_hidden": theta.b_hidden.tolist(),
            "w_out": theta.w_out.tolist(), "b_out": theta.b_out.tolist()}


def load_network(path):
    return network_from_dict(_read_json(path), str(path))


def load_dataset(path) -> tuple[EmpiricalMeasure, TargetFunction]:
    text = _read_text(path)
    rows = list(csv.reader(text.splitlines()))
    if not rows:
        raise InputFormatError("empty dataset", str(path))
    header = [h.strip() for h in rows[0]]
    xs = [h for h in header if h.startswith("x_")]
    expected = [f"x_{i + 1}" for i in range(len(xs))]
    if not xs or header[: len(xs)] != expected:
        raise InputFormatError("header must start with x_1,...,x_d", str(path), "header")
    rest = header[len(xs):]
    if rest not in (["y"], ["y", "weight"]):
        raise InputFormatError("after the inputs the header must be y or y,weight", str(path), "header")
    body = [r for r in rows[1:] if any(c.strip() for c in r)]
    if not body:
        raise InputFormatError("dataset has no rows", str(path))
    try:
        values = np.array([[float(c) for c in r] for r in body])
    except ValueError as exc:
        raise InputFormatError(f"non-numeric entry: {exc}", str(path)) from None
    if values.ndim != 2 or values.shape[1] != len(header):
        raise InputFormatError("rows must have as many entries as the header", str(path))
    if not np.all(np.isfinite(values)):
        raise InputFormatError("non-finite entry", str(path))
    d = len(xs)
    if "weight" in rest:
        w = values[:, d + 1]
        if np.any(w <= 0):
            raise InputFormatError("weights must be strictly positive", str(path), "weight")
        w = w / w.sum()
    else:
        w = np.full(len(body), 1.0 / len(body))
    return EmpiricalMeasure(values[:, :d], w), TargetFunction(values[:, d])


def write_dataset(path, mu: EmpiricalMeasure, f: TargetFunction, weights: bool = False):
    header = [f"x_{i + 1}" for i in range(mu.d)] + ["y"] + (["weight"] if weights else [])
    lines = [",".join(header)]
    for n in range(mu.n):
        vals = list(mu.atoms[n]) + [float(np.asarray(f.values).reshape(mu.n, -1)[n, 0])]
        if weights:
            vals.append(mu.weights[n])
        lines.append(",".join(format_float(v) for v in vals))
    Path(path).write_text("\n".join(lines) + "\n")


def load_polynomial(path) -> Polynomial:
    data = _read_json(path)
    if not isinstance(data, dict) or not isinstance(data.get("d"), int) or not isinstance(data.get("terms"), list):
        raise InputFormatError('polynomial must look like {"d": int, "terms": [...]}', str(path))
    for k, term in enumerate(data["terms"]):
        if (not isinstance(term, dict) or not isinstance(term.get("r"), list) or len(term["r"]) != data["d"]
                or not all(isinstance(v, int) and v >= 0 for v in term["r"])
                or not isinstance(term.get("c"), (int, float))):
            raise InputFormatError(f"term {k} needs r (d non-negative ints) and c (number)", str(path), "terms")
    return Polynomial.from_dict(data)


def format_float(v) -> str:
    return format(float(v), ".17g")


def _clean(obj):
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else repr(v)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def dump_json(payload: dict, out=None, command: str = None) -> str:
    body = {"spec_version": SPEC_VERSION}
    if command:
        body["command"] = command
    body.update(payload)
    text = json.dumps(_clean(body), indent=2) + "\n"
    if out is None or out == "-":
        sys.stdout.write(text)
    else:
        try:
            Path(out).write_text(text)
        except OSError as exc:
            raise InputFormatError(f"cannot write output: {exc.strerror}", str(out)) from None
    return text


def write_csv(path, header, rows):
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(format_float(v) if isinstance(v, float) else str(v) for v in row))
    try:
        Path(path).write_text("\n".join(lines) + "\n")
    except OSError as exc:
        raise InputFormatError(f"cannot write output: {exc.strerror}", str(path)) from None
