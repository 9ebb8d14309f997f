"""File formats and report writing.

Matrix file (UTF-8 JSON, one object per file)::

    {"dim": d, "entries": [[re, im], ...]}

with exactly d*d entry pairs in row-major order. Non-square operators (Kraus
blocks of dimension-changing maps) use ``{"rows": r, "cols": c, "entries":
[...]}`` with r*c pairs instead.

Channel file::

    {"dimIn": d, "dimOut": e, "kraus": [<matrix object>, ...]}

Family descriptor::

    {"kind": "jump", "c": 0.6931, "dim": 2}
    {"kind": "continuous", "dim": 3, "seed": 7}
    {"kind": "table", "dim": d,
     "members": [{"n": 1, "rho": <matrix>, "sigma": <matrix>}, ...],
     "limit": {"rho": <matrix>, "sigma": <matrix>},
     "analytic_jump": 0.5}            # optional; "inf" allowed

Reports are JSON documents with the volatile ``runtime_ms`` field at top
level; rerunning with the same seed reproduces them byte for byte apart from
that field. Writes are atomic (temp file in the target directory, then
rename). CSV output flattens the per-trial rows.
"""

import csv
import json
import math
import os
import tempfile
from typing import Any

import numpy as np

from .channels import KrausOperation
from .errors import FileFormatError
from .extreal import ExtendedNonNegative
from .operators import HermitianMatrix, PositiveOperator, Projector
from .sequences import (
    StateSequenceFamily,
    continuous_family,
    jump_family,
    tabulated_family,
)


def matrix_to_obj(m: np.ndarray) -> dict:
    m = np.asarray(m, dtype=complex)
    entries = [[float(z.real), float(z.imag)] for z in m.reshape(-1)]
    if m.shape[0] == m.shape[1]:
        return {"dim": int(m.shape[0]), "entries": entries}
    return {"rows": int(m.shape[0]), "cols": int(m.shape[1]), "entries": entries}


def matrix_from_obj(obj: Any, what: str = "matrix") -> np.ndarray:
    if not isinstance(obj, dict):
        raise FileFormatError(f"{what}: expected a JSON object, got {type(obj).__name__}")
    if "dim" in obj:
        rows = cols = obj["dim"]
    elif "rows" in obj and "cols" in obj:
        rows, cols = obj["rows"], obj["cols"]
    else:
        raise FileFormatError(f"{what}: needs 'dim' or 'rows'/'cols'")
    try:
        rows, cols = int(rows), int(cols)
    except (TypeError, ValueError):
        raise FileFormatError(f"{what}: dimensions must be integers") from None
    if rows < 1 or cols < 1:
        raise FileFormatError(f"{what}: dimensions must be positive")
    entries = obj.get("entries")
    if not isinstance(entries, list) or len(entries) != rows * cols:
        raise FileFormatError(
            f"{what}: expected {rows * cols} [re, im] entries, got "
            f"{len(entries) if isinstance(entries, list) else type(entries).__name__}"
        )
    flat = []
    for k, pair in enumerate(entries):
        if (
            not isinstance(pair, (list, tuple))
            or len(pair) != 2
            or not all(isinstance(x, (int, float)) for x in pair)
        ):
            raise FileFormatError(f"{what}: entry {k} is not an [re, im] pair")
        flat.append(complex(pair[0], pair[1]))
    return np.array(flat, dtype=complex).reshape(rows, cols)


def _load_json(path) -> Any:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise FileFormatError(f"{path}: not valid JSON ({exc})") from None


def load_positive(path) -> PositiveOperator:
    return PositiveOperator(matrix_from_obj(_load_json(path), what=str(path)))


def load_hermitian(path) -> HermitianMatrix:
    return HermitianMatrix(matrix_from_obj(_load_json(path), what=str(path)))


def load_projector(path) -> Projector:
    return Projector(matrix_from_obj(_load_json(path), what=str(path)))


def save_matrix(path, m: np.ndarray) -> None:
    _atomic_write(path, json.dumps(matrix_to_obj(m), sort_keys=True, indent=1))


def load_channel(path) -> KrausOperation:
    obj = _load_json(path)
    if not isinstance(obj, dict) or "kraus" not in obj:
        raise FileFormatError(f"{path}: channel file needs a 'kraus' list")
    kraus = [
        matrix_from_obj(k, what=f"{path} kraus[{i}]") for i, k in enumerate(obj["kraus"])
    ]
    op = KrausOperation(kraus)
    for key, expected in (("dimIn", op.dim_in), ("dimOut", op.dim_out)):
        if key in obj and int(obj[key]) != expected:
            raise FileFormatError(
                f"{path}: declared {key}={obj[key]} but Kraus blocks have {expected}"
            )
    return op


def save_channel(path, op: KrausOperation) -> None:
    obj = {
        "dimIn": op.dim_in,
        "dimOut": op.dim_out,
        "kraus": [matrix_to_obj(k) for k in op.kraus],
    }
    _atomic_write(path, json.dumps(obj, sort_keys=True, indent=1))


def family_from_descriptor(obj: Any, what: str = "family") -> StateSequenceFamily:
    if not isinstance(obj, dict) or "kind" not in obj:
        raise FileFormatError(f"{what}: descriptor needs a 'kind' field")
    kind = obj["kind"]
    if kind == "jump":
        try:
            return jump_family(float(obj["c"]), int(obj.get("dim", 2)))
        except (KeyError, TypeError, ValueError) as exc:
            raise FileFormatError(f"{what}: bad jump descriptor ({exc})") from None
    if kind == "continuous":
        try:
            return continuous_family(int(obj["dim"]), int(obj["seed"]))
        except (KeyError, TypeError, ValueError) as exc:
            raise FileFormatError(f"{what}: bad continuous descriptor ({exc})") from None
    if kind == "table":
        return _table_family(obj, what)
    raise FileFormatError(f"{what}: unknown family kind {kind!r}")


def _table_family(obj: dict, what: str) -> StateSequenceFamily:
    try:
        dim = int(obj["dim"])
        members = {}
        for row in obj["members"]:
            n = int(row["n"])
            members[n] = (
                PositiveOperator(matrix_from_obj(row["rho"], what=f"{what} rho[{n}]")),
                PositiveOperator(matrix_from_obj(row["sigma"], what=f"{what} sigma[{n}]")),
            )
        limit = (
            PositiveOperator(matrix_from_obj(obj["limit"]["rho"], what=f"{what} limit rho")),
            PositiveOperator(matrix_from_obj(obj["limit"]["sigma"], what=f"{what} limit sigma")),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise FileFormatError(f"{what}: bad table descriptor ({exc})") from None
    jump = None
    if "analytic_jump" in obj:
        raw = obj["analytic_jump"]
        jump = (
            ExtendedNonNegative.infinity()
            if raw == "inf"
            else ExtendedNonNegative.finite(float(raw))
        )
    return tabulated_family(dim, members, limit, analytic_jump=jump)


def load_family(path) -> StateSequenceFamily:
    return family_from_descriptor(_load_json(path), what=str(path))


def jsonable(value: Any) -> Any:
    """Recursively convert report values to strict-JSON-safe types.

    Non-finite floats become the strings "inf", "-inf", "nan" so the output
    is standard JSON; numpy scalars and arrays become plain Python values.
    """
    if isinstance(value, dict):
        return {str(k): jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [jsonable(v) for v in value]
    if isinstance(value, ExtendedNonNegative):
        return jsonable(value.value)
    if isinstance(value, np.ndarray):
        return [jsonable(v) for v in value.tolist()]
    if isinstance(value, (np.floating, float)):
        value = float(value)
        if math.isnan(value):
            return "nan"
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return value
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.bool_,)):
        return bool(value)
    return value


def report_json(report: dict) -> str:
    return json.dumps(jsonable(report), sort_keys=True, indent=1) + "\n"


def _flatten(prefix: str, value: Any, out: dict) -> None:
    if isinstance(value, dict):
        for k, v in value.items():
            _flatten(f"{prefix}.{k}" if prefix else str(k), v, out)
    elif isinstance(value, (list, tuple)):
        out[prefix] = json.dumps(jsonable(value))
    else:
        out[prefix] = jsonable(value)


def report_csv_rows(report: dict) -> tuple[list[str], list[dict]]:
    """Flatten a report into per-trial rows (or one summary row)."""
    base: dict = {}
    for k, v in report.items():
        if k == "trials":
            continue
        _flatten(k, v, base)
    trials = report.get("trials")
    rows = []
    if trials:
        for t in trials:
            row = dict(base)
            flat_t: dict = {}
            _flatten("", t, flat_t)
            row.update({k.lstrip("."): v for k, v in flat_t.items()})
            rows.append(row)
    else:
        rows.append(base)
    header = sorted({k for row in rows for k in row})
    return header, rows


def report_csv(report: dict) -> str:
    header, rows = report_csv_rows(report)
    import io as _io

    buf = _io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=header, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow(row)
    return buf.getvalue()


def _atomic_write(path, text: str) -> None:
    path = os.fspath(path)
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".qrelent-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def write_report(report: dict, path, fmt: str = "json") -> None:
    """Serialize and atomically write a report document."""
    if fmt == "json":
        _atomic_write(path, report_json(report))
    elif fmt == "csv":
        _atomic_write(path, report_csv(report))
    else:
        raise ValueError(f"unknown report format {fmt!r}")
