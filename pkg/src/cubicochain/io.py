"""JSON/CSV readers and writers for chains, densities, scalar fields and reports."""

from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path

import numpy as np

from .grid import Chain, GridDomain


class FormatError(ValueError):
    """Malformed input file."""


def domain_to_dict(domain: GridDomain) -> dict:
    return {"n": domain.n, "h": domain.h, "lo": list(domain.lo), "hi": list(domain.hi)}


def domain_from_dict(d: dict) -> GridDomain:
    try:
        return GridDomain(int(d["n"]), float(d["h"]), tuple(d["lo"]), tuple(d["hi"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"bad domain header: {exc}") from exc


def chain_to_dict(T: Chain) -> dict:
    out = domain_to_dict(T.domain)
    out["dim"] = T.dim
    out["cells"] = [{"base": list(b), "axes": list(a), "coeff": c} for b, a, c in T.to_cells()]
    return out


def chain_from_dict(d: dict) -> Chain:
    if not isinstance(d, dict):
        raise FormatError("chain file must hold a JSON object")
    domain = domain_from_dict(d)
    try:
        dim = int(d["dim"])
        cells = [(c["base"], c["axes"], float(c["coeff"])) for c in d["cells"]]
        return Chain.from_cells(domain, dim, cells)
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"bad chain cells: {exc}") from exc


def _read_json(path) -> object:
    try:
        with open(path) as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from exc


def write_json(path, obj) -> None:
    Path(path).write_text(json.dumps(obj, indent=1, default=_json_default) + "\n")


def _json_default(o):
    if isinstance(o, np.integer):
        return int(o)
    if isinstance(o, np.floating):
        return float(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, np.bool_):
        return bool(o)
    raise TypeError(f"not JSON serializable: {type(o).__name__}")


def load_chain(path) -> Chain:
    return chain_from_dict(_read_json(path))


def save_chain(path, T: Chain) -> None:
    write_json(path, chain_to_dict(T))


def density_to_dict(domain: GridDomain, values: np.ndarray) -> dict:
    """Density as the chain envelope with ``dim = n``; only nonzero cells listed."""
    values = np.asarray(values, dtype=np.float64).reshape(domain.cell_shape)
    out = domain_to_dict(domain)
    out["dim"] = domain.n
    axes = list(range(domain.n))
    lo = np.asarray(domain.lo)
    out["cells"] = [
        {"base": (np.asarray(pos) + lo).tolist(), "axes": axes, "coeff": float(values[pos])}
        for pos in zip(*np.nonzero(values))
    ]
    return out


def density_from_dict(d: dict) -> tuple[GridDomain, np.ndarray]:
    domain = domain_from_dict(d)
    if int(d.get("dim", -1)) != domain.n:
        raise FormatError("density file must have dim equal to n")
    values = np.zeros(domain.cell_shape)
    try:
        for c in d["cells"]:
            if list(c["axes"]) != list(range(domain.n)):
                raise FormatError("density cells must be top-dimensional")
            rel = tuple(int(b) - a for b, a in zip(c["base"], domain.lo))
            if any(r < 0 or r >= e for r, e in zip(rel, domain.cell_shape)):
                raise FormatError(f"density cell {c['base']} outside the box")
            v = float(c["coeff"])
            if v < 0 or math.isnan(v):
                raise FormatError("density values must be nonnegative")
            values[rel] = v
    except (KeyError, TypeError) as exc:
        raise FormatError(f"bad density cells: {exc}") from exc
    return domain, values


def load_density(path):
    return density_from_dict(_read_json(path))


def field_to_dict(lo, hi, values) -> dict:
    return {"lo": [int(v) for v in lo], "hi": [int(v) for v in hi], "values": np.asarray(values, dtype=float).ravel().tolist()}


def field_from_dict(d: dict):
    try:
        lo = np.asarray(d["lo"], dtype=np.int64)
        hi = np.asarray(d["hi"], dtype=np.int64)
        shape = tuple((hi - lo + 1).tolist())
        values = np.asarray(d["values"], dtype=np.float64).reshape(shape)
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"bad scalar field: {exc}") from exc
    return lo, hi, values


def load_json(path):
    return _read_json(path)


def rows_to_csv(rows: list[dict], columns: list[str]) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=columns, lineterminator="\n", extrasaction="ignore")
    w.writeheader()
    for r in rows:
        w.writerow({k: _csv_cell(r.get(k, "")) for k in columns})
    return buf.getvalue()


def _csv_cell(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    return v


def write_rows(path, rows: list[dict], columns: list[str]) -> None:
    """Write rows as CSV, or as a JSON array when ``path`` ends in ``.json``."""
    path = Path(path)
    if path.suffix.lower() == ".json":
        write_json(path, [{k: r.get(k) for k in columns} for r in rows])
    else:
        path.write_text(rows_to_csv(rows, columns))


def read_csv(path) -> list[dict]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def form_to_dict(form) -> dict:
    """Form in the chain envelope: ``dim`` is the degree, ``coeff`` the cell coefficient."""
    T = Chain(form.domain, form.degree, np.flatnonzero(form.coeff), form.coeff[form.coeff != 0], canonical=True)
    return chain_to_dict(T)


def form_from_dict(d: dict):
    from .cochains import DiscreteForm

    T = chain_from_dict(d)
    return DiscreteForm(T.domain, T.dim, T.dense())


def load_form(path):
    return form_from_dict(_read_json(path))
