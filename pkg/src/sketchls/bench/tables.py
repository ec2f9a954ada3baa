"""CSV/JSON persistence of benchmark tables."""
import csv
import json
import math
import os

from .. import __version__
from ..exceptions import InvalidInputError
from .runner import AGGREGATE_COLUMNS, RESULT_COLUMNS, ResultRow

FORMATS = ("csv", "json")
BOUND_COLUMNS = (
    "nu", "r", "sketch", "bound_name", "labeling", "criterion", "rhs",
    "nominal_probability", "satisfied_rate", "draws",
)


def format_value(v):
    """17 significant digits, ``inf``/``nan`` literals and lowercase booleans."""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return format(v, ".17g")
    return str(v)


def _jsonable(v):
    if isinstance(v, float) and not math.isfinite(v):
        return format_value(v)
    return v


def _nu_label(nu):
    return "inf" if math.isinf(nu) else format(nu, "g")


def _write_csv(path, columns, records):
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(columns)
            for rec in records:
                w.writerow([format_value(rec[c]) for c in columns])
    except OSError as exc:
        raise OSError(f"failed to write {path}: {exc}") from exc
    return path


def _write_json(path, obj):
    try:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(obj, fh, indent=2, sort_keys=True)
            fh.write("\n")
    except OSError as exc:
        raise OSError(f"failed to write {path}: {exc}") from exc
    return path


def _row_dict(row):
    return {c: getattr(row, c) for c in RESULT_COLUMNS}


def manifest(table):
    cfg = table.config
    return {
        "config": cfg.to_dict(),
        "library_version": __version__,
        "master_seed": cfg.master_seed,
        "mode": table.mode,
    }


def write_profiles(profiles, out_dir, format="csv"):
    paths = []
    for nu, (scores, cumulative) in profiles.items():
        base = os.path.join(out_dir, f"leverage_profile_nu{_nu_label(nu)}")
        recs = [
            {"index": i, "sorted_score": float(s), "cumulative": float(c)}
            for i, (s, c) in enumerate(zip(scores, cumulative))
        ]
        if format == "csv":
            paths.append(_write_csv(base + ".csv", ("index", "sorted_score", "cumulative"), recs))
        else:
            paths.append(_write_json(base + ".json", recs))
    return paths


def emit_tables(table, out_dir, format="csv"):
    """Write results, aggregates, manifest and leverage profiles; return the paths."""
    if format not in FORMATS:
        raise InvalidInputError(f"format must be one of {FORMATS}")
    if not table.rows:
        raise InvalidInputError("refusing to write an empty table")
    os.makedirs(out_dir, exist_ok=True)
    rows = [_row_dict(r) for r in table.rows]
    paths = [_write_json(os.path.join(out_dir, "manifest.json"), manifest(table))]
    if format == "csv":
        paths.append(_write_csv(os.path.join(out_dir, "results.csv"), RESULT_COLUMNS, rows))
        paths.append(
            _write_csv(os.path.join(out_dir, "aggregate.csv"), AGGREGATE_COLUMNS, table.aggregates)
        )
    else:
        clean = lambda recs: [{k: _jsonable(v) for k, v in r.items()} for r in recs]
        paths.append(_write_json(os.path.join(out_dir, "results.json"), clean(rows)))
        paths.append(_write_json(os.path.join(out_dir, "aggregate.json"), clean(table.aggregates)))
    paths.extend(write_profiles(table.profiles, out_dir, format))
    return paths


def write_bounds(lines, out_dir):
    os.makedirs(out_dir, exist_ok=True)
    return _write_csv(os.path.join(out_dir, "bounds.csv"), BOUND_COLUMNS, lines)


def _parse_bool(s):
    if s not in ("true", "false"):
        raise InvalidInputError(f"expected true/false, got {s!r}")
    return s == "true"


_ROW_TYPES = {
    "nu": float, "r": int, "sketch": str, "replication": int, "c_wc": float, "c_pe": float,
    "c_re": float, "rank_preserved": _parse_bool, "alpha_min": float,
    "beta_nullspace": float, "gamma_frobenius": float, "seed_used": int,
}


def read_results(path):
    """Parse a ``results.csv`` back into :class:`ResultRow` objects."""
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != RESULT_COLUMNS:
            raise InvalidInputError(f"{path}: unexpected header {reader.fieldnames}")
        return [ResultRow(**{k: _ROW_TYPES[k](v) for k, v in rec.items()}) for rec in reader]
