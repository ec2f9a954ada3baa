"""Grid runner: one fixed design per nu, fresh sketch and noise per replication."""
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
import math
import os
import statistics

import numpy as np

from ..criteria import DesignEvaluator, check_structural_bounds, heavy_hitter_k, theorem_bound
from ..datagen import SyntheticSpec, generate_design, leverage_profile
from ..exceptions import InvalidInputError
from ..linalg import leverage_scores
from ..rng import RngStream
from ..sketches import SketchTag, draw_sketch, leverage_for_kind

RESULT_COLUMNS = (
    "nu", "r", "sketch", "replication", "c_wc", "c_pe", "c_re", "rank_preserved",
    "alpha_min", "beta_nullspace", "gamma_frobenius", "seed_used",
)
AGGREGATE_COLUMNS = (
    "nu", "r", "sketch", "replications", "c_wc", "c_pe", "c_re",
    "c_wc_median", "c_pe_median", "c_re_median", "c_wc_sup", "rank_failure_rate",
    "alpha_min", "beta_nullspace", "gamma_frobenius",
)

# keys for deriving sub-streams from the master seed
_DESIGN, _REPLICATION, _LEVERAGE = 1, 2, 3


@dataclass(frozen=True)
class ResultRow:
    nu: float
    r: int
    sketch: str
    replication: int
    c_wc: float
    c_pe: float
    c_re: float
    rank_preserved: bool
    alpha_min: float
    beta_nullspace: float
    gamma_frobenius: float
    seed_used: int


@dataclass
class ResultTable:
    config: object
    rows: list = field(default_factory=list)
    aggregates: list = field(default_factory=list)
    profiles: dict = field(default_factory=dict)
    mode: str = "closed"


@dataclass(frozen=True)
class _Design:
    nu_index: int
    nu: float
    evaluator: DesignEvaluator
    leverage: np.ndarray


@dataclass(frozen=True)
class _Cell:
    nu_index: int
    r_index: int
    kind_index: int


def _master(config):
    return RngStream(config.master_seed, 0)


def build_designs(config):
    """Fixed design per nu, derived only from ``master_seed`` and the nu index."""
    designs = []
    for i, nu in enumerate(config.nu_list):
        spec = SyntheticSpec(
            config.n, config.p, nu=nu, ar_rho=config.ar_rho, family=config.design_family
        )
        inst = generate_design(spec, _master(config).child(_DESIGN, i))
        designs.append(
            _Design(i, nu, DesignEvaluator(inst.X, inst.beta_true), leverage_scores(inst.X))
        )
    return designs


def _cells(config):
    return [
        _Cell(i, j, k)
        for i in range(len(config.nu_list))
        for j in range(len(config.r_list))
        for k in range(len(config.sketch_kinds))
    ]


def _probabilities(config, design, kind):
    if not kind.is_sampling:
        return None
    if kind.tag is SketchTag.UNIFORM:
        return kind.probabilities(design.leverage)
    if kind.approx_sketch_r is None:
        lev = design.leverage
    else:
        stream = _master(config).child(_LEVERAGE, design.nu_index)
        lev = leverage_for_kind(kind, design.evaluator.X, stream)
    return kind.probabilities(lev)


def iter_cell(config, design, cell):
    """Yield ``(replication, stream_id, evaluation)`` for every replication of a cell."""
    kind = config.sketch_kinds[cell.kind_index]
    r = config.r_list[cell.r_index]
    ev = design.evaluator
    probs = _probabilities(config, design, kind)
    for rep in range(config.replications):
        stream = _master(config).child(
            _REPLICATION, cell.nu_index, cell.r_index, cell.kind_index, rep
        )
        gen = stream.generator()
        draw = draw_sketch(kind, r, ev.n, gen, probs=probs)
        Y = ev.mean + gen.standard_normal(ev.n)
        yield rep, stream.stream_id, ev.evaluate(draw, Y)


def _run_cell(config, design, cell, mc):
    kind = config.sketch_kinds[cell.kind_index]
    r = config.r_list[cell.r_index]
    n, p = config.n, config.p
    rows, pe_num, pe_den, re_num, re_den, wc_sup = [], [], [], [], [], []
    for rep, seed, out in iter_cell(config, design, cell):
        rep_ = out.report
        if mc:
            m = out.realized
            pe_num.append(m.pred_sketch)
            pe_den.append(m.pred_ols)
            re_num.append(m.resid_sketch)
            re_den.append(m.resid_ols)
            c_pe, c_re = m.pred_sketch / m.pred_ols, m.resid_sketch / m.resid_ols
        else:
            num = rep_.bias_sq + rep_.pi_frobenius_sq
            pe_num.append(num)
            pe_den.append(float(p))
            re_num.append(num + n - 2 * p)
            re_den.append(float(n - p))
            c_pe, c_re = rep_.c_pe, rep_.c_re
        wc_sup.append(rep_.c_wc)
        c = out.constants
        rows.append(
            ResultRow(
                nu=design.nu, r=r, sketch=kind.name, replication=rep,
                c_wc=_row_wc(rep_), c_pe=c_pe, c_re=c_re,
                rank_preserved=rep_.rank_preserved, alpha_min=c.alpha_min,
                beta_nullspace=c.beta_nullspace, gamma_frobenius=c.gamma_frobenius,
                seed_used=seed,
            )
        )
    return rows, _aggregate(design.nu, r, kind.name, rows, pe_num, pe_den, re_num, re_den, wc_sup)


def _row_wc(report):
    # the realized residual ratio stays finite after rank loss, but the
    # worst case over responses does not
    return report.c_wc_data if report.rank_preserved else math.inf


def _mean(values):
    values = [v for v in values if math.isfinite(v)]
    return math.fsum(values) / len(values) if values else math.inf


def _aggregate(nu, r, sketch, rows, pe_num, pe_den, re_num, re_den, wc_sup):
    finite_sup = [v for v in wc_sup if math.isfinite(v)]
    return {
        "nu": nu,
        "r": r,
        "sketch": sketch,
        "replications": len(rows),
        "c_wc": _mean([row.c_wc for row in rows]),
        "c_pe": math.fsum(pe_num) / math.fsum(pe_den),
        "c_re": math.fsum(re_num) / math.fsum(re_den),
        "c_wc_median": statistics.median(row.c_wc for row in rows),
        "c_pe_median": statistics.median(row.c_pe for row in rows),
        "c_re_median": statistics.median(row.c_re for row in rows),
        "c_wc_sup": _mean(finite_sup),
        "rank_failure_rate": 1.0 - len(finite_sup) / len(rows),
        "alpha_min": _mean([row.alpha_min for row in rows]),
        "beta_nullspace": _mean([row.beta_nullspace for row in rows]),
        "gamma_frobenius": _mean([row.gamma_frobenius for row in rows]),
    }


def check_output_dir(path):
    """Create ``path`` if needed and make sure it is writable."""
    try:
        os.makedirs(path, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create output directory {path!r}: {exc}") from exc
    if not os.access(path, os.W_OK):
        raise OSError(f"output directory {path!r} is not writable")


def _map(fn, items, threads):
    if threads <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def run_experiment(config, threads=1, mc_mode=None, output_dir=None):
    """Run every ``(nu, r, sketch)`` cell of the grid.

    Each cell is evaluated independently from streams derived from
    ``master_seed``, so the table does not depend on ``threads``. In closed
    mode the per-row ``c_pe``/``c_re`` are exact given the draw; in Monte Carlo
    mode they are single-replication ratios. Aggregates are ratios of summed
    numerators and denominators. The per-row ``c_wc`` is the residual ratio at
    the simulated response (``inf`` when the draw loses rank); the supremum
    over responses is aggregated separately as ``c_wc_sup``. Infinite values
    are left out of the means and counted in ``rank_failure_rate``.
    """
    config.validate()
    out = config.output_dir if output_dir is None else output_dir
    if out:
        check_output_dir(out)
    mc = config.mc_mode if mc_mode is None else mc_mode
    if config.replications < 1:
        raise InvalidInputError("replications must be >= 1")
    designs = build_designs(config)
    results = _map(
        lambda cell: _run_cell(config, designs[cell.nu_index], cell, mc), _cells(config), threads
    )
    table = ResultTable(config=config, mode="mc" if mc else "closed")
    for rows, agg in results:
        table.rows.extend(rows)
        table.aggregates.append(agg)
    for d in designs:
        table.profiles[d.nu] = leverage_profile(d.evaluator.X)
    return table


def leverage_tables(config):
    """Sorted leverage profiles for each nu, without running any sketches."""
    return {d.nu: leverage_profile(d.evaluator.X) for d in build_designs(config)}


def check_bounds(config, threads=1):
    """Satisfaction rates of the per-family bounds and the structural bounds.

    Returns a list of dicts, one per ``(cell, bound, labeling)``. Worst-case
    bounds are checked both against the residual ratio at the simulated
    response (``criterion="wc"``) and against the supremum (``"wc_sup"``).
    """
    designs = build_designs(config)
    n, p = config.n, config.p

    def run(cell):
        design = designs[cell.nu_index]
        kind = config.sketch_kinds[cell.kind_index]
        r = config.r_list[cell.r_index]
        try:
            k = heavy_hitter_k(design.leverage, 0.9)
            templates = theorem_bound(kind, n, p, r, k=k)
        except InvalidInputError:
            templates = []
        counts = {}
        structural = {"worst_case": [0, 0], "prediction": [0, 0], "residual": [0, 0]}
        draws = 0
        for _, _, out in iter_cell(config, design, cell):
            draws += 1
            rep = out.report
            observed = {"wc": _row_wc(rep), "wc_sup": rep.c_wc, "pe": rep.c_pe, "re": rep.c_re}
            for t in templates:
                crits = ("wc", "wc_sup") if t.criterion == "wc" else (t.criterion,)
                for crit in crits:
                    key = (t.bound_name + ("_sup" if crit == "wc_sup" else ""), t.labeling, crit)
                    hit = observed[crit] <= t.rhs
                    counts.setdefault(key, [t, 0])[1] += int(hit)
            if rep.rank_preserved:
                for chk in check_structural_bounds(out.constants, rep, p, n):
                    if not chk.skipped:
                        structural[chk.bound_name][0] += int(chk.satisfied)
                        structural[chk.bound_name][1] += 1
        lines = []
        for (name, labeling, crit), (t, hits) in counts.items():
            lines.append({
                "nu": design.nu, "r": r, "sketch": kind.name, "bound_name": name,
                "labeling": labeling, "criterion": crit, "rhs": t.rhs,
                "nominal_probability": t.probability, "satisfied_rate": hits / draws,
                "draws": draws,
            })
        for name, (ok, total) in structural.items():
            lines.append({
                "nu": design.nu, "r": r, "sketch": kind.name,
                "bound_name": f"structural_{name}", "labeling": "exact", "criterion": name,
                "rhs": math.nan, "nominal_probability": 1.0,
                "satisfied_rate": ok / total if total else math.nan, "draws": total,
            })
        return lines

    return [line for lines in _map(run, _cells(config), threads) for line in lines]
