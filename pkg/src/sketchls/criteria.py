"""Worst-case, prediction and residual efficiency of a sketch, plus bound checks.

Closed-form evaluation goes through the oblique projection
``Pi = U @ pinv(S U) @ S`` built from the left singular basis ``U`` of ``X``:

* prediction efficiency ``c_pe = (bias_sq + ||Pi||_F^2) / p``
* residual efficiency ``c_re = 1 + (c_pe - 1) / (n / p - 1)``
* worst case ``c_wc = 1 + sigma_max(Pi (I - U U.T))^2`` for rank-preserving
  draws and ``+inf`` otherwise.

``monte_carlo_criteria`` estimates the same ratios directly from simulated
responses and serves as an independent check on the closed forms.
"""
from dataclasses import dataclass, replace
import math

import numpy as np

from ._validation import as_matrix, as_vector, check_count
from .estimators import ols_solve, sketched_solve
from .exceptions import InvalidInputError
from .linalg import pinv_from_svd, thin_svd
from .rng import RngStream, as_generator
from .sketches import (
    SketchKind,
    SketchTag,
    apply_sketch,
    apply_sketch_transpose,
    draw_sketch,
    leverage_for_kind,
    materialize,
)


@dataclass(frozen=True)
class CriteriaReport:
    c_wc: float
    c_pe: float
    c_re: float
    bias_sq: float
    rank_preserved: bool
    pi_frobenius_sq: float
    # residual ratio ||Y - X b_S||^2 / ||Y - X b_OLS||^2 at a realized response
    c_wc_data: float = None
    c_pe_se: float = None
    c_re_se: float = None


@dataclass(frozen=True)
class StructuralConstants:
    alpha_min: float
    beta_nullspace: float
    gamma_frobenius: float


@dataclass(frozen=True)
class BoundCheck:
    bound_name: str
    rhs: float
    observed: float
    satisfied: bool
    skipped: bool = False


@dataclass(frozen=True)
class BoundTemplate:
    """Right-hand side of a probabilistic bound, ready to be checked."""

    bound_name: str
    criterion: str
    rhs: float
    probability: float
    labeling: str = "printed"

    def check(self, observed, rtol=0.0):
        return BoundCheck(
            self.bound_name, self.rhs, observed, bool(observed <= self.rhs * (1.0 + rtol))
        )


# ---------------------------------------------------------------------------
# geometry of one draw against an orthonormal basis


class _Geometry:
    """Quantities shared by every criterion for a fixed ``(U, S)`` pair."""

    def __init__(self, U, draw, SU=None, rank_tol=None):
        self.U = U
        p = U.shape[1]
        self.SU = apply_sketch(draw, U) if SU is None else SU
        self.svd = thin_svd(self.SU, rank_tol)
        self.rank = self.svd.rank
        self.rank_preserved = self.rank == p
        SU_pinv = pinv_from_svd(self.svd)
        both = apply_sketch_transpose(draw, np.hstack([SU_pinv.T, self.SU]))
        # A = pinv(SU) @ S and M = U.T @ S.T @ S, both p x n
        self.A = both[:, :p].T
        self.M = both[:, p:].T
        self.SU_pinv = SU_pinv

    def _off_norm_sq(self, B):
        # squared spectral norm of D = B (I - U U.T) via the small p x p Gram
        # matrix D D.T; forming D first avoids cancellation when D is tiny
        D = B - (B @ self.U) @ self.U.T
        if D.size == 0:
            return 0.0
        return max(float(np.linalg.eigvalsh(D @ D.T)[-1]), 0.0)

    def pi_frobenius_sq(self):
        return float(np.sum(self.A * self.A))

    def bias_sq(self, delta):
        if self.rank_preserved:
            return 0.0
        Vs = self.svd.V
        resid = delta - Vs @ (Vs.T @ delta)
        return float(resid @ resid)

    def wc_supremum(self):
        if not self.rank_preserved:
            return math.inf
        return 1.0 + self._off_norm_sq(self.A)

    def constants(self):
        s = self.svd.singular_values
        return StructuralConstants(
            alpha_min=float(s[-1]) if s.size else 0.0,
            beta_nullspace=math.sqrt(self._off_norm_sq(self.M)),
            gamma_frobenius=float(np.linalg.norm(self.M)),
        )


def _basis(X):
    X = as_matrix(X, "X")
    svd = thin_svd(X)
    if svd.rank < X.shape[1]:
        raise InvalidInputError(
            f"X must have full column rank; numerical rank {svd.rank} < {X.shape[1]}"
        )
    return X, svd


def _orthonormal(U):
    U = as_matrix(U, "U")
    if not np.allclose(U.T @ U, np.eye(U.shape[1]), atol=1e-8):
        raise InvalidInputError("U must have orthonormal columns")
    return U


def _check_n(U, draw):
    if draw.n != U.shape[0]:
        raise InvalidInputError(f"sketch acts on {draw.n} rows, basis has {U.shape[0]}")


def oblique_projection(U, draw):
    """Dense ``n x n`` oblique projection ``U @ pinv(S U) @ S``."""
    U = _orthonormal(U)
    _check_n(U, draw)
    return U @ _Geometry(U, draw).A


def _report_from_geometry(geom, n, p, delta):
    bias = geom.bias_sq(delta)
    pi_sq = geom.pi_frobenius_sq()
    c_pe = (bias + pi_sq) / p
    return CriteriaReport(
        c_wc=geom.wc_supremum(),
        c_pe=c_pe,
        c_re=1.0 + (c_pe - 1.0) / (n / p - 1.0) if n > p else math.nan,
        bias_sq=bias,
        rank_preserved=geom.rank_preserved,
        pi_frobenius_sq=pi_sq,
    )


def closed_form_criteria(X, draw, beta_true):
    """Exact criteria for one realized sketch, from the oblique projection."""
    X, svd = _basis(X)
    n, p = X.shape
    beta_true = as_vector(beta_true, "beta_true")
    if beta_true.shape[0] != p:
        raise InvalidInputError(f"beta_true has length {beta_true.shape[0]}, expected {p}")
    _check_n(svd.U, draw)
    delta = svd.singular_values * (svd.V.T @ beta_true)
    return _report_from_geometry(_Geometry(svd.U, draw), n, p, delta)


def residual_ratio(X, draw, Y, ols_rss=None):
    """``||Y - X b_S||^2 / ||Y - X b_OLS||^2`` for the response at hand."""
    if ols_rss is None:
        ols_rss = ols_solve(X, Y).residual_norm_sq
    return sketched_solve(draw, X, Y).residual_norm_sq / ols_rss


def structural_constants(U, draw):
    """Smallest nonzero singular value of ``S U``, the off-subspace operator norm
    of ``U.T S.T S`` and its Frobenius norm."""
    U = _orthonormal(U)
    _check_n(U, draw)
    return _Geometry(U, draw).constants()


@dataclass(frozen=True)
class RealizedErrors:
    """Squared errors of the sketched and full fits for one simulated response."""

    pred_sketch: float
    pred_ols: float
    resid_sketch: float
    resid_ols: float


@dataclass(frozen=True)
class DrawEvaluation:
    report: CriteriaReport
    constants: StructuralConstants
    realized: RealizedErrors = None


class DesignEvaluator:
    """Evaluate many sketch draws against one fixed design.

    Caches the SVD of ``X`` so each call costs a handful of sketch
    applications. When a response ``Y`` is passed, the report's ``c_wc_data``
    is filled in and the realized errors of both fits are returned as well.
    """

    def __init__(self, X, beta_true):
        self.X, self.svd = _basis(X)
        self.n, self.p = self.X.shape
        self.beta_true = as_vector(beta_true, "beta_true")
        if self.beta_true.shape[0] != self.p:
            raise InvalidInputError("beta_true length must equal the number of columns")
        self.U = self.svd.U
        self.delta = self.svd.singular_values * (self.svd.V.T @ self.beta_true)
        self._X_pinv = pinv_from_svd(self.svd)
        self._sigma_vt = self.svd.singular_values[:, None] * self.svd.V.T
        self.mean = self.X @ self.beta_true

    def evaluate(self, draw, Y=None):
        _check_n(self.U, draw)
        p = self.p
        if Y is None:
            SB = apply_sketch(draw, self.U)
        else:
            Y = as_vector(Y, "Y")
            SB = apply_sketch(draw, np.hstack([self.U, Y[:, None]]))
        geom = _Geometry(self.U, draw, SU=SB[:, :p])
        report = _report_from_geometry(geom, self.n, p, self.delta)
        realized = None
        if Y is not None:
            # S X = (S U) diag(sigma) V.T, so pinv(S X) only needs the SVD of
            # S U and of a small rank x p factor
            g = geom.svd
            K = (g.singular_values[:, None] * g.V.T) @ self._sigma_vt
            beta_s = pinv_from_svd(thin_svd(K)) @ (g.U.T @ SB[:, p])
            fit_s = self.X @ beta_s
            fit_o = self.X @ (self._X_pinv @ Y)
            realized = RealizedErrors(
                pred_sketch=float(np.sum((self.mean - fit_s) ** 2)),
                pred_ols=float(np.sum((self.mean - fit_o) ** 2)),
                resid_sketch=float(np.sum((Y - fit_s) ** 2)),
                resid_ols=float(np.sum((Y - fit_o) ** 2)),
            )
            report = replace(
                report, c_wc_data=realized.resid_sketch / realized.resid_ols
            )
        return DrawEvaluation(report, geom.constants(), realized)


# ---------------------------------------------------------------------------
# Monte Carlo estimation


def _ratio_se(num, den):
    """Delta-method standard error of ``mean(num) / mean(den)``."""
    k = num.shape[0]
    R = num.mean() / den.mean()
    return float(np.std(num - R * den, ddof=1) / (abs(den.mean()) * math.sqrt(k)))


def monte_carlo_criteria(X, beta_true, kind, r, reps, rng, n_probes=8):
    """Estimate the criteria by simulation, drawing a fresh sketch and fresh
    standard-normal noise in every replication.

    ``c_pe`` and ``c_re`` are ratios of averaged numerators and denominators.
    ``c_wc`` is a lower bound on the supremum: per replication, the largest
    quotient over the realized residual and ``n_probes`` random directions
    orthogonal to ``col(X)``, averaged over rank-preserving replications.
    ``c_wc_data`` averages the realized residual ratio.
    """
    reps = check_count(reps, "reps")
    if reps < 2:
        raise InvalidInputError("reps must be at least 2")
    r = check_count(r, "r")
    if not isinstance(kind, SketchKind):
        kind = SketchKind.from_name(kind)
    X, svd = _basis(X)
    n, p = X.shape
    beta_true = as_vector(beta_true, "beta_true")
    if beta_true.shape[0] != p:
        raise InvalidInputError("beta_true length must equal the number of columns")
    U = svd.U
    X_pinv = pinv_from_svd(svd)
    delta = svd.singular_values * (svd.V.T @ beta_true)
    stream = rng if isinstance(rng, RngStream) else RngStream(int(as_generator(rng).integers(0, 2**63 - 1)))
    probs = None
    if kind.is_sampling:
        lev = leverage_for_kind(kind, X, stream.child(2**32)) if kind.uses_leverage else None
        probs = kind.probabilities(lev if lev is not None else np.ones(n))
    mean = X @ beta_true

    pe_num, pe_den, re_num, re_den, wc_data, wc_probe, bias = ([] for _ in range(7))
    for rep in range(reps):
        gen = stream.child(rep).generator()
        draw = draw_sketch(kind, r, n, gen, probs=probs)
        eps = gen.standard_normal(n)
        Y = mean + eps
        probes = gen.standard_normal((n, n_probes))
        probes -= U @ (U.T @ probes)
        resid_ols = Y - U @ (U.T @ Y)
        B = np.hstack([U, X, Y[:, None], resid_ols[:, None], probes])
        SB = apply_sketch(draw, B)
        SU, SX, SY, SE = SB[:, :p], SB[:, p : 2 * p], SB[:, 2 * p], SB[:, 2 * p + 1 :]
        sx = thin_svd(SX)
        beta_s = pinv_from_svd(sx) @ SY
        beta_ols = X_pinv @ Y
        pred_s = X @ (beta_true - beta_s)
        pred_o = X @ (beta_true - beta_ols)
        res_s = Y - X @ beta_s
        pe_num.append(pred_s @ pred_s)
        pe_den.append(pred_o @ pred_o)
        re_num.append(res_s @ res_s)
        re_den.append(resid_ols @ resid_ols)
        wc_data.append(re_num[-1] / re_den[-1])
        su = thin_svd(SU)
        if su.rank == p:
            bias.append(0.0)
            proj = pinv_from_svd(su) @ SE
            q = np.sum(proj * proj, axis=0) / np.sum(B[:, 2 * p + 1 :] ** 2, axis=0)
            wc_probe.append(1.0 + float(q.max()))
        else:
            resid = delta - su.V @ (su.V.T @ delta)
            bias.append(float(resid @ resid))
    pe_num, pe_den, re_num, re_den = map(np.asarray, (pe_num, pe_den, re_num, re_den))
    c_pe = pe_num.mean() / pe_den.mean()
    mean_bias = float(np.mean(bias))
    return CriteriaReport(
        c_wc=float(np.mean(wc_probe)) if wc_probe else math.inf,
        c_pe=float(c_pe),
        c_re=float(re_num.mean() / re_den.mean()),
        bias_sq=mean_bias,
        rank_preserved=len(wc_probe) == reps,
        pi_frobenius_sq=float(pe_num.mean() - mean_bias),
        c_wc_data=float(np.mean(wc_data)),
        c_pe_se=_ratio_se(pe_num, pe_den),
        c_re_se=_ratio_se(re_num, re_den),
    )


# ---------------------------------------------------------------------------
# bounds


def check_structural_bounds(constants, report, p, n, rtol=1e-9):
    """Check the three upper bounds implied by ``alpha``, ``beta`` and ``gamma``.

    * ``c_wc <= 1 + beta^2 / alpha^4``  (skipped when the draw loses rank)
    * ``c_pe <= (bias_sq + gamma^2 / alpha^4) / p``
    * ``c_re <= 1 + (bias_sq + gamma^2 / alpha^4 - p) / (n - p)``

    ``rtol`` absorbs rounding in cases where a bound is attained exactly.
    """
    a, b, g = constants.alpha_min, constants.beta_nullspace, constants.gamma_frobenius
    frob_bound = g**2 / a**4 if a > 0 else math.inf
    checks = []
    if report.rank_preserved and a > 0:
        rhs = 1.0 + b**2 / a**4
        checks.append(
            BoundCheck("worst_case", rhs, report.c_wc, bool(report.c_wc <= rhs * (1 + rtol)))
        )
    else:
        checks.append(BoundCheck("worst_case", math.inf, report.c_wc, True, skipped=True))
    rhs_pe = (report.bias_sq + frob_bound) / p
    checks.append(
        BoundCheck("prediction", rhs_pe, report.c_pe, bool(report.c_pe <= rhs_pe * (1 + rtol)))
    )
    rhs_re = 1.0 + (report.bias_sq + frob_bound - p) / (n - p)
    checks.append(
        BoundCheck("residual", rhs_re, report.c_re, bool(report.c_re <= rhs_re * (1 + rtol)))
    )
    return checks


_LEVERAGE_RESCALED_TAGS = (SketchTag.LEVERAGE_RESCALED, SketchTag.SHRINKAGE_RESCALED)


def theorem_bound(kind, n, p, r, k=None):
    """High-probability upper bounds on the criteria for a sketch family.

    Returns one :class:`BoundTemplate` per criterion. The Hadamard family gets
    two sets: ``labeling="printed"`` pairs the ``(1 + n/r)`` bound with the
    residual criterion as originally stated, ``labeling="swapped"`` pairs it with
    prediction efficiency like the other families. Unrescaled leverage sampling
    needs the heavy-hitter count ``k`` and uses unit constants.
    """
    if not isinstance(kind, SketchKind):
        kind = SketchKind.from_name(kind)
    tag = kind.tag
    T = BoundTemplate
    if tag in _LEVERAGE_RESCALED_TAGS:
        prob = 0.7
        return [
            T("leverage_rescaled_wc", "wc", 1 + 12 * p / r, prob),
            T("leverage_rescaled_pe", "pe", 44 * n / r, prob),
            T("leverage_rescaled_re", "re", 1 + 44 * p / r, prob),
        ]
    if tag is SketchTag.LEVERAGE_UNRESCALED:
        if k is None:
            raise InvalidInputError("unrescaled leverage bounds need the heavy-hitter count k")
        prob = 0.6
        return [
            T("leverage_unrescaled_wc", "wc", 1 + 44 * p / r, prob),
            T("leverage_unrescaled_pe", "pe", 44 * k / r, prob),
            T("leverage_unrescaled_re", "re", 1 + 44 * p * k / (n * r), prob),
        ]
    if tag in (SketchTag.GAUSSIAN, SketchTag.RADEMACHER):
        prob = 0.7
        return [
            T("subgaussian_wc", "wc", 1 + 11 * p / r, prob),
            T("subgaussian_pe", "pe", 44 * (1 + n / r), prob),
            T("subgaussian_re", "re", 1 + 44 * p / r, prob),
        ]
    if tag is SketchTag.HADAMARD:
        prob = 0.8
        L = 40 * math.log(n * p)
        wide, narrow = L * (1 + n / r), 1 + L * (1 + p / r)
        return [
            T("hadamard_wc", "wc", 1 + L * p / r, prob, "printed"),
            T("hadamard_re", "re", wide, prob, "printed"),
            T("hadamard_pe", "pe", narrow, prob, "printed"),
            T("hadamard_wc", "wc", 1 + L * p / r, prob, "swapped"),
            T("hadamard_pe", "pe", wide, prob, "swapped"),
            T("hadamard_re", "re", narrow, prob, "swapped"),
        ]
    raise InvalidInputError(f"no bound is available for sketch kind {kind.name!r}")


def lower_bound_condition(kind, r, n, draws, rng, probs=None):
    """Monte Carlo estimate of ``||E[S.T pinv(S S.T) S]||_op * n / r``.

    ``S.T pinv(S S.T) S`` is the orthogonal projector onto the row space of
    ``S``. Values near 1 mean the sketch is isotropic in expectation. Sampling
    kinds draw from ``probs`` (uniform if omitted).
    """
    draws = check_count(draws, "draws")
    if draws < 10:
        raise InvalidInputError("draws must be at least 10")
    if not isinstance(kind, SketchKind):
        kind = SketchKind.from_name(kind)
    stream = rng if isinstance(rng, RngStream) else None
    gen = None if stream is not None else as_generator(rng)
    if kind.is_sampling and probs is None:
        probs = np.full(n, 1.0 / n)
    total = np.zeros((n, n))
    for i in range(draws):
        g = stream.child(i).generator() if stream is not None else gen
        S = materialize(draw_sketch(kind, r, n, g, probs=probs))
        svd = thin_svd(S)
        total += svd.V @ svd.V.T
    mean = total / draws
    return float(np.linalg.norm(mean, 2) * n / r)


def heavy_hitter_k(lev, mass=0.9):
    """Smallest ``k`` whose ``k`` largest scores hold ``mass`` of the total."""
    lev = as_vector(lev, "lev")
    if not 0.0 < mass <= 1.0:
        raise InvalidInputError(f"mass must lie in (0, 1], got {mass}")
    s = np.sort(lev)[::-1]
    csum = np.cumsum(s)
    target = mass * csum[-1]
    # tiny slack so that e.g. mass=1 is reached despite rounding in the cumsum
    k = int(np.searchsorted(csum, target * (1 - 1e-12), side="left")) + 1
    return min(k, lev.shape[0])
