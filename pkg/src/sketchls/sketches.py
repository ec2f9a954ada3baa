"""Sketching operators: row sampling, dense random projections and the SRHT.

A realized sketch is one of three immutable draw types. Each can be applied to
a matrix from the left (``S @ M``), transposed (``S.T @ Z``) or materialized as
a dense ``r x n`` array for testing.
"""
from dataclasses import dataclass, field
from enum import Enum
import math

import numpy as np
from scipy import sparse

from ._validation import as_matrix, as_vector, check_count, check_probability_vector
from .exceptions import InvalidInputError, NumericError
from .linalg import fwht, leverage_scores, next_power_of_two, thin_svd
from .rng import as_generator


class SketchTag(str, Enum):
    LEVERAGE_RESCALED = "leverage_rescaled"
    LEVERAGE_UNRESCALED = "leverage_unrescaled"
    UNIFORM = "uniform"
    SHRINKAGE_RESCALED = "shrinkage_rescaled"
    GAUSSIAN = "gaussian"
    RADEMACHER = "rademacher"
    HADAMARD = "hadamard"
    IDENTITY = "identity"


_ALIASES = {
    "r": SketchTag.LEVERAGE_RESCALED,
    "nr": SketchTag.LEVERAGE_UNRESCALED,
    "unif": SketchTag.UNIFORM,
    "shr": SketchTag.SHRINKAGE_RESCALED,
    "gp": SketchTag.GAUSSIAN,
    "had": SketchTag.HADAMARD,
    "srht": SketchTag.HADAMARD,
}

_SAMPLING = {
    SketchTag.LEVERAGE_RESCALED,
    SketchTag.LEVERAGE_UNRESCALED,
    SketchTag.UNIFORM,
    SketchTag.SHRINKAGE_RESCALED,
}


@dataclass(frozen=True)
class SketchKind:
    """Which sketch family to draw, plus its mixing parameters.

    ``theta`` and ``mixture_q`` only matter for leverage-based sampling.
    ``rescale`` only matters for uniform sampling; the leverage kinds fix it
    by tag. When ``approx_sketch_r`` is set, leverage-based kinds sample from
    SRHT-approximated leverage scores instead of exact ones.
    """

    tag: SketchTag
    theta: float = 0.0
    mixture_q: tuple = None
    rescale: bool = True
    approx_sketch_r: int = None

    def __post_init__(self):
        object.__setattr__(self, "tag", SketchTag(self.tag))
        if not 0.0 <= self.theta < 1.0:
            raise InvalidInputError(f"theta must lie in [0, 1), got {self.theta}")
        if self.mixture_q is not None:
            q = check_probability_vector(self.mixture_q, "mixture_q")
            object.__setattr__(self, "mixture_q", tuple(q.tolist()))

    @classmethod
    def from_name(cls, name, **overrides):
        """Build a kind from a tag value or a short alias (``"GP"``, ``"Shr"``...)."""
        key = str(name).strip()
        tag = _ALIASES.get(key.lower().removeprefix("s_"))
        if tag is None:
            try:
                tag = SketchTag(key.lower())
            except ValueError:
                raise InvalidInputError(f"unknown sketch kind {name!r}") from None
        params = {}
        if tag is SketchTag.SHRINKAGE_RESCALED:
            params["theta"] = 0.1
        params.update(overrides)
        return cls(tag, **params)

    @property
    def name(self):
        return self.tag.value

    @property
    def is_sampling(self):
        return self.tag in _SAMPLING

    @property
    def uses_leverage(self):
        return self.tag in _SAMPLING and self.tag is not SketchTag.UNIFORM

    @property
    def rescaled(self):
        if self.tag is SketchTag.LEVERAGE_UNRESCALED:
            return False
        if self.tag is SketchTag.UNIFORM:
            return self.rescale
        return True

    def probabilities(self, lev):
        """Row-sampling distribution for this kind given leverage scores."""
        lev = as_vector(lev, "lev")
        n = lev.shape[0]
        if self.tag is SketchTag.UNIFORM:
            return np.full(n, 1.0 / n)
        if not self.uses_leverage:
            raise InvalidInputError(f"{self.name} is not a sampling sketch")
        return sampling_probabilities(lev, self.theta, self.mixture_q)


# ---------------------------------------------------------------------------
# realized draws


@dataclass(frozen=True, eq=False)
class RowSample:
    indices: np.ndarray
    weights: np.ndarray
    n: int

    def __post_init__(self):
        if self.indices.shape != self.weights.shape or self.indices.ndim != 1:
            raise InvalidInputError("indices and weights must be equal-length vectors")
        if np.any(self.weights <= 0):
            raise InvalidInputError("row-sample weights must be strictly positive")
        if self.indices.size and (self.indices.min() < 0 or self.indices.max() >= self.n):
            raise InvalidInputError("row-sample index out of range")

    @property
    def r(self):
        return self.indices.shape[0]


@dataclass(frozen=True, eq=False)
class DenseProjection:
    matrix: np.ndarray

    @property
    def r(self):
        return self.matrix.shape[0]

    @property
    def n(self):
        return self.matrix.shape[1]


@dataclass(frozen=True, eq=False)
class Srht:
    """``scale * R @ H @ D`` acting on the first ``n`` of ``n_pad`` coordinates."""

    sign_flips: np.ndarray
    sampled_rows: np.ndarray
    scale: float
    n: int
    n_pad: int = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "n_pad", self.sign_flips.shape[0])
        if self.n_pad != next_power_of_two(self.n):
            raise InvalidInputError(
                f"sign_flips length {self.n_pad} is not the padded size of n={self.n}"
            )

    @property
    def r(self):
        return self.sampled_rows.shape[0]


def identity_sketch(n):
    """Row sample that keeps every row once with unit weight (``S = I``)."""
    return RowSample(np.arange(n), np.ones(n), n)


# ---------------------------------------------------------------------------
# constructors


def sampling_probabilities(lev, theta=0.0, q=None):
    """Mixture ``(1 - theta) * lev / sum(lev) + theta * q`` (``q`` uniform by default).

    ``sum(lev)`` is the rank, so with exact leverage scores this is
    ``lev_i / p`` in the pure-leverage case.
    """
    lev = as_vector(lev, "lev")
    if not 0.0 <= theta < 1.0:
        raise InvalidInputError(f"theta must lie in [0, 1), got {theta}")
    if np.any(lev < 0):
        raise InvalidInputError("leverage scores must be nonnegative")
    total = lev.sum()
    if total <= 0:
        raise InvalidInputError("leverage scores sum to zero")
    n = lev.shape[0]
    if q is None:
        q = np.full(n, 1.0 / n)
    else:
        q = check_probability_vector(q, "q")
        if q.shape != lev.shape:
            raise InvalidInputError("q and lev must have the same length")
    return (1.0 - theta) * lev / total + theta * q


def draw_sampling_sketch(probs, r, rescale=True, rng=None):
    """Sample ``r`` rows i.i.d. from ``probs`` with replacement.

    Rescaled draws weight row ``j`` by ``sqrt(1 / (r * probs[j]))`` so that
    ``E[S.T @ S] = I``.
    """
    probs = check_probability_vector(probs, "probs")
    r = check_count(r, "r")
    gen = as_generator(rng)
    indices = gen.choice(probs.shape[0], size=r, p=probs)
    if rescale:
        weights = np.sqrt(1.0 / (r * probs[indices]))
    else:
        weights = np.ones(r)
    return RowSample(indices.astype(np.int64), weights, probs.shape[0])


def draw_dense_projection(kind, r, n, rng=None):
    """Dense ``r x n`` projection with i.i.d. entries of variance ``1 / r``."""
    r = check_count(r, "r")
    n = check_count(n, "n")
    gen = as_generator(rng)
    kind = getattr(kind, "value", kind)
    if kind == "gaussian":
        G = gen.standard_normal((r, n))
    elif kind == "rademacher":
        G = 2.0 * gen.integers(0, 2, size=(r, n)).astype(np.float64) - 1.0
    else:
        raise InvalidInputError(f"dense projection kind must be gaussian or rademacher, got {kind!r}")
    return DenseProjection(G / math.sqrt(r))


def draw_srht_sketch(r, n, rng=None):
    """Subsampled randomized Hadamard transform normalized so ``E[S.T @ S] = I``."""
    r = check_count(r, "r")
    n = check_count(n, "n")
    gen = as_generator(rng)
    n_pad = next_power_of_two(n)
    signs = 2.0 * gen.integers(0, 2, size=n_pad).astype(np.float64) - 1.0
    rows = gen.integers(0, n_pad, size=r)
    scale = math.sqrt(n_pad / r) / math.sqrt(n_pad)
    return Srht(signs, rows.astype(np.int64), scale, n)


def draw_sketch(kind, r, n, rng=None, probs=None):
    """Draw one sketch of the given kind.

    Sampling kinds other than uniform need ``probs`` (see
    :meth:`SketchKind.probabilities`). ``IDENTITY`` ignores ``r``.
    """
    tag = kind.tag
    if tag is SketchTag.IDENTITY:
        return identity_sketch(n)
    if tag is SketchTag.GAUSSIAN or tag is SketchTag.RADEMACHER:
        return draw_dense_projection(tag.value, r, n, rng)
    if tag is SketchTag.HADAMARD:
        return draw_srht_sketch(r, n, rng)
    if probs is None:
        if tag is not SketchTag.UNIFORM:
            raise InvalidInputError(f"{kind.name} needs sampling probabilities")
        probs = np.full(n, 1.0 / n)
    if len(probs) != n:
        raise InvalidInputError("probs length must equal n")
    return draw_sampling_sketch(probs, r, kind.rescaled, rng)


# ---------------------------------------------------------------------------
# application


def apply_sketch(draw, M):
    """Return ``S @ M`` using the fast path of each draw type."""
    A = as_matrix(M, "M")
    if A.shape[0] != draw.n:
        raise InvalidInputError(f"sketch expects {draw.n} rows, got {A.shape[0]}")
    if isinstance(draw, RowSample):
        return A[draw.indices] * draw.weights[:, None]
    if isinstance(draw, DenseProjection):
        return draw.matrix @ A
    if isinstance(draw, Srht):
        padded = np.zeros((draw.n_pad, A.shape[1]))
        padded[: draw.n] = A * draw.sign_flips[: draw.n, None]
        return draw.scale * fwht(padded)[draw.sampled_rows]
    raise InvalidInputError(f"unsupported sketch type {type(draw).__name__}")


def _scatter_rows(indices, weights, n):
    # n x r sparse matrix with weights[k] at (indices[k], k); duplicates add up
    r = indices.shape[0]
    return sparse.csr_array((weights, (indices, np.arange(r))), shape=(n, r))


def apply_sketch_transpose(draw, Z):
    """Return ``S.T @ Z`` for an ``r x k`` matrix ``Z``."""
    B = as_matrix(Z, "Z")
    if B.shape[0] != draw.r:
        raise InvalidInputError(f"transpose apply expects {draw.r} rows, got {B.shape[0]}")
    if isinstance(draw, RowSample):
        return _scatter_rows(draw.indices, draw.weights, draw.n) @ B
    if isinstance(draw, DenseProjection):
        return draw.matrix.T @ B
    if isinstance(draw, Srht):
        padded = _scatter_rows(draw.sampled_rows, np.ones(draw.r), draw.n_pad) @ B
        out = fwht(padded)[: draw.n]
        return draw.scale * out * draw.sign_flips[: draw.n, None]
    raise InvalidInputError(f"unsupported sketch type {type(draw).__name__}")


def materialize(draw):
    """Dense ``r x n`` matrix of a draw, built entry by entry (test oracle)."""
    if isinstance(draw, DenseProjection):
        return draw.matrix.copy()
    S = np.zeros((draw.r, draw.n))
    if isinstance(draw, RowSample):
        S[np.arange(draw.r), draw.indices] = draw.weights
        return S
    if isinstance(draw, Srht):
        cols = np.arange(draw.n)
        for k, row in enumerate(draw.sampled_rows):
            parity = np.array([bin(int(row) & int(c)).count("1") & 1 for c in cols])
            S[k] = draw.scale * (1.0 - 2.0 * parity) * draw.sign_flips[: draw.n]
        return S
    raise InvalidInputError(f"unsupported sketch type {type(draw).__name__}")


def approx_leverage_scores(X, sketch_r=None, rng=None, draw=None):
    """Leverage scores estimated from a sketched QR factorization.

    Computes ``R`` from ``QR(S @ X)`` and returns squared row norms of
    ``X @ inv(R)``. ``S`` is an SRHT with ``sketch_r`` rows unless an explicit
    ``draw`` is supplied. ``sketch_r`` defaults to ``ceil(4 p log p)``.
    """
    X = as_matrix(X, "X")
    n, p = X.shape
    if draw is None:
        if sketch_r is None:
            sketch_r = max(p, math.ceil(4 * p * math.log(max(p, 2))))
        sketch_r = check_count(sketch_r, "sketch_r")
        if sketch_r < p:
            raise InvalidInputError(f"sketch_r={sketch_r} must be at least cols={p}")
        draw = draw_srht_sketch(sketch_r, n, rng)
    SX = apply_sketch(draw, X)
    if thin_svd(SX).rank < p:
        raise NumericError(
            f"sketched matrix is rank deficient with {draw.r} rows; use a larger sketch_r"
        )
    R = np.linalg.qr(SX, mode="r")
    XRinv = np.linalg.solve(R.T, X.T).T
    return np.einsum("ij,ij->i", XRinv, XRinv)


def leverage_for_kind(kind, X, rng=None):
    """Exact or approximate leverage scores, depending on ``kind.approx_sketch_r``."""
    if kind.approx_sketch_r is not None:
        return approx_leverage_scores(X, kind.approx_sketch_r, rng)
    return leverage_scores(X)
