"""Experiment configuration: JSON loading, defaults and validation."""
from dataclasses import asdict, dataclass, field, fields
import json
import math
import os

from ..datagen import FAMILIES
from ..exceptions import InvalidInputError
from ..sketches import SketchKind

DEFAULT_KINDS = ("R", "NR", "Unif", "Shr", "GP", "Had")
SMALL_R = (80, 90, 100, 200)
LARGE_R = (300, 400, 500, 600, 700, 800, 900, 1000)


def _default_kinds():
    return [SketchKind.from_name(k) for k in DEFAULT_KINDS]


@dataclass
class ExperimentConfig:
    n: int = 1024
    p: int = 50
    nu_list: list = field(default_factory=lambda: [1.0, 2.0, 10.0])
    r_list: list = field(default_factory=lambda: list(SMALL_R + LARGE_R))
    sketch_kinds: list = field(default_factory=_default_kinds)
    replications: int = 100
    master_seed: int = 0
    ar_rho: float = 0.5
    mc_mode: bool = False
    output_dir: str = "results"
    design_family: str = "elementwise"

    def __post_init__(self):
        self.sketch_kinds = [_parse_kind(k) for k in self.sketch_kinds]
        self.nu_list = [float(v) for v in self.nu_list]
        self.r_list = [int(r) for r in self.r_list]
        self.validate()

    def validate(self):
        if not self.nu_list or not self.r_list or not self.sketch_kinds:
            raise InvalidInputError("nu_list, r_list and sketch_kinds must be non-empty")
        if any(r < 1 for r in self.r_list):
            raise InvalidInputError("every r in r_list must be >= 1")
        if self.replications < 1:
            raise InvalidInputError("replications must be >= 1")
        if self.n < self.p or self.p < 1:
            raise InvalidInputError("need n >= p >= 1")
        if any(not nu > 0 for nu in self.nu_list):
            raise InvalidInputError("every nu must be positive")
        if not -1 < self.ar_rho < 1:
            raise InvalidInputError("ar_rho must lie in (-1, 1)")
        if self.design_family not in FAMILIES:
            raise InvalidInputError(f"design_family must be one of {FAMILIES}")
        if not 0 <= self.master_seed < 2**64:
            raise InvalidInputError("master_seed must be a 64-bit unsigned integer")

    def to_dict(self):
        d = asdict(self)
        d["sketch_kinds"] = [_kind_to_json(k) for k in self.sketch_kinds]
        d["nu_list"] = [nu if math.isfinite(nu) else "inf" for nu in self.nu_list]
        return d


def _parse_kind(k):
    if isinstance(k, SketchKind):
        return k
    if isinstance(k, str):
        return SketchKind.from_name(k)
    if isinstance(k, dict):
        params = dict(k)
        tag = params.pop("tag")
        if params.get("mixture_q") is not None:
            params["mixture_q"] = tuple(params["mixture_q"])
        return SketchKind.from_name(tag, **params)
    raise InvalidInputError(f"cannot parse sketch kind {k!r}")


def _kind_to_json(kind):
    d = {"tag": kind.tag.value, "theta": kind.theta}
    if kind.mixture_q is not None:
        d["mixture_q"] = list(kind.mixture_q)
    if not kind.rescale:
        d["rescale"] = False
    if kind.approx_sketch_r is not None:
        d["approx_sketch_r"] = kind.approx_sketch_r
    return d


def load_config(path, env=None):
    """Read a JSON config; ``BENCH_SEED`` in ``env`` overrides ``master_seed``."""
    env = os.environ if env is None else env
    with open(path, encoding="utf-8") as fh:
        raw = json.load(fh)
    known = {f.name for f in fields(ExperimentConfig)}
    unknown = set(raw) - known
    if unknown:
        raise InvalidInputError(f"unknown config keys: {sorted(unknown)}")
    if "nu_list" in raw:
        raw["nu_list"] = [math.inf if v in ("inf", "Infinity") else v for v in raw["nu_list"]]
    seed = env.get("BENCH_SEED")
    if seed is not None and seed.strip():
        try:
            raw["master_seed"] = int(seed.strip(), 10)
        except ValueError:
            raise InvalidInputError(f"BENCH_SEED must be a decimal integer, got {seed!r}") from None
    return ExperimentConfig(**raw)
