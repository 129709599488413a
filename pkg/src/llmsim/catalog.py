"""Model and accelerator prefabs, plus the simulation hyperparameter set."""

from __future__ import annotations

import csv
import dataclasses
from dataclasses import dataclass
from pathlib import Path
from typing import Union

POWER_MODELS = ("sqrt", "linear", "square", "cubic", "mse", "asymptotic", "asymptotic_dvfs")


class UnknownPrefabError(LookupError):
    """Raised when a model or GPU name is not in the library."""

    def __init__(self, kind: str, name: str, available):
        self.kind = kind
        self.name = name
        self.available = sorted(available)
        super().__init__(f"unknown {kind} {name!r}; available: {', '.join(self.available)}")


@dataclass(frozen=True)
class LLMConfig:
    name: str
    params: float  # absolute parameter count, not billions
    layers: int
    heads: int
    head_dim: int
    hidden_dim: int
    bytes_per_param: int = 2

    def __post_init__(self):
        if self.params <= 0 or self.layers <= 0 or self.heads <= 0 or self.head_dim <= 0:
            raise ValueError(f"{self.name}: params, layers, heads and head_dim must be positive")
        if self.bytes_per_param not in (1, 2, 4):
            raise ValueError(f"{self.name}: bytes_per_param must be 1, 2 or 4")
        if self.heads * self.head_dim != self.hidden_dim:
            raise ValueError(
                f"{self.name}: heads * head_dim ({self.heads * self.head_dim}) "
                f"!= hidden_dim ({self.hidden_dim})"
            )


@dataclass(frozen=True)
class GPUConfig:
    name: str
    memory_bytes: float
    bandwidth_bytes_per_s: float
    fp16_flops_per_s: float
    cuda_cores: int
    boost_mhz: float
    p_idle_w: float
    p_max_w: float

    def __post_init__(self):
        if not 0 < self.p_idle_w < self.p_max_w:
            raise ValueError(f"{self.name}: need 0 < p_idle_w < p_max_w")
        if self.bandwidth_bytes_per_s <= 0 or self.fp16_flops_per_s <= 0:
            raise ValueError(f"{self.name}: bandwidth and FLOPS must be positive")


@dataclass(frozen=True)
class SimParams:
    """Tunable knobs of a simulation run.

    ``compute_efficiency`` and ``memory_efficiency`` scale the GPU's peak
    FLOPS and bandwidth. ``prefix_min_len`` of 0 turns prefix caching off.
    ``alpha`` and ``r`` only matter for the asymptotic and mse power models.
    """

    compute_efficiency: float = 0.30
    memory_efficiency: float = 0.60
    prefill_overhead_s: float = 0.025
    max_gpu_utilization: float = 0.95
    warm_s: float = 0.1
    cool_s: float = 0.1
    export_rate_s: float = 0.1
    kv_cache_enabled: bool = True
    prefix_min_len: int = 256
    prefix_cache_capacity: int = 8
    power_model: str = "linear"
    alpha: float = 0.3
    r: float = 1.4
    price_per_hour: float = 1.2

    def __post_init__(self):
        checks = [
            (self.export_rate_s > 0, "export_rate_s must be > 0"),
            (self.warm_s >= 0, "warm_s must be >= 0"),
            (self.cool_s >= 0, "cool_s must be >= 0"),
            (self.prefix_min_len >= 0, "prefix_min_len must be >= 0"),
            (self.prefix_cache_capacity >= 1, "prefix_cache_capacity must be >= 1"),
            (0 < self.compute_efficiency <= 1, "compute_efficiency must be in (0, 1]"),
            (0 < self.memory_efficiency <= 1, "memory_efficiency must be in (0, 1]"),
            (0 < self.max_gpu_utilization <= 1, "max_gpu_utilization must be in (0, 1]"),
            (self.prefill_overhead_s >= 0, "prefill_overhead_s must be >= 0"),
            (self.price_per_hour >= 0, "price_per_hour must be >= 0"),
            (self.power_model in POWER_MODELS, f"power_model must be one of {POWER_MODELS}"),
        ]
        if self.power_model in ("asymptotic", "asymptotic_dvfs"):
            checks.append((self.alpha > 0, "alpha must be > 0 for asymptotic power models"))
        for ok, msg in checks:
            if not ok:
                raise ValueError(msg)

    def replace(self, **changes) -> "SimParams":
        return dataclasses.replace(self, **changes)


def default_params() -> SimParams:
    return SimParams()


_LLMS: dict[str, LLMConfig] = {}
_GPUS: dict[str, GPUConfig] = {}

_SEED_LLMS = [
    LLMConfig("Llama-3-8B", 8e9, 32, 32, 128, 4096, 2),
    LLMConfig("Llama-2-13B", 13e9, 40, 40, 128, 5120, 2),
    LLMConfig("Granite-20B", 20e9, 52, 48, 128, 6144, 2),
    LLMConfig("MPT-30B", 30e9, 48, 64, 112, 7168, 2),
]

_SEED_GPUS = [
    GPUConfig("A10", 24e9, 600e9, 125e12, 9216, 1695, 20, 150),
    GPUConfig("A100-80GB", 80e9, 2039e9, 312e12, 6912, 1410, 50, 400),
]


def register_llm(config: LLMConfig, overwrite: bool = False) -> LLMConfig:
    if config.name in _LLMS and not overwrite:
        raise ValueError(f"LLM {config.name!r} already registered")
    _LLMS[config.name] = config
    return config


def register_gpu(config: GPUConfig, overwrite: bool = False) -> GPUConfig:
    if config.name in _GPUS and not overwrite:
        raise ValueError(f"GPU {config.name!r} already registered")
    _GPUS[config.name] = config
    return config


for _cfg in _SEED_LLMS:
    register_llm(_cfg)
for _cfg in _SEED_GPUS:
    register_gpu(_cfg)
del _cfg


def lookup_llm(name: str) -> LLMConfig:
    try:
        return _LLMS[name]
    except KeyError:
        raise UnknownPrefabError("LLM", name, _LLMS) from None


def lookup_gpu(name: str) -> GPUConfig:
    try:
        return _GPUS[name]
    except KeyError:
        raise UnknownPrefabError("GPU", name, _GPUS) from None


def available_llms() -> list[str]:
    return sorted(_LLMS)


def available_gpus() -> list[str]:
    return sorted(_GPUS)


def _coerce(cls, row: dict) -> dict:
    out = {}
    for f in dataclasses.fields(cls):
        if f.name not in row:
            if f.default is dataclasses.MISSING:
                raise ValueError(f"catalog row missing column {f.name!r}")
            continue
        raw = row[f.name].strip()
        if f.name == "name":
            out[f.name] = raw
        elif f.type == "int":
            out[f.name] = int(float(raw))
        else:
            out[f.name] = float(raw)
    return out


def load_catalog(path: Union[str, Path], overwrite: bool = False) -> list:
    """Register user-defined entries from a CSV file.

    The header decides the entry type: a ``layers`` column means LLMs, a
    ``bandwidth_bytes_per_s`` column means GPUs.
    """
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        if "layers" in header:
            cls, register = LLMConfig, register_llm
        elif "bandwidth_bytes_per_s" in header:
            cls, register = GPUConfig, register_gpu
        else:
            raise ValueError(f"{path}: header matches neither LLMConfig nor GPUConfig fields")
        entries = []
        for lineno, row in enumerate(reader, start=2):
            try:
                entries.append(cls(**_coerce(cls, row)))
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: {exc}") from exc
    return [register(e, overwrite=overwrite) for e in entries]
