"""Cache-aware discrete-event simulation of LLM inference on GPUs."""

from .cache import CacheStats, PrefixCache, PrefixDecision, cache_hit_ratio, kv_cache_bytes, try_prefix_hit
from .catalog import (
    GPUConfig,
    LLMConfig,
    SimParams,
    default_params,
    load_catalog,
    lookup_gpu,
    lookup_llm,
    register_gpu,
    register_llm,
)
from .efficiency import (
    efficiency_report,
    financial_efficiency,
    financial_efficiency_ratio,
    mape,
    sustainability_efficiency,
    sustainability_efficiency_ratio,
)
from .performance import decode_time, gpu_utilization_at, prefill_time, schedule_fragments, token_timing
from .simulator import RunConfig, RunSummary, Simulator, run, simulate
from .sustainability import PowerModelSpec, co2_emissions, grid_carbon_intensity, integrate_energy, power_draw
from .traces import (
    CarbonSample,
    FragmentSample,
    TaskResult,
    WorkloadTask,
    read_carbon,
    read_workload,
    write_results,
)

__version__ = "0.1.0"
