"""Sequential trace replay: prefix cache, then latency, then power and carbon, then efficiency."""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np

from .cache import CacheStats, PrefixCache, PrefixDecision, kv_cache_bytes
from .catalog import GPUConfig, LLMConfig, SimParams
from .efficiency import EfficiencyReport, efficiency_report
from .performance import decode_time, fragment_columns, prefill_time, token_timing
from .sustainability import CarbonTrace, PowerModelSpec, co2_emissions, integrate_energy, power_draw
from .traces import (
    CarbonSample,
    FragmentColumns,
    ResultWriter,
    TaskResult,
    WorkloadTask,
    read_carbon,
    read_workload,
)

log = logging.getLogger(__name__)


class SimulationError(RuntimeError):
    pass


@dataclass
class RunSummary:
    task_count: int = 0
    total_prefill_s: float = 0.0
    total_decode_s: float = 0.0
    total_input_tokens: int = 0
    total_output_tokens: int = 0
    mean_throughput_tps: float = 0.0
    cache_stats: CacheStats = field(default_factory=CacheStats)
    total_energy_wh: float = 0.0
    total_co2_g: Optional[float] = None
    efficiency: Optional[EfficiencyReport] = None
    fragment_count: int = 0
    wall_clock_s: float = 0.0

    @property
    def total_gpu_hours(self) -> float:
        return (self.total_prefill_s + self.total_decode_s) / 3600.0

    def rows(self) -> list[tuple[str, str]]:
        """Metric/value pairs for ``summary.csv``; wall-clock time is left out."""
        def fmt(v):
            if v is None:
                return ""
            if isinstance(v, (bool, np.bool_)):
                return "true" if v else "false"
            if isinstance(v, (int, np.integer)):
                return str(int(v))
            return repr(float(v))

        cs = self.cache_stats
        rows = [
            ("task_count", self.task_count),
            ("fragment_count", self.fragment_count),
            ("total_input_tokens", self.total_input_tokens),
            ("total_output_tokens", self.total_output_tokens),
            ("total_prefill_s", self.total_prefill_s),
            ("total_decode_s", self.total_decode_s),
            ("total_gpu_hours", self.total_gpu_hours),
            ("mean_throughput_tps", self.mean_throughput_tps),
            ("cache_lookups", cs.lookups),
            ("cache_hits", cs.hits),
            ("cache_misses", cs.misses),
            ("cache_insertions", cs.insertions),
            ("cache_evictions", cs.evictions),
            ("cache_hit_ratio", cs.hits / cs.lookups if cs.lookups else None),
            ("total_energy_wh", self.total_energy_wh),
            ("total_co2_g", self.total_co2_g),
        ]
        eff = self.efficiency
        for name in ("total_cost", "financial_eff", "cost_per_mtoken", "sustainability_eff_energy",
                     "energy_wh_per_mtoken", "sustainability_eff_co2", "co2_per_mtoken"):
            rows.append((name, getattr(eff, name) if eff else None))
        return [(k, fmt(v)) for k, v in rows]

    def format_table(self) -> str:
        rows = self.rows() + [("wall_clock_s", f"{self.wall_clock_s:.3f}")]
        width = max(len(k) for k, _ in rows)
        return "\n".join(f"{k:<{width}}  {v if v else '-'}" for k, v in rows)


@dataclass
class SimulationOutput:
    summary: RunSummary
    tasks: list
    fragments: Optional[FragmentColumns] = None


class Simulator:
    """Replays tasks back to back on a single simulated GPU.

    Tasks run in trace order; each starts when the previous one ends. The
    clock starts at 0, aligned with the first carbon sample.
    """

    def __init__(self, llm: LLMConfig, gpu: GPUConfig, params: SimParams,
                 carbon: Optional[Sequence[CarbonSample]] = None):
        self.llm = llm
        self.gpu = gpu
        self.params = params
        self.carbon = CarbonTrace(carbon) if carbon else None
        self.timing = token_timing(llm, gpu, params)
        self.power_spec = PowerModelSpec.from_params(params)
        self.kv_per_token = kv_cache_bytes(llm, 1)

    def _block(self, tasks: Sequence[WorkloadTask], cache: PrefixCache, clock: float):
        hits = np.zeros(len(tasks), dtype=bool)
        for i, task in enumerate(tasks):
            try:
                hits[i] = cache.access(task) is PrefixDecision.HIT
            except Exception as exc:
                raise SimulationError(f"task {task.task_index}: {exc}") from exc
        index = np.fromiter((t.task_index for t in tasks), dtype=np.int64, count=len(tasks))
        n_in = np.fromiter((t.n_input_tokens for t in tasks), dtype=np.int64, count=len(tasks))
        n_out = np.fromiter((t.n_output_tokens for t in tasks), dtype=np.int64, count=len(tasks))

        prefill = np.where(hits, 0.0, prefill_time(self.llm, self.gpu, self.params, n_in))
        decode = decode_time(self.params, self.timing, n_out.astype(float))
        latency = prefill + decode
        # seed the running sum with the clock so starts don't depend on block size
        ends = np.cumsum(np.concatenate(([clock], latency)))
        start = ends[:-1]

        frags = fragment_columns(index, n_in, n_out, prefill, decode, start,
                                 self.kv_per_token, self.params)
        if len(frags):
            frags.power_w = power_draw(self.gpu, self.power_spec, frags.gpu_utilization)

        results = [
            TaskResult.build(int(index[i]), t.session_id, int(n_in[i]), int(n_out[i]),
                             float(start[i]), float(prefill[i]), float(decode[i]), bool(hits[i]))
            for i, t in enumerate(tasks)
        ]
        return results, frags, float(ends[-1])

    def run(self, tasks: Iterable[WorkloadTask], writer: Optional[ResultWriter] = None,
            block_size: int = 10_000, keep: bool = False) -> SimulationOutput:
        t0 = time.perf_counter()
        cache = PrefixCache.from_params(self.params)
        summary = RunSummary(cache_stats=cache.stats)
        if self.carbon is not None:
            summary.total_co2_g = 0.0
        interval = self.params.export_rate_s
        kept_tasks, kept_frags = [], []
        tput_sum, clock = 0.0, 0.0

        for block in _chunks(tasks, block_size):
            results, frags, clock = self._block(block, cache, clock)
            summary.task_count += len(results)
            summary.fragment_count += len(frags)
            for r in results:
                summary.total_prefill_s += r.prefill_s
                summary.total_decode_s += r.decode_s
                summary.total_input_tokens += r.n_input_tokens
                summary.total_output_tokens += r.n_output_tokens
                tput_sum += r.throughput_tps
            summary.total_energy_wh += integrate_energy(frags, interval)
            if self.carbon is not None:
                summary.total_co2_g += co2_emissions(frags, interval, self.carbon)
            if writer is not None:
                writer.add(results, frags)
            if keep:
                kept_tasks.extend(results)
                kept_frags.append(frags)
            log.debug("simulated %d tasks, clock at %.1f s", summary.task_count, clock)

        if summary.task_count:
            summary.mean_throughput_tps = tput_sum / summary.task_count
        if summary.total_input_tokens + summary.total_output_tokens > 0:
            summary.efficiency = efficiency_report(
                summary.total_input_tokens, summary.total_output_tokens,
                summary.total_prefill_s, summary.total_decode_s,
                self.params.price_per_hour, summary.total_energy_wh, summary.total_co2_g,
            )
        summary.wall_clock_s = time.perf_counter() - t0
        fragments = _concat(kept_frags) if keep else None
        return SimulationOutput(summary, kept_tasks, fragments)


def _chunks(items: Iterable, size: int):
    buf = []
    for item in items:
        buf.append(item)
        if len(buf) == size:
            yield buf
            buf = []
    if buf:
        yield buf


def _concat(blocks: list) -> FragmentColumns:
    if not blocks:
        return FragmentColumns.empty()
    return FragmentColumns(*(np.concatenate([getattr(b, f) for b in blocks]) for f in (
        "task_index", "ts_s", "phase", "gpu_utilization", "power_w", "kv_cache_bytes")))


def simulate(tasks: Iterable[WorkloadTask], llm: LLMConfig, gpu: GPUConfig,
             params: SimParams, carbon: Optional[Sequence[CarbonSample]] = None) -> SimulationOutput:
    """In-memory run that keeps every task result and fragment."""
    return Simulator(llm, gpu, params, carbon).run(tasks, keep=True)


def write_summary(summary: RunSummary, path: Path) -> None:
    with Path(path).open("w", encoding="utf-8", newline="") as fh:
        fh.write("metric,value\n")
        for k, v in summary.rows():
            fh.write(f"{k},{v}\n")


@dataclass
class RunConfig:
    llm: LLMConfig
    gpu: GPUConfig
    params: SimParams
    trace: Path
    output_folder: Path = Path("data/output_traces")
    carbon_trace: Optional[Path] = None
    flush_size: int = 10_000


def run(config: RunConfig) -> RunSummary:
    """Full file-to-file run: writes tasks.csv, fragments.csv and summary.csv."""
    tasks = read_workload(config.trace)
    carbon = read_carbon(config.carbon_trace) if config.carbon_trace else None
    sim = Simulator(config.llm, config.gpu, config.params, carbon)
    out = Path(config.output_folder)
    with ResultWriter(out, config.flush_size) as writer:
        result = sim.run(tasks, writer=writer, block_size=config.flush_size)
    write_summary(result.summary, out / "summary.csv")
    return result.summary
