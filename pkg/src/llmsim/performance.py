"""Latency model (prefill, decode, per-token bounds) and the snapshot schedule."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .catalog import GPUConfig, LLMConfig, SimParams
from .traces import (
    COOLDOWN,
    DECODE,
    PHASES,
    PREFILL,
    WARMUP,
    FragmentColumns,
    FragmentSample,
    WorkloadTask,
)

WARM_COOL_UTILIZATION = 0.5


@dataclass(frozen=True)
class TokenTiming:
    compute_bound_s: float
    memory_bound_s: float
    per_token_s: float

    @property
    def tokens_per_s(self) -> float:
        return 1.0 / self.per_token_s


@dataclass(frozen=True)
class TaskTiming:
    prefill_s: float
    decode_s: float
    snapshot_count: int
    snapshot_interval_s: float

    @property
    def total_s(self) -> float:
        return self.prefill_s + self.decode_s


def flops_per_token(llm: LLMConfig) -> float:
    return 2.0 * llm.params


def prefill_time(llm: LLMConfig, gpu: GPUConfig, params: SimParams, n_input):
    """Prompt processing time in seconds; linear in ``n_input`` plus a fixed overhead.

    Works on scalars and numpy arrays alike.
    """
    return (n_input * llm.params * 2) / (gpu.fp16_flops_per_s * params.compute_efficiency) \
        + params.prefill_overhead_s


def token_timing(llm: LLMConfig, gpu: GPUConfig, params: SimParams) -> TokenTiming:
    compute = flops_per_token(llm) / (gpu.fp16_flops_per_s * params.compute_efficiency)
    memory = (llm.bytes_per_param * llm.params) / (gpu.bandwidth_bytes_per_s * params.memory_efficiency)
    return TokenTiming(compute, memory, max(compute, memory))


def decode_time(params: SimParams, timing: TokenTiming, n_output):
    """Generation time for ``n_output`` tokens.

    With the KV cache each token costs one ``per_token_s``; without it step k
    recomputes k tokens, giving the triangular number n(n+1)/2.
    """
    if params.kv_cache_enabled:
        return n_output * timing.per_token_s
    return (n_output * (n_output + 1) / 2) * timing.per_token_s


def snapshot_count(total_s: float, interval_s: float) -> int:
    return math.ceil(total_s / interval_s)


def task_timing(
    llm: LLMConfig,
    gpu: GPUConfig,
    params: SimParams,
    n_input: int,
    n_output: int,
    prefix_hit: bool = False,
    timing: TokenTiming = None,
) -> TaskTiming:
    timing = timing or token_timing(llm, gpu, params)
    # a prefix hit skips prefill entirely, overhead included
    prefill = 0.0 if prefix_hit else prefill_time(llm, gpu, params, n_input)
    decode = decode_time(params, timing, n_output)
    return TaskTiming(prefill, decode, snapshot_count(prefill + decode, params.export_rate_s),
                      params.export_rate_s)


def gpu_utilization_at(t: float, prefill_s: float, decode_s: float, params: SimParams) -> float:
    if t < params.warm_s:
        return WARM_COOL_UTILIZATION
    if t < prefill_s + decode_s - params.cool_s:
        return params.max_gpu_utilization
    return WARM_COOL_UTILIZATION


def _phase_at(t: float, prefill_s: float, decode_s: float, params: SimParams) -> int:
    if t < params.warm_s:
        return WARMUP
    if t < prefill_s + decode_s - params.cool_s:
        return PREFILL if t < prefill_s else DECODE
    return COOLDOWN


def _kv_tokens_at(t, prefill_s, decode_s, n_input, n_output):
    if t < prefill_s:
        return n_input
    frac = min(max((t - prefill_s) / decode_s, 0.0), 1.0) if decode_s > 0 else 1.0
    return n_input + n_output * frac


def schedule_fragments(
    task: WorkloadTask,
    timing: TaskTiming,
    kv_per_token: float,
    start_s: float,
    params: SimParams,
) -> list[FragmentSample]:
    """Snapshots of one task on the export grid, with ``power_w`` left at 0."""
    out = []
    for k in range(timing.snapshot_count):
        t = k * timing.snapshot_interval_s
        if params.kv_cache_enabled:
            tokens = _kv_tokens_at(t, timing.prefill_s, timing.decode_s,
                                   task.n_input_tokens, task.n_output_tokens)
            kv = int(round(kv_per_token * tokens))
        else:
            kv = 0
        out.append(FragmentSample(
            task_index=task.task_index,
            ts_s=start_s + t,
            phase=PHASES[_phase_at(t, timing.prefill_s, timing.decode_s, params)],
            gpu_utilization=gpu_utilization_at(t, timing.prefill_s, timing.decode_s, params),
            power_w=0.0,
            kv_cache_bytes=kv,
        ))
    return out


def fragment_columns(
    task_index: np.ndarray,
    n_input: np.ndarray,
    n_output: np.ndarray,
    prefill_s: np.ndarray,
    decode_s: np.ndarray,
    start_s: np.ndarray,
    kv_per_token: float,
    params: SimParams,
) -> FragmentColumns:
    """Vectorized :func:`schedule_fragments` over many tasks at once."""
    interval = params.export_rate_s
    total = prefill_s + decode_s
    counts = np.ceil(total / interval).astype(np.int64)
    n = int(counts.sum())
    if n == 0:
        return FragmentColumns.empty()
    owner = np.repeat(np.arange(len(counts)), counts)
    first = np.cumsum(counts) - counts
    k = np.arange(n, dtype=np.int64) - first[owner]
    t = k * interval

    p = prefill_s[owner]
    end_main = total[owner] - params.cool_s
    warm = t < params.warm_s
    main = ~warm & (t < end_main)

    util = np.where(main, params.max_gpu_utilization, WARM_COOL_UTILIZATION)
    phase = np.where(warm, WARMUP, np.where(main, np.where(t < p, PREFILL, DECODE), COOLDOWN))

    if params.kv_cache_enabled:
        d = decode_s[owner]
        with np.errstate(divide="ignore", invalid="ignore"):
            frac = np.where(d > 0, np.clip((t - p) / d, 0.0, 1.0), 1.0)
        n_in = n_input[owner].astype(float)
        tokens = np.where(t < p, n_in, n_in + n_output[owner] * frac)
        kv = np.rint(kv_per_token * tokens).astype(np.int64)
    else:
        kv = np.zeros(n, dtype=np.int64)

    return FragmentColumns(
        task_index=np.asarray(task_index, dtype=np.int64)[owner],
        ts_s=start_s[owner] + t,
        phase=phase.astype(np.int8),
        gpu_utilization=util,
        power_w=np.zeros(n),
        kv_cache_bytes=kv,
    )
