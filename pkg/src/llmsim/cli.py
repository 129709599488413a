"""Command-line entry point: ``python -m llmsim --trace workload.csv``."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .catalog import POWER_MODELS, default_params, load_catalog, lookup_gpu, lookup_llm
from .simulator import RunConfig, run


class CLIError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise CLIError(message)


def _positive_float(raw: str) -> float:
    try:
        value = float(raw)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {raw!r}") from None
    if not value > 0:
        raise argparse.ArgumentTypeError(f"must be > 0, got {raw}")
    return value


def _nonneg_float(raw: str) -> float:
    try:
        value = float(raw)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {raw!r}") from None
    if value < 0:
        raise argparse.ArgumentTypeError(f"must be >= 0, got {raw}")
    return value


def _int_at_least(low: int):
    def parse(raw: str) -> int:
        try:
            value = int(raw)
        except ValueError:
            raise argparse.ArgumentTypeError(f"not an integer: {raw!r}") from None
        if value < low:
            raise argparse.ArgumentTypeError(f"must be >= {low}, got {value}")
        return value
    return parse


def _on_off(raw: str) -> bool:
    lowered = raw.lower()
    if lowered in ("on", "true", "1"):
        return True
    if lowered in ("off", "false", "0"):
        return False
    raise argparse.ArgumentTypeError(f"expected on or off, got {raw!r}")


def build_parser() -> argparse.ArgumentParser:
    d = default_params()
    p = _Parser(prog="llmsim", description="Trace-driven LLM inference simulator.")
    p.add_argument("--llm", default="Llama-3-8B", help="model prefab name")
    p.add_argument("--gpu", default="A10", help="GPU prefab name")
    p.add_argument("--trace", required=True, type=Path, help="workload trace (CSV)")
    p.add_argument("--output_folder", "--outputfolder", dest="output_folder",
                   default=Path("data/output_traces"), type=Path)
    p.add_argument("--kv_cache", default=d.kv_cache_enabled, type=_on_off, help="on | off")
    p.add_argument("--prefix_len", "--prefix_cache_min_len", dest="prefix_len",
                   default=d.prefix_min_len, type=_int_at_least(0),
                   help="prompts longer than this populate the prefix cache (0 disables)")
    p.add_argument("--export_rate", default=d.export_rate_s, type=_positive_float,
                   help="snapshot interval in seconds")
    p.add_argument("--flush_size", "--flush-size", dest="flush_size", default=10_000,
                   type=_int_at_least(1), help="tasks buffered between disk flushes")
    # extensions beyond the core flag set
    p.add_argument("--carbon_trace", type=Path, default=None, help="carbon-intensity trace (CSV)")
    p.add_argument("--prefix_cache_capacity", default=d.prefix_cache_capacity, type=_int_at_least(1),
                   help="prompts kept per session cache")
    p.add_argument("--power_model", default=d.power_model, choices=POWER_MODELS)
    p.add_argument("--price_per_hour", default=d.price_per_hour, type=_nonneg_float)
    p.add_argument("--llm_catalog", type=Path, default=None, help="CSV of extra LLM prefabs")
    p.add_argument("--gpu_catalog", type=Path, default=None, help="CSV of extra GPU prefabs")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def parse_args(argv=None) -> RunConfig:
    """Resolve argv into a :class:`RunConfig`; raises :class:`CLIError` on bad input."""
    ns = build_parser().parse_args(argv)
    for catalog in (ns.llm_catalog, ns.gpu_catalog):
        if catalog is not None:
            try:
                load_catalog(catalog, overwrite=True)
            except (OSError, ValueError) as exc:
                raise CLIError(f"catalog {catalog}: {exc}") from exc
    try:
        llm = lookup_llm(ns.llm)
    except LookupError as exc:
        raise CLIError(f"argument --llm: {exc.args[0]}") from None
    try:
        gpu = lookup_gpu(ns.gpu)
    except LookupError as exc:
        raise CLIError(f"argument --gpu: {exc.args[0]}") from None
    params = default_params().replace(
        kv_cache_enabled=ns.kv_cache,
        prefix_min_len=ns.prefix_len,
        export_rate_s=ns.export_rate,
        prefix_cache_capacity=ns.prefix_cache_capacity,
        power_model=ns.power_model,
        price_per_hour=ns.price_per_hour,
    )
    if ns.verbose:
        logging.basicConfig(level=logging.DEBUG, format="%(name)s: %(message)s")
    return RunConfig(llm, gpu, params, ns.trace, ns.output_folder, ns.carbon_trace, ns.flush_size)


def main(argv=None) -> int:
    try:
        config = parse_args(argv)
        summary = run(config)
    except CLIError as exc:
        print(f"llmsim: error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # one-line reason, no traceback
        print(f"llmsim: error: {exc}", file=sys.stderr)
        return 1
    print(summary.format_table())
    return 0
