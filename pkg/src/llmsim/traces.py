"""Reading workload and carbon traces; writing task and fragment traces."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional, Sequence, Union

import numpy as np

PathLike = Union[str, Path]

PHASES = ("warmup", "prefill", "decode", "cooldown")
WARMUP, PREFILL, DECODE, COOLDOWN = range(4)

TASK_COLUMNS = (
    "task_index",
    "session_id",
    "n_input_tokens",
    "n_output_tokens",
    "start_s",
    "prefill_s",
    "decode_s",
    "latency_s",
    "throughput_tps",
    "prefix_cache_hit",
)
FRAGMENT_COLUMNS = ("task_index", "ts_s", "phase", "gpu_utilization", "power_w", "kv_cache_bytes")


class TraceFormatError(ValueError):
    """A trace file is malformed; the message carries path and line."""


class TraceWriteError(OSError):
    pass


@dataclass(frozen=True)
class WorkloadTask:
    task_index: int
    n_input_tokens: int
    n_output_tokens: int
    session_id: Optional[str] = None
    turn_id: Optional[int] = None
    arrival_ts_s: Optional[float] = None
    input_token_ids: Optional[tuple] = None
    output_token_ids: Optional[tuple] = None

    def __post_init__(self):
        if self.n_input_tokens < 0 or self.n_output_tokens < 0:
            raise ValueError("token counts must be >= 0")
        if self.input_token_ids is not None and len(self.input_token_ids) != self.n_input_tokens:
            raise ValueError(
                f"input_token_ids has {len(self.input_token_ids)} ids, "
                f"n_input_tokens is {self.n_input_tokens}"
            )
        if self.output_token_ids is not None and len(self.output_token_ids) != self.n_output_tokens:
            raise ValueError(
                f"output_token_ids has {len(self.output_token_ids)} ids, "
                f"n_output_tokens is {self.n_output_tokens}"
            )


@dataclass(frozen=True)
class CarbonSample:
    start_ts_s: float
    intensity_g_per_kwh: float


@dataclass(frozen=True)
class TaskResult:
    task_index: int
    session_id: Optional[str]
    n_input_tokens: int
    n_output_tokens: int
    start_s: float
    prefill_s: float
    decode_s: float
    latency_s: float
    throughput_tps: float
    prefix_cache_hit: bool

    @classmethod
    def build(cls, task_index, session_id, n_input, n_output, start_s, prefill_s, decode_s, hit=False):
        latency = prefill_s + decode_s
        tput = (n_input + n_output) / latency if latency > 0 else 0.0
        return cls(task_index, session_id, n_input, n_output, start_s, prefill_s, decode_s,
                   latency, tput, hit)


@dataclass(frozen=True)
class FragmentSample:
    task_index: int
    ts_s: float
    phase: str
    gpu_utilization: float
    power_w: float
    kv_cache_bytes: int


@dataclass
class FragmentColumns:
    """Columnar block of fragments; ``phase`` holds indices into ``PHASES``."""

    task_index: np.ndarray
    ts_s: np.ndarray
    phase: np.ndarray
    gpu_utilization: np.ndarray
    power_w: np.ndarray
    kv_cache_bytes: np.ndarray

    def __len__(self):
        return len(self.ts_s)

    @classmethod
    def empty(cls) -> "FragmentColumns":
        return cls(
            np.empty(0, np.int64), np.empty(0), np.empty(0, np.int8),
            np.empty(0), np.empty(0), np.empty(0, np.int64),
        )

    @classmethod
    def from_samples(cls, samples: Sequence[FragmentSample]) -> "FragmentColumns":
        if not samples:
            return cls.empty()
        code = {name: i for i, name in enumerate(PHASES)}
        return cls(
            np.array([s.task_index for s in samples], dtype=np.int64),
            np.array([s.ts_s for s in samples], dtype=float),
            np.array([code[s.phase] for s in samples], dtype=np.int8),
            np.array([s.gpu_utilization for s in samples], dtype=float),
            np.array([s.power_w for s in samples], dtype=float),
            np.array([s.kv_cache_bytes for s in samples], dtype=np.int64),
        )

    def to_samples(self) -> list[FragmentSample]:
        return [
            FragmentSample(int(t), float(ts), PHASES[p], float(u), float(w), int(kv))
            for t, ts, p, u, w, kv in zip(
                self.task_index, self.ts_s, self.phase,
                self.gpu_utilization, self.power_w, self.kv_cache_bytes,
            )
        ]

    def slice(self, start: int, stop: int) -> "FragmentColumns":
        return FragmentColumns(
            self.task_index[start:stop], self.ts_s[start:stop], self.phase[start:stop],
            self.gpu_utilization[start:stop], self.power_w[start:stop],
            self.kv_cache_bytes[start:stop],
        )


def _parse_int(raw: str, column: str, where: str) -> int:
    try:
        return int(raw)
    except (TypeError, ValueError):
        raise TraceFormatError(f"{where}: column {column!r} is not an integer: {raw!r}") from None


def _parse_ids(raw: Optional[str], column: str, where: str) -> Optional[tuple]:
    if raw is None or not raw.strip():
        return None
    try:
        return tuple(int(tok) for tok in raw.split())
    except ValueError:
        raise TraceFormatError(f"{where}: column {column!r} holds a non-integer token id") from None


def read_workload(path: PathLike) -> list[WorkloadTask]:
    """Parse a workload trace in either the simple or the tokenized layout.

    The simple layout needs only ``n_input_tokens,n_output_tokens``. The
    tokenized layout adds ``session_id,turn_id,ts`` and space-separated
    token-id lists in ``input_token_ids`` / ``output_token_ids``.
    """
    path = Path(path)
    tasks = []
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames
        if not header:
            raise TraceFormatError(f"{path}: missing header row")
        for col in ("n_input_tokens", "n_output_tokens"):
            if col not in header:
                raise TraceFormatError(f"{path}: missing mandatory column {col!r}")
        for i, row in enumerate(reader):
            where = f"{path}:{i + 2}"
            n_in = _parse_int(row["n_input_tokens"], "n_input_tokens", where)
            n_out = _parse_int(row["n_output_tokens"], "n_output_tokens", where)
            session = row.get("session_id") or None
            turn = row.get("turn_id")
            ts = row.get("ts")
            try:
                tasks.append(WorkloadTask(
                    task_index=i,
                    n_input_tokens=n_in,
                    n_output_tokens=n_out,
                    session_id=session,
                    turn_id=_parse_int(turn, "turn_id", where) if turn else None,
                    arrival_ts_s=float(ts) if ts else None,
                    input_token_ids=_parse_ids(row.get("input_token_ids"), "input_token_ids", where),
                    output_token_ids=_parse_ids(row.get("output_token_ids"), "output_token_ids", where),
                ))
            except ValueError as exc:
                if isinstance(exc, TraceFormatError):
                    raise
                raise TraceFormatError(f"{where}: {exc}") from exc
    return tasks


def write_workload(tasks: Iterable[WorkloadTask], path: PathLike) -> None:
    """Write tasks in the tokenized layout (token lists left empty when absent)."""
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("session_id", "turn_id", "ts", "n_input_tokens", "n_output_tokens",
                    "input_token_ids", "output_token_ids"))
        for t in tasks:
            w.writerow((
                t.session_id or "",
                "" if t.turn_id is None else t.turn_id,
                "" if t.arrival_ts_s is None else repr(t.arrival_ts_s),
                t.n_input_tokens,
                t.n_output_tokens,
                " ".join(map(str, t.input_token_ids)) if t.input_token_ids is not None else "",
                " ".join(map(str, t.output_token_ids)) if t.output_token_ids is not None else "",
            ))


def read_carbon(path: PathLike) -> list[CarbonSample]:
    path = Path(path)
    samples = []
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        for col in ("start_ts_s", "intensity_g_per_kwh"):
            if col not in (reader.fieldnames or []):
                raise TraceFormatError(f"{path}: missing column {col!r}")
        for lineno, row in enumerate(reader, start=2):
            try:
                ts = float(row["start_ts_s"])
                ci = float(row["intensity_g_per_kwh"])
            except (TypeError, ValueError):
                raise TraceFormatError(f"{path}:{lineno}: non-numeric carbon sample") from None
            if ci < 0:
                raise TraceFormatError(f"{path}:{lineno}: negative intensity {ci}")
            if samples and ts <= samples[-1].start_ts_s:
                raise TraceFormatError(
                    f"{path}:{lineno}: non-monotonic timestamp {ts} after {samples[-1].start_ts_s}"
                )
            samples.append(CarbonSample(ts, ci))
    if not samples:
        raise TraceFormatError(f"{path}: empty carbon trace")
    return samples


def _fmt_bool(b: bool) -> str:
    return "true" if b else "false"


@dataclass
class WriteSummary:
    tasks_path: Path
    fragments_path: Path
    task_rows: int = 0
    fragment_rows: int = 0
    flushes: list = field(default_factory=list)  # task count of each flush


class ResultWriter:
    """Buffered writer for ``tasks.csv`` and ``fragments.csv``.

    Rows accumulate in memory and hit the disk every ``flush_size`` tasks,
    and once more on ``close``. Use as a context manager.
    """

    def __init__(self, out_dir: PathLike, flush_size: int = 10_000):
        if flush_size < 1:
            raise ValueError("flush_size must be >= 1")
        self.out_dir = Path(out_dir)
        self.flush_size = flush_size
        self.summary = WriteSummary(self.out_dir / "tasks.csv", self.out_dir / "fragments.csv")
        self._task_lines: list[str] = []
        self._frag_lines: list[str] = []
        self._pending = 0
        try:
            self.out_dir.mkdir(parents=True, exist_ok=True)
            self._tasks_fh = self.summary.tasks_path.open("w", encoding="utf-8", newline="")
            self._frags_fh = self.summary.fragments_path.open("w", encoding="utf-8", newline="")
            self._tasks_fh.write(",".join(TASK_COLUMNS) + "\n")
            self._frags_fh.write(",".join(FRAGMENT_COLUMNS) + "\n")
        except OSError as exc:
            raise TraceWriteError(f"{self.out_dir}: {exc.strerror or exc}") from exc

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()

    def add(self, tasks: Sequence[TaskResult], fragments: FragmentColumns) -> None:
        for t in tasks:
            session = t.session_id or ""
            if any(c in session for c in ',"\n'):
                session = '"' + session.replace('"', '""') + '"'
            self._task_lines.append(
                f"{t.task_index},{session},{t.n_input_tokens},{t.n_output_tokens},"
                f"{t.start_s:.6f},{t.prefill_s:.6f},{t.decode_s:.6f},{t.latency_s:.6f},"
                f"{t.throughput_tps:.6f},{_fmt_bool(t.prefix_cache_hit)}\n"
            )
        names = np.asarray(PHASES)[fragments.phase].tolist() if len(fragments) else []
        self._frag_lines.extend(
            f"{ti},{ts:.6f},{ph},{u:.6f},{w:.6f},{kv}\n"
            for ti, ts, ph, u, w, kv in zip(
                fragments.task_index.tolist(), fragments.ts_s.tolist(), names,
                fragments.gpu_utilization.tolist(), fragments.power_w.tolist(),
                fragments.kv_cache_bytes.tolist(),
            )
        )
        self.summary.task_rows += len(tasks)
        self.summary.fragment_rows += len(fragments)
        self._pending += len(tasks)
        if self._pending >= self.flush_size:
            self.flush()

    def flush(self) -> None:
        if not self._pending and not self._frag_lines:
            return
        for fh, lines, path in (
            (self._tasks_fh, self._task_lines, self.summary.tasks_path),
            (self._frags_fh, self._frag_lines, self.summary.fragments_path),
        ):
            try:
                fh.writelines(lines)
                fh.flush()
            except OSError as exc:
                raise TraceWriteError(f"{path}: {exc.strerror or exc}") from exc
            lines.clear()
        self.summary.flushes.append(self._pending)
        self._pending = 0

    def close(self) -> WriteSummary:
        if self._tasks_fh.closed:
            return self.summary
        self.flush()
        self._tasks_fh.close()
        self._frags_fh.close()
        return self.summary


def write_results(
    tasks: Sequence[TaskResult],
    fragments: Union[Sequence[FragmentSample], FragmentColumns],
    out_dir: PathLike,
    flush_size: int = 10_000,
) -> WriteSummary:
    """Write results for already-simulated tasks, flushing every ``flush_size`` tasks.

    Fragments must be in simulation order; each one is flushed together
    with the task it belongs to.
    """
    cols = fragments if isinstance(fragments, FragmentColumns) else FragmentColumns.from_samples(fragments)
    with ResultWriter(out_dir, flush_size) as writer:
        lo = 0
        for start in range(0, len(tasks), flush_size):
            chunk = tasks[start:start + flush_size]
            last = chunk[-1].task_index
            hi = lo + int(np.searchsorted(cols.task_index[lo:], last, side="right"))
            writer.add(chunk, cols.slice(lo, hi))
            lo = hi
        if lo < len(cols):
            raise ValueError("fragments reference tasks not present in the task list")
    return writer.summary


def expected_flushes(n_tasks: int, flush_size: int) -> int:
    return math.ceil(n_tasks / flush_size)


def _opt_str(raw: str) -> Optional[str]:
    return raw if raw else None


def read_task_results(path: PathLike) -> list[TaskResult]:
    """Parse a ``tasks.csv`` written by :class:`ResultWriter`."""
    out = []
    with Path(path).open(newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            out.append(TaskResult(
                task_index=int(row["task_index"]),
                session_id=_opt_str(row["session_id"]),
                n_input_tokens=int(row["n_input_tokens"]),
                n_output_tokens=int(row["n_output_tokens"]),
                start_s=float(row["start_s"]),
                prefill_s=float(row["prefill_s"]),
                decode_s=float(row["decode_s"]),
                latency_s=float(row["latency_s"]),
                throughput_tps=float(row["throughput_tps"]),
                prefix_cache_hit=row["prefix_cache_hit"] == "true",
            ))
    return out


def read_fragments(path: PathLike) -> list[FragmentSample]:
    with Path(path).open(newline="", encoding="utf-8") as fh:
        return [
            FragmentSample(
                int(row["task_index"]), float(row["ts_s"]), row["phase"],
                float(row["gpu_utilization"]), float(row["power_w"]), int(row["kv_cache_bytes"]),
            )
            for row in csv.DictReader(fh)
        ]
