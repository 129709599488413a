import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from llmsim.traces import (
    CarbonSample,
    FragmentColumns,
    FragmentSample,
    ResultWriter,
    TaskResult,
    TraceFormatError,
    TraceWriteError,
    WorkloadTask,
    expected_flushes,
    read_carbon,
    read_fragments,
    read_task_results,
    read_workload,
    write_results,
    write_workload,
)


def _write(path, text):
    path.write_text(text, encoding="utf-8")
    return path


def test_simple_row(tmp_path):
    f = _write(tmp_path / "w.csv", "n_input_tokens,n_output_tokens\n2162,5\n0,0\n")
    tasks = read_workload(f)
    assert [(t.n_input_tokens, t.n_output_tokens) for t in tasks] == [(2162, 5), (0, 0)]
    assert tasks[0].task_index == 0 and tasks[1].task_index == 1
    assert tasks[0].input_token_ids is None


def test_tokenized_rows(tmp_path):
    ids = " ".join(str(i) for i in range(158))
    out = " ".join(str(i) for i in range(528))
    header = "session_id,turn_id,ts,n_input_tokens,n_output_tokens,input_token_ids,output_token_ids\n"
    f = _write(tmp_path / "w.csv", header + f's1,0,12.5,158,528,"{ids}","{out}"\n')
    [t] = read_workload(f)
    assert t.session_id == "s1" and t.turn_id == 0 and t.arrival_ts_s == 12.5
    assert len(t.input_token_ids) == 158 and t.input_token_ids[-1] == 157

    short = " ".join(str(i) for i in range(157))
    bad = _write(tmp_path / "bad.csv", header + f's1,0,12.5,158,528,"{short}",\n')
    with pytest.raises(TraceFormatError, match="input_token_ids"):
        read_workload(bad)


def test_missing_column(tmp_path):
    f = _write(tmp_path / "w.csv", "n_input_tokens\n5\n")
    with pytest.raises(TraceFormatError, match="n_output_tokens"):
        read_workload(f)


def test_non_integer_count(tmp_path):
    f = _write(tmp_path / "w.csv", "n_input_tokens,n_output_tokens\n5,abc\n")
    with pytest.raises(TraceFormatError, match=":2"):
        read_workload(f)


def test_negative_count_rejected(tmp_path):
    f = _write(tmp_path / "w.csv", "n_input_tokens,n_output_tokens\n-5,1\n")
    with pytest.raises(TraceFormatError):
        read_workload(f)


token_lists = st.lists(st.integers(0, 50_000), max_size=20)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 5), token_lists, st.integers(0, 300)), max_size=15))
def test_workload_round_trip_preserves_order(tmp_path_factory, rows):
    tasks = [
        WorkloadTask(i, len(ids), n_out, session_id=f"s{sess}", turn_id=i, input_token_ids=tuple(ids))
        for i, (sess, ids, n_out) in enumerate(rows)
    ]
    path = tmp_path_factory.mktemp("wl") / "w.csv"
    write_workload(tasks, path)
    back = read_workload(path)
    assert len(back) == len(tasks)
    for a, b in zip(tasks, back):
        assert (a.session_id, a.n_input_tokens, a.n_output_tokens) == (b.session_id, b.n_input_tokens, b.n_output_tokens)
        assert (b.input_token_ids or ()) == a.input_token_ids


def test_carbon_two_rows(tmp_path):
    f = _write(tmp_path / "c.csv", "start_ts_s,intensity_g_per_kwh\n0,400\n900,300\n")
    s = read_carbon(f)
    assert s == [CarbonSample(0.0, 400.0), CarbonSample(900.0, 300.0)]
    assert s[1].start_ts_s - s[0].start_ts_s == 900


def test_carbon_single_zero(tmp_path):
    f = _write(tmp_path / "c.csv", "start_ts_s,intensity_g_per_kwh\n0,0\n")
    assert read_carbon(f) == [CarbonSample(0.0, 0.0)]


@pytest.mark.parametrize("body, match", [
    ("900,300\n0,400\n", "non-monotonic"),
    ("0,300\n0,400\n", "non-monotonic"),
    ("0,-1\n", "negative"),
    ("", "empty"),
])
def test_carbon_errors(tmp_path, body, match):
    f = _write(tmp_path / "c.csv", "start_ts_s,intensity_g_per_kwh\n" + body)
    with pytest.raises(TraceFormatError, match=match):
        read_carbon(f)


def _results(n):
    return [TaskResult.build(i, f"s{i % 3}", 10 + i, 5, i * 1.5, 0.5, 1.0) for i in range(n)]


def _fragments(results, per_task=3):
    return [
        FragmentSample(r.task_index, r.start_s + k * 0.5, "decode", 0.95, 143.5, 1024 * k)
        for r in results for k in range(per_task)
    ]


@pytest.mark.parametrize("n, flush, sizes", [
    (25, 10, [10, 10, 5]),
    (0, 10, []),
    (10, 10, [10]),
])
def test_flush_schedule(tmp_path, n, flush, sizes):
    res = _results(n)
    summary = write_results(res, _fragments(res), tmp_path, flush_size=flush)
    assert summary.flushes == sizes
    assert len(summary.flushes) == expected_flushes(n, flush)
    assert summary.task_rows == n and summary.fragment_rows == 3 * n


def test_empty_run_writes_headers_only(tmp_path):
    write_results([], [], tmp_path)
    assert (tmp_path / "tasks.csv").read_text().count("\n") == 1
    assert (tmp_path / "fragments.csv").read_text().startswith("task_index,ts_s,phase")


def test_default_flush_on_large_run():
    assert expected_flushes(96_869, 10_000) == 10


def test_flush_writes_to_disk_before_close(tmp_path):
    res = _results(5)
    with ResultWriter(tmp_path, flush_size=2) as w:
        w.add(res[:2], FragmentColumns.from_samples(_fragments(res[:2])))
        assert (tmp_path / "tasks.csv").read_text().count("\n") == 3
        w.add(res[2:3], FragmentColumns.empty())
        assert (tmp_path / "tasks.csv").read_text().count("\n") == 3
    assert (tmp_path / "tasks.csv").read_text().count("\n") == 4


def test_round_trip(tmp_path):
    res = _results(12)
    frags = _fragments(res)
    write_results(res, frags, tmp_path, flush_size=5)
    back = read_task_results(tmp_path / "tasks.csv")
    assert len(back) == len(res)
    for a, b in zip(res, back):
        assert (a.task_index, a.session_id, a.n_input_tokens, a.n_output_tokens, a.prefix_cache_hit) == (
            b.task_index, b.session_id, b.n_input_tokens, b.n_output_tokens, b.prefix_cache_hit)
        for f in ("start_s", "prefill_s", "decode_s", "latency_s", "throughput_tps"):
            assert getattr(b, f) == pytest.approx(getattr(a, f), abs=5e-7)
    assert read_fragments(tmp_path / "fragments.csv") == frags


def test_session_with_comma_is_quoted(tmp_path):
    res = [TaskResult.build(0, "a,b", 1, 1, 0.0, 0.1, 0.1)]
    write_results(res, [], tmp_path)
    assert read_task_results(tmp_path / "tasks.csv")[0].session_id == "a,b"


def test_write_error_names_path(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    with pytest.raises(TraceWriteError, match="file"):
        ResultWriter(blocker / "sub")


def test_task_result_invariants():
    r = TaskResult.build(0, None, 100, 50, 0.0, 0.25, 1.75)
    assert r.latency_s == r.prefill_s + r.decode_s
    assert r.throughput_tps == 150 / 2.0
    assert TaskResult.build(0, None, 0, 0, 0.0, 0.0, 0.0).throughput_tps == 0.0


def test_fragment_columns_round_trip():
    frags = [FragmentSample(0, 0.0, "warmup", 0.5, 85.0, 0), FragmentSample(0, 0.1, "cooldown", 0.5, 85.0, 7)]
    cols = FragmentColumns.from_samples(frags)
    assert cols.to_samples() == frags
    assert np.array_equal(cols.phase, [0, 3])
