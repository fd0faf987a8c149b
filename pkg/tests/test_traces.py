import math
from pathlib import Path

import pytest

from sysforecast.errors import MalformedStatError, MixedGroupError
from sysforecast.traces import (
    Malformed,
    NAME_RE,
    Noise,
    ProcStat,
    SyscallEvent,
    TelemetrySample,
    HostInfo,
    aggregate_group,
    parse_proc_stat,
    parse_strace_line,
    parse_strace_stream,
    read_events,
    read_telemetry,
    write_events,
    write_telemetry,
)

FIXTURES = Path(__file__).parent / "fixtures"

# Construction-time goldens for fixtures/strace_ttt.log: 220 lines total,
# 207 syscall entries (including 6 <unfinished ...>), 6 resumed lines,
# 2 signal lines, 3 exit lines, 2 tracer attach notices.
GOLDEN_LINES = 220
GOLDEN_EVENTS = 207


class TestParseStraceLine:
    def test_plain_entry(self):
        line = '1234  1618389913.123456 read(3, "x", 4096) = 4096'
        parsed = parse_strace_line(line)
        assert parsed == SyscallEvent(1618389913.123456, 1234, "read")

    def test_unfinished_counts_at_start_time(self):
        line = "1234  1618389913.200001 epoll_wait(4, <unfinished ...>"
        parsed = parse_strace_line(line)
        assert parsed == SyscallEvent(1618389913.200001, 1234, "epoll_wait")

    def test_exit_line_is_noise(self):
        assert isinstance(
            parse_strace_line("1234  1618389913.430000 +++ exited with 0 +++"), Noise
        )

    def test_resumed_is_noise(self):
        line = '1234  1618389913.300000 <... epoll_wait resumed>[], 64, -1) = 1'
        assert isinstance(parse_strace_line(line), Noise)

    def test_signal_is_noise(self):
        line = (
            "1234  1618389913.400000 --- SIGCHLD {si_signo=SIGCHLD, "
            "si_code=CLD_EXITED, si_pid=9, si_uid=0, si_status=0} ---"
        )
        assert isinstance(parse_strace_line(line), Noise)

    def test_attach_notice_is_noise(self):
        assert isinstance(parse_strace_line("strace: Process 3318 attached"), Noise)

    def test_garbage_is_malformed(self):
        parsed = parse_strace_line("not a trace line at all")
        assert isinstance(parsed, Malformed)
        assert parsed.text == "not a trace line at all"

    def test_missing_timestamp_is_malformed(self):
        assert isinstance(parse_strace_line("1234 read(3) = 0"), Malformed)


class TestParseStraceStream:
    def test_sorts_by_timestamp(self):
        lines = [
            "10    100.002000 write(1, \"a\", 1) = 1",
            "11    100.001000 read(3, \"b\", 1) = 1",
            "10    100.003000 close(3) = 0",
        ]
        events, malformed = parse_strace_stream(lines)
        assert malformed == 0
        assert [e.name for e in events] == ["read", "write", "close"]

    def test_stable_for_equal_timestamps(self):
        lines = [
            "10    100.001000 write(1, \"a\", 1) = 1",
            "11    100.001000 read(3, \"b\", 1) = 1",
        ]
        events, _ = parse_strace_stream(lines)
        assert [e.pid for e in events] == [10, 11]

    def test_resumed_is_not_malformed(self):
        lines = [
            "10    100.001000 <... poll resumed>[]) = 0",
            "10    100.002000 write(1, \"a\", 1) = 1",
        ]
        events, malformed = parse_strace_stream(lines)
        assert len(events) == 1
        assert malformed == 0

    def test_empty_stream(self):
        assert parse_strace_stream([]) == ([], 0)

    def test_malformed_counted_not_fatal(self):
        events, malformed = parse_strace_stream(["??", "!!", "10    1.5 getpid() = 10"])
        assert len(events) == 1
        assert malformed == 2

    def test_fixture_golden_counts(self):
        with open(FIXTURES / "strace_ttt.log") as fh:
            lines = fh.readlines()
        assert len(lines) == GOLDEN_LINES
        events, malformed = parse_strace_stream(lines)
        assert malformed == 0
        assert len(events) == GOLDEN_EVENTS

    def test_fixture_names_are_valid_tokens(self):
        with open(FIXTURES / "strace_ttt.log") as fh:
            events, _ = parse_strace_stream(fh)
        assert all(NAME_RE.fullmatch(e.name) for e in events)
        ts = [e.timestamp for e in events]
        assert ts == sorted(ts)

    def test_fixture_round_trips_through_jsonl(self, tmp_path):
        with open(FIXTURES / "strace_ttt.log") as fh:
            events, _ = parse_strace_stream(fh)
        path = tmp_path / "events.jsonl"
        write_events(events, path)
        assert read_events(path) == events

    def test_inserted_noise_lines_change_nothing(self):
        with open(FIXTURES / "strace_ttt.log") as fh:
            lines = fh.readlines()
        noisy = list(lines)
        for position, extra in (
            (5, "9999  1618389910.005000 --- SIGWINCH {si_signo=SIGWINCH} ---\n"),
            (50, "9999  1618389910.900000 <... nanosleep resumed>NULL) = 0\n"),
            (120, "9999  1618389912.000000 +++ exited with 7 +++\n"),
            (0, "strace: Process 9999 attached\n"),
        ):
            noisy.insert(position, extra)
        assert parse_strace_stream(noisy) == parse_strace_stream(lines)


class TestParseProcStat:
    def test_worker_fixture(self):
        stat = parse_proc_stat((FIXTURES / "stat_worker.txt").read_text())
        assert stat == ProcStat(
            pid=42, comm="worker", state="S", ppid=1, pgrp=42,
            utime=50, stime=30, rss=1000,
        )

    def test_parenthesized_comm_fixture(self):
        stat = parse_proc_stat((FIXTURES / "stat_tmux.txt").read_text())
        assert stat.comm == "tmux: server (v3)"
        assert stat == ProcStat(
            pid=777, comm="tmux: server (v3)", state="S", ppid=1, pgrp=777,
            utime=1284, stime=346, rss=2150,
        )

    def test_too_few_fields(self):
        with pytest.raises(MalformedStatError):
            parse_proc_stat("42 (worker) S 1 42 0 -1 4194304 1523 0")

    def test_no_comm(self):
        with pytest.raises(MalformedStatError):
            parse_proc_stat("42 worker S 1 42")

    def test_own_stat_parses(self):
        # live host check; /proc is present on the CI hosts this targets
        proc = Path("/proc/self/stat")
        if not proc.exists():
            pytest.skip("no procfs")
        stat = parse_proc_stat(proc.read_text())
        assert stat.pgrp > 0
        assert stat.utime >= 0 and stat.stime >= 0 and stat.rss >= 0


class TestAggregateGroup:
    def test_sums_members(self):
        stats = [
            ProcStat(1, "a", "S", 0, 42, utime=50, stime=30, rss=100),
            ProcStat(2, "b", "R", 1, 42, utime=20, stime=0, rss=50),
        ]
        sample = aggregate_group(stats, 12.5, page_size=4096)
        assert sample == TelemetrySample(12.5, 42, 100.0, 614400.0)

    def test_empty_group(self):
        sample = aggregate_group([], 1.0, page_size=4096, pgid=7)
        assert sample.cpu_jiffies == 0.0
        assert sample.rss_bytes == 0.0
        assert sample.pgid == 7

    def test_mixed_group_rejected(self):
        stats = [
            ProcStat(1, "a", "S", 0, 42, 1, 1, 1),
            ProcStat(2, "b", "S", 0, 43, 1, 1, 1),
        ]
        with pytest.raises(MixedGroupError):
            aggregate_group(stats, 0.0, 4096)

    def test_permutation_invariant(self):
        import itertools

        stats = [
            ProcStat(i, "p", "S", 0, 9, utime=i * 3, stime=i, rss=i * 7)
            for i in range(1, 5)
        ]
        results = {
            aggregate_group(list(perm), 0.0, 4096)
            for perm in itertools.permutations(stats)
        }
        assert len(results) == 1


class TestTelemetryIO:
    def test_round_trip_with_host_header(self, tmp_path):
        samples = [
            TelemetrySample(100.0, 9, 0.0, 4096.0),
            TelemetrySample(101.0, 9, 12.340000000000002, 8192.0),
            TelemetrySample(102.5, 9, 25.5, 8192.0),
        ]
        host = HostInfo(ticks_per_second=100, page_size=4096, core_count=2)
        path = tmp_path / "telemetry.csv"
        write_telemetry(samples, path, host=host)
        text = path.read_text()
        assert text.startswith("# ticks=100 page=4096 cores=2\n")
        assert text.splitlines()[1] == "ts,pgid,cpu_jiffies,rss_bytes"
        got_samples, got_host = read_telemetry(path)
        assert got_samples == samples
        assert got_host == host

    def test_headerless_file(self, tmp_path):
        path = tmp_path / "telemetry.csv"
        path.write_text("ts,pgid,cpu_jiffies,rss_bytes\n1.5,2,3,4\n")
        samples, host = read_telemetry(path)
        assert host is None
        assert samples == [TelemetrySample(1.5, 2, 3.0, 4.0)]

    def test_float_timestamps_survive_exactly(self, tmp_path):
        ts = 1618389913.123456
        assert not math.isnan(ts)
        events = [SyscallEvent(ts, 1, "read"), SyscallEvent(ts + 1e-6, 1, "write")]
        path = tmp_path / "events.jsonl"
        write_events(events, path)
        assert read_events(path) == events
