"""Live sampling of a process group on Unix-like hosts.

Everything downstream consumes only the canonical files, so this module is
the single platform-dependent piece of the toolkit. Enumerating a group
requires walking the whole process table (procfs has no group index), and
processes routinely vanish between listing and reading: such races are
skipped, never errors.
"""

from __future__ import annotations

import os
import shutil
import signal
import subprocess
import time
from dataclasses import dataclass, field
from pathlib import Path

from .errors import SpawnFailureError, TracerMissingError, UnsupportedPlatformError
from .traces import (
    HostInfo,
    ProcStat,
    TelemetrySample,
    aggregate_group,
    parse_proc_stat,
    parse_strace_stream,
    write_events,
    write_telemetry,
)

PROC_ROOT = Path("/proc")

STRACE_ARGS = ["-f", "-ttt"]


def _host_ticks() -> int:
    try:
        return int(os.sysconf("SC_CLK_TCK"))
    except (ValueError, OSError, AttributeError):
        return 100


def _host_page_size() -> int:
    try:
        return int(os.sysconf("SC_PAGE_SIZE"))
    except (ValueError, OSError, AttributeError):
        return 4096


@dataclass
class CollectorConfig:
    sample_interval: float = 1.0
    duration: float | None = None   # None = sample until the group exits
    ticks_per_second: int = field(default_factory=_host_ticks)
    page_size: int = field(default_factory=_host_page_size)
    core_count: int = field(default_factory=lambda: os.cpu_count() or 1)

    @property
    def host(self) -> HostInfo:
        return HostInfo(
            ticks_per_second=self.ticks_per_second,
            page_size=self.page_size,
            core_count=self.core_count,
        )


def _read_stat(pid_dir: Path) -> ProcStat | None:
    try:
        return parse_proc_stat((pid_dir / "stat").read_text())
    except (FileNotFoundError, ProcessLookupError, PermissionError, OSError):
        return None


def enumerate_group(pgid: int, proc_root: Path = PROC_ROOT) -> list[int]:
    """Pids whose stat pgrp equals ``pgid`` at scan time, ascending."""
    if not proc_root.is_dir():
        raise UnsupportedPlatformError(f"no process table at {proc_root}")
    pids = []
    for entry in proc_root.iterdir():
        if not entry.name.isdigit():
            continue
        stat = _read_stat(entry)
        if stat is not None and stat.pgrp == pgid:
            pids.append(stat.pid)
    return sorted(pids)


def sample_group(
    pgid: int, config: CollectorConfig | None = None, proc_root: Path = PROC_ROOT
) -> TelemetrySample:
    """One aggregate snapshot of the group, stamped with wall-clock time."""
    if config is None:
        config = CollectorConfig()
    timestamp = time.time()
    stats = []
    for pid in enumerate_group(pgid, proc_root):
        stat = _read_stat(proc_root / str(pid))
        if stat is not None and stat.pgrp == pgid:
            stats.append(stat)
    return aggregate_group(stats, timestamp, config.page_size, pgid=pgid)


def run_collection(
    command: list[str],
    config: CollectorConfig | None = None,
    out_dir=".",
) -> tuple[Path, Path]:
    """Trace a command under strace while sampling its process group.

    Writes ``events.raw`` (verbatim strace output), ``events.jsonl`` and
    ``telemetry.csv`` under ``out_dir`` and returns the two canonical paths.
    The tracer is placed in its own process group together with the traced
    command, so the group's accounting includes strace's (small) overhead.
    """
    if config is None:
        config = CollectorConfig()
    strace = shutil.which("strace")
    if strace is None:
        raise TracerMissingError("strace not found on PATH")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    raw_path = out / "events.raw"
    events_path = out / "events.jsonl"
    telemetry_path = out / "telemetry.csv"

    argv = [strace, *STRACE_ARGS, "-o", str(raw_path), "--", *command]
    proc = subprocess.Popen(
        argv,
        stdout=subprocess.DEVNULL,
        stderr=subprocess.PIPE,
        start_new_session=True,
    )
    pgid = proc.pid
    samples = []
    started = time.monotonic()
    next_tick = started
    try:
        while proc.poll() is None:
            if config.duration is not None:
                if time.monotonic() - started >= config.duration:
                    break
            samples.append(sample_group(pgid, config))
            next_tick += config.sample_interval
            delay = next_tick - time.monotonic()
            if delay > 0:
                time.sleep(delay)
    finally:
        if proc.poll() is None:
            try:
                os.killpg(pgid, signal.SIGTERM)
            except ProcessLookupError:
                pass
            try:
                proc.wait(timeout=10)
            except subprocess.TimeoutExpired:
                os.killpg(pgid, signal.SIGKILL)
                proc.wait()
    stderr = proc.stderr.read().decode(errors="replace") if proc.stderr else ""

    with open(raw_path, "r", encoding="utf-8", errors="replace") as fh:
        events, _malformed = parse_strace_stream(fh)
    if proc.returncode != 0 and not events:
        raise SpawnFailureError(
            f"tracer exited with {proc.returncode} and recorded no events: "
            f"{stderr.strip()}"
        )
    write_events(events, events_path)
    write_telemetry(samples, telemetry_path, host=config.host)
    return events_path, telemetry_path
