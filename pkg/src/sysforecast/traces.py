"""Parsing of strace output and procfs stat records into canonical streams.

Input dialect is ``strace -f -ttt`` (pid column, fractional epoch timestamps).
Canonical on-disk formats: events as JSONL with keys ``ts``/``pid``/``name``,
telemetry as CSV with header ``ts,pgid,cpu_jiffies,rss_bytes`` preceded by an
optional host-constant comment line ``# ticks=... page=... cores=...``.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import MalformedStatError, MixedGroupError

NAME_RE = re.compile(r"[a-z0-9_]+")

# `strace -f -ttt` line shapes. Entry lines cover both completed calls and
# calls suspended with `<unfinished ...>`; either way the syscall is counted
# once, at its start timestamp.
_ENTRY_RE = re.compile(r"^(\d+)\s+(\d+\.\d+)\s+([a-z0-9_]+)\(")
_NOISE_RE = re.compile(
    r"^\d+\s+\d+\.\d+\s+(?:<\.\.\. [a-z0-9_?]+ resumed>|---|\+\+\+)"
)
_ATTACH_RE = re.compile(r"^strace: Process \d+ (?:attached|detached)")


@dataclass(frozen=True)
class SyscallEvent:
    """One traced system call: start time, calling pid, syscall name."""

    timestamp: float
    pid: int
    name: str


@dataclass(frozen=True)
class ProcStat:
    """The fields of /proc/<pid>/stat that the toolkit consumes."""

    pid: int
    comm: str
    state: str
    ppid: int
    pgrp: int
    utime: int
    stime: int
    rss: int


@dataclass(frozen=True)
class TelemetrySample:
    """Aggregate resource snapshot of one process group at an instant."""

    timestamp: float
    pgid: int
    cpu_jiffies: float
    rss_bytes: float


@dataclass(frozen=True)
class HostInfo:
    """Host accounting constants captured alongside a telemetry stream."""

    ticks_per_second: int = 100
    page_size: int = 4096
    core_count: int = 1


class Noise:
    """A trace line that carries no event: resumed/signal/exit/attach lines."""

    __slots__ = ()

    def __repr__(self):
        return "Noise()"


@dataclass(frozen=True)
class Malformed:
    """A line that fits no known strace shape; kept as data, never an error."""

    text: str


NOISE = Noise()


def parse_strace_line(line: str) -> SyscallEvent | Noise | Malformed:
    """Classify one line of ``strace -f -ttt`` output.

    Returns a :class:`SyscallEvent` for syscall entry lines (including those
    ending in ``<unfinished ...>``), :data:`NOISE` for resumed continuations,
    signal deliveries, exit markers and tracer notices, and
    :class:`Malformed` for anything else.
    """
    stripped = line.rstrip("\n")
    m = _ENTRY_RE.match(stripped)
    if m:
        return SyscallEvent(
            timestamp=float(m.group(2)), pid=int(m.group(1)), name=m.group(3)
        )
    if _NOISE_RE.match(stripped) or _ATTACH_RE.match(stripped):
        return NOISE
    if not stripped.strip():
        return NOISE
    return Malformed(stripped)


def parse_strace_stream(source: Iterable[str]) -> tuple[list[SyscallEvent], int]:
    """Parse a line stream into timestamp-sorted events plus a malformed count.

    Never raises on bad input: unrecognized lines are counted, not fatal.
    The sort is stable, so same-timestamp events keep their file order
    (strace -f interleaves per-thread buffers slightly out of order).
    """
    events: list[SyscallEvent] = []
    malformed = 0
    for line in source:
        parsed = parse_strace_line(line)
        if isinstance(parsed, SyscallEvent):
            events.append(parsed)
        elif isinstance(parsed, Malformed):
            malformed += 1
    events.sort(key=lambda ev: ev.timestamp)
    return events, malformed


def parse_proc_stat(text: str) -> ProcStat:
    """Parse the content of one /proc/<pid>/stat file.

    comm (field 2) may itself contain spaces and parentheses, so it is
    delimited by the *last* ``)`` in the record; everything after it splits
    on single spaces. Field numbering follows proc(5): state 3, ppid 4,
    pgrp 5, utime 14, stime 15, rss 24.
    """
    text = text.strip()
    open_paren = text.find("(")
    close_paren = text.rfind(")")
    if open_paren == -1 or close_paren == -1 or close_paren < open_paren:
        raise MalformedStatError(f"no parenthesized comm in stat record: {text!r}")
    try:
        pid = int(text[:open_paren].strip())
    except ValueError as exc:
        raise MalformedStatError(f"bad pid field in stat record: {text!r}") from exc
    comm = text[open_paren + 1 : close_paren]
    rest = text[close_paren + 1 :].split()
    # rest[0] is field 3; field n lives at rest[n - 3]. rss is field 24.
    if len(rest) < 22:
        raise MalformedStatError(
            f"stat record has {len(rest) + 2} fields, expected at least 24"
        )
    try:
        return ProcStat(
            pid=pid,
            comm=comm,
            state=rest[0],
            ppid=int(rest[1]),
            pgrp=int(rest[2]),
            utime=int(rest[11]),
            stime=int(rest[12]),
            rss=int(rest[21]),
        )
    except ValueError as exc:
        raise MalformedStatError(f"non-numeric stat field: {text!r}") from exc


def aggregate_group(
    stats: Sequence[ProcStat],
    timestamp: float,
    page_size: int,
    pgid: int | None = None,
) -> TelemetrySample:
    """Sum per-process counters into one group sample.

    An empty ``stats`` list (the group died) yields a zero-valued sample;
    pass ``pgid`` explicitly to label it. Mixed pgrp values are an error.
    """
    if pgid is None:
        pgid = stats[0].pgrp if stats else 0
    cpu = 0
    rss_pages = 0
    for st in stats:
        if st.pgrp != pgid:
            raise MixedGroupError(
                f"stat records span process groups {pgid} and {st.pgrp}"
            )
        cpu += st.utime + st.stime
        rss_pages += st.rss
    return TelemetrySample(
        timestamp=timestamp,
        pgid=pgid,
        cpu_jiffies=float(cpu),
        rss_bytes=float(rss_pages * page_size),
    )


def _fmt_num(value: float) -> str:
    """Shortest exact decimal form: integers bare, floats via repr."""
    if float(value).is_integer() and abs(value) < 2**53:
        return str(int(value))
    return repr(float(value))


def write_events(events: Iterable[SyscallEvent], path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for ev in events:
            fh.write(
                json.dumps({"ts": ev.timestamp, "pid": ev.pid, "name": ev.name})
            )
            fh.write("\n")


def read_events(path) -> list[SyscallEvent]:
    events = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            obj = json.loads(line)
            events.append(
                SyscallEvent(
                    timestamp=float(obj["ts"]), pid=int(obj["pid"]), name=obj["name"]
                )
            )
    return events


def write_telemetry(
    samples: Iterable[TelemetrySample], path, host: HostInfo | None = None
) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        if host is not None:
            fh.write(
                f"# ticks={host.ticks_per_second} page={host.page_size} "
                f"cores={host.core_count}\n"
            )
        fh.write("ts,pgid,cpu_jiffies,rss_bytes\n")
        for s in samples:
            fh.write(
                f"{_fmt_num(s.timestamp)},{s.pgid},"
                f"{_fmt_num(s.cpu_jiffies)},{_fmt_num(s.rss_bytes)}\n"
            )


def read_telemetry(path) -> tuple[list[TelemetrySample], HostInfo | None]:
    """Read a telemetry CSV; returns samples plus the host header if present."""
    samples = []
    host = None
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                fields = dict(
                    kv.split("=", 1) for kv in line.lstrip("# ").split() if "=" in kv
                )
                if {"ticks", "page", "cores"} <= fields.keys():
                    host = HostInfo(
                        ticks_per_second=int(fields["ticks"]),
                        page_size=int(fields["page"]),
                        core_count=int(fields["cores"]),
                    )
                continue
            if line.startswith("ts,"):
                continue
            ts, pgid, cpu, rss = line.split(",")
            samples.append(
                TelemetrySample(
                    timestamp=float(ts),
                    pgid=int(pgid),
                    cpu_jiffies=float(cpu),
                    rss_bytes=float(rss),
                )
            )
    return samples, host
