"""Deterministic synthetic traces: interleaved I/O-heavy and CPU-heavy phases.

The workload mimics a scripted toolchain that alternates between an
I/O-bound stage (many read/write/poll/ioctl calls, low CPU) and a
compute-bound stage (few syscalls, high CPU). Stages run to completion,
so phase durations carry memory: the CPU-heavy stage always lasts the
same number of windows and the I/O stage length only jitters slightly.
Mean phase duration stays at ``1 / switch_probability`` windows, i.e. the
marginal per-window switch probability equals the configured value.

Per window, the event count is Poisson(rate * dt) with names uniform over
the phase's name set and timestamps uniform inside the window; CPU
utilization is Normal(mean, std) clamped to [0, 1] and re-emitted as a
cumulative jiffy counter (ticks=100, cores=1) sampled at window
boundaries. Everything is a pure function of the seed.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .traces import (
    HostInfo,
    SyscallEvent,
    TelemetrySample,
    write_events,
    write_telemetry,
)

SYNTH_PID = 1000
SYNTH_T0 = 1_700_000_000.0
SYNTH_HOST = HostInfo(ticks_per_second=100, page_size=4096, core_count=1)
SYNTH_RSS_BYTES = 64 * 2**20

IO_PHASE, CPU_PHASE = 0, 1


@dataclass(frozen=True)
class PhaseSpec:
    names: tuple[str, ...]
    syscall_rate: float   # expected calls per second
    cpu_mean: float
    cpu_std: float


@dataclass(frozen=True)
class SynthConfig:
    n_windows: int = 2000
    dt: float = 1.0
    switch_probability: float = 0.05
    io_phase: PhaseSpec = field(
        default=PhaseSpec(("read", "write", "poll", "ioctl"), 200.0, 0.10, 0.02)
    )
    cpu_phase: PhaseSpec = field(
        default=PhaseSpec(("brk", "mmap", "futex"), 2.0, 0.90, 0.02)
    )
    seed: int = 0


@dataclass
class SynthTrace:
    """Generated streams plus the per-window ground truth used by tests."""

    events: list[SyscallEvent]
    telemetry: list[TelemetrySample]
    cpu_util: np.ndarray          # per window, after clamping
    phases: np.ndarray            # per window, IO_PHASE or CPU_PHASE
    window_names: list[tuple[str, ...]]


def _durations(config: SynthConfig) -> tuple[int, int, int]:
    """(cpu stage length, io stage mean length, io jitter) in windows.

    Chosen so the mean phase duration is 1/switch_probability: the CPU
    stage takes a fixed ~40% of that mean, the I/O stage the rest +-2.
    """
    mean = 1.0 / config.switch_probability
    cpu_len = max(1, round(0.4 * mean))
    io_len = max(1, round(2.0 * mean) - cpu_len)
    jitter = min(2, max(0, io_len - 1))
    return cpu_len, io_len, jitter


def generate(config: SynthConfig | None = None) -> SynthTrace:
    if config is None:
        config = SynthConfig()
    rng = np.random.default_rng(config.seed)
    cpu_len, io_len, jitter = _durations(config)

    def draw_duration(phase: int) -> int:
        if phase == CPU_PHASE:
            return cpu_len
        return int(rng.integers(io_len - jitter, io_len + jitter + 1))

    phase = int(rng.integers(0, 2))
    duration = draw_duration(phase)
    age = int(rng.integers(0, duration))

    dt = config.dt
    events: list[SyscallEvent] = []
    window_names: list[tuple[str, ...]] = []
    cpu_util = np.empty(config.n_windows)
    phases = np.empty(config.n_windows, dtype=np.int64)
    for k in range(config.n_windows):
        if age >= duration:
            phase = 1 - phase
            duration = draw_duration(phase)
            age = 0
        spec = config.io_phase if phase == IO_PHASE else config.cpu_phase
        phases[k] = phase
        cpu_util[k] = min(1.0, max(0.0, rng.normal(spec.cpu_mean, spec.cpu_std)))
        count = int(rng.poisson(spec.syscall_rate * dt))
        name_ids = rng.integers(0, len(spec.names), count)
        offsets = np.sort(rng.random(count))
        names = tuple(spec.names[i] for i in name_ids)
        for off, name in zip(offsets, names):
            events.append(
                SyscallEvent(
                    timestamp=SYNTH_T0 + (k + off) * dt, pid=SYNTH_PID, name=name
                )
            )
        window_names.append(names)
        age += 1

    host = SYNTH_HOST
    increments = cpu_util * host.ticks_per_second * host.core_count * dt
    cumulative = np.concatenate([[0.0], np.cumsum(increments)])
    telemetry = [
        TelemetrySample(
            timestamp=SYNTH_T0 + k * dt,
            pgid=SYNTH_PID,
            cpu_jiffies=float(cumulative[k]),
            rss_bytes=float(SYNTH_RSS_BYTES),
        )
        for k in range(config.n_windows + 1)
    ]
    return SynthTrace(
        events=events,
        telemetry=telemetry,
        cpu_util=cpu_util,
        phases=phases,
        window_names=window_names,
    )


def generate_files(
    config: SynthConfig | None, events_path, telemetry_path
) -> SynthTrace:
    """Generate and persist in the canonical formats; returns the trace."""
    trace = generate(config)
    Path(events_path).parent.mkdir(parents=True, exist_ok=True)
    Path(telemetry_path).parent.mkdir(parents=True, exist_ok=True)
    write_events(trace.events, events_path)
    write_telemetry(trace.telemetry, telemetry_path, host=SYNTH_HOST)
    return trace
