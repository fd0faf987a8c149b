"""Discretize event/telemetry streams into fixed-size windows and features.

A window covers ``[t0 + k*dt, t0 + (k+1)*dt)`` where ``t0`` is the first
telemetry timestamp. CPU utilization per window comes from the cumulative
jiffy counter, linearly interpolated at window boundaries, normalized by
core count and clamped into [0, 1]; resident memory is normalized by the
trace maximum. Events are bucketed by ``floor((ts - t0) / dt)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InsufficientTelemetryError
from .traces import HostInfo, SyscallEvent, TelemetrySample

# Telemetry feature count: cpu_util, rss_frac, scaled syscall rate.
TELEMETRY_FEATURES = 3

# Syscall rates span "none" to thousands per second; compress with log1p and
# normalize so ~10k calls/s maps to 1.0.
RATE_SCALE = float(np.log1p(10000.0))


@dataclass(frozen=True)
class Window:
    """One dt-interval of a trace: telemetry features plus syscall names."""

    index: int
    cpu_util: float
    rss_frac: float
    syscall_rate: float
    names: tuple[str, ...]


def discretize(
    events: list[SyscallEvent],
    telemetry: list[TelemetrySample],
    dt: float = 1.0,
    host: HostInfo | None = None,
) -> list[Window]:
    """Bucket sorted event/telemetry streams into contiguous windows.

    Only full windows inside the telemetry span are produced; the trailing
    partial window and events outside ``[t0, t0 + T*dt)`` are dropped.
    Windows with no events are kept with an empty name list.
    """
    if dt <= 0:
        raise ValueError(f"dt must be positive, got {dt}")
    if len(telemetry) < 2:
        raise InsufficientTelemetryError(
            f"need at least 2 telemetry samples, got {len(telemetry)}"
        )
    if host is None:
        host = HostInfo()

    t0 = telemetry[0].timestamp
    t_end = telemetry[-1].timestamp
    n_windows = int((t_end - t0) / dt)
    if n_windows <= 0:
        raise InsufficientTelemetryError(
            f"telemetry spans {t_end - t0:.3f}s, shorter than one {dt}s window"
        )

    telem_ts = np.array([s.timestamp for s in telemetry])
    telem_cpu = np.array([s.cpu_jiffies for s in telemetry])
    telem_rss = np.array([s.rss_bytes for s in telemetry])

    # Boundary times computed as t0 + k*dt (same expression the synthetic
    # generator uses), so interpolation hits sample points exactly.
    bounds = t0 + np.arange(n_windows + 1) * dt
    cpu_at_bounds = np.interp(bounds, telem_ts, telem_cpu)
    delta = np.diff(cpu_at_bounds)
    cpu_util = delta / host.ticks_per_second / (dt * host.core_count)
    cpu_util = np.clip(cpu_util, 0.0, 1.0)

    mids = t0 + (np.arange(n_windows) + 0.5) * dt
    rss_mid = np.interp(mids, telem_ts, telem_rss)
    rss_max = rss_mid.max() if n_windows else 0.0
    rss_frac = np.clip(rss_mid / rss_max, 0.0, 1.0) if rss_max > 0 else np.zeros(n_windows)

    names_per_window: list[list[str]] = [[] for _ in range(n_windows)]
    for ev in events:
        k = int((ev.timestamp - t0) // dt)
        if 0 <= k < n_windows:
            names_per_window[k].append(ev.name)

    return [
        Window(
            index=k,
            cpu_util=float(cpu_util[k]),
            rss_frac=float(rss_frac[k]),
            syscall_rate=len(names_per_window[k]) / dt,
            names=tuple(names_per_window[k]),
        )
        for k in range(n_windows)
    ]


def rate_feature(syscall_rate: float) -> float:
    """Compress a calls/second rate into [0, 1] (log scale, 10k/s -> 1)."""
    return min(1.0, float(np.log1p(syscall_rate)) / RATE_SCALE)


def build_features(windows: list[Window], table) -> np.ndarray:
    """Assemble the per-window model input matrix.

    Each row is ``[cpu_util, rss_frac, rate_feature]`` concatenated with the
    mean embedding of the window's syscall names (zero vector for an empty
    window). Shape: ``(len(windows), TELEMETRY_FEATURES + table.dim)``.
    """
    out = np.zeros((len(windows), TELEMETRY_FEATURES + table.dim))
    for row, w in zip(out, windows):
        row[0] = w.cpu_util
        row[1] = w.rss_frac
        row[2] = rate_feature(w.syscall_rate)
        row[TELEMETRY_FEATURES:] = table.embed_sentence(w.names)
    return out
