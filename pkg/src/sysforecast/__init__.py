"""sysforecast: learn a model of a running application from telemetry and
system-call traces, and forecast its CPU utilization seconds ahead."""

from .embedding import (
    EmbeddingTable,
    SgnsConfig,
    SyscallEmbedder,
    Vocabulary,
    build_vocab,
    embed_window,
    load_embeddings,
    save_embeddings,
    sgns_loss_and_grads,
    train_skipgram,
)
from .errors import SysforecastError
from .evaluation import (
    EvalGrid,
    baseline_persistence,
    chrono_split,
    emit_outputs,
    grid_eval,
    make_samples,
    rmse,
)
from .lstm import (
    LstmForecaster,
    LstmParams,
    TrainConfig,
    backward,
    forward,
    load_model,
    predict,
    predict_batch,
    save_model,
    train,
)
from .synthetic import PhaseSpec, SynthConfig, SynthTrace, generate, generate_files
from .traces import (
    HostInfo,
    ProcStat,
    SyscallEvent,
    TelemetrySample,
    aggregate_group,
    parse_proc_stat,
    parse_strace_line,
    parse_strace_stream,
    read_events,
    read_telemetry,
    write_events,
    write_telemetry,
)
from .windows import Window, build_features, discretize

__version__ = "0.1.0"

__all__ = [
    "EmbeddingTable",
    "EvalGrid",
    "HostInfo",
    "LstmForecaster",
    "LstmParams",
    "PhaseSpec",
    "ProcStat",
    "SgnsConfig",
    "SynthConfig",
    "SynthTrace",
    "SyscallEmbedder",
    "SyscallEvent",
    "SysforecastError",
    "TelemetrySample",
    "TrainConfig",
    "Vocabulary",
    "Window",
    "aggregate_group",
    "backward",
    "baseline_persistence",
    "build_features",
    "build_vocab",
    "chrono_split",
    "discretize",
    "embed_window",
    "emit_outputs",
    "forward",
    "generate",
    "generate_files",
    "grid_eval",
    "load_embeddings",
    "load_model",
    "make_samples",
    "parse_proc_stat",
    "parse_strace_line",
    "parse_strace_stream",
    "predict",
    "predict_batch",
    "read_events",
    "read_telemetry",
    "rmse",
    "save_embeddings",
    "save_model",
    "sgns_loss_and_grads",
    "train",
    "train_skipgram",
    "write_events",
    "write_telemetry",
]
