"""Command-line entry point wiring the full pipeline.

Subcommands: collect, synth, embed, train, eval, and pipeline (which runs
synth -> embed -> train -> eval in one deterministic pass). Settings come
from built-in defaults, overridden by a ``key = value`` config file,
overridden by flags. Exit codes: 0 success, 1 usage error, 2 data or
validation error.

All randomness flows from the single ``--seed``; the pipeline derives one
seed per stage (seed + stage index) so stages stay independently
reproducible.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import asdict, dataclass, fields
from pathlib import Path

from . import evaluation, lstm, synthetic
from .collector import CollectorConfig, run_collection
from .embedding import SgnsConfig, load_embeddings, save_embeddings, train_skipgram
from .errors import SysforecastError
from .traces import HostInfo, read_events, read_telemetry
from .windows import build_features, discretize


class UsageError(Exception):
    pass


@dataclass
class Settings:
    # windowing
    dt: float = 1.0
    # embedding
    dim: int = 16
    context_radius: int = 5
    negatives: int = 5
    embed_epochs: int = 5
    embed_learning_rate: float = 0.025
    min_count: int = 2
    max_corpus_sentences: int = 96
    # predictor
    hidden: int = 32
    history: int = 10
    horizon: int = 1
    epochs: int = 50
    learning_rate: float = 1e-3
    batch_size: int = 32
    # synthetic workload
    n_windows: int = 2000
    # evaluation
    train_fraction: float = 0.8
    horizons: tuple[int, ...] = (1, 2, 3, 5)
    histories: tuple[int, ...] = (1, 5, 20)
    # run
    seed: int = 0
    out: str = "run"
    # explicit file locations; default to <out>/<canonical name>
    events: str | None = None
    telemetry: str | None = None
    embeddings: str | None = None
    model: str | None = None

    def _path(self, override: str | None, name: str) -> Path:
        return Path(override) if override else Path(self.out) / name

    @property
    def events_path(self) -> Path:
        return self._path(self.events, "events.jsonl")

    @property
    def telemetry_path(self) -> Path:
        return self._path(self.telemetry, "telemetry.csv")

    @property
    def embeddings_path(self) -> Path:
        return self._path(self.embeddings, "embeddings.json")

    @property
    def model_path(self) -> Path:
        return self._path(self.model, "model.json")


def _int_list(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(part) for part in text.split(",") if part.strip())
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated ints: {text!r}") from exc


_CONVERTERS = {
    "dt": float,
    "dim": int,
    "context_radius": int,
    "negatives": int,
    "embed_epochs": int,
    "embed_learning_rate": float,
    "min_count": int,
    "max_corpus_sentences": int,
    "hidden": int,
    "history": int,
    "horizon": int,
    "epochs": int,
    "learning_rate": float,
    "batch_size": int,
    "n_windows": int,
    "train_fraction": float,
    "horizons": _int_list,
    "histories": _int_list,
    "seed": int,
    "out": str,
    "events": str,
    "telemetry": str,
    "embeddings": str,
    "model": str,
}


def load_config_file(path) -> dict:
    """Parse ``key = value`` lines; '#' starts a comment; unknown keys fail."""
    values = {}
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read config file {path}: {exc}") from exc
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if key not in _CONVERTERS:
            raise UsageError(f"{path}:{lineno}: unknown config key {key!r}")
        try:
            values[key] = _CONVERTERS[key](value)
        except (ValueError, argparse.ArgumentTypeError) as exc:
            raise UsageError(f"{path}:{lineno}: bad value for {key}: {exc}") from exc
    return values


def resolve_settings(args: argparse.Namespace) -> Settings:
    values = asdict(Settings())
    config_path = getattr(args, "config", None)
    if config_path:
        values.update(load_config_file(config_path))
    for f in fields(Settings):
        flag_value = getattr(args, f.name, None)
        if flag_value is not None:
            values[f.name] = flag_value
    return Settings(**values)


def load_windows(settings: Settings):
    events = read_events(settings.events_path)
    telemetry, host = read_telemetry(settings.telemetry_path)
    return discretize(events, telemetry, settings.dt, host or HostInfo())


def _train_segment_sentences(settings: Settings, windows) -> list:
    """Embedding corpus: train-segment window sentences, capped evenly.

    Capping keeps skip-gram training time flat regardless of trace length;
    evenly spaced picks retain sentences from both workload phases.
    """
    n_train = int(len(windows) * settings.train_fraction)
    sentences = [list(w.names) for w in windows[:n_train]]
    cap = settings.max_corpus_sentences
    if cap and len(sentences) > cap:
        sentences = [sentences[(i * len(sentences)) // cap] for i in range(cap)]
    return sentences


def stage_synth(settings: Settings, seed: int) -> synthetic.SynthTrace:
    config = synthetic.SynthConfig(
        n_windows=settings.n_windows, dt=settings.dt, seed=seed
    )
    trace = synthetic.generate_files(
        config, settings.events_path, settings.telemetry_path
    )
    print(
        f"synth: wrote {settings.events_path} ({len(trace.events)} events) "
        f"and {settings.telemetry_path} ({len(trace.telemetry)} samples)"
    )
    return trace


def stage_embed(settings: Settings, seed: int):
    windows = load_windows(settings)
    corpus = _train_segment_sentences(settings, windows)
    config = SgnsConfig(
        dim=settings.dim,
        context_radius=settings.context_radius,
        negatives=settings.negatives,
        epochs=settings.embed_epochs,
        learning_rate=settings.embed_learning_rate,
        min_count=settings.min_count,
        seed=seed,
    )
    table, losses = train_skipgram(corpus, config)
    save_embeddings(table, settings.embeddings_path)
    last = f"{losses[-1]:.4f}" if losses else "n/a"
    print(
        f"embed: vocabulary {len(table.vocab)} names, dim {table.dim}, "
        f"final epoch loss {last} -> {settings.embeddings_path}"
    )
    return table


def _train_config(settings: Settings, seed: int) -> lstm.TrainConfig:
    return lstm.TrainConfig(
        hidden=settings.hidden,
        history=settings.history,
        horizon=settings.horizon,
        epochs=settings.epochs,
        learning_rate=settings.learning_rate,
        batch_size=settings.batch_size,
        seed=seed,
    )


def stage_train(settings: Settings, seed: int) -> dict:
    windows = load_windows(settings)
    table = load_embeddings(settings.embeddings_path)
    features = build_features(windows, table)
    cpu = [w.cpu_util for w in windows]
    (x_tr, y_tr), (x_te, y_te) = evaluation.split_samples(
        features, cpu, settings.history, settings.horizon, settings.train_fraction
    )
    config = _train_config(settings, seed)
    params, loss_history = lstm.train(x_tr, y_tr, config)
    lstm.save_model(params, config, settings.model_path)
    test_rmse = evaluation.rmse(lstm.predict_batch(params, x_te), y_te)
    baseline = evaluation.baseline_persistence(
        cpu, settings.history, settings.horizon, settings.train_fraction
    )
    print(
        f"train: history={settings.history} horizon={settings.horizon} "
        f"train_mse[0]={loss_history[0]:.5f} train_mse[-1]={loss_history[-1]:.5f} "
        f"test_rmse={test_rmse:.4f} persistence_rmse={baseline:.4f} "
        f"-> {settings.model_path}"
    )
    return {"test_rmse": test_rmse, "baseline_rmse": baseline}


def stage_eval(settings: Settings, seed: int) -> evaluation.EvalGrid:
    windows = load_windows(settings)
    table = load_embeddings(settings.embeddings_path)
    grid = evaluation.grid_eval(
        windows,
        table,
        horizons=settings.horizons,
        histories=settings.histories,
        train_config=_train_config(settings, seed),
        train_fraction=settings.train_fraction,
    )
    csv_path, svg_path = evaluation.emit_outputs(grid, settings.out)
    print(f"eval: wrote {csv_path} and {svg_path}")
    for row, history in enumerate(grid.histories):
        cells = "  ".join(
            f"i={horizon}:{grid.rmse[row, col]:.4f}"
            for col, horizon in enumerate(grid.horizons)
        )
        print(f"eval: history={history:>3} {cells}")
    return grid


def run_pipeline(settings: Settings) -> None:
    """synth -> embed -> train -> eval with per-stage derived seeds."""
    stage_synth(settings, settings.seed + 0)
    stage_embed(settings, settings.seed + 1)
    stage_train(settings, settings.seed + 2)
    stage_eval(settings, settings.seed + 3)


def stage_collect(settings: Settings, args: argparse.Namespace) -> None:
    command = list(args.command_argv)
    if command and command[0] == "--":
        command = command[1:]
    if not command:
        raise UsageError("collect: no command given (use: collect [opts] -- cmd ...)")
    config = CollectorConfig(
        sample_interval=args.interval, duration=args.duration
    )
    events_path, telemetry_path = run_collection(command, config, settings.out)
    print(f"collect: wrote {events_path} and {telemetry_path}")


class _Parser(argparse.ArgumentParser):
    """argparse variant that signals usage problems instead of exiting 2."""

    def error(self, message):
        raise UsageError(message)


def build_parser() -> _Parser:
    shared = _Parser(add_help=False)
    shared.add_argument("--config", metavar="FILE", help="key = value settings file")
    shared.add_argument("--out", help="output directory (default: run)")
    shared.add_argument("--seed", type=int, help="master random seed")
    shared.add_argument("--dt", type=float, help="window length in seconds")
    shared.add_argument("--dim", type=int, help="embedding dimension")
    shared.add_argument("--hidden", type=int, help="LSTM hidden size")
    shared.add_argument("--history", type=int, help="input windows per sample")
    shared.add_argument("--horizon", type=int, help="windows ahead to predict")
    shared.add_argument("--epochs", type=int, help="predictor training epochs")
    shared.add_argument("--n-windows", type=int, dest="n_windows")
    shared.add_argument("--train-fraction", type=float, dest="train_fraction")
    shared.add_argument("--horizons", type=_int_list, help="comma-separated")
    shared.add_argument("--histories", type=_int_list, help="comma-separated")
    shared.add_argument("--events", help="events JSONL path")
    shared.add_argument("--telemetry", help="telemetry CSV path")
    shared.add_argument("--embeddings", help="embedding table path")
    shared.add_argument("--model", help="model file path")

    parser = _Parser(
        prog="sysforecast",
        description="Model a process group's behavior and forecast its CPU usage.",
    )
    sub = parser.add_subparsers(dest="cmd", required=True, metavar="subcommand")
    sub.add_parser("synth", parents=[shared], help="generate a synthetic trace")
    sub.add_parser("embed", parents=[shared], help="learn syscall embeddings")
    sub.add_parser("train", parents=[shared], help="train the CPU forecaster")
    sub.add_parser("eval", parents=[shared], help="sweep history x horizon RMSE grid")
    sub.add_parser(
        "pipeline", parents=[shared], help="synth -> embed -> train -> eval"
    )
    collect = sub.add_parser(
        "collect", parents=[shared], help="trace a live command (Unix only)"
    )
    collect.add_argument("--interval", type=float, default=1.0)
    collect.add_argument("--duration", type=float, default=None)
    collect.add_argument(
        "command_argv", nargs=argparse.REMAINDER, metavar="-- command ..."
    )
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        settings = resolve_settings(args)
        Path(settings.out).mkdir(parents=True, exist_ok=True)
        if args.cmd == "synth":
            stage_synth(settings, settings.seed)
        elif args.cmd == "embed":
            stage_embed(settings, settings.seed)
        elif args.cmd == "train":
            stage_train(settings, settings.seed)
        elif args.cmd == "eval":
            stage_eval(settings, settings.seed)
        elif args.cmd == "pipeline":
            run_pipeline(settings)
        elif args.cmd == "collect":
            stage_collect(settings, args)
    except UsageError as exc:
        print(f"sysforecast: {exc}", file=sys.stderr)
        return 1
    except SysforecastError as exc:
        print(f"sysforecast: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"sysforecast: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
