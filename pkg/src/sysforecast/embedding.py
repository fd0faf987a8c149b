"""Syscall embeddings learned with skip-gram + negative sampling.

Each window's syscall name list is one training sentence; context never
crosses a window boundary. The learned input vectors are the exported
embeddings; a window is represented downstream by the mean of its name
vectors. Persisted format: JSON ``{"dim": d, "names": [...], "vectors":
[[...], ...]}``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .errors import EmptyCorpusError

UNK_TOKEN = "<unk>"


def log_sigmoid(x):
    """ln(sigmoid(x)), stable for large |x|."""
    return -np.logaddexp(0.0, -x)


def sigmoid(x):
    return 1.0 / (1.0 + np.exp(-np.clip(x, -60.0, 60.0)))


@dataclass
class SgnsConfig:
    dim: int = 16
    context_radius: int = 5
    negatives: int = 5
    epochs: int = 5
    learning_rate: float = 0.025
    min_learning_rate: float = 1e-4
    min_count: int = 2
    seed: int = 0


@dataclass
class Vocabulary:
    """Name <-> index mapping with corpus frequencies; UNK sits at index 0."""

    id_of: dict[str, int]
    names: list[str]
    counts: np.ndarray

    def __len__(self):
        return len(self.names)

    def lookup(self, name: str) -> int:
        return self.id_of.get(name, 0)


@dataclass
class EmbeddingTable:
    """Input/output vector matrices over a vocabulary.

    ``input_vectors`` rows are the exported embeddings; ``output_vectors``
    is the context side used only during training (None after loading from
    disk).
    """

    vocab: Vocabulary
    input_vectors: np.ndarray
    output_vectors: np.ndarray | None = field(default=None, repr=False)

    @property
    def dim(self) -> int:
        return self.input_vectors.shape[1]

    def vector(self, name: str) -> np.ndarray:
        return self.input_vectors[self.vocab.lookup(name)]

    def embed_sentence(self, names: Sequence[str]) -> np.ndarray:
        """Mean of the name embeddings; the zero vector for an empty list."""
        if not names:
            return np.zeros(self.dim)
        ids = [self.vocab.lookup(n) for n in names]
        return self.input_vectors[ids].mean(axis=0)


def build_vocab(corpus: Iterable[Sequence[str]], min_count: int = 2) -> Vocabulary:
    """Count corpus tokens and index the frequent ones.

    Names below ``min_count`` map to UNK (index 0, which absorbs their
    frequency mass). Kept names are ordered by descending frequency then
    lexicographically, so the mapping is deterministic.
    """
    freq: dict[str, int] = {}
    total = 0
    for sentence in corpus:
        for name in sentence:
            freq[name] = freq.get(name, 0) + 1
            total += 1
    if total == 0:
        raise EmptyCorpusError("corpus contains no tokens")
    kept = sorted(
        (n for n, c in freq.items() if c >= min_count),
        key=lambda n: (-freq[n], n),
    )
    names = [UNK_TOKEN] + kept
    counts = np.zeros(len(names), dtype=np.int64)
    counts[1:] = [freq[n] for n in kept]
    counts[0] = total - int(counts[1:].sum())
    return Vocabulary(
        id_of={n: i for i, n in enumerate(names)}, names=names, counts=counts
    )


def sgns_loss_and_grads(center, context, negatives):
    """Loss and exact gradients of one negative-sampling step.

    loss = -ln s(u.v) - sum_n ln s(-u_n.v) for center v, context u and
    negative rows u_n. Returns ``(loss, (grad_center, grad_context,
    grad_negatives))``.
    """
    center = np.asarray(center, dtype=float)
    context = np.asarray(context, dtype=float)
    negatives = np.asarray(negatives, dtype=float).reshape(-1, center.shape[0])
    score_pos = float(context @ center)
    scores_neg = negatives @ center
    loss = -float(log_sigmoid(score_pos)) - float(log_sigmoid(-scores_neg).sum())
    g_pos = sigmoid(score_pos) - 1.0
    g_neg = sigmoid(scores_neg)
    grad_center = g_pos * context + g_neg @ negatives
    grad_context = g_pos * center
    grad_negatives = g_neg[:, None] * center
    return loss, (grad_center, grad_context, grad_negatives)


def _pair_indices(corpus, vocab, radius):
    """All (center, context) id pairs within the radius, sentence by sentence."""
    centers: list[int] = []
    contexts: list[int] = []
    for sentence in corpus:
        ids = [vocab.lookup(n) for n in sentence]
        length = len(ids)
        for j in range(length):
            for c in range(max(0, j - radius), min(length, j + radius + 1)):
                if c != j:
                    centers.append(ids[j])
                    contexts.append(ids[c])
    return (
        np.array(centers, dtype=np.intp),
        np.array(contexts, dtype=np.intp),
    )


def init_table(vocab: Vocabulary, dim: int, rng: np.random.Generator) -> EmbeddingTable:
    """Standard stable start: small uniform input vectors, zero output vectors."""
    input_vectors = (rng.random((len(vocab), dim)) - 0.5) / dim
    return EmbeddingTable(
        vocab=vocab,
        input_vectors=input_vectors,
        output_vectors=np.zeros((len(vocab), dim)),
    )


def train_skipgram(
    corpus: Sequence[Sequence[str]], config: SgnsConfig | None = None
) -> tuple[EmbeddingTable, list[float]]:
    """SGD over all in-radius pairs; negatives from the unigram^0.75 law.

    The learning rate decays linearly from ``learning_rate`` to
    ``min_learning_rate`` over all steps. Fully deterministic for a given
    seed. Returns the table and the mean loss of each epoch.
    """
    if config is None:
        config = SgnsConfig()
    vocab = build_vocab(corpus, config.min_count)
    rng = np.random.default_rng(config.seed)
    table = init_table(vocab, config.dim, rng)
    centers, contexts = _pair_indices(corpus, vocab, config.context_radius)
    n_pairs = int(centers.size)
    if config.epochs == 0 or n_pairs == 0:
        return table, []

    noise = vocab.counts.astype(float) ** 0.75
    cdf = np.cumsum(noise)
    cdf /= cdf[-1]

    inp = table.input_vectors
    out = table.output_vectors
    k = config.negatives
    total_steps = config.epochs * n_pairs
    lr0 = config.learning_rate
    lr_min = config.min_learning_rate
    step = 0
    epoch_losses = []
    for _ in range(config.epochs):
        negative_ids = np.searchsorted(cdf, rng.random((n_pairs, k)))
        epoch_loss = 0.0
        for j in range(n_pairs):
            lr = max(lr_min, lr0 * (1.0 - step / total_steps))
            c_id = centers[j]
            u_id = contexts[j]
            neg_ids = negative_ids[j]
            loss, (g_center, g_context, g_negs) = sgns_loss_and_grads(
                inp[c_id], out[u_id], out[neg_ids]
            )
            epoch_loss += loss
            inp[c_id] -= lr * g_center
            out[u_id] -= lr * g_context
            np.subtract.at(out, neg_ids, lr * g_negs)
            step += 1
        epoch_losses.append(epoch_loss / n_pairs)
    return table, epoch_losses


def embed_window(names: Sequence[str], table: EmbeddingTable) -> np.ndarray:
    """Fixed-size vector for one window's syscall names (mean embedding)."""
    return table.embed_sentence(names)


def save_embeddings(table: EmbeddingTable, path) -> None:
    doc = {
        "dim": table.dim,
        "names": table.vocab.names,
        "vectors": table.input_vectors.tolist(),
    }
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(doc, fh)
        fh.write("\n")


def load_embeddings(path) -> EmbeddingTable:
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    names = list(doc["names"])
    vocab = Vocabulary(
        id_of={n: i for i, n in enumerate(names)},
        names=names,
        counts=np.zeros(len(names), dtype=np.int64),
    )
    vectors = np.array(doc["vectors"], dtype=float).reshape(len(names), doc["dim"])
    return EmbeddingTable(vocab=vocab, input_vectors=vectors, output_vectors=None)


def cosine(a, b) -> float:
    na = math.sqrt(float(a @ a))
    nb = math.sqrt(float(b @ b))
    if na == 0.0 or nb == 0.0:
        return 0.0
    return float(a @ b) / (na * nb)


class SyscallEmbedder(TransformerMixin, BaseEstimator):
    """Estimator facade over the skip-gram trainer.

    ``fit`` takes a corpus (iterable of name lists) and learns the table;
    ``transform`` maps name lists to their mean embedding rows.
    """

    def __init__(
        self,
        dim=16,
        context_radius=5,
        negatives=5,
        epochs=5,
        learning_rate=0.025,
        min_learning_rate=1e-4,
        min_count=2,
        seed=0,
    ):
        self.dim = dim
        self.context_radius = context_radius
        self.negatives = negatives
        self.epochs = epochs
        self.learning_rate = learning_rate
        self.min_learning_rate = min_learning_rate
        self.min_count = min_count
        self.seed = seed

    def _config(self) -> SgnsConfig:
        return SgnsConfig(
            dim=self.dim,
            context_radius=self.context_radius,
            negatives=self.negatives,
            epochs=self.epochs,
            learning_rate=self.learning_rate,
            min_learning_rate=self.min_learning_rate,
            min_count=self.min_count,
            seed=self.seed,
        )

    def fit(self, X, y=None):
        table, losses = train_skipgram(list(X), self._config())
        self.table_ = table
        self.vocab_ = table.vocab
        self.epoch_losses_ = losses
        return self

    def transform(self, X):
        check_is_fitted(self, "table_")
        return np.array([self.table_.embed_sentence(names) for names in X])
