"""Word-vector store: word2vec text format loading, phrase vectors, cosine.

Phrase vectors are the mean of the in-vocabulary token vectors; out-of-vocabulary
tokens are ignored.  All lookups are case-insensitive.
"""

from __future__ import annotations

import string
from dataclasses import dataclass
from typing import IO, Iterable

import numpy as np

from .errors import FormatError

_PUNCT = string.punctuation


def tokenize(text: str) -> list[str]:
    """Whitespace-split, strip surrounding punctuation, lowercase.

    Tokens that are entirely punctuation vanish.  This one tokenizer is shared
    by node similarity, predicate clustering, and ROUGE scoring.
    """
    out = []
    for raw in text.split():
        tok = raw.strip(_PUNCT).lower()
        if tok:
            out.append(tok)
    return out


@dataclass(frozen=True)
class PhraseVector:
    """Mean vector of a phrase plus how many tokens were in vocabulary."""

    values: np.ndarray
    in_vocab_count: int


class EmbeddingStore:
    """Immutable token -> vector map of fixed dimensionality."""

    def __init__(self, dim: int, vocab: dict[str, np.ndarray]):
        if dim <= 0:
            raise ValueError(f"dim must be positive, got {dim}")
        for tok, vec in vocab.items():
            if vec.shape != (dim,):
                raise ValueError(f"vector for {tok!r} has length {vec.shape}, expected {dim}")
        self.dim = dim
        self._vocab = vocab

    def __len__(self) -> int:
        return len(self._vocab)

    def __contains__(self, token: str) -> bool:
        return token.lower() in self._vocab

    def get(self, token: str) -> np.ndarray | None:
        return self._vocab.get(token.lower())

    def phrase_vector(self, phrase: str) -> PhraseVector:
        """Mean of in-vocabulary token vectors; zero vector if none qualify."""
        vectors = []
        for tok in tokenize(phrase):
            vec = self._vocab.get(tok)
            if vec is not None:
                vectors.append(vec)
        if not vectors:
            return PhraseVector(np.zeros(self.dim), 0)
        return PhraseVector(np.mean(vectors, axis=0), len(vectors))


def load_vectors(source: IO[str] | Iterable[str]) -> EmbeddingStore:
    """Parse word2vec text format: a "<count> <dim>" header, then
    "<token> <floats...>" rows.  Tokens are lowercased; the last occurrence of
    a duplicate wins.
    """
    lines = iter(source)
    try:
        header = next(lines)
    except StopIteration:
        raise FormatError("empty embedding stream: missing header") from None
    if isinstance(header, bytes):
        raise FormatError("embedding stream must be text, not bytes")
    parts = header.split()
    if len(parts) != 2:
        raise FormatError(f"malformed header {header.strip()!r}: expected '<count> <dim>'")
    try:
        count, dim = int(parts[0]), int(parts[1])
    except ValueError:
        raise FormatError(f"malformed header {header.strip()!r}: non-integer fields") from None
    if dim <= 0:
        raise FormatError(f"header declares non-positive dimension {dim}")

    vocab: dict[str, np.ndarray] = {}
    lineno = 1
    n_rows = 0
    for line in lines:
        lineno += 1
        if not line.strip():
            continue
        n_rows += 1
        fields = line.split()
        token = fields[0].lower()
        if len(fields) - 1 != dim:
            raise FormatError(
                f"line {lineno}: expected {dim} floats for token {fields[0]!r}, "
                f"got {len(fields) - 1}"
            )
        try:
            vec = np.array([float(x) for x in fields[1:]], dtype=float)
        except ValueError:
            raise FormatError(f"line {lineno}: non-numeric vector component") from None
        vocab[token] = vec
    # duplicates collapse after lowercasing, so compare against row count
    if n_rows != count:
        raise FormatError(f"header declares {count} rows, stream has {n_rows}")
    return EmbeddingStore(dim, vocab)


def load_vectors_path(path) -> EmbeddingStore:
    with open(path, "r", encoding="utf-8") as fh:
        return load_vectors(fh)


def cosine(x: PhraseVector, y: PhraseVector) -> float:
    """Cosine similarity clamped to [0, 1]; zero vectors compare as 0."""
    xv, yv = x.values, y.values
    if xv.shape != yv.shape:
        raise ValueError(f"dimension mismatch: {xv.shape} vs {yv.shape}")
    nx = float(np.linalg.norm(xv))
    ny = float(np.linalg.norm(yv))
    if nx == 0.0 or ny == 0.0:
        return 0.0
    value = float(np.dot(xv, yv)) / (nx * ny)
    if value <= 0.0:
        return 0.0
    return min(value, 1.0)
