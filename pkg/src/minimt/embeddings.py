"""Pretrained embedding tables and vocabulary lookup matrices.

Reads the whitespace-separated text format used by published word and
subword embeddings: an optional ``count dim`` header line, then one
``token v1 ... vd`` row per line.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bpe import PAD, Vocab
from .errors import FormatError


@dataclass
class EmbeddingTable:
    dim: int
    vectors: dict[str, np.ndarray]

    def __len__(self) -> int:
        return len(self.vectors)

    def __contains__(self, token: str) -> bool:
        return token in self.vectors


@dataclass
class CoverageReport:
    hits: int
    misses: int
    missing_tokens: list[str]

    @property
    def total(self) -> int:
        return self.hits + self.misses


def _is_header(fields: list[str]) -> bool:
    if len(fields) != 2:
        return False
    try:
        int(fields[0]), int(fields[1])
    except ValueError:
        return False
    return True


def load_embedding_table(path, expected_dim: int | None = None) -> EmbeddingTable:
    """Parse a text embedding file; rejects rows of the wrong arity by line."""
    vectors: dict[str, np.ndarray] = {}
    dim: int | None = None
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            fields = line.rstrip("\n").split()
            if not fields:
                continue
            if lineno == 1 and _is_header(fields):
                dim = int(fields[1])
                continue
            if dim is None:
                dim = len(fields) - 1
                if dim < 1:
                    raise FormatError(f"{path}:{lineno}: row has no vector values")
            if len(fields) != dim + 1:
                raise FormatError(
                    f"{path}:{lineno}: expected {dim + 1} fields, got {len(fields)}"
                )
            try:
                vec = np.array([float(x) for x in fields[1:]], dtype=np.float64)
            except ValueError as exc:
                raise FormatError(f"{path}:{lineno}: bad float: {exc}") from exc
            vectors[fields[0]] = vec
    if dim is None or not vectors:
        raise FormatError(f"{path}: no embedding rows found")
    if expected_dim is not None and dim != expected_dim:
        raise FormatError(
            f"{path}: dimension {dim} does not match expected {expected_dim}"
        )
    return EmbeddingTable(dim=dim, vectors=vectors)


def save_embedding_table(table: EmbeddingTable, path, header: bool = True) -> None:
    """Write the text format back out at full float precision."""
    with open(path, "w", encoding="utf-8") as f:
        if header:
            f.write(f"{len(table.vectors)} {table.dim}\n")
        for token, vec in table.vectors.items():
            f.write(token + " " + " ".join(repr(float(v)) for v in vec) + "\n")


def build_lookup(vocab: Vocab, table: EmbeddingTable | None, dim: int,
                 seed: int) -> tuple[np.ndarray, CoverageReport]:
    """Vocab-indexed embedding matrix: pretrained rows where available,
    seeded uniform [-0.1, 0.1] elsewhere, an all-zero PAD row always."""
    if table is not None and table.dim != dim:
        raise ValueError(f"table dim {table.dim} does not match requested dim {dim}")
    rng = np.random.default_rng(seed)
    matrix = rng.uniform(-0.1, 0.1, size=(len(vocab), dim))
    hits = 0
    missing = []
    for idx, token in enumerate(vocab.token_of):
        if table is not None and token in table.vectors:
            matrix[idx] = table.vectors[token]
            hits += 1
        else:
            missing.append(token)
    matrix[PAD] = 0.0
    report = CoverageReport(hits=hits, misses=len(missing), missing_tokens=missing)
    return matrix, report
