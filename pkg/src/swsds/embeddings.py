"""Word/sense vector store in the word2vec text interchange format.

Keys are either plain lemmas or sense keys of the form ``lemma=sense_id``.
A "=" anywhere else in a key is rejected at load time.
"""

from __future__ import annotations

import re
from typing import Iterable, Optional

import numpy as np

SENSE_KEY_RE = re.compile(r"^[^=]+=[^=]+$")


class EmbeddingError(Exception):
    """Base class for vector store errors."""


class EmbeddingFormatError(EmbeddingError):
    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class DimensionMismatchError(EmbeddingError):
    pass


class DuplicateKeyError(EmbeddingError):
    pass


def _check_key(key: str, line: Optional[int] = None) -> None:
    if "=" in key and not SENSE_KEY_RE.match(key):
        raise EmbeddingFormatError(
            f"key {key!r} contains '=' but is not a lemma=sense_id sense key",
            line=line,
        )


class EmbeddingStore:
    """Fixed-dimension map key -> vector. Single writer, snapshot reads."""

    def __init__(self, dim: int):
        if dim < 1:
            raise ValueError("dim must be >= 1")
        self.dim = dim
        self.table: dict[str, np.ndarray] = {}

    def __len__(self) -> int:
        return len(self.table)

    def __contains__(self, key: str) -> bool:
        return key in self.table

    def get(self, key: str) -> Optional[np.ndarray]:
        return self.table.get(key)

    def insert(self, key: str, vector, overwrite: bool = False) -> None:
        vec = np.asarray(vector, dtype=np.float64)
        if vec.shape != (self.dim,):
            raise DimensionMismatchError(
                f"vector for {key!r} has shape {vec.shape}, store dim is {self.dim}"
            )
        if not np.all(np.isfinite(vec)):
            raise ValueError(f"vector for {key!r} has non-finite components")
        _check_key(key)
        if key in self.table and not overwrite:
            raise DuplicateKeyError(f"key {key!r} already present")
        self.table[key] = vec.copy()

    def keys(self) -> Iterable[str]:
        return self.table.keys()


def load_word2vec_text(path) -> EmbeddingStore:
    """Parse the word2vec text format: header ``count dim``, then one
    ``key c1 ... c_dim`` line per entry, single-space separated, UTF-8."""
    with open(path, encoding="utf-8") as fh:
        header = fh.readline()
        parts = header.split()
        if len(parts) != 2:
            raise EmbeddingFormatError("header must be 'count dim'", line=1)
        try:
            count, dim = int(parts[0]), int(parts[1])
        except ValueError:
            raise EmbeddingFormatError("header must hold two integers", line=1)
        if count < 0 or dim < 1:
            raise EmbeddingFormatError("header counts out of range", line=1)
        store = EmbeddingStore(dim)
        lineno = 1
        for line in fh:
            lineno += 1
            if not line.strip():
                continue
            fields = line.rstrip("\n").split(" ")
            key = fields[0]
            if len(fields) - 1 != dim:
                raise EmbeddingFormatError(
                    f"expected {dim} components, found {len(fields) - 1}", line=lineno
                )
            _check_key(key, line=lineno)
            try:
                vec = np.array([float(x) for x in fields[1:]], dtype=np.float64)
            except ValueError:
                raise EmbeddingFormatError("non-numeric component", line=lineno)
            if key in store.table:
                raise DuplicateKeyError(f"key {key!r} duplicated at line {lineno}")
            if not np.all(np.isfinite(vec)):
                raise EmbeddingFormatError("non-finite component", line=lineno)
            store.table[key] = vec
        if len(store) != count:
            raise EmbeddingFormatError(
                f"header declared {count} entries, file holds {len(store)}"
            )
    return store


def save_word2vec_text(store: EmbeddingStore, path) -> None:
    """Write in deterministic sorted-key order, 9 significant digits."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{len(store)} {store.dim}\n")
        for key in sorted(store.table):
            comps = " ".join(f"{x:.9g}" for x in store.table[key])
            fh.write(f"{key} {comps}\n")
