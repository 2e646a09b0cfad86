"""Embedding backends.

The client is model-agnostic: a backend only has to map (tokens, target span)
to a fixed-dimension vector, deterministically for identical inputs.  The
built-in hash backend needs no model files and is the default; transformer
backends load lazily so the client works on machines without them.
"""
from __future__ import annotations

import hashlib
from typing import Protocol, Sequence

import numpy as np


class ModelError(RuntimeError):
    """A backend could not be loaded or failed to produce a vector."""


class Backend(Protocol):
    name: str
    dimension: int

    def embed(self, tokens: Sequence[str], span: tuple[int, int] | None) -> np.ndarray:
        ...


def _span_tokens(tokens: Sequence[str], span: tuple[int, int] | None) -> Sequence[str]:
    if span is None:
        return tokens
    lo, hi = span
    if not (0 <= lo < hi <= len(tokens)):
        raise ValueError(f"span {span} outside chunk of {len(tokens)} tokens")
    return tokens[lo:hi]


class HashBackend:
    """Deterministic offline vectors: one seeded gaussian vector per word.

    The vector for a chunk/span is the mean of its words' vectors, so
    identical inputs always produce identical output and no network or model
    download is involved.
    """

    def __init__(self, dimension: int = 256):
        if dimension < 1:
            raise ValueError("dimension must be positive")
        self.name = "hash"
        self.dimension = dimension
        self._cache: dict[str, np.ndarray] = {}

    def _word_vector(self, word: str) -> np.ndarray:
        vec = self._cache.get(word)
        if vec is None:
            seed = int.from_bytes(
                hashlib.sha1(word.lower().encode("utf-8")).digest()[:8], "big"
            )
            vec = np.random.default_rng(seed).standard_normal(self.dimension)
            self._cache[word] = vec
        return vec

    def embed(self, tokens: Sequence[str], span: tuple[int, int] | None) -> np.ndarray:
        target = _span_tokens(tokens, span)
        if not target:
            raise ValueError("cannot embed an empty token list")
        return np.mean([self._word_vector(w) for w in target], axis=0)


class SentenceTransformerBackend:
    """Any sentence-transformers model; the span text is what gets encoded."""

    def __init__(self, model_name: str):
        try:
            from sentence_transformers import SentenceTransformer
        except ImportError as exc:
            raise ModelError(f"sentence-transformers is not installed: {exc}") from exc
        try:
            self._model = SentenceTransformer(model_name)
        except Exception as exc:
            raise ModelError(f"could not load model {model_name!r}: {exc}") from exc
        self.name = f"st:{model_name}"
        self.dimension = int(self._model.get_sentence_embedding_dimension())

    def embed(self, tokens: Sequence[str], span: tuple[int, int] | None) -> np.ndarray:
        text = " ".join(_span_tokens(tokens, span))
        return np.asarray(self._model.encode([text])[0], dtype=float)


class TransformerBackend:
    """Raw transformers feature extraction with mean pooling over the span.

    The whole chunk provides the context; only the hidden states of the
    word-pieces belonging to the target span are averaged.
    """

    def __init__(self, model_name: str):
        try:
            import torch
            from transformers import AutoModel, AutoTokenizer
        except ImportError as exc:
            raise ModelError(f"transformers/torch is not installed: {exc}") from exc
        try:
            self._tokenizer = AutoTokenizer.from_pretrained(model_name)
            self._model = AutoModel.from_pretrained(model_name)
            self._model.eval()
        except Exception as exc:
            raise ModelError(f"could not load model {model_name!r}: {exc}") from exc
        self._torch = torch
        self.name = f"hf:{model_name}"
        self.dimension = int(self._model.config.hidden_size)

    def embed(self, tokens: Sequence[str], span: tuple[int, int] | None) -> np.ndarray:
        tokens = list(tokens)
        if span is None:
            span = (0, len(tokens))
        _span_tokens(tokens, span)  # bounds check
        encoded = self._tokenizer(
            tokens, is_split_into_words=True, return_tensors="pt", truncation=True
        )
        with self._torch.no_grad():
            hidden = self._model(**encoded).last_hidden_state[0]
        word_ids = encoded.word_ids(0)
        rows = [
            i
            for i, wid in enumerate(word_ids)
            if wid is not None and span[0] <= wid < span[1]
        ]
        if not rows:
            rows = [i for i, wid in enumerate(word_ids) if wid is not None]
        return hidden[rows].mean(dim=0).numpy().astype(float)


def resolve_backend(spec: str, dimension: int = 256) -> Backend:
    """Backend from a model spec: "hash", "st:<model>" or "hf:<model>"."""
    if spec == "hash":
        return HashBackend(dimension)
    if spec.startswith("st:"):
        return SentenceTransformerBackend(spec[3:])
    if spec.startswith("hf:"):
        return TransformerBackend(spec[3:])
    raise ModelError(f"unknown model spec {spec!r} (use hash, st:<name> or hf:<name>)")
