"""Hybrid feature assembly.

Sparse side: bag-of-words/TF-IDF over the preprocessed comment plus an
optional bag over the aspect term. Dense side: 3-way polarity score blocks
from pluggable providers (file-backed cache or a remote scoring service).

TF-IDF is pinned to one exact formula so independent implementations agree:

    weight(t) = count(t) * (ln((1 + N) / (1 + df(t))) + 1)

followed by L2 normalization of the document vector.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

import numpy as np
import requests

from .corpus import AspectInstance
from .preprocess import Stoplist, feature_tokens


class FeatureError(ValueError):
    """Bad vocabulary/vector construction arguments."""


class ProviderError(RuntimeError):
    """A polarity provider could not answer for an instance."""


@dataclass(frozen=True)
class SparseVector:
    """Strictly increasing (index, value) pairs within a fixed dimension."""

    indices: tuple[int, ...]
    values: tuple[float, ...]
    dim: int

    def __post_init__(self):
        if len(self.indices) != len(self.values):
            raise FeatureError("indices and values length mismatch")
        prev = -1
        for i, v in zip(self.indices, self.values):
            if i <= prev or i >= self.dim:
                raise FeatureError(f"index {i} out of order or out of range")
            if not math.isfinite(v) or v == 0.0:
                raise FeatureError(f"value at index {i} must be finite and nonzero")
            prev = i

    def to_dense(self) -> np.ndarray:
        out = np.zeros(self.dim, dtype=np.float64)
        for i, v in zip(self.indices, self.values):
            out[i] = v
        return out

    def sum(self) -> float:
        return float(sum(self.values))


@dataclass(frozen=True)
class Vocabulary:
    """Term to column index lookup with document frequencies.

    Indices are dense 0..V-1, assigned in lexicographic term order.
    """

    index: dict[str, int]
    terms: tuple[str, ...]
    df: dict[str, int]
    n_documents: int
    min_df: int
    max_features: Optional[int]
    use_stemming: bool = False

    def __len__(self) -> int:
        return len(self.terms)

    def to_record(self) -> dict:
        return {
            "terms": list(self.terms),
            "df": [self.df[t] for t in self.terms],
            "n_documents": self.n_documents,
            "min_df": self.min_df,
            "max_features": self.max_features,
            "use_stemming": self.use_stemming,
        }

    @classmethod
    def from_record(cls, rec: dict) -> "Vocabulary":
        terms = tuple(rec["terms"])
        df = dict(zip(terms, rec["df"]))
        return cls(
            index={t: i for i, t in enumerate(terms)},
            terms=terms,
            df=df,
            n_documents=rec["n_documents"],
            min_df=rec["min_df"],
            max_features=rec["max_features"],
            use_stemming=rec.get("use_stemming", False),
        )


def fit_vocabulary(
    docs: Sequence[Sequence[str]],
    min_df: int = 1,
    max_features: Optional[int] = None,
    use_stemming: bool = False,
) -> Vocabulary:
    """Fit a vocabulary over tokenized documents.

    Terms below ``min_df`` are dropped; ``max_features`` keeps the highest-df
    terms (ties broken lexicographically) before indices are assigned in
    lexicographic order.
    """
    if len(docs) == 0:
        raise FeatureError("cannot fit a vocabulary on zero documents")
    if min_df < 1:
        raise FeatureError(f"min_df must be >= 1, got {min_df}")
    df: dict[str, int] = {}
    for doc in docs:
        for term in set(doc):
            df[term] = df.get(term, 0) + 1
    retained = [t for t, n in df.items() if n >= min_df]
    if max_features is not None and len(retained) > max_features:
        retained.sort(key=lambda t: (-df[t], t))
        retained = retained[:max_features]
    retained.sort()
    if not retained:
        raise FeatureError("no terms left after applying min_df")
    return Vocabulary(
        index={t: i for i, t in enumerate(retained)},
        terms=tuple(retained),
        df={t: df[t] for t in retained},
        n_documents=len(docs),
        min_df=min_df,
        max_features=max_features,
        use_stemming=use_stemming,
    )


def count_vector(tokens: Sequence[str], vocab: Vocabulary) -> SparseVector:
    """Occurrence counts of in-vocabulary tokens; OOV tokens are ignored."""
    counts: dict[int, int] = {}
    for t in tokens:
        col = vocab.index.get(t)
        if col is not None:
            counts[col] = counts.get(col, 0) + 1
    indices = tuple(sorted(counts))
    return SparseVector(indices, tuple(float(counts[i]) for i in indices), len(vocab))


def tfidf_transform(counts: SparseVector, vocab: Vocabulary) -> SparseVector:
    """Smoothed-idf weighting followed by L2 normalization."""
    if counts.dim != len(vocab):
        raise FeatureError(
            f"vector dimension {counts.dim} does not match vocabulary size {len(vocab)}"
        )
    n = vocab.n_documents
    weights = []
    for i, c in zip(counts.indices, counts.values):
        term = vocab.terms[i]
        idf = math.log((1 + n) / (1 + vocab.df[term])) + 1.0
        weights.append(c * idf)
    norm = math.sqrt(sum(w * w for w in weights))
    if norm == 0.0:
        return SparseVector((), (), counts.dim)
    return SparseVector(counts.indices, tuple(w / norm for w in weights), counts.dim)


@dataclass(frozen=True)
class PolarityScores:
    """One provider's (positive, neutral, negative) probabilities."""

    provider_id: str
    scores: tuple[float, float, float]

    def __post_init__(self):
        if len(self.scores) != 3:
            raise FeatureError("polarity scores must have exactly 3 entries")
        for s in self.scores:
            if not (0.0 <= s <= 1.0):
                raise FeatureError(f"polarity score {s} outside [0, 1]")
        if abs(sum(self.scores) - 1.0) > 1e-6:
            raise FeatureError(
                f"polarity scores sum to {sum(self.scores)}, expected 1 within 1e-6"
            )


class PolarityProvider:
    """Deterministic source of 3-way polarity scores for instances."""

    provider_id: str

    def score(self, inst: AspectInstance) -> PolarityScores:
        raise NotImplementedError

    def prefetch(self, instances: Sequence[AspectInstance]) -> None:
        """Optional bulk warm-up; the default does nothing."""


class FilePolarityProvider(PolarityProvider):
    """Answers from a JSONL cache keyed by instance id.

    Cache line: {"id": "...", "provider_id": "...", "scores": [p, q, r]}.
    A missing instance is an error, never a silent zero-fill.
    """

    def __init__(self, path: str | Path):
        self.path = Path(path)
        self._cache: dict[str, PolarityScores] = {}
        provider_id: Optional[str] = None
        with open(self.path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                line = line.strip()
                if not line:
                    continue
                try:
                    obj = json.loads(line)
                    pid = obj["provider_id"]
                    scores = PolarityScores(pid, tuple(float(s) for s in obj["scores"]))
                    iid = obj["id"]
                except (KeyError, TypeError, ValueError, json.JSONDecodeError) as e:
                    raise ProviderError(f"{self.path}:{lineno}: malformed cache line ({e})")
                if provider_id is None:
                    provider_id = pid
                elif pid != provider_id:
                    raise ProviderError(
                        f"{self.path}:{lineno}: mixed provider ids "
                        f"{provider_id!r} and {pid!r} in one cache"
                    )
                if iid in self._cache:
                    raise ProviderError(f"{self.path}:{lineno}: duplicate id {iid!r}")
                self._cache[iid] = scores
        if provider_id is None:
            raise ProviderError(f"{self.path}: cache file is empty")
        self.provider_id = provider_id

    def score(self, inst: AspectInstance) -> PolarityScores:
        try:
            return self._cache[inst.id]
        except KeyError:
            raise ProviderError(
                f"provider {self.provider_id!r} has no cached scores for "
                f"instance {inst.id!r}"
            ) from None


class RemotePolarityProvider(PolarityProvider):
    """HTTP client for the polarity scoring service.

    One request per instance, or batches of ``batch_size`` via the batch
    endpoint when present. Responses are validated against the score
    invariants; out-of-contract responses raise instead of being repaired.
    """

    def __init__(self, base_url: str, model_id: str, timeout: float = 10.0,
                 batch_size: int = 64):
        self.base_url = base_url.rstrip("/")
        self.provider_id = model_id
        self.timeout = timeout
        self.batch_size = batch_size
        self._memo: dict[str, PolarityScores] = {}
        self._session = requests.Session()
        self._batch_available: Optional[bool] = None
        try:
            resp = self._session.get(f"{self.base_url}/v1/health", timeout=self.timeout)
        except requests.RequestException as e:
            raise ProviderError(f"polarity service at {self.base_url} unreachable: {e}")
        if resp.status_code != 200:
            raise ProviderError(
                f"polarity service at {self.base_url} not healthy "
                f"(status {resp.status_code})"
            )
        served = resp.json().get("model_id")
        if served != model_id:
            raise ProviderError(
                f"service at {self.base_url} serves model {served!r}, "
                f"expected {model_id!r}"
            )

    def _parse_scores(self, obj: dict, iid: str) -> PolarityScores:
        try:
            scores = obj["scores"]
            triple = (
                float(scores["positive"]),
                float(scores["neutral"]),
                float(scores["negative"]),
            )
        except (KeyError, TypeError, ValueError) as e:
            raise ProviderError(
                f"provider {self.provider_id!r}: malformed response for "
                f"instance {iid!r} ({e})"
            )
        try:
            return PolarityScores(self.provider_id, triple)
        except FeatureError as e:
            raise ProviderError(
                f"provider {self.provider_id!r}: invalid scores for instance {iid!r}: {e}"
            )

    def score(self, inst: AspectInstance) -> PolarityScores:
        hit = self._memo.get(inst.id)
        if hit is not None:
            return hit
        body = {
            "text": inst.text,
            "aspect_term": inst.aspect_term,
            "aspect_start": inst.aspect_start,
            "aspect_end": inst.aspect_end,
            "id": inst.id,
        }
        try:
            resp = self._session.post(
                f"{self.base_url}/v1/polarity", json=body, timeout=self.timeout
            )
        except requests.RequestException as e:
            raise ProviderError(
                f"provider {self.provider_id!r}: request failed for "
                f"instance {inst.id!r}: {e}"
            )
        if resp.status_code != 200:
            raise ProviderError(
                f"provider {self.provider_id!r}: status {resp.status_code} for "
                f"instance {inst.id!r}: {resp.text[:200]}"
            )
        scores = self._parse_scores(resp.json(), inst.id)
        self._memo[inst.id] = scores
        return scores

    def prefetch(self, instances: Sequence[AspectInstance]) -> None:
        pending = [i for i in instances if i.id not in self._memo]
        if not pending or self._batch_available is False:
            return
        for chunk_start in range(0, len(pending), self.batch_size):
            chunk = pending[chunk_start : chunk_start + self.batch_size]
            items = [
                {
                    "text": i.text,
                    "aspect_term": i.aspect_term,
                    "aspect_start": i.aspect_start,
                    "aspect_end": i.aspect_end,
                    "id": i.id,
                }
                for i in chunk
            ]
            try:
                resp = self._session.post(
                    f"{self.base_url}/v1/polarity:batch",
                    json={"items": items},
                    timeout=self.timeout,
                )
            except requests.RequestException as e:
                raise ProviderError(f"provider {self.provider_id!r}: batch request failed: {e}")
            if resp.status_code == 404:
                # No batch endpoint on this deployment; fall back to singles.
                self._batch_available = False
                return
            if resp.status_code != 200:
                raise ProviderError(
                    f"provider {self.provider_id!r}: batch status {resp.status_code}"
                )
            self._batch_available = True
            results = resp.json().get("results", [])
            if len(results) != len(chunk):
                raise ProviderError(
                    f"provider {self.provider_id!r}: batch returned {len(results)} "
                    f"results for {len(chunk)} items"
                )
            for inst, item in zip(chunk, results):
                if "error" in item:
                    raise ProviderError(
                        f"provider {self.provider_id!r}: error for instance "
                        f"{inst.id!r}: {item['error'].get('message', item['error'])}"
                    )
                self._memo[inst.id] = self._parse_scores(item, inst.id)


def file_provider(path: str | Path) -> FilePolarityProvider:
    return FilePolarityProvider(path)


def remote_provider(base_url: str, model_id: str, timeout: float = 10.0) -> RemotePolarityProvider:
    return RemotePolarityProvider(base_url, model_id, timeout)


def polarity_features(
    inst: AspectInstance, providers: Sequence[PolarityProvider]
) -> tuple[float, ...]:
    """Concatenated provider scores, 3 per provider, in list order."""
    if not providers:
        raise FeatureError("providers must be non-empty")
    ids = [p.provider_id for p in providers]
    if len(set(ids)) != len(ids):
        raise FeatureError(f"provider ids must be unique, got {ids}")
    block: list[float] = []
    for p in providers:
        block.extend(p.score(inst).scores)
    return tuple(block)


@dataclass(frozen=True)
class FeatureConfig:
    min_df: int = 2
    max_features: Optional[int] = 20000
    aspect_bag: bool = True
    use_stemming: bool = True
    use_stopwords: bool = True


@dataclass(frozen=True)
class FeatureLayout:
    """Block layout of one experiment's feature vectors.

    ``embedding_dim`` is reserved for future dense embedding providers and
    is always 0 in this build.
    """

    vocab_size: int
    aspect_bag: bool
    provider_ids: tuple[str, ...]
    embedding_dim: int = 0

    @property
    def sparse_dim(self) -> int:
        return self.vocab_size * (2 if self.aspect_bag else 1)

    @property
    def total_dim(self) -> int:
        return self.sparse_dim + 3 * len(self.provider_ids) + self.embedding_dim

    def to_record(self) -> dict:
        return {
            "vocab_size": self.vocab_size,
            "aspect_bag": self.aspect_bag,
            "provider_ids": list(self.provider_ids),
            "embedding_dim": self.embedding_dim,
        }

    @classmethod
    def from_record(cls, rec: dict) -> "FeatureLayout":
        return cls(
            vocab_size=rec["vocab_size"],
            aspect_bag=rec["aspect_bag"],
            provider_ids=tuple(rec["provider_ids"]),
            embedding_dim=rec.get("embedding_dim", 0),
        )

    def descriptor_hash(self) -> str:
        import hashlib

        blob = json.dumps(self.to_record(), sort_keys=True).encode("utf-8")
        return hashlib.sha256(blob).hexdigest()


@dataclass(frozen=True)
class FeatureVector:
    """Sparse text/aspect blocks plus the dense polarity block."""

    sparse: SparseVector
    dense: tuple[float, ...]
    layout: FeatureLayout

    def __post_init__(self):
        if self.sparse.dim != self.layout.sparse_dim:
            raise FeatureError("sparse block does not match layout")
        if len(self.dense) != 3 * len(self.layout.provider_ids):
            raise FeatureError("dense block does not match layout")

    @property
    def dim(self) -> int:
        return self.layout.total_dim

    def to_dense(self) -> np.ndarray:
        return np.concatenate(
            [self.sparse.to_dense(), np.asarray(self.dense, dtype=np.float64)]
        )


def assemble_features(
    inst: AspectInstance,
    vocab: Vocabulary,
    providers: Sequence[PolarityProvider],
    config: FeatureConfig = FeatureConfig(),
    stoplist: Optional[Stoplist] = None,
) -> FeatureVector:
    """Build one hybrid vector: [text TF-IDF | aspect TF-IDF | polarity]."""
    stop = stoplist if config.use_stopwords else None
    text_toks = feature_tokens(inst.text, stop, config.use_stemming)
    text_block = tfidf_transform(count_vector(text_toks, vocab), vocab)
    v = len(vocab)
    if config.aspect_bag:
        aspect_toks = feature_tokens(inst.aspect_term, stop, config.use_stemming)
        aspect_block = tfidf_transform(count_vector(aspect_toks, vocab), vocab)
        indices = text_block.indices + tuple(i + v for i in aspect_block.indices)
        values = text_block.values + aspect_block.values
        sparse = SparseVector(indices, values, 2 * v)
    else:
        sparse = text_block
    if providers:
        dense = polarity_features(inst, providers)
    else:
        dense = ()
    layout = FeatureLayout(
        vocab_size=v,
        aspect_bag=config.aspect_bag,
        provider_ids=tuple(p.provider_id for p in providers),
    )
    return FeatureVector(sparse=sparse, dense=dense, layout=layout)


def build_matrix(
    instances: Sequence[AspectInstance],
    vocab: Vocabulary,
    providers: Sequence[PolarityProvider],
    config: FeatureConfig = FeatureConfig(),
    stoplist: Optional[Stoplist] = None,
) -> np.ndarray:
    """Dense feature matrix for a batch of instances (desk-scale path)."""
    for p in providers:
        p.prefetch(instances)
    rows = [
        assemble_features(inst, vocab, providers, config, stoplist).to_dense()
        for inst in instances
    ]
    layout = FeatureLayout(
        vocab_size=len(vocab),
        aspect_bag=config.aspect_bag,
        provider_ids=tuple(p.provider_id for p in providers),
    )
    if not rows:
        return np.zeros((0, layout.total_dim), dtype=np.float64)
    return np.vstack(rows)
