"""File-backed datasets: embeddings, concept dictionaries, classifiers.

Real-data runs consume three arrays tied together by a small JSON
manifest: image embeddings H (n x d), a concept dictionary c (d x m)
with one named column per concept, and a linear zero-shot classifier
W (k x d) with one row per class.  Arrays travel as NPY version 1.0
little-endian float64 (float32 widened on read), which any ecosystem
can emit without custom parsers; the manifest is the contract shared
with external exporters.

Rows of H and columns of c are unit-normalized on load, so the concept
semantics Z = H c are cosine similarities in [-1, 1].
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .testers import Classifier

__all__ = [
    "DatasetError",
    "MissingFileError",
    "ShapeMismatchError",
    "NonFiniteError",
    "EmbeddingDataset",
    "ConceptDictionary",
    "load_dataset",
    "save_dataset",
    "synthetic_manifest",
    "project_concepts",
    "classify",
    "stream_global",
    "stream_global_conditional",
]

# Norms this close to 1 are left untouched, making normalization
# idempotent so save -> load round-trips are bit-exact.
_UNIT_TOL = 1e-13


class DatasetError(Exception):
    """Base class for dataset loading problems."""


class MissingFileError(DatasetError):
    """A manifest or referenced array file does not exist."""


class ShapeMismatchError(DatasetError):
    """Array dimensions disagree with the manifest or each other."""


class NonFiniteError(DatasetError):
    """An array contains NaN/inf or an unnormalizable zero vector."""


@dataclass(frozen=True)
class EmbeddingDataset:
    """Row-normalized embeddings with optional per-row string ids."""

    H: np.ndarray
    ids: tuple[str, ...] | None = None

    @property
    def n(self) -> int:
        return self.H.shape[0]

    @property
    def d(self) -> int:
        return self.H.shape[1]


@dataclass(frozen=True)
class ConceptDictionary:
    """Column-normalized concept vectors with unique names."""

    c: np.ndarray
    names: tuple[str, ...]

    @property
    def m(self) -> int:
        return self.c.shape[1]


def _normalize(arr: np.ndarray, axis: int, what: str) -> np.ndarray:
    norms = np.linalg.norm(arr, axis=axis, keepdims=True)
    if np.any(norms == 0.0):
        raise NonFiniteError(f"{what} contains a zero vector that cannot be normalized")
    out = np.array(arr, dtype=float)
    scale = np.where(np.abs(norms - 1.0) <= _UNIT_TOL, 1.0, norms)
    return out / scale


def _load_array(path: Path, what: str) -> np.ndarray:
    if not path.exists():
        raise MissingFileError(f"{what} array not found: {path}")
    arr = np.load(path)
    if arr.dtype == np.float32:
        arr = arr.astype(np.float64)
    if arr.dtype != np.float64:
        raise DatasetError(f"{what} array must be float64 or float32, got {arr.dtype}")
    if not np.all(np.isfinite(arr)):
        raise NonFiniteError(f"{what} array contains non-finite values")
    return arr


def load_dataset(manifest_path) -> tuple[EmbeddingDataset, ConceptDictionary, Classifier]:
    """Load and validate the three arrays referenced by a manifest.

    Paths inside the manifest are resolved relative to its directory.
    Raises `MissingFileError`, `ShapeMismatchError`, or
    `NonFiniteError` depending on what is wrong.
    """
    manifest_path = Path(manifest_path)
    if not manifest_path.exists():
        raise MissingFileError(f"manifest not found: {manifest_path}")
    try:
        manifest = json.loads(manifest_path.read_text())
    except json.JSONDecodeError as exc:
        raise DatasetError(f"manifest is not valid JSON: {exc}") from exc
    if manifest.get("version") != 1:
        raise DatasetError(f"unsupported manifest version {manifest.get('version')!r}")
    base = manifest_path.parent
    try:
        emb_meta = manifest["embeddings"]
        con_meta = manifest["concepts"]
        clf_meta = manifest["classifier"]
    except KeyError as exc:
        raise DatasetError(f"manifest missing section {exc}") from exc

    H = _load_array(base / emb_meta["path"], "embeddings")
    if H.ndim != 2 or H.shape != (emb_meta["rows"], emb_meta["dim"]):
        raise ShapeMismatchError(
            f"embeddings shape {H.shape} does not match manifest "
            f"({emb_meta['rows']}, {emb_meta['dim']})"
        )
    ids = emb_meta.get("ids")
    if ids is not None:
        if len(ids) != H.shape[0]:
            raise ShapeMismatchError("ids length does not match embedding rows")
        ids = tuple(str(i) for i in ids)

    c = _load_array(base / con_meta["path"], "concepts")
    names = tuple(con_meta["names"])
    if len(set(names)) != len(names):
        raise DatasetError("concept names must be unique")
    if c.ndim != 2 or c.shape != (con_meta["dim"], len(names)):
        raise ShapeMismatchError(
            f"concepts shape {c.shape} does not match manifest ({con_meta['dim']}, {len(names)})"
        )
    if c.shape[0] != H.shape[1]:
        raise ShapeMismatchError(
            f"concept dimension {c.shape[0]} does not match embedding dimension {H.shape[1]}"
        )

    W = _load_array(base / clf_meta["path"], "classifier")
    classes = tuple(clf_meta["classes"])
    if W.ndim != 2 or W.shape[0] != len(classes):
        raise ShapeMismatchError("classifier must have one row per class")
    if W.shape[1] != H.shape[1]:
        raise ShapeMismatchError(
            f"classifier dimension {W.shape[1]} does not match embedding dimension {H.shape[1]}"
        )

    ds = EmbeddingDataset(H=_normalize(H, axis=1, what="embeddings"), ids=ids)
    cd = ConceptDictionary(c=_normalize(c, axis=0, what="concepts"), names=names)
    clf = Classifier(
        weights=_normalize(W, axis=1, what="classifier"),
        class_names=classes,
        score_mode=clf_meta.get("score_mode", "logit"),
        temperature=float(clf_meta.get("temperature", 1.0)),
    )
    return ds, cd, clf


def save_dataset(
    out_dir,
    H: np.ndarray,
    c: np.ndarray,
    names,
    weights: np.ndarray,
    classes,
    score_mode: str = "logit",
    temperature: float = 1.0,
    ids=None,
    manifest_name: str = "manifest.json",
) -> Path:
    """Write the three arrays plus manifest; returns the manifest path."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    H = np.asarray(H, dtype=np.float64)
    c = np.asarray(c, dtype=np.float64)
    weights = np.asarray(weights, dtype=np.float64)
    np.save(out / "embeddings.npy", H)
    np.save(out / "concepts.npy", c)
    np.save(out / "classifier.npy", weights)
    emb_meta = {"path": "embeddings.npy", "rows": int(H.shape[0]), "dim": int(H.shape[1])}
    if ids is not None:
        emb_meta["ids"] = [str(i) for i in ids]
    manifest = {
        "version": 1,
        "embeddings": emb_meta,
        "concepts": {"path": "concepts.npy", "dim": int(c.shape[0]), "names": list(names)},
        "classifier": {
            "path": "classifier.npy",
            "classes": list(classes),
            "score_mode": score_mode,
            "temperature": temperature,
        },
    }
    path = out / manifest_name
    path.write_text(json.dumps(manifest, indent=2) + "\n")
    return path


def synthetic_manifest(out_dir, n: int = 2000, d: int = 32, m: int = 20, k: int = 3, seed: int = 0) -> Path:
    """Generate a small random dataset bundle for demos and smoke tests.

    Everything is drawn from a seeded generator and unit-normalized, so
    no model inference is needed to exercise the real-data code paths.
    """
    rng = np.random.default_rng(seed)
    H = rng.standard_normal((n, d))
    H /= np.linalg.norm(H, axis=1, keepdims=True)
    c = rng.standard_normal((d, m))
    c /= np.linalg.norm(c, axis=0, keepdims=True)
    W = rng.standard_normal((k, d))
    W /= np.linalg.norm(W, axis=1, keepdims=True)
    names = [f"concept_{i:02d}" for i in range(m)]
    classes = [f"class_{i}" for i in range(k)]
    return save_dataset(out_dir, H, c, names, W, classes)


def project_concepts(ds: EmbeddingDataset, cd: ConceptDictionary) -> np.ndarray:
    """Concept semantics Z = H c; cosine similarities in [-1, 1]."""
    if ds.d != cd.c.shape[0]:
        raise ShapeMismatchError(
            f"embedding dimension {ds.d} does not match concept dimension {cd.c.shape[0]}"
        )
    return ds.H @ cd.c


def classify(classifier: Classifier, h) -> float:
    """Score one embedding with the zero-shot head."""
    return classifier.score(h)


def stream_global(Z: np.ndarray, scores: np.ndarray, j: int, rng: np.random.Generator):
    """One seeded pass over the dataset as (score, z_j) pairs.

    A uniform permutation without replacement stands in for an i.i.d.
    stream from the empirical distribution.
    """
    for i in rng.permutation(Z.shape[0]):
        yield float(scores[i]), float(Z[i, j])


def stream_global_conditional(Z: np.ndarray, scores: np.ndarray, j: int, rng: np.random.Generator):
    """Like `stream_global` but yields (score, z_j, z_rest) triples."""
    rest = np.array([c for c in range(Z.shape[1]) if c != j], dtype=int)
    for i in rng.permutation(Z.shape[0]):
        yield float(scores[i]), float(Z[i, j]), Z[i, rest]
