"""K-means patch tokenizer: codebook training and nearest-neighbor assignment.

The tokenizer has two stages.  Pretraining clusters a patch collection with
K-means (greedy distance-squared seeding plus full-batch Lloyd passes) and
keeps the cluster centers as the codebook.  Inference maps each patch to the
index of its nearest center, which is its discrete token.

Patch collections are plain (count, dim) float arrays; rows may be raw pixel
patches or externally computed per-patch embedding features.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .errors import ValidationError

SOURCE_PIXEL = "pixel"
SOURCE_FEATURE = "feature"

_ASSIGN_CHUNK = 2048


@dataclass(frozen=True)
class Codebook:
    """K cluster centers plus the provenance needed to reproduce them."""

    centers: np.ndarray            # (k, dim) float64
    seed: int
    epochs: int
    source: str = SOURCE_PIXEL

    def __post_init__(self) -> None:
        centers = np.asarray(self.centers, dtype=np.float64)
        if centers.ndim != 2 or centers.shape[0] < 1:
            raise ValidationError(f"centers must be (k, dim) with k >= 1, got {centers.shape}")
        if not np.all(np.isfinite(centers)):
            raise ValidationError("codebook centers contain non-finite values")
        if self.source not in (SOURCE_PIXEL, SOURCE_FEATURE):
            raise ValidationError(f"unknown source tag {self.source!r}")
        object.__setattr__(self, "centers", centers)

    @property
    def k(self) -> int:
        return self.centers.shape[0]

    @property
    def dim(self) -> int:
        return self.centers.shape[1]


@dataclass(frozen=True)
class TokenAssignment:
    """Per-patch token index and squared distance to the assigned center."""

    tokens: np.ndarray             # (count,) int64 in [0, k)
    distances: np.ndarray          # (count,) float64
    k: int


def _as_patches(patches: np.ndarray) -> np.ndarray:
    x = np.asarray(patches, dtype=np.float64)
    if x.ndim != 2:
        raise ValidationError(f"patches must be a (count, dim) matrix, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise ValidationError("patches contain non-finite values")
    return x


def extract_patches(image: np.ndarray, patch_size: int) -> np.ndarray:
    """Cut an (H, W, C) image into non-overlapping flattened patches.

    Returns (H/p * W/p, p*p*C) rows in raster order, each row the row-major
    flattening of one p x p x C block.
    """
    img = np.asarray(image, dtype=np.float64)
    if img.ndim == 2:
        img = img[:, :, None]
    if img.ndim != 3:
        raise ValidationError(f"image must be (H, W, C), got shape {img.shape}")
    h, w, c = img.shape
    p = patch_size
    if p < 1 or h % p != 0 or w % p != 0:
        raise ValidationError(
            f"patch size {p} must divide image height {h} and width {w}"
        )
    grid = img.reshape(h // p, p, w // p, p, c)
    return grid.transpose(0, 2, 1, 3, 4).reshape((h // p) * (w // p), p * p * c)


def _worker_count() -> int:
    """Worker cap from TOKGRAPH_THREADS, defaulting to machine parallelism."""
    env = os.environ.get("TOKGRAPH_THREADS")
    cpus = os.cpu_count() or 1
    if env is None:
        return cpus
    try:
        requested = int(env)
    except ValueError:
        return cpus
    return max(1, min(requested, cpus))


def _sq_dists_chunk(chunk: np.ndarray, centers: np.ndarray) -> np.ndarray:
    """(chunk, k) squared Euclidean distances, computed elementwise."""
    diff = chunk[:, None, :] - centers[None, :, :]
    return np.einsum("ikd,ikd->ik", diff, diff)


def _nearest(patches: np.ndarray, centers: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Argmin center index and squared distance per patch.

    Chunked over patches; chunks are independent and written into
    preallocated outputs, so the result does not depend on scheduling.
    """
    count = patches.shape[0]
    tokens = np.empty(count, dtype=np.int64)
    dists = np.empty(count, dtype=np.float64)
    # keep each (rows, k, dim) distance tensor around 32 MB
    per_row = max(1, centers.shape[0] * centers.shape[1])
    chunk = max(32, min(_ASSIGN_CHUNK, (1 << 22) // per_row))

    def work(start: int) -> None:
        stop = min(start + chunk, count)
        d = _sq_dists_chunk(patches[start:stop], centers)
        tokens[start:stop] = np.argmin(d, axis=1)
        dists[start:stop] = d[np.arange(stop - start), tokens[start:stop]]

    starts = range(0, count, chunk)
    workers = _worker_count()
    if workers > 1 and count > 4 * chunk:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(work, starts))
    else:
        for start in starts:
            work(start)
    return tokens, dists


def kmeanspp_init(patches: np.ndarray, k: int, seed: int, source: str = SOURCE_PIXEL) -> Codebook:
    """Distance-squared greedy seeding.

    The first center is a uniformly random patch; each subsequent center is
    drawn with probability proportional to the squared distance to the
    nearest center chosen so far.  Every center is an exact copy of an input
    row.  Deterministic given the seed (PCG64 generator).
    """
    x = _as_patches(patches)
    count = x.shape[0]
    if k < 1:
        raise ValidationError(f"k must be >= 1, got {k}")
    if k > count:
        raise ValidationError(f"cannot seed {k} centers from {count} patches")

    rng = np.random.default_rng(seed)
    chosen = np.empty(k, dtype=np.int64)
    chosen[0] = rng.integers(count)
    best = _sq_dists_chunk(x, x[chosen[0]][None, :])[:, 0]
    taken = np.zeros(count, dtype=bool)
    taken[chosen[0]] = True
    for i in range(1, k):
        total = best.sum()
        if total > 0.0:
            idx = int(rng.choice(count, p=best / total))
        else:
            # all remaining mass is on duplicates of chosen centers; fall
            # back to a uniform draw over the untaken rows
            idx = int(rng.choice(np.flatnonzero(~taken)))
        chosen[i] = idx
        taken[idx] = True
        best = np.minimum(best, _sq_dists_chunk(x, x[idx][None, :])[:, 0])
    return Codebook(centers=x[chosen].copy(), seed=seed, epochs=0, source=source)


def lloyd_epoch(patches: np.ndarray, codebook: Codebook) -> tuple[Codebook, float]:
    """One full assignment + centroid-update pass.

    Empty clusters are re-seeded to the point currently farthest from its
    assigned center (ties and repeats resolved deterministically).  Returns
    the updated codebook and the inertia measured against the new centers;
    inertia never increases from one epoch to the next.
    """
    x = _as_patches(patches)
    centers = codebook.centers
    if x.shape[1] != centers.shape[1]:
        raise ValidationError(
            f"patch dim {x.shape[1]} does not match codebook dim {centers.shape[1]}"
        )
    k = codebook.k
    tokens, dists = _nearest(x, centers)

    sums = np.zeros_like(centers)
    np.add.at(sums, tokens, x)
    counts = np.bincount(tokens, minlength=k).astype(np.float64)
    new_centers = centers.copy()
    filled = counts > 0
    new_centers[filled] = sums[filled] / counts[filled, None]

    empty = np.flatnonzero(~filled)
    if empty.size:
        # distance of each point to its new assigned center
        reseed_dists = np.einsum(
            "id,id->i", x - new_centers[tokens], x - new_centers[tokens]
        )
        for cluster in empty:
            far = int(np.argmax(reseed_dists))
            new_centers[cluster] = x[far]
            reseed_dists[far] = -1.0

    updated = replace(codebook, centers=new_centers)
    _, new_dists = _nearest(x, new_centers)
    return updated, float(new_dists.sum())


def train_kmeans(
    patches: np.ndarray, k: int, seed: int, epochs: int, source: str = SOURCE_PIXEL
) -> Codebook:
    """Seed with kmeanspp_init, then run ``epochs`` Lloyd passes."""
    if epochs < 0:
        raise ValidationError(f"epochs must be >= 0, got {epochs}")
    codebook = kmeanspp_init(patches, k, seed, source=source)
    for _ in range(epochs):
        codebook, _ = lloyd_epoch(patches, codebook)
    return replace(codebook, epochs=epochs)


def assign_tokens(patches: np.ndarray, codebook: Codebook) -> TokenAssignment:
    """Nearest-center token for each patch.

    Ties in the squared distance resolve to the lowest center index.
    """
    x = _as_patches(patches)
    if x.shape[1] != codebook.dim:
        raise ValidationError(
            f"patch dim {x.shape[1]} does not match codebook dim {codebook.dim}"
        )
    tokens, dists = _nearest(x, codebook.centers)
    return TokenAssignment(tokens=tokens, distances=dists, k=codebook.k)


def standardize_features(patches: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Per-feature zero-mean unit-variance transform.

    Returns (standardized, mean, std); constant features keep std 1 so the
    transform stays invertible.  Off by default in the pipeline.
    """
    x = _as_patches(patches)
    mean = x.mean(axis=0)
    std = x.std(axis=0)
    std = np.where(std > 0.0, std, 1.0)
    return (x - mean) / std, mean, std
