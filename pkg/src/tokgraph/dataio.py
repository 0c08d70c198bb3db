"""Bit-exact file formats, synthetic patch datasets, and PNM ingestion.

All multi-byte integers are little-endian and float payloads are IEEE-754
32-bit, so every format round-trips bit-exactly and stays trivially
parseable from any language.  Readers reject the first malformed header
field or any payload length mismatch by name.

Formats (version fields start at 1 where present):

  patches  "PMIM"  version u32, count u32, dim u32, count*dim f32
  labels   "LBLS"  count u32, count u32 class ids
  codebook "CBOK"  version u32, k u32, dim u32, seed u64, epochs u32,
                   source u8 (0 = pixel, 1 = feature), k*dim f32
  tokens   "TOKS"  count u32, k u32, count u32 code indices
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from .errors import DataFormatError, ValidationError
from .tokenizer import SOURCE_FEATURE, SOURCE_PIXEL, Codebook, TokenAssignment

PATCHES_MAGIC = b"PMIM"
LABELS_MAGIC = b"LBLS"
CODEBOOK_MAGIC = b"CBOK"
TOKENS_MAGIC = b"TOKS"
FORMAT_VERSION = 1

_SOURCE_TAGS = {SOURCE_PIXEL: 0, SOURCE_FEATURE: 1}
_SOURCE_NAMES = {v: k for k, v in _SOURCE_TAGS.items()}


class _Reader:
    """Sequential field reader that names whatever field fails."""

    def __init__(self, data: bytes, path) -> None:
        self.data = data
        self.pos = 0
        self.path = path

    def take(self, nbytes: int, field: str) -> bytes:
        if self.pos + nbytes > len(self.data):
            raise DataFormatError(
                f"{self.path}: truncated {field} "
                f"(need {nbytes} bytes at offset {self.pos}, have {len(self.data) - self.pos})"
            )
        out = self.data[self.pos:self.pos + nbytes]
        self.pos += nbytes
        return out

    def u32(self, field: str) -> int:
        return struct.unpack("<I", self.take(4, field))[0]

    def u64(self, field: str) -> int:
        return struct.unpack("<Q", self.take(8, field))[0]

    def u8(self, field: str) -> int:
        return self.take(1, field)[0]

    def magic(self, expected: bytes) -> None:
        got = self.take(4, "magic")
        if got != expected:
            raise DataFormatError(
                f"{self.path}: bad magic {got!r}, expected {expected!r}"
            )

    def version(self) -> None:
        got = self.u32("version")
        if got != FORMAT_VERSION:
            raise DataFormatError(
                f"{self.path}: unsupported version {got}, expected {FORMAT_VERSION}"
            )

    def done(self) -> None:
        extra = len(self.data) - self.pos
        if extra:
            raise DataFormatError(f"{self.path}: {extra} trailing bytes after payload")


def _read_file(path) -> bytes:
    with open(path, "rb") as fh:
        return fh.read()


def write_patches(path, patches: np.ndarray) -> None:
    x = np.ascontiguousarray(patches, dtype="<f4")
    if x.ndim != 2:
        raise ValidationError(f"patches must be 2-D, got shape {x.shape}")
    count, dim = x.shape
    with open(path, "wb") as fh:
        fh.write(PATCHES_MAGIC)
        fh.write(struct.pack("<III", FORMAT_VERSION, count, dim))
        fh.write(x.tobytes())


def read_patches(path) -> np.ndarray:
    r = _Reader(_read_file(path), path)
    r.magic(PATCHES_MAGIC)
    r.version()
    count = r.u32("count")
    dim = r.u32("dim")
    if dim == 0:
        raise DataFormatError(f"{path}: dim must be positive")
    payload = r.take(4 * count * dim, "float payload")
    r.done()
    return np.frombuffer(payload, dtype="<f4").reshape(count, dim).copy()


def write_labels(path, labels) -> None:
    lab = np.asarray(labels)
    if lab.ndim != 1:
        raise ValidationError(f"labels must be 1-D, got shape {lab.shape}")
    if lab.size and (np.any(lab < 0) or np.any(lab > 0xFFFFFFFF)):
        raise ValidationError("labels must fit in u32")
    with open(path, "wb") as fh:
        fh.write(LABELS_MAGIC)
        fh.write(struct.pack("<I", lab.size))
        fh.write(np.ascontiguousarray(lab, dtype="<u4").tobytes())


def read_labels(path) -> np.ndarray:
    r = _Reader(_read_file(path), path)
    r.magic(LABELS_MAGIC)
    count = r.u32("count")
    payload = r.take(4 * count, "label payload")
    r.done()
    return np.frombuffer(payload, dtype="<u4").astype(np.int64)


def write_codebook(path, codebook: Codebook) -> None:
    centers = np.ascontiguousarray(codebook.centers, dtype="<f4")
    with open(path, "wb") as fh:
        fh.write(CODEBOOK_MAGIC)
        fh.write(struct.pack("<III", FORMAT_VERSION, codebook.k, codebook.dim))
        fh.write(struct.pack("<Q", codebook.seed & 0xFFFFFFFFFFFFFFFF))
        fh.write(struct.pack("<I", codebook.epochs))
        fh.write(struct.pack("<B", _SOURCE_TAGS[codebook.source]))
        fh.write(centers.tobytes())


def read_codebook(path) -> Codebook:
    r = _Reader(_read_file(path), path)
    r.magic(CODEBOOK_MAGIC)
    r.version()
    k = r.u32("k")
    dim = r.u32("dim")
    if k == 0 or dim == 0:
        raise DataFormatError(f"{path}: k and dim must be positive")
    seed = r.u64("seed")
    epochs = r.u32("epochs")
    tag = r.u8("source tag")
    if tag not in _SOURCE_NAMES:
        raise DataFormatError(f"{path}: unknown source tag {tag}")
    payload = r.take(4 * k * dim, "center payload")
    r.done()
    centers = np.frombuffer(payload, dtype="<f4").reshape(k, dim)
    return Codebook(centers=centers, seed=seed, epochs=epochs, source=_SOURCE_NAMES[tag])


def write_tokens(path, assignment: TokenAssignment) -> None:
    tokens = np.asarray(assignment.tokens)
    if np.any(tokens < 0) or np.any(tokens >= assignment.k):
        raise ValidationError("token indices outside [0, k)")
    with open(path, "wb") as fh:
        fh.write(TOKENS_MAGIC)
        fh.write(struct.pack("<II", tokens.size, assignment.k))
        fh.write(np.ascontiguousarray(tokens, dtype="<u4").tobytes())


def read_tokens(path) -> tuple[np.ndarray, int]:
    """Token indices and the codebook size they refer to."""
    r = _Reader(_read_file(path), path)
    r.magic(TOKENS_MAGIC)
    count = r.u32("count")
    k = r.u32("k")
    if k == 0:
        raise DataFormatError(f"{path}: k must be positive")
    payload = r.take(4 * count, "token payload")
    r.done()
    tokens = np.frombuffer(payload, dtype="<u4").astype(np.int64)
    if tokens.size and tokens.max() >= k:
        raise DataFormatError(f"{path}: token index {tokens.max()} >= k = {k}")
    return tokens, k


@dataclass(frozen=True)
class SyntheticSpec:
    """Labeled Gaussian-blob patch dataset parameters."""

    num_classes: int
    patches_per_class: int
    dim: int
    center_spread: float
    noise_sigma: float
    seed: int

    def __post_init__(self) -> None:
        if self.num_classes < 1 or self.patches_per_class < 1 or self.dim < 1:
            raise ValidationError("num_classes, patches_per_class and dim must be positive")
        if self.center_spread < 0 or self.noise_sigma < 0:
            raise ValidationError("center_spread and noise_sigma must be >= 0")


def generate_synthetic(spec: SyntheticSpec) -> tuple[np.ndarray, np.ndarray]:
    """Per class: a center on the sphere of radius ``center_spread``, then
    ``patches_per_class`` draws of center + isotropic Gaussian noise.

    Deterministic given the seed.  Returns (patches, labels) with classes
    laid out consecutively.
    """
    rng = np.random.default_rng(spec.seed)
    patches = np.empty((spec.num_classes * spec.patches_per_class, spec.dim))
    labels = np.repeat(np.arange(spec.num_classes), spec.patches_per_class)
    for cls in range(spec.num_classes):
        direction = rng.normal(size=spec.dim)
        norm = np.linalg.norm(direction)
        while norm == 0.0:
            direction = rng.normal(size=spec.dim)
            norm = np.linalg.norm(direction)
        center = direction / norm * spec.center_spread
        noise = rng.normal(scale=spec.noise_sigma, size=(spec.patches_per_class, spec.dim)) \
            if spec.noise_sigma > 0 else 0.0
        start = cls * spec.patches_per_class
        patches[start:start + spec.patches_per_class] = center + noise
    return patches, labels


def read_pnm(path) -> np.ndarray:
    """Binary PGM (P5) or PPM (P6) with 8-bit samples.

    Returns an (H, W, C) float array with values in [0, 255]; C is 1 for
    PGM and 3 for PPM.  ASCII variants and 16-bit samples are rejected.
    """
    data = _read_file(path)
    if data[:2] in (b"P2", b"P3"):
        raise DataFormatError(f"{path}: ASCII PNM variants are not supported")
    if data[:2] == b"P5":
        channels = 1
    elif data[:2] == b"P6":
        channels = 3
    else:
        raise DataFormatError(f"{path}: bad magic {data[:2]!r}, expected P5 or P6")

    if len(data) < 3 or not (data[2:3].isspace() or data[2:3] == b"#"):
        raise DataFormatError(f"{path}: missing whitespace after magic")

    pos = 2
    fields = []
    while len(fields) < 3:
        if pos >= len(data):
            raise DataFormatError(f"{path}: truncated header")
        ch = data[pos:pos + 1]
        if ch == b"#":
            while pos < len(data) and data[pos:pos + 1] != b"\n":
                pos += 1
        elif ch.isspace():
            pos += 1
        elif ch.isdigit():
            start = pos
            while pos < len(data) and data[pos:pos + 1].isdigit():
                pos += 1
            fields.append(int(data[start:pos]))
        else:
            raise DataFormatError(f"{path}: unexpected byte {ch!r} in header")
    width, height, maxval = fields
    if width < 1 or height < 1:
        raise DataFormatError(f"{path}: bad dimensions {width}x{height}")
    if not 0 < maxval <= 255:
        raise DataFormatError(f"{path}: maxval {maxval} not in [1, 255]")
    if pos >= len(data) or not data[pos:pos + 1].isspace():
        raise DataFormatError(f"{path}: missing whitespace before payload")
    pos += 1
    expected = width * height * channels
    payload = data[pos:]
    if len(payload) != expected:
        raise DataFormatError(
            f"{path}: payload has {len(payload)} bytes, expected {expected}"
        )
    pixels = np.frombuffer(payload, dtype=np.uint8).astype(np.float64)
    return pixels.reshape(height, width, channels)
