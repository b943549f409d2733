"""Image containers, DFT conventions, and dataset ingestion.

All images are 2d float64 numpy arrays (row-major, finite values).
The DFT convention is fixed globally: unnormalized forward transform,
1/(H*W) on the inverse, DC coefficient at index (0, 0), no fftshift.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

IDX_IMAGE_MAGIC = 0x00000803
IDX_LABEL_MAGIC = 0x00000801


class FormatError(ValueError):
    """Raised for malformed input files (IDX, graymap, matrix text)."""


@dataclass(frozen=True)
class LabeledDataset:
    images: list  # of 2d float64 arrays
    labels: np.ndarray  # int array, same length as images
    class_count: int

    def __post_init__(self):
        if len(self.images) != len(self.labels):
            raise ValueError("images and labels have different lengths")
        if len(self.labels) and self.labels.max() >= self.class_count:
            raise ValueError("label exceeds class_count")

    def __len__(self):
        return len(self.images)


def as_image(a) -> np.ndarray:
    """Validate and convert to a 2d float64 image grid."""
    img = np.asarray(a, dtype=np.float64)
    if img.ndim != 2 or img.shape[0] < 1 or img.shape[1] < 1:
        raise ValueError(f"expected a 2d image grid, got shape {img.shape}")
    if not np.all(np.isfinite(img)):
        raise ValueError("image contains non-finite samples")
    return img


def signed_freq(n: int) -> np.ndarray:
    """Signed DFT frequencies k/n with k in [-ceil(n/2)+1, floor(n/2)].

    Differs from np.fft.fftfreq only in the sign of the Nyquist entry
    for even n (here +1/2 rather than -1/2).
    """
    k = np.arange(n)
    return np.where(k <= n // 2, k, k - n) / n


def freq_coords(height: int, width: int):
    """Per-index frequency coordinates (u1, u2) in cycles/pixel.

    Returned as broadcastable column/row vectors; DC is exactly (0, 0)
    at index (0, 0).
    """
    u1 = signed_freq(height)[:, None]
    u2 = signed_freq(width)[None, :]
    return u1, u2


def fft2(img: np.ndarray) -> np.ndarray:
    """Forward unnormalized 2d DFT of a real image grid."""
    return np.fft.fft2(as_image(img))


def ifft2(spec: np.ndarray, max_imag: float = 1e-6) -> np.ndarray:
    """Inverse DFT with 1/(H*W) normalization, returning the real part.

    The imaginary residue must be negligible; a residue above
    ``max_imag`` (relative L2) signals a non-Hermitian multiplier bug.
    """
    spec = np.asarray(spec, dtype=np.complex128)
    if spec.ndim != 2:
        raise ValueError(f"expected a 2d spectrum, got shape {spec.shape}")
    out = np.fft.ifft2(spec)
    norm = np.linalg.norm(out)
    if norm > 0:
        residue = np.linalg.norm(out.imag) / norm
        if residue > max_imag:
            raise ValueError(
                f"imaginary residue {residue:.3e} exceeds {max_imag:.1e}; "
                "spectrum is not Hermitian"
            )
    return out.real


def _read_exact(fh, count: int, path, what: str) -> bytes:
    data = fh.read(count)
    if len(data) != count:
        raise FormatError(f"{path}: truncated {what} (expected {count} bytes)")
    return data


def load_idx(images_path, labels_path) -> LabeledDataset:
    """Load a big-endian IDX image/label file pair.

    Pixel bytes are mapped to [0, 1] by dividing by 255.
    """
    with open(images_path, "rb") as fh:
        magic, count, height, width = struct.unpack(
            ">iiii", _read_exact(fh, 16, images_path, "IDX image header")
        )
        if magic != IDX_IMAGE_MAGIC:
            raise FormatError(
                f"{images_path}: bad IDX image magic 0x{magic:08x} "
                f"(expected 0x{IDX_IMAGE_MAGIC:08x})"
            )
        payload = _read_exact(
            fh, count * height * width, images_path, "IDX image payload"
        )
    with open(labels_path, "rb") as fh:
        magic, label_count = struct.unpack(
            ">ii", _read_exact(fh, 8, labels_path, "IDX label header")
        )
        if magic != IDX_LABEL_MAGIC:
            raise FormatError(
                f"{labels_path}: bad IDX label magic 0x{magic:08x} "
                f"(expected 0x{IDX_LABEL_MAGIC:08x})"
            )
        label_bytes = _read_exact(fh, label_count, labels_path, "IDX label payload")
    if count != label_count:
        raise FormatError(
            f"image count {count} does not match label count {label_count}"
        )
    raw = np.frombuffer(payload, dtype=np.uint8).reshape(count, height, width)
    images = [img.astype(np.float64) / 255.0 for img in raw]
    labels = np.frombuffer(label_bytes, dtype=np.uint8).astype(np.int64)
    class_count = int(labels.max()) + 1 if count else 1
    return LabeledDataset(images=images, labels=labels, class_count=class_count)


def _load_pnm_tokens(data: bytes, path):
    # P2 body: whitespace separated ASCII, '#' comments to end of line
    text = data.decode("ascii", errors="replace")
    tokens = []
    for line in text.splitlines():
        line = line.split("#", 1)[0]
        tokens.extend(line.split())
    return tokens


def load_gray_image(path) -> np.ndarray:
    """Load a P2/P5 portable graymap or a plain matrix text file.

    Graymap values are scaled to [0, 1] by the declared maxval; matrix
    text files ("rows cols" header then samples) are taken verbatim.
    """
    with open(path, "rb") as fh:
        data = fh.read()
    if data[:2] == b"P2":
        tokens = _load_pnm_tokens(data[2:], path)
        if len(tokens) < 3:
            raise FormatError(f"{path}: truncated P2 header")
        width, height, maxval = (int(t) for t in tokens[:3])
        values = tokens[3:]
        if len(values) != width * height:
            raise FormatError(
                f"{path}: expected {width * height} pixels, found {len(values)}"
            )
        img = np.array([float(v) for v in values]).reshape(height, width)
        return img / maxval
    if data[:2] == b"P5":
        # header: three ASCII integers (width, height, maxval), then one
        # whitespace byte, then the binary payload
        pos = 2
        fields = []
        while len(fields) < 3:
            while pos < len(data) and data[pos : pos + 1].isspace():
                pos += 1
            if pos < len(data) and data[pos : pos + 1] == b"#":
                while pos < len(data) and data[pos] != 0x0A:
                    pos += 1
                continue
            start = pos
            while pos < len(data) and not data[pos : pos + 1].isspace():
                pos += 1
            if start == pos:
                raise FormatError(f"{path}: truncated P5 header")
            fields.append(int(data[start:pos]))
        pos += 1  # single whitespace after maxval
        width, height, maxval = fields
        if maxval < 256:
            payload = data[pos : pos + width * height]
            if len(payload) != width * height:
                raise FormatError(f"{path}: truncated P5 payload")
            img = np.frombuffer(payload, dtype=np.uint8).astype(np.float64)
        else:
            payload = data[pos : pos + 2 * width * height]
            if len(payload) != 2 * width * height:
                raise FormatError(f"{path}: truncated P5 payload")
            img = np.frombuffer(payload, dtype=">u2").astype(np.float64)
        return img.reshape(height, width) / maxval
    # plain matrix text: "rows cols" header line, then samples
    try:
        tokens = data.decode("ascii").split()
    except UnicodeDecodeError as exc:
        raise FormatError(f"{path}: unsupported image format") from exc
    if len(tokens) < 2:
        raise FormatError(f"{path}: missing 'rows cols' header")
    try:
        rows, cols = int(tokens[0]), int(tokens[1])
        values = [float(t) for t in tokens[2:]]
    except ValueError as exc:
        raise FormatError(f"{path}: unsupported image format") from exc
    if len(values) != rows * cols:
        raise FormatError(
            f"{path}: expected {rows * cols} samples, found {len(values)}"
        )
    return as_image(np.array(values).reshape(rows, cols))


def save_gray_pgm(path, img: np.ndarray, maxval: int = 255):
    """Write an image in [0, 1] as an ASCII (P2) graymap."""
    img = as_image(img)
    quantized = np.clip(np.rint(img * maxval), 0, maxval).astype(int)
    with open(path, "w", encoding="ascii") as fh:
        fh.write(f"P2\n{img.shape[1]} {img.shape[0]}\n{maxval}\n")
        for row in quantized:
            fh.write(" ".join(str(v) for v in row) + "\n")


def minmax_normalize(img: np.ndarray) -> np.ndarray:
    """Affine-map gray values to [0, 1]; constant images map to zeros."""
    img = as_image(img)
    lo, hi = img.min(), img.max()
    if hi == lo:
        return np.zeros_like(img)
    return (img - lo) / (hi - lo)
