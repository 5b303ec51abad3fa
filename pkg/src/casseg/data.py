"""Dataset generation and ingestion.

Synthetic union-of-subspaces sampling, IDX (MNIST-style) and numeric CSV
loaders, and the first-m-per-class protocol subset. Loaders are
deterministic and record a provenance string sufficient to reproduce the
data.
"""

import csv
import struct
from dataclasses import dataclass

import numpy as np

from .numerics import check_matrix, normalize_columns

IDX_IMAGE_MAGIC = 0x00000803
IDX_LABEL_MAGIC = 0x00000801


class IdxFormatError(ValueError):
    """Malformed IDX file."""


class IdxMagicError(IdxFormatError):
    """Wrong magic number."""


class IdxTruncatedError(IdxFormatError):
    """File shorter than its header promises."""


class IdxCountMismatchError(IdxFormatError):
    """Image and label counts disagree."""


class CsvFormatError(ValueError):
    """Ragged or non-numeric CSV content."""


@dataclass
class LabeledData:
    """Data matrix (columns are samples) with ground-truth labels."""

    X: np.ndarray
    labels: np.ndarray
    source: str


@dataclass(frozen=True)
class SyntheticSpec:
    """Union-of-subspaces sampling parameters.

    With independent=True the bases occupy mutually exclusive coordinate
    blocks of a single random rotation, so the subspaces are exactly
    independent; this requires sum(subspace_dims) <= ambient_dim.
    """

    k: int
    subspace_dims: tuple
    ambient_dim: int
    points_per_subspace: tuple
    noise_sigma: float = 0.0
    seed: int = 0
    independent: bool = True

    def __post_init__(self):
        object.__setattr__(self, "subspace_dims", tuple(self.subspace_dims))
        object.__setattr__(self, "points_per_subspace", tuple(self.points_per_subspace))
        if self.k < 1:
            raise ValueError(f"k must be >= 1, got {self.k}")
        if len(self.subspace_dims) != self.k or len(self.points_per_subspace) != self.k:
            raise ValueError("subspace_dims and points_per_subspace must have length k")
        if any(r < 1 for r in self.subspace_dims):
            raise ValueError("every subspace dimension must be >= 1")
        if any(r > self.ambient_dim for r in self.subspace_dims):
            raise ValueError("subspace dimensions cannot exceed the ambient dimension")
        if any(m < 1 for m in self.points_per_subspace):
            raise ValueError("every subspace needs at least one point")
        if self.noise_sigma < 0:
            raise ValueError(f"noise_sigma must be >= 0, got {self.noise_sigma}")
        if self.independent and sum(self.subspace_dims) > self.ambient_dim:
            raise ValueError(
                f"independent subspaces need sum(dims) = {sum(self.subspace_dims)} "
                f"<= ambient_dim = {self.ambient_dim}"
            )

    def describe(self):
        return (
            f"synth:k={self.k},dims={list(self.subspace_dims)},"
            f"ambient={self.ambient_dim},points={list(self.points_per_subspace)},"
            f"sigma={self.noise_sigma},seed={self.seed},independent={self.independent}"
        )


def _bases(spec, rng):
    d = spec.ambient_dim
    if spec.independent:
        R, _ = np.linalg.qr(rng.standard_normal((d, d)))
        bases = []
        offset = 0
        for r in spec.subspace_dims:
            bases.append(R[:, offset:offset + r])
            offset += r
        return bases
    return [np.linalg.qr(rng.standard_normal((d, r)))[0] for r in spec.subspace_dims]


def gen_synthetic(spec):
    """Sample points from a union of subspaces.

    Each subspace contributes B_i @ c with standard-normal coefficients c;
    Gaussian noise of scale noise_sigma is added before the final unit
    normalization of the columns. Deterministic per seed.
    """
    rng = np.random.default_rng(spec.seed)
    bases = _bases(spec, rng)
    blocks = []
    labels = []
    for i, (B, m) in enumerate(zip(bases, spec.points_per_subspace)):
        blocks.append(B @ rng.standard_normal((B.shape[1], m)))
        labels.extend([i] * m)
    X = np.hstack(blocks)
    if spec.noise_sigma > 0:
        X = X + spec.noise_sigma * rng.standard_normal(X.shape)
    X = normalize_columns(X)
    return LabeledData(X=X, labels=np.asarray(labels, dtype=np.int64),
                       source=spec.describe())


def gen_correlated(spec, coherence):
    """Union-of-subspaces sample with correlated points inside each subspace.

    Every subspace's coefficients are blended with a shared direction:
    c_j <- (1 - coherence)*z_j + coherence*z0, so coherence=0 reproduces
    gen_synthetic's distribution and coherence -> 1 collapses each subspace
    onto one line. Noise and normalization as in gen_synthetic.
    """
    if not 0.0 <= coherence < 1.0:
        raise ValueError(f"coherence must lie in [0, 1), got {coherence}")
    rng = np.random.default_rng(spec.seed)
    bases = _bases(spec, rng)
    blocks = []
    labels = []
    for i, (B, m) in enumerate(zip(bases, spec.points_per_subspace)):
        r = B.shape[1]
        shared = rng.standard_normal((r, 1))
        coeffs = (1.0 - coherence) * rng.standard_normal((r, m)) + coherence * shared
        blocks.append(B @ coeffs)
        labels.extend([i] * m)
    X = np.hstack(blocks)
    if spec.noise_sigma > 0:
        X = X + spec.noise_sigma * rng.standard_normal(X.shape)
    X = normalize_columns(X)
    return LabeledData(X=X, labels=np.asarray(labels, dtype=np.int64),
                       source=spec.describe() + f",coherence={coherence}")


def correlated_columns(ambient_dim, n, level, seed=0):
    """Unit-column dictionary whose pairwise column correlation rises with level.

    level=0 gives orthonormal columns, level=1 makes all columns identical;
    requires ambient_dim >= n + 1. The common pairwise correlation is
    level^2 / ((1-level)^2 + level^2).
    """
    if not 0.0 <= level <= 1.0:
        raise ValueError(f"level must lie in [0, 1], got {level}")
    if ambient_dim < n + 1:
        raise ValueError(f"need ambient_dim >= n + 1 = {n + 1}, got {ambient_dim}")
    rng = np.random.default_rng(seed)
    Q, _ = np.linalg.qr(rng.standard_normal((ambient_dim, n + 1)))
    shared = Q[:, n]
    X = (1.0 - level) * Q[:, :n] + level * shared[:, None]
    return normalize_columns(X)


def _read_header(buf, path, n_fields, expected_magic, kind):
    need = 4 * (n_fields + 1)
    if len(buf) < need:
        raise IdxTruncatedError(f"{path}: truncated header ({len(buf)} bytes)")
    values = struct.unpack_from(f">{n_fields + 1}I", buf, 0)
    if values[0] != expected_magic:
        raise IdxMagicError(
            f"{path}: wrong magic 0x{values[0]:08x} for {kind} file "
            f"(expected 0x{expected_magic:08x})"
        )
    return values[1:]


def load_idx(images_path, labels_path):
    """Load an IDX image/label file pair into columns scaled to [0, 1].

    Big-endian headers (magic 0x00000803 for images, 0x00000801 for labels),
    unsigned-byte pixels; each image is flattened row-major into one column.
    """
    with open(images_path, "rb") as fh:
        ibuf = fh.read()
    with open(labels_path, "rb") as fh:
        lbuf = fh.read()
    count, rows, cols = _read_header(ibuf, images_path, 3, IDX_IMAGE_MAGIC, "image")
    pixels = count * rows * cols
    if len(ibuf) != 16 + pixels:
        raise IdxTruncatedError(
            f"{images_path}: expected {16 + pixels} bytes for {count} images, "
            f"got {len(ibuf)}"
        )
    (lcount,) = _read_header(lbuf, labels_path, 1, IDX_LABEL_MAGIC, "label")
    if len(lbuf) != 8 + lcount:
        raise IdxTruncatedError(
            f"{labels_path}: expected {8 + lcount} bytes for {lcount} labels, "
            f"got {len(lbuf)}"
        )
    if count != lcount:
        raise IdxCountMismatchError(
            f"{count} images in {images_path} vs {lcount} labels in {labels_path}"
        )
    images = np.frombuffer(ibuf, dtype=np.uint8, offset=16)
    X = images.reshape(count, rows * cols).T.astype(np.float64) / 255.0
    labels = np.frombuffer(lbuf, dtype=np.uint8, offset=8).astype(np.int64)
    return LabeledData(X=X, labels=labels,
                       source=f"idx:images={images_path},labels={labels_path}")


def load_csv(path, orientation="samples", header=False):
    """Load a rectangular numeric CSV into a (features x samples) matrix.

    orientation 'samples' (default) treats each row as one sample and
    transposes internally; 'features' keeps rows as features. Lines starting
    with '#' are skipped (our writers embed config echoes that way); with
    header=True the first non-comment row is skipped too. Errors cite
    1-based (data row, column) positions.
    """
    if orientation not in ("samples", "features"):
        raise ValueError(f"orientation must be 'samples' or 'features', got {orientation!r}")
    rows = []
    width = None
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        skipped_header = not header
        for record in reader:
            if not record or (record[0].lstrip().startswith("#")):
                continue
            if not skipped_header:
                skipped_header = True
                continue
            rownum = len(rows) + 1
            if width is None:
                width = len(record)
            elif len(record) != width:
                raise CsvFormatError(
                    f"{path}: ragged row {rownum} has {len(record)} cells, expected {width}"
                )
            parsed = []
            for colnum, cell in enumerate(record, start=1):
                try:
                    parsed.append(float(cell))
                except ValueError:
                    raise CsvFormatError(
                        f"{path}: non-numeric cell at ({rownum},{colnum}): {cell!r}"
                    ) from None
            rows.append(parsed)
    if not rows:
        raise CsvFormatError(f"{path}: no data rows")
    M = np.asarray(rows, dtype=np.float64)
    M = check_matrix(M, path)
    return M.T if orientation == "samples" else M


def load_labels_csv(path):
    """Load integer labels from a CSV written as 'index,label' rows or one
    label per line; '#' comments and a header row are tolerated."""
    pairs = []
    singles = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        for record in reader:
            if not record or record[0].lstrip().startswith("#"):
                continue
            cells = [c.strip() for c in record]
            if cells and not _is_int(cells[0]):
                continue  # header row
            if len(cells) >= 2:
                pairs.append((int(cells[0]), int(cells[1])))
            elif len(cells) == 1 and cells[0]:
                singles.append(int(cells[0]))
    if pairs:
        pairs.sort()
        return np.asarray([label for _, label in pairs], dtype=np.int64)
    if singles:
        return np.asarray(singles, dtype=np.int64)
    raise CsvFormatError(f"{path}: no labels found")


def _is_int(cell):
    try:
        int(cell)
        return True
    except ValueError:
        return False


def first_m_per_class(data, m):
    """Keep the first m samples of every class, in the original order."""
    if m < 1:
        raise ValueError(f"m must be >= 1, got {m}")
    keep = []
    for cls in np.unique(data.labels):
        idx = np.flatnonzero(data.labels == cls)
        if idx.size < m:
            raise ValueError(f"class {cls} has only {idx.size} samples, need {m}")
        keep.append(idx[:m])
    keep = np.sort(np.concatenate(keep))
    return LabeledData(
        X=data.X[:, keep],
        labels=data.labels[keep],
        source=data.source + f"|first{m}_per_class",
    )
