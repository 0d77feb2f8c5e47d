"""Artificial binary-input regression datasets and their CSV format.

The target of every sample is ``100 * int(x as binary number)``, with ``x[0]``
the most significant bit. Noisy variants add zero-mean Gaussian noise to the
training targets only.
"""

from __future__ import annotations

import csv
import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .tsetlin import InvalidInputError, augment_literals

DEFAULT_NOISE_SIGMA = 7.0

# name -> (bits, noisy)
NAMED_DATASETS = {
    "I": (2, False),
    "II": (2, True),
    "III": (3, False),
    "IV": (3, True),
    "V": (4, False),
    "VI": (4, True),
}


class DatasetParseError(InvalidInputError):
    pass


@dataclass(frozen=True)
class Normalizer:
    """Affine map between target units and the unit interval."""

    lo: float
    hi: float

    def __post_init__(self):
        if not self.hi > self.lo:
            raise InvalidInputError(f"degenerate target range [{self.lo}, {self.hi}]")

    @classmethod
    def for_bits(cls, n_bits: int) -> "Normalizer":
        return cls(0.0, 100.0 * (2**n_bits - 1))

    def normalize(self, y, clamp: bool = True):
        z = (np.asarray(y, dtype=np.float64) - self.lo) / (self.hi - self.lo)
        return np.clip(z, 0.0, 1.0) if clamp else z

    def denormalize(self, y_norm):
        return self.lo + np.asarray(y_norm, dtype=np.float64) * (self.hi - self.lo)


@dataclass
class DatasetSpec:
    n_bits: int
    noisy: bool = False
    n_train: int = 8000
    n_test: int = 2000
    noise_sigma: float | None = None
    seed: int = 0

    def __post_init__(self):
        if self.noise_sigma is None:
            self.noise_sigma = DEFAULT_NOISE_SIGMA if self.noisy else 0.0
        if self.n_bits < 1:
            raise InvalidInputError("n_bits must be >= 1")
        if self.n_train < 1 or self.n_test < 1:
            raise InvalidInputError("n_train and n_test must be >= 1")
        if self.noise_sigma < 0:
            raise InvalidInputError("noise_sigma must be >= 0")
        if not self.noisy and self.noise_sigma != 0:
            raise InvalidInputError("noise_sigma must be 0 for a noise-free dataset")

    @classmethod
    def named(cls, name: str, **overrides) -> "DatasetSpec":
        """Spec for one of the six benchmark datasets, ``"I"`` to ``"VI"``."""
        try:
            bits, noisy = NAMED_DATASETS[name.upper()]
        except KeyError:
            raise InvalidInputError(f"unknown dataset {name!r}; expected one of {list(NAMED_DATASETS)}")
        return cls(n_bits=bits, noisy=noisy, **overrides)

    @classmethod
    def from_json(cls, source) -> "DatasetSpec":
        data = json.loads(Path(source).read_text()) if not isinstance(source, dict) else dict(source)
        if "name" in data:
            name = data.pop("name")
            return cls.named(name, **data)
        return cls(**data)

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class Dataset:
    X: np.ndarray
    y: np.ndarray
    normalizer: Normalizer = field(default=None)

    def __post_init__(self):
        self.X = np.asarray(self.X, dtype=np.uint8)
        self.y = np.asarray(self.y, dtype=np.float64)
        if self.X.ndim != 2:
            raise InvalidInputError(f"X must be 2-D, got shape {self.X.shape}")
        if len(self.X) != len(self.y):
            raise InvalidInputError(f"{len(self.X)} inputs but {len(self.y)} targets")
        if self.X.size and self.X.max() > 1:
            raise InvalidInputError("inputs must be binary")
        if self.normalizer is None:
            self.normalizer = Normalizer.for_bits(self.n_bits)

    def __len__(self) -> int:
        return len(self.y)

    @property
    def n_bits(self) -> int:
        return self.X.shape[1]

    @property
    def samples(self) -> list[tuple[np.ndarray, float]]:
        return [(x, float(t)) for x, t in zip(self.X, self.y)]

    def literals(self) -> np.ndarray:
        return augment_literals(self.X)

    def normalized_targets(self) -> np.ndarray:
        return self.normalizer.normalize(self.y)


def target_of(x) -> float:
    """Noise-free target: 100 times the binary number spelled by ``x``."""
    bits = np.asarray(x, dtype=np.int64)
    return 100.0 * float(bits @ (1 << np.arange(len(bits) - 1, -1, -1)))


def _targets(X: np.ndarray) -> np.ndarray:
    place = 1 << np.arange(X.shape[1] - 1, -1, -1)
    return 100.0 * (X.astype(np.int64) @ place)


def generate(spec: DatasetSpec, rng=None) -> tuple[Dataset, Dataset]:
    """Draw a train/test pair. Bits are i.i.d. fair coins; only the training
    targets receive noise."""
    rng = np.random.default_rng(spec.seed) if rng is None else rng
    norm = Normalizer.for_bits(spec.n_bits)
    X_train = rng.integers(0, 2, size=(spec.n_train, spec.n_bits), dtype=np.uint8)
    X_test = rng.integers(0, 2, size=(spec.n_test, spec.n_bits), dtype=np.uint8)
    y_train = _targets(X_train)
    if spec.noisy and spec.noise_sigma > 0:
        y_train = y_train + rng.normal(0.0, spec.noise_sigma, size=spec.n_train)
    return Dataset(X_train, y_train, norm), Dataset(X_test, _targets(X_test), norm)


def normalize(ds: Dataset) -> np.ndarray:
    """Targets of ``ds`` mapped into [0, 1] over the theoretical output range."""
    return ds.normalized_targets()


def denormalize(y_norm, normalizer: Normalizer):
    return normalizer.denormalize(y_norm)


def write_csv(ds: Dataset, path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow([f"x{i + 1}" for i in range(ds.n_bits)] + ["y"])
        for x, t in zip(ds.X, ds.y):
            writer.writerow([*map(int, x), repr(float(t))])


def read_csv(path) -> Dataset:
    path = Path(path)
    with path.open(newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise DatasetParseError(f"{path}: empty file")
    header = [h.strip() for h in rows[0]]
    o = len(header) - 1
    if o < 1 or header[-1] != "y" or header[:-1] != [f"x{i + 1}" for i in range(o)]:
        raise DatasetParseError(f"{path}:1: expected header x1,...,xo,y, got {','.join(header)}")
    X = np.empty((len(rows) - 1, o), dtype=np.uint8)
    y = np.empty(len(rows) - 1)
    for i, row in enumerate(rows[1:]):
        lineno = i + 2
        if len(row) != o + 1:
            raise DatasetParseError(f"{path}:{lineno}: expected {o + 1} fields, got {len(row)}")
        try:
            bits = [int(v) for v in row[:o]]
            y[i] = float(row[o])
        except ValueError as exc:
            raise DatasetParseError(f"{path}:{lineno}: {exc}") from None
        if any(b not in (0, 1) for b in bits):
            raise DatasetParseError(f"{path}:{lineno}: inputs must be 0 or 1")
        X[i] = bits
    if len(y) == 0:
        raise DatasetParseError(f"{path}: no samples")
    return Dataset(X, y, Normalizer.for_bits(o))
