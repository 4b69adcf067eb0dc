"""Domain types: links, samples, datasets and their CSV representation.

Covariates live on the finite set ``{0, e_1, ..., e_d0}``.  An arm index ``k``
encodes ``e_k`` for ``k >= 1`` and the all-zeros reference vector for ``k = 0``.
Selection probabilities are stored as a full vector of length ``d0 + 1`` whose
entry 0 is the probability of the reference arm.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator, Literal

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .errors import ConfigurationError, UsageError

SIMPLEX_TOL = 1e-12


@dataclass(frozen=True)
class LinkKind:
    """Inverse link ``g`` together with its noise variance law.

    ``identity`` carries the noise standard deviation so that the conditional
    variance is a total function; ``logistic`` uses ``mu (1 - mu)``.
    """

    kind: Literal["identity", "logistic"] = "identity"
    noise_sd: float = 1.0

    def __post_init__(self) -> None:
        if self.kind not in ("identity", "logistic"):
            raise ConfigurationError(f"unknown link {self.kind!r}")
        if self.kind == "identity" and not self.noise_sd > 0:
            raise ConfigurationError("identity link needs a positive noise_sd")

    @classmethod
    def identity(cls, noise_sd: float = 1.0) -> "LinkKind":
        return cls("identity", float(noise_sd))

    @classmethod
    def logistic(cls) -> "LinkKind":
        return cls("logistic", 1.0)

    @property
    def is_identity(self) -> bool:
        return self.kind == "identity"

    def mean(self, eta: ArrayLike) -> NDArray[np.float64]:
        eta = np.asarray(eta, dtype=float)
        if self.is_identity:
            return eta.copy()
        return _sigmoid(eta)

    def derivative(self, eta: ArrayLike) -> NDArray[np.float64]:
        eta = np.asarray(eta, dtype=float)
        if self.is_identity:
            return np.ones_like(eta)
        mu = _sigmoid(eta)
        return mu * (1.0 - mu)

    def variance(self, eta: ArrayLike) -> NDArray[np.float64]:
        """Conditional noise variance evaluated at ``g(eta)``."""
        eta = np.asarray(eta, dtype=float)
        if self.is_identity:
            return np.full_like(eta, self.noise_sd**2)
        mu = _sigmoid(eta)
        return mu * (1.0 - mu)

    def cumulant(self, eta: ArrayLike) -> NDArray[np.float64]:
        """Antiderivative ``G`` of ``g`` (so ``G' = g``)."""
        eta = np.asarray(eta, dtype=float)
        if self.is_identity:
            return 0.5 * eta**2
        return np.logaddexp(0.0, eta)


def _sigmoid(eta: NDArray[np.float64]) -> NDArray[np.float64]:
    # branch on sign so exp never overflows
    out = np.empty_like(eta, dtype=float)
    pos = eta >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-eta[pos]))
    e = np.exp(eta[~pos])
    out[~pos] = e / (1.0 + e)
    return out


def link_eval(link: LinkKind, eta: float) -> tuple[float, float, float]:
    """Return ``(g(eta), g'(eta), var(g(eta)))`` for a scalar ``eta``."""
    e = np.array([float(eta)])
    return (
        float(link.mean(e)[0]),
        float(link.derivative(e)[0]),
        float(link.variance(e)[0]),
    )


def covariate_vector(arm: int, d0: int) -> NDArray[np.float64]:
    if not 0 <= int(arm) <= d0:
        raise ConfigurationError(f"arm index {arm} outside 0..{d0}")
    x = np.zeros(d0)
    if arm > 0:
        x[arm - 1] = 1.0
    return x


def atoms(d0: int) -> NDArray[np.float64]:
    """The ``d0 + 1`` covariate atoms as rows; row 0 is the zero vector."""
    return np.vstack([np.zeros(d0), np.eye(d0)])


@dataclass(frozen=True)
class SelectionProbs:
    """Arm-selection probabilities for one round.

    ``p`` holds the probabilities of arms ``1..d0``; ``p0`` the reference arm.
    """

    p: NDArray[np.float64]
    p0: float

    def __post_init__(self) -> None:
        p = np.asarray(self.p, dtype=float).reshape(-1)
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "p0", float(self.p0))
        validate_probs(self.full)

    @classmethod
    def from_full(cls, full: ArrayLike) -> "SelectionProbs":
        full = np.asarray(full, dtype=float)
        return cls(full[1:].copy(), float(full[0]))

    @classmethod
    def from_arms(cls, p: ArrayLike) -> "SelectionProbs":
        p = np.asarray(p, dtype=float)
        return cls(p, 1.0 - math.fsum(p.tolist()))

    @property
    def d0(self) -> int:
        return self.p.shape[0]

    @property
    def full(self) -> NDArray[np.float64]:
        return np.concatenate([[self.p0], self.p])


def validate_probs(full: ArrayLike) -> None:
    full = np.asarray(full, dtype=float)
    if full.ndim < 1 or full.shape[-1] < 2:
        raise ConfigurationError("selection probabilities need at least one arm")
    if not np.all(np.isfinite(full)) or np.any(full <= 0):
        raise ConfigurationError("selection probabilities must be strictly positive")
    if np.any(np.abs(full.sum(axis=-1) - 1.0) > SIMPLEX_TOL):
        raise ConfigurationError("selection probabilities must sum to one")


def as_full_probs(probs: "SelectionProbs | ArrayLike") -> NDArray[np.float64]:
    """Full ``(..., d0 + 1)`` probability array from either representation."""
    if isinstance(probs, SelectionProbs):
        return probs.full
    return np.asarray(probs, dtype=float)


@dataclass(frozen=True)
class Sample:
    arm: int
    z: NDArray[np.float64]
    y: float
    probs: SelectionProbs

    def x(self) -> NDArray[np.float64]:
        return covariate_vector(self.arm, self.probs.d0)


@dataclass(frozen=True)
class Dataset:
    """Adaptively collected samples stored column-wise.

    ``probs[i]`` is the full selection-probability vector in force when
    sample ``i`` was drawn.  Fold 1 is ``[0, split_at)``, fold 2 the rest.
    """

    arms: NDArray[np.int64]
    z: NDArray[np.float64]
    y: NDArray[np.float64]
    probs: NDArray[np.float64]
    split_at: int
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self) -> None:
        arms = np.asarray(self.arms, dtype=np.int64).reshape(-1)
        z = np.asarray(self.z, dtype=float)
        y = np.asarray(self.y, dtype=float).reshape(-1)
        probs = np.asarray(self.probs, dtype=float)
        n = arms.shape[0]
        if z.ndim != 2 or z.shape[0] != n or y.shape[0] != n or probs.shape[0] != n:
            raise ConfigurationError("dataset columns have inconsistent lengths")
        if probs.ndim != 2 or probs.shape[1] < 2:
            raise ConfigurationError("probs must be an (n, d0 + 1) array")
        if not 1 <= self.split_at < n:
            raise ConfigurationError(f"split_at={self.split_at} must lie in [1, {n})")
        d0 = probs.shape[1] - 1
        if np.any(arms < 0) or np.any(arms > d0):
            raise ConfigurationError("arm index out of range")
        validate_probs(probs)
        for name, val in (("arms", arms), ("z", z), ("y", y), ("probs", probs)):
            val.setflags(write=False)
            object.__setattr__(self, name, val)
        object.__setattr__(self, "split_at", int(self.split_at))

    @property
    def n(self) -> int:
        return self.arms.shape[0]

    @property
    def d0(self) -> int:
        return self.probs.shape[1] - 1

    @property
    def d1(self) -> int:
        return self.z.shape[1]

    @property
    def n1(self) -> int:
        return self.split_at

    @property
    def n2(self) -> int:
        return self.n - self.split_at

    def x(self) -> NDArray[np.float64]:
        """One-hot covariate matrix of shape ``(n, d0)``."""
        return atoms(self.d0)[self.arms]

    def design(self) -> NDArray[np.float64]:
        """Stacked design ``Q = [X, Z]``."""
        return np.hstack([self.x(), self.z])

    def fold(self, which: int) -> "Fold":
        if which == 1:
            sl = slice(0, self.split_at)
        elif which == 2:
            sl = slice(self.split_at, self.n)
        else:
            raise UsageError("fold must be 1 or 2")
        return Fold(self.arms[sl], self.z[sl], self.y[sl], self.probs[sl])

    def with_split(self, split_at: int) -> "Dataset":
        return Dataset(self.arms, self.z, self.y, self.probs, split_at, dict(self.meta))

    def __len__(self) -> int:
        return self.n

    def __getitem__(self, i: int) -> Sample:
        return Sample(
            int(self.arms[i]),
            self.z[i].copy(),
            float(self.y[i]),
            SelectionProbs.from_full(self.probs[i]),
        )

    def __iter__(self) -> Iterator[Sample]:
        for i in range(self.n):
            yield self[i]

    @classmethod
    def from_samples(cls, samples: list[Sample], split_at: int) -> "Dataset":
        if not samples:
            raise UsageError("no samples")
        return cls(
            np.array([s.arm for s in samples]),
            np.vstack([s.z for s in samples]),
            np.array([s.y for s in samples]),
            np.vstack([s.probs.full for s in samples]),
            split_at,
        )


@dataclass(frozen=True)
class Fold:
    """A contiguous block of a dataset (no split of its own)."""

    arms: NDArray[np.int64]
    z: NDArray[np.float64]
    y: NDArray[np.float64]
    probs: NDArray[np.float64]

    @property
    def n(self) -> int:
        return self.arms.shape[0]

    @property
    def d0(self) -> int:
        return self.probs.shape[1] - 1

    @property
    def d1(self) -> int:
        return self.z.shape[1]

    def x(self) -> NDArray[np.float64]:
        return atoms(self.d0)[self.arms]

    def design(self) -> NDArray[np.float64]:
        return np.hstack([self.x(), self.z])


@dataclass(frozen=True)
class TrueModel:
    theta_star: NDArray[np.float64]
    beta_star: NDArray[np.float64]
    link: LinkKind

    def __post_init__(self) -> None:
        theta = np.asarray(self.theta_star, dtype=float).reshape(-1)
        beta = np.asarray(self.beta_star, dtype=float).reshape(-1)
        if not (np.all(np.isfinite(theta)) and np.all(np.isfinite(beta))):
            raise ConfigurationError("true parameters must be finite")
        object.__setattr__(self, "theta_star", theta)
        object.__setattr__(self, "beta_star", beta)


# --- CSV ------------------------------------------------------------------


def write_dataset_csv(dataset: Dataset, path: str | Path) -> None:
    """Write ``i, arm, y, z_1..z_d1, p_1..p_d0`` with 17 significant digits."""
    header = (
        ["i", "arm", "y"]
        + [f"z_{j + 1}" for j in range(dataset.d1)]
        + [f"p_{k + 1}" for k in range(dataset.d0)]
    )
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for i in range(dataset.n):
            row = [str(i + 1), str(int(dataset.arms[i])), _fmt(dataset.y[i])]
            row += [_fmt(v) for v in dataset.z[i]]
            row += [_fmt(v) for v in dataset.probs[i, 1:]]
            w.writerow(row)


def read_dataset_csv(path: str | Path, split_at: int | None = None) -> Dataset:
    """Read a dataset CSV; the reference probability is ``1 - sum(p_k)``.

    ``split_at`` defaults to ``n // 4``.
    """
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise UsageError(f"{path}: empty file")
    header, body = rows[0], rows[1:]
    if header[:3] != ["i", "arm", "y"]:
        raise UsageError(f"{path}: header must start with i,arm,y")
    zcols = [j for j, h in enumerate(header) if h.startswith("z_")]
    pcols = [j for j, h in enumerate(header) if h.startswith("p_")]
    if not pcols or not body:
        raise UsageError(f"{path}: no probability columns or no rows")
    arr = np.array([[float(v) for v in r] for r in body])
    p = arr[:, pcols]
    p0 = np.array([1.0 - math.fsum(row) for row in p.tolist()])
    probs = np.column_stack([p0, p])
    n = arr.shape[0]
    return Dataset(
        arr[:, 1].astype(np.int64),
        arr[:, zcols] if zcols else np.zeros((n, 0)),
        arr[:, 2],
        probs,
        n // 4 if split_at is None else split_at,
    )


def _fmt(v: float) -> str:
    return repr(float(v))
