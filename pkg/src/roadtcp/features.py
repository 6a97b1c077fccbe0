"""Z-score normalization and PCA reduction of road feature matrices."""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Any

import numpy as np

VARIANCE_TARGET = 0.98
# slack for float round-off in cumulative sums compared against the target
_CUM_TOL = 1e-12


class ConstantFeatureWarning(UserWarning):
    """A feature column has zero variance and was mapped to zeros."""


class NumericError(ArithmeticError):
    """Raised when a fit cannot be computed (non-finite or degenerate data)."""


def _check_finite(M: np.ndarray) -> None:
    bad = np.argwhere(~np.isfinite(M))
    if bad.size:
        cells = ", ".join(f"({r}, {c})" for r, c in bad[:5])
        raise NumericError(f"non-finite value(s) at row/column {cells}")


def zscore_fit_apply(M: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Standardize each column of ``M`` with its mean and population std.

    Returns ``(mean, std, Z)``. Constant columns keep ``std == 0`` and are
    mapped to zeros; a :class:`ConstantFeatureWarning` names them.
    """
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] < 2:
        raise ValueError(f"need a 2-D matrix with at least 2 rows, got shape {M.shape}")
    _check_finite(M)
    mean = M.mean(axis=0)
    std = M.std(axis=0)
    return mean, std, zscore_apply(M, mean, std)


def zscore_apply(M: np.ndarray, mean: np.ndarray, std: np.ndarray) -> np.ndarray:
    M = np.asarray(M, dtype=float)
    constant = std == 0
    safe_std = np.where(constant, 1.0, std)
    Z = (M - mean) / safe_std
    if constant.any():
        Z[:, constant] = 0.0
        warnings.warn(
            f"constant feature column(s) {np.flatnonzero(constant).tolist()} mapped to zero",
            ConstantFeatureWarning,
            stacklevel=2,
        )
    return Z


def select_components(explained_ratio: np.ndarray, target: float = VARIANCE_TARGET) -> int:
    """Smallest h whose leading ``explained_ratio`` entries cover ``target``."""
    cum = np.cumsum(explained_ratio)
    reached = np.flatnonzero(cum >= target - _CUM_TOL)
    return int(reached[0]) + 1 if reached.size else len(explained_ratio)


@dataclass(frozen=True)
class PcaModel:
    mean: np.ndarray
    std: np.ndarray
    components: np.ndarray  # n x k, columns are principal directions
    explained_ratio: np.ndarray
    h: int

    @property
    def n_features(self) -> int:
        return self.components.shape[0]

    def to_dict(self) -> dict[str, Any]:
        return {
            "mean": self.mean.tolist(),
            "std": self.std.tolist(),
            "components": self.components.tolist(),
            "explained_ratio": self.explained_ratio.tolist(),
            "h": self.h,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "PcaModel":
        return cls(
            mean=np.asarray(data["mean"], dtype=float),
            std=np.asarray(data["std"], dtype=float),
            components=np.asarray(data["components"], dtype=float),
            explained_ratio=np.asarray(data["explained_ratio"], dtype=float),
            h=int(data["h"]),
        )

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=1) + "\n", encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "PcaModel":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def _fix_signs(vecs: np.ndarray) -> np.ndarray:
    # largest-magnitude entry of every column made positive
    lead = np.argmax(np.abs(vecs), axis=0)
    signs = np.sign(vecs[lead, np.arange(vecs.shape[1])])
    signs[signs == 0] = 1.0
    return vecs * signs


def pca_fit(
    Z: np.ndarray,
    mean: np.ndarray | None = None,
    std: np.ndarray | None = None,
    target: float = VARIANCE_TARGET,
) -> PcaModel:
    """Fit PCA on a z-scored matrix by eigendecomposition of its covariance.

    ``mean``/``std`` are the normalization parameters that produced ``Z``;
    they are stored on the model so raw features can be projected later.
    """
    Z = np.asarray(Z, dtype=float)
    if Z.ndim != 2 or Z.shape[0] < 2:
        raise ValueError(f"need a 2-D matrix with at least 2 rows, got shape {Z.shape}")
    _check_finite(Z)
    m, n = Z.shape
    centered = Z - Z.mean(axis=0)
    cov = centered.T @ centered / m
    eigvals, eigvecs = np.linalg.eigh(cov)
    eigvals = np.clip(eigvals, 0.0, None)
    total = eigvals.sum()
    if not total > 0:
        raise NumericError("feature matrix has zero total variance")
    eigvecs = _fix_signs(eigvecs)

    # descending eigenvalue; near-equal eigenvalues ordered by the row of the
    # component's largest-magnitude entry
    scale = max(float(eigvals.max()), 1.0)
    rounded = np.round(eigvals / scale, 12)
    lead = np.argmax(np.abs(eigvecs), axis=0)
    order = np.lexsort((lead, -rounded))
    eigvals = eigvals[order]
    eigvecs = eigvecs[:, order]

    ratio = eigvals / total
    h = select_components(ratio, target)
    return PcaModel(
        mean=np.zeros(n) if mean is None else np.asarray(mean, dtype=float),
        std=np.ones(n) if std is None else np.asarray(std, dtype=float),
        components=eigvecs,
        explained_ratio=ratio,
        h=h,
    )


def pca_project(model: PcaModel, Z: np.ndarray, h: int | None = None) -> np.ndarray:
    """Scores of ``Z`` on the leading ``h`` (default ``model.h``) components."""
    Z = np.asarray(Z, dtype=float)
    if Z.ndim != 2 or Z.shape[1] != model.n_features:
        raise ValueError(
            f"expected {model.n_features} feature columns, got shape {Z.shape}"
        )
    h = model.h if h is None else h
    return Z @ model.components[:, :h]


def fit_reduce(M: np.ndarray) -> tuple[PcaModel, np.ndarray]:
    """Z-score ``M``, fit PCA and return the model with the reduced matrix."""
    mean, std, Z = zscore_fit_apply(M)
    model = pca_fit(Z, mean, std)
    return model, pca_project(model, Z)
