"""Principal component analysis over small data matrices.

The eigendecomposition is a cyclic Jacobi rotation scheme: unconditionally
stable for symmetric matrices and simple to verify, which is all the
survey-scale problems here need (p up to a few hundred). Convergence is
declared when the off-diagonal Frobenius norm drops below 1e-12 of the
input Frobenius norm, within at most 100 sweeps.

Determinism conventions (stored reports must be byte-stable):
  * eigenvalues sorted non-increasing,
  * within each eigenvector the entry of largest magnitude is made
    positive, ties broken by lowest index,
  * exactly tied eigenvalues are ordered by the first differing
    eigenvector entry. Eigenvectors inside a tied block are basis
    dependent; tests on tied cases should check only the invariant
    subspace projector.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

MODES = ("covariance", "correlation")

JACOBI_TOL = 1e-12
JACOBI_MAX_SWEEPS = 100
SYMMETRY_TOL = 1e-10
EIGENVALUE_CLAMP = 1e-10  # relative to trace


class PcaError(ValueError):
    """Invalid input matrix (shape, symmetry, constant column, not PSD)."""


@dataclass(frozen=True)
class DataMatrix:
    names: tuple[str, ...]
    values: np.ndarray  # n_obs x p_vars, finite floats

    def __post_init__(self):
        v = self.values
        if v.ndim != 2:
            raise PcaError("data matrix must be 2-dimensional")
        n, p = v.shape
        if n < 2:
            raise PcaError("need at least 2 observations")
        if p < 1:
            raise PcaError("need at least 1 variable")
        if len(self.names) != p:
            raise PcaError(f"{len(self.names)} names for {p} columns")
        if not np.all(np.isfinite(v)):
            raise PcaError("data matrix contains non-finite values")

    @property
    def n_obs(self) -> int:
        return self.values.shape[0]

    @property
    def p_vars(self) -> int:
        return self.values.shape[1]

    @classmethod
    def from_rows(cls, names, rows) -> DataMatrix:
        return cls(names=tuple(names), values=np.array(rows, dtype=float))


@dataclass(frozen=True)
class PcaResult:
    eigenvalues: np.ndarray
    loadings: np.ndarray  # p x p, orthonormal columns
    scores: np.ndarray    # n x p
    explained: np.ndarray
    mode: str
    names: tuple[str, ...]

    def as_dict(self) -> dict:
        return {
            "mode": self.mode,
            "variables": list(self.names),
            "eigenvalues": [float(v) for v in self.eigenvalues],
            "explained": [float(v) for v in self.explained],
            "loadings": [[float(v) for v in row] for row in self.loadings],
            "scores": [[float(v) for v in row] for row in self.scores],
        }


def column_means(values: np.ndarray) -> np.ndarray:
    return values.mean(axis=0)


def column_sds(values: np.ndarray) -> np.ndarray:
    return values.std(axis=0, ddof=1)


def standardize(data: DataMatrix) -> DataMatrix:
    """Center each column to mean 0 and scale to sample sd 1."""
    sds = column_sds(data.values)
    for name, sd in zip(data.names, sds):
        if sd == 0.0:
            raise PcaError(f"constant column {name!r} cannot be standardized")
    out = (data.values - column_means(data.values)) / sds
    return DataMatrix(names=data.names, values=out)


def covariance_matrix(data: DataMatrix) -> np.ndarray:
    """Sample covariance (divisor n-1), symmetric by construction."""
    centered = data.values - column_means(data.values)
    cov = centered.T @ centered / (data.n_obs - 1)
    return (cov + cov.T) / 2.0


def _sign_fix(vectors: np.ndarray) -> np.ndarray:
    out = vectors.copy()
    for j in range(out.shape[1]):
        col = out[:, j]
        k = int(np.argmax(np.abs(col)))  # argmax takes the lowest index on ties
        if col[k] < 0:
            out[:, j] = -col
    return out


def _deterministic_order(values: np.ndarray, vectors: np.ndarray):
    idx = list(range(len(values)))
    # non-increasing eigenvalues; exact ties ordered by eigenvector entries
    idx.sort(key=lambda i: (-values[i], tuple(vectors[:, i])))
    return values[idx], vectors[:, idx]


def eigen_sym(m: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.

    Returns (eigenvalues, eigenvectors) with eigenvalues sorted
    non-increasing and orthonormal eigenvectors in the columns, signs and
    tie order fixed per the module conventions.
    """
    a = np.array(m, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise PcaError("eigen_sym needs a square matrix")
    scale = max(1.0, float(np.max(np.abs(a)))) if a.size else 1.0
    if float(np.max(np.abs(a - a.T))) > SYMMETRY_TOL * scale:
        raise PcaError("matrix is not symmetric")
    a = (a + a.T) / 2.0

    p = a.shape[0]
    v = np.eye(p)
    norm = float(np.linalg.norm(a, "fro"))
    if p == 1 or norm == 0.0:
        vals, vecs = np.diag(a).copy(), v
    else:
        for _ in range(JACOBI_MAX_SWEEPS):
            off = float(np.sqrt(np.sum(np.square(a - np.diag(np.diag(a))))))
            if off <= JACOBI_TOL * norm:
                break
            for i in range(p - 1):
                for j in range(i + 1, p):
                    apq = a[i, j]
                    if apq == 0.0:
                        continue
                    tau = (a[j, j] - a[i, i]) / (2.0 * apq)
                    if tau >= 0.0:
                        t = 1.0 / (tau + math.sqrt(1.0 + tau * tau))
                    else:
                        t = -1.0 / (-tau + math.sqrt(1.0 + tau * tau))
                    c = 1.0 / math.sqrt(1.0 + t * t)
                    s = t * c
                    ci, cj = a[:, i].copy(), a[:, j].copy()
                    a[:, i] = c * ci - s * cj
                    a[:, j] = s * ci + c * cj
                    ri, rj = a[i, :].copy(), a[j, :].copy()
                    a[i, :] = c * ri - s * rj
                    a[j, :] = s * ri + c * rj
                    a[i, j] = a[j, i] = 0.0
                    vi, vj = v[:, i].copy(), v[:, j].copy()
                    v[:, i] = c * vi - s * vj
                    v[:, j] = s * vi + c * vj
        else:
            raise PcaError(f"Jacobi iteration did not converge in {JACOBI_MAX_SWEEPS} sweeps")
        vals, vecs = np.diag(a).copy(), v

    vecs = _sign_fix(vecs)
    return _deterministic_order(vals, vecs)


def _clamp_eigenvalues(values: np.ndarray, trace: float) -> np.ndarray:
    # tiny round-off negatives are zeroed; anything larger means a bad input
    out = values.copy()
    tol = EIGENVALUE_CLAMP * max(abs(trace), 1e-300)
    for i, lam in enumerate(out):
        if lam < 0.0:
            if abs(lam) <= tol:
                out[i] = 0.0
            else:
                raise PcaError(f"matrix is not positive semi-definite (eigenvalue {lam})")
    return out


def pca(data: DataMatrix, mode: str = "correlation") -> PcaResult:
    """PCA of a data matrix in covariance or correlation mode.

    Correlation mode standardizes first (constant columns rejected);
    covariance mode only centers. Scores are the transformed observations
    projected onto the loadings; explained variance shares sum to 1.
    """
    if mode not in MODES:
        raise PcaError(f"unknown mode {mode!r}; expected one of {MODES}")
    if mode == "correlation":
        transformed = standardize(data)
    else:
        transformed = DataMatrix(
            names=data.names, values=data.values - column_means(data.values)
        )
    analyzed = covariance_matrix(transformed)
    values, vectors = eigen_sym(analyzed)
    values = _clamp_eigenvalues(values, float(np.trace(analyzed)))
    total = float(values.sum())
    explained = values / total if total > 0 else np.zeros_like(values)
    scores = transformed.values @ vectors
    return PcaResult(
        eigenvalues=values,
        loadings=vectors,
        scores=scores,
        explained=explained,
        mode=mode,
        names=data.names,
    )
