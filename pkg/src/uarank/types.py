"""Core value types: prediction matrices, ranking distributions, utility specs.

Conventions used throughout the package:
  - individuals are indexed 0..n-1,
  - labels are the ordinal values 1..L with L the most preferred,
  - rank positions are 1..n with position 1 the top; arrays storing
    per-position values put position k at index k-1.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError

ROW_SUM_TOL = 1e-6
DS_TOL = 1e-9


@dataclass(frozen=True)
class PredictionMatrix:
    """An n x L matrix whose row i is individual i's distribution over labels."""

    rows: np.ndarray

    def __post_init__(self):
        rows = np.asarray(self.rows, dtype=np.float64)
        if rows.ndim != 2 or rows.shape[0] < 1 or rows.shape[1] < 1:
            raise ValidationError(
                f"prediction matrix must be 2-dimensional and nonempty, got shape {rows.shape}"
            )
        if np.any(rows < 0.0) or np.any(rows > 1.0):
            i, l = np.argwhere((rows < 0.0) | (rows > 1.0))[0]
            raise ValidationError(
                f"probability out of [0, 1] at row {i}, label {l + 1}: {rows[i, l]}"
            )
        sums = rows.sum(axis=1)
        bad = np.abs(sums - 1.0) > ROW_SUM_TOL
        if np.any(bad):
            i = int(np.argmax(bad))
            raise ValidationError(f"row {i} sums to {sums[i]}, expected 1 within {ROW_SUM_TOL}")
        # Exact renormalization so downstream arithmetic sees true distributions.
        rows = rows / sums[:, None]
        rows.flags.writeable = False
        object.__setattr__(self, "rows", rows)

    @property
    def n(self) -> int:
        return self.rows.shape[0]

    @property
    def L(self) -> int:
        return self.rows.shape[1]

    def permuted(self, perm) -> "PredictionMatrix":
        """Row-permuted copy: row k of the result is row perm[k] of self."""
        return PredictionMatrix(self.rows[np.asarray(perm)])

    def with_zero_label(self) -> "PredictionMatrix":
        """Extend by an unused top label L+1 with zero probability everywhere."""
        return PredictionMatrix(np.hstack([self.rows, np.zeros((self.n, 1))]))


@dataclass(frozen=True)
class RankingDistribution:
    """Doubly stochastic n x n matrix; entries[i, k-1] = Pr[individual i gets rank k]."""

    entries: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.entries, dtype=np.float64)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValidationError(f"ranking distribution must be square, got shape {m.shape}")
        if np.any(m < -1e-12) or np.any(m > 1.0 + 1e-12):
            raise ValidationError("ranking distribution has entries outside [0, 1]")
        if np.any(np.abs(m.sum(axis=1) - 1.0) > DS_TOL):
            raise ValidationError(f"row sums deviate from 1 by more than {DS_TOL}")
        if np.any(np.abs(m.sum(axis=0) - 1.0) > DS_TOL):
            raise ValidationError(f"column sums deviate from 1 by more than {DS_TOL}")
        m.flags.writeable = False
        object.__setattr__(self, "entries", m)

    @property
    def n(self) -> int:
        return self.entries.shape[0]


@dataclass(frozen=True)
class UtilitySpec:
    """Label values v_1 < ... < v_L and nonincreasing position weights w_1 >= ... >= w_n."""

    label_values: np.ndarray
    position_weights: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.label_values, dtype=np.float64)
        w = np.asarray(self.position_weights, dtype=np.float64)
        if v.ndim != 1 or v.size < 1:
            raise ValidationError("label values must be a nonempty vector")
        if v[0] < 0 or np.any(np.diff(v) <= 0):
            raise ValidationError("label values must be nonnegative and strictly increasing")
        if w.ndim != 1 or w.size < 1 or np.any(w < 0) or np.any(np.diff(w) > 0):
            raise ValidationError("position weights must be nonnegative and nonincreasing")
        v.flags.writeable = False
        w.flags.writeable = False
        object.__setattr__(self, "label_values", v)
        object.__setattr__(self, "position_weights", w)

    @classmethod
    def dcg(cls, n: int, label_values=None, L: int | None = None) -> "UtilitySpec":
        """DCG position weights w_k = 1/log2(1+k); default label values 1..L."""
        if label_values is None:
            if L is None:
                raise ValidationError("either label values or L must be given")
            label_values = np.arange(1, L + 1, dtype=np.float64)
        w = 1.0 / np.log2(1.0 + np.arange(1, n + 1))
        return cls(np.asarray(label_values, dtype=np.float64), w)

    def tau(self, P: PredictionMatrix) -> np.ndarray:
        """Expected label value per individual: tau(p_i) = sum_l v_l p_il."""
        if P.L != self.label_values.size:
            raise ValidationError(
                f"utility spec has {self.label_values.size} label values, matrix has {P.L} labels"
            )
        return P.rows @ self.label_values

    def weights_for(self, n: int) -> np.ndarray:
        if self.position_weights.size < n:
            raise ValidationError(
                f"utility spec has {self.position_weights.size} position weights, need {n}"
            )
        return self.position_weights[:n]
