"""Comparing a statistic's distribution across network sizes."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np


@dataclass(frozen=True)
class SampleGroup:
    """Defined values of one statistic at one network size."""

    label: int
    values: np.ndarray
    dropped: int = 0

    def __post_init__(self) -> None:
        v = np.asarray(self.values, dtype=np.float64).copy()
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @classmethod
    def from_values(cls, label: int, values: Iterable[float]) -> SampleGroup:
        """Build a group, dropping NaN (undefined) entries and counting them."""
        arr = np.asarray(list(values), dtype=np.float64)
        keep = ~np.isnan(arr)
        return cls(label, arr[keep], int((~keep).sum()))

    def __len__(self) -> int:
        return int(self.values.size)


def _as_array(x: SampleGroup | Sequence[float] | np.ndarray) -> np.ndarray:
    return x.values if isinstance(x, SampleGroup) else np.asarray(x, dtype=np.float64)


def ks_two_sample(x: SampleGroup | Sequence[float], y: SampleGroup | Sequence[float]) -> float:
    """Largest gap between the two right-continuous empirical CDFs."""
    a = np.sort(_as_array(x))
    b = np.sort(_as_array(y))
    if a.size == 0 or b.size == 0:
        raise ValueError("both samples must be nonempty")
    pooled = np.concatenate((a, b))
    fa = np.searchsorted(a, pooled, side="right") / a.size
    fb = np.searchsorted(b, pooled, side="right") / b.size
    return float(np.max(np.abs(fa - fb)))


def ks_critical_value(m: int, n: int, alpha: float = 0.01) -> float:
    """Asymptotic two-sample KS critical value."""
    return math.sqrt(-math.log(alpha / 2.0) / 2.0) * math.sqrt((m + n) / (m * n))


def ad_k_sample_raw(groups: Sequence[SampleGroup | Sequence[float]]) -> float:
    """k-sample Anderson-Darling A2_kN with right-continuous EDFs.

    Sums, over the distinct pooled values below the maximum, the weighted
    squared gap between each group's EDF and the pooled EDF; ties are handled
    by weighting each distinct value by its pooled multiplicity.
    """
    samples = [np.sort(_as_array(g)) for g in groups]
    if len(samples) < 2 or any(s.size == 0 for s in samples):
        raise ValueError("need at least two nonempty groups")
    pooled = np.concatenate(samples)
    N = pooled.size
    z, counts = np.unique(pooled, return_counts=True)
    B = np.cumsum(counts)[:-1].astype(np.float64)
    weight = counts[:-1] / N
    if B.size == 0:
        return 0.0
    total = 0.0
    for s in samples:
        M = np.searchsorted(s, z[:-1], side="right").astype(np.float64)
        total += float(np.sum(weight * (N * M - s.size * B) ** 2 / (B * (N - B)))) / s.size
    return total


def ad_null_sd(sizes: Sequence[int]) -> float:
    """Standard deviation of A2_kN under the null of identical continuous distributions."""
    ns = np.asarray(sizes, dtype=np.float64)
    k = ns.size
    N = float(ns.sum())
    if N < 4:
        raise ValueError("standardization needs at least 4 pooled observations")
    H = float(np.sum(1.0 / ns))
    h = float(np.sum(1.0 / np.arange(1, int(N))))
    # g = sum_{i=1}^{N-2} sum_{j=i+1}^{N-1} 1/((N-i) j)
    inv = 1.0 / np.arange(1, int(N))
    tail = np.cumsum(inv[::-1])[::-1]  # tail[j-1] = sum_{m=j}^{N-1} 1/m
    i = np.arange(1, int(N) - 1)
    g = float(np.sum(tail[i] / (N - i)))
    a = (4 * g - 6) * (k - 1) + (10 - 6 * g) * H
    b = (2 * g - 4) * k ** 2 + 8 * h * k + (2 * g - 14 * h - 4) * H - 8 * h + 4 * g - 6
    c = (6 * h + 2 * g - 2) * k ** 2 + (4 * h - 4 * g + 6) * k + (2 * h - 6) * H + 4 * h
    d = (2 * h + 6) * k ** 2 - 4 * h * k
    var = (a * N ** 3 + b * N ** 2 + c * N + d) / ((N - 1) * (N - 2) * (N - 3))
    return math.sqrt(var)


def ad_k_sample(groups: Sequence[SampleGroup | Sequence[float]], standardize: bool = True) -> float:
    """k-sample Anderson-Darling statistic.

    By default returns the standardized form ``(A2_kN - (k - 1)) / sigma_N``;
    ``standardize=False`` gives ``A2_kN`` itself.
    """
    raw = ad_k_sample_raw(groups)
    if not standardize:
        return raw
    sizes = [len(_as_array(g)) for g in groups]
    return (raw - (len(sizes) - 1)) / ad_null_sd(sizes)


def pearson_with_n(points: Iterable[tuple[float, float]]) -> float | None:
    """Pearson correlation of statistic values with size; ``None`` when undefined."""
    arr = np.asarray([(float(n), float(v)) for n, v in points if not math.isnan(float(v))])
    if arr.shape[0] < 2:
        return None
    x = arr[:, 0] - arr[:, 0].mean()
    y = arr[:, 1] - arr[:, 1].mean()
    sxx = float(x @ x)
    syy = float(y @ y)
    if sxx == 0.0 or syy == 0.0:
        return None
    r = float(x @ y) / math.sqrt(sxx * syy)
    return max(-1.0, min(1.0, r))


@dataclass
class ComparisonReport:
    statistic: str
    sizes: list[int]
    ks_matrix: np.ndarray
    ad_stat: float
    pearson_r: float | None
    counts: dict[int, int] = field(default_factory=dict)
    dropped: dict[int, int] = field(default_factory=dict)


def build_report(groups: Sequence[SampleGroup], statistic: str) -> ComparisonReport:
    """Pairwise KS matrix, k-sample AD and correlation with size for one statistic."""
    groups = sorted((g for g in groups if len(g) > 0), key=lambda g: g.label)
    if len(groups) < 2:
        raise ValueError("need at least two nonempty size groups")
    labels = [g.label for g in groups]
    if len(set(labels)) != len(labels):
        raise ValueError("size labels must be unique")
    k = len(groups)
    ks = np.zeros((k, k))
    for a in range(k):
        for b in range(a + 1, k):
            ks[a, b] = ks[b, a] = ks_two_sample(groups[a], groups[b])
    points = [(g.label, v) for g in groups for v in g.values]
    return ComparisonReport(
        statistic=statistic,
        sizes=labels,
        ks_matrix=ks,
        ad_stat=ad_k_sample(groups),
        pearson_r=pearson_with_n(points),
        counts={g.label: len(g) for g in groups},
        dropped={g.label: g.dropped for g in groups},
    )
