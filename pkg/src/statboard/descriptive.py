"""Descriptive statistics: frequency tables, summaries, cross-tabs, Likert profiles.

All operations are pure functions over immutable inputs. Quartiles use
linear interpolation between closest ranks (the "type 7" convention) and
standard deviations use the n-1 divisor throughout; both conventions are
fixed so stored report output stays stable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass


class StatsError(ValueError):
    """Raised for empty or non-finite numeric input."""


@dataclass(frozen=True)
class FrequencyTable:
    categories: tuple
    counts: tuple[int, ...]
    proportions: tuple[float, ...]
    total: int

    def as_dict(self) -> dict:
        return {
            "categories": [str(c) for c in self.categories],
            "counts": list(self.counts),
            "proportions": list(self.proportions),
            "total": self.total,
        }


@dataclass(frozen=True)
class SummaryStats:
    n: int
    mean: float
    sd: float
    min: float
    q1: float
    median: float
    q3: float
    max: float

    def as_dict(self) -> dict:
        return {
            "n": self.n,
            "mean": self.mean,
            "sd": self.sd,
            "min": self.min,
            "q1": self.q1,
            "median": self.median,
            "q3": self.q3,
            "max": self.max,
        }


@dataclass(frozen=True)
class CrossTab:
    row_categories: tuple
    col_categories: tuple
    cells: tuple[tuple[int, ...], ...]  # rows x cols
    row_margins: tuple[int, ...]
    col_margins: tuple[int, ...]
    total: int

    def as_dict(self) -> dict:
        return {
            "row_categories": [str(c) for c in self.row_categories],
            "col_categories": [str(c) for c in self.col_categories],
            "cells": [list(row) for row in self.cells],
            "row_margins": list(self.row_margins),
            "col_margins": list(self.col_margins),
            "total": self.total,
        }


def frequency_table(values, categories=None) -> FrequencyTable:
    """Count categorical values.

    Categories appear in first-appearance order unless an explicit category
    list is given (declared-option order for choice questions), in which
    case zero counts are kept and unexpected values raise.
    """
    counts: dict = {}
    if categories is not None:
        counts = {c: 0 for c in categories}
        for v in values:
            if v not in counts:
                raise StatsError(f"value {v!r} not among declared categories")
            counts[v] += 1
    else:
        for v in values:
            counts[v] = counts.get(v, 0) + 1
    total = sum(counts.values())
    cats = tuple(counts.keys())
    cnts = tuple(counts[c] for c in cats)
    props = tuple(c / total for c in cnts) if total > 0 else ()
    return FrequencyTable(categories=cats, counts=cnts, proportions=props, total=total)


def _quantile_type7(sorted_values: list[float], p: float) -> float:
    # linear interpolation between closest ranks: h = (n-1)p
    n = len(sorted_values)
    if n == 1:
        return sorted_values[0]
    h = (n - 1) * p
    lo = math.floor(h)
    frac = h - lo
    if lo + 1 >= n:
        return sorted_values[-1]
    return sorted_values[lo] + frac * (sorted_values[lo + 1] - sorted_values[lo])


def summary_stats(values) -> SummaryStats:
    """Seven-number summary with sample (n-1) standard deviation.

    Rejects empty input and non-finite values; silently dropping bad data
    would corrupt a survey pipeline. sd is 0.0 for n == 1.
    """
    xs = [float(v) for v in values]
    if not xs:
        raise StatsError("summary_stats: empty input")
    for v in xs:
        if not math.isfinite(v):
            raise StatsError(f"summary_stats: non-finite value {v!r}")
    n = len(xs)
    mean = math.fsum(xs) / n
    if n >= 2:
        sd = math.sqrt(math.fsum((x - mean) ** 2 for x in xs) / (n - 1))
    else:
        sd = 0.0
    xs_sorted = sorted(xs)
    return SummaryStats(
        n=n,
        mean=mean,
        sd=sd,
        min=xs_sorted[0],
        q1=_quantile_type7(xs_sorted, 0.25),
        median=_quantile_type7(xs_sorted, 0.5),
        q3=_quantile_type7(xs_sorted, 0.75),
        max=xs_sorted[-1],
    )


def cross_tab(pairs) -> CrossTab:
    """Cross-tabulate (row, col) category pairs with margins."""
    row_cats: list = []
    col_cats: list = []
    cell_counts: dict[tuple, int] = {}
    for r, c in pairs:
        if r not in row_cats:
            row_cats.append(r)
        if c not in col_cats:
            col_cats.append(c)
        cell_counts[(r, c)] = cell_counts.get((r, c), 0) + 1
    cells = tuple(
        tuple(cell_counts.get((r, c), 0) for c in col_cats) for r in row_cats
    )
    row_margins = tuple(sum(row) for row in cells)
    col_margins = tuple(sum(row[j] for row in cells) for j in range(len(col_cats)))
    return CrossTab(
        row_categories=tuple(row_cats),
        col_categories=tuple(col_cats),
        cells=cells,
        row_margins=row_margins,
        col_margins=col_margins,
        total=sum(row_margins),
    )


LIKERT_CATEGORIES = (1, 2, 3, 4, 5)


def likert_profile(values) -> tuple[FrequencyTable, SummaryStats | None]:
    """Profile of 1..5 answers: counts over all five categories plus a summary.

    All five categories are present even at count 0; the summary is None
    for empty input (a survey legitimately starts with zero responses).
    """
    vals = list(values)
    for v in vals:
        if isinstance(v, bool) or not isinstance(v, int) or not 1 <= v <= 5:
            raise StatsError(f"likert value {v!r} out of range 1..5")
    table = frequency_table(vals, categories=LIKERT_CATEGORIES)
    summary = summary_stats(vals) if vals else None
    return table, summary
