"""Ratings-to-bandit pipeline.

Turns a CSV of per-item 1-3 star rating counts into a Bernoulli instance:
each item's raw score is the fraction of its ratings at 2 or 3 stars, scores
are normalised by the best one, and anything at or above the threshold is
promoted to mean 1 (those items become the best arms).
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .core import BanditInstance

EXPECTED_HEADER = ["id", "stars1", "stars2", "stars3"]


@dataclass
class RatingsTable:
    ids: list[str]
    stars: np.ndarray  # shape (n_items, 3), counts for 1/2/3 stars
    dropped: int  # items discarded for having zero ratings

    def __len__(self) -> int:
        return len(self.ids)


def load_ratings(path) -> RatingsTable:
    """Parse ``id,stars1,stars2,stars3`` rows; zero-rating items are dropped."""
    ids: list[str] = []
    rows: list[tuple[int, int, int]] = []
    dropped = 0
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValueError(f"{path}: empty ratings file")
        if [h.strip() for h in header] != EXPECTED_HEADER:
            raise ValueError(
                f"{path}:1: expected header {','.join(EXPECTED_HEADER)!r}, "
                f"got {','.join(header)!r}"
            )
        for lineno, row in enumerate(reader, start=2):
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            if len(row) != 4:
                raise ValueError(f"{path}:{lineno}: expected 4 columns, got {len(row)}")
            try:
                counts = tuple(int(v) for v in row[1:])
            except ValueError:
                raise ValueError(f"{path}:{lineno}: rating counts must be integers")
            if any(c < 0 for c in counts):
                raise ValueError(f"{path}:{lineno}: rating counts must be >= 0")
            if sum(counts) == 0:
                dropped += 1
                continue
            ids.append(row[0])
            rows.append(counts)
    if not ids:
        raise ValueError(f"{path}: no item with a positive rating count")
    return RatingsTable(ids, np.array(rows, dtype=np.int64), dropped)


def ratings_to_means(table: RatingsTable, threshold: float = 0.8) -> tuple[np.ndarray, int]:
    """Fraction-of-positive scores, normalised by the best and thresholded.

    Returns ``(means, m)`` where ``m`` counts the entries promoted to 1.
    The item with the maximum raw score always normalises to 1, so m >= 1 for
    any threshold <= 1.
    """
    if len(table) == 0:
        raise ValueError("ratings table is empty")
    totals = table.stars.sum(axis=1)
    positive = table.stars[:, 1] + table.stars[:, 2]
    p = positive / totals
    p_max = p.max()
    if p_max <= 0.0:
        raise ValueError("no item has any 2- or 3-star rating")
    p = p / p_max
    means = np.where(p >= threshold, 1.0, p)
    m = int(np.count_nonzero(means == 1.0))
    return means, m


def means_to_instance(means) -> BanditInstance:
    return BanditInstance.bernoulli(means)
