"""Measurements on maps, agents and batches of runs."""

from __future__ import annotations

import csv
from collections import Counter
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial.distance import directed_hausdorff

from .neural_map import NeuralMap

HEIGHT_LEVELS = 4
BACKNESS_LEVELS = 3


def _points(m):
    return m.neurons if isinstance(m, NeuralMap) else np.asarray(m, dtype=float)


def preferred_vector_entropy(maps, bins_per_dim=20):
    """Shannon entropy in bits of the pooled preferred vectors on a bins x bins grid."""
    maps = list(maps)
    if not maps:
        raise ValueError("need at least one map")
    pts = np.concatenate([_points(m) for m in maps])
    if pts.shape[1] != 2:
        raise ValueError("entropy is defined for 2-D maps")
    cells = np.minimum((pts * bins_per_dim).astype(np.int64), bins_per_dim - 1)
    cells = np.maximum(cells, 0)
    counts = np.bincount(cells[:, 0] * bins_per_dim + cells[:, 1])
    p = counts[counts > 0] / len(pts)
    return float(-(p * np.log2(p)).sum())


@dataclass
class EntropyTrace:
    steps: list = field(default_factory=list)
    bits: list = field(default_factory=list)

    def append(self, step, value):
        if self.steps and step <= self.steps[-1]:
            raise ValueError("entropy samples must have strictly increasing steps")
        self.steps.append(int(step))
        self.bits.append(float(value))

    def __len__(self):
        return len(self.steps)

    @property
    def initial(self):
        return self.bits[0]

    @property
    def final(self):
        return self.bits[-1]

    def to_rows(self):
        return list(zip(self.steps, self.bits))


def detect_plateau(trace, window=500, eps=0.01):
    """Earliest step whose trailing window of samples spans at most ``eps`` bits.

    Only windows fully covered by the trace count, so the first candidate is
    the first sample at least ``window`` steps after the start.
    """
    steps = np.asarray(trace.steps)
    bits = np.asarray(trace.bits)
    if len(steps) == 0:
        raise ValueError("empty entropy trace")
    lo = 0
    for k in range(len(steps)):
        if steps[k] - steps[0] < window:
            continue
        while steps[lo] < steps[k] - window:
            lo += 1
        seg = bits[lo : k + 1]
        if seg.max() - seg.min() <= eps:
            return int(steps[k])
    return None


def hausdorff(a, b):
    """Symmetric Hausdorff distance between two point sets."""
    a = np.atleast_2d(a)
    b = np.atleast_2d(b)
    return max(directed_hausdorff(a, b)[0], directed_hausdorff(b, a)[0])


def pairwise_hausdorff(sets):
    n = len(sets)
    out = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            out[i, j] = out[j, i] = hausdorff(sets[i], sets[j])
    return out


def perceptual_attractor_sets(agents, grid_resolution=25, merge_tol=0.02):
    return [
        a.perceptual_map.extract_attractors(grid_resolution=grid_resolution, merge_tol=merge_tol)
        for a in agents
    ]


def shared_code_distance(agents, grid_resolution=25, merge_tol=0.02):
    """Largest Hausdorff distance between any two agents' perceptual attractor sets."""
    if len(agents) < 2:
        raise ValueError("shared code distance needs at least two agents")
    sets = perceptual_attractor_sets(agents, grid_resolution, merge_tol)
    return float(pairwise_hausdorff(sets).max())


def medoid_index(sets):
    """Index of the set with the smallest summed Hausdorff distance to the others."""
    if len(sets) == 1:
        return 0
    return int(np.argmin(pairwise_hausdorff(sets).sum(axis=1)))


@dataclass(frozen=True)
class VowelSystemSignature:
    """Relative layout of a vowel system on a height x backness grid.

    ``height`` counts up from close (low F1) vowels, ``backness`` counts up
    from front (high F2') vowels. ``collision`` is set when two attractors
    fall in the same cell.
    """

    size: int
    cells: tuple
    collision: bool = False

    @property
    def key(self):
        return "|".join(f"{h}:{b}" for h, b in self.cells)

    def to_dict(self):
        return {"size": self.size, "cells": [list(c) for c in self.cells], "collision": self.collision,
                "key": self.key}

    @classmethod
    def from_dict(cls, d):
        return cls(d["size"], tuple(tuple(c) for c in d["cells"]), d["collision"])


def _level(x, n):
    return np.clip((np.asarray(x) * n).astype(np.int64), 0, n - 1)


def classify_vowel_system(attractors, height_levels=HEIGHT_LEVELS, backness_levels=BACKNESS_LEVELS):
    """Quantize normalized (F1, F2') attractors into (height, backness) cells."""
    pts = np.atleast_2d(np.asarray(attractors, dtype=float))
    if pts.size == 0:
        raise ValueError("cannot classify an empty vowel system")
    height = _level(pts[:, 0], height_levels)
    backness = (backness_levels - 1) - _level(pts[:, 1], backness_levels)
    cells = sorted(set(zip(height.tolist(), backness.tolist())))
    return VowelSystemSignature(len(pts), tuple(cells), len(cells) < len(pts))


def read_reference(path):
    """Reference structure frequencies from a ``signature,frequency`` CSV, normalized to sum 1."""
    freqs = {}
    with open(path, newline="") as fh:
        reader = csv.DictReader(row for row in fh if not row.startswith("#"))
        if reader.fieldnames is None or not {"signature", "frequency"} <= set(reader.fieldnames):
            raise ValueError(f"{path}: expected header 'signature,frequency'")
        for lineno, row in enumerate(reader, start=2):
            try:
                value = float(row["frequency"])
            except (TypeError, ValueError):
                raise ValueError(f"{path}:{lineno}: frequency is not a number") from None
            if value < 0:
                raise ValueError(f"{path}:{lineno}: negative frequency")
            freqs[row["signature"]] = freqs.get(row["signature"], 0.0) + value
    total = sum(freqs.values())
    if not total > 0:
        raise ValueError(f"{path}: frequencies sum to zero")
    return {k: v / total for k, v in freqs.items()}


def total_variation(p, q):
    keys = set(p) | set(q)
    return 0.5 * sum(abs(p.get(k, 0.0) - q.get(k, 0.0)) for k in keys)


@dataclass
class DistributionReport:
    n_runs: int
    variant: str
    size_histogram: dict
    structure_frequencies: dict
    reference: dict = None
    total_variation: float = None

    @property
    def size_frequencies(self):
        return {k: v / self.n_runs for k, v in self.size_histogram.items()}

    @property
    def mode_size(self):
        return max(sorted(self.size_histogram), key=lambda k: self.size_histogram[k])

    def to_dict(self):
        return {
            "n_runs": self.n_runs,
            "variant": self.variant,
            "size_histogram": {str(k): v for k, v in sorted(self.size_histogram.items())},
            "mode_size": self.mode_size,
            "structure_frequencies": dict(sorted(self.structure_frequencies.items())),
            "reference": None if self.reference is None else dict(sorted(self.reference.items())),
            "total_variation": self.total_variation,
        }

    def csv_rows(self):
        """Rows ``kind,key,observed,reference`` covering sizes and structures."""
        rows = [("size", k, self.size_frequencies[k], "") for k in sorted(self.size_histogram)]
        keys = sorted(set(self.structure_frequencies) | set(self.reference or {}))
        for key in keys:
            ref = "" if self.reference is None else self.reference.get(key, 0.0)
            rows.append(("structure", key, self.structure_frequencies.get(key, 0.0), ref))
        return rows


def aggregate_runs(records, reference=None):
    """Inventory-size histogram and structure frequencies over a batch of runs.

    ``reference`` is a mapping of signature key to frequency, or a path to a
    ``signature,frequency`` CSV.
    """
    records = list(records)
    if not records:
        raise ValueError("no runs to aggregate")
    variants = {r.variant for r in records}
    if len(variants) > 1:
        raise ValueError(f"cannot aggregate runs from different mappings: {sorted(variants)}")
    sizes = Counter(r.cluster_count for r in records)
    signatures = Counter(r.signature.key for r in records if r.signature is not None)
    n_sig = sum(signatures.values())
    structures = {k: v / n_sig for k, v in signatures.items()} if n_sig else {}
    if isinstance(reference, (str, bytes)) or hasattr(reference, "__fspath__"):
        reference = read_reference(reference)
    tv = total_variation(structures, reference) if reference is not None else None
    return DistributionReport(len(records), variants.pop(), dict(sizes), structures, reference, tv)
