"""Articulatory to perceptual physics shared by every agent.

Two vocal tracts are available. The abstract one is a fixed random linear
map from a 2-D articulatory square to a 2-D acoustic plane. The realistic
one evaluates de Boer's formant polynomials for lip rounding, tongue height
and tongue position, converts the formants to Bark and reduces them to
(F1, effective F2) with a Carlson-style ear model.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

BARK_C = 3.5
STEPS_PER_SEGMENT = 10

# Coefficients of each formant polynomial. Entry [pk][hk] is the (const, r)
# pair multiplying p**pk * h**hk, so F = sum (a + b*r) * h**hk * p**pk.
_DEBOER = {
    "F1": {
        2: {2: (-392, 392), 1: (596, -668), 0: (-146, 166)},
        1: {2: (348, -348), 1: (-494, 606), 0: (141, -175)},
        0: {2: (340, -72), 1: (-796, 108), 0: (708, -38)},
    },
    "F2": {
        2: {2: (-1200, 1208), 1: (1320, -1328), 0: (118, -158)},
        1: {2: (1864, -1488), 1: (-2644, 1510), 0: (-561, 221)},
        0: {2: (-670, 490), 1: (1355, -697), 0: (1517, -117)},
    },
    "F3": {
        2: {2: (604, -604), 1: (1038, -1178), 0: (246, 566)},
        1: {2: (-1150, 1262), 1: (-1443, 1313), 0: (-317, -483)},
        0: {2: (1130, -836), 1: (-315, 44), 0: (2427, -127)},
    },
    "F4": {
        2: {2: (-1120, 16), 1: (1696, -180), 0: (500, 522)},
        1: {2: (-140, 240), 1: (-578, 214), 0: (-692, -419)},
        0: {2: (1480, -602), 1: (-1220, 289), 0: (3678, -178)},
    },
}


class ConfigurationError(ValueError):
    """A mapping is used in a state it does not support."""


def interpolate_trajectory(targets, steps_per_segment=STEPS_PER_SEGMENT):
    """Piecewise-linear articulatory trajectory through 2 to 4 targets.

    The result starts on the first target and adds ``steps_per_segment``
    evenly spaced points per segment, the last of which is the next target.
    """
    targets = np.asarray(targets, dtype=float)
    if targets.ndim != 2 or not 2 <= len(targets) <= 4:
        raise ValueError(f"need 2 to 4 articulatory targets, got {len(targets)}")
    frac = np.arange(1, steps_per_segment + 1) / steps_per_segment
    starts, ends = targets[:-1], targets[1:]
    segments = starts[:, None, :] + frac[None, :, None] * (ends - starts)[:, None, :]
    # Exact endpoints, independent of rounding in the interpolation.
    segments[:, -1, :] = ends
    return np.concatenate([targets[:1], segments.reshape(-1, targets.shape[1])])


def deboer_formants(ar):
    """First four formants in Hz for articulations ``(r, h, p)`` in [0,1]^3.

    Accepts a single triplet or an (n, 3) array; returns shape (4,) or (n, 4).
    """
    ar = np.asarray(ar, dtype=float)
    if ar.shape[-1] != 3:
        raise ValueError("realistic articulations are (rounding, height, position) triplets")
    if np.any(ar < 0) or np.any(ar > 1):
        raise ValueError("articulatory parameters must lie in [0, 1]")
    r, h, p = ar[..., 0], ar[..., 1], ar[..., 2]
    hpow = (np.ones_like(h), h, h * h)
    ppow = (np.ones_like(p), p, p * p)
    out = []
    for name in ("F1", "F2", "F3", "F4"):
        total = np.zeros_like(r)
        for pk, by_h in _DEBOER[name].items():
            for hk, (a, b) in by_h.items():
                total = total + (a + b * r) * hpow[hk] * ppow[pk]
        out.append(total)
    return np.stack(out, axis=-1)


def hz_to_bark(f):
    """Bark value of a frequency in Hz, using 7 * asinh(f / 650)."""
    f = np.asarray(f, dtype=float)
    if np.any(f < 0):
        raise ValueError("frequencies must be non-negative")
    return 7.0 * np.arcsinh(f / 650.0)


def effective_second_formant(bark_formants, c=BARK_C):
    """Perceptual F2' from formants F1..F4 in Bark.

    When F3 is far from F2 the ear hears F2 alone. Otherwise F3 (and, if
    close enough, F4) are merged into a weighted centre of gravity. Accepts
    shape (4,) or (n, 4).
    """
    F = np.asarray(bark_formants, dtype=float)
    f2, f3, f4 = F[..., 1], F[..., 2], F[..., 3]
    d32 = f3 - f2
    d43 = f4 - f3
    d42 = f4 - f2
    w1 = (c - d32) / c
    with np.errstate(divide="ignore", invalid="ignore"):
        w2 = (d43 - d32) / d42
    case1 = d32 > c
    case2 = ~case1 & (d42 >= c)
    case3 = ~case1 & ~case2 & (d32 <= d43)
    case4 = ~case1 & ~case2 & ~case3 & (d32 >= d43)
    if not np.all(case1 | case2 | case3 | case4):
        raise RuntimeError("effective second formant: input matched no case")
    out = np.select(
        [case1, case2, case3, case4],
        [
            f2,
            ((2 - w1) * f2 + w1 * f3) / 2,
            (w2 * f2 + (2 - w2) * f3) / 2 - 1,
            ((2 + w2) * f3 - w2 * f4) / 2 - 1,
        ],
    )
    return out if out.ndim else float(out)


def _deboer_percept(ar):
    bark = hz_to_bark(deboer_formants(ar))
    return np.stack([bark[..., 0], effective_second_formant(bark)], axis=-1)


@dataclass
class MappingSpec:
    """The vocal tract and ear shared by a whole population.

    Attributes:
        variant: ``"abstract"`` or ``"deboer"``.
        coefficients: 2x2 abstract mapping; row k holds the pair applied to
            (d1, d2) for acoustic dimension k.
        lower, upper: per-dimension bounds used to normalize percepts into
            the unit square. Set by ``abstract`` directly and by
            ``calibrate_perceptual_bounds`` for the realistic tract.
    """

    variant: str = "abstract"
    coefficients: np.ndarray = None
    lower: np.ndarray = None
    upper: np.ndarray = None
    c: float = BARK_C
    calibration_resolution: int = field(default=None)

    def __post_init__(self):
        if self.variant not in ("abstract", "deboer"):
            raise ValueError(f"unknown mapping variant {self.variant!r}")
        if self.variant == "abstract":
            if self.coefficients is None:
                raise ValueError("the abstract mapping needs its coefficient matrix")
            self.coefficients = np.asarray(self.coefficients, dtype=float).reshape(2, 2)
            if self.lower is None:
                self.lower = np.zeros(2)
                self.upper = self.coefficients.sum(axis=1) / 2
        for name in ("lower", "upper"):
            value = getattr(self, name)
            if value is not None:
                setattr(self, name, np.asarray(value, dtype=float))

    @classmethod
    def abstract(cls, rng):
        """A fresh random linear tract, coefficients uniform in [0, 1]."""
        return cls("abstract", coefficients=rng.random((2, 2)))

    @classmethod
    def deboer(cls, grid_resolution=21):
        return calibrate_perceptual_bounds(cls("deboer"), grid_resolution)

    @property
    def articulatory_dim(self):
        return 2 if self.variant == "abstract" else 3

    @property
    def calibrated(self):
        return self.lower is not None and self.upper is not None

    def to_dict(self):
        return {
            "variant": self.variant,
            "coefficients": None if self.coefficients is None else self.coefficients.tolist(),
            "lower": None if self.lower is None else self.lower.tolist(),
            "upper": None if self.upper is None else self.upper.tolist(),
            "c": self.c,
            "calibration_resolution": self.calibration_resolution,
        }

    @classmethod
    def from_dict(cls, data):
        return cls(**data)


def abstract_map(ar, spec):
    """Acoustic image ``(r_k1*d1 + r_k2*d2) / 2`` for each output dimension k."""
    ar = np.asarray(ar, dtype=float)
    return ar @ spec.coefficients.T / 2.0


def raw_percept(ar, spec):
    """Unnormalized percept: the acoustic image, or (F1, F2') in Bark."""
    if spec.variant == "abstract":
        return abstract_map(ar, spec)
    return _deboer_percept(ar)


def to_perceptual(ar, spec):
    """Percepts in the unit square for one articulation or an (n, D) array."""
    if not spec.calibrated:
        raise ConfigurationError("realistic mapping used before calibrate_perceptual_bounds")
    raw = raw_percept(ar, spec)
    span = spec.upper - spec.lower
    span = np.where(span > 0, span, 1.0)
    return np.clip((raw - spec.lower) / span, 0.0, 1.0)


def calibrate_perceptual_bounds(spec, grid_resolution=21):
    """Record the per-dimension range of realistic percepts on an (r, h, p) grid."""
    if spec.variant != "deboer":
        raise ConfigurationError("only the realistic mapping needs calibration")
    axis = np.linspace(0.0, 1.0, grid_resolution)
    mesh = np.stack(np.meshgrid(axis, axis, axis, indexing="ij"), axis=-1).reshape(-1, 3)
    raw = _deboer_percept(mesh)
    return MappingSpec(
        "deboer",
        lower=raw.min(axis=0),
        upper=raw.max(axis=0),
        c=spec.c,
        calibration_resolution=grid_resolution,
    )
