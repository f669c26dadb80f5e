"""Topological neural maps with Gaussian tuning.

A map is a set of neurons, each with a preferred vector in the unit
hypercube. Stimuli activate neurons through an isotropic Gaussian of width
``sigma``; preferred vectors drift toward what activates them. Re-entering
the population-vector readout as a new stimulus gives a recurrent
coding/decoding loop whose fixed points act as category prototypes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.sparse.csgraph import connected_components
from scipy.spatial.distance import pdist, squareform

from ._kernels import decode_points

SQRT_2PI = np.sqrt(2.0 * np.pi)


class DimensionError(ValueError):
    """A point does not match the dimensionality of the map."""


class DegenerateActivationError(ValueError):
    """An activation pattern sums to zero, so it cannot be decoded."""


class NonConvergenceError(RuntimeError):
    """The coding/decoding recurrence did not reach a fixed point."""

    def __init__(self, message, last_iterate):
        super().__init__(message)
        self.last_iterate = last_iterate


@dataclass
class NeuralMap:
    """A map of neurons sharing one Gaussian tuning width.

    Attributes:
        neurons: (N, D) array of preferred vectors in [0, 1]^D.
        sigma: Tuning width, > 0.
        learning_rate: Plasticity gain applied to activations.
    """

    neurons: np.ndarray
    sigma: float = 0.05
    learning_rate: float = 0.001

    def __post_init__(self):
        self.neurons = np.array(self.neurons, dtype=float, ndmin=2)
        if self.sigma <= 0:
            raise ValueError(f"sigma must be > 0, got {self.sigma}")

    @classmethod
    def uniform(cls, n, dim, rng, sigma=0.05, learning_rate=0.001):
        return cls(rng.random((n, dim)), sigma=sigma, learning_rate=learning_rate)

    @property
    def size(self):
        return self.neurons.shape[0]

    @property
    def dim(self):
        return self.neurons.shape[1]

    @property
    def peak(self):
        """Activation of a neuron whose preferred vector equals the stimulus."""
        return 1.0 / (SQRT_2PI * self.sigma)

    def copy(self):
        return NeuralMap(self.neurons.copy(), self.sigma, self.learning_rate)

    def _check_point(self, s):
        s = np.asarray(s, dtype=float)
        if s.shape != (self.dim,):
            raise DimensionError(f"expected a point of dimension {self.dim}, got shape {s.shape}")
        return s

    def activate(self, s):
        """Gaussian response of every neuron to stimulus ``s``.

        The response depends on the Euclidean distance between ``s`` and the
        preferred vector, so a neuron fires hardest when ``s`` sits exactly
        on its preferred vector.
        """
        s = self._check_point(s)
        diff = self.neurons - s
        d2 = np.einsum("ij,ij->i", diff, diff)
        return self.peak * np.exp(-0.5 * d2 / self.sigma**2)

    def _pull(self, targets, g):
        # Gain is capped at 1 so an update never overshoots its target.
        gain = np.minimum(self.learning_rate * np.asarray(g, dtype=float), 1.0)
        self.neurons += gain[:, None] * (targets - self.neurons)

    def adapt_toward_stimulus(self, s, g):
        """Move every preferred vector toward ``s`` in proportion to its activation."""
        s = self._check_point(s)
        self._pull(s, g)

    def adapt_toward_winner(self, g):
        """Move every preferred vector toward the most active neuron's vector.

        Ties resolve to the lowest index. An all-zero pattern leaves the map
        untouched. Returns the winner index, or None for a silent pattern.
        """
        g = np.asarray(g, dtype=float)
        if len(g) != self.size:
            raise DimensionError(f"activation pattern has {len(g)} entries for {self.size} neurons")
        if not np.any(g > 0):
            return None
        m = int(np.argmax(g))
        self._pull(self.neurons[m].copy(), g)
        return m

    def population_vector(self, g):
        """Activity-weighted mean of the preferred vectors."""
        g = np.asarray(g, dtype=float)
        total = g.sum()
        if not total > 0:
            raise DegenerateActivationError("activation pattern sums to zero")
        return g @ self.neurons / total

    def decode_step(self, points):
        """One coding/decoding pass for each row of ``points``.

        Equivalent to ``population_vector(activate(x))`` per row, but the
        Gaussian weights are taken relative to the nearest neuron, so stimuli
        far from every neuron still decode when raw activations underflow.
        Neurons whose relative weight is below exp(-40) are left out.
        """
        points = np.atleast_2d(np.asarray(points, dtype=float))
        if points.shape[1] != self.dim:
            raise DimensionError(f"expected points of dimension {self.dim}, got {points.shape[1]}")
        return decode_points(np.ascontiguousarray(points), np.ascontiguousarray(self.neurons), float(self.sigma))

    def categorize_many(self, starts, tol=1e-6, max_iter=1000):
        """Iterate the coding/decoding loop from each start to its fixed point."""
        x = np.atleast_2d(np.array(starts, dtype=float))
        active = np.arange(len(x))
        for _ in range(max_iter):
            nxt = self.decode_step(x[active])
            moved = np.linalg.norm(nxt - x[active], axis=1)
            x[active] = nxt
            active = active[moved >= tol]
            if active.size == 0:
                return x
        raise NonConvergenceError(
            f"{active.size} of {len(x)} starts did not converge in {max_iter} iterations", x
        )

    def categorize(self, s, tol=1e-6, max_iter=1000):
        """Category prototype reached from stimulus ``s``."""
        s = self._check_point(s)
        return self.categorize_many(s[None, :], tol=tol, max_iter=max_iter)[0]

    def attractor_field(self, grid_resolution=25):
        """Grid points over [0,1]^D paired with their one-step decoded images.

        Returns ``(points, images)``, both of shape (resolution**D, D), in
        row-major grid order (last coordinate varies fastest).
        """
        if grid_resolution < 2:
            raise ValueError("grid_resolution must be >= 2")
        points = grid(self.dim, grid_resolution)
        return points, self.decode_step(points)

    def extract_attractors(self, grid_resolution=25, merge_tol=0.02, tol=1e-6, max_iter=10_000):
        """Distinct fixed points of the recurrence, seeded from a regular grid.

        Fixed points closer than ``merge_tol`` are joined (single linkage)
        and represented by their mean. Rows are sorted lexicographically.
        The iteration cap is higher than for a single ``categorize`` call:
        grid starts on a density shoulder drift for a few thousand steps.
        """
        fixed = self.categorize_many(grid(self.dim, grid_resolution), tol=tol, max_iter=max_iter)
        return merge_points(fixed, merge_tol)


def grid(dim, resolution):
    axis = np.linspace(0.0, 1.0, resolution)
    mesh = np.meshgrid(*([axis] * dim), indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=1)


def merge_points(points, merge_tol):
    """Collapse points into single-linkage groups at distance ``merge_tol``."""
    points = np.atleast_2d(points)
    if len(points) == 1:
        return points.copy()
    adjacency = squareform(pdist(points)) < merge_tol
    n_groups, labels = connected_components(adjacency, directed=False)
    centers = np.array([points[labels == k].mean(axis=0) for k in range(n_groups)])
    order = np.lexsort(centers.T[::-1])
    return centers[order]
