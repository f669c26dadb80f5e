"""A babbling agent: motor map, perceptual map and the weights that link them."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._kernels import GAIN_PROPAGATED, GAIN_TUNED, PROP_EXPONENTIAL, PROP_WEIGHTED_SUM, perceive_trace
from .neural_map import NeuralMap
from .vocal_tract import STEPS_PER_SEGMENT, interpolate_trajectory, to_perceptual

MOTOR_PROPAGATIONS = ("weighted_sum", "paper_exp")
MOTOR_GAINS = ("propagated", "tuned")
# Single precision halves the memory traffic of the per-point propagation.
WEIGHT_DTYPE = np.float32


@dataclass
class WeightMatrix:
    """Perceptual-to-motor weights plus the running means the Hebbian rule centres on."""

    w: np.ndarray
    running_mean_percept: np.ndarray
    running_mean_motor: np.ndarray
    hebb_rate: float = 0.001
    mean_decay: float = 0.99

    def __post_init__(self):
        self.w = np.ascontiguousarray(self.w, dtype=WEIGHT_DTYPE)
        self.running_mean_percept = np.asarray(self.running_mean_percept, dtype=float)
        self.running_mean_motor = np.asarray(self.running_mean_motor, dtype=float)

    @classmethod
    def random(cls, n_percept, n_motor, rng, scale=0.001, hebb_rate=0.001, mean_decay=0.99):
        return cls(
            (rng.random((n_percept, n_motor)) * scale).astype(WEIGHT_DTYPE),
            np.zeros(n_percept),
            np.zeros(n_motor),
            hebb_rate,
            mean_decay,
        )

    @property
    def shape(self):
        return self.w.shape

    def copy(self):
        return WeightMatrix(
            self.w.copy(),
            self.running_mean_percept.copy(),
            self.running_mean_motor.copy(),
            self.hebb_rate,
            self.mean_decay,
        )


@dataclass
class Vocalization:
    """One utterance.

    ``target_of_point[t]`` is the position (0..k-1) of the commanded target
    that trace point t lands on, or -1 for an interpolated point.
    """

    chosen_motor_neurons: np.ndarray
    articulatory_trajectory: np.ndarray
    perceptual_trace: np.ndarray
    target_of_point: np.ndarray

    @property
    def target_point_flags(self):
        return self.target_of_point >= 0

    def __len__(self):
        return len(self.perceptual_trace)


def target_positions(k, steps_per_segment=STEPS_PER_SEGMENT):
    """Per trace point, the commanded target it sits on or -1."""
    out = np.full(1 + steps_per_segment * (k - 1), -1, dtype=np.int64)
    out[::steps_per_segment] = np.arange(k)
    return out


class Agent:
    """Two coupled maps and the weights between them.

    ``motor_propagation`` selects how perceptual activity drives the motor
    map: ``weighted_sum`` (max-normalized sum of weighted inputs) or
    ``paper_exp`` (``exp(-sum_i w_ij g_i / sigma**2)``). ``motor_gain``
    selects the gains of the motor winner update: ``propagated`` uses the
    propagated pattern directly, ``tuned`` uses the motor map's own Gaussian
    response to the winner's vector.
    """

    def __init__(
        self,
        agent_id,
        motor_map,
        perceptual_map,
        weights,
        motor_propagation="weighted_sum",
        motor_gain="propagated",
    ):
        if motor_propagation not in MOTOR_PROPAGATIONS:
            raise ValueError(f"unknown motor_propagation {motor_propagation!r}")
        if motor_gain not in MOTOR_GAINS:
            raise ValueError(f"unknown motor_gain {motor_gain!r}")
        if weights.shape != (perceptual_map.size, motor_map.size):
            raise ValueError(
                f"weights {weights.shape} do not match maps "
                f"({perceptual_map.size}, {motor_map.size})"
            )
        self.id = agent_id
        self.motor_map = motor_map
        self.perceptual_map = perceptual_map
        self.weights = weights
        self.motor_propagation = motor_propagation
        self.motor_gain = motor_gain

    def copy(self):
        return Agent(
            self.id,
            self.motor_map.copy(),
            self.perceptual_map.copy(),
            self.weights.copy(),
            self.motor_propagation,
            self.motor_gain,
        )

    def produce_vocalization(self, mapping, rng):
        """Babble 2 to 4 randomly chosen motor targets. Leaves the agent unchanged."""
        k = int(rng.integers(2, 5))
        chosen = rng.integers(0, self.motor_map.size, size=k)
        trajectory = interpolate_trajectory(self.motor_map.neurons[chosen])
        return Vocalization(
            chosen,
            trajectory,
            to_perceptual(trajectory, mapping),
            target_positions(k),
        )

    def propagate_to_motor(self, g_percept):
        """Motor activation driven by a perceptual activation pattern."""
        raw = np.asarray(g_percept, dtype=WEIGHT_DTYPE) @ self.weights.w
        if self.motor_propagation == "paper_exp":
            return np.exp(-raw / WEIGHT_DTYPE(self.perceptual_map.sigma**2))
        top = raw.max()
        if not top > 0:
            return np.zeros_like(raw)
        return np.maximum(raw, 0.0) / top

    def hebbian_update(self, g_percept, g_motor_direct):
        """Correlation update of all weights, then refresh of the running means."""
        wm = self.weights
        dp = g_percept - wm.running_mean_percept
        dm = g_motor_direct - wm.running_mean_motor
        wm.w += (wm.hebb_rate * np.outer(dp, dm)).astype(WEIGHT_DTYPE)
        a = wm.mean_decay
        wm.running_mean_percept *= a
        wm.running_mean_percept += (1 - a) * g_percept
        wm.running_mean_motor *= a
        wm.running_mean_motor += (1 - a) * g_motor_direct

    def _hebbian_at_target(self, g_percept, motor_index):
        # Same as hebbian_update with a one-hot motor pattern, without the
        # dense outer product against e_c.
        wm = self.weights
        c2 = wm.hebb_rate
        dp = (c2 * (g_percept - wm.running_mean_percept)).astype(WEIGHT_DTYPE)
        wm.w -= np.outer(dp, wm.running_mean_motor.astype(WEIGHT_DTYPE))
        wm.w[:, motor_index] += dp
        a = wm.mean_decay
        wm.running_mean_percept *= a
        wm.running_mean_percept += (1 - a) * g_percept
        wm.running_mean_motor *= a
        wm.running_mean_motor[motor_index] += 1 - a

    def _adapt_motor(self, g_motor):
        motor = self.motor_map
        if self.motor_gain == "propagated":
            motor.adapt_toward_winner(g_motor)
            return
        if not np.any(g_motor > 0):
            return
        m = int(np.argmax(g_motor))
        motor.adapt_toward_winner(motor.activate(motor.neurons[m]))

    def perceive(self, vocalization, is_own):
        """Run every trace point through the learning cascade, in order.

        For each point: perceptual activation and plasticity, the Hebbian
        update when this is the agent's own commanded target, propagation
        to the motor map and motor winner adaptation.
        """
        wm = self.weights
        pm, mm = self.perceptual_map, self.motor_map
        perceive_trace(
            pm.neurons, mm.neurons, wm.w, wm.running_mean_percept, wm.running_mean_motor,
            np.ascontiguousarray(vocalization.perceptual_trace, dtype=float),
            vocalization.target_of_point, np.asarray(vocalization.chosen_motor_neurons, dtype=np.int64),
            bool(is_own), pm.sigma, pm.learning_rate, mm.sigma, mm.learning_rate,
            wm.hebb_rate, wm.mean_decay,
            PROP_EXPONENTIAL if self.motor_propagation == "paper_exp" else PROP_WEIGHTED_SUM,
            GAIN_PROPAGATED if self.motor_gain == "propagated" else GAIN_TUNED,
        )

    def perceive_reference(self, vocalization, is_own):
        """Same as ``perceive``, built from the public numpy operations."""
        pmap = self.perceptual_map
        chosen = vocalization.chosen_motor_neurons
        for s, pos in zip(vocalization.perceptual_trace, vocalization.target_of_point):
            g = pmap.activate(s)
            pmap.adapt_toward_stimulus(s, g)
            if is_own and pos >= 0:
                self._hebbian_at_target(g, int(chosen[pos]))
            self._adapt_motor(self.propagate_to_motor(g))

    def to_dict(self):
        return {
            "id": self.id,
            "motor_propagation": self.motor_propagation,
            "motor_gain": self.motor_gain,
            "motor_map": _map_to_dict(self.motor_map),
            "perceptual_map": _map_to_dict(self.perceptual_map),
            "weights": {
                "w": self.weights.w.tolist(),
                "running_mean_percept": self.weights.running_mean_percept.tolist(),
                "running_mean_motor": self.weights.running_mean_motor.tolist(),
                "hebb_rate": self.weights.hebb_rate,
                "mean_decay": self.weights.mean_decay,
            },
        }

    @classmethod
    def from_dict(cls, data):
        wd = data["weights"]
        weights = WeightMatrix(
            np.array(wd["w"], dtype=WEIGHT_DTYPE),
            np.array(wd["running_mean_percept"], dtype=float),
            np.array(wd["running_mean_motor"], dtype=float),
            wd["hebb_rate"],
            wd["mean_decay"],
        )
        return cls(
            data["id"],
            _map_from_dict(data["motor_map"]),
            _map_from_dict(data["perceptual_map"]),
            weights,
            data.get("motor_propagation", "weighted_sum"),
            data.get("motor_gain", "propagated"),
        )


def _map_to_dict(m):
    return {"neurons": m.neurons.tolist(), "sigma": m.sigma, "learning_rate": m.learning_rate}


def _map_from_dict(d):
    return NeuralMap(np.array(d["neurons"], dtype=float), d["sigma"], d["learning_rate"])


def snapshot(agents):
    """JSON-ready state of a population, keyed by agent id."""
    return {"agents": {str(a.id): a.to_dict() for a in agents}}


def agents_from_snapshot(data):
    return {key: Agent.from_dict(value) for key, value in data["agents"].items()}
