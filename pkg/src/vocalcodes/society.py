"""The interaction loop and the record of a run."""

from __future__ import annotations

import hashlib
import json
import time
from dataclasses import asdict, dataclass, fields

import numpy as np

from . import __version__
from .agent import MOTOR_GAINS, MOTOR_PROPAGATIONS, Agent, WeightMatrix
from .analysis import (
    EntropyTrace,
    VowelSystemSignature,
    classify_vowel_system,
    detect_plateau,
    medoid_index,
    pairwise_hausdorff,
    perceptual_attractor_sets,
    preferred_vector_entropy,
)
from .neural_map import NeuralMap
from .vocal_tract import MappingSpec, to_perceptual

RNG_NAME = "numpy.Philox"
MAPPINGS = ("abstract", "deboer")
PERCEPTUAL_INITS = ("reachable", "uniform")


@dataclass
class SimulationConfig:
    """Every parameter of a run. ``seed`` plus these fields reproduce it exactly."""

    seed: int
    n_agents: int = 20
    neurons_per_map: int = 500
    sigma: float = 0.05
    learning_rate: float = 0.017
    hebb_rate: float = 0.001
    mean_decay: float = 0.99
    initial_weight_scale: float = 0.001
    mapping: str = "abstract"
    steps: int = 2000
    measurement_interval: int = 50
    grid_resolution: int = 25
    merge_tol: float = 0.02
    motor_propagation: str = "weighted_sum"
    motor_gain: str = "propagated"
    perceptual_init: str = "reachable"
    calibration_resolution: int = 21
    stop_at_plateau: bool = False
    plateau_window: int = 500
    plateau_eps: float = 0.01
    rng: str = RNG_NAME

    def __post_init__(self):
        self.validate()

    def validate(self):
        def need(cond, message):
            if not cond:
                raise ValueError(message)

        need(isinstance(self.seed, (int, np.integer)) and self.seed >= 0, "seed must be a non-negative integer")
        need(self.n_agents >= 1, "n_agents must be >= 1")
        need(self.neurons_per_map >= 1, "neurons_per_map must be >= 1")
        need(self.steps >= 0, "steps must be >= 0")
        need(self.sigma > 0, "sigma must be > 0")
        need(self.learning_rate >= 0, "learning_rate must be >= 0")
        need(0 <= self.mean_decay <= 1, "mean_decay must lie in [0, 1]")
        need(self.measurement_interval >= 1, "measurement_interval must be >= 1")
        need(self.grid_resolution >= 2, "grid_resolution must be >= 2")
        need(self.merge_tol >= 0, "merge_tol must be >= 0")
        need(self.mapping in MAPPINGS, f"mapping must be one of {MAPPINGS}")
        need(self.motor_propagation in MOTOR_PROPAGATIONS, f"motor_propagation must be one of {MOTOR_PROPAGATIONS}")
        need(self.motor_gain in MOTOR_GAINS, f"motor_gain must be one of {MOTOR_GAINS}")
        need(self.perceptual_init in PERCEPTUAL_INITS, f"perceptual_init must be one of {PERCEPTUAL_INITS}")
        need(self.plateau_window >= 1 and self.plateau_eps >= 0, "plateau window and eps must be positive")
        need(self.rng == RNG_NAME, f"only the {RNG_NAME} generator is supported")

    @classmethod
    def field_types(cls):
        return {f.name: f.type for f in fields(cls)}

    def to_dict(self):
        return asdict(self)

    def replace(self, **changes):
        return SimulationConfig(**{**self.to_dict(), **changes})

    def hash(self):
        canonical = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode()).hexdigest()[:16]


def make_rng(seed):
    return np.random.Generator(np.random.Philox(seed))


class Society:
    """A seeded population sharing one vocal tract.

    All randomness comes from one Philox stream, drawn in this order: the
    abstract mapping coefficients, then each agent's motor map, perceptual
    map and weights, then per step the speaker, the hearer, the number of
    targets and the target indices.
    """

    def __init__(self, config):
        self.config = config
        self.rng = make_rng(config.seed)
        if config.mapping == "abstract":
            self.mapping = MappingSpec.abstract(self.rng)
        else:
            self.mapping = MappingSpec.deboer(config.calibration_resolution)
        self.agents = [self._new_agent(i) for i in range(config.n_agents)]
        self.step_counter = 0

    def _new_agent(self, agent_id):
        c = self.config
        n, dim = c.neurons_per_map, self.mapping.articulatory_dim
        motor = NeuralMap.uniform(n, dim, self.rng, c.sigma, c.learning_rate)
        if c.perceptual_init == "reachable":
            percepts = to_perceptual(self.rng.random((n, dim)), self.mapping)
        else:
            percepts = self.rng.random((n, 2))
        perceptual = NeuralMap(percepts, c.sigma, c.learning_rate)
        weights = WeightMatrix.random(
            n, n, self.rng, c.initial_weight_scale, c.hebb_rate, c.mean_decay
        )
        return Agent(agent_id, motor, perceptual, weights, c.motor_propagation, c.motor_gain)

    def perceptual_maps(self):
        return [a.perceptual_map for a in self.agents]

    def entropy(self):
        return preferred_vector_entropy(self.perceptual_maps())

    def step(self):
        """One production by a random speaker, heard by itself and one other agent."""
        n = len(self.agents)
        speaker = int(self.rng.integers(n))
        hearer = None
        if n > 1:
            hearer = int(self.rng.integers(n - 1))
            hearer += hearer >= speaker
        voc = self.agents[speaker].produce_vocalization(self.mapping, self.rng)
        self.agents[speaker].perceive(voc, is_own=True)
        if hearer is not None:
            self.agents[hearer].perceive(voc, is_own=False)
        self.step_counter += 1
        return speaker, hearer

    def run(self, steps=None, hooks=()):
        """Advance ``steps`` interactions (default: the configured count) and measure."""
        c = self.config
        steps = c.steps if steps is None else steps
        start = time.perf_counter()
        trace = EntropyTrace()
        plateau = None

        def measure():
            nonlocal plateau
            trace.append(self.step_counter, self.entropy())
            for hook in hooks:
                hook(self, self.step_counter)
            if plateau is None:
                plateau = detect_plateau(trace, c.plateau_window, c.plateau_eps)

        measure()
        end = self.step_counter + steps
        while self.step_counter < end:
            if c.stop_at_plateau and plateau is not None:
                break
            self.step()
            if self.step_counter % c.measurement_interval == 0:
                measure()
        if trace.steps[-1] != self.step_counter:
            measure()
        return self.record(trace, plateau, time.perf_counter() - start)

    def record(self, trace, plateau, wall_clock):
        c = self.config
        sets = perceptual_attractor_sets(self.agents, c.grid_resolution, c.merge_tol)
        medoid = medoid_index(sets)
        code = sets[medoid]
        shared = float(pairwise_hausdorff(sets).max()) if len(sets) > 1 else 0.0
        signature = classify_vowel_system(code) if c.mapping == "deboer" else None
        return RunRecord(
            config=c.to_dict(),
            seed=c.seed,
            variant=c.mapping,
            steps_run=self.step_counter,
            entropy=trace,
            attractors=sets,
            medoid_agent=self.agents[medoid].id,
            cluster_count=len(code),
            signature=signature,
            plateau_step=plateau,
            shared_code_distance=shared,
            mapping=self.mapping.to_dict(),
            wall_clock_seconds=wall_clock,
        )


def simulate(config, hooks=()):
    """Build a society from ``config`` and run it to completion."""
    return Society(config).run(hooks=hooks)


@dataclass
class RunRecord:
    """Everything measured in one run.

    ``cluster_count`` and ``signature`` describe the population's code,
    taken as the attractor set of the medoid agent (the one closest to all
    others in Hausdorff distance).
    """

    config: dict
    seed: int
    variant: str
    steps_run: int
    entropy: EntropyTrace
    attractors: list
    medoid_agent: int
    cluster_count: int
    signature: VowelSystemSignature
    plateau_step: int
    shared_code_distance: float
    mapping: dict
    wall_clock_seconds: float = 0.0

    @property
    def code(self):
        return self.attractors[self.medoid_agent]

    @property
    def entropy_drop(self):
        return self.entropy.initial - self.entropy.final

    @property
    def attractor_counts(self):
        return [len(a) for a in self.attractors]

    def to_dict(self, include_wall_clock=True):
        out = {
            "tool": "vocalcodes",
            "version": __version__,
            "config_hash": SimulationConfig(**self.config).hash(),
            "config": self.config,
            "seed": self.seed,
            "variant": self.variant,
            "steps_run": self.steps_run,
            "entropy": {"step": self.entropy.steps, "bits": self.entropy.bits},
            "plateau_step": self.plateau_step,
            "medoid_agent": self.medoid_agent,
            "cluster_count": self.cluster_count,
            "attractors": {str(i): a.tolist() for i, a in enumerate(self.attractors)},
            "shared_code_distance": self.shared_code_distance,
            "signature": None if self.signature is None else self.signature.to_dict(),
            "mapping": self.mapping,
        }
        if include_wall_clock:
            out["wall_clock_seconds"] = self.wall_clock_seconds
        return out

    def to_json(self, include_wall_clock=True):
        return json.dumps(self.to_dict(include_wall_clock), sort_keys=True, indent=1)

    @classmethod
    def from_dict(cls, d):
        trace = EntropyTrace(list(d["entropy"]["step"]), list(d["entropy"]["bits"]))
        attractors = [
            np.array(d["attractors"][k], dtype=float).reshape(-1, 2)
            for k in sorted(d["attractors"], key=int)
        ]
        sig = d.get("signature")
        return cls(
            config=d["config"],
            seed=d["seed"],
            variant=d["variant"],
            steps_run=d["steps_run"],
            entropy=trace,
            attractors=attractors,
            medoid_agent=d["medoid_agent"],
            cluster_count=d["cluster_count"],
            signature=None if sig is None else VowelSystemSignature.from_dict(sig),
            plateau_step=d["plateau_step"],
            shared_code_distance=d["shared_code_distance"],
            mapping=d["mapping"],
            wall_clock_seconds=d.get("wall_clock_seconds", 0.0),
        )

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))
