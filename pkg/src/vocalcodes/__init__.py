"""Self-organization of shared vowel-like codes in a population of babbling agents."""

__version__ = "0.1.0"

from .agent import Agent, Vocalization, WeightMatrix
from .analysis import DistributionReport, EntropyTrace, VowelSystemSignature
from .neural_map import NeuralMap
from .society import RunRecord, SimulationConfig, Society, simulate
from .vocal_tract import MappingSpec

__all__ = [
    "Agent",
    "DistributionReport",
    "EntropyTrace",
    "MappingSpec",
    "NeuralMap",
    "RunRecord",
    "SimulationConfig",
    "Society",
    "Vocalization",
    "VowelSystemSignature",
    "WeightMatrix",
    "__version__",
    "simulate",
]
