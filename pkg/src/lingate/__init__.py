"""Annealed genetic search for heralded linear-optical quantum gates."""

from lingate.estimator import GateSearch
from lingate.fock import (
    FockBasis,
    Projector,
    TransformationMatrix,
    enumerate_basis,
    permanent,
    project_transformation,
    transition_amplitude,
)
from lingate.gates import GateSpec, cz_spec, load_gate, ns_closed_form, ns_spec
from lingate.metrics import (
    GateMetrics,
    fidelity,
    fitness,
    gate_metrics,
    norm_bounds,
    success_probability,
)
from lingate.optimizer import (
    GAConfig,
    RunRecord,
    Schedule,
    crossover,
    evaluate,
    mutate,
    run_ga,
    temperature,
)
from lingate.unitary import GeneratorBasis, exp_map, standard_generators

__all__ = [
    "FockBasis",
    "GAConfig",
    "GateMetrics",
    "GateSearch",
    "GateSpec",
    "GeneratorBasis",
    "Projector",
    "RunRecord",
    "Schedule",
    "TransformationMatrix",
    "crossover",
    "cz_spec",
    "enumerate_basis",
    "evaluate",
    "exp_map",
    "fidelity",
    "fitness",
    "gate_metrics",
    "load_gate",
    "mutate",
    "norm_bounds",
    "ns_closed_form",
    "ns_spec",
    "permanent",
    "project_transformation",
    "run_ga",
    "standard_generators",
    "success_probability",
    "temperature",
    "transition_amplitude",
]
