"""scikit-learn style front end for the gate search."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils import check_array
from sklearn.utils.validation import check_is_fitted

from lingate.gates import GateSpec, load_gate
from lingate.optimizer import (
    GAConfig,
    PopulationEvaluator,
    Schedule,
    annealed_fitness,
    run_ga,
    temperature,
)
from lingate.unitary import exp_map


def check_gate(gate) -> GateSpec:
    if isinstance(gate, GateSpec):
        return gate
    if isinstance(gate, str) or hasattr(gate, "__fspath__"):
        return load_gate(gate)
    raise TypeError(f"expected a GateSpec, gate name or path, got {type(gate).__name__}")


def check_genotypes(X, dim: int) -> np.ndarray:
    """2-D float array of parameter vectors with ``dim`` columns."""
    X = check_array(X, dtype=np.float64, ensure_2d=False)
    if X.ndim == 1:
        X = X[None]
    if X.shape[1] != dim:
        raise ValueError(f"X has {X.shape[1]} features, expected {dim}")
    return X


class GateSearch(BaseEstimator):
    """Annealed GA search for a heralded linear-optical gate.

    ``fit`` takes the gate (a :class:`GateSpec`, ``"ns"``/``"cz"`` or a
    description file) and stores the run in ``record_``.  After fitting,
    ``transform`` maps parameter vectors to ``(F, S)`` columns and
    ``score_samples`` gives their fitness at the final temperature.

    Parameters left as None fall back to the gate's defaults in
    :data:`lingate.optimizer.GATE_DEFAULTS`.
    """

    def __init__(
        self,
        schedule: str = "inv_sqrt",
        population_size: int | None = None,
        generations: int | None = None,
        tournament_size: int | None = None,
        crossover_rate: float | None = None,
        mutation_rate: float | None = None,
        mutation_sigma: float | None = None,
        elitism: int | None = None,
        init_range: float | None = None,
        blend_alpha: float | None = None,
        mutation_decades: float | None = None,
        seed: int = 0,
        n_jobs: int = 1,
    ):
        self.schedule = schedule
        self.population_size = population_size
        self.generations = generations
        self.tournament_size = tournament_size
        self.crossover_rate = crossover_rate
        self.mutation_rate = mutation_rate
        self.mutation_sigma = mutation_sigma
        self.elitism = elitism
        self.init_range = init_range
        self.blend_alpha = blend_alpha
        self.mutation_decades = mutation_decades
        self.seed = seed
        self.n_jobs = n_jobs

    _GA_FIELDS = (
        "population_size",
        "generations",
        "tournament_size",
        "crossover_rate",
        "mutation_rate",
        "mutation_sigma",
        "elitism",
        "init_range",
        "blend_alpha",
        "mutation_decades",
    )

    def _ga_config(self, gate_name: str) -> GAConfig:
        overrides = {k: getattr(self, k) for k in self._GA_FIELDS if getattr(self, k) is not None}
        return GAConfig.for_gate(gate_name, seed=self.seed, **overrides)

    def fit(self, X, y=None):
        gate = check_gate(X)
        schedule = self.schedule if isinstance(self.schedule, Schedule) else Schedule.parse(self.schedule)
        self.gate_ = gate
        self.schedule_ = schedule
        self.config_ = self._ga_config(gate.name)
        self._evaluator = PopulationEvaluator(gate, self.n_jobs)
        self.record_ = run_ga(gate, self.config_, schedule, evaluator=self._evaluator)
        self.best_x_ = self.record_.best_x
        self.fidelity_ = self.record_.best_F
        self.success_ = self.record_.best_S
        self.unitary_ = exp_map(self.best_x_, gate.u0, self._evaluator.basis)
        self.n_features_in_ = self._evaluator.dim
        return self

    def transform(self, X):
        check_is_fitted(self, "record_")
        X = check_genotypes(X, self.n_features_in_)
        fid, succ = self._evaluator(X)
        return np.column_stack([fid, succ])

    def score_samples(self, X):
        check_is_fitted(self, "record_")
        fid, succ = self.transform(X).T
        final = temperature(self.schedule_, self.config_.generations - 1)
        return annealed_fitness(fid, succ, final)

    def score(self, X=None, y=None):
        """Success probability of the best genotype (or mean fitness of ``X``)."""
        check_is_fitted(self, "record_")
        if X is None or isinstance(X, (GateSpec, str)):
            return self.success_
        return float(np.mean(self.score_samples(X)))
