import math

import numpy as np
import pytest

from lingate.gates import cz_spec, ns_spec
from lingate.optimizer import (
    GAConfig,
    PopulationEvaluator,
    Schedule,
    annealed_fitness,
    crossover,
    evaluate,
    mutate,
    run_ga,
    selection_key,
    temperature,
)


class TestSchedule:
    def test_inv_sqrt(self):
        assert temperature(Schedule("inv_sqrt"), 4) == pytest.approx(0.5)
        assert temperature(Schedule("inv_sqrt"), 0) == 1.0

    def test_arctan(self):
        assert temperature(Schedule("arctan"), 0) == pytest.approx(math.pi / 2)
        assert temperature(Schedule("arctan"), 0) == pytest.approx(1.5708, abs=1e-4)

    def test_constant(self):
        for t in (0, 7, 10**6):
            assert temperature(Schedule("constant", 1e-5), t) == 1e-5

    def test_none(self):
        assert temperature(Schedule("none"), 3) is None

    def test_floor(self):
        assert temperature(Schedule("arctan", floor=1e-9), 10**12) == 1e-9
        assert temperature(Schedule("constant", 1e-12), 0) == 1e-9

    @pytest.mark.parametrize("text,kind,t0", [
        ("inv_sqrt", "inv_sqrt", None), ("ARCTAN", "arctan", None),
        ("constant:1e-5", "constant", 1e-5), ("none", "none", None),
    ])
    def test_parse(self, text, kind, t0):
        s = Schedule.parse(text)
        assert (s.kind, s.t0) == (kind, t0)

    @pytest.mark.parametrize("bad", ["linear", "arctan:3"])
    def test_parse_rejects(self, bad):
        with pytest.raises(ValueError):
            Schedule.parse(bad)

    def test_constant_needs_positive(self):
        with pytest.raises(ValueError):
            Schedule("constant", 0.0)


class TestConfig:
    @pytest.mark.parametrize("kw", [
        {"population_size": 1}, {"crossover_rate": 1.5}, {"mutation_rate": -0.1},
        {"mutation_sigma": -1}, {"elitism": 300}, {"init_range": 0},
        {"mutation_decades": -1},
    ])
    def test_rejects(self, kw):
        with pytest.raises(ValueError):
            GAConfig(**kw)

    def test_gate_defaults(self):
        assert GAConfig.for_gate("cz").generations == 6000
        assert GAConfig.for_gate("ns", generations=7).generations == 7
        assert GAConfig.for_gate("custom") == GAConfig()


class TestEvaluate:
    def test_ns_identity(self):
        f, s, phi = evaluate(np.zeros(9), ns_spec(), 1.0)
        assert f == pytest.approx(1 / 9)
        assert s == pytest.approx(1)
        assert phi == pytest.approx(math.exp(-8 / 9))
        assert phi == pytest.approx(0.4111, abs=1e-4)

    def test_cz_identity_fidelity_only(self):
        f, s, phi = evaluate(np.zeros(64), cz_spec(), None)
        assert phi == pytest.approx(0.25)

    def test_unit_fidelity_gives_success(self):
        # x that swaps nothing but is a pure global phase keeps F, S of identity
        assert annealed_fitness(1.0, 0.23, 1e-9) == pytest.approx(0.23)

    def test_selection_key_orders_like_fitness(self, rng):
        fid, succ = rng.random(200), rng.random(200)
        for temp in (1.0, 0.05, None):
            key = selection_key(fid, succ, temp)
            phi = annealed_fitness(fid, succ, temp)
            assert np.array_equal(np.argsort(key), np.argsort(phi))

    def test_selection_key_survives_underflow(self):
        fid, succ = np.array([0.2, 0.3]), np.array([0.5, 0.5])
        assert np.all(annealed_fitness(fid, succ, 1e-4) == 0.0)
        key = selection_key(fid, succ, 1e-4)
        assert key[1] > key[0]
        assert selection_key(0.9, 0.0, 1.0) == -np.inf

    def test_rejects_bad_temperature(self):
        with pytest.raises(ValueError):
            evaluate(np.zeros(9), ns_spec(), 0.0)

    def test_wrong_length(self):
        with pytest.raises(ValueError):
            evaluate(np.zeros(5), ns_spec(), 1.0)

    def test_threaded_evaluation_identical(self, rng):
        xs = rng.uniform(-3, 3, (50, 64))
        a = PopulationEvaluator(cz_spec(), n_jobs=1)(xs)
        b = PopulationEvaluator(cz_spec(), n_jobs=4)(xs)
        assert np.array_equal(a[0], b[0]) and np.array_equal(a[1], b[1])

    def test_overflowing_genes_score_zero(self):
        xs = np.zeros((2, 9))
        xs[1] = 1e300
        fid, success = PopulationEvaluator(ns_spec())(xs)
        assert fid[1] == 0.0 and success[1] == 0.0
        assert fid[0] == pytest.approx(1 / 9) and success[0] == pytest.approx(1)


class TestOperators:
    def test_mutation_identity_cases(self, rng):
        x = rng.standard_normal(20)
        assert np.array_equal(mutate(x, GAConfig(mutation_sigma=0.0), rng), x)
        assert np.array_equal(mutate(x, GAConfig(mutation_rate=0.0), rng), x)

    def test_mutation_variance(self, rng):
        cfg = GAConfig(mutation_rate=1.0, mutation_sigma=0.3)
        x = np.zeros(100_000)
        delta = mutate(x, cfg, rng)
        assert delta.var() == pytest.approx(0.09, rel=0.02)

    def test_mutation_rate(self, rng):
        cfg = GAConfig(mutation_rate=0.1, mutation_sigma=1.0)
        changed = mutate(np.zeros((1000, 64)), cfg, rng) != 0
        assert changed.sum(axis=1).mean() == pytest.approx(6.4, rel=0.05)

    def test_mutation_decades_spread(self, rng):
        cfg = GAConfig(mutation_rate=1.0, mutation_sigma=1.0, mutation_decades=2.0)
        delta = mutate(np.zeros((20_000, 64)), cfg, rng)
        scale = np.log10(delta.std(axis=1))
        assert scale.max() < 0.3 and scale.min() < -1.7
        assert np.median(scale) == pytest.approx(-1.0, abs=0.1)

    def test_crossover_identical_parents(self, rng):
        x = rng.standard_normal(9)
        a, b = crossover(x, x, GAConfig(), rng)
        np.testing.assert_allclose(a, x)
        np.testing.assert_allclose(b, x)

    def test_crossover_disabled(self, rng):
        xa, xb = rng.standard_normal(9), rng.standard_normal(9)
        a, b = crossover(xa, xb, GAConfig(crossover_rate=0.0), rng)
        assert np.array_equal(a, xa) and np.array_equal(b, xb)

    def test_crossover_midpoint(self, rng):
        xa, xb = rng.standard_normal(9), rng.standard_normal(9)
        a, b = crossover(xa, xb, GAConfig(crossover_rate=1.0, blend_alpha=-0.5), rng)
        np.testing.assert_allclose(a, (xa + xb) / 2)
        np.testing.assert_allclose(b, (xa + xb) / 2)

    def test_crossover_range(self, rng):
        xa, xb = np.zeros((5000, 3)), np.ones((5000, 3))
        a, _ = crossover(xa, xb, GAConfig(crossover_rate=1.0), rng)
        assert a.min() >= -0.25 and a.max() <= 1.25
        assert a.min() < -0.2 and a.max() > 1.2


@pytest.fixture(scope="module")
def short_run():
    cfg = GAConfig.for_gate("ns", generations=150, seed=3)
    return run_ga(ns_spec(), cfg, Schedule("inv_sqrt"))


class TestRunGA:
    def test_record_shape(self, short_run):
        assert short_run.trace.shape == (150, 5)
        assert short_run.best_x.shape == (9,)
        assert np.array_equal(short_run.trace[:, 0], np.arange(150))

    def test_reported_values_reproducible(self, short_run):
        f, s, _ = evaluate(short_run.best_x, ns_spec(), 1.0)
        assert f == short_run.best_F and s == short_run.best_S

    def test_deterministic(self, short_run):
        again = run_ga(ns_spec(), short_run.config, Schedule("inv_sqrt"), n_jobs=3)
        assert np.array_equal(again.best_x, short_run.best_x)
        assert np.array_equal(again.trace, short_run.trace)

    def test_seed_matters(self, short_run):
        other = run_ga(ns_spec(), GAConfig.for_gate("ns", generations=150, seed=4), Schedule("inv_sqrt"))
        assert not np.array_equal(other.best_x, short_run.best_x)

    def test_elite_never_lost_at_fixed_temperature(self):
        # with a constant temperature the champion fitness cannot decrease
        cfg = GAConfig(generations=60, population_size=40, seed=1)
        rec = run_ga(ns_spec(), cfg, Schedule("constant", 0.05))
        assert np.all(np.diff(rec.trace[:, 2]) >= 0)

    def test_elite_carried_across_temperature_change(self):
        cfg = GAConfig(generations=80, population_size=40, seed=2)
        schedule = Schedule("arctan")
        rec = run_ga(ns_spec(), cfg, schedule)
        # generation t keeps t-1's champion, so rescored at T(t) it is a lower bound
        for t in range(1, cfg.generations):
            temp = temperature(schedule, t)
            prev = annealed_fitness(rec.trace[t - 1, 3], rec.trace[t - 1, 4], temp)
            assert rec.trace[t, 2] >= prev - 1e-15

    def test_penalty_drives_fidelity_up(self):
        cfg = GAConfig.for_gate("ns", generations=400, seed=0)
        rec = run_ga(ns_spec(), cfg, Schedule("inv_sqrt"))
        assert rec.best_F > 0.98

    def test_fidelity_only_baseline(self):
        cfg = GAConfig(generations=150, seed=0)
        rec = run_ga(ns_spec(), cfg, Schedule("none"))
        assert np.isnan(rec.trace[:, 1]).all()
        assert rec.best_F > 0.999
        assert rec.best_fitness == pytest.approx(rec.best_F)

    def test_to_dict(self, short_run):
        d = short_run.to_dict()
        assert d["schedule"] == "inv_sqrt"
        assert len(d["best_x"]) == 9
        assert len(d["trace"]["rows"]) == 150
