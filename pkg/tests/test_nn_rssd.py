import numpy as np
import pytest

from rssd.eigassign import EigTarget, EntryConstraint, ModeTarget
from rssd.errors import DimensionMismatch
from rssd.lti import FrequencyGrid, PlantSet, StateSpacePlant
from rssd.nn_rssd import (
    PENALTY,
    GaConfig,
    decode_rssd_genome,
    ga_minimize,
    j2_fitness,
    rssd_boxes,
    run_nn_rssd,
)
from rssd.scp import ScpConstraints


def family():
    return PlantSet((
        StateSpacePlant.siso(1.0, 1.0, label="nominal"),
        StateSpacePlant.siso(0.9, 1.2, label="fast"),
        StateSpacePlant.siso(1.1, 0.9, label="slow"),
    ))


def family_setup():
    constraints = ScpConstraints(
        ((0.0, 0.0), (0.5, 5.0), (0.0, 0.0), (1.0, 1.0)),
        ((0.0, 0.0), (0.5, 5.0), (0.0, 0.0), (1.0, 1.0)),
        dc_floor_db=0.0, band=(0.01, 0.1))
    target = EigTarget((ModeTarget("real", 0.5, 30.0),), zeta_min=0.3)
    return constraints, target


class TestGaMinimize:
    def test_sphere_convergence(self):
        cfg = GaConfig(population=30, max_generations=60, seed=42)
        res = ga_minimize(lambda g: float(np.sum((g - 1.0) ** 2)),
                          [(-5, 5)] * 3, cfg)
        assert res.best_fitness < 1e-3

    def test_seeded_determinism(self):
        cfg = GaConfig(population=20, max_generations=20, seed=9)
        f = lambda g: float(np.sum(g ** 2))
        a = ga_minimize(f, [(-2, 2)] * 2, cfg)
        b = ga_minimize(f, [(-2, 2)] * 2, cfg)
        assert np.array_equal(a.best_genes, b.best_genes)
        assert a.history == b.history

    def test_elitism_monotone_history(self):
        cfg = GaConfig(population=16, max_generations=30, seed=3)
        res = ga_minimize(lambda g: float(np.sum(np.abs(g))), [(-1, 1)] * 4,
                          cfg)
        assert np.all(np.diff(res.history) <= 0)

    def test_identical_population_no_mutation_flat(self):
        cfg = GaConfig(population=8, max_generations=5, seed=1,
                       mutation_prob=0.0, crossover_prob=0.0)
        init = np.tile([2.0, -1.0], (8, 1))
        res = ga_minimize(lambda g: float(np.sum(g ** 2)), [(-5, 5)] * 2, cfg,
                          init_population=init)
        assert res.history == [5.0] * 5

    def test_early_stop_mid_generation(self):
        calls = []

        def f(g):
            calls.append(1)
            return float(g[0] ** 2)

        cfg = GaConfig(population=10, max_generations=50, seed=2)
        ga_minimize(f, [(-1, 1)], cfg, stop=lambda: len(calls) >= 3)
        assert len(calls) == 3

    def test_bad_population_rejected(self):
        with pytest.raises(DimensionMismatch):
            GaConfig(population=2, seed=0)

    def test_genes_stay_in_boxes(self):
        cfg = GaConfig(population=12, max_generations=10, seed=5,
                       mutation_scale=2.0)
        seen = []
        f = lambda g: (seen.append(g.copy()), float(g[0])) [1]
        ga_minimize(f, [(2.0, 3.0)], cfg)
        arr = np.asarray(seen)
        assert arr.min() >= 2.0 and arr.max() <= 3.0


class TestGenome:
    def test_decode_real_and_complex(self):
        target = EigTarget((ModeTarget("real", 0.5, 3.0),
                            ModeTarget("complex", 1.0, 5.0)), zeta_min=0.3)
        genome = decode_rssd_genome([2.0, 4.0, 0.5], target)
        assert genome.eigenvalues[0] == pytest.approx(-2.0)
        lam = genome.eigenvalues[1]
        assert abs(lam) == pytest.approx(4.0)      # natural frequency
        assert -lam.real / abs(lam) == pytest.approx(0.5)  # damping

    def test_boxes_match_layout(self):
        mode = ModeTarget("complex", 1.0, 5.0,
                          entries=(EntryConstraint(0, -0.1, 0.1, -0.2, 0.2),))
        target = EigTarget((mode,), zeta_min=0.3)
        boxes = rssd_boxes(target)
        # wn, zeta, entry re, entry im
        assert boxes.shape == (4, 2)
        genome = decode_rssd_genome([2.0, 0.6, 0.05, -0.1], target)
        assert genome.entry_values[0][0] == pytest.approx(0.05 - 0.1j)

    def test_decoded_eigenvalues_always_admissible(self):
        target = EigTarget((ModeTarget("complex", 1.0, 5.0),), zeta_min=0.4)
        rng = np.random.default_rng(12)
        boxes = rssd_boxes(target)
        for _ in range(50):
            genes = rng.uniform(boxes[:, 0], boxes[:, 1])
            lam = decode_rssd_genome(genes, target).eigenvalues[0]
            assert lam.real < 0
            assert -lam.real / abs(lam) >= 0.4 - 1e-12


class TestJ2Fitness:
    def test_double_integrator_gain(self, grid):
        A = np.array([[0.0, 1.0], [0.0, 0.0]])
        p = StateSpacePlant(A, np.array([[0.0], [1.0]]), np.eye(2),
                            np.zeros((2, 1)))
        target = EigTarget((ModeTarget("real", 0.5, 3.0),
                            ModeTarget("real", 0.5, 3.0)), zeta_min=0.5)
        genome = decode_rssd_genome([1.0, 2.0], target)
        j2, K = j2_fitness(p, genome, target, grid)
        assert np.isfinite(j2)
        np.testing.assert_allclose(K, [[-2.0, -3.0]], atol=1e-9)

    def test_unstabilizable_choice_penalized(self, grid):
        # gain placing one eigenvalue leaves the other unstable
        A = np.diag([1.0, 2.0])
        B = np.array([[1.0], [0.0]])   # second mode uncontrollable
        p = StateSpacePlant(A, B, np.array([[1.0, 0.0]]), np.zeros((1, 1)))
        target = EigTarget((ModeTarget("real", 0.5, 5.0),), zeta_min=0.3)
        genome = decode_rssd_genome([1.0], target)
        j2, K = j2_fitness(p, genome, target, grid)
        assert j2 == PENALTY and K is None


class TestRunNnRssd:
    def test_family_feasible_and_verified(self, grid):
        constraints, target = family_setup()
        scp = GaConfig(population=20, max_generations=20, seed=7)
        rssd = GaConfig(population=30, max_generations=100, seed=11)
        report = run_nn_rssd(family(), constraints, target, scp, rssd, grid)
        assert report.feasible
        assert all(report.verification[k] for k in
                   ("assigned_eigenvalues", "all_in_S1",
                    "margin_exceeds_bound", "all_plants_stable"))
        assert report.j2 < 1.0 / report.j1_history[-1]

    def test_history_strictly_decreasing(self, grid):
        constraints, target = family_setup()
        scp = GaConfig(population=20, max_generations=20, seed=7)
        rssd = GaConfig(population=30, max_generations=100, seed=11)
        report = run_nn_rssd(family(), constraints, target, scp, rssd, grid)
        hist = report.j1_history
        assert all(b < a for a, b in zip(hist, hist[1:]))

    def test_bit_identical_rerun(self, grid):
        constraints, target = family_setup()
        scp = GaConfig(population=20, max_generations=20, seed=7)
        rssd = GaConfig(population=30, max_generations=100, seed=11)
        a = run_nn_rssd(family(), constraints, target, scp, rssd, grid)
        b = run_nn_rssd(family(), constraints, target, scp, rssd, grid)
        assert np.array_equal(a.gain, b.gain)
        assert a.j1_history == b.j1_history
        assert a.j2 == b.j2

    def test_zero_generations_infeasible_empty_history(self, grid):
        constraints, target = family_setup()
        scp = GaConfig(population=20, max_generations=0, seed=7)
        rssd = GaConfig(population=30, max_generations=100, seed=11)
        report = run_nn_rssd(family(), constraints, target, scp, rssd, grid)
        assert not report.feasible
        assert report.j1_history == []
        assert report.gain is None

    def test_per_generation_variant_also_feasible(self, grid):
        constraints, target = family_setup()
        scp = GaConfig(population=20, max_generations=20, seed=7)
        rssd = GaConfig(population=30, max_generations=100, seed=11)
        report = run_nn_rssd(family(), constraints, target, scp, rssd, grid,
                             per_generation=True)
        assert report.feasible

    def test_degenerate_singleton_uses_floor(self, grid):
        pset = PlantSet((StateSpacePlant.siso(1.0, 1.0, label="only"),))
        constraints, target = family_setup()
        scp = GaConfig(population=10, max_generations=5, seed=1)
        rssd = GaConfig(population=20, max_generations=50, seed=2)
        report = run_nn_rssd(pset, constraints, target, scp, rssd, grid)
        assert report.feasible
        assert report.j1_history[-1] == pytest.approx(1e-3)
