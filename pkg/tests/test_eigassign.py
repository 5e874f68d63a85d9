import numpy as np
import pytest

from rssd.errors import BoundViolation, EmptySubspace, IllConditioned
from rssd.eigassign import (
    EigTarget,
    EntryConstraint,
    ModeTarget,
    allowable_subspace,
    check_S1,
    compute_gain,
    in_S1,
    select_vectors,
)
from rssd.lti import eigen_info


def double_integrator():
    A = np.array([[0.0, 1.0], [0.0, 0.0]])
    B = np.array([[0.0], [1.0]])
    C = np.eye(2)
    return A, B, C


class TestAllowableSubspace:
    def test_real_eigenvalue_dimension(self):
        A, B, _ = double_integrator()
        sub = allowable_subspace(A, B, -1.0)
        assert sub.basis.shape == (3, 1)

    def test_complex_eigenvalue_real_augmented(self):
        A, B, _ = double_integrator()
        sub = allowable_subspace(A, B, complex(-1.0, 2.0))
        # rows stack (R_re, R_im, W_re, W_im)
        assert sub.basis.shape[0] == 2 * 2 + 2 * 1
        assert sub.basis.shape[1] >= 1

    def test_subspace_satisfies_defining_equation(self):
        rng = np.random.default_rng(5)
        A = rng.normal(size=(3, 3))
        B = rng.normal(size=(3, 2))
        lam = -1.5
        sub = allowable_subspace(A, B, lam)
        for col in sub.basis.T:
            r, w = col[:3], col[3:]
            assert np.linalg.norm((A - lam * np.eye(3)) @ r + B @ w) < 1e-10


class TestGainComputation:
    def test_double_integrator_oracle(self):
        A, B, C = double_integrator()
        target = EigTarget((ModeTarget("real", 0.5, 3.0),
                            ModeTarget("real", 0.5, 3.0)), zeta_min=0.5)
        subs = [allowable_subspace(A, B, -1.0),
                allowable_subspace(A, B, -2.0)]
        W, R = select_vectors(subs, target, ((), ()))
        K = compute_gain(W, R, C)
        np.testing.assert_allclose(K, [[-2.0, -3.0]], atol=1e-9)

    def test_column_scaling_invariance(self):
        A, B, C = double_integrator()
        target = EigTarget((ModeTarget("real", 0.5, 3.0),
                            ModeTarget("real", 0.5, 3.0)), zeta_min=0.5)
        subs = [allowable_subspace(A, B, -1.0),
                allowable_subspace(A, B, -2.0)]
        W, R = select_vectors(subs, target, ((), ()))
        K = compute_gain(W, R, C)
        scale = np.array([3.7, -0.2])
        K2 = compute_gain(W * scale, R * scale, C)
        np.testing.assert_allclose(K, K2, atol=1e-10)

    def test_random_triples_exact_assignment(self):
        rng = np.random.default_rng(17)
        done = 0
        while done < 25:
            n = int(rng.integers(2, 4))
            A = rng.normal(size=(n, n))
            B = rng.normal(size=(n, 1))
            C = np.eye(n)
            lams = -rng.uniform(0.5, 4.0, size=n)
            lams += np.arange(n) * 1e-2  # keep them distinct
            try:
                subs = [allowable_subspace(A, B, l) for l in lams]
                target = EigTarget(tuple(
                    ModeTarget("real", 0.1, 10.0) for _ in range(n)),
                    zeta_min=0.1)
                W, R = select_vectors(subs, target, tuple(() for _ in range(n)))
                K = compute_gain(W, R, C)
            except (EmptySubspace, IllConditioned):
                continue
            got = np.sort(np.linalg.eigvals(A + B @ K @ C).real)
            assert np.allclose(np.sort(lams), got, atol=1e-6)
            done += 1

    def test_ill_conditioned_guard(self):
        W = np.array([[1.0, 1.0]])
        R = np.array([[1.0, 1.0], [1.0, 1.0 + 1e-9]])
        with pytest.raises(IllConditioned):
            compute_gain(W, R, np.eye(2))


class TestEntryConstraints:
    def test_achievable_entry_honored(self):
        A, B, _ = double_integrator()
        # for lambda=-1 the subspace forces r2 = -r1; constrain r1
        sub = allowable_subspace(A, B, -1.0)
        mode = ModeTarget("real", 0.5, 3.0,
                          entries=(EntryConstraint(0, 0.4, 0.6),))
        target = EigTarget((mode,), zeta_min=0.5)
        W, R = select_vectors([sub], target, ((0.5,),))
        assert 0.4 - 1e-6 <= R[0, 0] <= 0.6 + 1e-6

    def test_unachievable_entry_rejected(self):
        rng = np.random.default_rng(2)
        A = np.diag([-1.0, -2.0])
        B = np.array([[1.0], [0.0]])  # second state unreachable at lambda=-3
        sub = allowable_subspace(A, B, -3.0)
        mode = ModeTarget("real", 0.5, 5.0,
                          entries=(EntryConstraint(1, 0.9, 1.0),))
        target = EigTarget((mode,), zeta_min=0.5)
        with pytest.raises(BoundViolation):
            select_vectors([sub], target, ((0.95,),))


class TestDampingRegion:
    def test_boundary_damping_accepted(self):
        target = EigTarget((ModeTarget("real", 0.1, 10.0),), zeta_min=0.3)
        assert in_S1(eigen_info(complex(-1.0, 3.18)), target)

    def test_low_damping_rejected(self):
        target = EigTarget((ModeTarget("real", 0.1, 10.0),), zeta_min=0.3)
        assert not in_S1(eigen_info(complex(-0.5, 5.0)), target)

    def test_rhp_rejected(self):
        target = EigTarget((ModeTarget("real", 0.1, 10.0),), zeta_min=0.3)
        assert not in_S1(eigen_info(complex(0.1, 0.0)), target)

    def test_sigma_max_cap(self):
        target = EigTarget((ModeTarget("real", 0.1, 10.0),), zeta_min=0.3,
                           sigma_max=-0.5)
        assert not in_S1(eigen_info(complex(-0.2, 0.0)), target)
        ok, offending = check_S1([eigen_info(-1.0), eigen_info(-0.2)], target)
        assert not ok and len(offending) == 1
