import math

import numpy as np
import pytest

import oqscp


def two_level():
    h = np.diag([0.5, -0.5]).astype(complex)
    sx = np.array([[0, 1], [1, 0]], dtype=complex)
    return h, [sx]


def test_transposition_demo_spectra():
    demo = oqscp.transposition_demo()
    assert np.allclose(sorted(demo.input_spectrum), [0, 0, 0, 1], atol=1e-12)
    assert np.allclose(sorted(demo.output_spectrum), [-0.5, 0.5, 0.5, 0.5], atol=1e-12)


def test_cp_certification():
    ident = oqscp.Superoperator.identity(2)
    assert oqscp.is_completely_positive(ident).completely_positive
    transp = oqscp.Superoperator.transposition(2)
    verdict = oqscp.is_completely_positive(transp)
    assert not verdict.completely_positive
    assert verdict.witness_eigenvalue == pytest.approx(-1.0, abs=1e-12)


def test_kraus_roundtrip():
    transp_free = oqscp.Superoperator.identity(3)
    ops = oqscp.kraus_decompose(transp_free)
    x = np.arange(9, dtype=complex).reshape(3, 3)
    out = sum(v.conj().T @ x @ v for v in ops)
    assert np.allclose(out, x, atol=1e-9)


def test_generator_evolution_trace_preserving():
    h, couplings = two_level()
    bath = oqscp.BathModel.ohmic(0.1, 2.0, 2.0)
    report = oqscp.assemble(h, bath, 0.1, 2, "davies-secular", "infinite-limit", 0.0,
                            [1], couplings)
    rho0 = np.array([[0.9, 0.1], [0.1, 0.1]], dtype=complex)
    run = oqscp.evolve(report, rho0, [0.0, 1.0, 5.0, 20.0])
    assert np.allclose(run.traces, 1.0, atol=1e-9)
    assert min(e.min() for e in run.eigenvalues) > -1e-9


def test_secular_gibbs_stationary():
    h, couplings = two_level()
    bath = oqscp.BathModel.ohmic(0.1, 2.0, 2.0)
    report = oqscp.assemble(h, bath, 0.1, 2, "davies-secular", "infinite-limit", 0.0,
                            [1], couplings)
    gibbs = np.diag(np.exp(-bath.beta * np.diag(h).real)).astype(complex)
    gibbs /= np.trace(gibbs)
    residual = report.k2 @ gibbs.flatten(order="F")
    assert np.linalg.norm(residual) < 1e-10


def test_factorization_zero_policy():
    h, couplings = two_level()
    bath = oqscp.BathModel.exponential(0.8, 0.7, 2.0)
    sys = oqscp.JointSystem(h, h, couplings, couplings, bath, 0.0, 0.1)
    report = oqscp.factorization_check(sys, 2)
    assert report.residual < 1e-10
    sys_full = oqscp.JointSystem(h, h, couplings, couplings, bath, 1.0, 0.1)
    assert oqscp.factorization_check(sys_full, 2).residual > 1e-3


def test_pair_dynamics_mixture_goes_negative():
    family = oqscp.MapFamily.transposition_mixture()
    probe = oqscp.singlet_state()
    times = [0.05 * i for i in range(41)]
    report = oqscp.pair_dynamics_experiment(family, probe, times)
    assert report.first_negative_time is not None
    assert min(report.min_one_sided) < -1e-6


def test_finite_bath_correlation():
    bath = oqscp.FiniteBath([oqscp.BathMode(1.0, 0.3, 4)], beta=2.0)
    n = 1.0 / (math.exp(2.0) - 1.0)
    expected = 0.3**2 * ((n + 1) * np.exp(-1j * 0.5) + n * np.exp(1j * 0.5))
    assert bath.correlation(0.5) == pytest.approx(expected, abs=1e-12)


def test_exact_reduced_lambda_zero_is_free_evolution():
    h, couplings = two_level()
    bath = oqscp.FiniteBath([oqscp.BathMode(1.0, 0.2, 7)], beta=2.0)
    rho0 = np.array([[0.7, 0.2], [0.2, 0.3]], dtype=complex)
    run = oqscp.exact_reduced(h, couplings, bath, 0.0, rho0, [0.0, 1.3])
    u = np.diag(np.exp(-1j * np.diag(h) * 1.3))
    assert np.allclose(run.states[1], u @ rho0 @ u.conj().T, atol=1e-10)
