import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mu2amp.errors import CutoffInsufficient, InvalidSpec
from mu2amp.fock import (
    DensityOperator,
    FockVector,
    antinormal_moment,
    check_cutoff,
    coherent_amplitudes,
    coherent_cutoff,
    coherent_density,
    coherent_state,
    coherent_tail,
    density_from_vector,
    fidelity_coherent,
    normal_moment,
    number_state,
    overlap_coherent,
    quadrature_stats,
    trace_distance,
)

amplitudes = st.complex_numbers(max_magnitude=3.0, allow_nan=False, allow_infinity=False)


def test_vacuum_amplitudes():
    c = coherent_amplitudes(0.0, 5)
    assert c[0] == 1.0
    assert np.all(c[1:] == 0)


def test_coherent_amplitudes_match_direct_formula():
    alpha = 0.7 - 0.4j
    n = np.arange(12)
    direct = np.exp(-abs(alpha) ** 2 / 2) * alpha**n / np.sqrt([math.factorial(k) for k in n])
    assert np.allclose(coherent_amplitudes(alpha, 11), direct, atol=1e-15)


def test_large_amplitude_does_not_overflow():
    c = coherent_amplitudes(30.0, 2000)
    assert np.all(np.isfinite(c))
    # exponents near 3000 carry ~1e-13 absolute rounding each
    assert abs(np.vdot(c, c).real - 1) < 1e-10


@given(amplitudes)
@settings(max_examples=40, deadline=None)
def test_coherent_state_norm_and_tail(alpha):
    v = coherent_state(alpha, coherent_cutoff(alpha))
    assert abs(v.norm_sq + v.tail - 1) < 1e-12
    assert v.tail <= 1e-14


def test_coherent_tail_matches_sum():
    alpha, D = 1.3, 6
    c = coherent_amplitudes(alpha, 60)
    assert coherent_tail(alpha, D) == pytest.approx(np.sum(np.abs(c[D + 1 :]) ** 2), rel=1e-12)


def test_number_state_is_exact():
    v = number_state(3, 5)
    assert v.exact_support and v.norm_sq == 1.0
    with pytest.raises(InvalidSpec):
        number_state(6, 5)


def test_density_operator_is_read_only():
    rho = coherent_density(0.5)
    with pytest.raises(ValueError):
        rho.matrix[0, 0] = 2


def test_validate_rejects_non_hermitian_and_negative():
    with pytest.raises(InvalidSpec):
        DensityOperator(np.array([[0.5, 0.1], [0.0, 0.5]])).validate()
    with pytest.raises(InvalidSpec):
        DensityOperator(np.diag([1.2, -0.2])).validate()
    coherent_density(0.4).validate()


def test_cutoff_check_raises():
    rho = density_from_vector(coherent_state(2.0, 6).normalized())
    with pytest.raises(CutoffInsufficient, match="larger cutoff"):
        check_cutoff(rho)
    check_cutoff(density_from_vector(number_state(6, 6)))  # exact support is exempt


@given(amplitudes)
@settings(max_examples=30, deadline=None)
def test_coherent_moments(alpha):
    rho = coherent_density(alpha, coherent_cutoff(alpha) + 4)
    assert abs(normal_moment(rho, 0, 1) - alpha) < 1e-9
    assert abs(normal_moment(rho, 1, 1) - abs(alpha) ** 2) < 1e-9
    # a a† = a† a + 1
    assert abs(antinormal_moment(rho, 1, 1) - abs(alpha) ** 2 - 1) < 1e-9
    # a^2 a†^2 = (n+1)(n+2)
    n = abs(alpha) ** 2
    assert abs(antinormal_moment(rho, 2, 2) - (n * n + 4 * n + 2)) < 1e-8


def test_quadrature_stats_coherent():
    s = quadrature_stats(coherent_density(0.8 + 0.3j))
    assert s.mean_x1 == pytest.approx(math.sqrt(2) * 0.8)
    assert s.mean_x2 == pytest.approx(math.sqrt(2) * 0.3)
    assert s.var_x1_sym == pytest.approx(0.5, abs=1e-10)
    assert s.var_x2_antinormal == pytest.approx(1.0, abs=1e-10)


def test_fidelity_coherent_overlap_law():
    a, b = 0.6, 0.2 + 0.5j
    assert fidelity_coherent(coherent_density(a), b) == pytest.approx(math.exp(-abs(a - b) ** 2), rel=1e-12)


def test_overlap_dense_and_banded_paths_agree():
    rho = coherent_density(1.1, 30)
    betas = np.array([0.0, 0.5 + 0.5j, -1.2j, 1.7])
    # a full-band state takes the dense path; a diagonal one takes the banded path
    dense = overlap_coherent(rho, betas)
    direct = [abs(np.vdot(coherent_amplitudes(b, rho.cutoff), rho.matrix @ coherent_amplitudes(b, rho.cutoff))) for b in betas]
    assert np.allclose(dense, direct, atol=1e-14)
    diag = DensityOperator(np.diag(np.diag(rho.matrix)))
    vals = overlap_coherent(diag, betas)
    direct = [np.vdot(coherent_amplitudes(b, rho.cutoff), diag.matrix @ coherent_amplitudes(b, rho.cutoff)).real for b in betas]
    assert np.allclose(vals, direct, atol=1e-14)


def test_overlap_far_from_support_is_tiny():
    v = overlap_coherent(coherent_density(0.2), np.array([6.0]))[0]
    assert v == pytest.approx(np.exp(-(5.8**2)), rel=1e-9)


def test_trace_distance_basic():
    a = density_from_vector(number_state(0, 3))
    b = density_from_vector(number_state(1, 3))
    assert trace_distance(a, b) == pytest.approx(1.0)
    assert trace_distance(a, a) == 0.0
    # pure states: sqrt(1 - |<a|b>|^2)
    x, y = coherent_density(0.3, 20), coherent_density(0.5, 20)
    assert trace_distance(x, y) == pytest.approx(math.sqrt(1 - math.exp(-0.04)), rel=1e-9)


def test_trace_distance_banded_matches_dense():
    rng = np.random.default_rng(1)
    n = 60
    m = np.zeros((n, n), dtype=complex)
    for off in range(3):
        d = rng.normal(size=n - off) + 1j * rng.normal(size=n - off)
        m += np.diag(d, off)
    m = m + m.conj().T
    expected = 0.5 * np.abs(np.linalg.eigvalsh(m)).sum()
    assert trace_distance(m, np.zeros_like(m)) == pytest.approx(expected, rel=1e-12)


def test_fockvector_rejects_bad_shape():
    with pytest.raises(InvalidSpec):
        FockVector(np.zeros((2, 2)))
