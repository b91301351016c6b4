import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mu2amp.channels import (
    amplified_cutoff,
    first_stage,
    immaculate_apply,
    linear_amp_channel,
    mu2_amplify,
    pure_loss,
)
from mu2amp.design import AmplifierSpec
from mu2amp.errors import CutoffInsufficient, InvalidSpec
from mu2amp.fock import (
    coherent_density,
    density_from_vector,
    normal_moment,
    number_state,
)
from mu2amp.metrics import fidelity_exact, p_success_exact, spec_metrics


@given(st.floats(0, 2), st.floats(1, 10), st.integers(1, 4))
@settings(max_examples=60, deadline=None)
def test_post_selection_probability(alpha, g1, N):
    v, p = immaculate_apply(alpha, g1, N)
    assert p == pytest.approx(float(p_success_exact(alpha, g1, N)), rel=1e-12)
    assert v.is_normalized() and v.exact_support


def test_identity_gain_pads():
    rho = coherent_density(0.4)
    out = linear_amp_channel(rho, 1.0, 0.0, rho.cutoff + 3)
    assert out.cutoff == rho.cutoff + 3
    assert np.allclose(out.matrix[: rho.cutoff + 1, : rho.cutoff + 1], rho.matrix)


@pytest.mark.parametrize("g,nbar", [(1.3, 0.0), (2.0, 0.0), (1.5, 0.5), (2.5, 2.0)])
def test_gaussian_moments(g, nbar):
    alpha = 0.4 - 0.2j
    out = linear_amp_channel(coherent_density(alpha), g, nbar)
    out.validate()
    mean = normal_moment(out, 0, 1)
    var = normal_moment(out, 1, 1).real - abs(mean) ** 2
    assert abs(mean - g * alpha) < 1e-10
    assert var == pytest.approx((nbar + 1) * (g * g - 1), abs=1e-9)
    # phase insensitive: <Δa^2> stays zero
    assert abs(normal_moment(out, 0, 2) - mean**2) < 1e-9


def test_vacuum_goes_to_thermal():
    g = 1.8
    out = linear_amp_channel(density_from_vector(number_state(0, 0)), g)
    n = g * g - 1
    k = np.arange(20)
    assert np.allclose(out.populations[:20], n**k / (n + 1) ** (k + 1), atol=1e-14)
    assert np.count_nonzero(np.abs(out.matrix - np.diag(out.populations)) > 0) == 0


def test_forced_small_cutoff_raises():
    with pytest.raises(CutoffInsufficient):
        linear_amp_channel(coherent_density(0.3), 3.0, 0.0, out_cutoff=20)
    with pytest.raises(CutoffInsufficient):
        linear_amp_channel(coherent_density(0.3), 3.0, 0.0, out_cutoff=2)


def test_rejects_bad_parameters():
    rho = coherent_density(0.3)
    with pytest.raises(InvalidSpec):
        linear_amp_channel(rho, 0.5)
    with pytest.raises(InvalidSpec):
        linear_amp_channel(rho, 1.5, -0.1)


def test_pure_loss_scales_mean():
    out = pure_loss(coherent_density(1.0), 0.36)
    assert normal_moment(out, 0, 1) == pytest.approx(0.6, abs=1e-12)
    assert normal_moment(out, 1, 1).real == pytest.approx(0.36, abs=1e-12)


def test_amplified_cutoff_grows_with_gain():
    assert amplified_cutoff(3, 1.0) == 3
    assert amplified_cutoff(3, 2.0) < amplified_cutoff(3, 4.0)
    assert amplified_cutoff(3, 2.0, nbar=1.0) > amplified_cutoff(3, 2.0)


@pytest.mark.parametrize("mu2,G,N", [(0.0, 3.0, 1), (0.5, 3.0, 2), (0.5, 9.0, 1)])
def test_pipeline_fidelity_matches_closed_form(mu2, G, N):
    spec = AmplifierSpec(mu2, G, N)
    for alpha in (0.05, 0.2, 0.5):
        run = mu2_amplify(alpha, spec)
        ref = spec_metrics(alpha, spec)
        assert run.p_success == pytest.approx(float(ref["p_success"]), rel=1e-12)
        assert run.fidelity == pytest.approx(float(ref["fidelity"]), rel=1e-9)
        assert run.pfp == pytest.approx(float(ref["pfp"]), rel=1e-9)


def test_ideal_pipeline_has_unit_pfp():
    run = mu2_amplify(0.7, AmplifierSpec(1.0, 3.0))
    assert run.p_success == 1.0
    assert run.pfp == pytest.approx(1.0, rel=1e-10)


def test_first_stage_passthrough_when_deterministic():
    rho, p, d = first_stage(0.5, AmplifierSpec(1.0, 4.0))
    assert p == 1.0 and d.deterministic
    assert normal_moment(rho, 0, 1) == pytest.approx(0.5)


def test_immaculate_only_device_is_exact():
    # mu2 = 0: no second stage, output overlap is the closed form
    spec = AmplifierSpec(0.0, 4.0, 2)
    run = mu2_amplify(0.1, spec)
    assert run.fidelity == pytest.approx(float(fidelity_exact(0.1, 4.0, 4.0, 2)), rel=1e-12)
    assert math.isclose(run.design.g2, 1.0)
