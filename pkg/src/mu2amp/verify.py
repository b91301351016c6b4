"""Self-check suite: Kraus channel against the two-mode oracle, plus invariants."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .channels import amplified_cutoff, immaculate_apply, linear_amp_channel
from .design import AmplifierSpec, design_stages
from .fock import (
    DensityOperator,
    coherent_density,
    density_from_vector,
    normal_moment,
    number_state,
    trace_distance,
)
from .metrics import p_success_exact
from .oracle import two_mode_amplify
from .quasiprob import amplified_q, q_evaluator

Channel = Callable[..., DensityOperator]

TOL_EQUIV = 1e-8
TOL_VARIANCE = 1e-7
TOL_TRACE = 1e-8
TOL_Q = 1e-7
TOL_CLOSED = 1e-12


@dataclass(frozen=True)
class Check:
    name: str
    value: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return bool(self.value <= self.tolerance)

    @property
    def margin(self) -> float:
        return self.tolerance - self.value

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{status}  {self.name:<52} err={self.value:.3e}  tol={self.tolerance:.0e}  margin={self.margin:.3e}"


def test_inputs(g1: float = 1.4055638569974547) -> list[tuple[str, DensityOperator]]:
    out = [
        ("vacuum", density_from_vector(number_state(0, 0))),
        ("coherent 0.3", coherent_density(0.3)),
    ]
    for n in (1, 2):
        v, _ = immaculate_apply(0.3, g1, n)
        out.append((f"post-selected N={n}", density_from_vector(v)))
    return out


def run_checks(
    full: bool = False,
    channel: Channel = linear_amp_channel,
    cutoff: int | None = None,
) -> list[Check]:
    """Run the suite; ``channel`` is injectable so the suite itself can be tested.

    ``cutoff`` forces the output cutoff of every amplification, which makes
    too-small bases surface as :class:`CutoffInsufficient`.
    """
    gains = [1.0, 1.5] + ([6.4031242374328485] if full else [])
    checks: list[Check] = []
    for g in gains:
        for nbar in (0.0, 0.5):
            for label, rho in test_inputs():
                out_cut = cutoff if cutoff is not None else amplified_cutoff(rho.cutoff, g, nbar)
                a = channel(rho, g, nbar, out_cut)
                b = two_mode_amplify(rho, nbar, g, out_cutoff=out_cut)
                checks.append(Check(f"channel=oracle g={g:.4g} nbar={nbar:g} {label}", trace_distance(a, b), TOL_EQUIV))
            rho = coherent_density(0.3)
            out_cut = cutoff if cutoff is not None else amplified_cutoff(rho.cutoff, g, nbar)
            out = channel(rho, g, nbar, out_cut)
            mean = normal_moment(out, 0, 1)
            n = normal_moment(out, 1, 1).real
            var = n - abs(mean) ** 2
            checks.append(Check(f"variance law g={g:.4g} nbar={nbar:g}", abs(var - (nbar + 1) * (g * g - 1)), TOL_VARIANCE))
            checks.append(Check(f"mean gain g={g:.4g} nbar={nbar:g}", abs(mean - 0.3 * g), TOL_VARIANCE))
            checks.append(Check(f"trace g={g:.4g} nbar={nbar:g}", abs(out.trace - 1.0), TOL_TRACE))
    # Q rescaling against the oracle output, on a coarse grid
    g = gains[-1]
    v, _ = immaculate_apply(0.3, 1.4055638569974547, 1)
    rho = density_from_vector(v)
    out_cut = cutoff if cutoff is not None else amplified_cutoff(rho.cutoff, g, 0.0)
    oracle_out = two_mode_amplify(rho, 0.0, g, out_cutoff=out_cut)
    re = np.linspace(-3, 3, 21)
    betas = re[:, None] + 1j * re[None, :]
    diff = np.abs(amplified_q(rho, g)(betas) - q_evaluator(oracle_out)(betas)).max()
    checks.append(Check(f"Q rescale = oracle Q g={g:.4g}", float(diff), TOL_Q))
    # post-selection probability against its closed form
    spec = AmplifierSpec(mu2=0.5, gain=9.0, ncut=2)
    d = design_stages(spec)
    worst = 0.0
    for alpha in (0.0, 0.2, 0.7, 1.5):
        _, p = immaculate_apply(alpha, d.g1, 2)
        worst = max(worst, abs(p - float(p_success_exact(alpha, d.g1, 2))))
    checks.append(Check("post-selection p = closed form", worst, TOL_CLOSED))
    if not all(math.isfinite(c.value) for c in checks):
        checks.append(Check("finite results", math.inf, 0.0))
    return checks
