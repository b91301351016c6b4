"""Amplifier stages and the cascaded mu^2-amplifier.

The linear stage is applied through explicit Kraus operators.  A
phase-insensitive amplifier with gain ``g`` and thermal ancilla ``nbar`` is
the same Gaussian channel as pure loss with transmissivity
``eta = g^2 / G'^2`` followed by a quantum-limited amplifier of gain
``G'^2 = (nbar+1)(g^2-1) + 1``; both pieces have closed-form Kraus
operators in the number basis.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln
from scipy.stats import nbinom

from .design import AmplifierSpec, StageDesign, design_stages
from .errors import CutoffInsufficient, InvalidSpec
from .fock import (
    EPS_TRUNC,
    DensityOperator,
    FockVector,
    check_cutoff,
    coherent_amplitudes,
    coherent_cutoff,
    coherent_density,
    density_from_vector,
    fidelity_coherent,
)

__all__ = [
    "AmplifierSpec",
    "StageDesign",
    "RunRecord",
    "design_stages",
    "immaculate_apply",
    "linear_amp_channel",
    "amplified_cutoff",
    "mu2_amplify",
    "first_stage",
    "pure_loss",
    "noisy_split",
]

OUTPUT_TAIL = 1e-13


def amplified_cutoff(d_in: int, g: float, nbar: float = 0.0, tail: float = OUTPUT_TAIL) -> int:
    """Output cutoff holding all but ``tail`` of the amplified population.

    A quantum-limited amplifier of gain ``G'`` maps ``|n>`` to ``n + K`` quanta
    with ``K`` negative binomial (``n+1`` successes, probability ``1/G'^2``);
    the loss part of a noisy amplifier only lowers photon numbers, so the
    ``|d_in>`` distribution bounds every input.
    """
    gp2 = (nbar + 1.0) * (g * g - 1.0) + 1.0
    if gp2 <= 1.0:
        return d_in
    extra = nbinom.isf(tail, d_in + 1, 1.0 / gp2)
    return int(d_in + extra + 2)


@dataclass(frozen=True)
class RunRecord:
    """Outputs of one amplification of a coherent state."""

    rho_out: DensityOperator
    p_success: float
    fidelity: float
    pfp: float
    spec: AmplifierSpec
    alpha_in: complex
    design: StageDesign
    rho_first_stage: DensityOperator


def immaculate_apply(alpha: complex, g1: float, ncut: int, cutoff: int | None = None) -> tuple[FockVector, float]:
    """Apply ``K = P_N g1^(a†a) / g1^N`` to ``|alpha>`` and renormalize.

    Returns the post-selected state (support ``0..N``, flagged exact) and the
    success probability ``||K|alpha>||^2`` summed from the amplitudes.
    """
    if ncut < 1:
        raise InvalidSpec("ncut must be >= 1")
    if g1 < 1:
        raise InvalidSpec("g1 must be >= 1")
    if cutoff is None:
        cutoff = ncut
    if cutoff < ncut:
        raise InvalidSpec(f"cutoff {cutoff} below number cutoff {ncut}")
    n = np.arange(ncut + 1)
    amps = coherent_amplitudes(alpha, ncut) * np.exp((n - ncut) * math.log(g1))
    p = float(np.vdot(amps, amps).real)
    out = np.zeros(cutoff + 1, dtype=complex)
    out[: ncut + 1] = amps / math.sqrt(p)
    return FockVector(out, exact_support=True), p


def noisy_split(g: float, nbar: float) -> tuple[float, float]:
    """``(eta, G')``: the loss then quantum-limited gain equal to a noisy amplifier."""
    gp2 = (nbar + 1.0) * (g * g - 1.0) + 1.0
    return g * g / gp2, math.sqrt(gp2)


def pure_loss(rho: DensityOperator, eta: float) -> DensityOperator:
    """Beam-splitter loss with transmissivity ``eta``; keeps the cutoff."""
    if not 0.0 <= eta <= 1.0:
        raise InvalidSpec(f"transmissivity must lie in [0, 1], got {eta}")
    if eta == 1.0:
        return rho
    if eta == 0.0:
        m = np.zeros_like(rho.matrix)
        m[0, 0] = rho.trace
        return DensityOperator(m, rho.exact_support)
    return DensityOperator(_loss(np.array(rho.matrix), eta), rho.exact_support)


def _loss(rho: np.ndarray, eta: float) -> np.ndarray:
    # B_j|n> = sqrt(C(n,j)) eta^((n-j)/2) (1-eta)^(j/2) |n-j>
    D = rho.shape[0] - 1
    out = np.zeros_like(rho)
    n = np.arange(D + 1)
    for j in range(D + 1):
        m = n[j:]
        logc = 0.5 * (gammaln(m + 1) - gammaln(j + 1) - gammaln(m - j + 1)) + 0.5 * (m - j) * math.log(eta)
        if j:
            logc = logc + 0.5 * j * math.log1p(-eta)
        c = np.exp(logc)
        out[: D + 1 - j, : D + 1 - j] += c[:, None] * rho[j:, j:] * c[None, :]
    return out


def _ideal_amplify(rho: np.ndarray, gain: float, out_cutoff: int) -> np.ndarray:
    # A_k|n> = sqrt(C(n+k,k)) gain^-(n+1) t^k |n+k>,  t^2 = 1 - 1/gain^2
    D = rho.shape[0] - 1
    out = np.zeros((out_cutoff + 1, out_cutoff + 1), dtype=complex)
    log_t2 = math.log1p(-1.0 / (gain * gain))
    log_g = math.log(gain)
    k = np.arange(out_cutoff + 1)
    logc = [
        0.5 * (gammaln(n + k + 1) - gammaln(n + 1) - gammaln(k + 1)) - (n + 1) * log_g + 0.5 * k * log_t2
        for n in range(D + 1)
    ]
    coef = [np.exp(lc) for lc in logc]
    for n in range(D + 1):
        for n2 in range(D + 1):
            r = rho[n, n2]
            if r == 0:
                continue
            L = out_cutoff - max(n, n2) + 1
            idx = np.arange(L)
            out[n + idx, n2 + idx] += r * coef[n][:L] * coef[n2][:L]
    return out


def linear_amp_channel(
    rho: DensityOperator,
    g: float,
    nbar: float = 0.0,
    out_cutoff: int | None = None,
    eps_trunc: float = EPS_TRUNC,
) -> DensityOperator:
    """Phase-insensitive amplification with gain ``g`` and ancilla occupation ``nbar``.

    Output means scale by ``g`` and ``<Δa†Δa>`` maps to
    ``g^2 <Δa†Δa> + (nbar+1)(g^2-1)``.
    """
    if g < 1:
        raise InvalidSpec(f"gain must be >= 1, got {g}")
    if nbar < 0:
        raise InvalidSpec(f"nbar must be >= 0, got {nbar}")
    check_cutoff(rho, eps_trunc, what="channel input")
    if out_cutoff is None:
        out_cutoff = amplified_cutoff(rho.cutoff, g, nbar)
    if out_cutoff < rho.cutoff:
        raise CutoffInsufficient(
            f"output cutoff {out_cutoff} is below the input cutoff {rho.cutoff}; amplification never lowers it"
        )
    eta, gp = noisy_split(g, nbar)
    m = np.array(rho.matrix)
    if gp == 1.0:
        return DensityOperator(m, rho.exact_support).padded(out_cutoff)
    if eta < 1.0:
        m = _loss(m, eta)
    out = DensityOperator(_ideal_amplify(m, gp, out_cutoff))
    check_cutoff(out, eps_trunc, what="amplifier output")
    return out


def first_stage(alpha: complex, spec: AmplifierSpec) -> tuple[DensityOperator, float, StageDesign]:
    """Post-selected state after the immaculate stage, its probability and the design.

    For a deterministic design the "first stage" is the input itself.
    """
    d = design_stages(spec)
    if d.deterministic:
        return coherent_density(alpha), 1.0, d
    v, p = immaculate_apply(alpha, d.g1, spec.ncut)
    return density_from_vector(v), p, d


def mu2_amplify(
    alpha: complex,
    spec: AmplifierSpec,
    out_cutoff: int | None = None,
    eps_trunc: float = EPS_TRUNC,
) -> RunRecord:
    """Run the immaculate stage then the linear stage on ``|alpha>``.

    ``p_success`` is the first-stage probability; the linear stage is
    trace preserving.  When the design has ``g1 == 1`` the immaculate
    stage is skipped (deterministic device, ``p = 1``).
    """
    rho1, p, d = first_stage(alpha, spec)
    G = float(spec.gain)
    target = G * alpha
    if out_cutoff is None:
        out_cutoff = max(amplified_cutoff(rho1.cutoff, d.g2, spec.nbar_resolved), coherent_cutoff(target, 1e-14))
    rho_out = linear_amp_channel(rho1, d.g2, spec.nbar_resolved, out_cutoff, eps_trunc)
    F = fidelity_coherent(rho_out, target, eps_trunc)
    return RunRecord(
        rho_out=rho_out,
        p_success=p,
        fidelity=F,
        pfp=G * G * p * F,
        spec=spec,
        alpha_in=complex(alpha),
        design=d,
        rho_first_stage=rho1,
    )
