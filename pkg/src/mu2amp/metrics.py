"""Closed-form figures of merit for mu^2-amplifiers acting on coherent states.

Every function depends on the input only through ``|alpha|`` and accepts
numpy arrays for ``alpha_abs`` so sweeps can be evaluated in one call.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaincc

from .design import AmplifierSpec, design_stages
from .errors import InvalidSpec, SingularOrdering

BOUNDARY_TOL = 1e-12


def e_trunc(x, N: int):
    """Truncated exponential ``sum_{n=0}^{N} x^n / n!`` by a running term."""
    if N < 0:
        raise InvalidSpec("N must be >= 0")
    x = np.asarray(x, dtype=float)
    term = np.ones_like(x)
    total = np.ones_like(x)
    for n in range(1, N + 1):
        term = term * x / n
        total = total + term
    return total if total.ndim else float(total)


def p_success_exact(alpha_abs, g1: float, N: int):
    """Success probability ``<alpha|K†K|alpha>`` of the number-cutoff Kraus stage."""
    if g1 < 1:
        raise InvalidSpec("g1 must be >= 1")
    a2 = np.asarray(alpha_abs, dtype=float) ** 2
    return np.exp(-a2) * e_trunc(g1 * g1 * a2, N) / g1 ** (2 * N)


def fidelity_exact(alpha_abs, g1: float, G: float, N: int):
    """Output fidelity with ``|G alpha>`` after the immaculate and ideal stages."""
    if g1 > G * (1 + 1e-15):
        raise InvalidSpec(f"g1={g1} exceeds the total gain {G}")
    x = g1 * g1 * np.asarray(alpha_abs, dtype=float) ** 2
    return (g1 * g1 / (G * G)) * np.exp(-x) * e_trunc(x, N)


def pfp_exact(alpha_abs, g1: float, N: int):
    """Exact gain-corrected probability-fidelity product; ``G`` cancels out."""
    if g1 < 1:
        raise InvalidSpec("g1 must be >= 1")
    a2 = np.asarray(alpha_abs, dtype=float) ** 2
    x = g1 * g1 * a2
    # exp(-x) e_N(x) is the regularized upper gamma Q(N+1, x); using it keeps
    # the g1 = 1 curve at or below 1 instead of a rounding ulp above
    q = gammaincc(N + 1, x)
    with np.errstate(over="ignore", invalid="ignore"):
        eN = e_trunc(x, N)
        direct = np.exp(-(g1 * g1 + 1) * a2) * eN * eN
        via_q = q * q * np.exp((g1 * g1 - 1) * a2)
    out = np.where(q > 1e-140, via_q, direct) / g1 ** (2 * (N - 1))
    return out if out.ndim else float(out)


def pfp_bound(alpha_abs, g1: float):
    """``PFP_0 = g1^2 exp(-(g1-1)^2 |alpha|^2)``, reached by skipping the immaculate stage."""
    if g1 < 1:
        raise InvalidSpec("g1 must be >= 1")
    a2 = np.asarray(alpha_abs, dtype=float) ** 2
    return g1 * g1 * np.exp(-((g1 - 1) ** 2) * a2)


def alpha0(g1: float) -> float:
    """Amplitude where ``PFP_0`` crosses 1; infinite for ``g1 = 1``."""
    if g1 < 1:
        raise InvalidSpec("g1 must be >= 1")
    if g1 == 1:
        return math.inf
    return math.sqrt(2 * math.log(g1)) / (g1 - 1)


def spec_metrics(alpha_abs, spec: AmplifierSpec) -> dict:
    """``p``, ``F`` and ``PFP`` for a spec.

    A design with ``g1 == 1`` has no immaculate stage at all: the device is
    the deterministic (non)ideal amplifier, so ``p = 1`` and the output is a
    Gaussian centred on the target for every ``alpha``.
    """
    d = design_stages(spec)
    a = np.asarray(alpha_abs, dtype=float)
    G = float(spec.gain)
    if d.deterministic:
        p = np.ones_like(a)
        F = np.full_like(a, 1.0 / ((spec.nbar_resolved + 1) * (G * G - 1) + 1))
    else:
        p = p_success_exact(a, d.g1, spec.ncut)
        F = fidelity_exact(a, d.g1, G, spec.ncut)
    return {"p_success": p, "fidelity": F, "pfp": G * G * p * F, "design": d}


def p_success_region(mu2, G, N: int):
    """Success probability inside the operating region, ``[mu2(G^2-1)+1]^N / G^{2N}``."""
    mu2 = np.asarray(mu2, dtype=float)
    G = np.asarray(G, dtype=float)
    return ((mu2 * (G * G - 1) + 1) / (G * G)) ** N


def pfp_region(mu2, G, N: int):
    """PFP inside the operating region; identically 1 for ``N = 1``."""
    mu2 = np.asarray(mu2, dtype=float)
    G = np.asarray(G, dtype=float)
    return ((mu2 * (G * G - 1) + 1) / (G * G)) ** (N - 1)


def fidelity_mu(mu2, G):
    return 1.0 / (np.asarray(mu2, dtype=float) * (np.asarray(G, dtype=float) ** 2 - 1) + 1)


def p_bound_mu(mu2, G):
    """Uncertainty-principle ceiling on success probability."""
    G = np.asarray(G, dtype=float)
    return (np.asarray(mu2, dtype=float) * (G * G - 1) + 1) / (G * G)


def _check_s(s: float) -> float:
    if not -1.0 <= s <= 1.0:
        raise InvalidSpec(f"ordering parameter s={s} outside [-1, 1]")
    return float(s)


def sigma_out_sq(s: float, mu2, G):
    """s-ordered output variance for coherent input."""
    s = _check_s(s)
    return np.asarray(mu2, dtype=float) * (np.asarray(G, dtype=float) ** 2 - 1) + (1 - s) / 2


def added_noise(s: float, mu2):
    """High-gain added noise ``A(s) = mu2 - (1-s)/2``."""
    s = _check_s(s)
    return np.asarray(mu2, dtype=float) - (1 - s) / 2


def added_noise_input(s: float, mu2, G):
    """Input-referred added noise ``(1 - 1/G^2)(mu2 - (1-s)/2)``."""
    G = np.asarray(G, dtype=float)
    return (1 - 1 / (G * G)) * added_noise(s, mu2)


def snr_in(s: float, alpha):
    s = _check_s(s)
    if s == 1.0:
        raise SingularOrdering("normal ordering has zero input noise, so the SNR is singular")
    return np.sqrt(2) * np.asarray(alpha, dtype=float) / np.sqrt((1 - s) / 2)


def snr_out(s: float, alpha, mu2, G):
    s = _check_s(s)
    if s == 1.0:
        raise SingularOrdering("normal ordering has zero input noise, so the SNR is singular")
    G = np.asarray(G, dtype=float)
    return np.sqrt(2) * G * np.asarray(alpha, dtype=float) / np.sqrt(sigma_out_sq(s, mu2, G))


def noise_figure(s: float, mu2, G, N: int):
    """``SNR_in^2 / (p SNR_out^2)`` with the operating-region success probability."""
    s = _check_s(s)
    if s == 1.0:
        raise SingularOrdering("normal ordering gives a singular noise figure")
    mu2 = np.asarray(mu2, dtype=float)
    G = np.asarray(G, dtype=float)
    h = (1 - s) / 2
    core = mu2 * (G * G - 1)
    return G ** (2 * (N - 1)) / h * (core + h) / (core + 1) ** N


@dataclass(frozen=True)
class BumpReport:
    alpha_bump: float
    pfp_peak: float
    alpha0: float


def bump_report(g1: float | None = None, gain: float | None = None, mu2: float | None = None) -> BumpReport:
    """Location and height of the ``N = 1`` PFP peak.

    Pass ``g1`` directly, or ``gain`` and ``mu2`` to derive it from the
    optimal stage design.
    """
    if g1 is None:
        if gain is None or mu2 is None:
            raise InvalidSpec("bump_report needs g1, or both gain and mu2")
        g1 = design_stages(AmplifierSpec(mu2=mu2, gain=gain, ncut=1)).g1
    if g1 <= 1:
        raise InvalidSpec("no PFP bump without an immaculate stage (g1 <= 1)")
    g1sq = g1 * g1
    a_b = math.sqrt((g1sq - 1) / (g1sq * (g1sq + 1)))
    peak = (4 / math.e) * math.exp(1 / g1sq) / (1 + 1 / g1sq) ** 2
    return BumpReport(alpha_bump=a_b, pfp_peak=peak, alpha0=alpha0(g1))


def perfect_bump(G: float) -> tuple[float, float]:
    """Perfect-amplifier (mu2 = 1/2) bump written in the overall gain.

    Returns ``(g1^2 |alpha_bump|^2, peak PFP)``.
    """
    G2 = G * G
    return (G2 - 1) / (3 * G2 + 1), 16 / (9 * math.sqrt(math.e)) * math.exp(1 / (2 * G2)) / (1 + 1 / (3 * G2)) ** 2


class Regime(enum.Enum):
    IMMACULATE_DOMINANT = "ImmaculateDominant"
    IDEAL_DOMINANT = "IdealDominant"
    BOUNDARY = "Boundary"


def regime_classify(mu2: float, G: float) -> Regime:
    x = mu2 * G * G
    if abs(x - 1.0) <= BOUNDARY_TOL:
        return Regime.BOUNDARY
    return Regime.IDEAL_DOMINANT if x > 1 else Regime.IMMACULATE_DOMINANT
