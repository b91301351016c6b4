"""Amplifier parameters and the two-stage gain split."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

from .errors import InvalidSpec, SuboptimalSpec


@dataclass(frozen=True)
class AmplifierSpec:
    """Design parameters of a mu^2-amplifier.

    Attributes
    ----------
    mu2 : float
        Noise parameter; 0 immaculate, 1/2 perfect, 1 ideal, >1 nonideal.
    gain : float
        Overall amplitude gain ``G >= 1``.
    ncut : int
        Number cutoff ``N`` of the immaculate stage.
    nbar : float or None
        Thermal quanta of the second stage.  ``None`` picks the optimal
        value: 0 for ``mu2 <= 1`` and ``mu2 - 1`` above.
    """

    mu2: float
    gain: float
    ncut: int = 1
    nbar: float | None = None

    def __post_init__(self):
        if self.gain < 1:
            raise InvalidSpec(f"gain must be >= 1, got {self.gain}")
        if self.mu2 < 0:
            raise InvalidSpec(f"mu2 must be >= 0, got {self.mu2}")
        if self.ncut < 1:
            raise InvalidSpec(f"ncut must be >= 1, got {self.ncut}")
        if self.nbar is not None and self.nbar < 0:
            raise InvalidSpec(f"nbar must be >= 0, got {self.nbar}")

    @property
    def nbar_resolved(self) -> float:
        if self.nbar is not None:
            return float(self.nbar)
        return max(0.0, self.mu2 - 1.0)


@dataclass(frozen=True)
class StageDesign:
    g1: float
    g2: float
    alpha_tilde: float

    @property
    def deterministic(self) -> bool:
        """True when the immaculate stage is absent (``g1 == 1``)."""
        return self.g1 == 1.0


def design_stages(spec: AmplifierSpec) -> StageDesign:
    """Split the gain so that ``g2^2 = mu2 (G^2-1)/(nbar+1) + 1`` and ``g1 = G/g2``.

    Warns with :class:`SuboptimalSpec` when ``nbar`` is above its optimal
    value, since that forces a larger (less probable) immaculate gain.
    """
    nbar = spec.nbar_resolved
    G = float(spec.gain)
    g2sq = spec.mu2 * (G * G - 1.0) / (nbar + 1.0) + 1.0
    g2 = math.sqrt(g2sq)
    if g2 > G * (1 + 1e-15):
        raise InvalidSpec(
            f"mu2={spec.mu2} needs nbar >= {spec.mu2 - 1:g} at gain {G}; got nbar={nbar}"
        )
    if g2 >= G * (1 - 1e-14):
        g2 = G
    if nbar > max(0.0, spec.mu2 - 1.0):
        warnings.warn(
            f"nbar={nbar} exceeds the optimal {max(0.0, spec.mu2 - 1.0):g}; "
            "the immaculate stage then needs more gain and succeeds less often",
            SuboptimalSpec,
            stacklevel=2,
        )
    g1 = 1.0 if g2 == G else G / g2
    return StageDesign(g1=g1, g2=g2, alpha_tilde=math.sqrt(spec.ncut) / g1)
