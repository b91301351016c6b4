"""Husimi Q functions on phase-space grids and SNR measures of amplified states.

Output states of the linear stage at high gain need cutoffs in the
thousands.  Instead of building them, the output Q function is obtained
from the small first-stage state: a quantum-limited amplifier of gain ``g``
maps ``Q(beta)`` to ``Q(beta/g)/g^2``, and a thermal ancilla is absorbed by
applying the equivalent pure loss first.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .channels import noisy_split, pure_loss
from .errors import InvalidSpec
from .fock import EPS_TRUNC, DensityOperator, antinormal_moment, overlap_coherent

Evaluator = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class GridSpec:
    re_min: float = -3.0
    re_max: float = 3.0
    im_min: float = -3.0
    im_max: float = 3.0
    n_re: int = 201
    n_im: int = 201

    def __post_init__(self):
        if not (self.re_max > self.re_min and self.im_max > self.im_min):
            raise InvalidSpec("grid bounds must satisfy max > min on both axes")
        if self.n_re < 2 or self.n_im < 2:
            raise InvalidSpec("grid needs at least 2 points per axis")

    @classmethod
    def square(cls, half_width: float, points: int, center: complex = 0j) -> "GridSpec":
        c = complex(center)
        return cls(c.real - half_width, c.real + half_width, c.imag - half_width, c.imag + half_width, points, points)

    @classmethod
    def parse(cls, text: str) -> "GridSpec":
        """``"re_min,re_max,im_min,im_max,n_re,n_im"``."""
        parts = text.split(",")
        if len(parts) != 6:
            raise InvalidSpec(f"grid needs 6 comma-separated fields, got {text!r}")
        try:
            lo_r, hi_r, lo_i, hi_i = (float(x) for x in parts[:4])
            n_r, n_i = int(parts[4]), int(parts[5])
        except ValueError as exc:
            raise InvalidSpec(f"bad grid {text!r}: {exc}") from None
        return cls(lo_r, hi_r, lo_i, hi_i, n_r, n_i)

    @property
    def re(self) -> np.ndarray:
        return np.linspace(self.re_min, self.re_max, self.n_re)

    @property
    def im(self) -> np.ndarray:
        return np.linspace(self.im_min, self.im_max, self.n_im)

    @property
    def cell_area(self) -> float:
        return (self.re_max - self.re_min) / (self.n_re - 1) * (self.im_max - self.im_min) / (self.n_im - 1)

    def points(self) -> np.ndarray:
        """Complex ``beta`` values, shape ``(n_re, n_im)``."""
        return self.re[:, None] + 1j * self.im[None, :]


@dataclass(frozen=True)
class QGrid:
    grid: GridSpec
    values: np.ndarray

    def integral(self) -> float:
        return float(np.sum(self.values) * self.grid.cell_area)

    def antinormal_moment(self, m: int, k: int) -> complex:
        """``<a^m a†^k>`` as the Riemann sum of ``beta^m conj(beta)^k Q``."""
        b = self.grid.points()
        return complex(np.sum(b**m * np.conj(b) ** k * self.values) * self.grid.cell_area)


def thread_count() -> int:
    env = os.environ.get("MU2AMP_THREADS")
    cpus = os.cpu_count() or 1
    if env is None or env == "":
        return cpus
    try:
        n = int(env)
    except ValueError:
        raise InvalidSpec(f"MU2AMP_THREADS must be an integer, got {env!r}") from None
    if n < 1:
        raise InvalidSpec("MU2AMP_THREADS must be >= 1")
    return min(n, cpus)


def q_function(rho: DensityOperator, beta: complex, eps_trunc: float = EPS_TRUNC) -> float:
    """``<beta|rho|beta> / pi``."""
    return float(overlap_coherent(rho, np.asarray(beta), eps_trunc)) / math.pi


def q_evaluator(rho: DensityOperator, eps_trunc: float = EPS_TRUNC) -> Evaluator:
    def q(betas):
        return overlap_coherent(rho, betas, eps_trunc) / math.pi

    return q


def q_rescale(qin: Evaluator, g: float) -> Evaluator:
    """Q function after a quantum-limited amplifier of gain ``g``."""
    if g < 1:
        raise InvalidSpec(f"gain must be >= 1, got {g}")
    if g == 1:
        return qin

    def q(betas):
        return qin(np.asarray(betas) / g) / (g * g)

    return q


def amplified_q(rho_first_stage: DensityOperator, g: float, nbar: float = 0.0, eps_trunc: float = EPS_TRUNC) -> Evaluator:
    """Q function of ``rho`` after amplification with gain ``g`` and ancilla ``nbar``."""
    if g < 1:
        raise InvalidSpec(f"gain must be >= 1, got {g}")
    eta, gp = noisy_split(g, nbar)
    return q_rescale(q_evaluator(pure_loss(rho_first_stage, eta), eps_trunc), gp)


def q_grid(q: Evaluator, grid: GridSpec, threads: int | None = None) -> QGrid:
    """Evaluate ``q`` on every grid point, one row of ``Re beta`` per task.

    Rows are fixed work units, so values do not depend on the thread count.
    """
    pts = grid.points()
    n = thread_count() if threads is None else max(1, threads)
    if n == 1:
        rows = [q(row) for row in pts]
    else:
        with ThreadPoolExecutor(max_workers=n) as pool:
            rows = list(pool.map(q, pts))
    return QGrid(grid, np.asarray(np.vstack(rows), dtype=float))


def amplified_antinormal_moment(
    rho_first_stage: DensityOperator, g: float, m: int, k: int, nbar: float = 0.0, eps_trunc: float = EPS_TRUNC
) -> complex:
    """``<a^m a†^k>`` of the amplified state from the rescaling law ``g^{m+k}``."""
    eta, gp = noisy_split(g, nbar)
    return gp ** (m + k) * antinormal_moment(pure_loss(rho_first_stage, eta), m, k, eps_trunc)


@dataclass(frozen=True)
class QuadratureSNR:
    snr_x1: float
    snr_x2: float
    sqrtp_snr_x1: float
    sqrtp_snr_x2: float
    snr_in: float
    phase: float


@dataclass(frozen=True)
class NumberSNR:
    snr_n: float
    sqrtp_snr_n: float
    snr_in: float


def _rotate(rho: DensityOperator, phase: float) -> DensityOperator:
    # e^{-i phase n} rho e^{i phase n}
    if phase == 0.0:
        return rho
    n = np.arange(rho.cutoff + 1)
    u = np.exp(-1j * phase * n)
    return DensityOperator(u[:, None] * rho.matrix * u.conj()[None, :], rho.exact_support)


def snr_quadratures_antinormal(
    rho_first_stage: DensityOperator,
    g2: float,
    alpha: complex,
    p_success: float = 1.0,
    nbar: float = 0.0,
    eps_trunc: float = EPS_TRUNC,
) -> QuadratureSNR:
    """Amplitude and phase-quadrature SNRs of the output, antinormally ordered.

    The input phase is rotated away first, so ``<x2> = 0`` and both SNRs use
    ``<x1>`` in the numerator: ``<x1>/sqrt(V_x1)`` and ``<x1>/sqrt(V_x2)``.
    """
    phase = float(np.angle(alpha)) if alpha != 0 else 0.0
    rho = _rotate(rho_first_stage, phase)
    a = amplified_antinormal_moment(rho, g2, 1, 0, nbar, eps_trunc)
    a2 = amplified_antinormal_moment(rho, g2, 2, 0, nbar, eps_trunc)
    aad = amplified_antinormal_moment(rho, g2, 1, 1, nbar, eps_trunc).real
    x1 = math.sqrt(2) * a.real
    x2 = math.sqrt(2) * a.imag
    # antinormal x1^2 = (a^2 + a†^2 + 2 a a†)/2, x2^2 = (2 a a† - a^2 - a†^2)/2
    v1 = a2.real + aad - x1 * x1
    v2 = aad - a2.real - x2 * x2
    s1 = x1 / math.sqrt(v1)
    s2 = x1 / math.sqrt(v2)
    rp = math.sqrt(p_success)
    return QuadratureSNR(s1, s2, rp * s1, rp * s2, math.sqrt(2) * abs(alpha), phase)


def snr_number(
    rho_first_stage: DensityOperator,
    g2: float,
    p_success: float = 1.0,
    alpha: complex | None = None,
    nbar: float = 0.0,
    eps_trunc: float = EPS_TRUNC,
) -> NumberSNR:
    """``<n>/sqrt(Var n)`` of the output from antinormal moments.

    Uses ``<n> = <a a†> - 1`` and ``<n^2> = <a^2 a†^2> - 3<n> - 2``.
    """
    aad = amplified_antinormal_moment(rho_first_stage, g2, 1, 1, nbar, eps_trunc).real
    a2ad2 = amplified_antinormal_moment(rho_first_stage, g2, 2, 2, nbar, eps_trunc).real
    n = aad - 1.0
    n2 = a2ad2 - 3.0 * n - 2.0
    var = n2 - n * n
    s = n / math.sqrt(var) if n > 0 else 0.0
    ref = abs(alpha) if alpha is not None else float("nan")
    return NumberSNR(s, math.sqrt(p_success) * s, ref)
