"""Truncated single-mode Fock-space numerics.

States are dense complex arrays over the number basis ``|0>, ..., |D>``.
Every operation that reads a state checks that the top two levels are
(nearly) empty and raises :class:`CutoffInsufficient` otherwise, unless
the state is flagged ``exact_support`` (its support is known to end
inside the basis, e.g. the output of a number-cutoff Kraus operator).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import eigvals_banded, eigvalsh
from scipy.special import gammainc, gammaln

from .errors import CutoffInsufficient, InvalidSpec

EPS_NORM = 1e-10
EPS_HERM = 1e-12
EPS_PSD = 1e-9
EPS_TRUNC = 1e-10


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=complex)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class FockVector:
    """Pure state ``sum_n c_n |n>`` truncated at ``cutoff``.

    ``tail`` is the norm lost to truncation for states built from an
    infinite expansion (coherent states); it is 0 for exact constructions.
    """

    amplitudes: np.ndarray
    tail: float = 0.0
    exact_support: bool = False

    def __post_init__(self):
        amps = _frozen(self.amplitudes)
        if amps.ndim != 1 or amps.size == 0:
            raise InvalidSpec("amplitudes must be a non-empty 1-D sequence")
        object.__setattr__(self, "amplitudes", amps)

    @property
    def cutoff(self) -> int:
        return self.amplitudes.size - 1

    @property
    def norm_sq(self) -> float:
        return float(np.vdot(self.amplitudes, self.amplitudes).real)

    def is_normalized(self, tol: float = EPS_NORM) -> bool:
        return abs(self.norm_sq - 1.0) <= tol

    def normalized(self) -> "FockVector":
        return FockVector(self.amplitudes / np.sqrt(self.norm_sq), self.tail, self.exact_support)


@dataclass(frozen=True)
class DensityOperator:
    """Mixed state as a dense ``(D+1) x (D+1)`` complex matrix."""

    matrix: np.ndarray
    exact_support: bool = False

    def __post_init__(self):
        m = _frozen(self.matrix)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise InvalidSpec("density matrix must be square")
        object.__setattr__(self, "matrix", m)

    @property
    def cutoff(self) -> int:
        return self.matrix.shape[0] - 1

    @property
    def trace(self) -> float:
        return float(np.trace(self.matrix).real)

    @property
    def purity(self) -> float:
        return float(np.vdot(self.matrix.conj().T, self.matrix).real)

    @property
    def populations(self) -> np.ndarray:
        return self.matrix.diagonal().real.copy()

    def hermiticity_error(self) -> float:
        return float(np.abs(self.matrix - self.matrix.conj().T).max())

    def min_eigenvalue(self) -> float:
        return float(eigvalsh(self.matrix)[0])

    def validate(self, normalized: bool = True) -> None:
        """Raise :class:`InvalidSpec` if the matrix is not a valid state."""
        if self.hermiticity_error() > EPS_HERM:
            raise InvalidSpec(f"not Hermitian (error {self.hermiticity_error():.3g})")
        if normalized and abs(self.trace - 1.0) > EPS_NORM:
            raise InvalidSpec(f"trace {self.trace!r} differs from 1")
        if self.min_eigenvalue() < -EPS_PSD:
            raise InvalidSpec(f"negative eigenvalue {self.min_eigenvalue():.3g}")

    def bandwidth(self) -> int:
        """Largest ``|i - j|`` with a nonzero entry."""
        nz = np.nonzero(self.matrix)
        if nz[0].size == 0:
            return 0
        return int(np.abs(nz[0] - nz[1]).max())

    def padded(self, cutoff: int) -> "DensityOperator":
        """Embed into a larger basis (zeros on the new levels)."""
        if cutoff < self.cutoff:
            raise InvalidSpec("padded() cannot shrink a state; use cropped()")
        out = np.zeros((cutoff + 1, cutoff + 1), dtype=complex)
        d = self.cutoff + 1
        out[:d, :d] = self.matrix
        return DensityOperator(out, self.exact_support)

    def cropped(self, cutoff: int) -> "DensityOperator":
        return DensityOperator(self.matrix[: cutoff + 1, : cutoff + 1], self.exact_support)


@dataclass(frozen=True)
class QuadratureStats:
    """Means and symmetric-ordered (co)variances of ``x1``, ``x2``."""

    mean_x1: float
    mean_x2: float
    var_x1_sym: float
    var_x2_sym: float
    cov_sym: float = field(default=0.0)

    @property
    def var_x1_antinormal(self) -> float:
        return self.var_x1_sym + 0.5

    @property
    def var_x2_antinormal(self) -> float:
        return self.var_x2_sym + 0.5


def log_sqrt_factorials(cutoff: int) -> np.ndarray:
    """``log sqrt(n!)`` for ``n = 0..cutoff``."""
    return 0.5 * gammaln(np.arange(cutoff + 1) + 1.0)


def coherent_amplitudes(beta, cutoff: int) -> np.ndarray:
    """Number-basis amplitudes of ``|beta>``; shape ``beta.shape + (cutoff+1,)``.

    Computed in log-magnitude so that neither ``n!`` nor ``|beta|^n``
    overflow for large ``n``.
    """
    beta = np.asarray(beta, dtype=complex)
    n = np.arange(cutoff + 1)
    r = np.abs(beta)[..., None]
    lsf = log_sqrt_factorials(cutoff)
    with np.errstate(divide="ignore", invalid="ignore"):
        logr = np.log(r)
        # 0**0 = 1, 0**n = 0
        logmag = np.where(n == 0, 0.0, n * logr) - lsf - 0.5 * r**2
    phase = np.exp(1j * n * np.angle(beta)[..., None])
    return np.exp(logmag) * phase


def coherent_tail(alpha: complex, cutoff: int) -> float:
    """Norm of ``|alpha>`` beyond level ``cutoff`` (accurate even when tiny)."""
    x = abs(alpha) ** 2
    if x == 0.0:
        return 0.0
    # P(Poisson(x) > D) is the regularized lower incomplete gamma P(D+1, x)
    return float(gammainc(cutoff + 1, x))


def coherent_cutoff(alpha: complex, tail: float = 1e-14, minimum: int = 4) -> int:
    """Smallest cutoff whose coherent-state tail is below ``tail``."""
    d = max(minimum, int(np.ceil(abs(alpha) ** 2)))
    while coherent_tail(alpha, d) > tail:
        d += 1
    return d


def coherent_state(alpha: complex, cutoff: int) -> FockVector:
    """Truncated coherent state; the lost norm is recorded in ``tail``."""
    if cutoff < 0:
        raise InvalidSpec("cutoff must be >= 0")
    amps = coherent_amplitudes(alpha, cutoff)
    return FockVector(amps, tail=coherent_tail(alpha, cutoff))


def number_state(n: int, cutoff: int) -> FockVector:
    if not 0 <= n <= cutoff:
        raise InvalidSpec(f"level {n} outside 0..{cutoff}")
    amps = np.zeros(cutoff + 1, dtype=complex)
    amps[n] = 1.0
    return FockVector(amps, exact_support=True)


def density_from_vector(v: FockVector) -> DensityOperator:
    a = v.amplitudes
    return DensityOperator(np.outer(a, a.conj()), v.exact_support)


def coherent_density(alpha: complex, cutoff: int | None = None, normalize: bool = True) -> DensityOperator:
    """``|alpha><alpha|`` at a cutoff chosen from the tail unless given."""
    if cutoff is None:
        cutoff = coherent_cutoff(alpha)
    v = coherent_state(alpha, cutoff)
    if normalize:
        v = v.normalized()
    return density_from_vector(v)


def check_cutoff(rho: DensityOperator, eps_trunc: float = EPS_TRUNC, what: str = "state") -> None:
    """Raise if the top two levels of ``rho`` hold more than ``eps_trunc``."""
    if rho.exact_support:
        return
    pops = rho.populations
    top = float(pops[-2:].sum())
    if top > eps_trunc:
        raise CutoffInsufficient(
            f"{what}: population {top:.3g} in the top two levels of a cutoff-{rho.cutoff} "
            f"basis exceeds {eps_trunc:.1g}; rerun with a larger cutoff"
        )


def _log_ladder(n: np.ndarray, steps: int, up: bool) -> np.ndarray:
    # log of the matrix element of a^steps (up=False) or a†^steps (up=True) on |n>
    if up:
        return 0.5 * (gammaln(n + steps + 1) - gammaln(n + 1))
    return 0.5 * (gammaln(n + 1) - gammaln(n - steps + 1))


def normal_moment(rho: DensityOperator, k: int, m: int, eps_trunc: float = EPS_TRUNC) -> complex:
    """``Tr[rho a†^k a^m]`` from exact ladder matrix elements."""
    return _moment(rho, k, m, antinormal=False, eps_trunc=eps_trunc)


def antinormal_moment(rho: DensityOperator, m: int, k: int, eps_trunc: float = EPS_TRUNC) -> complex:
    """``Tr[rho a^m a†^k]`` from exact ladder matrix elements."""
    return _moment(rho, k, m, antinormal=True, eps_trunc=eps_trunc)


def _moment(rho, k, m, antinormal, eps_trunc):
    if k < 0 or m < 0:
        raise InvalidSpec("moment orders must be non-negative")
    if k + m > rho.cutoff and not rho.exact_support:
        raise CutoffInsufficient(f"moment order {k + m} exceeds cutoff {rho.cutoff}")
    check_cutoff(rho, eps_trunc)
    D = rho.cutoff
    # X|n> = coef(n)|n + k - m>, Tr[rho X] = sum_n rho[n, n+k-m] coef(n)
    n = np.arange(D + 1)
    j = n + k - m
    ok = (j >= 0) & (j <= D)
    if antinormal:
        nn = n[ok]
        logc = _log_ladder(nn, k, up=True) + _log_ladder(nn + k, m, up=False)
    else:
        ok &= n >= m
        nn = n[ok]
        logc = _log_ladder(nn, m, up=False) + _log_ladder(nn - m, k, up=True)
    vals = rho.matrix[nn, nn + k - m]
    return complex(np.sum(vals * np.exp(logc)))


def quadrature_stats(rho: DensityOperator, eps_trunc: float = EPS_TRUNC) -> QuadratureStats:
    """Means and symmetric variances of ``x1 = (a+a†)/√2``, ``x2 = (a-a†)/(i√2)``."""
    a = normal_moment(rho, 0, 1, eps_trunc)
    a2 = normal_moment(rho, 0, 2, eps_trunc)
    n = normal_moment(rho, 1, 1, eps_trunc).real
    m1, m2 = np.sqrt(2) * a.real, np.sqrt(2) * a.imag
    x1sq = a2.real + n + 0.5
    x2sq = -a2.real + n + 0.5
    return QuadratureStats(
        mean_x1=float(m1),
        mean_x2=float(m2),
        var_x1_sym=float(x1sq - m1**2),
        var_x2_sym=float(x2sq - m2**2),
        cov_sym=float(a2.imag - m1 * m2),
    )


def fidelity_coherent(rho: DensityOperator, beta: complex, eps_trunc: float = EPS_TRUNC) -> float:
    """``<beta|rho|beta>``, the overlap of ``rho`` with a coherent state."""
    return float(overlap_coherent(rho, np.asarray(beta), eps_trunc))


def overlap_coherent(rho: DensityOperator, betas, eps_trunc: float = EPS_TRUNC, chunk: int = 4096) -> np.ndarray:
    """Vectorized ``<beta|rho|beta>`` over an array of ``beta`` values.

    Uses only the nonzero diagonals of ``rho``, so banded states (outputs of
    phase-insensitive channels on low-cutoff inputs) cost ``O(points * D * band)``.
    Since ``rho`` has no support above its cutoff, the coherent-state tail
    beyond it never contributes; only ``rho`` itself is checked.
    """
    check_cutoff(rho, eps_trunc)
    betas = np.asarray(betas, dtype=complex)
    flat = betas.ravel()
    D = rho.cutoff
    band = rho.bandwidth()
    out = np.empty(flat.size)
    for start in range(0, flat.size, chunk):
        c = coherent_amplitudes(flat[start : start + chunk], D)
        if band >= D // 2:
            val = np.einsum("pi,ij,pj->p", c.conj(), rho.matrix, c, optimize=True)
        else:
            val = np.einsum("pi,i,pi->p", c.conj(), rho.matrix.diagonal(), c)
            for off in range(1, band + 1):
                diag = rho.matrix.diagonal(off)  # rho[i, i+off]
                t = np.einsum("pi,i,pi->p", c[:, :-off].conj(), diag, c[:, off:])
                val = val + 2 * t.real
        out[start : start + chunk] = val.real
    return out.reshape(betas.shape)


def trace_distance(rho: DensityOperator | np.ndarray, sigma: DensityOperator | np.ndarray) -> float:
    """``½ ||rho - sigma||_1`` for Hermitian matrices of equal size."""
    a = rho.matrix if isinstance(rho, DensityOperator) else np.asarray(rho)
    b = sigma.matrix if isinstance(sigma, DensityOperator) else np.asarray(sigma)
    if a.shape != b.shape:
        raise InvalidSpec(f"shape mismatch {a.shape} vs {b.shape}")
    diff = a - b
    diff = 0.5 * (diff + diff.conj().T)
    nz = np.nonzero(np.abs(diff) > 0)
    band = int(np.abs(nz[0] - nz[1]).max()) if nz[0].size else 0
    n = diff.shape[0]
    if band < n // 4:
        # upper banded storage: ab[band + i - j, j] = diff[i, j]
        ab = np.zeros((band + 1, n), dtype=complex)
        for off in range(band + 1):
            ab[band - off, off:] = diff.diagonal(off)
        ev = eigvals_banded(ab, lower=False)
    else:
        ev = eigvalsh(diff)
    return 0.5 * float(np.abs(ev).sum())
