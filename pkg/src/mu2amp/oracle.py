"""Brute-force amplifier map: two-mode squeezing with a thermal ancilla, then a partial trace.

This is the reference the Kraus-operator channel is checked against.  Two
evaluation methods are provided:

``"dense"``
    Builds ``r(ab - a†b†)`` on the truncated product space, exponentiates it
    with :func:`scipy.linalg.expm` and traces out the ancilla.  Only viable
    for joint dimensions up to a few thousand.

``"sector"`` (default)
    The generator conserves ``n_a - n_b``, so the truncated product space
    splits into independent chains ``|d+k, k>``.  Each chain generator is a
    real antisymmetric tridiagonal matrix; it is exponentiated exactly
    through a symmetric tridiagonal eigendecomposition.  Same truncation
    semantics as ``"dense"``, but cutoffs in the thousands are affordable.
"""

from __future__ import annotations

import math
from collections import OrderedDict

import numpy as np
from scipy.linalg import eigh_tridiagonal, expm
from scipy.stats import nbinom

from .channels import amplified_cutoff
from .errors import CutoffInsufficient, InvalidSpec
from .fock import EPS_TRUNC, DensityOperator, check_cutoff

ANCILLA_TAIL = 1e-16
# chain tail allowed per unit amplitude weight of a column
CHAIN_TAIL = 1e-14
# columns whose amplitude weight w_m * sqrt(p_n) falls below this are dropped;
# the weight bounds their coherences with every other column
NEGLIGIBLE = 1e-16
CHAIN_STEP = 256
# primary levels always evolved in a sector, so that other inputs at the
# same gain reuse the columns
EAGER_LEVELS = 4

# per-sector chain length and evolved columns, keyed by (r, ancilla weights, d, chain_cutoff)
_SECTOR_CACHE: OrderedDict = OrderedDict()
_SECTOR_CACHE_SIZE = 256


def clear_cache() -> None:
    _SECTOR_CACHE.clear()


def thermal_tail(nbar: float, cutoff: int) -> float:
    """Thermal-state population above ``cutoff`` (before renormalization)."""
    if nbar < 0:
        raise InvalidSpec("nbar must be >= 0")
    if nbar == 0:
        return 0.0
    return (nbar / (nbar + 1.0)) ** (cutoff + 1)


def thermal_cutoff(nbar: float, tail: float = ANCILLA_TAIL) -> int:
    if nbar == 0:
        return 0
    q = nbar / (nbar + 1.0)
    return max(0, int(math.ceil(math.log(tail) / math.log(q))) - 1)


def thermal_weights(nbar: float, cutoff: int | None = None) -> np.ndarray:
    if nbar < 0:
        raise InvalidSpec("nbar must be >= 0 (states with mu^2 < 1 are not physical)")
    if cutoff is None:
        cutoff = thermal_cutoff(nbar)
    mu2 = nbar + 1.0
    w = (1.0 / mu2) * (1.0 - 1.0 / mu2) ** np.arange(cutoff + 1)
    return w / w.sum()


def thermal_state(nbar: float, cutoff: int | None = None) -> DensityOperator:
    """Diagonal thermal state of mean occupation ``nbar``, renormalized on the cutoff.

    The discarded population is available from :func:`thermal_tail`.
    """
    return DensityOperator(np.diag(thermal_weights(nbar, cutoff)).astype(complex))


def squeeze_parameter(g: float) -> float:
    if g < 1:
        raise InvalidSpec(f"gain must be >= 1, got {g}")
    return math.log(g + math.sqrt(g * g - 1.0))


def two_mode_amplify(
    rho_a: DensityOperator,
    nbar: float,
    g: float,
    out_cutoff: int | None = None,
    ancilla_cutoff: int | None = None,
    chain_cutoff: int | None = None,
    method: str = "sector",
    eps_trunc: float = EPS_TRUNC,
) -> DensityOperator:
    """``Tr_B[S(r) rho ⊗ sigma S(r)†]`` with ``g = cosh r`` and thermal ``sigma``.

    Parameters
    ----------
    out_cutoff
        Cutoff of the returned primary-mode state.  Defaults to the same
        policy as :func:`mu2amp.channels.linear_amp_channel`.
    ancilla_cutoff
        Cutoff of the input thermal state.
    chain_cutoff
        Largest ancilla photon number kept during the evolution.  By default
        it is chosen per sector from a negative-binomial tail bound, and for
        ``method="dense"`` it is the joint cutoff of both modes.

    Raises :class:`CutoffInsufficient` if the evolved state reaches the edge
    of the truncated space or the returned state fills its top levels.
    """
    if g - 1.0 < 1e-14:
        if g < 1:
            raise InvalidSpec(f"gain must be >= 1, got {g}")
        out = rho_a if out_cutoff is None else rho_a.padded(max(out_cutoff, rho_a.cutoff)).cropped(out_cutoff)
        return DensityOperator(np.array(out.matrix), rho_a.exact_support)
    check_cutoff(rho_a, eps_trunc, what="oracle input")
    if out_cutoff is None:
        out_cutoff = amplified_cutoff(rho_a.cutoff, g, nbar)
    w = thermal_weights(nbar, ancilla_cutoff)
    r = squeeze_parameter(g)
    if method == "dense":
        full = _dense(rho_a.matrix, w, r, chain_cutoff if chain_cutoff is not None else out_cutoff)
    elif method == "sector":
        full = _sector(rho_a.matrix, w, r, g, out_cutoff, chain_cutoff, eps_trunc)
    else:
        raise InvalidSpec(f"unknown method {method!r}")
    n = full.shape[0]
    if n <= out_cutoff:
        padded = np.zeros((out_cutoff + 1, out_cutoff + 1), dtype=complex)
        padded[:n, :n] = full
        full = padded
    out = DensityOperator(full[: out_cutoff + 1, : out_cutoff + 1])
    check_cutoff(out, eps_trunc, what="oracle output")
    return out


def _dense(rho: np.ndarray, w: np.ndarray, r: float, joint: int) -> np.ndarray:
    da = joint + 1
    db = joint + 1
    if da * db > 4000:
        raise InvalidSpec(f"dense oracle at joint dimension {da * db} is too large; use method='sector'")
    lower = np.diag(np.sqrt(np.arange(1, da)), 1)
    A = np.kron(lower, np.eye(db))
    B = np.kron(np.eye(da), lower)
    gen = r * (A @ B - A.T @ B.T)
    U = expm(gen)
    rho_full = np.zeros((da, da), dtype=complex)
    rho_full[: rho.shape[0], : rho.shape[0]] = rho
    sigma = np.zeros(db)
    sigma[: min(db, w.size)] = w[:db]
    joint_state = np.kron(rho_full, np.diag(sigma))
    evolved = U @ joint_state @ U.T
    t = evolved.reshape(da, db, da, db)
    anc = np.einsum("ibib->b", t).real
    if anc[-2:].sum() > EPS_TRUNC:
        raise CutoffInsufficient(
            f"dense oracle: ancilla edge holds {anc[-2:].sum():.3g}; increase chain_cutoff"
        )
    return np.einsum("ibjb->ij", t)


def _chain_length(n_max: int, m_max: int, g: float, tol: float) -> int:
    # ancilla photon number after squeezing |n, m>, bounded by m plus
    # a negative binomial number of created pairs
    return int(m_max + nbinom.isf(tol, n_max + m_max + 1, 1.0 / (g * g)) + 2)


def _sector_columns(r, g, d, w, ms, chain_cutoff):
    """Evolved columns ``exp(L_d) e_m`` of chain ``d``, as arrays over absolute ancilla number."""
    key = (r, w.tobytes(), d, chain_cutoff)
    entry = _SECTOR_CACHE.get(key)
    if entry is None or not set(ms) <= entry.keys():
        kmin = max(0, -d)
        top = max(EAGER_LEVELS, max(d + m for m in ms))
        todo = {m for m in range(kmin, w.size) if d + m <= top and w[m] > NEGLIGIBLE} | set(ms)
        if entry is not None:
            todo |= entry.keys()
        todo = sorted(todo)
        if chain_cutoff is None:
            # tolerance from the ancilla weight alone keeps K independent of the input
            K = max(_chain_length(d + m, m, g, min(1e-3, CHAIN_TAIL / w[m])) for m in todo)
            K = -(-K // CHAIN_STEP) * CHAIN_STEP
        else:
            K = chain_cutoff
        K = max(K, todo[-1] + 1)
        ks = np.arange(kmin, K + 1)
        off = r * np.sqrt((d + ks[1:]) * ks[1:].astype(float))
        # chain generator L[k-1,k] = off = -L[k,k-1] equals P (i H) P* with
        # H symmetric tridiagonal and P = diag(i^j)
        evals, V = eigh_tridiagonal(np.zeros(ks.size), off)
        phase = (1j) ** (np.arange(ks.size) % 4)
        js = np.array(todo) - kmin
        C = V[js, :].T * np.exp(1j * evals)[:, None]
        U = (V @ C.real + 1j * (V @ C.imag)) * phase[:, None] * np.conj(phase[js])[None, :]
        entry = {}
        for i, m in enumerate(todo):
            u = np.zeros(K + 1, dtype=complex)
            u[kmin:] = U[:, i]
            entry[m] = u
        _SECTOR_CACHE[key] = entry
        if len(_SECTOR_CACHE) > _SECTOR_CACHE_SIZE:
            _SECTOR_CACHE.popitem(last=False)
    _SECTOR_CACHE.move_to_end(key)
    return [entry[m] for m in ms]


def _sector(rho, w, r, g, out_cutoff, chain_cutoff, eps_trunc):
    d_in = rho.shape[0] - 1
    pops = np.clip(rho.diagonal().real, 0.0, None)
    M = w.size - 1
    # evolved columns indexed by absolute ancilla photon number
    vectors: dict[tuple[int, int], np.ndarray] = {}
    edge_mass = 0.0
    for d in range(-M, d_in + 1):
        # chain |d+k, k>; columns are the input levels |n, m> with n - m = d
        cols = [(d + m, m) for m in range(max(0, -d), M + 1) if d + m <= d_in]
        cols = [(n, m) for n, m in cols if w[m] * math.sqrt(pops[n]) > NEGLIGIBLE]
        if not cols:
            continue
        for (n, m), u in zip(cols, _sector_columns(r, g, d, w, [m for _, m in cols], chain_cutoff)):
            vectors[(n, m)] = u
            edge_mass += w[m] * pops[n] * float(np.sum(np.abs(u[-2:]) ** 2))
    if edge_mass > eps_trunc:
        raise CutoffInsufficient(
            f"oracle chain edge holds {edge_mass:.3g} of the population; increase chain_cutoff"
        )
    size = max(out_cutoff, max((v.size - 1 + (n - m) for (n, m), v in vectors.items()), default=0)) + 1
    out = np.zeros((size, size), dtype=complex)
    for m in range(M + 1):
        ns = [n for n in range(d_in + 1) if (n, m) in vectors]
        for n in ns:
            u = vectors[(n, m)]
            for n2 in ns:
                c = rho[n, n2]
                if c == 0:
                    continue
                u2 = vectors[(n2, m)]
                L = min(u.size, u2.size)
                k = np.arange(L)
                rows = n - m + k
                cols = n2 - m + k
                ok = (rows >= 0) & (cols >= 0)
                out[rows[ok], cols[ok]] += w[m] * c * u[:L][ok] * np.conj(u2[:L][ok])
    return out
