"""Tabular datasets behind the CLI subcommands.

Each builder returns a :class:`Table`; serialization lives in :mod:`mu2amp.cli`.
Missing entries are ``None`` (written as ``-`` in CSV and ``null`` in JSON).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import metrics as mt
from .channels import first_stage
from .design import AmplifierSpec, design_stages
from .quasiprob import GridSpec, amplified_q, q_grid, snr_number, snr_quadratures_antinormal


@dataclass
class Table:
    columns: list[str]
    rows: list[list]
    meta: dict = field(default_factory=dict)

    def column(self, name: str) -> list:
        i = self.columns.index(name)
        return [r[i] for r in self.rows]


def design_table(mu2_values, gain: float, nbar: float | None = None) -> Table:
    rows = []
    for mu2 in mu2_values:
        spec = AmplifierSpec(mu2=mu2, gain=gain, ncut=1, nbar=nbar)
        d = design_stages(spec)
        if d.deterministic:
            t1 = t2 = None
        else:
            t1, t2 = 1.0 / d.g1, math.sqrt(2.0) / d.g1
        rows.append([mu2, gain, spec.nbar_resolved, d.g1, d.g2, t1, t2])
    return Table(["mu2", "gain", "nbar", "g1", "g2", "alpha_tilde_n1", "alpha_tilde_n2"], rows)


TABLE1_ROWS = ["g1_sq", "g2_sq", "fidelity", "p_success", "pfp", "nf_antinormal", "nf_symmetric"]


def table1_column(mu2: float, G: float, N: int) -> list[float]:
    """Operating-region quantities for one ``mu2`` from the pipeline functions."""
    d = design_stages(AmplifierSpec(mu2=mu2, gain=G, ncut=N))
    return [
        d.g1**2,
        d.g2**2,
        float(mt.fidelity_mu(mu2, G)),
        float(mt.p_success_region(mu2, G, N)),
        float(mt.pfp_region(mu2, G, N)),
        float(mt.noise_figure(-1.0, mu2, G, N)),
        float(mt.noise_figure(0.0, mu2, G, N)),
    ]


def table1_limits(G: float, N: int) -> tuple[list[float], list[float]]:
    """High-gain limits of the perfect (mu2 = 1/2) and ideal (mu2 = 1) columns."""
    G2 = G * G
    perfect = [2.0, G2 / 2, 2 / G2, 0.5**N, 0.5 ** (N - 1), 2.0 ** (N - 1), 2.0**N]
    ideal = [1.0, G2, 1 / G2, 1.0, 1.0, 1.0, 2.0]
    return perfect, ideal


def table1(G: float, N: int) -> Table:
    imm = table1_column(0.0, G, N)
    per = table1_column(0.5, G, N)
    ide = table1_column(1.0, G, N)
    per_lim, ide_lim = table1_limits(G, N)
    rows = [[name, *vals] for name, *vals in zip(TABLE1_ROWS, imm, per, per_lim, ide, ide_lim)]
    return Table(["quantity", "immaculate", "perfect", "perfect_limit", "ideal", "ideal_limit"], rows)


SWEEP_METRICS = ("pfp", "pfp-exact", "fidelity", "psuccess", "pfp-bound")


def sweep_values(metric: str, alphas: np.ndarray, spec: AmplifierSpec) -> np.ndarray:
    if metric not in SWEEP_METRICS:
        raise ValueError(f"unknown metric {metric!r}")
    sm = mt.spec_metrics(alphas, spec)
    d = sm["design"]
    if metric == "pfp":
        return sm["pfp"]
    if metric == "fidelity":
        return sm["fidelity"]
    if metric == "psuccess":
        return sm["p_success"]
    if metric == "pfp-bound":
        return np.broadcast_to(mt.pfp_bound(alphas, d.g1), alphas.shape)
    # closed form; a design without an immaculate stage has a flat PFP
    if d.deterministic:
        return sm["pfp"]
    return mt.pfp_exact(alphas, d.g1, spec.ncut)


def sweep(metric: str, spec: AmplifierSpec, alpha_max: float, steps: int) -> Table:
    alphas = np.linspace(0.0, alpha_max, steps)
    vals = sweep_values(metric, alphas, spec)
    d = design_stages(spec)
    cols = ["alpha", metric.replace("-", "_")]
    rows = [[float(a), float(v)] for a, v in zip(alphas, vals)]
    if spec.ncut == 1:
        tilde = None if d.deterministic else d.alpha_tilde
        bump = None if d.deterministic else mt.bump_report(d.g1).alpha_bump
        cols += ["alpha_tilde", "alpha_bump"]
        for r in rows:
            r += [tilde, bump]
    return Table(cols, rows)


def contour(N: int, mu2_values, gain2_values) -> Table:
    rows = []
    for mu2 in mu2_values:
        for G2 in gain2_values:
            G = math.sqrt(G2)
            rows.append([float(mu2), float(G2), float(mt.pfp_region(mu2, G, N)), float(mu2 * G2), mt.regime_classify(mu2, G).value])
    return Table(["mu2", "G2", "pfp_region", "mu2_g2", "regime"], rows)


def qgrid(spec: AmplifierSpec, alpha: complex, grid: GridSpec, threads: int | None = None) -> Table:
    rho1, p, d = first_stage(alpha, spec)
    q = q_grid(amplified_q(rho1, d.g2, spec.nbar_resolved), grid, threads)
    pts = grid.points()
    rows = [[float(b.real), float(b.imag), float(v)] for b, v in zip(pts.ravel(), q.values.ravel())]
    target = spec.gain * complex(alpha)
    meta = {
        "target_re": target.real,
        "target_im": target.imag,
        "p_success": p,
        "integral": q.integral(),
    }
    return Table(["re", "im", "q"], rows, meta)


def snr(mode: str, spec: AmplifierSpec, alpha_max: float, steps: int) -> Table:
    alphas = np.linspace(0.0, alpha_max, steps)
    nbar = spec.nbar_resolved
    rows = []
    if mode == "quadrature":
        cols = ["alpha", "p_success", "snr_x1", "snr_x2", "sqrtp_snr_x1", "sqrtp_snr_x2", "snr_in"]
        for a in alphas:
            rho1, p, d = first_stage(float(a), spec)
            r = snr_quadratures_antinormal(rho1, d.g2, float(a), p, nbar)
            rows.append([float(a), p, r.snr_x1, r.snr_x2, r.sqrtp_snr_x1, r.sqrtp_snr_x2, r.snr_in])
    elif mode == "number":
        cols = ["alpha", "p_success", "snr_n", "sqrtp_snr_n", "snr_in"]
        for a in alphas:
            rho1, p, d = first_stage(float(a), spec)
            r = snr_number(rho1, d.g2, p, float(a), nbar)
            rows.append([float(a), p, r.snr_n, r.sqrtp_snr_n, r.snr_in])
    else:
        raise ValueError(f"unknown snr mode {mode!r}")
    return Table(cols, rows)
