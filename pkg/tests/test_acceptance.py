"""Acceptance criteria. Each test prints one ``PASS``/``FAIL criterion N`` line.

Run with ``pytest tests/test_acceptance.py -s`` to see the lines.
"""

import time

import numpy as np
import pytest

from magpol import tables
from magpol.coupled_modes import transmission_map
from magpol.fitting import FanoParams, fano, fit_fano, fit_map_crossings, fit_trace_peaks, linewidth_stats
from magpol.model_core import (
    chi_eff,
    cooperativity,
    coupling_ratio,
    hybrid_linewidth,
    unperturbed_susceptibility,
)
from magpol.sphere_modes.filling import energy_ratio, filling_factor
from magpol.sphere_modes.modes import field_at, solve_modes
from magpol.sphere_modes.permittivity import ModeFrequency, extract_permittivity

from test_fitting import synthetic_ensemble
from test_sphere_fill_eps import monte_carlo_filling


def verdict(n: int, ok: bool, detail: str) -> None:
    print(f"{'PASS' if ok else 'FAIL'} criterion {n}: {detail}")
    assert ok, detail


def rel(a, b):
    return abs(a / b - 1)


def test_criterion_1_cooperativity_table():
    gm = tables.MAGNON_WIDTH_OVER_PI_HZ / 2
    errs = {r.label: rel(cooperativity(r.g_over_pi_hz / 2, gm, r.width_over_pi_hz / 2), r.cooperativity)
            for r in tables.TABLE}
    t0 = time.perf_counter()
    c_i = cooperativity(tables.by_label("i").g_over_pi_hz / 2, gm, tables.by_label("i").width_over_pi_hz / 2)
    ms = 1e3 * (time.perf_counter() - t0)
    worst = max(errs, key=errs.get)
    verdict(1, max(errs.values()) < 0.01,
            f"cooperativity of all six modes within 1% (worst {worst}: {100 * errs[worst]:.2f}%; "
            f"mode i {c_i:.3g}; {ms:.3f} ms)")


def test_criterion_2_susceptibility_table():
    chis = {r.label: chi_eff(r.g_over_pi_hz / 2, r.freq_hz, r.filling_factor) for r in tables.TABLE}
    errs = {r.label: rel(chis[r.label], r.chi_eff) for r in tables.TABLE}
    mean = unperturbed_susceptibility(chis["i"], chis["ii"])
    ok = max(errs.values()) < 0.01 and abs(mean - 0.0595) <= 0.0005
    verdict(2, ok, f"chi_eff within 1% (worst {100 * max(errs.values()):.2f}%; mode 1 {chis['1']:.4f}, "
                   f"mode x {chis['x']:.3f}, mode 3 {chis['3']:.5f}); doublet mean {mean:.5f}")


def test_criterion_3_coupling_ratio_column():
    diffs = {r.label: abs(100 * coupling_ratio(r.g_over_pi_hz / 2, r.freq_hz) - r.g_over_omega_pct)
             for r in tables.TABLE}
    pct_i = 100 * coupling_ratio(tables.by_label("i").g_over_pi_hz / 2, tables.by_label("i").freq_hz)
    verdict(3, max(diffs.values()) <= 0.1,
            f"g/omega within 0.1 point (worst {max(diffs.values()):.3f}; mode i {pct_i:.1f}%)")


def test_criterion_4_hybrid_linewidth():
    h = hybrid_linewidth(5.355e6, 3.247e6)
    ok = abs(h - 4.301e6) < 1e3 and abs(4.4e6 - h) <= 0.15e6
    verdict(4, ok, f"hybrid linewidth {h / 1e6:.3f} MHz, {abs(4.4e6 - h) / 1e6:.3f} MHz from 4.4 MHz")


def test_criterion_5_map_round_trip():
    system = tables.six_mode_system()
    b = np.linspace(0.3, 1.0, 701)
    f = np.linspace(6e9, 27e9, 2001)
    labels = [p.label for p in system.photons]
    g_true = dict(zip(labels, tables.couplings()))
    gc = {p.label: p.gamma_half for p in system.photons}
    gm = system.magnons[0].gamma_half
    expected = [(p.label, p.omega) for p in system.photons]
    g_err = {k: [] for k in labels}
    c_err = {k: [] for k in labels}
    missing = 0
    t0 = time.perf_counter()
    for seed in range(20):
        tmap = transmission_map(system, b, f, noise=0.01, seed=seed)
        res = fit_map_crossings(tmap, 10.0, expected=expected)
        found = dict(zip(res.labels, res.fits))
        for k in labels:
            if k not in found:
                missing += 1
                g_err[k].append(np.inf)
                c_err[k].append(np.inf)
                continue
            g_err[k].append(rel(found[k].g, g_true[k]))
            c_err[k].append(rel(cooperativity(found[k].g, gm, gc[k]), cooperativity(g_true[k], gm, gc[k])))
    wall = time.perf_counter() - t0
    p95_g = {k: np.percentile(v, 95) for k, v in g_err.items()}
    p95_c = {k: np.percentile(v, 95) for k, v in c_err.items()}
    wg, wc = max(p95_g, key=p95_g.get), max(p95_c, key=p95_c.get)
    ok = missing == 0 and p95_g[wg] < 0.02 and p95_c[wc] < 0.05 and wall < 120
    verdict(5, ok, f"20 seeds, 95th percentile g error {100 * p95_g[wg]:.2f}% (mode {wg}), "
                   f"C error {100 * p95_c[wc]:.2f}% (mode {wc}), {missing} missed, {wall:.1f} s")


def test_criterion_6_sphere_solver():
    a = 2.5e-3
    m1 = solve_modes(15.96, a, (5e9, 30e9), 3)
    m2 = solve_modes(15.96, 2 * a, (2.5e9, 15e9), 3)
    scale = max(rel(y.freq, x.freq / 2) for x, y in zip(m1, m2)) if len(m1) == len(m2) else np.inf
    eps_grid = np.linspace(12.0, 20.0, 9)
    monotone = all(np.all(np.diff([ModeFrequency(fam, ell, 1, 16.0)(e, a) for e in eps_grid]) < 0)
                   for fam, ell in (("TE", 1), ("TM", 1), ("TE", 2)))
    degenerate = all({x.freq for x in m.members()} == {m.freq} and len(m.members()) == 2 * m.id.ell + 1
                     for m in m1)
    rng = np.random.default_rng(11)
    theta, phi = np.arccos(rng.uniform(-1, 1, 100)), rng.uniform(0, 2 * np.pi, 100)
    worst = 0.0
    for m in m1:
        for member in m.members():
            e_in, h_in = field_at(member, np.full(100, a), theta, phi)
            e_out, h_out = field_at(member, np.full(100, a * (1 + 1e-15)), theta, phi)
            worst = max(worst, np.abs(h_in[1:] - h_out[1:]).max() / np.abs(h_in).max(),
                        np.abs(e_in[1:] - e_out[1:]).max() / np.abs(e_in).max())
    lowest = m1[0].freq
    bracket = 0.92 * 12.8e9 <= lowest <= 1.08 * 16.0e9
    ok = scale < 1e-10 and monotone and degenerate and worst < 1e-8 and bracket
    verdict(6, ok, f"scale error {scale:.1e}, monotone {monotone}, degenerate {degenerate}, "
                   f"continuity {worst:.1e}, lowest mode {m1[0].id.family}{m1[0].id.ell} at "
                   f"{lowest / 1e9:.3f} GHz")


def test_criterion_7_permittivity():
    a = 2.5e-3
    f_meas = ModeFrequency("TE", 1, 1, 15.96)(15.96, a)
    fit = extract_permittivity(f_meas, ("TE", 1, 1), a, (14.0, 18.0))
    eps, df = np.array(fit.delta_f_curve).T
    monotone = bool(np.all(np.diff(df) < 0)) and eps[0] == 14.0 and eps[-1] == 18.0
    err = abs(fit.epsilon - 15.96)
    verdict(7, err < 1e-4 and monotone, f"round trip error {err:.1e}, delta f strictly decreasing {monotone}")


def test_criterion_8_filling_factor():
    mode = solve_modes(16.0, 2.5e-3, (5e9, 20e9), 1)[0].member(1, "cos")
    xi = filling_factor(mode, 2 * mode.radius)
    mc, se = monte_carlo_filling(mode, 2 * mode.radius, 10_000_000, 500_000, seed=2024)
    degenerate = filling_factor(mode, mode.radius)

    def uniform(r, t, p):
        return np.stack([np.ones_like(r), np.zeros_like(r), np.zeros_like(r)])

    eighth = energy_ratio(uniform, 1.0, 2.0)
    ok = abs(xi - mc) < 3 * se and degenerate == 1.0 and abs(eighth - 0.125) < 1e-12
    verdict(8, ok, f"quadrature {xi:.6f} vs Monte Carlo {mc:.6f} ({abs(xi - mc) / se:.2f} SE), "
                   f"degenerate {degenerate}, uniform {eighth:.12f}")


def test_criterion_9_fano():
    freq = np.linspace(9.98e9, 10.02e9, 801)
    worst = 0.0
    for q in (-6.0, -1.5, 0.4, 1.0, 2.5, 9.0):
        true = FanoParams(10.0013e9, 3.2e6, q, 1e-3, 2e-4).as_array()
        got = fit_fano(freq, fano(freq, *true)).params.as_array()
        worst = max(worst, np.max(np.abs(got / true - 1)))
    f, db, _ = synthetic_ensemble()
    fits, failures = fit_trace_peaks(f, db)
    mean, sd = linewidth_stats(fits)
    ok = worst < 1e-6 and not failures and rel(mean, 3.247e6) < 0.05 and rel(sd, 0.493e6) < 0.05
    verdict(9, ok, f"self-recovery {worst:.1e}; ensemble {mean / 1e6:.3f} +/- {sd / 1e6:.3f} MHz")
