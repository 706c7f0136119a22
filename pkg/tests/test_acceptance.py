"""Acceptance criteria 1-10, each printing one PASS/FAIL line.

Run on its own with ``pytest tests/test_acceptance.py -v`` (lines are printed
even when output is captured). Seeds and grids are fixed up front.
"""

import time

import numpy as np
import pytest

from _oracles import expected_sq_dpaf, modulation_matrix, shaped_modulation_matrix
from afdm_af import ambiguity as amb
from afdm_af.channel import (
    RadioConfig,
    Target,
    draw_coefficients,
    normalized_params,
    periodic_echo,
    shaped_frame_symbols,
    synthesize_echo,
)
from afdm_af.constellation import PSK4, QAM16, draw_symbols
from afdm_af.design import GuidelineInput, collides, is_forbidden
from afdm_af.frame import AfdmConfig, build_frame, frame_symbols
from afdm_af.pulse import effective_response, pacf, rect_pulse, rrc_taps
from afdm_af.receiver import Scenario, rmse_experiment

MU4 = {"qam16": 1.32, "psk4": 1.0}


@pytest.fixture
def report(capsys):
    def _report(n, ok, detail):
        with capsys.disabled():
            print(f"\ncriterion {n}: {'PASS' if ok else 'FAIL'}  {detail}")
        assert ok, detail

    return _report


def test_criterion_01_closed_form_vs_enumeration(report):
    t0 = time.time()
    worst = 0.0
    for N in (4, 8):
        for name, spec in (("qam16", QAM16), ("psk4", PSK4)):
            for t in range(2 * N):
                cfg = AfdmConfig(N, two_n_c1=t, constellation=spec)
                A = modulation_matrix(N, t)
                for tau in range(N):
                    for nu in range(N):
                        e = expected_sq_dpaf(A, tau, nu, MU4[name])
                        worst = max(worst, abs(amb.dpaf_theory_nops(cfg, tau, nu) - e))
    dt = time.time() - t0
    report(1, worst <= 1e-9 and dt < 60, f"max abs error {worst:.2e} (<= 1e-9), {dt:.1f} s")


def test_criterion_02_mainlobe_level(report):
    t0 = time.time()
    cfg = AfdmConfig(128, two_n_c1=8)
    theory = amb.dpaf_theory_nops(cfg, 0, 0)
    mc = amb.dpaf_monte_carlo(cfg, None, [0], [0.0], trials=10000, seed=0)
    dev = abs(mc.values[0, 0] - theory) / mc.stderr[0, 0]
    dt = time.time() - t0
    ok = abs(theory - 16424.96) < 1e-9 and dev <= 3 and dt < 120
    report(2, ok, f"theory {theory:.2f}, Monte Carlo {mc.values[0, 0]:.2f} +- {mc.stderr[0, 0]:.2f} ({dev:.2f} SE), {dt:.1f} s")


def test_criterion_03_depression_lattice(report):
    N = 128
    taus, nus = np.meshgrid(np.arange(N), np.arange(N), indexing="ij")
    checks = []
    for label, cfg, expect in (
        ("afdm 2Nc1=8", AfdmConfig(N, two_n_c1=8), lambda t: (8 * t) % N),
        ("ofdm", AfdmConfig.ofdm(N), lambda t: 0),
        ("ocdm", AfdmConfig.ocdm(N), lambda t: t),
    ):
        v = amb.dpaf_theory_nops(cfg, taus, nus)
        side = np.ones_like(v, dtype=bool)
        side[0, 0] = False
        dep = side & (np.abs(v - 40.96) <= 1e-9)
        flat = side & (np.abs(v - 128.0) <= 1e-9)
        found = {(int(a), int(b)) for a, b in np.argwhere(dep)}
        lattice = {(t, expect(t)) for t in range(1, N)}
        ok = found == lattice and len(found) == 127 and np.all(dep | flat | ~side)
        ok &= found == set(amb.find_depressions(cfg).entries)
        checks.append((label, ok, len(found)))
    ok = all(c[1] for c in checks)
    report(3, ok, "; ".join(f"{l}: {n} depressions at 40.96, rest 128.00" + ("" if o else " MISMATCH") for l, o, n in checks))


def test_criterion_04a_rect_pulse_equals_unshaped(report):
    worst = 0.0
    for N, t in ((16, 4), (16, 3), (8, 2)):
        cfg = AfdmConfig(N, two_n_c1=t)
        g = np.arange(N)
        a = amb.dpaf_theory_ps_table(cfg, rect_pulse(1), g, g)
        b = amb.dpaf_theory_nops(cfg, g[:, None], g[None, :])
        worst = max(worst, np.max(np.abs(a - b)))
    report("4a", worst <= 1e-9, f"rect pulse, L=1 vs unshaped closed form: max abs diff {worst:.1e}")


def test_criterion_04b_pulse_shaped_monte_carlo(report):
    N, L, M, t = 16, 2, 2, 4
    cfg = AfdmConfig(N, two_n_c1=t, L=L)
    ps = rrc_taps(M, L, 0.35)
    g = np.arange(N * L)
    theory = amb.dpaf_theory_ps_table(cfg, ps, g, g)
    # the exact expectation is checked too, so a statistical miss is not mistaken for a formula error
    A = shaped_modulation_matrix(N, L, t, effective_response(ps, N).g)
    exact_err = max(abs(theory[a, b] - expected_sq_dpaf(A, a, b, 1.32)) for a in g[::3] for b in g[::3])
    mc = amb.dpaf_monte_carlo(cfg, ps, g, g, trials=100_000, seed=0)
    floor = 1e-9 * theory.max()  # structural zeros carry only rounding noise
    z = np.abs(mc.values - theory) / np.maximum(mc.stderr, 1e-300)
    outside = (np.abs(mc.values - theory) > 3 * mc.stderr + floor)
    ok = not outside.any() and exact_err <= 1e-9
    report(
        "4b",
        ok,
        f"{int(outside.sum())}/{outside.size} cells outside 3 SE (max z {z[theory > floor].max():.2f}); "
        f"closed form vs exact expectation {exact_err:.1e}",
    )


def test_criterion_05_delay_cut_follows_pacf(report):
    N, L, M, t = 128, 4, 5, 8
    cfg = AfdmConfig(N, two_n_c1=t, L=L)
    ps = rrc_taps(M, L, 0.35)
    r = effective_response(ps, N)
    NL = N * L
    near = np.arange(-(L // 2), L // 2 + 1)
    ratio = amb.delay_cut_ps(cfg, ps, near) / (N**2 * pacf(r, near) ** 2)
    taus = np.array([tau for tau in range(-(NL // 2), NL // 2) if abs(tau) >= L])
    general = amb.dpaf_theory_ps(cfg, ps, taus % NL, 0.0) - N**2 * pacf(r, taus) ** 2
    # weighted PACF sum written out independently
    n = np.arange(N)
    w = (1.32 - 2) / N * amb.dirichlet_sq(t * n, N) + N
    side = np.array([np.sum(pacf(r, (tau - n * L) % NL) ** 2 * w) for tau in taus])
    err = np.max(np.abs(general - side))
    ok = np.all((ratio >= 0.95) & (ratio <= 1.05)) and err <= 1e-9
    report(5, ok, f"cut / (N^2 R_g^2) for |tau|<=L/2 in [{ratio.min():.4f}, {ratio.max():.4f}]; sidelobe term error {err:.1e}")


def test_criterion_06_doppler_cut_peaks(report):
    N, L = 128, 4
    cfg = AfdmConfig(N, two_n_c1=8, L=L)
    ps = rrc_taps(5, L, 0.35)
    nus = np.arange(-N * L // 2, N * L // 2)
    cut = amb.doppler_cut_ps(cfg, ps, nus)
    val = {p: cut[nus == p][0] for p in (-N, 0, N)}
    is_max = {p: cut[nus == p - 1][0] < val[p] > cut[nus == p + 1][0] for p in val}
    ok = all(is_max.values()) and val[-N] < val[0] and val[N] < val[0]
    report(6, ok, f"local maxima at -N, 0, N: {all(is_max.values())}; levels {val[-N]:.1f}, {val[0]:.1f}, {val[N]:.1f}")


def test_criterion_07_c2_invariance(report):
    N, trials, seed = 64, 5000, 0
    base = AfdmConfig(N, two_n_c1=8)
    other = base.replace(c2=0.013)
    g = np.arange(N)
    s1 = np.zeros((N, N))
    s2 = np.zeros((N, N))
    for start in range(0, trials, 500):
        idx = range(start, start + 500)
        xa = amb.shaped_symbols(base, None, seed, idx)
        xb = amb.shaped_symbols(other, None, seed, idx)
        d = np.abs(amb.cross_ambiguity(xa, xa, g, g)) ** 2 - np.abs(amb.cross_ambiguity(xb, xb, g, g)) ** 2
        s1 += d.sum(axis=0)
        s2 += (d**2).sum(axis=0)
    mean = s1 / trials
    se = np.sqrt(np.maximum(s2 / trials - mean**2, 0) / (trials - 1))
    agree = np.abs(mean) <= 3 * se + 1e-9 * N**2
    frac = agree.mean()
    report(7, frac >= 0.99, f"{frac * 100:.2f}% of {agree.size} cells agree within 3 paired SE (>= 99%)")


def test_criterion_08_strong_weak_rmse(report):
    t0 = time.time()
    radio = RadioConfig(24e9, 15e3)
    weak_amp = 10 ** (-21 / 20)
    sc = Scenario(
        [Target(156.25, 100.0, 1.0, "swerling2"), Target(937.5, 100.0, weak_amp, "swerling2")], radio, n_sym=50
    )
    base = AfdmConfig(128, n_cp=16, M=5, L=4)
    cfgs = {"afdm": base.replace(two_n_c1=2), "ofdm": AfdmConfig.ofdm(128, n_cp=16, M=5, L=4)}
    tab = rmse_experiment(sc, cfgs, [0.0], trials=500, seed=0, ps=rrc_taps(5, 4, 0.35))
    a, o = tab.rmse("afdm", 0.0), tab.rmse("ofdm", 0.0)
    gain = 1 - a / o
    dt = time.time() - t0
    report(8, gain >= 0.5 and dt < 600,
           f"weak-target RMSE at 0 dB: AFDM {a:.1f} m/s, OFDM {o:.1f} m/s, improvement {gain * 100:.1f}% (>= 50%), {dt:.0f} s")


def test_criterion_09_periodic_shift_chain(report):
    N, L, M, n_cp, K = 16, 4, 2, 6, 4
    cfg = AfdmConfig(N, two_n_c1=2, c2=0.07, n_cp=n_cp, M=M, L=L, n_sym=K)
    ps = rrc_taps(M, L, 0.35)
    radio = RadioConfig(24e9, 15e3)
    D = draw_symbols(QAM16, (N, K), seed=0)
    frame = build_frame(cfg, D)
    xps = shaped_frame_symbols(frame_symbols(cfg, D), cfg, ps)
    targets = [Target(0.0, 0.0, 1.0), Target(450.0, 300.0, 0.5, "swerling2"), Target(2000.0, -4000.0, 0.2, "swerling2")]
    echo = synthesize_echo(frame, cfg, ps, targets, radio, seed=1)
    model = sum(
        periodic_echo(xps, cfg, p.tau, p.nu, echo.coefficients[q], ps=ps)
        for q, p in enumerate(normalized_params(t, radio, cfg) for t in targets)
    )
    err = np.max(np.abs(echo.Y - model))
    report(9, err <= 1e-10, f"noise-free echo vs periodic model: max error {err:.1e}")


def test_criterion_10_design_rule_consistency(report):
    rng = np.random.default_rng(0)
    c = 3e8
    agree = 0
    total = 1000
    hits = 0
    for _ in range(total):
        N = int(rng.choice([16, 32, 64, 128, 256]))
        f_s, f_c = N * 15e3, 24e9
        dtau = int(rng.integers(1, N))
        # half of the scenarios sit on a depression of some chirp rate
        t = int(rng.integers(1, 2 * N))
        dnu = (t * dtau) % N + N * int(rng.integers(-2, 3)) if rng.random() < 0.5 else int(rng.integers(-2 * N, 2 * N))
        d_s, v_s = rng.uniform(0, 2000), rng.uniform(-100, 100)
        inp = GuidelineInput(d_s, d_s + dtau * c / (2 * f_s), v_s, v_s + dnu * c * f_s / (2 * f_c * N), f_c, f_s, N)
        analytic = is_forbidden(inp, t)
        geometric = collides(inp, t)
        hits += geometric
        agree += analytic == geometric == ((t * dtau) % N == dnu % N)
    report(10, agree == total, f"{agree}/{total} random scenarios agree ({hits} collisions)")


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-v"]))
