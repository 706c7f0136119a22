import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from afdm_af.channel import (
    Fluctuation,
    RadioConfig,
    Target,
    apply_channel,
    complex_noise,
    draw_coefficients,
    normalized_params,
    periodic_echo,
    shaped_frame_symbols,
    signal_power,
    synthesize_echo,
)
from afdm_af.constellation import QAM16, draw_symbols
from afdm_af.errors import ConfigurationError, ScenarioError
from afdm_af.frame import AfdmConfig, build_frame, frame_symbols
from afdm_af.pulse import rect_pulse, rrc_taps


def _setup(N=16, L=4, M=2, n_cp=4, K=3, t=2, c2=0.1, seed=1, alpha=0.35):
    cfg = AfdmConfig(N, two_n_c1=t, c2=c2, n_cp=n_cp, M=M, L=L, n_sym=K)
    ps = rrc_taps(M, L, alpha)
    D = draw_symbols(QAM16, (N, K), seed=seed)
    frame = build_frame(cfg, D)
    xps = shaped_frame_symbols(frame_symbols(cfg, D), cfg, ps)
    return cfg, ps, frame, xps


def test_normalized_params_scenario_values():
    radio = RadioConfig(24e9, 15e3)
    cfg = AfdmConfig(128, L=4)
    p = normalized_params(Target(156.25, 100.0), radio, cfg)
    assert p.tau == 8 and p.tau_residual == pytest.approx(0.0, abs=1e-12)
    # 2 * 100 * 24e9 * 128 / (3e8 * 1.92e6)
    assert p.nu == pytest.approx(16 / 15, rel=1e-12)
    assert normalized_params(Target(937.5, 100.0), radio, cfg).tau == 48
    z = normalized_params(Target(0.0, 0.0), radio, cfg)
    assert (z.tau, z.nu) == (0, 0.0)
    assert radio.doppler_cell_mps() == pytest.approx(93.75)


def test_identity_channel():
    cfg, ps, frame, xps = _setup()
    echo = synthesize_echo(frame, cfg, ps, [Target(0.0, 0.0, 0.7)], RadioConfig(), seed=0)
    assert np.allclose(echo.Y, 0.7 * xps, atol=1e-14)


def test_shift_matches_explicit_permutation():
    cfg, ps, frame, xps = _setup(n_cp=5)
    NL = 64
    J = np.zeros((NL, NL))
    for n in range(NL):
        J[n, (n - 5 * 4) % NL] = 1
    u = apply_channel(frame, cfg, ps, [20], [0.0])[0]
    assert np.max(np.abs(u - J @ xps)) < 1e-12


@settings(max_examples=30, deadline=None)
@given(tau=st.integers(0, 16), nu=st.floats(-20, 20), t=st.sampled_from([0, 1, 2, 6, 16]),
       seed=st.integers(0, 1000))
def test_periodic_shift_property(tau, nu, t, seed):
    cfg, ps, frame, xps = _setup(t=t, seed=seed)
    u = apply_channel(frame, cfg, ps, [tau], [nu])[0]
    assert np.max(np.abs(u - periodic_echo(xps, cfg, tau, nu, ps=ps))) <= 1e-10


def test_periodic_shift_with_short_pulse():
    cfg = AfdmConfig(16, two_n_c1=4, n_cp=3, M=3, L=2, n_sym=2)
    ps = rrc_taps(1, 2, 0.5)
    D = draw_symbols(QAM16, (16, 2), seed=3)
    xps = shaped_frame_symbols(frame_symbols(cfg, D), cfg, ps)
    u = apply_channel(build_frame(cfg, D), cfg, ps, [5], [1.7])[0]
    assert np.max(np.abs(u - periodic_echo(xps, cfg, 5, 1.7, ps=ps))) <= 1e-10


def test_delay_beyond_prefix():
    cfg, ps, frame, _ = _setup()
    with pytest.raises(ScenarioError):
        apply_channel(frame, cfg, ps, [17], [0.0])
    far = Target(1e4, 0.0)
    with pytest.raises(ScenarioError):
        synthesize_echo(frame, cfg, ps, [far], RadioConfig())


def test_pulse_mismatch():
    cfg, _, frame, _ = _setup()
    with pytest.raises(ConfigurationError):
        apply_channel(frame, cfg, rrc_taps(3, 4, 0.3), [0], [0.0])
    with pytest.raises(ConfigurationError):
        apply_channel(frame, cfg, rrc_taps(2, 2, 0.3), [0], [0.0])


def test_empty_targets_is_pure_noise():
    cfg, ps, frame, _ = _setup()
    quiet = synthesize_echo(frame, cfg, ps, [], RadioConfig())
    assert np.all(quiet.Y == 0)
    noisy = synthesize_echo(frame, cfg, ps, [], RadioConfig(snr_db=0.0), seed=2)
    assert noisy.Y.shape == (64, 3) and np.all(noisy.Y != 0)


def test_swerling2_statistics():
    t = Target(10.0, 0.0, 1.5, Fluctuation.SWERLING2)
    b = draw_coefficients([t], 10**4, np.random.default_rng(0))[0]
    n = b.size
    p = np.abs(b) ** 2
    assert abs(p.mean() - 2.25) <= 3 * p.std() / np.sqrt(n)
    assert abs(b.mean()) <= 3 * 1.5 / np.sqrt(n)
    s0 = draw_coefficients([Target(1.0, 0.0, 0.4)], 5, 0)[0]
    assert np.all(s0 == 0.4)


def test_noise_calibration():
    N, L, K = 64, 4, 3907
    cfg = AfdmConfig(N, two_n_c1=2, n_cp=4, M=2, L=L, n_sym=K)
    ps = rrc_taps(2, L, 0.35)
    frame = build_frame(cfg, draw_symbols(QAM16, (N, K), seed=1))
    tg = [Target(3.0, 20.0, 0.8)]
    clean = synthesize_echo(frame, cfg, ps, tg, RadioConfig(), seed=4).Y
    noisy = synthesize_echo(frame, cfg, ps, tg, RadioConfig(snr_db=7.0), seed=4).Y
    assert clean.size >= 10**6
    measured = 10 * np.log10(np.mean(np.abs(clean) ** 2) / np.mean(np.abs(noisy - clean) ** 2))
    assert abs(measured - 7.0) < 0.1
    assert signal_power(tg, L) == pytest.approx(0.16)


def test_echo_reproducible():
    cfg, ps, frame, _ = _setup()
    tg = [Target(3.0, 50.0, 1.0, "swerling2")]
    a = synthesize_echo(frame, cfg, ps, tg, RadioConfig(snr_db=5.0), seed=9)
    b = synthesize_echo(frame, cfg, ps, tg, RadioConfig(snr_db=5.0), seed=9)
    assert np.array_equal(a.Y, b.Y)


def test_unit_noise():
    w = complex_noise((200, 500), np.random.default_rng(1))
    assert np.mean(np.abs(w) ** 2) == pytest.approx(1.0, abs=0.01)


def test_target_validation():
    with pytest.raises(ConfigurationError):
        Target(-1.0, 0.0)
    with pytest.raises(ConfigurationError):
        Target(1.0, 0.0, -0.5)
    with pytest.raises(ValueError):
        Target(1.0, 0.0, 1.0, "swerling9")
    with pytest.raises(ConfigurationError):
        RadioConfig(f_c=0.0)


def test_rect_no_shaping_chain():
    cfg = AfdmConfig(16, two_n_c1=2, n_cp=4, n_sym=2)
    D = draw_symbols(QAM16, (16, 2), seed=1)
    u = apply_channel(build_frame(cfg, D), cfg, rect_pulse(1), [3], [0.0])[0]
    assert np.allclose(u, np.roll(frame_symbols(cfg, D), 3, axis=0), atol=1e-12)
