import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from _oracles import rrc_reference, shaped_modulation_matrix
from afdm_af.constellation import QAM16, draw_symbols
from afdm_af.errors import ConfigurationError
from afdm_af.frame import AfdmConfig, build_frame, idaft_modulate
from afdm_af.pulse import (
    effective_response,
    pacf,
    periodic_matrix,
    pulse_dpaf,
    rect_pulse,
    rrc_taps,
    shape_frame,
    shape_symbols,
    sse,
    upsample,
)


@settings(max_examples=60, deadline=None)
@given(M=st.integers(1, 8), L=st.integers(1, 8), alpha=st.floats(0, 1))
def test_rrc_energy_and_symmetry(M, L, alpha):
    ps = rrc_taps(M, L, alpha)
    assert ps.taps.shape == (2 * M * L + 1,)
    assert abs(np.sum(ps.taps**2) - 1) <= 1e-12
    assert np.array_equal(ps.taps, ps.taps[::-1])


def test_rrc_matches_textbook_formula():
    M, L, a = 5, 4, 0.35
    t = np.arange(-M * L, M * L + 1) / L
    ref = np.array([rrc_reference(v, 1.0, a) for v in t])
    ref /= np.linalg.norm(ref)
    assert np.max(np.abs(rrc_taps(M, L, a).taps - ref)) < 1e-12


def test_rrc_singular_points():
    # alpha = 0.25 puts t = T/(4 alpha) = T on the tap grid
    ps = rrc_taps(3, 4, 0.25)
    t = np.arange(-12, 13) / 4
    ref = np.array([rrc_reference(v, 1.0, 0.25) for v in t])
    assert np.allclose(ps.taps, ref / np.linalg.norm(ref), atol=1e-12)
    assert np.all(np.isfinite(ps.taps))


def test_rrc_zero_rolloff_is_sinc():
    M, L = 4, 3
    t = np.arange(-M * L, M * L + 1) / L
    s = np.sinc(t)
    assert np.allclose(rrc_taps(M, L, 0.0).taps, s / np.linalg.norm(s), atol=1e-12)


def test_rrc_center_is_max():
    ps = rrc_taps(5, 4, 0.35)
    assert np.argmax(ps.taps) == ps.center == 20
    assert np.all(ps.taps[ps.center] > np.delete(ps.taps, ps.center))


@pytest.mark.parametrize("args", [(0, 4, 0.3), (2, 0, 0.3), (2, 2, -0.1), (2, 2, 1.5)])
def test_rrc_invalid(args):
    with pytest.raises(ConfigurationError):
        rrc_taps(*args)


def test_rect_pulse():
    ps = rect_pulse(1)
    assert np.array_equal(ps.taps, [1.0])
    r = effective_response(rect_pulse(3, 2), 8)
    assert r.g[0] == 1 and np.sum(r.g**2) == 1
    assert np.array_equal(periodic_matrix(effective_response(rect_pulse(1), 6)), np.eye(6))


def test_effective_response_layout():
    ps = rrc_taps(5, 4, 0.35)
    r = effective_response(ps, 128)
    ML = 20
    assert r.g.shape == (512,)
    assert r.g[0] == ps.taps[ML]
    assert r.g[511] == ps.taps[ML - 1]
    assert np.array_equal(r.g[: ML + 1], ps.taps[ML:])
    assert np.array_equal(r.g[-ML:], ps.taps[:ML])
    assert np.all(r.g[ML + 1:-ML] == 0)
    assert abs(np.sum(r.g**2) - 1) < 1e-12


def test_pulse_longer_than_frame():
    with pytest.raises(ConfigurationError):
        effective_response(rrc_taps(5, 4, 0.35), 8)


@pytest.mark.parametrize("N,L,M", [(8, 2, 1), (16, 2, 2), (5, 3, 1)])
def test_periodic_matrix_equals_circular_convolution(N, L, M):
    r = effective_response(rrc_taps(M, L, 0.35), N)
    x = draw_symbols(QAM16, N, seed=N)
    G = periodic_matrix(r)
    assert np.max(np.abs(G @ upsample(x, L) - shape_symbols(x, r))) <= 1e-12


def test_rect_chain_reproduces_idaft():
    cfg = AfdmConfig(16, two_n_c1=4, c2=0.2)
    s = draw_symbols(QAM16, 16, seed=3)
    x = idaft_modulate(cfg, s)
    assert np.allclose(shape_symbols(x, effective_response(rect_pulse(1), 16)), x, atol=1e-15)


def test_aperiodic_filtering_matches_periodic():
    """Filtering the framed signal, trimming and stripping guards equals per-symbol periodic shaping."""
    N, L, M, n_cp, K = 16, 4, 2, 3, 2
    cfg = AfdmConfig(N, two_n_c1=6, c2=0.05, n_cp=n_cp, M=M, L=L, n_sym=K)
    ps = rrc_taps(M, L, 0.35)
    D = draw_symbols(QAM16, (N, K), seed=4)
    y = shape_frame(build_frame(cfg, D), ps)
    # explicit aperiodic filter matrix on the upsampled frame
    xu = upsample(build_frame(cfg, D), L)
    Gt = np.zeros((xu.size + 2 * M * L, xu.size))
    for j in range(xu.size):
        Gt[j:j + ps.taps.size, j] = ps.taps
    assert np.max(np.abs(Gt @ xu - y)) < 1e-12
    trimmed = y[M * L: M * L + K * cfg.symbol_length * L].reshape(K, -1)
    bodies = trimmed[:, (n_cp + M) * L:(n_cp + M) * L + N * L]
    ref = shape_symbols(idaft_modulate(cfg, D).T, effective_response(ps, N))
    assert np.max(np.abs(bodies - ref)) <= 1e-10


def test_pacf_properties():
    ps = rrc_taps(5, 4, 0.35)
    r = effective_response(ps, 128)
    assert pacf(r, 0) == pytest.approx(1.0, abs=1e-12)
    taus = np.arange(512)
    assert np.allclose(pacf(r, taus), pacf(r, (-taus) % 512), atol=1e-15)
    direct = sum(r.g[m] * r.g[(m - 4) % 512] for m in range(512))
    assert pacf(r, 4) == pytest.approx(direct, abs=1e-14)
    assert np.isrealobj(pacf(r, taus))


def test_sse_properties():
    r = effective_response(rrc_taps(2, 2, 0.35), 16)
    assert sse(r, 0.0) == pytest.approx(1.0)
    nus = np.linspace(-40, 40, 161)
    assert np.all(np.abs(sse(r, nus)) <= 1 + 1e-12)
    rect = effective_response(rect_pulse(2), 16)
    assert np.allclose(sse(rect, nus), 1)


def test_pulse_dpaf_reductions():
    r = effective_response(rrc_taps(3, 2, 0.35), 16)
    rng = np.random.default_rng(0)
    taus = rng.integers(0, 32, 20)
    nus = rng.uniform(-16, 16, 20)
    assert pulse_dpaf(r, 0, 0.0) == pytest.approx(1.0)
    assert np.allclose(pulse_dpaf(r, taus, 0.0), pacf(r, taus), atol=1e-14)
    assert np.allclose(pulse_dpaf(r, 0, nus), sse(r, nus), atol=1e-14)


def test_pulse_dpaf_integer_doppler_matches_plain_index():
    r = effective_response(rrc_taps(3, 2, 0.35), 16)
    m = np.arange(32)
    for tau, nu in [(0, 3), (5, -7), (31, 12)]:
        direct = np.sum(r.g * r.g[(m - tau) % 32] * np.exp(-2j * np.pi * nu * m / 32))
        assert abs(pulse_dpaf(r, tau, nu) - direct) < 1e-13


def test_oracle_matrix_matches_library():
    """The test-side matrix oracle agrees with the FFT shaping path."""
    N, L = 8, 2
    r = effective_response(rrc_taps(1, L, 0.5), N)
    cfg = AfdmConfig(N, two_n_c1=2)
    s = draw_symbols(QAM16, N, seed=1)
    A = shaped_modulation_matrix(N, L, 2, r.g)
    assert np.allclose(A @ s, shape_symbols(idaft_modulate(cfg, s), r), atol=1e-12)
