"""Discrete periodic ambiguity functions (DPAF) of random AFDM symbols.

Three routes are provided: a single realization, a Monte Carlo mean of the
squared magnitude, and the closed-form expectations (without pulse shaping,
the OFDM/OCDM specializations, and with pulse shaping).
"""

from dataclasses import dataclass, field
import math

import numpy as np

from .constellation import constellation_points, kurtosis
from .errors import ConfigurationError
from .frame import AfdmConfig, idaft_modulate
from .pulse import (
    EffectiveResponse,
    PulseShape,
    as_response,
    pacf,
    pulse_dpaf_table,
    rect_pulse,
    shape_symbols,
    sse,
)
from .rng import trial_rng

_INT_TOL = 1e-12


def dirichlet_sq(x, N: int):
    """|sin(pi x) / sin(pi x / N)|^2, equal to N^2 at multiples of N.

    Arguments within 1e-12 of an integer are snapped to it, so the integer
    grid yields exact zeros and N^2 values.
    """
    x = np.asarray(x, dtype=float)
    r = np.rint(x)
    on_int = np.abs(x - r) < _INT_TOL
    with np.errstate(divide="ignore", invalid="ignore"):
        v = (np.sin(np.pi * x) / np.sin(np.pi * x / N)) ** 2
    out = np.where(on_int, np.where(np.mod(r, N) == 0, float(N) ** 2, 0.0), v)
    return out[()] if out.ndim == 0 else out


def _is_integer(v) -> bool:
    v = np.asarray(v, dtype=float)
    return bool(np.all(np.abs(v - np.rint(v)) < _INT_TOL))


def cross_ambiguity(y, x, delays, dopplers) -> np.ndarray:
    """sum_n y[n] x*[<n - tau>] exp(-j 2 pi nu n / P) over a delay-Doppler grid.

    ``y`` and ``x`` have the period ``P`` on the last axis and may carry
    matching leading batch dimensions. Returns ``(..., len(delays), len(dopplers))``.
    """
    y = np.asarray(y, dtype=complex)
    x = np.asarray(x, dtype=complex)
    P = y.shape[-1]
    taus = np.atleast_1d(np.asarray(delays, dtype=np.int64))
    nus = np.atleast_1d(np.asarray(dopplers, dtype=float))
    n = np.arange(P)
    shifted = x[..., (n[None, :] - taus[:, None]) % P]
    prod = y[..., None, :] * np.conj(shifted)
    if _is_integer(nus):
        spec = np.fft.fft(prod, axis=-1)
        return spec[..., np.rint(nus).astype(np.int64) % P]
    phase = np.exp(-2j * np.pi * np.outer(n, nus) / P)
    return prod @ phase


def dpaf_realization(x_ps, tau, nu):
    """DPAF of one signal: sum_n x[n] x*[<n - tau>] exp(-j 2 pi nu n / len(x))."""
    t = np.asarray(tau)
    v = np.asarray(nu)
    if t.ndim == 0 and v.ndim == 0:
        return complex(cross_ambiguity(x_ps, x_ps, [int(t)], [float(v)])[0, 0])
    tb, vb = np.broadcast_arrays(t, v)
    ut, ti = np.unique(tb.ravel(), return_inverse=True)
    uv, vi = np.unique(vb.ravel(), return_inverse=True)
    return cross_ambiguity(x_ps, x_ps, ut, uv)[ti, vi].reshape(tb.shape)


@dataclass
class DpafGrid:
    """Non-negative surface over (delay, Doppler) with optional per-cell standard error."""

    values: np.ndarray
    delays: np.ndarray
    dopplers: np.ndarray
    stderr: np.ndarray | None = None
    normalization: str = "absolute"
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        self.delays = np.asarray(self.delays)
        self.dopplers = np.asarray(self.dopplers, dtype=float)
        if self.values.shape != (self.delays.size, self.dopplers.size):
            raise ConfigurationError("grid values do not match axis lengths")
        for axis in (self.delays, self.dopplers):
            if axis.size > 1 and np.any(np.diff(axis) <= 0):
                raise ConfigurationError("grid axes must be strictly increasing")
        if not np.all(np.isfinite(self.values)) or np.any(self.values < 0):
            raise ConfigurationError("grid values must be finite and non-negative")

    def at(self, tau, nu) -> float:
        i = int(np.flatnonzero(self.delays == tau)[0])
        j = int(np.flatnonzero(np.isclose(self.dopplers, nu))[0])
        return float(self.values[i, j])

    def to_db(self, reference: float | None = None) -> "DpafGrid":
        ref = float(self.values.max()) if reference is None else float(reference)
        with np.errstate(divide="ignore"):
            db = 10 * np.log10(self.values / ref)
        out = DpafGrid.__new__(DpafGrid)
        out.values, out.delays, out.dopplers = db, self.delays, self.dopplers
        out.stderr, out.normalization = None, "mainlobe_dB"
        out.metadata = dict(self.metadata, db_reference=ref)
        return out


def _check_delays(delays, NL: int) -> np.ndarray:
    taus = np.atleast_1d(np.asarray(delays))
    if taus.size == 0:
        raise ConfigurationError("empty delay grid")
    if not _is_integer(taus):
        raise ConfigurationError("delays must be integers")
    taus = np.rint(taus).astype(np.int64)
    if taus.min() < 0 or taus.max() >= NL:
        raise ConfigurationError(f"delays must lie in [0, {NL})")
    return taus


def _resolve_pulse(cfg: AfdmConfig, ps) -> EffectiveResponse:
    if ps is None:
        ps = rect_pulse(cfg.L)
    if isinstance(ps, PulseShape) and ps.L != cfg.L:
        raise ConfigurationError(f"pulse oversampling L={ps.L} differs from config L={cfg.L}")
    resp = as_response(ps, cfg.N)
    if resp.L != cfg.L:
        raise ConfigurationError(f"pulse oversampling L={resp.L} differs from config L={cfg.L}")
    return resp


def random_symbols(cfg: AfdmConfig, seed: int, trials) -> np.ndarray:
    """Data vectors for the given trial indices; row ``i`` is trial ``trials[i]``."""
    pts = constellation_points(cfg.constellation)
    rows = [pts[trial_rng(seed, t).integers(0, cfg.constellation.order, size=cfg.N)] for t in trials]
    return np.array(rows).reshape(len(rows), cfg.N)


def shaped_symbols(cfg: AfdmConfig, ps, seed: int, trials) -> np.ndarray:
    """Pulse-shaped single symbols ``G x_up`` for the given trial indices, shape ``(T, NL)``."""
    resp = _resolve_pulse(cfg, ps)
    s = random_symbols(cfg, seed, trials)
    x = idaft_modulate(cfg, s.T).T
    return shape_symbols(x, resp)


def dpaf_monte_carlo(cfg: AfdmConfig, ps, delays, dopplers, trials: int, seed: int = 0,
                     chunk: int | None = None) -> DpafGrid:
    """Mean of |chi|^2 over ``trials`` independent pulse-shaped symbols.

    Trial ``t`` draws its data from ``trial_rng(seed, t)``, so results do not
    depend on ``chunk``. The returned grid carries the standard error of the
    mean in ``stderr``.
    """
    if int(trials) != trials or trials < 1:
        raise ConfigurationError(f"trials must be a positive integer, got {trials}")
    resp = _resolve_pulse(cfg, ps)
    NL = resp.period
    taus = _check_delays(delays, NL)
    nus = np.atleast_1d(np.asarray(dopplers, dtype=float))
    if nus.size == 0:
        raise ConfigurationError("empty Doppler grid")
    if chunk is None:
        chunk = max(1, int(4_000_000 // (taus.size * NL)))

    count = 0
    mean = np.zeros((taus.size, nus.size))
    m2 = np.zeros_like(mean)
    for start in range(0, int(trials), chunk):
        idx = range(start, min(int(trials), start + chunk))
        xps = shaped_symbols(cfg, resp, seed, idx)
        p = np.abs(cross_ambiguity(xps, xps, taus, nus)) ** 2
        # Chan et al. pairwise update of mean and sum of squared deviations
        nb = p.shape[0]
        mb = p.mean(axis=0)
        m2b = ((p - mb) ** 2).sum(axis=0)
        delta = mb - mean
        tot = count + nb
        mean = mean + delta * (nb / tot)
        m2 = m2 + m2b + delta**2 * (count * nb / tot)
        count = tot

    var = m2 / (count - 1) if count > 1 else np.zeros_like(m2)
    stderr = np.sqrt(var / count)
    meta = {
        "source": "monte_carlo",
        "trials": int(trials),
        "seed": int(seed),
        "N": cfg.N,
        "two_n_c1": cfg.two_n_c1,
        "c2": cfg.c2,
        "L": cfg.L,
        "mu4": kurtosis(cfg.constellation),
    }
    return DpafGrid(mean, taus, nus, stderr, metadata=meta)


def dpaf_theory_nops(cfg: AfdmConfig, tau, nu):
    """Closed-form E|chi|^2 of AFDM without pulse shaping; valid for fractional ``nu``.

    (1/N^2) D(a)^2 D(tau)^2 + (mu4 - 2)/N D(a)^2 + (1/N) sum_m D(m + a)^2,
    with ``a = 2 N c1 tau - nu``.
    """
    N = cfg.N
    mu4 = kurtosis(cfg.constellation)
    tau = np.asarray(tau, dtype=float)
    nu = np.asarray(nu, dtype=float)
    a = cfg.two_n_c1 * tau - nu
    d_a = dirichlet_sq(a, N)
    m = np.arange(N).reshape((-1,) + (1,) * np.ndim(a))
    floor = dirichlet_sq(m + a, N).sum(axis=0) / N
    out = d_a * dirichlet_sq(tau, N) / N**2 + (mu4 - 2) / N * d_a + floor
    return out[()] if np.ndim(out) == 0 else out


def dpaf_theory_ofdm(cfg: AfdmConfig, tau, nu):
    """Closed form for OFDM (c1 = 0); only ``N`` and the constellation of ``cfg`` are used."""
    N = cfg.N
    mu4 = kurtosis(cfg.constellation)
    tau = np.asarray(tau, dtype=float)
    nu = np.asarray(nu, dtype=float)
    d_nu = dirichlet_sq(nu, N)
    m = np.arange(N).reshape((-1,) + (1,) * np.ndim(nu))
    floor = dirichlet_sq(m - nu, N).sum(axis=0) / N
    out = d_nu * dirichlet_sq(tau, N) / N**2 + (mu4 - 2) / N * d_nu + floor
    return out[()] if np.ndim(out) == 0 else out


def dpaf_theory_ocdm(cfg: AfdmConfig, tau, nu):
    """Closed form for OCDM (2 N c1 = 1)."""
    N = cfg.N
    mu4 = kurtosis(cfg.constellation)
    tau = np.asarray(tau, dtype=float)
    nu = np.asarray(nu, dtype=float)
    d = dirichlet_sq(tau - nu, N)
    m = np.arange(N).reshape((-1,) + (1,) * np.ndim(d))
    floor = dirichlet_sq(m + tau - nu, N).sum(axis=0) / N
    out = d * dirichlet_sq(tau, N) / N**2 + (mu4 - 2) / N * d + floor
    return out[()] if np.ndim(out) == 0 else out


def _sidelobe_weights(cfg: AfdmConfig, nus: np.ndarray) -> np.ndarray:
    """(mu4 - 2)/N D(2Nc1 n - nu)^2 + N for n = 0..N-1; shape (N, len(nus))."""
    mu4 = kurtosis(cfg.constellation)
    n = np.arange(cfg.N)
    return (mu4 - 2) / cfg.N * dirichlet_sq(cfg.two_n_c1 * n[:, None] - nus[None, :], cfg.N) + cfg.N


def dpaf_theory_ps_table(cfg: AfdmConfig, ps, delays, dopplers) -> np.ndarray:
    """Closed-form E|chi|^2 of pulse-shaped AFDM on a ``(delays, dopplers)`` grid."""
    resp = _resolve_pulse(cfg, ps)
    NL, L = resp.period, resp.L
    taus = np.atleast_1d(np.asarray(delays, dtype=np.int64))
    nus = np.atleast_1d(np.asarray(dopplers, dtype=float))
    chi2 = np.abs(pulse_dpaf_table(resp, np.arange(NL), nus)) ** 2  # (NL, n_nu)
    main = dirichlet_sq(nus, cfg.N)[None, :] * chi2[taus % NL]
    w = _sidelobe_weights(cfg, nus)  # (N, n_nu)
    n = np.arange(cfg.N)
    rows = (taus[:, None] - n[None, :] * L) % NL  # (n_tau, N)
    side = np.einsum("tkv,kv->tv", chi2[rows], w)
    return main + side


def dpaf_theory_ps(cfg: AfdmConfig, ps, tau, nu):
    """Closed-form E|chi|^2 of pulse-shaped AFDM (exact for integer ``nu``); broadcasts.

    D(nu)^2 |chi_g(tau, nu)|^2
      + sum_n |chi_g(<tau - nL>, nu)|^2 [(mu4 - 2)/N D(2Nc1 n - nu)^2 + N]
    """
    tb, vb = np.broadcast_arrays(np.asarray(tau, dtype=np.int64), np.asarray(nu, dtype=float))
    ut, ti = np.unique(tb.ravel(), return_inverse=True)
    uv, vi = np.unique(vb.ravel(), return_inverse=True)
    out = dpaf_theory_ps_table(cfg, ps, ut, uv)[ti, vi].reshape(tb.shape)
    return out[()] if out.ndim == 0 else out


def theory_grid(cfg: AfdmConfig, ps, delays, dopplers) -> DpafGrid:
    """Closed-form surface; ``ps=None`` selects the unshaped expression."""
    nus = np.atleast_1d(np.asarray(dopplers, dtype=float))
    if ps is None:
        taus = np.atleast_1d(np.asarray(delays, dtype=np.int64))
        vals = dpaf_theory_nops(cfg, taus[:, None], nus[None, :])
        approx = False
        pulse = "none"
    else:
        resp = _resolve_pulse(cfg, ps)
        taus = _check_delays(delays, resp.period)
        vals = dpaf_theory_ps_table(cfg, resp, taus, nus)
        approx = not _is_integer(nus)
        pulse = ps.describe() if isinstance(ps, PulseShape) else "effective-response"
    meta = {
        "source": "theory",
        "N": cfg.N,
        "two_n_c1": cfg.two_n_c1,
        "L": cfg.L,
        "mu4": kurtosis(cfg.constellation),
        "pulse": pulse,
        "approximate": approx,
    }
    return DpafGrid(vals, taus, nus, metadata=meta)


def mainlobe_nops(cfg: AfdmConfig) -> float:
    """N^2 + (mu4 - 1) N."""
    return cfg.N**2 + (kurtosis(cfg.constellation) - 1) * cfg.N


def mainlobe_ps(cfg: AfdmConfig, ps) -> float:
    """Mainlobe level of pulse-shaped AFDM.

    Uses the short form
    ``N^2 + N sum_n R_g(<-nL>)^2 + (mu4 - 2) N sum_{k<2Nc1} R_g(<-k NL/(2Nc1)>)^2``
    when ``2Nc1`` divides ``N``; otherwise the general expression is evaluated
    at the origin.
    """
    resp = _resolve_pulse(cfg, ps)
    N, NL, L, t = cfg.N, resp.period, resp.L, cfg.two_n_c1
    if t == 0 or N % t:
        return float(dpaf_theory_ps(cfg, resp, 0, 0.0))
    mu4 = kurtosis(cfg.constellation)
    r2 = pacf(resp, np.arange(NL)) ** 2
    n = np.arange(N)
    k = np.arange(t)
    return float(N**2 + N * r2[(-n * L) % NL].sum() + (mu4 - 2) * N * r2[(-k * (NL // t)) % NL].sum())


def delay_cut_terms(cfg: AfdmConfig, ps, delays):
    """Split the zero-Doppler cut into its two terms.

    Returns ``(pacf_term, sidelobe_term)`` where ``pacf_term = N^2 R_g(tau)^2`` and
    ``sidelobe_term = sum_n R_g(<tau - nL>)^2 [(mu4-2)/N D(2Nc1 n)^2 + N]``.
    """
    resp = _resolve_pulse(cfg, ps)
    NL, L = resp.period, resp.L
    taus = np.atleast_1d(np.asarray(delays, dtype=np.int64))
    r2 = pacf(resp, np.arange(NL)) ** 2
    w = _sidelobe_weights(cfg, np.zeros(1))[:, 0]
    n = np.arange(cfg.N)
    side = (r2[(taus[:, None] - n[None, :] * L) % NL] * w[None, :]).sum(axis=1)
    return cfg.N**2 * r2[taus % NL], side


def delay_cut_ps(cfg: AfdmConfig, ps, delays=None) -> np.ndarray:
    """Average zero-Doppler cut of pulse-shaped AFDM."""
    if delays is None:
        NL = cfg.N * cfg.L
        delays = np.arange(-(NL // 2), NL - NL // 2)
    a, b = delay_cut_terms(cfg, ps, delays)
    return a + b


def doppler_cut_terms(cfg: AfdmConfig, ps, dopplers):
    """``(sse_term, sidelobe_term)`` of the zero-delay cut: D(nu)^2 |F_g(nu)|^2 and the weighted DPAF-g sum."""
    resp = _resolve_pulse(cfg, ps)
    NL, L = resp.period, resp.L
    nus = np.atleast_1d(np.asarray(dopplers, dtype=float))
    first = dirichlet_sq(nus, cfg.N) * np.abs(sse(resp, nus)) ** 2
    n = np.arange(cfg.N)
    chi2 = np.abs(pulse_dpaf_table(resp, (-n * L) % NL, nus)) ** 2  # (N, n_nu)
    side = (chi2 * _sidelobe_weights(cfg, nus)).sum(axis=0)
    return first, side


def doppler_cut_ps(cfg: AfdmConfig, ps, dopplers=None) -> np.ndarray:
    """Average zero-delay cut of pulse-shaped AFDM."""
    if dopplers is None:
        NL = cfg.N * cfg.L
        dopplers = np.arange(-(NL // 2), NL - NL // 2)
    a, b = doppler_cut_terms(cfg, ps, dopplers)
    return a + b


@dataclass(frozen=True)
class DepressionMap:
    """Integer cells where the unshaped sidelobe drops to (mu4 - 1) N."""

    entries: tuple
    delay_gap: int
    doppler_gap: int

    def __len__(self):
        return len(self.entries)

    def __contains__(self, cell):
        return tuple(cell) in set(self.entries)


def find_depressions(cfg: AfdmConfig) -> DepressionMap:
    """Depression cells ``(tau, <2Nc1 tau>_N)`` for ``tau = 1..N-1``.

    Gaps between adjacent depressions are ``N / gcd(N, 2Nc1)`` in delay and
    ``gcd(N, 2Nc1) mod N`` in Doppler, i.e. ``N/(2Nc1)`` and ``2Nc1`` when
    ``2Nc1`` divides ``N``.
    """
    N, t = cfg.N, cfg.two_n_c1
    entries = tuple((tau, (t * tau) % N) for tau in range(1, N))
    g = math.gcd(N, t % N)
    return DepressionMap(entries, N // g, g % N)
