"""Finite-tap pulse shapes and the derived quantities of the effective response.

The effective response ``g`` is the prototype placed circularly around index
0 of an ``N*L`` period. Doppler phases in :func:`pulse_dpaf` and :func:`sse`
use the signed (centred) tap index, so the pulse is not split across the
period boundary; on integer Doppler this is identical to indexing
``0..NL-1``.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError


@dataclass(frozen=True, eq=False)
class PulseShape:
    """Prototype filter with ``2*M*L + 1`` real taps and unit energy."""

    taps: np.ndarray
    M: int
    L: int
    rolloff: float | None = None
    kind: str = "rrc"

    @property
    def center(self) -> int:
        return self.M * self.L

    def describe(self) -> str:
        if self.kind == "rect":
            return f"rect M={self.M} L={self.L}"
        return f"rrc M={self.M} L={self.L} alpha={self.rolloff:g}"


@dataclass(frozen=True, eq=False)
class EffectiveResponse:
    """Length ``N*L`` periodic response (first column of the periodic filter matrix)."""

    g: np.ndarray
    N: int
    L: int

    @property
    def period(self) -> int:
        return self.N * self.L

    @property
    def signed_index(self) -> np.ndarray:
        n = np.arange(self.period)
        return np.where(n >= (self.period + 1) // 2, n - self.period, n)


def _rrc_value(x: float, alpha: float) -> float:
    # x = t / T >= 0
    if x == 0.0:
        return 1.0 - alpha + 4.0 * alpha / np.pi
    if alpha > 0 and abs(4.0 * alpha * x - 1.0) < 1e-12:
        a = np.pi / (4.0 * alpha)
        return alpha / np.sqrt(2.0) * ((1 + 2 / np.pi) * np.sin(a) + (1 - 2 / np.pi) * np.cos(a))
    num = np.sin(np.pi * x * (1 - alpha)) + 4 * alpha * x * np.cos(np.pi * x * (1 + alpha))
    den = np.pi * x * (1 - (4 * alpha * x) ** 2)
    return num / den


def rrc_taps(M: int, L: int, rolloff: float) -> PulseShape:
    """Root-raised-cosine prototype sampled at ``T/L`` over ``[-M T, M T]``.

    Removable singularities at ``t = 0`` and ``t = +-T/(4 alpha)`` take their
    analytic limits. Taps are normalized to unit energy after truncation.
    """
    if int(M) != M or int(L) != L or M < 1 or L < 1:
        raise ConfigurationError(f"RRC needs integer M >= 1 and L >= 1, got M={M}, L={L}")
    if not 0.0 <= rolloff <= 1.0:
        raise ConfigurationError(f"roll-off must lie in [0, 1], got {rolloff}")
    M, L = int(M), int(L)
    half = np.array([_rrc_value(k / L, float(rolloff)) for k in range(M * L + 1)])
    taps = np.concatenate([half[:0:-1], half])
    taps = taps / np.sqrt(np.sum(taps**2))
    taps.setflags(write=False)
    return PulseShape(taps, M, L, float(rolloff), "rrc")


def rect_pulse(L: int = 1, M: int = 0) -> PulseShape:
    """Single unit tap at the centre: the chain without pulse shaping."""
    if int(L) != L or L < 1 or M < 0:
        raise ConfigurationError(f"invalid rect pulse L={L}, M={M}")
    taps = np.zeros(2 * M * L + 1)
    taps[M * L] = 1.0
    taps.setflags(write=False)
    return PulseShape(taps, int(M), int(L), None, "rect")


def effective_response(ps: PulseShape, N: int) -> EffectiveResponse:
    NL = N * ps.L
    ML = ps.M * ps.L
    if NL < 2 * ML + 1:
        raise ConfigurationError(f"pulse longer than frame: N*L={NL} < 2ML+1={2 * ML + 1}")
    g = np.zeros(NL)
    d = np.arange(-ML, ML + 1)
    g[d % NL] = ps.taps
    g.setflags(write=False)
    return EffectiveResponse(g, int(N), ps.L)


def as_response(ps, N: int) -> EffectiveResponse:
    if isinstance(ps, EffectiveResponse):
        if ps.N != N:
            raise ConfigurationError(f"response built for N={ps.N}, frame has N={N}")
        return ps
    return effective_response(ps, N)


def periodic_matrix(resp: EffectiveResponse) -> np.ndarray:
    """Circulant ``NL x NL`` filter matrix whose first column is ``g``."""
    NL = resp.period
    i = np.arange(NL)
    return resp.g[(i[:, None] - i[None, :]) % NL]


def upsample(x, L: int, axis: int = -1) -> np.ndarray:
    """Insert ``L-1`` zeros after every sample."""
    x = np.moveaxis(np.asarray(x), axis, -1)
    out = np.zeros(x.shape[:-1] + (x.shape[-1] * L,), dtype=np.result_type(x, float))
    out[..., ::L] = x
    return np.moveaxis(out, -1, axis)


def shape_symbols(x, resp: EffectiveResponse, axis: int = -1) -> np.ndarray:
    """Periodic pulse shaping ``G x_up`` of symbols of length N along ``axis``."""
    x = np.moveaxis(np.asarray(x, dtype=complex), axis, -1)
    if x.shape[-1] != resp.N:
        raise ConfigurationError(f"symbol length {x.shape[-1]} != N={resp.N}")
    xu = upsample(x, resp.L)
    y = np.fft.ifft(np.fft.fft(xu, axis=-1) * np.fft.fft(resp.g), axis=-1)
    return np.moveaxis(y, -1, axis)


def shape_frame(frame, ps: PulseShape) -> np.ndarray:
    """Aperiodic filtering of a serialized frame; output is ``2ML`` samples longer than the upsampled input."""
    return np.convolve(upsample(np.asarray(frame, dtype=complex), ps.L), ps.taps)


def pulse_dpaf_table(resp: EffectiveResponse, delays, dopplers) -> np.ndarray:
    """chi_g over all ``(delay, doppler)`` pairs; shape ``(len(delays), len(dopplers))``."""
    NL = resp.period
    taus = np.atleast_1d(np.asarray(delays, dtype=np.int64))
    nus = np.atleast_1d(np.asarray(dopplers, dtype=float))
    m = np.arange(NL)
    prod = resp.g[None, :] * resp.g[(m[None, :] - taus[:, None]) % NL]
    phase = np.exp(-2j * np.pi * np.outer(resp.signed_index, nus) / NL)
    return prod @ phase


def pulse_dpaf(resp: EffectiveResponse, tau, nu):
    """chi_g(tau, nu) = sum_m g_m g_<m - tau> exp(-j 2 pi nu m / NL); broadcasts."""
    tau_b, nu_b = np.broadcast_arrays(np.asarray(tau, dtype=np.int64), np.asarray(nu, dtype=float))
    ut, ti = np.unique(tau_b.ravel(), return_inverse=True)
    un, ni = np.unique(nu_b.ravel(), return_inverse=True)
    out = pulse_dpaf_table(resp, ut, un)[ti, ni].reshape(tau_b.shape)
    return out[()] if out.ndim == 0 else out


def pacf(resp: EffectiveResponse, tau):
    """Periodic autocorrelation R_g(tau); real for the real pulses used here."""
    NL = resp.period
    t = np.asarray(tau, dtype=np.int64)
    m = np.arange(NL)
    r = resp.g[None, :] * resp.g[(m[None, :] - t.reshape(-1, 1)) % NL]
    out = r.sum(axis=1).reshape(t.shape)
    return out[()] if out.ndim == 0 else out


def sse(resp: EffectiveResponse, nu):
    """Spectrum of the squared envelope, F_g(nu) = sum_m g_m^2 exp(-j 2 pi nu m / NL)."""
    v = np.asarray(nu, dtype=float)
    ph = np.exp(-2j * np.pi * np.outer(v.ravel(), resp.signed_index) / resp.period)
    out = (ph @ (resp.g**2)).reshape(v.shape)
    return out[()] if out.ndim == 0 else out
