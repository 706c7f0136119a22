"""Matched filtering, noncoherent integration and ML delay-Doppler estimation."""

from dataclasses import dataclass, field

import numpy as np

from .ambiguity import cross_ambiguity
from .channel import (
    RadioConfig,
    Target,
    apply_channel,
    complex_noise,
    draw_coefficients,
    noise_std,
    normalized_params,
    shaped_frame_symbols,
)
from .constellation import constellation_points
from .errors import ConfigurationError
from .frame import AfdmConfig, build_frame, frame_symbols
from .pulse import PulseShape, rect_pulse
from .rng import trial_rng


def matched_filter(y_k, x_ps_k, delays, dopplers) -> np.ndarray:
    """Periodic matched filter sum_n y[n] x*[<n - tau>] exp(-j 2 pi nu n / NL).

    Accepts single vectors or ``(K, NL)`` batches; the output has shape
    ``(..., len(delays), len(dopplers))``.
    """
    y = np.asarray(y_k, dtype=complex)
    x = np.asarray(x_ps_k, dtype=complex)
    if y.shape != x.shape:
        raise ConfigurationError(f"received {y.shape} and reference {x.shape} shapes differ")
    return cross_ambiguity(y, x, delays, dopplers)


@dataclass
class RangeDopplerMap:
    """Noncoherently integrated matched-filter output over ``(delays, dopplers)``."""

    values: np.ndarray
    delays: np.ndarray
    dopplers: np.ndarray
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        self.delays = np.atleast_1d(np.asarray(self.delays))
        self.dopplers = np.atleast_1d(np.asarray(self.dopplers, dtype=float))
        if self.values.shape != (self.delays.size, self.dopplers.size):
            raise ConfigurationError("map values do not match grid lengths")
        if np.any(self.values < 0):
            raise ConfigurationError("map values must be non-negative")


def noncoherent_integrate(maps, delays=None, dopplers=None, metadata=None) -> RangeDopplerMap:
    """Average of ``|r_k|^2`` over the leading (symbol) axis of ``maps``."""
    m = np.asarray(maps)
    if m.ndim == 2:
        m = m[None]
    if m.ndim != 3 or m.shape[0] == 0:
        raise ConfigurationError("expected a non-empty stack of 2-D maps")
    values = np.mean(np.abs(m) ** 2, axis=0)
    delays = np.arange(values.shape[0]) if delays is None else delays
    dopplers = np.arange(values.shape[1]) if dopplers is None else dopplers
    meta = {"integration_count": m.shape[0]}
    meta.update(metadata or {})
    return RangeDopplerMap(values, delays, dopplers, meta)


@dataclass(frozen=True)
class Estimate:
    tau: float
    nu: float
    peak: float


def ml_estimate(rd_map: RangeDopplerMap, interpolate: bool = False) -> Estimate:
    """Grid argmax; ties go to the smallest delay, then the smallest Doppler.

    With ``interpolate`` the Doppler is refined by a 3-point parabola through
    the peak and its neighbours (uniform Doppler spacing assumed).
    """
    v = rd_map.values
    if v.size == 0:
        raise ConfigurationError("empty search grid")
    i, j = np.unravel_index(int(np.argmax(v)), v.shape)
    nu = float(rd_map.dopplers[j])
    peak = float(v[i, j])
    if interpolate and 0 < j < v.shape[1] - 1:
        a, b, c = v[i, j - 1], v[i, j], v[i, j + 1]
        den = a - 2 * b + c
        if den < 0:
            off = 0.5 * (a - c) / den
            step = rd_map.dopplers[j + 1] - rd_map.dopplers[j]
            nu += float(off * step)
            peak = float(b - 0.25 * (a - c) * off)
    return Estimate(float(rd_map.delays[i]), nu, peak)


@dataclass
class Scenario:
    """Targets, radio parameters and number of integrated symbols."""

    targets: list
    radio: RadioConfig = field(default_factory=RadioConfig)
    n_sym: int = 50

    def __post_init__(self):
        self.targets = [t if isinstance(t, Target) else Target(**t) for t in self.targets]
        if self.n_sym < 1:
            raise ConfigurationError("n_sym must be >= 1")

    def weak_target(self) -> int:
        if not self.targets:
            raise ConfigurationError("scenario has no targets")
        return int(np.argmin([t.mean_amp for t in self.targets]))


def doppler_window(center: float, half_width: float, step: float) -> np.ndarray:
    """Doppler grid of multiples of ``step`` within ``center +/- half_width``."""
    if step <= 0 or half_width < 0:
        raise ConfigurationError("Doppler window needs step > 0 and half_width >= 0")
    lo = np.ceil((center - half_width) / step - 1e-9)
    hi = np.floor((center + half_width) / step + 1e-9)
    return np.arange(lo, hi + 1) * step


@dataclass
class RmseTable:
    rows: list
    metadata: dict = field(default_factory=dict)

    def rmse(self, waveform: str, snr_db: float) -> float:
        for r in self.rows:
            if r["waveform"] == waveform and r["snr_db"] == snr_db:
                return r["rmse_mps"]
        raise KeyError((waveform, snr_db))


def rmse_experiment(scenario: Scenario, waveform_cfgs: dict, snr_list, trials: int, seed: int = 0,
                    ps: PulseShape | None = None, window_cells: float = 2.0, nu_step: float = 0.05,
                    interpolate: bool = True) -> RmseTable:
    """Weak-target velocity RMSE per waveform and SNR.

    The matched filter is evaluated only at the known weak-target delay over
    a Doppler window around its true value. Data symbols, reflection
    coefficients and unit-scale noise are shared across waveforms and SNRs
    within a trial.
    """
    if int(trials) != trials or trials < 1:
        raise ConfigurationError("trials must be a positive integer")
    if not waveform_cfgs:
        raise ConfigurationError("no waveforms given")
    radio = scenario.radio
    weak = scenario.weak_target()
    snrs = [None if s is None else float(s) for s in snr_list]
    prepared = {}
    for name, cfg in waveform_cfgs.items():
        cfg = cfg.replace(n_sym=scenario.n_sym)
        pulse = ps if ps is not None else rect_pulse(cfg.L)
        params = [normalized_params(t, radio, cfg) for t in scenario.targets]
        nus = doppler_window(params[weak].nu, window_cells, nu_step)
        prepared[name] = (cfg, pulse, params, nus)

    K = scenario.n_sym
    sq_err = {(name, s): 0.0 for name in prepared for s in range(len(snrs))}
    for t in range(int(trials)):
        beta = draw_coefficients(scenario.targets, K, trial_rng(seed, t, 1))
        for name, (cfg, pulse, params, nus) in prepared.items():
            pts = constellation_points(cfg.constellation)
            data = pts[trial_rng(seed, t, 0).integers(0, len(pts), size=(cfg.N, K))]
            frame = build_frame(cfg, data)
            xps = shaped_frame_symbols(frame_symbols(cfg, data), cfg, pulse)
            units = apply_channel(frame, cfg, pulse, [p.tau for p in params], [p.nu for p in params])
            clean = np.einsum("qnk,qk->nk", units, beta)
            noise = complex_noise(clean.shape, trial_rng(seed, t, 2))
            for s, snr in enumerate(snrs):
                sigma = noise_std(scenario.targets, cfg.L, snr)
                Y = clean + sigma * noise
                r = matched_filter(Y.T, xps.T, [params[weak].tau], nus)
                est = ml_estimate(noncoherent_integrate(r, [params[weak].tau], nus), interpolate)
                err = (est.nu - params[weak].nu) * radio.doppler_cell_mps()
                sq_err[(name, s)] += err**2

    rows = []
    for name in prepared:
        for s, snr in enumerate(snrs):
            rows.append({
                "waveform": name,
                "snr_db": snr,
                "rmse_mps": float(np.sqrt(sq_err[(name, s)] / trials)),
                "trials": int(trials),
                "seed": int(seed),
            })
    meta = {
        "window_cells": window_cells,
        "nu_step": nu_step,
        "interpolate": interpolate,
        "weak_target": weak,
        "snr_reference": "mean signal power per oversampled sample",
    }
    return RmseTable(rows, meta)

