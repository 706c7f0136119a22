"""Point-target echoes of a pulse-shaped GPS-AFDM frame.

The physical path filters the serialized frame aperiodically, delays it at
the oversampled rate ``L f_s``, applies a Doppler ramp over the whole
received vector, then trims the filter transient and strips the guards and
prefix of every symbol. :func:`periodic_echo` is the equivalent per-symbol
periodic model; the two agree whenever the delay fits inside the prefix.
"""

from dataclasses import dataclass, field
import enum

import numpy as np

from .errors import ConfigurationError, ScenarioError
from .frame import AfdmConfig
from .pulse import PulseShape, as_response, shape_frame, shape_symbols
from .rng import make_rng

SPEED_OF_LIGHT = 3e8


class Fluctuation(str, enum.Enum):
    SWERLING0 = "swerling0"
    SWERLING2 = "swerling2"


@dataclass(frozen=True)
class Target:
    """A point scatterer.

    ``mean_amp`` is the reflection amplitude for Swerling 0 and the RMS
    amplitude for Swerling 2.
    """

    range_m: float
    velocity_mps: float
    mean_amp: float = 1.0
    fluctuation: Fluctuation = Fluctuation.SWERLING0

    def __post_init__(self):
        if not self.range_m >= 0:
            raise ConfigurationError(f"range must be >= 0, got {self.range_m}")
        if not self.mean_amp >= 0:
            raise ConfigurationError(f"mean_amp must be >= 0, got {self.mean_amp}")
        if not np.isfinite(self.velocity_mps):
            raise ConfigurationError("velocity must be finite")
        object.__setattr__(self, "fluctuation", Fluctuation(self.fluctuation))


@dataclass(frozen=True)
class RadioConfig:
    """Carrier, subcarrier spacing and SNR in dB (``None`` disables noise).

    The chip rate is ``f_s = N * delta_f``. SNR is the mean received signal
    power per oversampled sample (all targets, noise off) over the noise
    variance.
    """

    f_c: float = 24e9
    delta_f: float = 15e3
    snr_db: float | None = None

    def __post_init__(self):
        if not (self.f_c > 0 and self.delta_f > 0):
            raise ConfigurationError("f_c and delta_f must be positive")

    def sampling_rate(self, N: int) -> float:
        return N * self.delta_f

    def doppler_cell_mps(self) -> float:
        """Velocity spanned by one normalized Doppler unit."""
        return SPEED_OF_LIGHT * self.delta_f / (2 * self.f_c)


@dataclass(frozen=True)
class NormalizedTarget:
    tau: int
    nu: float
    tau_residual: float


def normalized_params(target: Target, radio: RadioConfig, cfg: AfdmConfig) -> NormalizedTarget:
    """Integer delay at rate ``L f_s`` and normalized Doppler ``2 v f_c N / (c f_s)``.

    The Doppler is not wrapped. ``tau_residual`` is the unrounded delay minus ``tau``.
    """
    f_s = radio.sampling_rate(cfg.N)
    exact = 2 * target.range_m * cfg.L * f_s / SPEED_OF_LIGHT
    tau = int(np.rint(exact))
    nu = 2 * target.velocity_mps * radio.f_c * cfg.N / (SPEED_OF_LIGHT * f_s)
    return NormalizedTarget(tau, float(nu), float(exact - tau))


def velocity_from_doppler(nu, radio: RadioConfig):
    return np.asarray(nu) * radio.doppler_cell_mps()


def _check_pulse(cfg: AfdmConfig, ps: PulseShape):
    if ps.L != cfg.L:
        raise ConfigurationError(f"pulse L={ps.L} differs from config L={cfg.L}")
    if ps.M > cfg.M:
        raise ConfigurationError(f"pulse half-length M={ps.M} exceeds guard length M={cfg.M}")


def _body_offset(cfg: AfdmConfig, ps: PulseShape) -> int:
    """Index of the first body sample of symbol 0 in the filtered frame."""
    return ps.center + (cfg.n_cp + cfg.M) * cfg.L


def _check_delays(cfg: AfdmConfig, taus):
    for tau in taus:
        if tau < 0 or tau > cfg.n_cp * cfg.L:
            raise ScenarioError(
                f"delay {tau} samples outside the prefix span [0, {cfg.n_cp * cfg.L}]"
            )


def apply_channel(frame, cfg: AfdmConfig, ps: PulseShape, taus, nus) -> np.ndarray:
    """Unit-gain echoes through the physical path, one per ``(tau, nu)``.

    Returns an array of shape ``(Q, N L, n_sym)``; column ``k`` of entry
    ``q`` is the received body of symbol ``k`` for target ``q``.
    """
    _check_pulse(cfg, ps)
    taus = [int(t) for t in np.atleast_1d(taus)]
    nus = [float(v) for v in np.atleast_1d(nus)]
    if len(taus) != len(nus):
        raise ConfigurationError("taus and nus must have equal length")
    _check_delays(cfg, taus)
    y = shape_frame(frame, ps)
    NL, S = cfg.N * cfg.L, cfg.symbol_length * cfg.L
    i = np.arange(y.size)
    starts = _body_offset(cfg, ps) + S * np.arange(cfg.n_sym)
    rows = starts[None, :] + np.arange(NL)[:, None]
    out = np.empty((len(taus), NL, cfg.n_sym), dtype=complex)
    for q, (tau, nu) in enumerate(zip(taus, nus)):
        r = np.zeros_like(y)
        r[tau:] = y[: y.size - tau]
        r *= np.exp(2j * np.pi * nu * i / NL)
        out[q] = r[rows]
    return out


def periodic_echo(x_ps, cfg: AfdmConfig, tau: int, nu: float, beta=1.0, ps: PulseShape | None = None):
    """Periodic echo model of one target on shaped symbols ``x_ps`` (``N L x n_sym``).

    Column ``k`` is ``beta_k x_k[<n - tau>] exp(j 2 pi nu (n + k S L + D) / NL)``
    with ``S`` the framed symbol length and ``D = (n_cp + M + M_pulse) L``
    (``(n_cp + 2M) L`` when the pulse spans the whole guard).
    """
    x = np.asarray(x_ps, dtype=complex)
    NL = cfg.N * cfg.L
    if x.ndim != 2 or x.shape[0] != NL:
        raise ConfigurationError(f"expected shaped symbols of shape ({NL}, K), got {x.shape}")
    K = x.shape[1]
    m_pulse = cfg.M if ps is None else ps.M
    lead = (cfg.n_cp + cfg.M + m_pulse) * cfg.L
    n = np.arange(NL)
    fast = np.exp(2j * np.pi * nu * n / NL)
    slow = np.exp(2j * np.pi * nu * (cfg.symbol_length * cfg.L * np.arange(K) + lead) / NL)
    beta = np.broadcast_to(np.asarray(beta, dtype=complex), (K,))
    return np.roll(x, int(tau), axis=0) * fast[:, None] * (slow * beta)[None, :]


def draw_coefficients(targets, n_sym: int, rng) -> np.ndarray:
    """Reflection coefficients, shape ``(Q, n_sym)``.

    Swerling 0 keeps ``mean_amp``; Swerling 2 draws i.i.d. CN(0, mean_amp^2) per symbol.
    """
    rng = make_rng(rng)
    out = np.empty((len(targets), n_sym), dtype=complex)
    for q, t in enumerate(targets):
        if t.fluctuation is Fluctuation.SWERLING2:
            z = rng.standard_normal((2, n_sym))
            out[q] = t.mean_amp * (z[0] + 1j * z[1]) / np.sqrt(2)
        else:
            out[q] = t.mean_amp
    return out


def complex_noise(shape, rng) -> np.ndarray:
    """Unit-variance circular complex Gaussian samples."""
    z = make_rng(rng).standard_normal((2,) + tuple(np.atleast_1d(shape)))
    return (z[0] + 1j * z[1]) / np.sqrt(2)


def signal_power(targets, L: int) -> float:
    """Expected received power per oversampled sample: sum of mean_amp^2 over L."""
    return float(sum(t.mean_amp**2 for t in targets)) / L


def noise_std(targets, L: int, snr_db) -> float:
    if snr_db is None:
        return 0.0
    p = signal_power(targets, L)
    if p == 0:
        raise ScenarioError("SNR is undefined without target power")
    return float(np.sqrt(p / 10 ** (snr_db / 10)))


@dataclass
class Echo:
    """Received matrix ``Y`` (``N L x n_sym``) with the draws that produced it."""

    Y: np.ndarray
    coefficients: np.ndarray
    params: list
    noise_std: float
    metadata: dict = field(default_factory=dict)


def synthesize_echo(frame, cfg: AfdmConfig, ps: PulseShape, targets, radio: RadioConfig, seed=0) -> Echo:
    """Sum of target echoes plus noise at ``radio.snr_db``.

    Coefficients and noise come from separate generators derived from ``seed``.
    """
    targets = list(targets)
    params = [normalized_params(t, radio, cfg) for t in targets]
    NL = cfg.N * cfg.L
    ss = np.random.SeedSequence(seed)
    rng_beta, rng_noise = (np.random.Generator(np.random.Philox(s)) for s in ss.spawn(2))
    beta = draw_coefficients(targets, cfg.n_sym, rng_beta)
    Y = np.zeros((NL, cfg.n_sym), dtype=complex)
    if targets:
        units = apply_channel(frame, cfg, ps, [p.tau for p in params], [p.nu for p in params])
        Y += np.einsum("qnk,qk->nk", units, beta)
    sigma = 0.0
    if radio.snr_db is not None:
        if not targets:
            sigma = 1.0
        else:
            sigma = noise_std(targets, cfg.L, radio.snr_db)
        Y += sigma * complex_noise(Y.shape, rng_noise)
    meta = {"snr_reference": "mean signal power per oversampled sample", "seed": seed}
    return Echo(Y, beta, params, sigma, meta)


def shaped_frame_symbols(X, cfg: AfdmConfig, ps) -> np.ndarray:
    """Periodically shaped symbols ``G x_up`` for each column of ``X`` (``N x n_sym``)."""
    return shape_symbols(X, as_response(ps, cfg.N), axis=0)
