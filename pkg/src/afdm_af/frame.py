"""AFDM symbol generation and GPS framing.

OFDM and OCDM are the special cases ``two_n_c1 = 0`` and
``two_n_c1 = 1, c2 = 1/(2N)``.
"""

from dataclasses import dataclass, field, replace

import numpy as np

from .constellation import QAM16, ConstellationSpec
from .errors import ConfigurationError, DimensionError


@dataclass(frozen=True)
class AfdmConfig:
    """Waveform parameters.

    The chirp rate is stored as the integer ``two_n_c1 = 2*N*c1`` so it can
    only take admissible values; it is reduced modulo ``2N`` on construction
    (``c1`` and ``c1 + 1`` give identical sequences).

    Attributes
    ----------
    N : int
        Number of subcarriers (chirps) per symbol.
    two_n_c1 : int
        Integer value of ``2 N c1``.
    c2 : float
        Second chirp parameter; rotates each data symbol by ``exp(j 2 pi c2 m^2)``.
    n_cp : int
        Chirp-periodic prefix length in chips.
    M : int
        Pulse half-length in chips; also the guard prefix/suffix length.
    L : int
        Oversampling ratio of the pulse-shaped signal.
    n_sym : int
        Number of symbols in a frame.
    constellation : ConstellationSpec
    """

    N: int
    two_n_c1: int = 0
    c2: float = 0.0
    n_cp: int = 0
    M: int = 0
    L: int = 1
    n_sym: int = 1
    constellation: ConstellationSpec = field(default=QAM16)

    def __post_init__(self):
        for name in ("N", "two_n_c1", "n_cp", "M", "L", "n_sym"):
            v = getattr(self, name)
            if isinstance(v, (float, np.floating)) and float(v).is_integer():
                v = int(v)
            if not isinstance(v, (int, np.integer)) or isinstance(v, bool):
                raise ConfigurationError(f"{name} must be an integer, got {v!r}")
            object.__setattr__(self, name, int(v))
        if self.N < 1:
            raise ConfigurationError(f"N must be positive, got {self.N}")
        if self.n_cp < 0 or self.M < 0:
            raise ConfigurationError("n_cp and M must be non-negative")
        if self.L < 1 or self.n_sym < 1:
            raise ConfigurationError("L and n_sym must be >= 1")
        if not np.isfinite(self.c2):
            raise ConfigurationError("c2 must be finite")
        object.__setattr__(self, "c2", float(self.c2))
        object.__setattr__(self, "two_n_c1", self.two_n_c1 % (2 * self.N))

    @classmethod
    def ofdm(cls, N, **kwargs) -> "AfdmConfig":
        kwargs.setdefault("c2", 0.0)
        return cls(N, two_n_c1=0, **kwargs)

    @classmethod
    def ocdm(cls, N, **kwargs) -> "AfdmConfig":
        return cls(N, two_n_c1=1, c2=1.0 / (2 * N), **kwargs)

    def replace(self, **changes) -> "AfdmConfig":
        return replace(self, **changes)

    @property
    def c1(self) -> float:
        return self.two_n_c1 / (2 * self.N)

    @property
    def symbol_length(self) -> int:
        """Chips per framed symbol: guard prefix + CPP + body + guard suffix."""
        return self.N + self.n_cp + 2 * self.M

    @property
    def frame_length(self) -> int:
        return self.symbol_length * self.n_sym

    @property
    def is_periodic(self) -> bool:
        """True when the chirp-periodic extension is plainly periodic.

        The prefix phase reduces to ``(-1)**(N * two_n_c1)``; the periodic
        shift model of the echo (and the closed-form DPAFs) need it to be 1.
        """
        return (self.N * self.two_n_c1) % 2 == 0


def _chirp(two_n_c1: int, N: int, n: np.ndarray) -> np.ndarray:
    """exp(j 2 pi c1 n^2) with the exponent reduced exactly in integers."""
    n = np.asarray(n, dtype=np.int64)
    k = (two_n_c1 * (n * n)) % (2 * N)
    return np.exp(1j * np.pi * k / N)


def _as_columns(cfg: AfdmConfig, data) -> np.ndarray:
    a = np.asarray(data, dtype=complex)
    if a.shape[:1] != (cfg.N,) or a.ndim > 2:
        raise DimensionError(f"expected {cfg.N} samples along axis 0, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise DimensionError("signal contains non-finite samples")
    return a


def idaft_modulate(cfg: AfdmConfig, data) -> np.ndarray:
    """Inverse DAFT of one symbol (shape ``(N,)``) or of each column of ``(N, K)``.

    x_n = N^{-1/2} sum_m s_m exp(j 2 pi (c1 n^2 + m n / N + c2 m^2))
    """
    s = _as_columns(cfg, data)
    m = np.arange(cfg.N)
    shape = (-1,) + (1,) * (s.ndim - 1)
    pre = np.exp(2j * np.pi * cfg.c2 * m.astype(float) ** 2).reshape(shape)
    post = _chirp(cfg.two_n_c1, cfg.N, m).reshape(shape)
    return post * np.fft.ifft(s * pre, axis=0, norm="ortho")


def daft_demodulate(cfg: AfdmConfig, x) -> np.ndarray:
    """Forward DAFT; exact inverse of :func:`idaft_modulate`."""
    x = _as_columns(cfg, x)
    n = np.arange(cfg.N)
    shape = (-1,) + (1,) * (x.ndim - 1)
    pre = np.conj(_chirp(cfg.two_n_c1, cfg.N, n)).reshape(shape)
    post = np.exp(-2j * np.pi * cfg.c2 * n.astype(float) ** 2).reshape(shape)
    return post * np.fft.fft(x * pre, axis=0, norm="ortho")


def chirp_periodic_extension(cfg: AfdmConfig, x, indices) -> np.ndarray:
    """Samples of the chirp-periodic continuation of ``x`` at arbitrary integer indices.

    For ``n < 0`` this is ``exp(-j 2 pi c1 (N^2 + 2 N n)) x[n mod N]`` and for
    ``n >= N`` it is ``exp(-j 2 pi c1 (N^2 - 2 N n)) x[n mod N]``; both are the
    IDAFT sum evaluated outside ``[0, N)``.
    """
    x = _as_columns(cfg, x)
    idx = np.asarray(indices, dtype=np.int64)
    r = idx % cfg.N
    k = (cfg.two_n_c1 * (idx * idx - r * r)) % (2 * cfg.N)
    phase = np.exp(1j * np.pi * k / cfg.N)
    shape = (-1,) + (1,) * (x.ndim - 1)
    return phase.reshape(shape) * x[r]


def add_cpp(cfg: AfdmConfig, x) -> np.ndarray:
    """Prepend the chirp-periodic prefix: length ``N + n_cp``."""
    idx = np.arange(-cfg.n_cp, cfg.N)
    return chirp_periodic_extension(cfg, x, idx)


def add_gps(cfg: AfdmConfig, x) -> np.ndarray:
    """Guard prefix | CPP | body | guard suffix, length ``N + n_cp + 2M``.

    The guard suffix covers the ``M`` chips right after the body
    (indices ``N .. N+M-1``), which is what the pulse tails read.
    """
    idx = np.arange(-cfg.n_cp - cfg.M, cfg.N + cfg.M)
    return chirp_periodic_extension(cfg, x, idx)


def build_frame(cfg: AfdmConfig, data_block) -> np.ndarray:
    """Serialize ``n_sym`` GPS-framed symbols from an ``(N, n_sym)`` data block."""
    s = np.asarray(data_block, dtype=complex)
    if s.ndim == 1 and cfg.n_sym == 1:
        s = s[:, None]
    if s.shape != (cfg.N, cfg.n_sym):
        raise DimensionError(f"data block must have shape {(cfg.N, cfg.n_sym)}, got {s.shape}")
    x = idaft_modulate(cfg, s)
    return add_gps(cfg, x).T.reshape(-1)


def frame_symbols(cfg: AfdmConfig, data_block) -> np.ndarray:
    """Time-domain symbol bodies ``X`` (N x n_sym) for a data block."""
    s = np.asarray(data_block, dtype=complex)
    if s.ndim == 1 and cfg.n_sym == 1:
        s = s[:, None]
    if s.shape != (cfg.N, cfg.n_sym):
        raise DimensionError(f"data block must have shape {(cfg.N, cfg.n_sym)}, got {s.shape}")
    return idaft_modulate(cfg, s)
