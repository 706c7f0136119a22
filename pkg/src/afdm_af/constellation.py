"""Unit-power, rotationally symmetric constellations and their kurtosis."""

from dataclasses import dataclass
from functools import lru_cache
import math
import re

import numpy as np

from .errors import ConfigurationError
from .rng import make_rng


@dataclass(frozen=True)
class ConstellationSpec:
    """A PSK or square-QAM alphabet.

    Parameters
    ----------
    kind : {"psk", "qam"}
    order : int
        Alphabet size, a power of two. QAM orders must also be perfect squares.
        PSK needs at least 4 points for a zero pseudo-mean.
    """

    kind: str
    order: int

    def __post_init__(self):
        kind = str(self.kind).lower()
        object.__setattr__(self, "kind", kind)
        order = self.order
        if kind not in ("psk", "qam"):
            raise ConfigurationError(f"unknown constellation kind {self.kind!r}")
        if not isinstance(order, (int, np.integer)) or order < 1 or order & (order - 1):
            raise ConfigurationError(f"constellation order must be a power of 2, got {order!r}")
        if kind == "qam" and math.isqrt(order) ** 2 != order:
            raise ConfigurationError(f"QAM order must be a perfect square, got {order}")
        if kind == "psk" and order < 4:
            # BPSK has E{s^2} = 1, which breaks the zero pseudo-variance assumption
            raise ConfigurationError(f"PSK order must be >= 4, got {order}")

    @classmethod
    def parse(cls, text: str) -> "ConstellationSpec":
        """Parse names like ``"qam16"``, ``"16-QAM"``, ``"psk8"`` or ``"qpsk"``."""
        t = str(text).strip().lower().replace("-", "").replace("_", "")
        if t == "qpsk":
            return cls("psk", 4)
        m = re.fullmatch(r"(psk|qam)(\d+)", t) or re.fullmatch(r"(\d+)(psk|qam)", t)
        if m is None:
            raise ConfigurationError(f"cannot parse constellation {text!r}")
        a, b = m.groups()
        kind, order = (a, b) if a.isalpha() else (b, a)
        return cls(kind, int(order))

    @property
    def name(self) -> str:
        return f"{self.kind}{self.order}"


QAM16 = ConstellationSpec("qam", 16)
PSK4 = ConstellationSpec("psk", 4)


@lru_cache(maxsize=None)
def _points(kind: str, order: int) -> np.ndarray:
    if kind == "psk":
        k = np.arange(order)
        pts = np.exp(1j * (np.pi / order + 2 * np.pi * k / order))
    else:
        side = math.isqrt(order)
        levels = np.arange(-(side - 1), side, 2, dtype=float)
        pts = (levels[:, None] + 1j * levels[None, :]).ravel()
        pts = pts / np.sqrt(2 * (order - 1) / 3)
    pts.setflags(write=False)
    return pts


def constellation_points(spec: ConstellationSpec) -> np.ndarray:
    """Full alphabet with mean power 1, mean 0 and pseudo-mean 0."""
    return _points(spec.kind, spec.order)


def kurtosis(spec: ConstellationSpec) -> float:
    """Fourth moment mu4 = E|s|^4 of the unit-power alphabet."""
    if spec.kind == "psk":
        return 1.0
    return float(np.mean(np.abs(constellation_points(spec)) ** 4))


def draw_symbols(spec: ConstellationSpec, count: int, seed=0) -> np.ndarray:
    """``count`` i.i.d. uniform draws from the alphabet (deterministic in ``seed``).

    ``count`` may also be a shape tuple. ``seed`` may be an int or a Generator.
    """
    rng = make_rng(seed)
    idx = rng.integers(0, spec.order, size=count)
    return constellation_points(spec)[idx]
