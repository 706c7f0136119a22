"""Choosing the chirp rate so a weak target does not land on a strong target's depression.

For a strong/weak pair separated by ``dtau`` chips and ``dnu`` Doppler units,
the weak target's mainlobe sits on a depression of the strong target when
``<2 N c1 dtau>_N = <dnu>_N``, i.e. when ``c1`` equals

    c1_bar(k) = dv f_c / (2 dd f_s^2) + k c / (4 dd f_s)

for some integer ``k`` (``dd = d_w - d_s``, ``dv = v_w - v_s``).
"""

from dataclasses import dataclass, field
import logging
import math

import numpy as np

from .ambiguity import find_depressions
from .channel import SPEED_OF_LIGHT
from .errors import ConfigurationError, DegenerateScenarioError, ExhaustionError
from .frame import AfdmConfig

log = logging.getLogger(__name__)

_TOL = 1e-9


@dataclass(frozen=True)
class GuidelineInput:
    """Strong (``_s``) and weak (``_w``) target geometry plus radio parameters.

    ``sigma_c`` is the half-width of the forbidden band around each
    ``c1_bar``, in units of ``c1``.
    """

    d_s: float
    d_w: float
    v_s: float
    v_w: float
    f_c: float
    f_s: float
    N: int
    sigma_c: float = 0.0

    def __post_init__(self):
        if self.d_w == self.d_s:
            raise DegenerateScenarioError("strong and weak targets at the same range")
        if not (self.f_c > 0 and self.f_s > 0 and self.N >= 1):
            raise ConfigurationError("f_c, f_s and N must be positive")
        if self.sigma_c < 0:
            raise ConfigurationError("sigma_c must be >= 0")

    @property
    def delta_tau(self) -> float:
        """Delay gap in chips."""
        return 2 * (self.d_w - self.d_s) * self.f_s / SPEED_OF_LIGHT

    @property
    def delta_nu(self) -> float:
        """Normalized Doppler gap."""
        return 2 * (self.v_w - self.v_s) * self.f_c * self.N / (SPEED_OF_LIGHT * self.f_s)

    @property
    def offset(self) -> float:
        return (self.v_w - self.v_s) * self.f_c / (2 * (self.d_w - self.d_s) * self.f_s**2)

    @property
    def spacing(self) -> float:
        return SPEED_OF_LIGHT / (4 * (self.d_w - self.d_s) * self.f_s)


@dataclass(frozen=True)
class ForbiddenInterval:
    k: int
    c1_bar: float
    low: float
    high: float

    def contains(self, c1: float) -> bool:
        tol = _TOL * max(1.0, abs(self.c1_bar))
        return self.low - tol <= c1 <= self.high + tol


def forbidden_c1(inp: GuidelineInput, k_range) -> list:
    """Forbidden centres ``c1_bar(k)`` and their bands for every ``k`` in ``k_range``."""
    out = []
    for k in k_range:
        c = inp.offset + int(k) * inp.spacing
        out.append(ForbiddenInterval(int(k), c, c - inp.sigma_c, c + inp.sigma_c))
    return out


def is_forbidden(inp: GuidelineInput, two_n_c1: int) -> bool:
    """Analytic test: does ``c1 = two_n_c1 / (2N)`` fall in any forbidden band (any ``k``)?"""
    c1 = two_n_c1 / (2 * inp.N)
    step = abs(inp.spacing)
    k0 = math.floor((c1 - inp.offset) / inp.spacing)
    # widen the scan when the band is wider than the spacing
    extra = int(math.ceil(inp.sigma_c / step)) if step > 0 else 0
    ks = range(k0 - 1 - extra, k0 + 3 + extra)
    return any(iv.contains(c1) for iv in forbidden_c1(inp, ks))


def collides(inp: GuidelineInput, two_n_c1: int) -> bool:
    """Geometric test on the depression lattice of the strong target.

    The delay gap is rounded to whole chips. With ``sigma_c = 0`` this is a
    lookup of ``(dtau, <dnu>_N)`` in the depression map; otherwise the
    Doppler mismatch ``2 N c1 dtau - dnu`` must lie within ``2 N |dtau| sigma_c``
    of a multiple of ``N``.
    """
    N = inp.N
    dtau = int(round(inp.delta_tau))
    dnu = inp.delta_nu
    miss = two_n_c1 * dtau - dnu
    dist = abs(miss - N * round(miss / N))
    if inp.sigma_c > 0:
        return dist <= 2 * N * abs(dtau) * inp.sigma_c + _TOL * max(1.0, abs(dnu))
    if abs(dnu - round(dnu)) > _TOL * max(1.0, abs(dnu)):
        return False
    cell = (dtau % N, int(round(dnu)) % N)
    if cell[0] == 0:
        # delay gap of whole symbols: the weak cell is on the strong target's Doppler axis
        return cell[1] == 0
    return cell in find_depressions(AfdmConfig(N, two_n_c1=two_n_c1))


@dataclass(frozen=True)
class CandidateVerdict:
    two_n_c1: int
    c1: float
    analytic_forbidden: bool
    geometric_collision: bool

    @property
    def agree(self) -> bool:
        return self.analytic_forbidden == self.geometric_collision

    @property
    def accepted(self) -> bool:
        return not (self.analytic_forbidden or self.geometric_collision)


@dataclass
class DesignResult:
    chosen: int
    verdicts: list = field(default_factory=list)

    @property
    def disagreements(self) -> list:
        return [v for v in self.verdicts if not v.agree]


def evaluate_candidates(inp: GuidelineInput, candidates=None) -> list:
    if candidates is None:
        candidates = range(1, 2 * inp.N)
    out = []
    for t in candidates:
        t = int(t)
        if not 1 <= t < 2 * inp.N:
            raise ConfigurationError(f"candidate two_n_c1={t} outside [1, {2 * inp.N - 1}]")
        v = CandidateVerdict(t, t / (2 * inp.N), is_forbidden(inp, t), collides(inp, t))
        if not v.agree:
            log.warning("analytic and geometric checks disagree for two_n_c1=%d", t)
        out.append(v)
    return out


def choose_two_n_c1(inp: GuidelineInput, candidates=None) -> DesignResult:
    """Smallest candidate that passes both the analytic and the geometric check."""
    verdicts = evaluate_candidates(inp, candidates)
    ok = sorted(v.two_n_c1 for v in verdicts if v.accepted)
    if not ok:
        collisions = {
            v.two_n_c1: ("analytic" if v.analytic_forbidden else "")
            + ("+" if v.analytic_forbidden and v.geometric_collision else "")
            + ("geometric" if v.geometric_collision else "")
            for v in verdicts
        }
        raise ExhaustionError(
            f"every candidate collides ({len(verdicts)} checked)", collisions=collisions
        )
    return DesignResult(ok[0], verdicts)


def design_report(inp: GuidelineInput, candidates=None, k_range=range(-3, 4)) -> str:
    """Plain-text summary: gaps, forbidden bands, per-candidate verdicts and the choice."""
    lines = [
        f"delay gap: {inp.delta_tau:.6g} chips, Doppler gap: {inp.delta_nu:.6g}",
        f"forbidden c1 spacing: {inp.spacing:.6g}, sigma_c: {inp.sigma_c:g}",
        "forbidden bands:",
    ]
    for iv in forbidden_c1(inp, k_range):
        lines.append(
            f"  k={iv.k:+d}  c1_bar={iv.c1_bar:.6g}  [{iv.low:.6g}, {iv.high:.6g}]"
            f"  two_n_c1={2 * inp.N * iv.c1_bar:.6g}"
        )
    verdicts = evaluate_candidates(inp, candidates)
    lines.append("candidates:")
    for v in verdicts:
        status = "ok" if v.accepted else "rejected"
        lines.append(
            f"  two_n_c1={v.two_n_c1:4d}  c1={v.c1:.6g}  analytic={'forbidden' if v.analytic_forbidden else 'allowed'}"
            f"  depression={'hit' if v.geometric_collision else 'clear'}  {status}"
            + ("" if v.agree else "  MISMATCH")
        )
    ok = [v.two_n_c1 for v in verdicts if v.accepted]
    lines.append(f"chosen two_n_c1: {ok[0] if ok else 'none'}")
    bad = sum(not v.agree for v in verdicts)
    lines.append(f"cross-check: {len(verdicts) - bad}/{len(verdicts)} candidates agree")
    return "\n".join(lines)
