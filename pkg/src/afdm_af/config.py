"""Experiment configuration: YAML file <-> nested dataclasses, canonical JSON and hash."""

from dataclasses import asdict, dataclass, field, fields
import hashlib
import json

import numpy as np
import yaml

from .channel import RadioConfig, Target
from .constellation import ConstellationSpec
from .errors import ConfigurationError
from .frame import AfdmConfig
from .pulse import PulseShape, rect_pulse, rrc_taps
from .receiver import Scenario

WAVEFORMS = ("afdm", "ofdm", "ocdm")


@dataclass
class PulseSpec:
    kind: str = "rrc"  # rrc | rect | none
    rolloff: float = 0.35
    M: int | None = None  # defaults to the frame guard length


@dataclass
class GridSpec:
    tau_min: int | None = None
    tau_max: int | None = None
    nu_min: float | None = None
    nu_max: float | None = None
    nu_step: float = 1.0


@dataclass
class WaveformEntry:
    name: str
    two_n_c1: int | None = None


@dataclass
class ScenarioSpec:
    targets: list = field(default_factory=list)
    n_sym: int = 50
    snr_list: list = field(default_factory=lambda: [0.0])
    waveforms: list = field(default_factory=list)
    window_cells: float = 2.0
    nu_step: float = 0.05
    interpolate: bool = True
    sigma_c: float = 0.0


@dataclass
class ExperimentConfig:
    waveform: str = "afdm"
    N: int = 128
    two_n_c1: int = 8
    c2: float = 0.0
    n_cp: int = 16
    M: int = 5
    L: int = 4
    n_sym: int = 1
    modulation: str = "qam16"
    pulse: PulseSpec = field(default_factory=PulseSpec)
    grid: GridSpec = field(default_factory=GridSpec)
    trials: int = 1000
    seed: int = 0
    radio: dict = field(default_factory=lambda: {"f_c": 24e9, "delta_f": 15e3, "snr_db": None})
    scenario: ScenarioSpec | None = None

    def __post_init__(self):
        self.waveform = str(self.waveform).lower()
        if self.waveform not in WAVEFORMS:
            raise ConfigurationError(f"waveform must be one of {WAVEFORMS}, got {self.waveform!r}")
        if isinstance(self.pulse, dict):
            self.pulse = PulseSpec(**self.pulse)
        if isinstance(self.grid, dict):
            self.grid = GridSpec(**self.grid)
        if isinstance(self.scenario, dict):
            sc = dict(self.scenario)
            self.scenario = ScenarioSpec(**sc)
        if self.scenario is not None:
            sc = self.scenario
            sc.waveforms = [asdict(WaveformEntry(**(w if isinstance(w, dict) else {"name": w})))
                            for w in sc.waveforms]
            sc.targets = [_target_dict(t) for t in sc.targets]
            sc.snr_list = [None if v is None else float(v) for v in sc.snr_list]
        self.radio = _radio_dict(self.radio)
        self.c2 = float(self.c2)
        self.pulse.rolloff = float(self.pulse.rolloff)
        self.grid.nu_step = float(self.grid.nu_step)
        if self.pulse.kind not in ("rrc", "rect", "none"):
            raise ConfigurationError(f"unknown pulse kind {self.pulse.kind!r}")
        if int(self.trials) != self.trials or self.trials < 1:
            raise ConfigurationError(f"trials must be a positive integer, got {self.trials}")
        ConstellationSpec.parse(self.modulation)
        self.afdm_config()

    # resolution into library objects

    def afdm_config(self, waveform: str | None = None, two_n_c1: int | None = None) -> AfdmConfig:
        wf = (waveform or self.waveform).lower()
        kw = dict(n_cp=self.n_cp, M=self.M, L=self.L, n_sym=self.n_sym,
                  constellation=ConstellationSpec.parse(self.modulation))
        if wf == "ofdm":
            return AfdmConfig.ofdm(self.N, **kw)
        if wf == "ocdm":
            return AfdmConfig.ocdm(self.N, **kw)
        if wf != "afdm":
            raise ConfigurationError(f"unknown waveform {wf!r}")
        t = self.two_n_c1 if two_n_c1 is None else two_n_c1
        return AfdmConfig(self.N, two_n_c1=t, c2=self.c2, **kw)

    def pulse_shape(self) -> PulseShape | None:
        """The configured pulse, or ``None`` for the unshaped chain (``kind: none``)."""
        M = self.M if self.pulse.M is None else self.pulse.M
        if self.pulse.kind == "rrc":
            return rrc_taps(M, self.L, self.pulse.rolloff)
        if self.pulse.kind == "rect":
            return rect_pulse(self.L, M)
        return None

    def radio_config(self) -> RadioConfig:
        return RadioConfig(**self.radio)

    def delay_grid(self, signed: bool = False) -> np.ndarray:
        NL = self.N * self.L
        lo_default, hi_default = (-(NL // 2), NL - NL // 2 - 1) if signed else (0, NL - 1)
        lo = lo_default if self.grid.tau_min is None else int(self.grid.tau_min)
        hi = hi_default if self.grid.tau_max is None else int(self.grid.tau_max)
        if hi < lo:
            raise ConfigurationError("empty delay grid")
        return np.arange(lo, hi + 1)

    def doppler_grid(self) -> np.ndarray:
        NL = self.N * self.L
        lo = -(NL // 2) if self.grid.nu_min is None else float(self.grid.nu_min)
        hi = NL - NL // 2 - 1 if self.grid.nu_max is None else float(self.grid.nu_max)
        step = float(self.grid.nu_step)
        if step <= 0:
            raise ConfigurationError("nu_step must be positive")
        if hi < lo:
            raise ConfigurationError("empty Doppler grid")
        n = int(np.floor((hi - lo) / step + 1e-9)) + 1
        return lo + step * np.arange(n)

    def scenario_objects(self):
        """``(Scenario, {name: AfdmConfig})`` for the RMSE experiment."""
        if self.scenario is None:
            raise ConfigurationError("config has no scenario block")
        sc = self.scenario
        scenario = Scenario([Target(**t) for t in sc.targets], self.radio_config(), sc.n_sym)
        entries = sc.waveforms or [{"name": self.waveform}]
        cfgs = {}
        for e in entries:
            e = WaveformEntry(**e)
            key = e.name if e.two_n_c1 is None else f"{e.name}{e.two_n_c1}"
            cfgs[key] = self.afdm_config(e.name, e.two_n_c1)
        return scenario, cfgs

    # serialization

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        d = dict(d or {})
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ConfigurationError(f"unknown config keys: {sorted(unknown)}")
        try:
            return cls(**d)
        except TypeError as exc:
            raise ConfigurationError(str(exc)) from exc

    def canonical_json(self) -> str:
        return canonical_json(self.to_dict())

    def config_hash(self) -> str:
        return config_hash(self.canonical_json())

    def to_yaml(self) -> str:
        return yaml.safe_dump(self.to_dict(), sort_keys=True)


def _target_dict(t) -> dict:
    if not isinstance(t, dict):
        raise ConfigurationError(f"target must be a mapping, got {t!r}")
    try:
        tg = Target(**t)
    except TypeError as exc:
        raise ConfigurationError(f"bad target {t!r}: {exc}") from exc
    except ValueError as exc:
        raise ConfigurationError(f"bad target {t!r}: {exc}") from exc
    d = asdict(tg)
    d["fluctuation"] = tg.fluctuation.value
    for k in ("range_m", "velocity_mps", "mean_amp"):
        d[k] = float(d[k])
    return d


def _radio_dict(r) -> dict:
    r = dict(r or {})
    try:
        # YAML 1.1 reads "24.0e9" as a string
        r = {k: (None if v is None else float(v)) for k, v in r.items()}
        rc = RadioConfig(**r)
    except (TypeError, ValueError) as exc:
        raise ConfigurationError(f"bad radio block: {exc}") from exc
    snr = None if rc.snr_db is None else float(rc.snr_db)
    return {"f_c": float(rc.f_c), "delta_f": float(rc.delta_f), "snr_db": snr}


def canonical_json(d: dict) -> str:
    return json.dumps(d, sort_keys=True, separators=(",", ":"))


def config_hash(text: str) -> str:
    return hashlib.sha256(text.encode()).hexdigest()


def load_config(path) -> ExperimentConfig:
    try:
        with open(path) as fh:
            data = yaml.safe_load(fh)
    except (OSError, yaml.YAMLError) as exc:
        raise ConfigurationError(f"cannot read config {path}: {exc}") from exc
    if data is not None and not isinstance(data, dict):
        raise ConfigurationError("config file must hold a mapping")
    return ExperimentConfig.from_dict(data or {})
