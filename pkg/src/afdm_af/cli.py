"""Command-line front end: ``afdm-af dpaf|cuts|scenario|design``.

Every command takes an optional YAML config; flags override its keys.
Outputs are CSV files with ``#``-prefixed metadata lines carrying the
resolved config and its SHA-256.
"""

import csv
import functools
import io
import os
from pathlib import Path
import sys
import tempfile

import click
import numpy as np

from . import ambiguity as amb
from .config import ExperimentConfig, config_hash, load_config
from .constellation import kurtosis
from .design import GuidelineInput, choose_two_n_c1, design_report, evaluate_candidates
from .errors import ConfigurationError, DimensionError, ScenarioError
from .pulse import as_response, rect_pulse
from .receiver import rmse_experiment

EXIT_USAGE = 2
EXIT_RUNTIME = 3
OUTDIR_ENV = "AFDM_AF_OUTDIR"


def _handled(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except (ConfigurationError, DimensionError) as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(EXIT_USAGE)
        except ScenarioError as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(EXIT_RUNTIME)

    return wrapper


def _resolve(config_path, **overrides) -> ExperimentConfig:
    cfg = load_config(config_path) if config_path else ExperimentConfig()
    d = cfg.to_dict()
    for key, value in overrides.items():
        if value is None:
            continue
        if key in ("rolloff", "pulse_kind", "pulse_m"):
            d["pulse"][{"rolloff": "rolloff", "pulse_kind": "kind", "pulse_m": "M"}[key]] = value
        elif key in ("tau_min", "tau_max", "nu_min", "nu_max", "nu_step"):
            d["grid"][key] = value
        else:
            d[key] = value
    return ExperimentConfig.from_dict(d)


def _header(cfg: ExperimentConfig, **extra) -> list:
    text = cfg.canonical_json()
    lines = [f"config: {text}", f"config_sha256: {config_hash(text)}"]
    lines += [f"{k}: {v}" for k, v in extra.items()]
    return lines


def write_csv(path, header_lines, columns, rows):
    """Write metadata lines and rows atomically (temp file in the target directory, then rename)."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    buf = io.StringIO()
    for line in header_lines:
        buf.write(f"# {line}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    w.writerows(rows)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(buf.getvalue())
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def read_csv_header(path) -> dict:
    """Metadata ``key: value`` pairs from the ``#`` lines of an output file."""
    meta = {}
    with open(path) as fh:
        for line in fh:
            if not line.startswith("#"):
                break
            key, _, value = line[1:].strip().partition(": ")
            meta[key] = value
    return meta


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return v


def _common(fn):
    opts = [
        click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False), help="YAML config file."),
        click.option("--waveform", type=click.Choice(["afdm", "ofdm", "ocdm"], case_sensitive=False)),
        click.option("--n", "N", type=int, help="Subcarriers."),
        click.option("--two-n-c1", type=int, help="Integer 2*N*c1."),
        click.option("--c2", type=float),
        click.option("--mod", "modulation", help="Constellation, e.g. qam16 or psk4."),
        click.option("--L", "L", type=int, help="Oversampling ratio."),
        click.option("--M", "M", type=int, help="Guard length in chips (also the default pulse half-length)."),
        click.option("--n-cp", type=int),
        click.option("--pulse", "pulse_kind", type=click.Choice(["rrc", "rect", "none"])),
        click.option("--rolloff", type=float),
        click.option("--seed", type=int),
        click.option("--out-dir", envvar=OUTDIR_ENV, default=".", show_default=True,
                     type=click.Path(file_okay=False), help=f"Output directory (env {OUTDIR_ENV})."),
        click.option("--output", "-o", help="Output file name inside the output directory."),
    ]
    for opt in reversed(opts):
        fn = opt(fn)
    return fn


def _grid_opts(fn):
    for name, typ in reversed([("--tau-min", int), ("--tau-max", int), ("--nu-min", float),
                               ("--nu-max", float), ("--nu-step", float)]):
        fn = click.option(name, type=typ)(fn)
    return fn


def _trials_opt(fn):
    return click.option("--trials", type=int, help="Monte Carlo trials.")(fn)


def _pop_io(kw):
    return kw.pop("out_dir"), kw.pop("output")


def _check_trials(trials):
    if trials is not None and trials < 1:
        raise click.UsageError("--trials must be >= 1")


def _pulse_meta(cfg: ExperimentConfig, ps) -> str:
    return "none" if ps is None else ps.describe()


@click.group()
@click.version_option(package_name="artifact")
def main():
    """Ambiguity-function and sensing experiments for pulse-shaped AFDM."""


@main.command()
@click.option("--mode", type=click.Choice(["theory", "sim", "both"]), default="theory", show_default=True)
@_common
@_grid_opts
@_trials_opt
@_handled
def dpaf(mode, **kw):
    """Average squared DPAF surface as long-format CSV."""
    _check_trials(kw.get("trials"))
    out_dir, output = _pop_io(kw)
    cfg = _resolve(kw.pop("config_path"), **kw)
    wf = cfg.afdm_config()
    ps = cfg.pulse_shape()
    sim_ps = ps if ps is not None else rect_pulse(cfg.L)
    # the unshaped closed form is exact for fractional Doppler, so prefer it when L = 1
    theory_ps = None if ps is None and cfg.L == 1 else sim_ps
    taus = cfg.delay_grid()
    nus = cfg.doppler_grid()
    cols, data = ["tau", "nu"], []
    approximate = False
    if mode in ("theory", "both"):
        th = amb.theory_grid(wf, theory_ps, taus, nus)
        approximate = th.metadata["approximate"]
        data.append(th.values)
    if mode in ("sim", "both"):
        mc = amb.dpaf_monte_carlo(wf, sim_ps, taus, nus, cfg.trials, cfg.seed)
        data += [mc.values, mc.stderr]
    cols += {"theory": ["value"], "sim": ["value", "stderr"], "both": ["value_theory", "value_sim", "stderr"]}[mode]
    T, V = np.meshgrid(taus, nus, indexing="ij")
    rows = zip(T.ravel().tolist(), (_fmt(v) for v in V.ravel()), *([_fmt(x) for x in d.ravel()] for d in data))
    header = _header(
        cfg,
        mode=mode,
        mu4=kurtosis(wf.constellation),
        pulse=_pulse_meta(cfg, ps),
        mainlobe_theory=repr(float(amb.theory_grid(wf, theory_ps, [0], [0.0]).values[0, 0])),
        approximate=approximate,
    )
    path = write_csv(Path(out_dir) / (output or f"dpaf_{cfg.waveform}_{mode}.csv"), header, cols, rows)
    click.echo(str(path))


@main.command()
@click.option("--mode", type=click.Choice(["theory", "both"]), default="theory", show_default=True)
@_common
@_grid_opts
@_trials_opt
@_handled
def cuts(mode, **kw):
    """Zero-Doppler delay cut and zero-delay Doppler cut with PACF/SSE overlays."""
    _check_trials(kw.get("trials"))
    out_dir, output = _pop_io(kw)
    cfg = _resolve(kw.pop("config_path"), **kw)
    wf = cfg.afdm_config()
    ps = cfg.pulse_shape() or rect_pulse(cfg.L)
    resp = as_response(ps, cfg.N)
    NL = resp.period
    taus = cfg.delay_grid(signed=True)
    nus = cfg.doppler_grid()
    d_pacf, d_side = amb.delay_cut_terms(wf, ps, taus)
    n_sse, n_side = amb.doppler_cut_terms(wf, ps, nus)
    sim_d = sim_n = None
    if mode == "both":
        ut = np.unique(taus % NL)
        mc_d = amb.dpaf_monte_carlo(wf, ps, ut, [0.0], cfg.trials, cfg.seed)
        sim_d = mc_d.values[np.searchsorted(ut, taus % NL), 0]
        mc_n = amb.dpaf_monte_carlo(wf, ps, [0], nus, cfg.trials, cfg.seed)
        sim_n = mc_n.values[0]
    rows = []
    for i, t in enumerate(taus):
        rows.append(["delay", int(t), _fmt(d_pacf[i] + d_side[i]),
                     _fmt(None if sim_d is None else sim_d[i]), _fmt(d_pacf[i]), ""])
    for i, v in enumerate(nus):
        rows.append(["doppler", _fmt(v), _fmt(n_sse[i] + n_side[i]),
                     _fmt(None if sim_n is None else sim_n[i]), "", _fmt(n_sse[i])])
    header = _header(cfg, mode=mode, mu4=kurtosis(wf.constellation), pulse=_pulse_meta(cfg, ps),
                     approximate=not np.allclose(nus, np.rint(nus)))
    cols = ["axis", "coordinate", "theory", "sim", "pacf_sq", "sse_sq"]
    path = write_csv(Path(out_dir) / (output or f"cuts_{cfg.waveform}.csv"), header, cols, rows)
    click.echo(str(path))


@main.command()
@_common
@_trials_opt
@_handled
def scenario(**kw):
    """Weak-target velocity RMSE versus SNR for each configured waveform."""
    _check_trials(kw.get("trials"))
    out_dir, output = _pop_io(kw)
    cfg = _resolve(kw.pop("config_path"), **kw)
    if cfg.scenario is None:
        raise click.UsageError("config has no scenario block")
    sc, wfs = cfg.scenario_objects()
    ps = cfg.pulse_shape()
    spec = cfg.scenario
    table = rmse_experiment(sc, wfs, spec.snr_list, cfg.trials, cfg.seed, ps=ps,
                            window_cells=spec.window_cells, nu_step=spec.nu_step,
                            interpolate=spec.interpolate)
    rows = [[r["waveform"], _fmt(r["snr_db"]), _fmt(r["rmse_mps"]), r["trials"], r["seed"]] for r in table.rows]
    header = _header(cfg, pulse=_pulse_meta(cfg, ps), **{k: v for k, v in table.metadata.items()})
    cols = ["waveform", "snr_db", "rmse_mps", "trials", "seed"]
    path = write_csv(Path(out_dir) / (output or "scenario_rmse.csv"), header, cols, rows)
    click.echo(str(path))


@main.command()
@_common
@click.option("--d-s", type=float, help="Strong target range (m).")
@click.option("--d-w", type=float, help="Weak target range (m).")
@click.option("--v-s", type=float, help="Strong target velocity (m/s).")
@click.option("--v-w", type=float, help="Weak target velocity (m/s).")
@click.option("--sigma-c", type=float, help="Half-width of each forbidden c1 band.")
@click.option("--max-candidate", type=int, help="Check two_n_c1 in 1..this value (default 2N-1).")
@_handled
def design(d_s, d_w, v_s, v_w, sigma_c, max_candidate, **kw):
    """Forbidden chirp rates for a strong/weak target pair and the recommended 2*N*c1."""
    out_dir, output = _pop_io(kw)
    cfg = _resolve(kw.pop("config_path"), **kw)
    targets = cfg.scenario.targets if cfg.scenario else []
    if targets:
        amps = [t["mean_amp"] for t in targets]
        strong, weak = targets[int(np.argmax(amps))], targets[int(np.argmin(amps))]
        d_s = strong["range_m"] if d_s is None else d_s
        d_w = weak["range_m"] if d_w is None else d_w
        v_s = strong["velocity_mps"] if v_s is None else v_s
        v_w = weak["velocity_mps"] if v_w is None else v_w
    if None in (d_s, d_w, v_s, v_w):
        raise click.UsageError("target geometry missing: give --d-s/--d-w/--v-s/--v-w or a scenario block")
    if sigma_c is None:
        sigma_c = cfg.scenario.sigma_c if cfg.scenario else 0.0
    radio = cfg.radio_config()
    inp = GuidelineInput(d_s, d_w, v_s, v_w, radio.f_c, radio.sampling_rate(cfg.N), cfg.N, sigma_c)
    cands = range(1, (max_candidate or 2 * cfg.N - 1) + 1)
    click.echo(design_report(inp, cands))
    verdicts = evaluate_candidates(inp, cands)
    if output:
        rows = [[v.two_n_c1, _fmt(v.c1), int(v.analytic_forbidden), int(v.geometric_collision), int(v.accepted)]
                for v in verdicts]
        write_csv(Path(out_dir) / output, _header(cfg, sigma_c=sigma_c),
                  ["two_n_c1", "c1", "analytic_forbidden", "depression_hit", "accepted"], rows)
    choose_two_n_c1(inp, cands)


if __name__ == "__main__":
    main()
