"""Command-line driver: scans, quenches, maps, and fits with file artifacts.

Every command writes its tables/summaries into --out-dir together with the
fully resolved configuration (config_used.ini) and, where a figure recipe
exists, a standalone plot script.  Parameters resolve in the order command
line > config file ([model] plus a per-command section) > built-in default.
"""

from __future__ import annotations

import argparse
import multiprocessing
import sys
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import io, scans
from .errors import ConfigError, NoKink, SpinQuenchError, UndefinedTimescale
from .eigensolver import decompose
from .model import SpinorModel, build_hamiltonian, build_observable_n0, lattice_parameters
from .quench import QuenchSpec, evolve_n0, run_quench
from .scaling import fit_power_law_with_offset, fit_pure_power_law
from .thermalization import classify_region, detect_kink, participation_ratios
from .timescales import predict_timescales, scaling_of_timescales, to_physical_seconds

warnings.filterwarnings("ignore", message=".*TBB.*")


def _c1_from_sign(text: str) -> float:
    key = str(text).strip().lower()
    if key in ("fm", "-1", "-1.0", "ferromagnetic"):
        return -1.0
    if key in ("afm", "1", "+1", "1.0", "antiferromagnetic", "anti-ferromagnetic"):
        return 1.0
    raise SpinQuenchError(f"cannot parse c1 sign {text!r} (use 'fm' or 'afm')")


class Settings:
    """Layered parameter lookup: CLI flag, then config section, then default."""

    def __init__(self, args):
        self.args = args
        self.config = io.load_config(args.config) if args.config else {}
        self.resolved = {}

    def get(self, section, key, default, cast=str):
        arg_name = key.replace("-", "_")
        value = getattr(self.args, arg_name, None)
        if value is None:
            raw = self.config.get(section, {}).get(key)
            if raw is None:
                value = default
            else:
                value = cast(raw) if not isinstance(default, bool) else raw.lower() in ("1", "true", "yes")
        elif not isinstance(value, bool) and cast is not str:
            value = cast(value)
        self.resolved.setdefault(section, {})[key] = value
        return value

    def sizes(self, section, default):
        text = self.get(section, "sizes", ",".join(str(n) for n in default))
        if isinstance(text, (list, tuple)):
            return [int(n) for n in text]
        return [int(tok) for tok in str(text).replace(" ", "").split(",") if tok]


def _out_dir(settings) -> Path:
    out = Path(settings.get("output", "out-dir", "spinquench_out"))
    out.mkdir(parents=True, exist_ok=True)
    return out


def _finish(settings, out: Path) -> int:
    io.write_config(out / "config_used.ini", settings.resolved)
    return 0


def _model_params(settings):
    n_atoms = settings.get("model", "n-atoms", 10000, int)
    c1 = _c1_from_sign(settings.get("model", "c1-sign", "fm"))
    return n_atoms, c1


def _quench_spec(settings, n_default=2000):
    n_atoms = settings.get("model", "n-atoms", n_default, int)
    c1 = _c1_from_sign(settings.get("model", "c1-sign", "fm"))
    qi = settings.get("quench", "qi", None, float)
    qf = settings.get("quench", "qf", None, float)
    if qi is None or qf is None:
        raise SpinQuenchError("this command needs --qi and --qf")
    kind = settings.get("quench", "initial-state", "ground")
    return QuenchSpec(n_atoms, c1, qi, qf, kind)


def cmd_ground_scan(settings) -> int:
    out = _out_dir(settings)
    n_atoms, c1 = _model_params(settings)
    q_min = settings.get("scan", "q-min", -6.0, float)
    q_max = settings.get("scan", "q-max", 6.0, float)
    q_step = settings.get("scan", "q-step", 0.1, float)
    qs = np.arange(q_min, q_max + 0.5 * q_step, q_step)
    curve = scans.ground_state_curve(c1, n_atoms, qs)
    io.write_csv(out / "ground_scan.csv", ["q", "n0_over_n"], zip(qs, curve))
    io.write_plot_script(out / "plot_ground_scan.py", "ground_scan.csv",
                         "q", "n0_over_n", "ground-state <N0>/N vs q")
    print(f"ground-scan: {qs.size} points -> {out / 'ground_scan.csv'}")
    return _finish(settings, out)


def cmd_quench(settings) -> int:
    out = _out_dir(settings)
    spec = _quench_spec(settings)
    band = settings.get("quench", "band-width", 5, int)
    retain = settings.get("quench", "retain-weight", 1.0 - 1e-8, float)
    result = run_quench(spec, band_width=band, retain_weight=retain)
    io.write_csv(out / "quench_spectrum.csv", ["alpha", "energy", "eon", "eev"],
                 ((a + 1, result.energies[a], result.eon[a], result.eev[a])
                  for a in range(result.dim)))
    io.write_json(out / "quench_summary.json", {
        "n_atoms": spec.n_atoms, "c1": spec.c1,
        "q_initial": spec.q_initial, "q_final": spec.q_final,
        "initial_state_kind": spec.initial_state_kind,
        "pde": result.pde, "mean_energy": result.mean_energy,
        "effective_dimension": result.effective_dimension,
        "retained_count": int(result.retained.size),
        "retained_weight": result.retained_weight,
        "n0_t0": result.n0_t0,
    })
    io.write_plot_script(out / "plot_quench.py", "quench_spectrum.csv",
                         "energy", ["eon", "eev"], "occupation and EEV spectra")
    print(f"quench: pde={result.pde:.6g} d_e={result.effective_dimension:.6g} "
          f"-> {out / 'quench_summary.json'}")
    return _finish(settings, out)


def cmd_evolve(settings) -> int:
    out = _out_dir(settings)
    spec = _quench_spec(settings)
    band = settings.get("quench", "band-width", 5, int)
    n_times = settings.get("evolve", "n-times", 2000, int)
    t_max = settings.get("evolve", "t-max", None, float)
    grid_kind = settings.get("evolve", "grid", "linear")
    result = run_quench(spec, band_width=band)
    if t_max is None:
        try:
            t_max = 1.3 * predict_timescales(result).t_revival
        except UndefinedTimescale:
            t_max = float(scans.DEFAULT_LADDER[0])
    times = (np.geomspace(max(t_max * 1e-5, 1e-9), t_max, n_times)
             if grid_kind == "log" else np.linspace(0.0, t_max, n_times))
    signal = evolve_n0(result, times)
    io.write_csv(out / "evolution.csv", ["t", "n0"], zip(times, signal))
    io.write_plot_script(out / "plot_evolution.py", "evolution.csv",
                         "t", "n0", "<N0(t)> after the quench")
    print(f"evolve: {n_times} points to t={t_max:.6g} -> {out / 'evolution.csv'}")
    return _finish(settings, out)


@dataclass(frozen=True)
class QuenchMap:
    """Sudden-quench map: PDE value and region label per (q_i, q_f) cell.

    ``pde[i, j]`` and ``region[i, j]`` belong to q_initial[i], q_final[j];
    failed cells carry NaN / "error" and an entry in ``errors``.
    """

    n_atoms: int
    c1: float
    initial_state_kind: str
    q_initial: np.ndarray
    q_final: np.ndarray
    pde: np.ndarray
    region: list
    errors: list = field(default_factory=list)

    def __post_init__(self):
        shape = (self.q_initial.size, self.q_final.size)
        if self.pde.shape != shape or (len(self.region), len(self.region[0])) != shape:
            raise ConfigError(f"map grids {shape} do not match cell tables")
        finite = self.pde[np.isfinite(self.pde)]
        if finite.size and (finite.min() < -1e-9 or finite.max() > self.n_atoms + 1e-9):
            raise ConfigError("map PDE values leave [0, N]")


def _map_column(task):
    """One q_f column of the quench map (runs in a worker process)."""
    (n_atoms, c1, q_f, qi_values, kind, band) = task
    model_f = SpinorModel(n_atoms, c1, q_f)
    eigensystem = decompose(build_hamiltonian(model_f))
    n0 = build_observable_n0(model_f)
    eev = (eigensystem.vectors * eigensystem.vectors).T @ n0
    canonical_kind = kind if c1 < 0 else ("most_excited" if kind == "ground" else "ground")
    kink_index = None
    if canonical_kind == "ground" and abs(q_f if c1 < 0 else -q_f) < 4.0:
        try:
            kink_index = detect_kink(eigensystem, eev).index
        except NoKink:
            kink_index = None
    cells = []
    for q_i in qi_values:
        try:
            spec = QuenchSpec(n_atoms, c1, float(q_i), float(q_f), kind)
            result = run_quench(spec, band_width=band, eigensystem=eigensystem)
            region = classify_region(spec, result, kink_index=kink_index,
                                     eigensystem=eigensystem)
            cells.append((result.pde, str(region), ""))
        except Exception as exc:  # record and continue; the map must complete
            cells.append((float("nan"), "error", f"{type(exc).__name__}: {exc}"))
    return cells


def compute_quench_map(n_atoms: int, c1: float, qi_values, qf_values,
                       initial_state_kind: str = "ground",
                       threads: int = 1) -> QuenchMap:
    """Run every (q_i, q_f) cell; cells in one q_f column share the
    decomposition.  Output is independent of the execution order."""
    qi_values = np.asarray(qi_values, dtype=np.float64)
    qf_values = np.asarray(qf_values, dtype=np.float64)
    tasks = [(n_atoms, c1, float(q_f), qi_values, initial_state_kind, 0)
             for q_f in qf_values]
    if threads > 1:
        # spawn: forking after numba's OpenMP layer has started is unsafe
        ctx = multiprocessing.get_context("spawn")
        with ProcessPoolExecutor(max_workers=threads, mp_context=ctx) as pool:
            columns = list(pool.map(_map_column, tasks))
    else:
        columns = [_map_column(t) for t in tasks]
    pde = np.empty((qi_values.size, qf_values.size))
    region = [[None] * qf_values.size for _ in range(qi_values.size)]
    errors = []
    for j, q_f in enumerate(qf_values):
        for i, q_i in enumerate(qi_values):
            value, label, err = columns[j][i]
            pde[i, j] = value
            region[i][j] = label
            if err:
                errors.append({"qi": float(q_i), "qf": float(q_f), "error": err})
    return QuenchMap(n_atoms=n_atoms, c1=c1,
                     initial_state_kind=initial_state_kind,
                     q_initial=qi_values, q_final=qf_values,
                     pde=pde, region=region, errors=errors)


def cmd_quench_map(settings) -> int:
    out = _out_dir(settings)
    n_atoms = settings.get("model", "n-atoms", 5000, int)
    c1 = _c1_from_sign(settings.get("model", "c1-sign", "fm"))
    kind = settings.get("quench", "initial-state", "ground")
    qi_min = settings.get("map", "qi-min", -6.0, float)
    qi_max = settings.get("map", "qi-max", 6.0, float)
    qi_step = settings.get("map", "qi-step", 0.1, float)
    qf_min = settings.get("map", "qf-min", -6.0, float)
    qf_max = settings.get("map", "qf-max", 6.0, float)
    qf_step = settings.get("map", "qf-step", 0.1, float)
    threads = settings.get("output", "threads", 1, int)
    for name, lo, hi, step in (("qi", qi_min, qi_max, qi_step),
                               ("qf", qf_min, qf_max, qf_step)):
        if not (np.isfinite([lo, hi, step]).all() and step > 0.0 and lo <= hi):
            raise ConfigError(f"invalid {name} grid: [{lo}, {hi}] step {step}")
    qi_values = np.arange(qi_min, qi_max + 0.5 * qi_step, qi_step)
    qf_values = np.arange(qf_min, qf_max + 0.5 * qf_step, qf_step)

    qmap = compute_quench_map(n_atoms, c1, qi_values, qf_values, kind, threads)

    rows = []
    counts = {}
    for i, q_i in enumerate(qi_values):
        for j, q_f in enumerate(qf_values):
            label = qmap.region[i][j]
            rows.append((q_i, q_f, qmap.pde[i, j], label))
            counts[label] = counts.get(label, 0) + 1
    io.write_csv(out / "quench_map.csv", ["qi", "qf", "pde", "region"], rows)
    io.write_json(out / "map_summary.json", {
        "n_atoms": n_atoms, "c1": c1, "initial_state_kind": kind,
        "qi_grid": [qi_min, qi_max, qi_step], "qf_grid": [qf_min, qf_max, qf_step],
        "region_counts": counts, "errors": qmap.errors,
    })
    io.write_plot_script(out / "plot_quench_map.py", "quench_map.csv",
                         "qi", ["qf", "pde"], "sudden-quench map (PDE)", kind="map")
    print(f"quench-map: {len(rows)} cells, regions {counts} -> {out / 'quench_map.csv'}")
    return _finish(settings, out)


def cmd_eth_scan(settings) -> int:
    out = _out_dir(settings)
    c1 = _c1_from_sign(settings.get("model", "c1-sign", "fm"))
    q_f = settings.get("eth", "qf", None, float)
    if q_f is None:
        raise SpinQuenchError("eth-scan needs --qf")
    width = settings.get("eth", "width", scans.ETH_WINDOW_WIDTH, float)
    center = settings.get("eth", "center", "median")
    sizes = settings.sizes("eth", scans.DEFAULT_LADDER)
    sizes, table, reports = scans.eth_indicator_scan(c1, q_f, sizes, width, center)
    io.write_csv(out / "eth_scan.csv",
                 ["n_atoms", "noise", "support", "max_divergence", "mean_eev_difference"],
                 ((n,) + tuple(table[k][i] for k in scans.INDICATOR_NAMES)
                  for i, n in enumerate(sizes)))
    fits = {}
    for name in scans.INDICATOR_NAMES:
        fits[name] = {
            "pure": fit_pure_power_law(sizes, table[name]),
            "offset": fit_power_law_with_offset(sizes, table[name]),
        }
    io.write_json(out / "eth_fits.json", {"q_final": q_f, "width": width,
                                          "center": center, "fits": fits})
    io.write_json(out / "eth_reports.json",
                  {"q_final": q_f, "sizes": sizes,
                   "reports": {str(n): r for n, r in zip(sizes, reports)}})
    io.write_plot_script(out / "plot_eth_scan.py", "eth_scan.csv", "n_atoms",
                         list(scans.INDICATOR_NAMES), "ETH indicators vs N",
                         logx=True, logy=True)
    print(f"eth-scan: q_f={q_f} sizes={sizes} -> {out / 'eth_scan.csv'}")
    return _finish(settings, out)


def cmd_pr_scan(settings) -> int:
    out = _out_dir(settings)
    c1 = _c1_from_sign(settings.get("model", "c1-sign", "fm"))
    q = settings.get("pr", "q", None, float)
    if q is None:
        raise SpinQuenchError("pr-scan needs --q")
    profile_n = settings.get("pr", "profile", None, int)
    if profile_n is not None:
        model = SpinorModel(profile_n, c1, q)
        eigensystem = decompose(build_hamiltonian(model))
        pr = participation_ratios(eigensystem.vectors)
        eev = (eigensystem.vectors * eigensystem.vectors).T @ build_observable_n0(model)
        gaps = np.diff(eigensystem.values)
        io.write_csv(out / "pr_profile.csv",
                     ["alpha", "energy", "eev", "pr", "level_spacing"],
                     ((a + 1, eigensystem.values[a], eev[a], pr[a],
                       gaps[a] if a < gaps.size else None)
                      for a in range(eigensystem.dim)))
        io.write_plot_script(out / "plot_pr_profile.py", "pr_profile.csv",
                             "alpha", "pr", f"participation ratio, q={q}")
        print(f"pr-scan profile: N={profile_n} -> {out / 'pr_profile.csv'}")
        return _finish(settings, out)

    state = settings.get("pr", "state", "ground")
    sizes = settings.sizes("pr", scans.DEFAULT_LADDER)
    if state == "window":
        width = settings.get("pr", "width", scans.ETH_WINDOW_WIDTH, float)
        center = settings.get("pr", "center", "median")
        values = scans.pr_window_scan(c1, q, sizes, width, center)
    else:
        values = scans.pr_extremal_scan(c1, q, sizes, state.replace("-", "_"))
    io.write_csv(out / "pr_scan.csv", ["n_atoms", "pr"], zip(sizes, values))
    io.write_json(out / "pr_fit.json", {"q": q, "state": state,
                                        "fit": fit_pure_power_law(sizes, values)})
    io.write_plot_script(out / "plot_pr_scan.py", "pr_scan.csv", "n_atoms", "pr",
                         f"participation ratio vs N, q={q}", logx=True, logy=True)
    print(f"pr-scan: q={q} state={state} -> {out / 'pr_scan.csv'}")
    return _finish(settings, out)


def cmd_timescales(settings) -> int:
    out = _out_dir(settings)
    spec = _quench_spec(settings)
    sigma_mult = settings.get("timescales", "sigma-multiplier", 1.0, float)
    c1_hz = settings.get("timescales", "c1-hz", None, float)
    sizes_text = settings.get("timescales", "scan-sizes", None)
    result = run_quench(spec, band_width=max(1, settings.get("quench", "band-width", 5, int)))
    report = predict_timescales(result, sigma_multiplier=sigma_mult)
    payload = {
        "n_atoms": spec.n_atoms, "c1": spec.c1,
        "q_initial": spec.q_initial, "q_final": spec.q_final,
        "report": report,
        "per_atom": {"t_collapse": report.t_collapse / spec.n_atoms,
                     "t_revival": report.t_revival / spec.n_atoms},
    }
    if c1_hz is not None:
        payload["physical_seconds"] = to_physical_seconds(report, c1_hz)
    if sizes_text:
        sizes = [int(tok) for tok in str(sizes_text).replace(" ", "").split(",") if tok]
        sizes, _, fit_c, fit_r = scaling_of_timescales(
            spec.c1, spec.q_initial, spec.q_final, sizes,
            spec.initial_state_kind, sigma_mult)
        payload["scaling"] = {"sizes": sizes, "collapse_fit": fit_c, "revival_fit": fit_r}
    io.write_json(out / "timescales.json", payload)
    print(f"timescales: t_c={report.t_collapse:.6g} t_r={report.t_revival:.6g} "
          f"-> {out / 'timescales.json'}")
    return _finish(settings, out)


def cmd_fit(settings) -> int:
    out = _out_dir(settings)
    source = settings.get("fit", "input", None)
    if source is None:
        raise SpinQuenchError("fit needs --input CSV with (N, chi) columns")
    form = settings.get("fit", "form", "offset")
    x_col = settings.get("fit", "x-column", None)
    y_col = settings.get("fit", "y-column", None)
    header, cols = io.read_csv_columns(source)
    x = cols[header.index(x_col)] if x_col else cols[0]
    y = cols[header.index(y_col)] if y_col else cols[1]
    keep = ~(np.isnan(x) | np.isnan(y))
    fit = (fit_power_law_with_offset(x[keep], y[keep]) if form == "offset"
           else fit_pure_power_law(x[keep], y[keep]))
    io.write_json(out / "fit.json", {"input": str(source), "form": form, "fit": fit})
    print(f"fit: gamma={fit.exponent_gamma:.6g} R2={fit.r_squared:.6g} "
          f"-> {out / 'fit.json'}")
    return _finish(settings, out)


def cmd_lattice_params(settings) -> int:
    out = _out_dir(settings)
    n_atoms, c1 = _model_params(settings)
    q = settings.get("model", "q", 0.0, float)
    model = SpinorModel(n_atoms, c1, q)
    hop, onsite = lattice_parameters(model)
    io.write_csv(out / "lattice_params.csv", ["site", "hopping", "onsite"],
                 ((i + 1, hop[i] if i < hop.size else None, onsite[i])
                  for i in range(onsite.size)))
    io.write_operator_csv(out / "operator.csv", build_hamiltonian(model))
    io.write_plot_script(out / "plot_lattice_params.py", "lattice_params.csv",
                         "site", ["hopping", "onsite"], "chain parameters J, eta")
    print(f"lattice-params: D={onsite.size} -> {out / 'lattice_params.csv'}")
    return _finish(settings, out)


_COMMANDS = {
    "ground-scan": cmd_ground_scan,
    "quench": cmd_quench,
    "evolve": cmd_evolve,
    "quench-map": cmd_quench_map,
    "eth-scan": cmd_eth_scan,
    "pr-scan": cmd_pr_scan,
    "timescales": cmd_timescales,
    "fit": cmd_fit,
    "lattice-params": cmd_lattice_params,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="INI config file")
    common.add_argument("--out-dir", help="output directory")
    common.add_argument("--threads", type=int, help="parallel workers (maps)")
    common.add_argument("--n-atoms", type=int, help="condensate size N (even)")
    common.add_argument("--c1-sign", help="fm (c1 = -1) or afm (c1 = +1)")
    common.add_argument("--qi", type=float, help="initial Zeeman strength")
    common.add_argument("--qf", type=float, help="final Zeeman strength")
    common.add_argument("--initial-state", choices=["ground", "most_excited"])

    parser = argparse.ArgumentParser(
        prog="spinquench",
        description="spin-1 condensate quench dynamics and thermalization analysis")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ground-scan", parents=[common],
                       help="ground-state <N0>/N over a q grid")
    p.add_argument("--q-min", type=float)
    p.add_argument("--q-max", type=float)
    p.add_argument("--q-step", type=float)

    p = sub.add_parser("quench", parents=[common],
                       help="single quench: spectra and summary")
    p.add_argument("--band-width", type=int)
    p.add_argument("--retain-weight", type=float)

    p = sub.add_parser("evolve", parents=[common], help="time trace <N0(t)>")
    p.add_argument("--band-width", type=int)
    p.add_argument("--t-max", type=float)
    p.add_argument("--n-times", type=int)
    p.add_argument("--grid", choices=["linear", "log"])

    p = sub.add_parser("quench-map", parents=[common],
                       help="PDE and region label over a (qi, qf) grid")
    for axis in ("qi", "qf"):
        p.add_argument(f"--{axis}-min", type=float)
        p.add_argument(f"--{axis}-max", type=float)
        p.add_argument(f"--{axis}-step", type=float)

    p = sub.add_parser("eth-scan", parents=[common],
                       help="window indicators across system sizes")
    p.add_argument("--sizes", help="comma-separated N ladder")
    p.add_argument("--width", type=float, help="window width in |c1| units")
    p.add_argument("--center", choices=["median", "kink"])

    p = sub.add_parser("pr-scan", parents=[common],
                       help="participation-ratio scans and profiles")
    p.add_argument("--q", type=float)
    p.add_argument("--state", choices=["ground", "most_excited", "window"])
    p.add_argument("--sizes")
    p.add_argument("--width", type=float)
    p.add_argument("--center", choices=["median", "kink"])
    p.add_argument("--profile", type=int, metavar="N",
                   help="emit a full spectrum profile at one size instead")

    p = sub.add_parser("timescales", parents=[common],
                       help="collapse/revival/oscillation/randomizing times")
    p.add_argument("--sigma-multiplier", type=float)
    p.add_argument("--c1-hz", type=float,
                   help="physical c1 as angular Hz for conversion to seconds")
    p.add_argument("--scan-sizes", help="comma-separated ladder for scaling fits")

    p = sub.add_parser("fit", parents=[common], help="scaling fit of a CSV table")
    p.add_argument("--input")
    p.add_argument("--form", choices=["offset", "pure"])
    p.add_argument("--x-column")
    p.add_argument("--y-column")

    p = sub.add_parser("lattice-params", parents=[common],
                       help="equivalent-chain hopping and onsite potential")
    p.add_argument("--q", type=float)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        settings = Settings(args)
        return _COMMANDS[args.command](settings)
    except (SpinQuenchError, ValueError, OSError) as exc:
        print(io.error_json(exc), file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
