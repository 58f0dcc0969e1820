"""
Command-line driver producing figure data as CSV (and a JSON resonance
summary).

    dimerscat spectrum --n-bosons 30,60,100 --u 5
    dimerscat sweep --n-bosons 30 --alpha 1 --gamma 0.1 --out-dir out/

Exit codes: 0 success, 2 invalid configuration, 3 numerical failure.
"""

import argparse
import json
import math
import os
import sys
import warnings

import numpy as np

from . import __version__
from .bhcore import BHParams, LevelTag, diagonalize, q_matrix, separatrix
from .born import born_report
from .config import BORN_FORMS, COMMANDS, build_config, parse_value, read_config_file
from .errors import NumericalError, ValidationError
from .meanfield import (MFParams, fixed_points, integrate_many, random_states,
                        separatrix_crossing_jz, with_tag)
from .scattering import (LeadParams, energy_grid, predicted_resonances, rescale,
                         sweep)

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_NUMERICAL = 3


def _fmt(x):
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (float, np.floating)):
        return f"{float(x):.17g}"
    if isinstance(x, LevelTag):
        return x.value
    return str(x)


def write_csv(path, cfg, columns, rows, extra=()):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"# dimerscat {__version__} {cfg.command}\n")
        for key, val in cfg.items():
            fh.write(f"# {key} = {val}\n")
        for key, val in extra:
            fh.write(f"# {key} = {_fmt(val)}\n")
        fh.write(",".join(columns) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(x) for x in row) + "\n")
    return path


def _target(cfg, n):
    p = BHParams.from_control(n, cfg.u, cfg.hopping_k, cfg.resolved_bias)
    return p, diagonalize(p)


def _separatrix(cfg, p, es):
    if p.u <= 1.0:
        # no separatrix; bhcore would warn on every call
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            return separatrix(p, es, cfg.window)
    return separatrix(p, es, cfg.window)


def _path(cfg, name):
    return os.path.join(cfg.out_dir, name)


def cmd_spectrum(cfg):
    written = []
    for n in cfg.n_bosons:
        p, es = _target(cfg, n)
        sep = _separatrix(cfg, p, es)
        rows = [(i, e, e / n, sep.classification[i].value)
                for i, e in enumerate(es.energies)]
        written.append(write_csv(
            _path(cfg, f"spectrum_N{n}.csv"), cfg,
            ["n", "E_n", "E_n_over_N", "classification"], rows,
            extra=[("N", n), ("U", p.interaction), ("e_sep", sep.e_sep),
                   ("rabi_count", sep.rabi_count)]))
    return written


def cmd_qmatrix(cfg):
    written = []
    for n in cfg.n_bosons:
        p, es = _target(cfg, n)
        sep = _separatrix(cfg, p, es)
        q = q_matrix(es)
        extra = [("N", n), ("U", p.interaction), ("e_sep", sep.e_sep),
                 ("rabi_count", sep.rabi_count)]
        rows = [(i, j, q.q[i, j]) for i in range(es.dim) for j in range(es.dim)]
        written.append(write_csv(_path(cfg, f"qmatrix_N{n}.csv"), cfg,
                                 ["n", "m", "Q_nm"], rows, extra))
        rows = [(i, q.diag_expectation[i], q.std_dev[i], sep.classification[i].value)
                for i in range(es.dim)]
        written.append(write_csv(_path(cfg, f"qdiag_N{n}.csv"), cfg,
                                 ["n", "Q_nn", "sigma_n", "classification"], rows, extra))
    return written


def phasespace_initial_states(cfg):
    """Named initial conditions: fixed points, a meridian ring, separatrix
    crossings (u > 2) and optional seeded random states."""
    p = MFParams(cfg.u, cfg.hopping_k)
    states = [(name, s.as_array()) for name, s in fixed_points(p).items()]
    for i in range(cfg.trajectories):
        th = 2.0 * math.pi * (i + 0.5) / cfg.trajectories
        states.append((f"ring_{i:03d}", np.array([0.5 * math.cos(th), 0.0,
                                                  0.5 * math.sin(th)])))
    if cfg.u > 2.0:
        jz = separatrix_crossing_jz(p)
        jx = math.sqrt(0.25 - jz * jz)
        states.append(("separatrix_up", np.array([jx, 0.0, jz])))
        states.append(("separatrix_down", np.array([jx, 0.0, -jz])))
    if cfg.random_states:
        rng = np.random.default_rng(cfg.seed)
        for i, s in enumerate(random_states(cfg.random_states, rng)):
            states.append((f"random_{i:03d}", s))
    return states


def cmd_phasespace(cfg):
    p = MFParams(cfg.u, cfg.hopping_k)
    named = phasespace_initial_states(cfg)
    trs = integrate_many(np.array([s for _, s in named]), p, cfg.t_final, cfg.dt,
                         record_every=cfg.record_every)
    written = []
    summary = []
    for i, ((name, s0), tr) in enumerate(zip(named, trs)):
        tr = with_tag(tr, p)
        rows = [(t, *x, tr.tag.value) for t, x in zip(tr.times, tr.states)]
        written.append(write_csv(
            _path(cfg, f"phasespace_traj_{i:03d}.csv"), cfg,
            ["time", "jx", "jy", "jz", "tag"], rows,
            extra=[("trajectory", i), ("label", name)]))
        summary.append((i, name, *s0, tr.energies[0], tr.mean_jz(), tr.norm_drift,
                        tr.energy_drift, tr.tag.value))
    written.append(write_csv(
        _path(cfg, "phasespace_summary.csv"), cfg,
        ["trajectory", "label", "jx0", "jy0", "jz0", "energy_per_particle", "mean_jz",
         "norm_drift", "energy_drift", "tag"], summary))
    return written


def _scattering_setup(cfg, n):
    p, es = _target(cfg, n)
    sep = _separatrix(cfg, p, es)
    q = q_matrix(es)
    lead = LeadParams(cfg.lead_hopping, cfg.gamma)
    rt = rescale(es, lead, cfg.band_fraction)
    grid = energy_grid(rt, lead, cfg.grid_points, cfg.margin)
    extra = [("N", n), ("U", p.interaction), ("e_sep", sep.e_sep),
             ("rabi_count", sep.rabi_count), ("scale", rt.scale), ("center", rt.center),
             ("scaled_alpha", rt.scale * cfg.alpha), ("grid_min", grid[0]),
             ("grid_max", grid[-1])]
    return p, es, sep, q, lead, rt, grid, extra


def cmd_sweep(cfg):
    written = []
    for n in cfg.n_bosons:
        p, es, sep, q, lead, rt, grid, extra = _scattering_setup(cfg, n)
        res = sweep(rt, q, lead, cfg.alpha, grid)
        rows = []
        for g, e in enumerate(res.energies):
            for m in range(rt.dim):
                pn = res.pn[g, m] if res.pn is not None else float("nan")
                rows.append((e, m, res.rho_in[g, m], pn))
        written.append(write_csv(_path(cfg, f"sweep_N{n}.csv"), cfg,
                                 ["E", "m", "rho_in", "PN"], rows, extra))
        pred = (predicted_resonances(rt, q, lead, cfg.alpha) if lead.gamma < 1.0
                else np.full(rt.dim, np.nan))
        summary = {
            "config": dict(cfg.items()),
            "derived": {k: _fmt(v) for k, v in extra},
            "channels": [
                {"m": m, "m_over_N": m / n, "E_scaled": float(rt.energies[m]),
                 "classification": sep.classification[m].value,
                 "resonance": float(res.resonance_position[m]),
                 "peak_height": float(res.peak_height[m]),
                 "predicted": None if math.isnan(pred[m]) else float(pred[m]),
                 "half_linewidth": float(res.half_linewidth[m])}
                for m in range(rt.dim)],
        }
        path = _path(cfg, f"resonances_N{n}.json")
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            json.dump(summary, fh, indent=2, sort_keys=True)
            fh.write("\n")
        written.append(path)
    return written


def cmd_pn(cfg):
    if not cfg.alpha > 0:
        raise ValidationError(
            "participation number is undefined for alpha = 0 (no inelastic signal)")
    written = []
    for n in cfg.n_bosons:
        p, es, sep, q, lead, rt, grid, extra = _scattering_setup(cfg, n)
        res = sweep(rt, q, lead, cfg.alpha, grid)
        avg = res.pn_average
        rows = [(m, m / n, avg[m], sep.classification[m].value) for m in range(rt.dim)]
        written.append(write_csv(_path(cfg, f"pn_N{n}.csv"), cfg,
                                 ["m", "m_over_N", "PN_avg", "classification"], rows,
                                 extra + [("grid_points_used", grid.size)]))
    return written


def cmd_born(cfg):
    written = []
    for n in cfg.n_bosons:
        p, es, sep, q, lead, rt, grid, extra = _scattering_setup(cfg, n)
        alphas = [a / rt.scale for a in cfg.alphas] if cfg.alphas_scaled else list(cfg.alphas)
        rows_in = born_report(rt, q, lead, alphas, grid)
        cols = ["alpha", "scaled_alpha", "m", "resonance", "rho_exact"]
        if cfg.born_form in ("full", "both"):
            cols += ["rho_full", "rel_err_full"]
        if cfg.born_form in ("simplified", "both"):
            cols += ["rho_simplified", "rel_err_simplified"]
        cols += ["a_max", "bound_holds"]
        rows = []
        for r in rows_in:
            row = [r.alpha, r.scaled_alpha, r.m, r.resonance, r.rho_exact]
            if cfg.born_form in ("full", "both"):
                row += [r.rho_full, r.err_full]
            if cfg.born_form in ("simplified", "both"):
                row += [r.rho_simplified, r.err_simplified]
            row += [r.a_max, r.bound_holds]
            rows.append(row)
        written.append(write_csv(_path(cfg, f"born_N{n}.csv"), cfg, cols, rows, extra))
    return written


HANDLERS = {
    "spectrum": cmd_spectrum, "qmatrix": cmd_qmatrix, "phasespace": cmd_phasespace,
    "sweep": cmd_sweep, "pn": cmd_pn, "born": cmd_born,
}


SUMMARIES = {
    "spectrum": "exact eigenvalues with level classification",
    "qmatrix": "matrix of n1 in the energy eigenbasis, plus diagonal and spread",
    "phasespace": "mean-field trajectories on the Bloch sphere",
    "sweep": "inelastic cross sections over the open-channel energy window",
    "pn": "energy-averaged participation number per channel",
    "born": "Born approximations against the exact cross section",
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_VALIDATION, f"{self.prog}: error: {message}\n")


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    add = common.add_argument
    add("--config", help="flat key = value file; flags override it")
    add("--n-bosons", dest="n_bosons", help="particle number(s), comma separated")
    add("--u", type=float, help="control parameter U N / (2 k)")
    add("--hopping-k", dest="hopping_k", type=float, help="double-well tunnelling k")
    add("--gamma", type=float, help="lead coupling ratio (J0/J)^2 in (0, 1]")
    add("--alpha", type=float, help="probe-target interaction strength")
    add("--bias", type=float, help="on-site bias on n1 (default 0.01 k)")
    add("--band-fraction", dest="band_fraction", type=float,
        help="fraction of the lead band covered by the rescaled spectrum")
    add("--grid-points", dest="grid_points", type=int, help="total-energy grid size")
    add("--margin", type=float, help="distance of the grid from channel closing")
    add("--lead-hopping", dest="lead_hopping", type=float, help="lead hopping J")
    add("--window", type=int, help="separatrix-adjacent levels on each side")
    add("--t-final", dest="t_final", type=float, help="mean-field integration time")
    add("--dt", type=float, help="RK4 step")
    add("--record-every", dest="record_every", type=int, help="steps between samples")
    add("--trajectories", type=int, help="initial conditions on the jy = 0 ring")
    add("--random-states", dest="random_states", type=int,
        help="additional uniformly random initial states")
    add("--seed", type=int, help="RNG seed for random initial states")
    add("--alphas", help="born: comma separated alpha values")
    add("--alphas-scaled", dest="alphas_scaled", action="store_const", const=True,
        help="born: interpret --alphas as rescaled strengths s*alpha")
    add("--born-form", dest="born_form", choices=BORN_FORMS)
    add("--out-dir", dest="out_dir", help="output directory (created if missing)")

    parser = _Parser(prog="dimerscat", description=__doc__.strip().splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in COMMANDS:
        sub.add_parser(name, parents=[common], help=SUMMARIES[name])
    return parser


def config_from_args(args):
    file_values = read_config_file(args.config) if args.config else {}
    overrides = {k: v for k, v in vars(args).items() if k != "config"}
    for key in ("n_bosons", "alphas"):
        if overrides.get(key) is not None:
            overrides[key] = parse_value(key, overrides[key])
    return build_config(file_values, overrides)


def run(argv=None):
    args = build_parser().parse_args(argv)
    cfg = config_from_args(args)
    os.makedirs(cfg.out_dir, exist_ok=True)
    return HANDLERS[cfg.command](cfg)


def main(argv=None):
    try:
        for path in run(argv):
            print(path)
    except ValidationError as exc:
        print(f"dimerscat: invalid configuration: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except NumericalError as exc:
        print(f"dimerscat: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as exc:
        print(f"dimerscat: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
