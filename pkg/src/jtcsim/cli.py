"""Command-line interface: one subcommand per study, CSV on stdout or --out.

Exit codes: 0 success, 1 configuration error, 2 numerical failure.
"""
from __future__ import annotations

import argparse
import csv
import io
import sys

import numpy as np

from . import analysis
from .config import dump_scenario, load_scenario
from .errors import ConfigError, NumericalError, ParameterError
from .jtc import JTCScenario, solve_many
from .nodal import nodal_oracle

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2
ORACLE_SAMPLES = 50
ORACLE_TOL = 1e-4


def fmt(v) -> str:
    return "%.12g" % v


def write_csv(header, columns, out):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in zip(*columns):
        w.writerow([fmt(v) for v in row])
    text = buf.getvalue()
    if out in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def _note(msg):
    print(msg, file=sys.stderr)


def _fit_note(label, fit):
    params = ", ".join(fmt(p) for p in fit.params)
    _note(f"# {label} {fit.kind.value} fit: params=({params}) SSE={fmt(fit.sse)} "
          f"R-square={fmt(fit.r_square)} RMSE={fmt(fit.rmse)}")


def _gaps(series) -> int:
    for x, msg in series.gaps:
        _note(f"error at x_f={x:g} m: {msg}")
    return EXIT_NUMERIC if series.gaps else EXIT_OK


def cmd_profile(s, a):
    p = analysis.impedance_profile(s, a.step)
    write_csv(["x_f_m", "re_zf_ohm", "im_zf_ohm"], [p.values, p.re, p.im], a.out)
    return _gaps(p)


def cmd_tcr(s, a):
    c = analysis.tcr_comparison(s, a.measured, a.step)
    write_csv(["x_f_m", "a_zf_v", "a_rwh_v"], [c.zf.values, c.zf.samples, c.rwh.samples], a.out)
    if c.measured is not None:
        for label, g in (("full train", c.gof_zf), ("first wheel set", c.gof_rwh)):
            _note(f"# {label} vs measured: SSE={fmt(g[0])} R-square={fmt(g[1])} RMSE={fmt(g[2])}")
    return EXIT_OK


def cmd_sweep_wheel(s, a):
    w = analysis.sweep_wheel_resistance(s, (a.r_min, a.r_max), a.r_step, a.step)
    write_csv(["r_ws_ohm", "re_zf_ohm", "im_zf_ohm"], [w.values, w.re, w.im], a.out)
    _fit_note("Re", w.fit_re)
    _fit_note("Im", w.fit_im)
    return EXIT_OK


def cmd_cap_fault(s, a):
    d = analysis.capacitor_fault_delta(s, a.cap_index, a.fault, a.step)
    write_csv(["x_f_m", "d_re_zf_ohm", "d_im_zf_ohm"], [d.values, d.re, d.im], a.out)
    return _gaps(d)


def cmd_sweep_ballast(s, a):
    b = analysis.sweep_ballast(s, (a.rb_min, a.rb_max), a.rb_step, a.step)
    write_csv(["r_b_ohm_km", "re_zf_ohm", "im_zf_ohm"], [b.values, b.re, b.im], a.out)
    return EXIT_OK


def cmd_sweep_rail(s, a):
    r = analysis.sweep_rail_impedance(s, a.span, a.scale_step, a.step)
    write_csv(["z_r_scale", "re_zf_ohm", "im_zf_ohm"], [r.values, r.re, r.im], a.out)
    _fit_note("Re", r.fit_re)
    _fit_note("Im", r.fit_im)
    try:
        x, y = analysis.rail_minimum(r)
        _note(f"# Im minimum at z_r = {fmt(x)} z_r0, Im = {fmt(y)} ohm")
    except ParameterError:
        _note("# Im fit has no minimum")
    return EXIT_OK


def cmd_importance(s, a):
    r = analysis.structural_importance(s, a.abnormal_ohm, a.step)
    idx = np.arange(1, len(r.p_re) + 1)
    write_csv(["wheel_index", "p_re", "p_im"], [idx, r.p_re, r.p_im], a.out)
    return EXIT_OK


def oracle_errors(s: JTCScenario, n: int = ORACLE_SAMPLES):
    """Relative z_f difference between the chain-matrix solver and the nodal
    oracle at ``n`` evenly spaced shunting points."""
    xs = np.linspace(0, s.length, n + 2)[1:-1]
    z = solve_many(s, xs).z_f
    zn = np.array([nodal_oracle(s, x).z_f for x in xs])
    return xs, np.abs(z - zn) / np.abs(zn)


def cmd_validate(s, a):
    xs, err = oracle_errors(s)
    if a.out:
        write_csv(["x_f_m", "rel_err"], [xs, err], a.out)
    worst = float(np.max(err))
    print(f"max relative z_f error vs nodal oracle over {len(xs)} points: {worst:.3e}")
    return EXIT_OK if worst < ORACLE_TOL else EXIT_NUMERIC


def cmd_default_config(s, a):
    text = dump_scenario(JTCScenario.default())
    if a.out:
        with open(a.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="jtcsim", description=__doc__.splitlines()[0])
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="scenario YAML file (default: built-in scenario)")
    common.add_argument("--out", help="output file (default: stdout)")
    common.add_argument("--step", type=float, default=1.0, help="x_f sampling step in m")
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, fn, help_):
        sp = sub.add_parser(name, parents=[common], help=help_)
        sp.set_defaults(func=fn)
        return sp

    add("profile", cmd_profile, "shunting impedance along the section")
    sp = add("tcr", cmd_tcr, "reader-antenna amplitude, full train and first wheel set")
    sp.add_argument("--measured", help="measured trace (position_m, amplitude_V)")
    sp = add("sweep-wheel", cmd_sweep_wheel, "steady z_f against wheel-set resistance")
    sp.add_argument("--r-min", type=float, default=0.01)
    sp.add_argument("--r-max", type=float, default=1.0)
    sp.add_argument("--r-step", type=float, default=0.01)
    sp = add("cap-fault", cmd_cap_fault, "z_f change caused by a capacitor fault")
    sp.add_argument("--cap-index", type=int, required=True, help="1-based from the receiving end")
    sp.add_argument("--fault", choices=["break", "half"], default="break")
    sp = add("sweep-ballast", cmd_sweep_ballast, "steady z_f against ballast resistance")
    sp.add_argument("--rb-min", type=float, default=1.0)
    sp.add_argument("--rb-max", type=float, default=20.0)
    sp.add_argument("--rb-step", type=float, default=1.0)
    sp = add("sweep-rail", cmd_sweep_rail, "steady z_f against rail impedance scale")
    sp.add_argument("--span", type=float, default=0.2)
    sp.add_argument("--scale-step", type=float, default=0.01)
    sp = add("importance", cmd_importance, "structural importance of each wheel set")
    sp.add_argument("--abnormal-ohm", type=float, default=1.0)
    add("validate", cmd_validate, "compare the solver with the nodal oracle")
    add("default-config", cmd_default_config, "print the built-in scenario as YAML")
    return p


def main(argv=None) -> int:
    a = build_parser().parse_args(argv)
    try:
        s = load_scenario(a.config) if a.config else JTCScenario.default()
    except ConfigError as exc:
        _note(f"config error: {exc}")
        return EXIT_CONFIG
    try:
        return a.func(s, a)
    except ConfigError as exc:  # includes malformed measured traces
        _note(f"config error: {exc}")
        return EXIT_CONFIG
    except ParameterError as exc:
        _note(f"parameter error: {exc}")
        return EXIT_CONFIG
    except NumericalError as exc:
        _note(f"numerical failure: {exc}")
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
