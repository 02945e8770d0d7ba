"""Scenario files (YAML).

Keys carry their units; complex values are ``[re, im]`` pairs and plain
numbers are read as real. Unknown keys are rejected; missing keys fall back to
the built-in default with a notice on stderr. Example::

    length_m: 789.0
    carrier_hz: 2300.0
    ballast_ohm_km: 6.0
    capacitor_uf: 46.0
    z_rm_ohm: [0.6, 1.2]
"""
from __future__ import annotations

import sys

import numpy as np
import yaml

from .elements import OPEN_CIRCUIT_OHM, ShuntElement, ShuntKind, capacitor_impedance
from .errors import ConfigError, JTCError
from .jtc import JTCScenario, uniform_positions
from .railline import RailUnitParams
from .train import TrainFormation

# key -> value kind accepted by _coerce
SCHEMA = {
    "length_m": "real",
    "carrier_hz": "real",
    "ballast_ohm_km": "real_or_null",
    "ground_leak_fraction": "real",
    "z11_ohm_km": "complex",
    "z22_ohm_km": "complex",
    "z12_ohm_km": "complex",
    "g11_s_km": "real",
    "g22_s_km": "real",
    "g12_s_km": "real",
    "capacitor_uf": "real_or_list",
    "capacitor_positions_m": "real_list",
    "tuning_len_m": "real",
    "z_sva_ohm": "complex",
    "z_rz_ohm": "complex",
    "z_rm_ohm": "complex",
    "z_rs_ohm": "complex",
    "z_es_ohm": "complex",
    "u_es_v": "complex",
    "axle_offsets_m": "real_list",
    "wheel_resistance_ohm": "real_or_list",
    "tcr_a1": "real",
    "tcr_a2": "real",
}

# keys that only matter when ballast_ohm_km is null
_LEAK_KEYS = ("g11_s_km", "g22_s_km", "g12_s_km")


def _cplx(z) -> list:
    z = complex(z)
    return [z.real, z.imag]


def _capacitance_uf(z: complex, f: float) -> float:
    return float(-1.0 / (2 * np.pi * f * complex(z).imag) * 1e6)


def scenario_to_dict(s: JTCScenario) -> dict:
    """Plain-data form of a scenario, the inverse of :func:`scenario_from_dict`."""
    r = s.rail
    d = {
        "length_m": s.length,
        "carrier_hz": s.carrier,
        "ballast_ohm_km": s.ballast,
        "ground_leak_fraction": s.ground_fraction,
        "z11_ohm_km": _cplx(r.z11),
        "z22_ohm_km": _cplx(r.z22),
        "z12_ohm_km": _cplx(r.z12),
    }
    if s.ballast is None:
        d.update(g11_s_km=float(r.g11), g22_s_km=float(r.g22), g12_s_km=float(r.g12))
    caps = [_capacitance_uf(c.z, s.carrier) for c in s.capacitors]
    d["capacitor_uf"] = caps[0] if len(set(caps)) == 1 else caps
    d["capacitor_positions_m"] = [float(c.position) for c in s.capacitors]
    d.update(
        tuning_len_m=s.tuning_len,
        z_sva_ohm=_cplx(s.z_sva),
        z_rz_ohm=_cplx(s.z_rz),
        z_rm_ohm=_cplx(s.z_rm),
        z_rs_ohm=_cplx(s.z_rs),
        z_es_ohm=_cplx(s.z_es),
        u_es_v=_cplx(s.u_es),
        axle_offsets_m=list(s.train.axle_offsets),
    )
    res = [complex(x).real for x in s.train.wheel_resistance]
    d["wheel_resistance_ohm"] = res[0] if len(set(res)) == 1 else res
    d["tcr_a1"], d["tcr_a2"] = s.tcr_gains
    return {k: (float(v) if isinstance(v, (int, float, np.floating)) else v) for k, v in d.items()}


def default_dict() -> dict:
    return scenario_to_dict(JTCScenario.default())


def _coerce(key, kind, v, line):
    def bad(what):
        return ConfigError(f"expected {what}, got {v!r}", key=key, line=line)

    def real(x):
        if isinstance(x, bool) or not isinstance(x, (int, float)):
            raise bad("a number")
        return float(x)

    if kind == "real":
        return real(v)
    if kind == "real_or_null":
        return None if v is None else real(v)
    if kind == "complex":
        if isinstance(v, (list, tuple)):
            if len(v) != 2:
                raise bad("a [re, im] pair")
            return complex(real(v[0]), real(v[1]))
        return complex(real(v))
    if kind == "real_list":
        if not isinstance(v, (list, tuple)):
            raise bad("a list of numbers")
        return [real(x) for x in v]
    if kind == "real_or_list":
        if isinstance(v, (list, tuple)):
            return [real(x) for x in v]
        return real(v)
    raise AssertionError(kind)


def scenario_from_dict(d: dict, lines: dict = None, notify=True) -> JTCScenario:
    """Build a scenario; ``lines`` maps keys to source line numbers."""
    lines = lines or {}
    for k in d:
        if k not in SCHEMA:
            raise ConfigError("unknown key", key=k, line=lines.get(k))
    vals = {k: _coerce(k, SCHEMA[k], v, lines.get(k)) for k, v in d.items()}
    defaults = default_dict()
    defaults.update({k: None for k in _LEAK_KEYS if k not in defaults})
    missing = [k for k in SCHEMA if k not in vals]
    ballast = vals.get("ballast_ohm_km", defaults["ballast_ohm_km"])
    for k in missing:
        if k in _LEAK_KEYS:
            if ballast is None:
                raise ConfigError("required when ballast_ohm_km is null", key=k)
            continue
        if k == "capacitor_positions_m" and "length_m" in vals:
            n = len(vals["capacitor_uf"]) if isinstance(vals.get("capacitor_uf"), list) else None
            n = n or len(defaults["capacitor_positions_m"])
            vals[k] = list(uniform_positions(vals["length_m"], n))
            shown = f"{n} evenly spaced positions"
        else:
            vals[k] = _coerce(k, SCHEMA[k], defaults[k], None)
            shown = repr(defaults[k])
        if notify:
            print(f"notice: '{k}' not set, using default {shown}", file=sys.stderr)
    try:
        return _build(vals)
    except ConfigError:
        raise
    except (JTCError, ValueError, TypeError) as exc:
        raise ConfigError(str(exc)) from exc


def _build(v: dict) -> JTCScenario:
    f = v["carrier_hz"]
    g = [v.get(k) or 0.0 for k in _LEAK_KEYS]
    rail = RailUnitParams(v["z11_ohm_km"], v["z22_ohm_km"], v["z12_ohm_km"], g[0], g[1], g[2], f)
    pos = v["capacitor_positions_m"]
    cap = v["capacitor_uf"]
    cap = cap if isinstance(cap, list) else [cap] * len(pos)
    if len(cap) != len(pos):
        raise ConfigError("capacitor_uf and capacitor_positions_m lengths differ", key="capacitor_uf")
    caps = tuple(
        ShuntElement(ShuntKind.CAPACITOR, _cap_z(c, f), x) for c, x in zip(cap, pos)
    )
    offs = v["axle_offsets_m"]
    res = v["wheel_resistance_ohm"]
    res = res if isinstance(res, list) else [res] * len(offs)
    train = TrainFormation(tuple(offs), tuple(res))
    return JTCScenario(
        length=v["length_m"],
        carrier=f,
        rail=rail,
        ballast=v["ballast_ohm_km"],
        ground_fraction=v["ground_leak_fraction"],
        capacitors=caps,
        tuning_len=v["tuning_len_m"],
        z_sva=v["z_sva_ohm"],
        z_rz=v["z_rz_ohm"],
        z_rm=v["z_rm_ohm"],
        z_rs=v["z_rs_ohm"],
        z_es=v["z_es_ohm"],
        u_es=v["u_es_v"],
        train=train,
        tcr_gains=(v["tcr_a1"], v["tcr_a2"]),
    )


def _cap_z(c_uf: float, f: float) -> complex:
    z = capacitor_impedance(c_uf * 1e-6, f)
    # a broken capacitor serialises as a tiny capacitance; restore the sentinel
    if abs(z) >= 0.999 * OPEN_CIRCUIT_OHM:
        return -1j * OPEN_CIRCUIT_OHM
    return z


def _key_lines(text: str) -> dict:
    node = yaml.compose(text)
    if node is None:
        return {}
    if not isinstance(node, yaml.MappingNode):
        raise ConfigError("top level must be a mapping", line=node.start_mark.line + 1)
    return {k.value: k.start_mark.line + 1 for k, _ in node.value}


def parse_scenario(text: str, notify=True) -> JTCScenario:
    try:
        lines = _key_lines(text)
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        raise ConfigError(f"invalid YAML: {getattr(exc, 'problem', exc)}",
                          line=mark.line + 1 if mark else None) from exc
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigError("top level must be a mapping")
    return scenario_from_dict(data, lines, notify)


def load_scenario(path, notify=True) -> JTCScenario:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read scenario file: {exc}") from exc
    return parse_scenario(text, notify)


def dump_scenario(s: JTCScenario) -> str:
    return yaml.safe_dump(scenario_to_dict(s), sort_keys=False, default_flow_style=None)


def scenarios_equivalent(a: JTCScenario, b: JTCScenario, rtol=1e-12) -> bool:
    """Field-by-field comparison of two scenarios up to float round-off."""
    da, db = scenario_to_dict(a), scenario_to_dict(b)
    if da.keys() != db.keys():
        return False
    for k in da:
        x, y = da[k], db[k]
        if x is None or y is None:
            if x is not y:
                return False
            continue
        x, y = np.atleast_1d(np.asarray(x, dtype=float)), np.atleast_1d(np.asarray(y, dtype=float))
        if x.shape != y.shape or not np.allclose(x, y, rtol=rtol, atol=0):
            return False
    return True
