from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from jtcsim import jtc
from jtcsim.elements import OPEN_CIRCUIT_OHM, CapacitorFault
from jtcsim.errors import NoShuntingPoint, OutOfSection, ParameterError, SingularSystem, ZeroImpedance
from jtcsim.jtc import (
    JTCScenario,
    ShuntingSolution,
    after_elements,
    after_network,
    as_items,
    before_elements,
    before_network,
    receiving_tuning,
    sending_tuning,
    solve_many,
    solve_shunting_point,
    tcr_amplitude,
    tcr_amplitudes,
    unoccupied_main_track,
)
from jtcsim.netcore import PortState, shunt_matrix
from jtcsim.nodal import nodal_chain_matrix, nodal_oracle
from jtcsim.train import TrainFormation


def rel(a, b):
    return abs(a - b) / abs(b)


def open_caps(s):
    n = len(s.capacitors)
    out = s
    for i in range(1, n + 1):
        out = out.with_capacitor_fault(i, CapacitorFault.LINE_BREAKAGE)
    return out


def test_default_scenario_fields(scenario):
    assert scenario.length == 789 and scenario.carrier == 2300
    assert len(scenario.capacitors) == 9
    assert scenario.train.n_wheelsets == 32
    assert scenario.rail.g12 == pytest.approx(1 / 6)


def test_scenario_validation(scenario):
    with pytest.raises(ParameterError):
        JTCScenario(length=-1)
    with pytest.raises(ParameterError):
        JTCScenario(carrier=0)
    with pytest.raises(ParameterError):
        replace(scenario, capacitors=scenario.capacitors[::-1])
    with pytest.raises(ZeroImpedance):
        replace(scenario, z_rm=0)
    with pytest.raises(ParameterError):
        scenario.with_capacitor_fault(10, "break")


@pytest.mark.parametrize("x_f", [50.0, 100.0, 250.0, 500.0, 700.0])
def test_stable_region_positive(scenario, x_f):
    z = solve_shunting_point(scenario, x_f).z_f
    assert z.real > 0 and z.imag > 0


def test_single_wheel_open_caps_parallel_law(scenario):
    s = open_caps(scenario.with_train(TrainFormation((0.0,), (0.15,))))
    for x_f in (120.0, 437.3):
        z_recv = nodal_oracle(s, x_f, h=0.1, wheels=False).z_f
        want = 1 / (1 / 0.15 + 1 / z_recv)
        assert rel(solve_shunting_point(s, x_f).z_f, want) < 1e-6


def test_source_scale_invariance(scenario):
    xs = np.array([33.3, 300.0, 612.5])
    z = solve_many(scenario, xs).z_f
    for c in (2.0, -0.5, 1e-3j):
        zc = solve_many(replace(scenario, u_es=c * scenario.u_es), xs).z_f
        assert np.max(np.abs(zc - z) / np.abs(z)) < 1e-12


def test_state_scales_with_source(scenario):
    a = solve_shunting_point(scenario, 300.0).state.as_array()
    b = solve_shunting_point(replace(scenario, u_es=2 * scenario.u_es), 300.0).state.as_array()
    assert np.allclose(b, 2 * a, rtol=1e-12)


def test_solution_fields(scenario):
    sol = solve_shunting_point(scenario, 300.0)
    st_ = sol.state
    assert sol.z_f == pytest.approx((st_.u1 - st_.u2) / ((st_.i1 - st_.i2) / 2), rel=1e-14)
    assert 1e-14 <= sol.condition_report <= 1
    assert sol.x_f == 300.0


def test_chained_path_agrees(scenario, rng):
    xs = np.sort(rng.uniform(1, 788, 40))
    a = solve_many(scenario, xs, method="subspace").z_f
    b = solve_many(scenario, xs, method="chained").z_f
    assert np.max(np.abs(a - b) / np.abs(a)) < 1e-9


def test_unknown_method(scenario):
    with pytest.raises(ValueError):
        solve_many(scenario, [10.0], method="magic")


@pytest.mark.parametrize("x_f", [0.0, -3.0, 789.0, 800.0])
def test_out_of_section(scenario, x_f):
    with pytest.raises(OutOfSection):
        solve_shunting_point(scenario, x_f)


def test_no_train(scenario):
    with pytest.raises(NoShuntingPoint):
        solve_shunting_point(scenario.with_train(TrainFormation((), ())), 100.0)


def test_ill_conditioning_reported(scenario, monkeypatch):
    monkeypatch.setattr(jtc, "RCOND_MIN", 2.0)
    with pytest.raises(SingularSystem) as exc:
        solve_shunting_point(scenario, 321.0)
    assert exc.value.x_f == 321.0
    assert "321" in str(exc.value)


def test_receiving_tuning_limits(scenario):
    s = replace(scenario, z_sva=-1j * OPEN_CIRCUIT_OHM, tuning_len=0.0)
    n_rt, n1 = receiving_tuning(s)
    assert np.allclose(n_rt.m, np.eye(4), atol=1e-11)
    assert np.array_equal(n1[1], [0, 0, 1, 1])
    assert np.array_equal(n1[0], [1, -1, -s.z_rz / 2, s.z_rz / 2])


def test_receiving_tuning_matches_nodal(scenario):
    n_rt, _ = receiving_tuning(scenario)
    half = scenario.tuning_len / 2000
    items = [("rail", half), ("shunt", scenario.z_sva), ("rail", half)]
    want = nodal_chain_matrix(scenario.rail, items, h=0.05)
    assert np.max(np.abs(n_rt.m - want)) <= 1e-6 * np.max(np.abs(want))


def test_sending_tuning_blocks(scenario):
    st_ = sending_tuning(scenario)
    assert np.array_equal(st_.n2[:2, :2], np.eye(2))
    assert np.array_equal(st_.n2[:2, 2:], np.zeros((2, 2)))
    assert np.array_equal(st_.n4[1], [0, 0, 1, 1])
    assert np.array_equal(st_.u_es, [0, 0, 0, scenario.u_es])
    assert np.allclose(st_.n_st.m, receiving_tuning(scenario)[0].m)


def test_after_network_residual_gap(scenario):
    s = scenario.with_train(TrainFormation((0.0,), (0.15,)))
    got = after_network(s, 20.0).m
    want = shunt_matrix(1 / 0.15) @ jtc.rail(s, 20.0).m
    assert np.allclose(got, want, rtol=1e-13, atol=1e-13)


def test_after_network_matches_nodal(scenario):
    got = after_network(scenario, 400.0).m
    want = nodal_chain_matrix(scenario.rail, as_items(*after_elements(scenario, 400.0)), h=0.25)
    assert np.max(np.abs(got - want)) <= 1e-6 * np.max(np.abs(want))


def test_before_network_at_sending_boundary(scenario):
    assert np.allclose(before_network(scenario, scenario.length).m, np.eye(4), atol=1e-14)


def test_before_after_compose_to_unoccupied(scenario):
    empty = scenario.with_train(TrainFormation((), ()))
    full = unoccupied_main_track(scenario).m
    for x_f in (10.0, 131.5, 400.0):
        k, v = after_elements(empty, x_f, wheels=False)
        after = jtc._chain(empty, k, v)
        got = before_network(scenario, x_f).m @ after
        assert np.max(np.abs(got - full)) <= 1e-9 * np.max(np.abs(full))


def test_capacitor_count_behind_shunting_point(scenario):
    caps = scenario.capacitor_positions
    for x_f in (10.0, 200.0, 400.0, 780.0):
        k, _ = before_elements(scenario, x_f)
        assert int(np.sum(k == jtc.SHUNT)) == len(caps) - int(np.sum(caps <= x_f))


def test_crossing_capacitor_adds_one_factor(scenario):
    c = scenario.capacitor_positions[4]
    eps = 0.01
    lo = before_network(scenario, c - eps).m
    hi = before_network(scenario, c + eps).m
    n_c = shunt_matrix(1 / scenario.capacitors[4].z)
    want = hi @ jtc.rail(scenario, eps).m @ n_c @ jtc.rail(scenario, eps).m
    assert np.max(np.abs(lo - want)) <= 1e-12 * np.max(np.abs(lo))


def test_capacitor_at_shunting_point_is_on_receiving_side(scenario):
    c = float(scenario.capacitor_positions[2])
    k, v = after_elements(scenario, c)
    # rail(0), first wheel, rail(0), capacitor ...
    assert list(k[:4]) == [jtc.RAIL, jtc.SHUNT, jtc.RAIL, jtc.SHUNT]
    assert v[1] == pytest.approx(1 / 0.15)
    assert v[3] == pytest.approx(1 / scenario.capacitors[2].z)
    kb, _ = before_elements(scenario, c)
    assert int(np.sum(kb == jtc.SHUNT)) == 6


def test_tcr_amplitude_arithmetic():
    sol = ShuntingSolution(1.0, PortState(1, 0, 0.5, -0.5), 2.0, 1.0)
    assert tcr_amplitude(sol, 1, 1) == pytest.approx(0.5)


def test_tcr_zero_impedance():
    sol = ShuntingSolution(1.0, PortState(0, 0, 1, -1), 0.0, 1.0)
    with pytest.raises(ZeroImpedance):
        tcr_amplitude(sol, 1, 1)


values = st.floats(-50, 50, allow_nan=False)


@given(st.lists(st.builds(complex, values, values), min_size=4, max_size=4), values, values)
def test_tcr_forms_agree(state, a1, a2):
    s = PortState(*state)
    if abs(s.u1 - s.u2) < 1e-6 or abs(s.i1 - s.i2) < 1e-6:
        return
    z = jtc.shunting_impedance(s.as_array())
    sol = ShuntingSolution(0.0, s, z, 1.0)
    current_form = abs(a1 * a2 * (s.i1 - s.i2) / 2)
    assert tcr_amplitude(sol, a1, a2) == pytest.approx(current_form, rel=1e-12, abs=1e-300)


def test_tcr_steps_at_capacitors(scenario, profile):
    p = solve_many(scenario, profile.values)
    d = np.diff(tcr_amplitudes(p, 1.0, 1.0))
    mid = 0.5 * (p.x[1:] + p.x[:-1])
    # remove the smooth growth toward the source, keep the local steps
    dev = np.abs(d - np.convolve(d, np.ones(9) / 9, "same"))
    for c in scenario.capacitor_positions:
        k = int(np.argmin(np.abs(mid - c)))
        near = np.r_[dev[k - 12:k - 2], dev[k + 3:k + 13]]
        assert dev[k] > 2 * near.max()
