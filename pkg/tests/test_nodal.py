import numpy as np
import pytest

from jtcsim.errors import OutOfSection
from jtcsim.jtc import solve_many, solve_shunting_point
from jtcsim.nodal import nodal_chain_matrix, nodal_oracle, nodal_solve
from jtcsim.railline import rail_estn


def test_agrees_with_chain_model_50_points(scenario):
    xs = np.linspace(0, scenario.length, 52)[1:-1]
    z = solve_many(scenario, xs).z_f
    zo = np.array([nodal_oracle(scenario, x).z_f for x in xs])
    assert np.max(np.abs(z - zo) / np.abs(zo)) < 1e-4


def test_full_state_agrees(scenario):
    for x_f in (77.0, 480.0):
        a = solve_shunting_point(scenario, x_f).state.as_array()
        b = nodal_oracle(scenario, x_f).state.as_array()
        assert np.max(np.abs(a - b)) <= 1e-5 * np.max(np.abs(b))


def test_second_order_convergence(scenario):
    x_f = 300.0
    exact = solve_shunting_point(scenario, x_f).z_f
    e20 = abs(nodal_oracle(scenario, x_f, h=20.0).z_f - exact)
    e10 = abs(nodal_oracle(scenario, x_f, h=10.0).z_f - exact)
    assert 3.0 < e20 / e10 < 5.0


def test_balanced_source_draws_no_net_earth_current(scenario):
    # the source is connected between the rails, so the leakage to earth
    # through both rails must cancel
    grid, v = nodal_solve(scenario, 250.0, h=0.5)
    p = scenario.rail
    earth = p.g11 * v[:, 0] + p.g22 * v[:, 1]
    total = np.trapezoid(earth, grid / 1000.0)
    rail_to_rail = np.trapezoid(np.abs(p.g12 * (v[:, 0] - v[:, 1])), grid / 1000.0)
    assert abs(total) < 1e-6 * rail_to_rail


def test_rail_voltages_are_antisymmetric(scenario):
    # symmetric rails and a floating source: the common mode is not excited
    grid, v = nodal_solve(scenario, 250.0, h=1.0)
    assert np.max(np.abs(v[:, 0] + v[:, 1])) < 1e-9 * np.max(np.abs(v))


def test_out_of_section(scenario):
    with pytest.raises(OutOfSection):
        nodal_oracle(scenario, scenario.length)


def test_chain_matrix_of_bare_rail(scenario):
    want = rail_estn(scenario.eigen, 0.1).m
    got = nodal_chain_matrix(scenario.rail, [("rail", 0.1)], h=0.1)
    assert np.max(np.abs(got - want)) <= 1e-6 * np.max(np.abs(want))
    with pytest.raises(ValueError):
        nodal_chain_matrix(scenario.rail, [("wire", 1.0)])
