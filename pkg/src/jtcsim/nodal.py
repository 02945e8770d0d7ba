"""Independent node-admittance model of the occupied track circuit.

Every rail span is cut into lumped Pi sections no longer than ``h`` metres,
every shunt is stamped between the two rail nodes at its position and the
transmitter enters as a Norton source. One sparse solve gives all node
voltages; no chain matrices are involved. The discretisation error is second
order in ``h``.
"""
from __future__ import annotations

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import SingularSystem
from .jtc import JTCScenario, ShuntingSolution, _check_xf, _wheels, shunting_impedance
from .netcore import PortState
from .railline import RailUnitParams

DEFAULT_STEP_M = 0.25
_SNAP_M = 1e-6


def _grid(key_points, h):
    key = np.unique(np.asarray(key_points, dtype=float))
    keep = np.concatenate([[True], np.diff(key) > _SNAP_M])
    key = key[keep]
    pts = [key[:1]]
    for a, b in zip(key[:-1], key[1:]):
        n = max(1, int(np.ceil((b - a) / h - 1e-9)))
        pts.append(np.linspace(a, b, n + 1)[1:])
    return np.concatenate(pts)


def _node(grid, x):
    i = int(np.argmin(np.abs(grid - x)))
    if abs(grid[i] - x) > 2 * _SNAP_M:
        raise ValueError(f"no node at {x}")
    return i


def _assemble(p: RailUnitParams, grid, shunts):
    """Sparse 2n x 2n admittance matrix; node 2k is rail 1 and 2k+1 rail 2 at
    grid[k]. ``shunts`` holds (position, admittance) pairs."""
    n = len(grid)
    d = np.diff(grid) / 1000.0
    zinv = np.linalg.inv(p.z_series)
    y = p.y_shunt
    rows, cols, vals = [], [], []

    def stamp(a, b, blocks):
        # blocks: (m, 2, 2) stamped at node pairs (a, b)
        for r in range(2):
            for c in range(2):
                rows.append(2 * a + r)
                cols.append(2 * b + c)
                vals.append(blocks[:, r, c])

    k = np.arange(n - 1)
    yb = zinv[None] / d[:, None, None]
    ys = y[None] * (d / 2)[:, None, None]
    stamp(k, k, yb + ys)
    stamp(k + 1, k + 1, yb + ys)
    stamp(k, k + 1, -yb)
    stamp(k + 1, k, -yb)
    if shunts:
        pos = np.array([_node(grid, x) for x, _ in shunts])
        ysh = np.array([v for _, v in shunts], dtype=np.complex128)
        g = np.empty((len(ysh), 2, 2), dtype=np.complex128)
        g[:, 0, 0] = g[:, 1, 1] = ysh
        g[:, 0, 1] = g[:, 1, 0] = -ysh
        stamp(pos, pos, g)
    a = sp.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(2 * n, 2 * n)
    )
    return a.tocsc()


def _solve_sparse(a, b, x_f):
    lu = spla.splu(a)
    v = lu.solve(b)
    if not np.all(np.isfinite(v)):
        raise SingularSystem(0.0, x_f)
    return v


def nodal_solve(s: JTCScenario, x_f: float, h: float = DEFAULT_STEP_M, wheels=True):
    """Node voltages of the whole circuit. Returns (grid, voltages (n, 2))."""
    L, lt = s.length, s.tuning_len
    shunts = [
        (-lt, 1 / s.z_rz),
        (-lt / 2, 1 / s.z_sva),
        (0.0, 1 / s.z_rm),
        (L, 1 / s.z_es),
        (L + lt / 2, 1 / s.z_sva),
        (L + lt, 1 / s.z_rs),
    ]
    shunts += [(c.position, 1 / c.z) for c in s.capacitors]
    if wheels:
        wx, wy = _wheels(s, x_f)
        shunts += list(zip(wx, wy))
    key = [x for x, _ in shunts] + [x_f]
    grid = _grid(key, h)
    a = _assemble(s.rail, grid, shunts)
    b = np.zeros(2 * len(grid), dtype=np.complex128)
    j = s.u_es / s.z_es
    k = _node(grid, L)
    b[2 * k] = j
    b[2 * k + 1] = -j
    v = _solve_sparse(a, b, x_f)
    return grid, v.reshape(-1, 2)


def nodal_oracle(
    s: JTCScenario, x_f: float, h: float = DEFAULT_STEP_M, wheels: bool = True
) -> ShuntingSolution:
    """Shunting-point state from the nodal model.

    The rail currents at x_f are those arriving from the sending side: the
    series current of the adjacent section minus its half-section leakage.
    With ``wheels=False`` the train is removed and z_f becomes the input
    impedance of the receiving side at x_f.
    """
    _check_xf(s, x_f)
    grid, v = nodal_solve(s, x_f, h, wheels)
    i = _node(grid, x_f)
    d = (grid[i + 1] - grid[i]) / 1000.0
    yb = np.linalg.inv(s.rail.z_series) / d
    cur = yb @ (v[i + 1] - v[i]) - (s.rail.y_shunt * d / 2) @ v[i]
    st = np.concatenate([v[i], cur])
    return ShuntingSolution(float(x_f), PortState.from_array(st), shunting_impedance(st), np.nan)


def nodal_chain_matrix(p: RailUnitParams, items, h: float = DEFAULT_STEP_M) -> np.ndarray:
    """Chain matrix of a signal-ordered element list via nodal analysis.

    ``items`` holds ("rail", length_km) and ("shunt", impedance) entries. The
    network is discretised, reduced to its four port nodes and converted from
    admittance to chain parameters.
    """
    x = 0.0
    key = [0.0]
    shunts = []
    for kind, v in items:
        if kind == "rail":
            x += 1000.0 * v
            key.append(x)
        elif kind == "shunt":
            shunts.append((x, 1 / v))
        else:
            raise ValueError(f"unknown element kind {kind!r}")
    grid = _grid(key, h)
    a = _assemble(p, grid, shunts).toarray()
    m = a.shape[0]
    ports = [0, 1, m - 2, m - 1]
    inner = list(range(2, m - 2))
    y = a[np.ix_(ports, ports)]
    if inner:
        y = y - a[np.ix_(ports, inner)] @ np.linalg.solve(
            a[np.ix_(inner, inner)], a[np.ix_(inner, ports)]
        )
    y11, y12, y21, y22 = y[:2, :2], y[:2, 2:], y[2:, :2], y[2:, 2:]
    y21i = np.linalg.inv(y21)
    return np.block([[-y21i @ y22, -y21i], [y12 - y11 @ y21i @ y22, -y11 @ y21i]])
