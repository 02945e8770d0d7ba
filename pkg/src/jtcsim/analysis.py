"""Profiles, steady values, parameter sweeps, fault studies and wheel-set
importance built on the shunting-point solver."""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import (
    EmptyAfterExclusion,
    NoShuntingPoint,
    NumericalError,
    ParameterError,
    TraceFormat,
)
from .fitting import FitResult, fit_linear, fit_quadratic, fit_reciprocal, goodness_of_fit, quadratic_minimum
from .jtc import JTCScenario, solve_many, tcr_amplitudes

DEFAULT_EXCLUSION_M = 30.0
_CHUNK = 128


def threads() -> int:
    """Worker count for sweeps, capped by the JTC_THREADS environment variable."""
    env = os.environ.get("JTC_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return min(8, os.cpu_count() or 1)


def _pmap(fn, items):
    items = list(items)
    n = threads()
    if n == 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))


@dataclass(frozen=True)
class ProfileContext:
    """Geometry needed to locate capacitor neighbourhoods and end zones."""

    capacitor_positions: tuple
    length: float
    end_margin: float


@dataclass(frozen=True, eq=False)
class SweepSeries:
    name: str
    unit: str
    values: np.ndarray
    samples: np.ndarray
    fit_re: FitResult = None
    fit_im: FitResult = None
    context: ProfileContext = None
    gaps: tuple = ()  # (value, message) for samples that failed to solve

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 1 or len(v) != len(self.samples):
            raise ParameterError("values and samples must be 1-d and of equal length")
        if np.any(np.diff(v) <= 0):
            raise ParameterError("sample abscissae must be strictly increasing")
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "samples", np.asarray(self.samples))

    @property
    def re(self) -> np.ndarray:
        return np.real(self.samples)

    @property
    def im(self) -> np.ndarray:
        return np.imag(self.samples)

    def __len__(self):
        return len(self.values)


def _context(s: JTCScenario) -> ProfileContext:
    return ProfileContext(
        tuple(float(x) for x in s.capacitor_positions),
        float(s.length),
        float(max(s.tuning_len, DEFAULT_EXCLUSION_M)),
    )


def profile_positions(length: float, step: float = 1.0) -> np.ndarray:
    """Sample centres ``(k + 1/2) step`` strictly inside the section."""
    if not step > 0:
        raise ParameterError("step must be positive")
    n = int(np.ceil(length / step - 0.5))
    return (np.arange(n) + 0.5) * step


def _solve_points(s: JTCScenario, xs):
    """z_f for every x; failures become NaN and are reported as gaps."""
    xs = np.asarray(xs, dtype=float)
    chunks = [xs[i : i + _CHUNK] for i in range(0, len(xs), _CHUNK)]

    def run(chunk):
        try:
            return solve_many(s, chunk).z_f, []
        except NumericalError:
            out = np.empty(len(chunk), dtype=np.complex128)
            gaps = []
            for j, x in enumerate(chunk):
                try:
                    out[j] = solve_many(s, [x]).z_f[0]
                except NumericalError as exc:
                    out[j] = np.nan
                    gaps.append((float(x), str(exc)))
            return out, gaps

    results = _pmap(run, chunks)
    if not results:
        return np.zeros(0, dtype=np.complex128), ()
    z = np.concatenate([r[0] for r in results])
    gaps = tuple(g for r in results for g in r[1])
    return z, gaps


def impedance_profile(s: JTCScenario, step: float = 1.0) -> SweepSeries:
    """z_f at every sampled shunting point of the section."""
    if s.train.n_wheelsets == 0:
        raise NoShuntingPoint("scenario has no train")
    xs = profile_positions(s.length, step)
    z, gaps = _solve_points(s, xs)
    return SweepSeries("x_f", "m", xs, z, context=_context(s), gaps=gaps)


def steady_mask(x, context: ProfileContext, exclusion_radius: float = DEFAULT_EXCLUSION_M):
    """Samples outside capacitor influence zones and section end zones.

    A capacitor disturbs z_f only while it lies between the wheel sets of the
    leading bogie and shortly after, i.e. for shunting points from the
    capacitor position to ``exclusion_radius`` beyond it towards the sending
    end.
    """
    x = np.asarray(x, dtype=float)
    keep = (x >= context.end_margin) & (x <= context.length - context.end_margin)
    for c in context.capacitor_positions:
        keep &= ~((x >= c) & (x <= c + exclusion_radius))
    return keep


def steady_value(
    series: SweepSeries, exclusion_radius: float = DEFAULT_EXCLUSION_M, context: ProfileContext = None
) -> complex:
    """Median of the samples outside capacitor influence zones and end zones."""
    ctx = context or series.context
    if len(series) == 0:
        raise EmptyAfterExclusion("empty series")
    if ctx is None:
        keep = np.ones(len(series), dtype=bool)
    else:
        keep = steady_mask(series.values, ctx, exclusion_radius)
    z = series.samples[keep]
    z = z[np.isfinite(z)]
    if len(z) == 0:
        raise EmptyAfterExclusion("no samples left after excluding capacitor and end zones")
    return complex(np.median(z.real), np.median(z.imag))


def steady_impedance(s: JTCScenario, step: float = 1.0, exclusion_radius: float = DEFAULT_EXCLUSION_M):
    """Steady z_f of a scenario, solving only the samples the median uses."""
    xs = profile_positions(s.length, step)
    xs = xs[steady_mask(xs, _context(s), exclusion_radius)]
    if len(xs) == 0:
        raise EmptyAfterExclusion("no samples left after excluding capacitor and end zones")
    z, _ = _solve_points(s, xs)
    z = z[np.isfinite(z)]
    if len(z) == 0:
        raise EmptyAfterExclusion("every steady sample failed to solve")
    return complex(np.median(z.real), np.median(z.imag))


def plateau_mode(series: SweepSeries) -> complex:
    """Most populated histogram bin of Re and Im (Freedman-Diaconis bins)."""

    def mode(v):
        v = v[np.isfinite(v)]
        counts, edges = np.histogram(v, bins="fd")
        k = int(np.argmax(counts))
        return 0.5 * (edges[k] + edges[k + 1])

    return complex(mode(series.re), mode(series.im))


@dataclass(frozen=True)
class Pulse:
    x: float  # midpoint of the sample interval containing the jump
    d_re: float
    d_im: float


def detect_pulses(series: SweepSeries, fraction: float = 0.25) -> list[Pulse]:
    """Abrupt steps with Re rising and Im falling between consecutive samples.

    A step counts when both parts change by more than ``fraction`` of the
    largest interior step of that part. Section end zones are ignored.
    """
    x, z = series.values, series.samples
    dz = np.diff(z)
    mid = 0.5 * (x[1:] + x[:-1])
    inner = np.isfinite(dz)
    if series.context is not None:
        m = series.context.end_margin
        inner &= (mid >= m) & (mid <= series.context.length - m)
    if not inner.any():
        return []
    thr_re = fraction * np.max(np.abs(dz.real[inner]))
    thr_im = fraction * np.max(np.abs(dz.imag[inner]))
    hit = inner & (dz.real > thr_re) & (dz.imag < -thr_im)
    return [Pulse(float(mid[k]), float(dz[k].real), float(dz[k].imag)) for k in np.flatnonzero(hit)]


def max_slope_outside(series: SweepSeries, radius: float = DEFAULT_EXCLUSION_M) -> float:
    """Largest |dz/dx| between samples away from capacitors and section ends."""
    ctx = series.context
    x, z = series.values, series.samples
    mid = 0.5 * (x[1:] + x[:-1])
    slope = np.abs(np.diff(z)) / np.diff(x)
    keep = (mid >= ctx.end_margin) & (mid <= ctx.length - ctx.end_margin)
    for c in ctx.capacitor_positions:
        keep &= np.abs(mid - c) > radius
    return float(np.max(slope[keep]))


def _sweep(name, unit, values, scenarios, step):
    z = np.array(_pmap(lambda sc: steady_impedance(sc, step), scenarios))
    return SweepSeries(name, unit, np.asarray(values, dtype=float), z)


def _grid(lo, hi, step):
    n = int(round((hi - lo) / step))
    return lo + step * np.arange(n + 1)


def sweep_wheel_resistance(
    s: JTCScenario, r_range=(0.01, 1.0), r_step: float = 0.01, step: float = 1.0
) -> SweepSeries:
    """Steady z_f against a common wheel-set resistance, with reciprocal fits."""
    if not r_range[0] > 0:
        raise ParameterError("wheel resistance range must be positive")
    r = _grid(*r_range, r_step)
    sc = [s.with_train(s.train.with_resistance(v)) for v in r]
    out = _sweep("r_ws", "ohm", r, sc, step)
    return replace(out, fit_re=fit_reciprocal(r, out.re), fit_im=fit_reciprocal(r, out.im))


def sweep_ballast(s: JTCScenario, rb_range=(1.0, 20.0), rb_step: float = 1.0, step: float = 1.0) -> SweepSeries:
    if not rb_range[0] > 0:
        raise ParameterError("ballast resistance range must be positive")
    rb = _grid(*rb_range, rb_step)
    return _sweep("r_b", "ohm.km", rb, [s.with_ballast(v) for v in rb], step)


def sweep_rail_impedance(
    s: JTCScenario, span: float = 0.2, scale_step: float = 0.01, step: float = 1.0
) -> SweepSeries:
    """Steady z_f against the rail impedance in units of its nominal value.

    Re is fitted with a line, Im with a parabola.
    """
    k = _grid(1 - span, 1 + span, scale_step)
    out = _sweep("z_r", "z_r0", k, [s.with_rail_scale(v) for v in k], step)
    return replace(out, fit_re=fit_linear(k, out.re), fit_im=fit_quadratic(k, out.im))


def rail_minimum(series: SweepSeries) -> tuple[float, float]:
    """Vertex of the quadratic Im fit of a rail-impedance sweep."""
    return quadratic_minimum(*series.fit_im.params)


def capacitor_fault_delta(s: JTCScenario, index=None, fault="break", step: float = 1.0) -> SweepSeries:
    """z_f with capacitor ``index`` (1-based from the receiving end) faulted,
    minus the healthy profile. ``index=None`` gives the all-zero series."""
    base = impedance_profile(s, step)
    if index is None:
        return replace(base, samples=np.zeros_like(base.samples), name="x_f")
    bad = impedance_profile(s.with_capacitor_fault(index, fault), step)
    return replace(base, samples=bad.samples - base.samples, gaps=base.gaps + bad.gaps)


@dataclass(frozen=True, eq=False)
class ImportanceResult:
    z0: complex
    z: np.ndarray  # steady z_f with wheel set i abnormal
    dp_re: np.ndarray
    dp_im: np.ndarray
    p_re: np.ndarray
    p_im: np.ndarray


def _normalise(dp):
    m = np.max(dp) if len(dp) else 0.0
    return dp / m if m > 0 else np.zeros_like(dp)


def structural_importance(s: JTCScenario, abnormal_r: float = 1.0, step: float = 1.0) -> ImportanceResult:
    """Relative steady-value change caused by one abnormal wheel set, for each
    wheel set, normalised by the largest change."""
    if not abnormal_r > 0:
        raise ParameterError("abnormal resistance must be positive")
    n = s.train.n_wheelsets
    sc = [s] + [s.with_train(s.train.with_wheel(i, abnormal_r)) for i in range(n)]
    z = np.array(_pmap(lambda c: steady_impedance(c, step), sc))
    z0, zi = z[0], z[1:]
    dp_re = np.abs(zi.real - z0.real) / abs(z0.real)
    dp_im = np.abs(zi.imag - z0.imag) / abs(z0.imag)
    return ImportanceResult(z0, zi, dp_re, dp_im, _normalise(dp_re), _normalise(dp_im))


def read_trace(path) -> tuple[np.ndarray, np.ndarray]:
    """Two-column (position_m, amplitude_V) text trace.

    Columns may be separated by commas or whitespace; one header line and
    '#' comment lines are allowed.
    """
    xs, ys = [], []
    seen_data = False
    header_used = False
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.replace(",", " ").split()
            try:
                vals = [float(p) for p in parts]
            except ValueError:
                if seen_data or header_used:
                    raise TraceFormat(f"non-numeric row: {line!r}", line=lineno) from None
                header_used = True
                continue
            if len(vals) != 2:
                raise TraceFormat(f"expected 2 columns, got {len(vals)}", line=lineno)
            if not all(np.isfinite(vals)):
                raise TraceFormat("non-finite value", line=lineno)
            xs.append(vals[0])
            ys.append(vals[1])
            seen_data = True
    if len(xs) < 2:
        raise TraceFormat("trace needs at least two data rows")
    x = np.array(xs)
    if np.any(np.diff(x) <= 0):
        raise TraceFormat("positions must be strictly increasing")
    return x, np.array(ys)


@dataclass(frozen=True, eq=False)
class TCRComparison:
    zf: SweepSeries  # full train model
    rwh: SweepSeries  # first wheel set only
    measured: SweepSeries = None
    gof_zf: tuple = None  # (sse, r_square, rmse) against the measured trace
    gof_rwh: tuple = None


def _amplitude_profile(s: JTCScenario, step):
    xs = profile_positions(s.length, step)
    a1, a2 = s.tcr_gains
    amps = np.concatenate(
        _pmap(lambda c: tcr_amplitudes(solve_many(s, c), a1, a2), [xs[i : i + _CHUNK] for i in range(0, len(xs), _CHUNK)])
    )
    return SweepSeries("x_f", "m", xs, amps, context=_context(s))


def tcr_comparison(s: JTCScenario, measured=None, step: float = 1.0) -> TCRComparison:
    """Reader-antenna amplitude from the full train and from its first wheel
    set alone, optionally scored against a measured trace (path or (x, y))."""
    zf = _amplitude_profile(s, step)
    rwh = _amplitude_profile(s.with_train(s.train.truncated(1)), step)
    if measured is None:
        return TCRComparison(zf, rwh)
    mx, my = read_trace(measured) if isinstance(measured, (str, os.PathLike)) else map(np.asarray, measured)
    meas = SweepSeries("x_f", "m", mx, my)
    g1 = goodness_of_fit(my, np.interp(mx, zf.values, zf.samples))
    g2 = goodness_of_fit(my, np.interp(mx, rwh.values, rwh.samples))
    return TCRComparison(zf, rwh, meas, g1, g2)
