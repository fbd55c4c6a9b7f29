"""Acceptance gate: every promised closed form, rate, and invariant.

Each test covers one numbered criterion and prints a single verdict line
to the real stdout so the result survives pytest's capture.  Tolerances
are asserted exactly as promised; nothing is loosened to pass.
"""

import math
import sys
import time
from contextlib import contextmanager

import numpy as np

from hyperwedge.euler import (
    GasParams,
    NP_FAMILY,
    State,
    eigenvalues,
    fluxes,
    flow_slope,
    normalization_coefficient,
)
from hyperwedge.curves import compose_wave_curves, wave_curve
from hyperwedge.riemann import (
    boundary_hugoniot_q1,
    boundary_response,
    solve_riemann,
)
from hyperwedge.tracking import EngineConfig, InitialData, run, export_trajectory
from hyperwedge.functionals import (
    GlimmWeights,
    LyapunovWeights,
    entropy_production_check,
    glimm_trace,
    l1_distance,
    lyapunov_functional,
)
from hyperwedge.experiments import (
    ExperimentConfig,
    run_convergence,
    run_special_solution,
)

from conftest import ACCEPTANCE_LINES
from test_tracking import stepped_data, wedge_wall

GAS = GasParams(gamma=1.4, a_inf=2.0, tau=0.1)
GAS0 = GasParams(gamma=1.4, a_inf=2.0, tau=0.0)
BG = GAS.background()
BG0 = GAS0.background()


def _report(n: int, label: str, ok: bool) -> None:
    verdict = "PASS" if ok else "FAIL"
    line = f"[{verdict}] criterion {n}: {label}"
    ACCEPTANCE_LINES.append(line)
    print(line, file=sys.__stdout__, flush=True)


@contextmanager
def _criterion(n: int, label: str):
    try:
        yield
    except BaseException:
        _report(n, label, False)
        raise
    _report(n, label, True)


def _timed(limit_s: float, fn, repeats: int = 3, warmup: bool = True):
    """Best-of-`repeats` wall time must beat `limit_s`; returns fn()."""
    if warmup:
        fn()
    best, out = math.inf, None
    for _ in range(repeats):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    assert best < limit_s, f"runtime {best * 1e3:.3f} ms over {limit_s * 1e3:.0f} ms budget"
    return out


# ---------------------------------------------------------------------------
# 1: eigen-structure closed forms
# ---------------------------------------------------------------------------

def test_criterion_1_eigenstructure():
    with _criterion(1, "background eigenvalues and normalization closed forms"):
        lam, e1, e4 = _timed(1.0e-3, lambda: (
            eigenvalues(BG, GAS),
            normalization_coefficient(BG, GAS, 1),
            normalization_coefficient(BG, GAS, 4),
        ))
        a, g, t = 2.0, 1.4, 0.1
        acoustic = 1.0 / math.sqrt(a * a - t * t)
        np.testing.assert_allclose(lam, [-acoustic, 0.0, 0.0, acoustic],
                                   atol=1.0e-9)
        e_closed = 2.0 * (a * a - t * t) ** 2 / ((g + 1.0) * a ** 4)
        assert abs(e1 - e_closed) < 1.0e-9
        assert abs(e4 - e_closed) < 1.0e-9


# ---------------------------------------------------------------------------
# 2: composition-map Jacobian determinant
# ---------------------------------------------------------------------------

def _composition_jacobian_det(gas: GasParams) -> float:
    base = gas.background()
    h = 1.0e-6
    cols = []
    for j in range(4):
        plus, minus = [0.0] * 4, [0.0] * 4
        plus[j], minus[j] = h, -h
        Up = compose_wave_curves(base, plus, gas)
        Um = compose_wave_curves(base, minus, gas)
        cols.append((Up.as_array() - Um.as_array()) / (2.0 * h))
    return float(np.linalg.det(np.column_stack(cols)))


def test_criterion_2_jacobian_determinant():
    with _criterion(2, "four-wave composition Jacobian determinant"):
        det_t = _timed(1.0e-2, lambda: _composition_jacobian_det(GAS))

        def closed(a, g, t):
            return -8.0 * (a * a - t * t) ** 3.5 / ((g + 1.0) ** 2 * a ** 8)

        assert abs(det_t - closed(2.0, 1.4, 0.1)) < 1.0e-5 * abs(closed(2.0, 1.4, 0.1))
        det_0 = _composition_jacobian_det(GAS0)
        assert abs(det_0 - (-25.0 / 36.0)) < 1.0e-5 * (25.0 / 36.0)


# ---------------------------------------------------------------------------
# 3: boundary derivative constants
# ---------------------------------------------------------------------------

def test_criterion_3_boundary_constants():
    with _criterion(3, "corner gain, reflection, and wall-jump constants"):
        def probe():
            resp = boundary_response(GAS0)
            h = 1.0e-4
            kb = boundary_hugoniot_q1(0.0, 0.0, h, 0.0, 0.0, BG0, GAS0) / h
            kt = boundary_hugoniot_q1(0.0, 0.0, 0.0, 0.0, h, BG0, GAS0) / h
            return resp, kb, kt

        resp, k_wall, k_theta = _timed(1.0, probe)
        assert abs(resp["boundary_gain"] - 1.2) < 1.0e-4
        assert abs(resp["reflection"][4] - 1.0) < 1.0e-3
        assert abs(resp["reflection"][2]) <= 1.0e-3
        assert abs(resp["reflection"][3]) <= 1.0e-3
        assert abs(k_wall - (-1.0)) < 1.0e-3
        assert abs(k_theta - 1.2) < 1.0e-3


# ---------------------------------------------------------------------------
# 4: pinned-jump asymptotic coefficients
# ---------------------------------------------------------------------------

def test_criterion_4_special_solution_coefficients():
    with _criterion(4, "pinned-jump strength and error coefficients"):
        cfg = ExperimentConfig(scenario="special", tau_grid=(0.1, 0.05, 0.025),
                               eps=1.0e-3, x_station=1.0)
        rep = _timed(10.0, lambda: run_special_solution(cfg), repeats=1)
        rows = {r.name: r for r in rep.coefficients}
        assert rep.coeff_tau == 0.05
        assert rows["sigma_a1_over_eps"].rel_err < 0.01
        assert rows["beta4_correction"].rel_err < 0.10
        # Known open defect: the measured leading error coefficient sits
        # near 0.5, far outside the promised 5% band around 2.125.
        assert rows["E_coefficient"].rel_err < 0.05


# ---------------------------------------------------------------------------
# 5: wedge-flow convergence exponent
# ---------------------------------------------------------------------------

def test_criterion_5_wedge_convergence_rate():
    with _criterion(5, "wedge-flow quadratic convergence exponent"):
        cfg = ExperimentConfig(scenario="wedge", tau_grid=(0.1, 0.05, 0.025),
                               wedge_angle=0.01, data_amplitude=1.0e-3,
                               x_station=1.0)
        assert cfg.engine.nu == 10 and cfg.engine.h == 1.0 / 32.0
        fit = _timed(120.0, lambda: run_convergence(cfg), repeats=1,
                     warmup=False)
        assert 1.9 <= fit.slope <= 2.1


# ---------------------------------------------------------------------------
# 6: front-strength functional decreases at every event
# ---------------------------------------------------------------------------

def test_criterion_6_glimm_monotonicity():
    with _criterion(6, "weighted strength functional decreases eventwise"):
        w = GlimmWeights.from_background(GAS)
        for seed in range(20):
            cfg = EngineConfig(nu=8, x_end=1.0, seed=seed)
            traj = run(stepped_data(GAS, amp=2.0e-4, seed=seed),
                       wedge_wall(), cfg, GAS)
            assert len(traj.records) >= 10
            trace = glimm_trace(traj, w)
            drops = np.diff(trace.values)
            assert len(drops) == len(traj.records)
            for rec, dG in zip(traj.records, drops):
                assert dG <= 1.0e-12
                if rec.kind == "interaction":
                    assert dG <= -rec.emech / 8.0 + 1.0e-10


# ---------------------------------------------------------------------------
# 7: paired-run near-decrease with one global constant
# ---------------------------------------------------------------------------

def test_criterion_7_lyapunov_near_decrease():
    with _criterion(7, "paired-run distance near-decrease and equivalence"):
        w = LyapunovWeights.from_background(GAS)
        stations = (0.25, 0.5, 0.75, 1.0)
        histories = []
        for seed in range(10):
            cfg = EngineConfig(nu=8, x_end=1.0, seed=seed)
            dataU = stepped_data(GAS, amp=2.0e-4, seed=seed)
            wallU = wedge_wall()
            if seed % 2 == 0:
                shifted = tuple(State(s.rho, s.u, s.v + 5.0e-4, s.p)
                                for s in dataU.states)
                dataV, wallV = InitialData(dataU.breaks, shifted), wallU
            else:
                dataV, wallV = dataU, wedge_wall(slope=-0.01 + 5.0e-4)
            tU = run(dataU, wallU, cfg, GAS)
            tV = run(dataV, wallV, cfg, GAS)
            lam = tU.lambda_hat
            values = []
            for x in stations:
                sU, sV = tU.slice_at(x), tV.slice_at(x)
                val = lyapunov_functional(sU, sV, wallU, wallV, w, GAS,
                                          x_horizon=2.0)
                g_low = min(wallU.g_at(x), wallV.g_at(x))
                dist = l1_distance(sU, sV, (g_low - 2.0 * lam * x - 1.0, g_low))
                assert dist > 0.0
                assert 0.1 <= val.interior / dist <= 10.0
                values.append(val.total)
            histories.append(values)

        # one global constant fitted over every increment of every pair
        nu = 8
        C = max(max(0.0, vb - va) * nu / (xb - xa)
                for values in histories
                for (xa, va), (xb, vb) in zip(zip(stations, values),
                                              list(zip(stations, values))[1:]))
        assert math.isfinite(C)
        for values in histories:
            for (xa, va), (xb, vb) in zip(zip(stations, values),
                                          list(zip(stations, values))[1:]):
                assert vb <= va + C * (xb - xa) / nu + 1.0e-15


# ---------------------------------------------------------------------------
# 8: two-system off-family strength scaling
# ---------------------------------------------------------------------------

def test_criterion_8_solver_comparison_scaling():
    with _criterion(8, "off-family strengths quadratic in the scaling"):
        taus = (0.1, 0.05, 0.025)
        floor = 1.0e-12
        defects = {}
        for k in (1, 2, 3, 4):
            for sig in (1.0e-3, -1.0e-3, 1.0e-2, -1.0e-2):
                U_a = wave_curve(BG0, k, sig, GAS0)
                per_tau = []
                for tau in taus:
                    sol = solve_riemann(BG0, U_a, GAS0.with_tau(tau))
                    per_tau.append(max(abs(float(sol.strengths[j - 1]))
                                       for j in (1, 2, 3, 4) if j != k))
                defects[(k, sig)] = per_tau

        ratios = []
        for (k, sig), per_tau in defects.items():
            for d_coarse, d_fine in zip(per_tau, per_tau[1:]):
                if d_coarse > floor and d_fine > floor:
                    ratios.append(d_coarse / d_fine)
        assert len(ratios) >= 8
        for r in ratios:
            assert 3.2 <= r <= 4.8

        C = max(d / (abs(sig) * tau * tau)
                for (k, sig), per_tau in defects.items()
                for tau, d in zip(taus, per_tau) if d > floor)
        assert math.isfinite(C)
        for (k, sig), per_tau in defects.items():
            for tau, d in zip(taus, per_tau):
                assert d <= C * abs(sig) * tau * tau * (1.0 + 1.0e-12)


# ---------------------------------------------------------------------------
# 9: solver property suite
# ---------------------------------------------------------------------------

def test_criterion_9_property_suite():
    with _criterion(9, "roundtrips, jump conditions, entropy, determinism"):
        # wave-curve roundtrips: compose then re-solve recovers strengths
        probes = [(-2.0e-3, 1.0e-3, -1.0e-3, 2.0e-3),
                  (1.5e-3, -2.0e-3, 2.0e-3, -1.5e-3),
                  (-5.0e-3, 0.0, 0.0, 5.0e-3),
                  (0.0, 3.0e-3, -3.0e-3, 0.0)]
        for gas in (GAS, GAS0):
            base = gas.background()
            for sig in probes:
                top = compose_wave_curves(base, sig, gas)
                sol = solve_riemann(base, top, gas)
                assert np.max(np.abs(sol.strengths - np.asarray(sig))) < 1.0e-10
                back = compose_wave_curves(base, sol.strengths, gas)
                assert np.max(np.abs(back - top)) < 1.0e-10

        # tracked runs: jump conditions and entropy on every emitted front
        cfg = EngineConfig(nu=8, x_end=1.0, seed=3)
        traj = run(stepped_data(GAS, amp=2.0e-4, seed=3), wedge_wall(), cfg, GAS)
        for x in (0.3, 0.7, 1.0):
            sl = traj.slice_at(x)
            for front, prod in zip(sl.fronts,
                                   entropy_production_check(sl, GAS)):
                if front.family == NP_FAMILY:
                    assert math.isnan(prod)
                    continue
                assert prod <= 1.0e-12
                if front.family in (1, 4) and front.sigma < 0.0:
                    dfx = fluxes(front.above, GAS).fx - fluxes(front.below, GAS).fx
                    dfy = fluxes(front.above, GAS).fy - fluxes(front.below, GAS).fy
                    assert np.max(np.abs(front.speed * dfx - dfy)) < 1.0e-10
                if front.family == 2:
                    assert abs(flow_slope(front.above, GAS)
                               - flow_slope(front.below, GAS)) < 1.0e-12

        # flow slope is invariant along the shear-contact curve itself
        for sig in (-5.0e-3, -1.0e-3, 1.0e-3, 5.0e-3):
            shifted = wave_curve(BG, 2, sig, GAS)
            assert abs(flow_slope(shifted, GAS) - flow_slope(BG, GAS)) < 1.0e-12

        # zero-scaling consistency: curves differ by at most C |sigma| tau^2
        for fam in (1, 2, 3, 4):
            for sig in (-1.0e-3, 1.0e-3):
                ref = wave_curve(BG0, fam, sig, GAS0).as_array()
                for tau in (0.1, 0.05, 0.025):
                    cur = wave_curve(BG0, fam, sig,
                                     GAS0.with_tau(tau)).as_array()
                    gap = float(np.max(np.abs(cur - ref)))
                    assert gap <= 10.0 * abs(sig) * tau * tau

        # determinism: identical configuration reproduces every byte
        rerun = run(stepped_data(GAS, amp=2.0e-4, seed=3), wedge_wall(),
                    EngineConfig(nu=8, x_end=1.0, seed=3), GAS)
        assert export_trajectory(rerun) == export_trajectory(traj)
        w = GlimmWeights.from_background(GAS)
        assert glimm_trace(rerun, w).to_csv() == glimm_trace(traj, w).to_csv()
