"""Acceptance criteria 1-9, each at its stated tolerance.

Every test appends one PASS/FAIL line to the acceptance summary printed at
the end of the pytest run, then asserts.
"""

import itertools
import time

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES
from qsl_reservoir.cli import default_grid
from qsl_reservoir.common import CommonReservoirParams, evolve, single_excitation_oracle
from qsl_reservoir.independent import (
    IndependentReservoirParams,
    closed_form_psi1,
    closed_form_psi2,
    g_exact,
    g_ode_oracle,
    two_qubit_map,
)
from qsl_reservoir.qmath import density_defects
from qsl_reservoir.qsl import build_trajectory, qsl_from_trajectory
from qsl_reservoir.states import EWLParams, ewl_state

pytestmark = pytest.mark.acceptance

WIDTH = 50.0
ALPHA = 1 / np.sqrt(2)
GRID = default_grid(WIDTH).values()
SETUPS = ("independent", "common")
FAMILIES = ("psi1", "psi2")
RS = (0.5, 1.0)
STATE_STRIDE = 10


def report(criterion, passed, detail):
    ACCEPTANCE_LINES.append(f"{'PASS' if passed else 'FAIL'}  criterion {criterion}: {detail}")
    print(ACCEPTANCE_LINES[-1])


def reservoir(setup, gamma0, n_fock=2):
    if setup == "independent":
        return IndependentReservoirParams(WIDTH, gamma0)
    return CommonReservoirParams(WIDTH, gamma0, n_fock)


def run_sweep(steps=2000, n_fock=2, setups=SETUPS):
    """tau_QSL, worst density defects and sampled states for every sweep point."""
    out = {}
    start = time.perf_counter()
    for setup, family, r in itertools.product(setups, FAMILIES, RS):
        ewl = EWLParams(family, r, ALPHA, 0.0)
        for g0 in GRID:
            traj = build_trajectory(ewl, reservoir(setup, g0, n_fock), 1.0, steps)
            res = qsl_from_trajectory(traj)
            tr, herm, lam = density_defects(traj.states)
            out[setup, family, r, g0] = dict(
                tau=res.tau_qsl,
                defects=(tr.max(), herm.max(), lam.min()),
                states=traj.states[:: STATE_STRIDE * steps // 2000],
            )
    return out, time.perf_counter() - start


@pytest.fixture(scope="session")
def sweep():
    return run_sweep()


@pytest.fixture(scope="session")
def sweep_fine():
    return run_sweep(steps=4000)[0]


@pytest.fixture(scope="session")
def sweep_n3():
    return run_sweep(n_fock=3, setups=("common",))[0]


def curve(data, setup, family, r):
    return np.array([data[setup, family, r, g0]["tau"] for g0 in GRID])


def test_c1_closed_form_equivalence():
    start = time.perf_counter()
    worst = 0.0
    ts = np.linspace(0, 1, 5)
    for g0 in (1.0, 25.0, 100.0):
        p = IndependentReservoirParams(WIDTH, g0)
        g = g_exact(ts, p)
        for family, fn in (("psi1", closed_form_psi1), ("psi2", closed_form_psi2)):
            for r in (0, 0.25, 0.5, 0.75, 1):
                for alpha in (0.2, 0.4, ALPHA, 0.8, 0.95):
                    via_map = two_qubit_map(ewl_state(EWLParams(family, r, alpha)), g)
                    worst = max(worst, np.abs(fn(ts, r, alpha, p) - via_map).max())
    elapsed = time.perf_counter() - start
    ok = worst < 1e-10 and elapsed < 5
    report(1, ok, f"max |map - closed form| = {worst:.2e} (< 1e-10), {elapsed:.2f} s (< 5 s)")
    assert ok


def test_c2_decoherence_function_dual():
    start = time.perf_counter()
    worst = 0.0
    ts = np.linspace(0, 1, 1001)
    for g0 in (1.0, 10.0, 25.0, 50.0, 100.0, 200.0):
        p = IndependentReservoirParams(WIDTH, g0)
        exact = g_exact(ts, p)
        oracle = np.array([s.g for s in g_ode_oracle(p, ts)])
        worst = max(worst, np.abs(oracle - exact).max())
    elapsed = time.perf_counter() - start
    ok = worst < 1e-8 and elapsed < 2
    report(2, ok, f"max |ODE - exact G| = {worst:.2e} (< 1e-8), {elapsed:.2f} s (< 2 s)")
    assert ok


def test_c3_state_validity(sweep, sweep_fine, sweep_n3):
    runs = [*sweep[0].values(), *sweep_fine.values(), *sweep_n3.values()]
    tr = max(r["defects"][0] for r in runs)
    herm = max(r["defects"][1] for r in runs)
    lam = min(r["defects"][2] for r in runs)
    ok = tr <= 1e-9 and herm <= 1e-10 and lam >= -1e-8
    report(3, ok, f"{len(runs)} trajectories: trace err {tr:.1e}, herm err {herm:.1e}, min eig {lam:.1e}")
    assert ok


def test_c4_subradiant_freeze():
    start = time.perf_counter()
    rho0 = ewl_state(EWLParams("psi1", 1.0, ALPHA, np.pi))
    drift, taus = 0.0, []
    for g0 in (GRID[0], WIDTH / 4, GRID[-1]):
        res = reservoir("common", g0)
        traj = build_trajectory(EWLParams("psi1", 1.0, ALPHA, np.pi), res)
        drift = max(drift, np.abs(traj.states - rho0).max())
        taus.append(qsl_from_trajectory(traj).tau_qsl)
    elapsed = time.perf_counter() - start
    ok = drift < 1e-8 and all(t == 0.0 for t in taus) and elapsed < 2
    report(4, ok, f"max |rho_S(t) - rho_S(0)| = {drift:.1e} (< 1e-8), tau_QSL = {taus}, {elapsed:.2f} s (< 2 s)")
    assert ok


def test_c5_single_excitation_oracle():
    start = time.perf_counter()
    rho0 = ewl_state(EWLParams("psi1", 1.0, ALPHA))
    plus = np.array([0, 1, 1, 0]) / np.sqrt(2)
    worst = 0.0
    for big_gamma, g0 in ((50.0, 1.0), (1.0, 10.0)):
        p = CommonReservoirParams(big_gamma, g0)
        traj = evolve(rho0, p, 1.0)
        pop = np.einsum("i,tij,j->t", plus, traj.states, plus).real
        worst = max(worst, np.abs(pop - np.abs(single_excitation_oracle(traj.times, p)) ** 2).max())
    elapsed = time.perf_counter() - start
    ok = worst < 1e-6 and elapsed < 5
    report(5, ok, f"max |<+|rho|+> - |G+|^2| = {worst:.2e} (< 1e-6), {elapsed:.2f} s (< 5 s)")
    assert ok


def test_c6_bound(sweep):
    taus = [r["tau"] for r in sweep[0].values()]
    ok = max(taus) <= 1.0 + 1e-9 and min(taus) >= 0
    report(6, ok, f"{len(taus)} points, tau_QSL in [{min(taus):.4f}, {max(taus):.4f}] (<= 1 + 1e-9)")
    assert ok


@pytest.mark.parametrize("setup, part", [("independent", "7a"), ("common", "7b")])
def test_c7_decrease_into_non_markovian(sweep, setup, part):
    boundary = reservoir(setup, 1.0).boundary
    markov = GRID <= boundary
    lines, ok = [], True
    for family, r in itertools.product(FAMILIES, RS):
        tau = curve(sweep[0], setup, family, r)
        first_markov = tau[np.argmax(markov)]
        last_non_markov = tau[np.flatnonzero(~markov)[-1]]
        ok &= bool(last_non_markov < first_markov)
        lines.append(f"{family} r={r}: {last_non_markov:.4f} < {first_markov:.4f}")
    report(part, ok, f"{setup}, tau(gamma0={GRID[-1]:g}) < tau(gamma0={GRID[0]:g}): " + "; ".join(lines))
    assert ok


def test_c7b_note_per_boundary_grid():
    # Not a pass/fail criterion: the sweep above uses one gamma0 axis for both
    # setups.  A grid centred on the common boundary instead starts at
    # Gamma/40, where tau_QSL has not yet risen from its weak-coupling zero,
    # so the 7b ordering reverses there.  Reported so the grid dependence is
    # visible in every run; the physics behind it is asserted below.
    lo, hi = WIDTH / 40, WIDTH * 2.5
    held, lines = 0, []
    for family, r in itertools.product(FAMILIES, RS):
        ewl = EWLParams(family, r, ALPHA, 0.0)
        t_lo, t_hi = (qsl_from_trajectory(build_trajectory(ewl, reservoir("common", g))).tau_qsl for g in (lo, hi))
        held += t_hi < t_lo
        lines.append(f"{family} r={r}: {t_hi:.4f} vs {t_lo:.4f}")
    ACCEPTANCE_LINES.append(
        f"NOTE  7b on grid [{lo:g}, {hi:g}]: ordering holds in {held}/4 ("
        + "; ".join(lines) + ")"
    )
    # tau_QSL vanishes with the coupling in both setups
    ewl = EWLParams("psi1", 1.0, ALPHA, 0.0)
    for setup in SETUPS:
        weak, mid = (qsl_from_trajectory(build_trajectory(ewl, reservoir(setup, g))).tau_qsl for g in (0.1, 2.5))
        assert weak < 0.1 * mid


def test_c7c_common_steeper(sweep):
    log_g = np.log(GRID)
    lines, ok = [], True
    for family, r in itertools.product(FAMILIES, RS):
        slope = {
            s: np.abs(np.diff(curve(sweep[0], s, family, r)) / np.diff(log_g)).max() for s in SETUPS
        }
        ok &= bool(slope["common"] > slope["independent"])
        lines.append(f"{family} r={r}: {slope['common']:.4f} > {slope['independent']:.4f}")
    report("7c", ok, "max |dtau/dlog gamma0| common > independent: " + "; ".join(lines))
    assert ok


def test_c8_convergence(sweep, sweep_fine, sweep_n3):
    base = sweep[0]
    doubling = max(abs(base[k]["tau"] - sweep_fine[k]["tau"]) for k in base)
    fock_tau = max(abs(base[k]["tau"] - sweep_n3[k]["tau"]) for k in sweep_n3)
    fock_state = max(np.abs(base[k]["states"] - sweep_n3[k]["states"]).max() for k in sweep_n3)
    fock = max(fock_tau, fock_state)
    ok = doubling < 1e-6 and fock < 1e-10
    report(
        8, ok,
        f"2000->4000 steps max |d tau_QSL| = {doubling:.1e} (< 1e-6); "
        f"N=2 vs N=3 max diff = {fock:.1e} (< 1e-10)",
    )
    assert ok


def test_c9_runtime(sweep):
    elapsed = sweep[1]
    ok = elapsed < 60
    report(9, ok, f"full sweep of {len(sweep[0])} trajectories in {elapsed:.1f} s (< 60 s)")
    assert ok
