"""Acceptance criteria run at their stated tolerances and time budgets.

Each test prints one PASS/FAIL line.  Run ``pytest tests/test_acceptance.py -v -s``
to see them as they run; a plain ``pytest`` run lists them in its summary.
``python3 tests/test_acceptance.py`` prints the lines alone.
"""

import math
import sys
import time

import numpy as np
import pytest

from chiralchain import continuum as cm
from chiralchain import crease, model, scaling
from chiralchain import ground_state as gs
from chiralchain.ground_state import Init, MinimizeOptions
from chiralchain.model import AngleChain

RESULTS: dict[str, bool] = {}
LINES: list[str] = []


def report(label, ok, detail, elapsed, budget):
    ok = bool(ok) and elapsed < budget
    RESULTS[label] = ok
    line = f"{'PASS' if ok else 'FAIL'}  {label}: {detail} [{elapsed:.1f}s of {budget:g}s]"
    LINES.append(line)
    print(line, flush=True)
    return ok


def check_ground_states():
    bad = []
    for n in (50, 500):
        for alpha in (0.0, 1.0, 2.0, 3.0, 3.9):
            th = model.theta_alpha(alpha)
            for init, sign in ((Init.constant_plus(), 1), (Init.constant_minus(), -1)):
                r = gs.minimize_periodic(n, alpha, MinimizeOptions(init=init))
                if not (np.allclose(r.chain.thetas, sign * th, atol=1e-8) and r.energy < 1e-10):
                    bad.append((n, alpha, sign))
        for alpha in (4.0, 5.0):
            for init in (Init.constant_plus(), Init.constant_minus()):
                r = gs.minimize_periodic(n, alpha, MinimizeOptions(init=init))
                if not (np.allclose(r.chain.thetas, 0.0, atol=1e-6) and r.energy < 1e-8):
                    bad.append((n, alpha))
    return not bad, f"{len(bad)} failing (n, alpha) runs"


def check_m_alpha_oracle():
    worst = 0.0
    ok = True
    for n in (3, 4):
        for alpha in (0.0, 2.0, 4.0):
            r = gs.brute_force_minimum(n, alpha, 41)
            gap = r.p_per_site - model.m_alpha(alpha)
            ok &= -1e-12 <= gap <= 5e-3
            worst = max(worst, gap)
    return ok, f"largest P/n - m_alpha = {worst:.3e}"


def check_crease_bounds():
    ok = True
    worst = -math.inf
    for alpha in np.linspace(0.0, 3.99, 20):
        r = crease.crease_energy(alpha)
        eps = 4.0 - alpha
        bound = eps - eps * eps / 8 + 1e-9
        hist = [e for _, e in r.window_history]
        ok &= r.converged and 0 < r.energy <= bound
        ok &= all(b <= a for a, b in zip(hist, hist[1:]))
        worst = max(worst, r.energy - bound)
    return ok, f"max C - bound = {worst:.3e} over 20 alphas"


def check_asymptotic_law():
    eps = np.geomspace(1e-3, 1e-1, 12)
    alphas = 4.0 - eps
    energies = [r.energy for r in crease.crease_sweep(alphas)]
    fit = crease.fit_asymptotics(alphas, energies)
    target = math.sqrt(2) / 3
    ok = abs(fit.exponent - 1.5) <= 0.05 and abs(fit.prefactor - target) <= 0.1 * target
    return ok, f"exponent {fit.exponent:.4f}, prefactor {fit.prefactor:.4f}"


def check_wall_counting():
    worst = 0.0
    for alpha in (2.0, 3.0):
        c = crease.crease_energy(alpha).energy
        for k in (2, 4):
            n = 400 * k
            r = gs.minimize_constrained(n, alpha, gs.alternating_pins(n, alpha, k))
            worst = max(worst, abs(r.energy - k * c) / (k * c))
    return worst <= 0.01, f"max relative deviation {worst:.2e}"


def check_regimes():
    sharp = scaling.scaled_minimum(4000, 3.996, 2)
    ferro = scaling.scaled_minimum(20, 3.999999, 2)
    alpha = scaling.matched_alpha(1000, 0.2)
    diffuse = scaling.scaled_minimum(1000, alpha, 2)
    f0 = cm.minimize_functional(cm.f0_functional(0.2), 2048, cm.alternating_continuum_pins(2)).value
    ok_s = abs(sharp.energy - 16 / 3) <= 0.07 * 16 / 3
    ok_f = ferro.energy > 2 * 16 / 3
    ok_d = abs(diffuse.energy - f0) <= 0.1 * f0
    detail = (f"sharp {sharp.energy:.4f} [{ok_s}], ferro {ferro.energy:.1f} [{ok_f}], "
              f"diffuse {diffuse.energy:.5f} vs F0 {f0:.5f} at alpha={alpha:.6f} [{ok_d}]")
    return ok_s and ok_f and ok_d, detail


def check_equivalence():
    gaps = []
    for alpha in (3.0, 2.0):
        rep = cm.equivalence_report(2000, alpha, 2)
        gaps.append(rep.max_gap if rep.converged else math.inf)
    return max(gaps) <= 0.05, f"max pairwise gap: alpha=3 {gaps[0]:.2e}, alpha=2 {gaps[1]:.2e}"


def check_interface_costs():
    errs = [abs(cm.interface_cost(cm.quartic_well()) - 8 / 3)]
    for alpha in (0.0, 1.0, 2.0, 3.0):
        th = model.theta_alpha(alpha)
        errs.append(abs(cm.interface_cost(cm.angle_well(alpha)) - 8 / 3 * th**3))
    tanh = cm.f0_functional(0.05).value(cm.tanh_profile(0.05, 0.5, 4096).values)
    ok = max(errs) <= 1e-9 and abs(tanh - 8 / 3) <= 1e-3
    return ok, f"max quadrature error {max(errs):.1e}, tanh F0 {tanh:.6f}"


def _fd_ok(f, grad, x, h):
    g = grad(x)
    fd = np.array([(f(x + h * e) - f(x - h * e)) / (2 * h) for e in np.eye(x.size)])
    return np.allclose(g, fd, rtol=1e-5, atol=1e-5 * max(1.0, np.max(np.abs(g))))


def check_properties():
    """Return (literal site-sum bound ok, everything else ok, detail)."""
    rng = np.random.default_rng(2024)
    site_bad = mid_bad = 0
    for _ in range(1000):
        n = int(rng.integers(3, 40))
        alpha = float(rng.uniform(0.0, 6.0))
        c = AngleChain(rng.uniform(-math.pi / 2, math.pi / 2, n))
        e = model.energy_angles(c, alpha)
        tol = 1e-10 * (1 + abs(e))
        site_bad += e < model.site_potential_sum(c, alpha) - tol
        mid_bad += e < model.potential_lower_bound(c, alpha) - tol

    trip = 0.0
    for _ in range(100):
        c = AngleChain(rng.uniform(-math.pi / 2, math.pi / 2, int(rng.integers(3, 40))))
        trip = max(trip, np.max(np.abs(model.angles_from_spins(model.spins_from_angles(c)).thetas - c.thetas)))

    cov = 0.0
    for _ in range(100):
        alpha = float(rng.uniform(0.0, 3.99))
        n = int(rng.integers(3, 5000))
        th = model.theta_alpha(alpha)
        t = rng.uniform(-1.0, 1.0, 128) * th
        t[-1] = t[0]
        H = cm.mm_energy_H(cm.GridFunction(t), n, alpha, 0.3)
        G = cm.mm_energy_G(cm.GridFunction(t / th), n, alpha, 0.3)
        cov = max(cov, abs(H - model.mu_alpha(alpha) * G) / max(abs(H), 1e-300))

    x = rng.uniform(-1.4, 1.4, 16)
    grads = [
        _fd_ok(lambda t: model.chain_energy(t, 2.7), lambda t: model.chain_gradient(t, 2.7), x, 1e-6),
        _fd_ok(lambda t: model.chain_energy(t, 5.0), lambda t: model.chain_gradient(t, 5.0), x, 1e-6),
        _fd_ok(lambda t: crease.window_energy(t, 3.2), lambda t: crease.window_gradient(t, 3.2), x, 1e-6),
    ]
    for fn in (cm.f0_functional(0.1), cm.g_functional(50, 3.0, 0.42), cm.h_functional(50, 2.0, 1.0)):
        v = rng.uniform(-1.2, 1.2, 64) * fn.well
        grads.append(_fd_ok(fn.value, fn.gradient, v, 1e-6 * fn.well))

    rest = mid_bad == 0 and trip <= 1e-12 and cov <= 1e-10 and all(grads)
    detail = (f"site-sum E >= sum W(theta^i) violated on {site_bad}/1000, "
              f"midpoint bound violated on {mid_bad}/1000, round trip {trip:.1e}, "
              f"H - mu*G {cov:.1e}, gradients {sum(grads)}/{len(grads)}")
    return site_bad == 0, rest, detail


CRITERIA = [
    ("1 ground states", check_ground_states, 10),
    ("2 m_alpha oracle", check_m_alpha_oracle, 60),
    ("3 crease bounds", check_crease_bounds, 120),
    ("4 asymptotic law", check_asymptotic_law, 300),
    ("5 wall counting", check_wall_counting, 120),
    ("6 regime trichotomy", check_regimes, 300),
    ("7 Modica-Mortola equivalence", check_equivalence, 180),
    ("8 interface costs", check_interface_costs, 5),
]


@pytest.mark.parametrize("label,check,budget", CRITERIA, ids=[c[0] for c in CRITERIA])
def test_criterion(label, check, budget):
    t0 = time.perf_counter()
    ok, detail = check()
    assert report(label, ok, detail, time.perf_counter() - t0, budget), detail


@pytest.fixture(scope="module")
def property_suite():
    t0 = time.perf_counter()
    literal, rest, detail = check_properties()
    elapsed = time.perf_counter() - t0
    report("9 property suites", literal and rest, detail, elapsed, 30)
    return literal, rest, elapsed


def test_property_suites_except_site_sum(property_suite):
    _, rest, elapsed = property_suite
    assert rest and elapsed < 30


@pytest.mark.xfail(strict=True, reason=(
    "the site-sum form of the lower bound is false: a kinked triple near the quarter turn "
    "lowers E below sum_i W(theta^i); the midpoint form holds"))
def test_property_site_sum_lower_bound(property_suite):
    literal, _, _ = property_suite
    assert literal


if __name__ == "__main__":
    for label, check, budget in CRITERIA:
        t0 = time.perf_counter()
        report(label, *check(), time.perf_counter() - t0, budget)
    t0 = time.perf_counter()
    literal, rest, detail = check_properties()
    report("9 property suites", literal and rest, detail, time.perf_counter() - t0, 30)
    sys.exit(0 if all(RESULTS.values()) else 1)
