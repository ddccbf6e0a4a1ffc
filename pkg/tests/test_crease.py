import math
import warnings

import numpy as np
import pytest
from scipy import optimize

from chiralchain import crease, model
from chiralchain.errors import InvalidArgument
from chiralchain.ground_state import MinimizeOptions


def lbfgs_window(alpha, N):
    """Independent solve of the clamped window with scipy's L-BFGS-B."""
    th = model.theta_alpha(alpha)
    x0 = crease.tanh_profile(alpha, N)[1:-1]

    def full(x):
        return np.r_[-th, x, th]

    res = optimize.minimize(
        lambda x: crease.window_energy(full(x), alpha),
        x0,
        jac=lambda x: crease.window_gradient(full(x), alpha)[1:-1],
        method="L-BFGS-B",
        bounds=[(-math.pi / 2, math.pi / 2)] * x0.size,
        options={"ftol": 1e-15, "gtol": 1e-12, "maxiter": 20000},
    )
    return res.fun


def test_sign_profile_energy_alpha_zero():
    t = np.array([-1, -1, 0, 1, 1]) * math.pi / 2
    t[2] = -math.pi / 2
    assert crease.window_energy(t, 0.0) == pytest.approx(2.0, abs=1e-12)


def test_window_from_sign_profile_below_rough_bound():
    th = model.theta_alpha(2.0)
    sign = np.r_[np.full(2, -th), -th, np.full(2, th)]
    res = crease.solve_crease_window(2.0, 2, initial=sign)
    assert res.energy <= crease.crease_upper_bound(2.0) + 1e-12


def test_window_saturates():
    a = crease.solve_crease_window(2.0, 40).energy
    b = crease.solve_crease_window(2.0, 80).energy
    assert a == pytest.approx(b, abs=1e-10)


@pytest.mark.parametrize("alpha", [0.5, 2.0, 3.0, 3.9])
def test_window_matches_independent_solver(alpha):
    N = 64
    ours = crease.solve_crease_window(alpha, N)
    assert ours.converged
    assert ours.energy == pytest.approx(lbfgs_window(alpha, N), rel=1e-7)


def test_window_stationarity():
    res = crease.solve_crease_window(3.0, 32)
    g = crease.window_gradient(res.profile.thetas, 3.0)[1:-1]
    free = np.abs(res.profile.thetas[1:-1]) < math.pi / 2
    assert np.max(np.abs(g[free])) <= MinimizeOptions().gradient_tolerance


@pytest.mark.parametrize("alpha", [0.0, 1.5, 3.7])
def test_window_gradient_finite_differences(alpha):
    rng = np.random.default_rng(1)
    t = rng.uniform(-1.5, 1.5, 11)
    g = crease.window_gradient(t, alpha)
    h = 1e-6
    fd = np.array([(crease.window_energy(t + h * e, alpha) - crease.window_energy(t - h * e, alpha)) / (2 * h)
                   for e in np.eye(t.size)])
    assert np.allclose(g, fd, rtol=1e-5, atol=1e-8)


def test_crease_alpha_two():
    res = crease.crease_energy(2.0)
    assert res.converged
    assert 0 < res.energy <= 1.5


def test_crease_near_transition():
    res = crease.crease_energy(3.96)
    pred = crease.crease_asymptotic_prediction(3.96)
    assert pred == pytest.approx(3.771e-3, rel=1e-3)
    assert abs(res.energy - pred) <= 0.1 * pred


def test_crease_alpha_zero_and_reflection():
    a = crease.crease_energy(0.0)
    b = crease.crease_energy(0.0, orientation=-1)
    assert 0 < a.energy <= 2.0
    assert a.energy == pytest.approx(b.energy, abs=1e-9)


@pytest.mark.parametrize("alpha", [1.0, 3.0])
def test_reflection_maps_profiles(alpha):
    a = crease.crease_energy(alpha)
    b = crease.crease_energy(alpha, orientation=-1)
    assert a.energy == pytest.approx(b.energy, abs=1e-9)
    # either theta -> -theta or i -> -i alone swaps the boundary wells
    assert np.allclose(a.profile.thetas, -b.profile.thetas, atol=1e-9)
    assert crease.window_energy(a.profile.thetas[::-1], alpha) == pytest.approx(b.energy, abs=1e-12)


@pytest.mark.parametrize("alpha", np.linspace(0.0, 3.99, 8).tolist())
def test_crease_bounds_and_history(alpha):
    res = crease.crease_energy(alpha)
    assert res.converged
    assert 0 < res.energy <= crease.crease_upper_bound(alpha) + 1e-9
    hist = [e for _, e in res.window_history]
    assert all(b <= a + 1e-12 for a, b in zip(hist, hist[1:]))
    assert res.window_history[0][0] == crease.initial_half_width(alpha)


def test_profile_monotone_observed():
    for alpha in (2.0, 3.0, 3.9):
        prof = crease.crease_energy(alpha).profile
        if not prof.is_monotone():
            warnings.warn(f"crease profile at alpha={alpha} is not monotone")


def test_small_alpha_profile_staggers():
    # observed: for small alpha the optimal wall alternates site by site
    prof = crease.crease_energy(0.5).profile
    assert not prof.is_monotone()


def test_upper_bound_examples():
    assert crease.crease_upper_bound(0.0) == 2.0
    assert crease.crease_upper_bound(4.0) == 0.0
    assert crease.crease_upper_bound(2.0) == 1.5
    for a in np.linspace(0, 4, 9):
        assert crease.crease_upper_bound(a) == pytest.approx(2 - a * a / 8, abs=1e-15)


def test_asymptotic_prediction_examples():
    assert crease.crease_asymptotic_prediction(4.0) == 0.0
    assert crease.crease_asymptotic_prediction(3.9) == pytest.approx(1.4907e-2, rel=1e-4)


def test_asymptotic_ratio_tends_to_one():
    ratios = [crease.crease_energy(a).energy / crease.crease_asymptotic_prediction(a) for a in (3.9, 3.99)]
    assert abs(ratios[1] - 1) < abs(ratios[0] - 1) < 0.02


def test_rejects_alpha_four_and_small_window():
    with pytest.raises(InvalidArgument, match="singular point"):
        crease.crease_energy(4.0)
    with pytest.raises(InvalidArgument):
        crease.solve_crease_window(2.0, 1)


def test_continuity_scan_decreasing():
    table = crease.continuity_scan(np.arange(0.0, 3.51, 0.5))
    assert np.all(np.diff(table.energies) < 0)
    assert table.converged.all()
    steps = np.diff(table.alphas)
    assert np.all(np.abs(np.diff(table.energies)) <= table.lipschitz * steps
                  + 2 * crease.DEFAULT_REL_TOL * table.energies.max() + 1e-15)


def test_continuity_refinement():
    fine = crease.continuity_scan([3.0, 3.001, 3.002])
    coarse = crease.continuity_scan([3.0, 3.01, 3.02])
    assert np.max(np.abs(np.diff(fine.energies))) < np.max(np.abs(np.diff(coarse.energies)))


def test_continuity_single_point_and_validation():
    assert len(crease.continuity_scan([2.0]).rows()) == 1
    with pytest.raises(InvalidArgument):
        crease.continuity_scan([2.0, 1.0])


def test_sweep_preserves_order_with_workers():
    alphas = [3.0, 1.0, 2.0]
    serial = [r.energy for r in crease.crease_sweep(alphas)]
    parallel = [r.energy for r in crease.crease_sweep(alphas, workers=2)]
    assert serial == parallel


def test_fit_recovers_exact_law():
    eps = np.geomspace(1e-3, 1e-1, 7)
    fit = crease.fit_asymptotics(4 - eps, math.sqrt(2) / 3 * eps**1.5)
    assert fit.exponent == pytest.approx(1.5, abs=1e-12)
    assert fit.prefactor == pytest.approx(math.sqrt(2) / 3, abs=1e-12)
    assert fit.r_squared == pytest.approx(1.0, abs=1e-12)


def test_fit_validation():
    with pytest.raises(InvalidArgument):
        crease.fit_asymptotics([3.9, 3.91, 3.92, 3.93], [1, 1, 1, 1])
    with pytest.raises(InvalidArgument):
        crease.fit_asymptotics([3.9, 3.91, 3.92, 3.93, 3.94], [1, 1, 0, 1, 1])
