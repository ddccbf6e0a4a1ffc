import math

import numpy as np
import pytest

from chiralchain import crease, model, scaling
from chiralchain.continuum import alternating_continuum_pins, f0_functional, minimize_functional
from chiralchain.errors import InvalidArgument
from chiralchain.model import AngleChain


def test_order_parameter_wells():
    th = model.theta_alpha(2.5)
    assert np.all(scaling.to_order_parameter(AngleChain.constant(th, 8), 2.5).values == 1.0)
    assert np.all(scaling.to_order_parameter(AngleChain.constant(-th, 8), 2.5).values == -1.0)


@pytest.mark.parametrize("seed", range(5))
def test_order_parameter_round_trip(seed):
    rng = np.random.default_rng(seed)
    c = AngleChain(rng.uniform(-math.pi / 2, math.pi / 2, 20))
    back = scaling.from_order_parameter(scaling.to_order_parameter(c, 3.7))
    assert np.allclose(back.thetas, c.thetas, atol=1e-12, rtol=0)


def test_order_parameter_rejects_alpha_four():
    with pytest.raises(InvalidArgument):
        scaling.to_order_parameter(AngleChain.constant(0.0, 5), 4.0)


def test_l_value_examples():
    assert scaling.l_value(100, 3.96) == pytest.approx(1.7678e-2, rel=1e-4)
    assert scaling.l_value(10**9, 3.0) < 1e-9
    assert scaling.l_value(10, 3.99999) > 10
    with pytest.raises(InvalidArgument):
        scaling.l_value(10, 4.0)


def test_l_value_scaling_laws():
    assert scaling.l_value(200, 3.5) == scaling.l_value(100, 3.5) / 2
    assert scaling.l_value(100, 4 - 0.5 / 4) == pytest.approx(2 * scaling.l_value(100, 3.5), rel=1e-14)


def test_matched_alpha_inverts_functional_l():
    a = scaling.matched_alpha(1000, 0.2)
    assert scaling.functional_l(1000, a) == pytest.approx(0.2, rel=1e-9)
    assert scaling.functional_l(1000, a) == 4 * scaling.l_value(1000, a)


def test_regime_limit_examples():
    assert scaling.regime_limit_energy(0.0, 2) == 16 / 3
    assert scaling.regime_limit_energy(math.inf, 0) == 0.0
    assert scaling.regime_limit_energy(math.inf, 2) == math.inf
    assert abs(scaling.regime_limit_energy(0.05, 2, 1024) - 16 / 3) <= 0.05 * 16 / 3
    with pytest.raises(InvalidArgument):
        scaling.regime_limit_energy(0.1, 3)


def test_regime_limit_decreases_towards_sharp():
    vals = [scaling.regime_limit_energy(l, 2, 2048) for l in (0.2, 0.1, 0.05, 0.025)]
    assert all(b <= a + 1e-9 for a, b in zip(vals, vals[1:]))
    assert min(vals) >= 16 / 3 - 1e-3


def test_min_scaled_energy_zero_without_jumps():
    assert abs(scaling.min_scaled_energy(50, 3.5, 0)) < 1e-8


def test_min_scaled_sharp_example():
    assert abs(scaling.min_scaled_energy(4000, 3.996, 2) - 16 / 3) <= 0.07 * 16 / 3


def test_min_scaled_fixed_alpha():
    c3 = crease.crease_energy(3.0).energy
    pred = 2 * 8 * c3 / math.sqrt(2)
    assert abs(scaling.min_scaled_energy(2000, 3.0, 2) - pred) <= 0.02 * pred


def test_discrete_matches_f0_at_functional_l():
    n, L = 400, 0.2
    alpha = scaling.matched_alpha(n, L)
    disc = scaling.scaled_minimum(n, alpha, 2)
    cont = minimize_functional(f0_functional(L), 2048, alternating_continuum_pins(2)).value
    assert disc.converged
    assert disc.energy == pytest.approx(cont, rel=1e-3)


def test_classify_examples():
    assert scaling.classify_regime(5.30, 1e-3, 2) == "sharp"
    assert scaling.classify_regime(25.0, 0.3, 2) == "ferro"
    diffuse = scaling.regime_limit_energy(0.2, 2, 1024)
    assert scaling.classify_regime(1.01 * diffuse, 0.2, 2) == "diffuse"
    assert scaling.classify_regime(0.99 * diffuse, 0.2, 2) == "diffuse"


def test_classify_needs_jumps():
    with pytest.raises(InvalidArgument):
        scaling.classify_regime(1.0, 0.1, 0)


def test_phase_diagram_sides_and_monotone_rows():
    ns = [10, 30, 100, 300, 1000]
    alphas = [3.0, 3.9, 3.99, 3.999]
    rows = scaling.phase_diagram(ns, alphas)
    assert len(rows) == len(ns) * len(alphas)
    assert len({(p.n, p.alpha) for p in rows}) == len(rows)
    order = {"ferro": 0, "diffuse": 1, "sharp": 2}
    for a in alphas:
        labels = [order[p.regime_label] for p in rows if p.alpha == a]
        assert labels == sorted(labels)
    for p in rows:
        assert p.l_value == pytest.approx(scaling.l_value(p.n, p.alpha), rel=1e-12)
        if 1 / p.n > 10 * math.sqrt(p.epsilon):
            assert p.regime_label == "ferro"
        if 1 / p.n < 0.01 * math.sqrt(p.epsilon):
            assert p.regime_label in ("sharp", "diffuse")


def test_phase_diagram_records_errors_and_validates():
    rows = scaling.phase_diagram([10], [3.0, 4.5])
    assert rows[0].error is None and rows[1].error is not None and rows[1].regime_label is None
    with pytest.raises(InvalidArgument):
        scaling.phase_diagram([10], [])


def test_phase_diagram_workers_do_not_change_rows():
    a = scaling.phase_diagram([20, 80], [3.9, 3.99])
    b = scaling.phase_diagram([20, 80], [3.9, 3.99], workers=2)
    assert [(p.n, p.alpha, p.measured, p.regime_label) for p in a] == \
           [(p.n, p.alpha, p.measured, p.regime_label) for p in b]
