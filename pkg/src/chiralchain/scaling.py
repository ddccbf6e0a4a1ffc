"""Near-critical order parameter, scaled energies and the three limit regimes.

Two length parameters appear here.  l_value(n, alpha) = sqrt(2)/(4 n sqrt(eps))
is the regime parameter of the limit theorem: it separates the regimes (0,
finite, infinite) and is what the phase diagram records.  Expanding the
chain energy around alpha = 4 with theta = theta_alpha v gives, per bond,

    (eps^2 / 8) (v^2 - 1)^2 + (eps / 4) (v^{i+1} - v^i)^2,

so the scaled energy E / mu_alpha is a discretization of
(1/L) int (v^2 - 1)^2 + L int v'^2 with L = sqrt(2)/(n sqrt(eps)) =
4 l_value.  functional_l returns that L; it is the value to hand to the
continuum functional when a finite-n chain is compared with it.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import model
from .continuum import (
    MIN_GRID,
    alternating_continuum_pins,
    f0_functional,
    minimize_functional,
)
from .errors import InvalidArgument
from .ground_state import MinimizeOptions, alternating_pins, minimize_constrained, minimize_periodic
from .model import AngleChain

SHARP_INTERFACE_COST = 8.0 / 3.0
FERRO_FACTOR = 2.0
NODES_PER_WIDTH = 16.0
DISTINCT_REL = 1e-3
REGIMES = ("sharp", "diffuse", "ferro")


def _helimagnetic(alpha: float) -> float:
    alpha = model.check_alpha(alpha)
    if alpha >= 4.0:
        raise InvalidArgument(
            f"alpha={alpha}: theta_alpha vanishes for alpha >= 4 (alpha = 4 is the singular point)"
        )
    return alpha


def _check_jumps(k: int) -> int:
    if int(k) != k or k < 0 or k % 2:
        raise InvalidArgument(f"jump count must be an even integer >= 0 on a periodic chain, got {k}")
    return int(k)


@dataclass(frozen=True)
class OrderParameterChain:
    values: np.ndarray
    alpha: float

    def __post_init__(self):
        alpha = _helimagnetic(self.alpha)
        v = np.array(self.values, dtype=float).reshape(-1)
        bound = model.HALF_PI / model.theta_alpha(alpha)
        if np.any(np.abs(v) > bound * (1 + 1e-15)):
            raise InvalidArgument(f"|v| must stay below (pi/2)/theta_alpha = {bound}")
        v.flags.writeable = False
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "alpha", alpha)

    @property
    def n(self) -> int:
        return self.values.size


def to_order_parameter(chain: AngleChain, alpha: float) -> OrderParameterChain:
    """v^i = theta^i / theta_alpha, so the two wells sit at +-1."""
    th = model.theta_alpha(_helimagnetic(alpha))
    return OrderParameterChain(chain.thetas / th, alpha)


def from_order_parameter(v: OrderParameterChain) -> AngleChain:
    th = model.theta_alpha(v.alpha)
    return AngleChain(np.clip(v.values * th, -model.HALF_PI, model.HALF_PI))


def l_value(n: int, alpha: float) -> float:
    """Regime parameter sqrt(2)/(4 n sqrt(4 - alpha))."""
    n = model.check_sites(n)
    alpha = _helimagnetic(alpha)
    return math.sqrt(2.0) / (4.0 * n * math.sqrt(4.0 - alpha))


def functional_l(n: int, alpha: float) -> float:
    """F0 parameter matched by the scaled chain energy: 4 * l_value(n, alpha)."""
    return 4.0 * l_value(n, alpha)


def matched_alpha(n: int, l: float) -> float:
    """alpha at which a chain of n sites has functional_l(n, alpha) == l."""
    n = model.check_sites(n)
    if not l > 0 or math.isinf(l):
        raise InvalidArgument("l must be positive and finite")
    return 4.0 - (math.sqrt(2.0) / (n * l)) ** 2


def regime_limit_energy(l: float, jumps: int, grid: int = 1024,
                        opts: MinimizeOptions | None = None) -> float:
    """Minimum of the limit functional with `jumps` sign changes.

    l = 0 gives (8/3) k, l = inf gives 0 for k = 0 and inf otherwise, and
    finite l gives the pinned continuum minimum on `grid` nodes.
    """
    k = _check_jumps(jumps)
    l = float(l)
    if not l >= 0:
        raise InvalidArgument(f"l must be >= 0, got {l}")
    if l == 0:
        return SHARP_INTERFACE_COST * k
    if math.isinf(l):
        return 0.0 if k == 0 else math.inf
    if grid < MIN_GRID:
        raise InvalidArgument(f"grid needs at least {MIN_GRID} nodes, got {grid}")
    res = minimize_functional(f0_functional(l), grid, alternating_continuum_pins(k), opts)
    return res.value


@dataclass
class ScaledMinimum:
    energy: float
    converged: bool
    iterations: int
    chain: AngleChain


def scaled_minimum(n: int, alpha: float, jumps: int,
                   opts: MinimizeOptions | None = None) -> ScaledMinimum:
    """E/mu_alpha at the constrained minimum with `jumps` alternating pins."""
    alpha = _helimagnetic(alpha)
    k = _check_jumps(jumps)
    mu = model.mu_alpha(alpha)
    if k == 0:
        res = minimize_periodic(n, alpha, opts)
    else:
        res = minimize_constrained(n, alpha, alternating_pins(n, alpha, k), opts,
                                   objective_scale=1.0 / mu)
    return ScaledMinimum(res.energy / mu, res.converged, res.iterations, res.chain)


def min_scaled_energy(n: int, alpha: float, jumps: int, opts: MinimizeOptions | None = None) -> float:
    return scaled_minimum(n, alpha, jumps, opts).energy


def classify_regime(measured: float, l: float, jumps: int, grid: int = 1024) -> str:
    """Nearest of the sharp and diffuse predictions, or ferro past 2x sharp.

    l is the F0 parameter (functional_l for a chain).  When the grid cannot
    resolve an interface of width l, the diffuse prediction is replaced by its
    l -> 0 value, which is the sharp one.  A diffuse prediction within
    DISTINCT_REL of sharp cannot be told apart from it and counts as sharp.
    """
    k = _check_jumps(jumps)
    if k < 2:
        raise InvalidArgument("classification needs at least 2 jumps")
    sharp = SHARP_INTERFACE_COST * k
    if measured > FERRO_FACTOR * sharp:
        return "ferro"
    if l * (grid - 1) < NODES_PER_WIDTH:
        diffuse = sharp
    else:
        diffuse = regime_limit_energy(l, k, grid)
    if abs(diffuse - sharp) <= DISTINCT_REL * sharp:
        return "sharp"
    return "diffuse" if abs(measured - diffuse) < abs(measured - sharp) else "sharp"


@dataclass
class RegimePoint:
    n: int
    alpha: float
    epsilon: float
    l_value: float
    regime_label: str | None
    measured: float = math.nan
    converged: bool = False
    error: str | None = None


def _regime_point(args) -> RegimePoint:
    n, alpha, k, opts, grid = args
    try:
        l = l_value(n, alpha)
        res = scaled_minimum(n, alpha, k, opts)
        label = classify_regime(res.energy, 4.0 * l, k, grid)
        return RegimePoint(n, alpha, 4.0 - alpha, l, label, res.energy, res.converged)
    except Exception as exc:  # recorded per point; the sweep continues
        eps = 4.0 - alpha if isinstance(alpha, float) else math.nan
        return RegimePoint(n, alpha, eps, math.nan, None, error=f"{type(exc).__name__}: {exc}")


def phase_diagram(n_grid, alpha_grid, jumps: int = 2, opts: MinimizeOptions | None = None,
                  *, grid: int = 1024, workers: int | None = None) -> list[RegimePoint]:
    """One RegimePoint per (n, alpha), rows ordered by n then alpha."""
    n_grid = [int(n) for n in n_grid]
    alpha_grid = [float(a) for a in alpha_grid]
    if not n_grid or not alpha_grid:
        raise InvalidArgument("n_grid and alpha_grid must be nonempty")
    k = _check_jumps(jumps)
    if k < 2:
        raise InvalidArgument("the phase diagram needs at least 2 jumps")
    jobs = [(n, a, k, opts, grid) for n in n_grid for a in alpha_grid]
    if workers is None or workers <= 1 or len(jobs) <= 1:
        return [_regime_point(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_regime_point, jobs))
