"""Chirality-wall (crease) energy from the discrete optimal-profile problem.

A window of half-width N holds sites -N..N; sites with |i| >= N sit in the
wells, so every bond outside the window contributes exactly zero and the
finite sum is the full energy of the clamped profile.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import sparse, stats

from . import model
from .errors import InvalidArgument
from .ground_state import MinimizeOptions
from .model import HALF_PI
from .optimize import minimize_box

DEFAULT_REL_TOL = 1e-8
MAX_HALF_WIDTH = 1 << 16


def _check_helimagnetic(alpha: float) -> float:
    alpha = model.check_alpha(alpha)
    if alpha >= 4.0:
        raise InvalidArgument(
            f"alpha={alpha}: no chirality wall for alpha >= 4 (alpha = 4 is the singular point)"
        )
    return alpha


@dataclass(frozen=True)
class CreaseProfile:
    half_width: int
    thetas: np.ndarray
    alpha: float
    orientation: int = 1

    def __post_init__(self):
        t = np.asarray(self.thetas, dtype=float)
        if t.size != 2 * self.half_width + 1:
            raise InvalidArgument("profile must hold 2N+1 sites")
        if np.any(np.abs(t) > HALF_PI):
            raise InvalidArgument("profile leaves [-pi/2, pi/2]")
        th = model.theta_alpha(self.alpha)
        if t[0] != -self.orientation * th or t[-1] != self.orientation * th:
            raise InvalidArgument("profile ends must sit in the clamped wells")

    @property
    def sites(self) -> np.ndarray:
        return np.arange(-self.half_width, self.half_width + 1)

    def is_monotone(self, tol: float = 1e-9) -> bool:
        d = np.diff(self.thetas) * self.orientation
        return bool(np.all(d >= -tol))


@dataclass
class CreaseResult:
    profile: CreaseProfile
    energy: float
    converged: bool
    window_history: list[tuple[int, float]] = field(default_factory=list)
    iterations: int = 0
    gradient_norm: float = 0.0

    @property
    def alpha(self) -> float:
        return self.profile.alpha

    @property
    def half_width(self) -> int:
        return self.profile.half_width


def window_energy(thetas, alpha: float) -> float:
    """Sum of bond terms over consecutive sites of a clamped window."""
    t = np.asarray(thetas, dtype=float)
    return float(np.sum(model.bond_energy(t[:-1], t[1:], alpha)))


def window_gradient(t: np.ndarray, alpha: float) -> np.ndarray:
    da, db = model.bond_gradient(t[:-1], t[1:], alpha)
    g = np.zeros_like(t)
    g[:-1] += da
    g[1:] += db
    return g


def _window_floor(t: np.ndarray, alpha: float) -> np.ndarray:
    da, db = model.bond_gradient(t[:-1], t[1:], alpha)
    size = np.zeros_like(t)
    size[:-1] += np.abs(da)
    size[1:] += np.abs(db)
    return 64.0 * np.finfo(float).eps * size


def window_hessian(t: np.ndarray, alpha: float) -> sparse.csc_matrix:
    c = np.cos(t[:-1] + t[1:])
    d = np.zeros_like(t)
    d[:-1] += -c + 0.5 * alpha * np.cos(t[:-1])
    d[1:] += -c + 0.5 * alpha * np.cos(t[1:])
    return sparse.diags([d, -c, -c], [0, 1, -1], format="csc")


def initial_half_width(alpha: float) -> int:
    return max(8, math.ceil(4.0 / math.sqrt(4.0 - alpha)))


def tanh_profile(alpha: float, N: int, orientation: int = 1) -> np.ndarray:
    th = model.theta_alpha(alpha)
    i = np.arange(-N, N + 1)
    t = orientation * th * np.tanh(i * math.sqrt(4.0 - alpha) / math.sqrt(2.0))
    t[0], t[-1] = -orientation * th, orientation * th
    return np.clip(t, -HALF_PI, HALF_PI)


def solve_crease_window(
    alpha: float,
    N: int,
    opts: MinimizeOptions | None = None,
    *,
    orientation: int = 1,
    initial=None,
) -> CreaseResult:
    """Minimize the clamped-window energy over the interior sites -N+1..N-1.

    orientation +1 connects -theta_alpha (left) to +theta_alpha (right); -1 is
    the reflected problem.
    """
    alpha = _check_helimagnetic(alpha)
    if int(N) != N or N < 2:
        raise InvalidArgument(f"half-width must be an integer >= 2, got {N}")
    if orientation not in (1, -1):
        raise InvalidArgument("orientation must be +1 or -1")
    N = int(N)
    opts = opts or MinimizeOptions()
    th = model.theta_alpha(alpha)
    if initial is None:
        x0 = tanh_profile(alpha, N, orientation)
    else:
        x0 = np.array(initial, dtype=float)
        if x0.size != 2 * N + 1:
            raise InvalidArgument("initial profile must hold 2N+1 sites")
    x0[0], x0[-1] = -orientation * th, orientation * th
    free = np.ones(2 * N + 1, bool)
    free[[0, -1]] = False

    res = minimize_box(
        lambda t: window_energy(t, alpha),
        lambda t: window_gradient(t, alpha),
        x0,
        -HALF_PI,
        HALF_PI,
        free=free,
        hess=lambda t: window_hessian(t, alpha),
        gradient_floor=lambda t: _window_floor(t, alpha),
        max_iterations=opts.max_iterations,
        gradient_tolerance=opts.gradient_tolerance,
        step=opts.step,
    )
    profile = CreaseProfile(N, res.x, alpha, orientation)
    energy = window_energy(res.x, alpha)
    return CreaseResult(
        profile=profile,
        energy=energy,
        converged=res.converged,
        window_history=[(N, energy)],
        iterations=res.iterations,
        gradient_norm=res.gradient_norm,
    )


def crease_energy(
    alpha: float,
    rel_tol: float = DEFAULT_REL_TOL,
    opts: MinimizeOptions | None = None,
    *,
    orientation: int = 1,
    max_half_width: int = MAX_HALF_WIDTH,
) -> CreaseResult:
    """C_alpha by window doubling until successive values agree to rel_tol.

    Each larger window is warm-started from the previous optimum padded with
    well values, which is admissible for the larger window at equal energy,
    so the recorded history cannot increase.
    """
    alpha = _check_helimagnetic(alpha)
    if not rel_tol > 0:
        raise InvalidArgument("rel_tol must be positive")
    th = model.theta_alpha(alpha)
    N = initial_half_width(alpha)
    res = solve_crease_window(alpha, N, opts, orientation=orientation)
    history = [(N, res.energy)]
    iterations = res.iterations
    all_converged = res.converged
    saturated = False
    while 2 * N <= max_half_width:
        pad = np.full(N, th)
        start = np.concatenate([-orientation * pad, res.profile.thetas, orientation * pad])
        nxt = solve_crease_window(alpha, 2 * N, opts, orientation=orientation, initial=start)
        history.append((2 * N, nxt.energy))
        iterations += nxt.iterations
        all_converged = all_converged and nxt.converged
        done = abs(nxt.energy - res.energy) <= rel_tol * res.energy
        res, N = nxt, 2 * N
        if done:
            saturated = True
            break
    return CreaseResult(
        profile=res.profile,
        energy=res.energy,
        converged=saturated and all_converged,
        window_history=history,
        iterations=iterations,
        gradient_norm=res.gradient_norm,
    )


def crease_upper_bound(alpha: float) -> float:
    """Energy of the pure sign profile, (4-alpha) - (4-alpha)^2/8 = 2 - alpha^2/8."""
    alpha = model.check_alpha(alpha)
    if alpha > 4.0:
        raise InvalidArgument(f"bound stated for alpha in [0, 4], got {alpha}")
    eps = 4.0 - alpha
    return eps - eps * eps / 8.0


def crease_asymptotic_prediction(alpha: float) -> float:
    """(sqrt(2)/3) (4-alpha)^(3/2), the leading behaviour as alpha -> 4-."""
    alpha = model.check_alpha(alpha)
    if alpha > 4.0:
        raise InvalidArgument(f"prediction stated for alpha in [0, 4], got {alpha}")
    return math.sqrt(2.0) / 3.0 * (4.0 - alpha) ** 1.5


@dataclass
class ContinuityTable:
    alphas: np.ndarray
    energies: np.ndarray
    converged: np.ndarray
    lipschitz: float
    results: list[CreaseResult] = field(repr=False, default_factory=list)

    def rows(self) -> list[tuple[float, float]]:
        return list(zip(self.alphas.tolist(), self.energies.tolist()))


def _crease_point(args):
    alpha, rel_tol, opts = args
    return crease_energy(alpha, rel_tol, opts)


def crease_sweep(alphas, rel_tol: float = DEFAULT_REL_TOL, opts=None, workers: int | None = None):
    """crease_energy at each alpha, keyed by input order regardless of completion order."""
    jobs = [(float(a), rel_tol, opts) for a in alphas]
    if workers is None or workers <= 1 or len(jobs) <= 1:
        return [_crease_point(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_crease_point, jobs))


def continuity_scan(alphas, rel_tol: float = DEFAULT_REL_TOL, opts=None,
                    workers: int | None = None) -> ContinuityTable:
    a = np.asarray(list(alphas), dtype=float)
    if a.size == 0:
        raise InvalidArgument("empty alpha grid")
    if a.size > 1 and np.any(np.diff(a) <= 0):
        raise InvalidArgument("alpha grid must be strictly increasing")
    for x in a:
        _check_helimagnetic(x)
    results = crease_sweep(a, rel_tol, opts, workers)
    c = np.array([r.energy for r in results])
    lip = float(np.max(np.abs(np.diff(c)) / np.diff(a))) if a.size > 1 else 0.0
    return ContinuityTable(a, c, np.array([r.converged for r in results]), lip, results)


@dataclass(frozen=True)
class AsymptoticFit:
    exponent: float
    prefactor: float
    r_squared: float
    n_points: int


def fit_asymptotics(alphas, energies) -> AsymptoticFit:
    """Least-squares line through (log(4-alpha), log C)."""
    a = np.asarray(list(alphas), dtype=float)
    c = np.asarray(list(energies), dtype=float)
    if a.shape != c.shape or a.size < 5:
        raise InvalidArgument(f"need at least 5 (alpha, C) pairs, got {a.size}")
    if np.any(c <= 0) or np.any(a >= 4.0):
        raise InvalidArgument("need C > 0 and alpha < 4 at every point")
    fit = stats.linregress(np.log(4.0 - a), np.log(c))
    return AsymptoticFit(
        exponent=float(fit.slope),
        prefactor=float(math.exp(fit.intercept)),
        r_squared=float(fit.rvalue**2),
        n_points=int(a.size),
    )
