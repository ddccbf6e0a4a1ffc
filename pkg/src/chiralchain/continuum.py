"""Modica-Mortola type functionals on a uniform grid of [0, 1].

Every functional here has the shape

    a * int P(v) dt + b * int v'^2 dt,

with the potential integrated by the trapezoidal rule and the Dirichlet term
by forward differences.  The class |v(0)| = |v(1)| is handled by tying the
last node to +-v(0); with an even number of sign changes the tie is v(1) = v(0).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import integrate, sparse

from . import model
from .errors import InvalidArgument, SingularPoint
from .ground_state import MinimizeOptions
from .optimize import minimize_box

MIN_GRID = 64
DEFAULT_GRID = 2048


@dataclass(frozen=True)
class GridFunction:
    values: np.ndarray
    periodic_modulus: bool = True

    def __post_init__(self):
        v = np.array(self.values, dtype=float).reshape(-1)
        if v.size < MIN_GRID:
            raise InvalidArgument(f"grid needs at least {MIN_GRID} nodes, got {v.size}")
        if not np.all(np.isfinite(v)):
            raise InvalidArgument("grid values must be finite")
        if self.periodic_modulus and abs(abs(v[0]) - abs(v[-1])) > 1e-9:
            raise InvalidArgument(f"|v(0)| = {abs(v[0])} differs from |v(1)| = {abs(v[-1])}")
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    @property
    def m(self) -> int:
        return self.values.size

    @property
    def h(self) -> float:
        return 1.0 / (self.m - 1)

    @property
    def t(self) -> np.ndarray:
        return np.linspace(0.0, 1.0, self.m)

    @classmethod
    def sample(cls, fn: Callable[[np.ndarray], np.ndarray], m: int) -> "GridFunction":
        return cls(fn(np.linspace(0.0, 1.0, m)))


def grid_nodes(m: int) -> np.ndarray:
    return np.linspace(0.0, 1.0, m)


# ---------------------------------------------------------------------------
# functionals


@dataclass(frozen=True)
class Functional:
    """a * trap(P(v)) + b * sum(((v[j+1]-v[j])/h)^2 h) with P(s) = (s^2 - w^2)^2."""

    potential_weight: float
    gradient_weight: float
    well: float = 1.0
    label: str = ""

    @property
    def interface_width(self) -> float:
        """Length scale sqrt(b/a)/w of the optimal tanh wall."""
        return math.sqrt(self.gradient_weight / self.potential_weight) / self.well

    def value(self, v: np.ndarray) -> float:
        h = 1.0 / (v.size - 1)
        p = (v * v - self.well**2) ** 2
        pot = h * (np.sum(p) - 0.5 * (p[0] + p[-1]))
        dv = np.diff(v)
        return float(self.potential_weight * pot + self.gradient_weight * np.sum(dv * dv) / h)

    def gradient(self, v: np.ndarray) -> np.ndarray:
        h = 1.0 / (v.size - 1)
        w = np.full(v.size, h)
        w[[0, -1]] = 0.5 * h
        g = self.potential_weight * w * 4.0 * v * (v * v - self.well**2)
        dv = np.diff(v)
        c = 2.0 * self.gradient_weight / h
        g[:-1] -= c * dv
        g[1:] += c * dv
        return g

    def hessian(self, v: np.ndarray) -> sparse.csc_matrix:
        m = v.size
        h = 1.0 / (m - 1)
        w = np.full(m, h)
        w[[0, -1]] = 0.5 * h
        c = 2.0 * self.gradient_weight / h
        d = self.potential_weight * w * (12.0 * v * v - 4.0 * self.well**2)
        lap = np.full(m, 2.0 * c)
        lap[[0, -1]] = c
        off = np.full(m - 1, -c)
        return sparse.diags([d + lap, off, off], [0, 1, -1], format="csc")


def f0_functional(l: float) -> Functional:
    if not l > 0:
        raise InvalidArgument(f"l must be positive, got {l}")
    return Functional(1.0 / l, l, 1.0, f"F0(l={l:g})")


def _mm_constants(n: int, alpha: float, crease_energy: float) -> model.DerivedConstants:
    alpha = model.check_alpha(alpha)
    if alpha >= 4.0:
        raise SingularPoint(f"alpha={alpha}: mu_alpha = 0; alpha = 4 is the singular point")
    if not crease_energy > 0:
        raise InvalidArgument("C_alpha must be positive")
    return model.derive_constants(alpha, n).with_crease(crease_energy)


def g_functional(n: int, alpha: float, crease_energy: float) -> Functional:
    k = _mm_constants(n, alpha, crease_energy)
    lam, M, mu = k.lambda_n_alpha, k.M_alpha, k.mu_alpha
    return Functional(lam / mu, M * M / (lam * mu), 1.0, f"G(n={n}, alpha={alpha:g})")


def h_functional(n: int, alpha: float, crease_energy: float) -> Functional:
    k = _mm_constants(n, alpha, crease_energy)
    lam, M, th = k.lambda_n_alpha, k.M_alpha, k.theta_alpha
    return Functional(lam / th**4, M * M / (lam * th * th), th, f"H(n={n}, alpha={alpha:g})")


def _values(v) -> np.ndarray:
    if not isinstance(v, GridFunction):
        v = GridFunction(v)
    elif not v.periodic_modulus:
        raise InvalidArgument("functional is defined on the class |v(0)| = |v(1)|")
    return v.values


def continuum_F0(v, l: float) -> float:
    """(1/l) int (v^2-1)^2 + l int v'^2."""
    return f0_functional(l).value(_values(v))


def mm_energy_G(v, n: int, alpha: float, crease_energy: float) -> float:
    return g_functional(n, alpha, crease_energy).value(_values(v))


def mm_energy_H(theta, n: int, alpha: float, crease_energy: float) -> float:
    return h_functional(n, alpha, crease_energy).value(_values(theta))


# ---------------------------------------------------------------------------
# interface cost


@dataclass(frozen=True)
class DoubleWellSpec:
    well_left: float
    well_right: float
    evaluator: Callable[[float], float]

    def __post_init__(self):
        a, b = self.well_left, self.well_right
        if b < a:
            raise InvalidArgument("need well_left <= well_right")
        if abs(self.evaluator(a)) > 1e-12 or abs(self.evaluator(b)) > 1e-12:
            raise InvalidArgument("W must vanish at both wells")
        if b > a:
            inner = np.linspace(a, b, 65)[1:-1]
            if min(self.evaluator(float(s)) for s in inner) <= 0:
                raise InvalidArgument("W must be positive strictly between the wells")


def quartic_well(well: float = 1.0) -> DoubleWellSpec:
    """(s^2 - w^2)^2 with wells at +-w."""
    w2 = well * well
    return DoubleWellSpec(-well, well, lambda s: (s * s - w2) ** 2)


def angle_well(alpha: float) -> DoubleWellSpec:
    return quartic_well(model.theta_alpha(alpha))


def interface_cost(spec: DoubleWellSpec) -> float:
    """c_W = 2 int_a^b sqrt(W(s)) ds by adaptive quadrature."""
    a, b = spec.well_left, spec.well_right
    if b == a:
        return 0.0

    def root(s):
        w = spec.evaluator(s)
        if w < 0:
            raise InvalidArgument(f"W({s}) = {w} < 0")
        return math.sqrt(w)

    val, _ = integrate.quad(root, a, b, epsabs=1e-12, epsrel=1e-12, limit=200)
    return 2.0 * val


# ---------------------------------------------------------------------------
# minimization


@dataclass
class FunctionalMinimum:
    function: GridFunction
    value: float
    converged: bool
    iterations: int
    endpoint_sign: int
    pins: tuple[tuple[float, float], ...] = field(default_factory=tuple)


def alternating_continuum_pins(k: int, first: float = -1.0, well: float = 1.0):
    """k pins at t = (2j+1)/(2k) with alternating signs, starting from `first`."""
    if k < 0 or k % 2:
        raise InvalidArgument(f"jump count must be even and >= 0, got {k}")
    s = 1.0 if first >= 0 else -1.0
    return tuple(((2 * j + 1) / (2 * k), s * well * (-1) ** j) for j in range(k))


def tanh_profile(l: float, center: float, grid: int) -> GridFunction:
    if grid < MIN_GRID:
        raise InvalidArgument(f"grid needs at least {MIN_GRID} nodes")
    if not l > 0 or not 0 < center < 1:
        raise InvalidArgument("need l > 0 and center in (0, 1)")
    t = grid_nodes(grid)
    return GridFunction(np.tanh((t - center) / l), periodic_modulus=False)


def pinned_tanh_start(grid: int, pins, width: float, well: float = 1.0) -> np.ndarray:
    """Periodic profile with tanh walls midway between opposite-sign pins."""
    t = grid_nodes(grid)
    if not pins:
        return np.full(grid, well)
    pos = np.array([p for p, _ in pins])
    val = np.array([v for _, v in pins])
    order = np.argsort(pos)
    pos, val = pos[order], val[order]
    walls = []
    for a in range(pos.size):
        b = (a + 1) % pos.size
        if np.sign(val[a]) != np.sign(val[b]):
            gap = (pos[b] - pos[a]) % 1.0
            walls.append((pos[a] + 0.5 * gap) % 1.0)
    if not walls:
        return np.full(grid, math.copysign(well, val[0]))
    walls = np.sort(np.array(walls))
    d = np.abs(t[None, :] - walls[:, None])
    d = np.minimum(d, 1.0 - d)
    mag = np.min(np.tanh(d / width), axis=0)
    crossings = np.searchsorted(walls, t, side="right")
    first = int(np.searchsorted(walls, pos[0], side="right"))
    s0 = math.copysign(1.0, val[0]) * (1 if first % 2 == 0 else -1)
    return well * s0 * np.where(crossings % 2 == 0, 1.0, -1.0) * mag


def _tie_matrix(m: int, sign: int) -> sparse.csc_matrix:
    """Maps the m-1 free nodes to all m nodes with v[m-1] = sign * v[0]."""
    rows = np.r_[np.arange(m - 1), m - 1]
    cols = np.r_[np.arange(m - 1), 0]
    vals = np.r_[np.ones(m - 1), float(sign)]
    return sparse.csc_matrix((vals, (rows, cols)), shape=(m, m - 1))


def _minimize_tied(fn: Functional, grid: int, pins, sign: int, opts: MinimizeOptions,
                   start: np.ndarray) -> FunctionalMinimum:
    P = _tie_matrix(grid, sign)
    PT = P.T.tocsc()
    x0 = start[:-1].copy()
    free = np.ones(grid - 1, bool)
    h = 1.0 / (grid - 1)
    for p, val in pins:
        j = int(round(p / h))
        if j == grid - 1:
            j, val = 0, sign * val
        x0[j] = val
        free[j] = False

    def full(x):
        return np.append(x, sign * x[0])

    res = minimize_box(
        lambda x: fn.value(full(x)),
        lambda x: PT @ fn.gradient(full(x)),
        x0,
        -np.inf,
        np.inf,
        free=free,
        hess=lambda x: (PT @ fn.hessian(full(x)) @ P).tocsc(),
        max_iterations=opts.max_iterations,
        gradient_tolerance=opts.gradient_tolerance,
        step=opts.step,
    )
    v = full(res.x)
    return FunctionalMinimum(
        function=GridFunction(v),
        value=fn.value(v),
        converged=res.converged,
        iterations=res.iterations,
        endpoint_sign=sign,
        pins=tuple(pins),
    )


def minimize_functional(
    fn: Functional,
    grid: int = DEFAULT_GRID,
    pins=(),
    opts: MinimizeOptions | None = None,
    *,
    endpoint_sign: int | None = 1,
    start: str | np.ndarray = "tanh",
    seed: int = 0,
) -> FunctionalMinimum:
    """Minimize a grid functional over |v(0)| = |v(1)| with nodes pinned.

    pins are (t, value) pairs snapped to the nearest node.  endpoint_sign = +1
    (default, the closure of a periodic chain) enforces v(1) = v(0), i.e. an
    even number of sign changes; -1 enforces v(1) = -v(0); None searches the
    whole class and keeps the lower value.  Two opposite pins force two
    interfaces only under +1: with -1 a single interface suffices.  start is "tanh",
    "random" (tanh start plus uniform noise of amplitude 0.5*well, seeded) or
    an explicit array of grid values.
    """
    if grid < MIN_GRID:
        raise InvalidArgument(f"grid needs at least {MIN_GRID} nodes, got {grid}")
    opts = opts or MinimizeOptions()
    pins = tuple((float(p), float(v)) for p, v in pins)
    for p, _ in pins:
        if not 0.0 <= p <= 1.0:
            raise InvalidArgument(f"pin position {p} outside [0, 1]")
    signs = (1, -1) if endpoint_sign is None else (int(endpoint_sign),)
    best = None
    for sign in signs:
        if isinstance(start, str):
            x = pinned_tanh_start(grid, pins, max(fn.interface_width, 2.0 / grid), fn.well)
            if sign == -1 and not pins:
                x = fn.well * np.tanh((grid_nodes(grid) - 0.5) / max(fn.interface_width, 2.0 / grid))
            if start == "random":
                rng = np.random.default_rng(seed)
                x = x + rng.uniform(-0.5, 0.5, grid) * fn.well
            elif start != "tanh":
                raise InvalidArgument(f"unknown start {start!r}")
        else:
            x = np.array(start, dtype=float)
            if x.size != grid:
                raise InvalidArgument("explicit start must have one value per node")
        out = _minimize_tied(fn, grid, pins, sign, opts, x)
        if best is None or out.value < best.value:
            best = out
    return best


def resolving_grid(fn: Functional, nodes_per_width: float = 16.0, minimum: int = DEFAULT_GRID) -> int:
    """Smallest 2^j + 1 >= minimum whose spacing resolves the interface width."""
    need = max(minimum, math.ceil(nodes_per_width / fn.interface_width) + 1)
    return (1 << max(6, math.ceil(math.log2(need - 1)))) + 1


# ---------------------------------------------------------------------------
# discrete versus continuum


@dataclass
class EquivalenceReport:
    n: int
    alpha: float
    jumps: int
    crease_energy: float
    discrete: float
    continuum_G: float
    prediction: float
    grid: int
    converged: bool

    def gaps(self) -> dict[str, float]:
        """Pairwise relative gaps |x - y| / max(|x|, |y|); zero when both vanish."""
        vals = {"discrete": self.discrete, "G": self.continuum_G, "prediction": self.prediction}
        out = {}
        names = list(vals)
        for i, a in enumerate(names):
            for b in names[i + 1:]:
                x, y = vals[a], vals[b]
                scale = max(abs(x), abs(y))
                out[f"{a}-{b}"] = 0.0 if scale == 0 else abs(x - y) / scale
        return out

    @property
    def max_gap(self) -> float:
        return max(self.gaps().values())


def equivalence_report(n: int, alpha: float, jumps: int, opts: MinimizeOptions | None = None,
                       *, crease_energy: float | None = None, grid: int | None = None) -> EquivalenceReport:
    """Scaled discrete minimum, G minimum and (8 C_alpha/(sqrt(2) eps^1.5)) k side by side.

    G is minimized on resolving_grid unless grid is given: its walls have
    width sqrt(b/a), far below 1/2048 once n is in the thousands.
    """
    from . import crease, scaling

    alpha = model.check_alpha(alpha)
    if alpha >= 4.0:
        raise SingularPoint(f"alpha={alpha}: alpha = 4 is the singular point of the equivalence")
    k = scaling._check_jumps(jumps)
    if crease_energy is None:
        crease_energy = crease.crease_energy(alpha).energy
    fn = g_functional(n, alpha, crease_energy)
    grid = grid or resolving_grid(fn)
    if k == 0:
        return EquivalenceReport(n, alpha, 0, crease_energy, 0.0, 0.0, 0.0, grid, True)
    disc = scaling.scaled_minimum(n, alpha, k, opts)
    cont = minimize_functional(fn, grid, alternating_continuum_pins(k), opts)
    prediction = crease_energy * k / model.mu_alpha(alpha)
    return EquivalenceReport(n, alpha, k, crease_energy, disc.energy, cont.value, prediction,
                             grid, disc.converged and cont.converged)
