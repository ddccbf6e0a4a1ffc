"""Minimization of the periodic chain energy, with and without pinned sites."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import model
from .errors import CostGuard, InvalidArgument
from .model import HALF_PI, AngleChain
from .optimize import StepControl, minimize_box


@dataclass(frozen=True)
class Init:
    """Starting configuration for a chain minimization.

    kind is one of "constant-plus", "constant-minus", "random", "tanh-wall",
    "explicit".
    """

    kind: str
    seed: int | None = None
    walls: tuple[float, ...] = ()
    chain: AngleChain | None = None

    @classmethod
    def constant_plus(cls) -> "Init":
        return cls("constant-plus")

    @classmethod
    def constant_minus(cls) -> "Init":
        return cls("constant-minus")

    @classmethod
    def random(cls, seed: int) -> "Init":
        return cls("random", seed=int(seed))

    @classmethod
    def tanh_wall(cls, walls) -> "Init":
        return cls("tanh-wall", walls=tuple(float(w) for w in walls))

    @classmethod
    def explicit(cls, chain: AngleChain) -> "Init":
        return cls("explicit", chain=chain)


@dataclass(frozen=True)
class MinimizeOptions:
    max_iterations: int = 10000
    gradient_tolerance: float = 1e-10
    init: Init | None = None
    step: StepControl = field(default_factory=StepControl)

    def __post_init__(self):
        if self.max_iterations < 1:
            raise InvalidArgument("max_iterations must be positive")
        if not self.gradient_tolerance > 0:
            raise InvalidArgument("gradient_tolerance must be positive")


@dataclass(frozen=True)
class PinSet:
    pins: tuple[tuple[int, float], ...] = ()

    def __post_init__(self):
        pins = tuple((int(i), float(a)) for i, a in self.pins)
        idx = [i for i, _ in pins]
        if len(set(idx)) != len(idx):
            raise InvalidArgument(f"pinned indices must be distinct: {idx}")
        for i, a in pins:
            if not abs(a) <= HALF_PI:
                raise InvalidArgument(f"pinned angle {a} at site {i} outside [-pi/2, pi/2]")
        object.__setattr__(self, "pins", tuple(sorted(pins)))

    def validate(self, n: int) -> None:
        for i, _ in self.pins:
            if not 0 <= i < n:
                raise InvalidArgument(f"pinned index {i} outside [0, {n})")

    @property
    def indices(self) -> np.ndarray:
        return np.array([i for i, _ in self.pins], dtype=int)

    @property
    def angles(self) -> np.ndarray:
        return np.array([a for _, a in self.pins], dtype=float)

    def __len__(self) -> int:
        return len(self.pins)


def alternating_pins(n: int, alpha: float, k: int) -> PinSet:
    """k pins at sites (2j+1)n/(2k), alternating +theta_alpha, -theta_alpha."""
    if k < 0 or k % 2:
        raise InvalidArgument(f"jump count must be even and >= 0, got {k}")
    th = model.theta_alpha(alpha)
    return PinSet(tuple(
        (int(round((2 * j + 1) * n / (2 * k))) % n, th if j % 2 == 0 else -th)
        for j in range(k)
    ))


@dataclass
class ChainMinimum:
    chain: AngleChain
    energy: float
    iterations: int
    converged: bool
    gradient_norm: float
    seed: int | None = None
    trace: list[float] = field(default_factory=list)


def _cyclic_distance(i: np.ndarray, w: float, n: int) -> np.ndarray:
    d = np.abs(i - w) % n
    return np.minimum(d, n - d)


def tanh_wall_chain(n: int, alpha: float, walls, sign: int = 1) -> np.ndarray:
    """theta_alpha-valued profile with tanh walls at the given site positions.

    sign is the chirality on [0, walls[0]); it alternates across every wall.
    """
    walls = np.asarray(walls, dtype=float)
    if walls.size and (np.any(np.diff(walls) <= 0) or walls[0] < 0 or walls[-1] >= n):
        raise InvalidArgument(f"wall positions must increase strictly within [0, {n})")
    th = model.theta_alpha(alpha)
    i = np.arange(n, dtype=float)
    if walls.size == 0:
        return np.full(n, sign * th)
    width = math.sqrt(max(4.0 - alpha, 0.0)) / math.sqrt(2.0)
    mag = np.min(np.abs(np.tanh(width * np.array([_cyclic_distance(i, w, n) for w in walls]))), axis=0)
    crossings = np.searchsorted(walls, i, side="right")
    signs = sign * np.where(crossings % 2 == 0, 1.0, -1.0)
    return np.clip(th * signs * mag, -HALF_PI, HALF_PI)


def _initial(n: int, alpha: float, init: Init | None, pins: PinSet) -> tuple[np.ndarray, int | None]:
    th = model.theta_alpha(alpha)
    if init is None:
        if len(pins) >= 2:
            idx, ang = pins.indices, pins.angles
            walls = []
            for a in range(len(idx)):
                b = (a + 1) % len(idx)
                if np.sign(ang[a]) != np.sign(ang[b]):
                    gap = (idx[b] - idx[a]) % n
                    walls.append(float((idx[a] + gap // 2) % n))
            walls = sorted(walls)
            if walls:
                first = int(np.searchsorted(walls, idx[0], side="right"))
                s = 1 if ang[0] >= 0 else -1
                sign = s if first % 2 == 0 else -s
                return tanh_wall_chain(n, alpha, walls, sign), None
        sign = -1.0 if len(pins) and pins.angles[0] < 0 else 1.0
        return np.full(n, sign * th), None
    if init.kind == "constant-plus":
        return np.full(n, th), None
    if init.kind == "constant-minus":
        return np.full(n, -th), None
    if init.kind == "random":
        rng = np.random.default_rng(init.seed)
        return rng.uniform(-HALF_PI, HALF_PI, n), init.seed
    if init.kind == "tanh-wall":
        return tanh_wall_chain(n, alpha, init.walls), None
    if init.kind == "explicit":
        if init.chain is None or init.chain.n != n:
            raise InvalidArgument("explicit init must be an AngleChain of length n")
        return np.array(init.chain.thetas), None
    raise InvalidArgument(f"unknown init kind {init.kind!r}")


def _solve(n, alpha, pins: PinSet, opts: MinimizeOptions, scale: float, record_trace: bool):
    n = model.check_sites(n)
    alpha = model.check_alpha(alpha)
    pins.validate(n)
    x0, seed = _initial(n, alpha, opts.init, pins)
    free = np.ones(n, bool)
    if len(pins):
        x0[pins.indices] = pins.angles
        free[pins.indices] = False

    res = minimize_box(
        lambda t: scale * model.chain_energy(t, alpha),
        lambda t: scale * model.chain_gradient(t, alpha),
        x0,
        -HALF_PI,
        HALF_PI,
        free=free,
        hess=lambda t: scale * model.chain_hessian(t, alpha),
        gradient_floor=lambda t: scale * model.chain_gradient_floor(t, alpha),
        max_iterations=opts.max_iterations,
        gradient_tolerance=opts.gradient_tolerance,
        step=opts.step,
        record_trace=record_trace,
    )
    chain = AngleChain(res.x)
    return ChainMinimum(
        chain=chain,
        energy=model.chain_energy(chain.thetas, alpha),
        iterations=res.iterations,
        converged=res.converged,
        gradient_norm=res.gradient_norm,
        seed=seed,
        trace=[v / scale for v in res.trace],
    )


def minimize_periodic(n: int, alpha: float, opts: MinimizeOptions | None = None,
                      *, record_trace: bool = False) -> ChainMinimum:
    """Projected-gradient minimization of E_n^alpha over J^n (cyclic chain)."""
    return _solve(n, alpha, PinSet(), opts or MinimizeOptions(), 1.0, record_trace)


def minimize_constrained(n: int, alpha: float, pins: PinSet, opts: MinimizeOptions | None = None,
                         *, objective_scale: float = 1.0, record_trace: bool = False) -> ChainMinimum:
    """As minimize_periodic with the pinned sites held fixed.

    objective_scale multiplies the objective seen by the solver (and hence the
    meaning of gradient_tolerance); the returned energy is always E_n^alpha.
    """
    if not objective_scale > 0:
        raise InvalidArgument("objective_scale must be positive")
    return _solve(n, alpha, pins, opts or MinimizeOptions(), float(objective_scale), record_trace)


# ---------------------------------------------------------------------------
# grid oracle


@dataclass
class GridMinimum:
    chain: AngleChain
    energy: float
    p_min: float

    @property
    def p_per_site(self) -> float:
        return self.p_min / self.chain.n


MAX_ORACLE_SITES = 8
MAX_ORACLE_GRID = 41


def brute_force_minimum(n: int, alpha: float, grid_points: int) -> GridMinimum:
    """Exact minimum of P_n^alpha over all grid_points**n periodic grid chains.

    The grid is uniform on J with both endpoints and 0.  The cycle minimum is
    found with a min-plus transfer-matrix recursion over the bond matrix, which
    visits every chain implicitly; P is evaluated from its literal form without
    reference to m_alpha.
    """
    n = model.check_sites(n)
    alpha = model.check_alpha(alpha)
    if n > MAX_ORACLE_SITES or grid_points > MAX_ORACLE_GRID:
        raise CostGuard(f"refusing n={n}, grid={grid_points}: limits are "
                        f"n <= {MAX_ORACLE_SITES}, grid <= {MAX_ORACLE_GRID}")
    if grid_points < 3 or grid_points % 2 == 0:
        raise InvalidArgument("grid_points must be odd and >= 3 so that 0 is on the grid")
    g = np.linspace(-HALF_PI, HALF_PI, grid_points)
    g[grid_points // 2] = 0.0
    a, b = np.meshgrid(g, g, indexing="ij")
    bond = np.cos(a + b) - 0.5 * alpha * (np.cos(a) + np.cos(b))

    # cost[s, c]: best path from start s to current c; back[k][s, c]: argmin predecessor
    cost = bond.copy()
    back = []
    for _ in range(n - 2):
        cand = cost[:, :, None] + bond[None, :, :]
        arg = np.argmin(cand, axis=1)
        back.append(arg)
        cost = np.take_along_axis(cand, arg[:, None, :], axis=1)[:, 0, :]
    total = cost + bond.T
    s, c = np.unravel_index(int(np.argmin(total)), total.shape)
    path = [c]
    for arg in reversed(back):
        path.append(arg[s, path[-1]])
    path.append(s)
    idx = np.array(path[::-1])
    chain = AngleChain(g[idx])
    p_min = float(total[s, c])
    return GridMinimum(chain=chain, energy=model.energy_angles(chain, alpha), p_min=p_min)


# ---------------------------------------------------------------------------
# chirality


@dataclass(frozen=True)
class ChiralityProfile:
    signs: np.ndarray
    jump_count: int
    jump_positions: tuple[int, ...]
    zero_chirality: bool = False


def chirality_profile(chain: AngleChain, dead_zone: float = 1e-6) -> ChiralityProfile:
    """Per-site chirality with dead-zone sites inheriting the preceding sign."""
    t = chain.thetas
    n = t.size
    decided = np.abs(t) > dead_zone
    if not decided.any():
        return ChiralityProfile(np.full(n, -1, dtype=int), 0, (), zero_chirality=True)
    start = int(np.argmax(decided))
    signs = np.empty(n, dtype=int)
    current = 1 if t[start] > 0 else -1
    for k in range(n):
        i = (start + k) % n
        if decided[i]:
            current = 1 if t[i] > 0 else -1
        signs[i] = current
    jumps = tuple(int(i) for i in np.flatnonzero(signs != np.roll(signs, 1)))
    return ChiralityProfile(signs, len(jumps), jumps)
