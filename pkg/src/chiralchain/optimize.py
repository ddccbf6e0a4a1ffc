"""Box-constrained descent shared by the lattice and continuum solvers.

Projected line search with Armijo backtracking on the box [lower, upper].
Search directions are projected-Newton steps on the inactive variables when a
(sparse) Hessian is supplied, shifted towards the identity until it is
positive definite; otherwise Barzilai-Borwein scaled gradient steps.  Accepted
iterates never increase the objective by more than a few ulps of its value.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import sparse
from scipy.sparse import linalg as spla


@dataclass(frozen=True)
class StepControl:
    initial_step: float = 1.0
    shrink: float = 0.5
    sufficient_decrease: float = 1e-4
    max_backtracks: int = 60


@dataclass
class BoxResult:
    x: np.ndarray
    value: float
    iterations: int
    converged: bool
    gradient_norm: float
    trace: list[float] = field(default_factory=list)


def projected_gradient(x, g, lower, upper, free):
    """Components of g that can still decrease the objective inside the box."""
    pg = np.where(free, g, 0.0)
    at_lo = (x <= lower) & (pg > 0)
    at_hi = (x >= upper) & (pg < 0)
    pg[at_lo | at_hi] = 0.0
    return pg


def _newton_direction(hess, g, working):
    idx = np.flatnonzero(working)
    if idx.size == 0:
        return None
    H = sparse.csc_matrix(hess)[idx][:, idx]
    scale = max(float(np.max(np.abs(H.diagonal()))), 1e-300)
    eye = sparse.identity(idx.size, format="csc")
    shift = 0.0
    for _ in range(16):
        try:
            lu = spla.splu(
                (H + shift * eye).tocsc(),
                permc_spec="NATURAL",
                diag_pivot_thresh=0.0,
                options={"SymmetricMode": True},
            )
        except RuntimeError:
            lu = None
        if lu is not None and np.all(lu.U.diagonal() > 0):
            d = np.zeros_like(g)
            d[idx] = -lu.solve(g[idx])
            if np.all(np.isfinite(d)):
                return d
        shift = scale * 1e-8 if shift == 0.0 else shift * 10.0
    return None


def minimize_box(
    fun: Callable[[np.ndarray], float],
    grad: Callable[[np.ndarray], np.ndarray],
    x0,
    lower,
    upper,
    *,
    free=None,
    hess: Callable[[np.ndarray], sparse.spmatrix] | None = None,
    gradient_floor: Callable[[np.ndarray], np.ndarray] | None = None,
    max_iterations: int = 10000,
    gradient_tolerance: float = 1e-10,
    step: StepControl = StepControl(),
    record_trace: bool = False,
) -> BoxResult:
    """Minimize fun over the box; only entries with free=True move.

    gradient_floor, if given, returns a per-component estimate of the rounding
    error in grad(x); components below it count as stationary, since no
    tolerance tighter than the accuracy of the gradient can be certified.
    """
    x = np.clip(np.array(x0, dtype=float), lower, upper)
    n = x.size
    lower = np.broadcast_to(np.asarray(lower, dtype=float), (n,))
    upper = np.broadcast_to(np.asarray(upper, dtype=float), (n,))
    free = np.ones(n, bool) if free is None else np.asarray(free, bool)

    f = fun(x)
    g = grad(x)
    trace = [f] if record_trace else []
    bb = 1.0
    x_prev = g_prev = None
    it = 0
    def residual(x, g):
        pg = projected_gradient(x, g, lower, upper, free)
        if gradient_floor is not None:
            pg = np.where(np.abs(pg) <= gradient_floor(x), 0.0, pg)
        return pg, (float(np.max(np.abs(pg))) if n else 0.0)

    pg, gnorm = residual(x, g)

    while gnorm > gradient_tolerance and it < max_iterations:
        it += 1
        working = free & (pg != 0.0)
        d = _newton_direction(hess(x), g, working) if hess is not None else None
        if x_prev is not None:
            s, y = x - x_prev, g - g_prev
            sy = float(s @ y)
            if sy > 0:
                bb = float(s @ s) / sy
        directions = [d] if d is not None else []
        directions.append(np.where(working, -bb * g, 0.0))

        noise = 16.0 * np.finfo(float).eps * abs(f)
        accepted = False
        for d in directions:
            t = step.initial_step
            for _ in range(step.max_backtracks):
                x_new = np.where(working, np.clip(x + t * d, lower, upper), x)
                dx = x_new - x
                f_new = fun(x_new)
                decrease = float(g @ dx)
                if f_new <= f + step.sufficient_decrease * decrease:
                    accepted = True
                    break
                # objective flat to rounding: accept a step that shrinks the
                # projected gradient without raising f beyond a few ulps
                if f_new <= f + noise and decrease < 0:
                    if residual(x_new, grad(x_new))[1] < gnorm:
                        accepted = True
                        break
                t *= step.shrink
            if accepted:
                break
        if not accepted:
            break

        x_prev, g_prev = x, g
        x, f = x_new, f_new
        g = grad(x)
        pg, gnorm = residual(x, g)
        if record_trace:
            trace.append(f)

    return BoxResult(
        x=x,
        value=float(f),
        iterations=it,
        converged=gnorm <= gradient_tolerance,
        gradient_norm=gnorm,
        trace=trace,
    )
