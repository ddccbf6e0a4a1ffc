"""Closed-form quantities of the F-AF chain: energies, potential, constants.

Angles live in J = [-pi/2, pi/2]; indices wrap modulo n.  Bond energies are
evaluated in the form

    b(a, c) = W(mid) + 2*alpha*cos(mid)*sin(d/4)**2,   mid = (a+c)/2, d = a-c,

which is algebraically identical to cos(a+c) - alpha/2 (cos a + cos c) - m_alpha
but is a sum of nonnegative terms, so energies of order (4-alpha)^(3/2) keep
full relative precision near the transition point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy import sparse

from .errors import DomainViolation, InvalidArgument, ScalingUndefined

HALF_PI = 0.5 * math.pi
UNIT_TOL = 1e-9


def check_alpha(alpha: float) -> float:
    alpha = float(alpha)
    if not math.isfinite(alpha) or alpha < 0:
        raise InvalidArgument(f"alpha must be a finite number >= 0, got {alpha}")
    return alpha


def theta_alpha(alpha: float) -> float:
    """Ground-state angle: arccos(alpha/4) on [0, 4], zero beyond."""
    alpha = check_alpha(alpha)
    return math.acos(alpha / 4.0) if alpha <= 4.0 else 0.0


def m_alpha(alpha: float) -> float:
    """Minimal energy per site of P_n^alpha."""
    alpha = check_alpha(alpha)
    if alpha <= 4.0:
        return -(alpha * alpha / 8.0 + 1.0)
    return -alpha + 1.0


def mu_alpha(alpha: float) -> float:
    alpha = check_alpha(alpha)
    if alpha >= 4.0:
        return 0.0
    return math.sqrt(2.0) * (4.0 - alpha) ** 1.5 / 8.0


@dataclass(frozen=True)
class DerivedConstants:
    alpha: float
    n: int
    theta_alpha: float
    m_alpha: float
    mu_alpha: float
    lambda_n_alpha: float
    M_alpha: float | None = None

    @property
    def lattice_spacing(self) -> float:
        return 1.0 / self.n

    def with_crease(self, crease_energy: float) -> "DerivedConstants":
        """Fill M_alpha = 3 C_alpha / 8 once the crease energy is known."""
        return replace(self, M_alpha=3.0 * float(crease_energy) / 8.0)


def derive_constants(alpha: float, n: int) -> DerivedConstants:
    alpha = check_alpha(alpha)
    n = check_sites(n)
    th = theta_alpha(alpha)
    return DerivedConstants(
        alpha=alpha,
        n=n,
        theta_alpha=th,
        m_alpha=m_alpha(alpha),
        mu_alpha=mu_alpha(alpha),
        lambda_n_alpha=2.0 * n * th**4,
    )


def check_sites(n: int) -> int:
    if int(n) != n or n < 3:
        raise InvalidArgument(f"need an integer n >= 3, got {n}")
    return int(n)


# ---------------------------------------------------------------------------
# chains


@dataclass(frozen=True)
class AngleChain:
    """Periodic configuration of oriented angles, theta^{i+n} = theta^i."""

    thetas: np.ndarray

    def __post_init__(self):
        t = np.array(self.thetas, dtype=float).reshape(-1)
        if t.size < 3:
            raise InvalidArgument(f"need at least 3 angles, got {t.size}")
        if not np.all(np.isfinite(t)):
            raise InvalidArgument("angles must be finite")
        bad = np.flatnonzero(np.abs(t) > HALF_PI)
        if bad.size:
            raise DomainViolation(int(bad[0]), float(t[bad[0]]))
        t.flags.writeable = False
        object.__setattr__(self, "thetas", t)

    @property
    def n(self) -> int:
        return self.thetas.size

    @classmethod
    def constant(cls, value: float, n: int) -> "AngleChain":
        return cls(np.full(check_sites(n), float(value)))

    def __len__(self) -> int:
        return self.n


@dataclass(frozen=True)
class SpinChain:
    """Planar unit spins u^0..u^{n-1}.

    The wrap is u^{i+n} = R(twist) u^i.  twist = 0 is plain cyclic indexing;
    a nonzero twist keeps every scalar product (u^i, u^{i+k}) periodic, which
    is all the energy ever reads.
    """

    spins: np.ndarray
    twist: float = 0.0

    def __post_init__(self):
        s = np.array(self.spins, dtype=float)
        if s.ndim != 2 or s.shape[1] != 2 or s.shape[0] < 3:
            raise InvalidArgument(f"spins must have shape (n>=3, 2), got {s.shape}")
        norms = np.hypot(s[:, 0], s[:, 1])
        if np.any(np.abs(norms - 1.0) > 1e-12):
            i = int(np.argmax(np.abs(norms - 1.0)))
            raise InvalidArgument(f"spin {i} has norm {norms[i]!r}, expected 1")
        s.flags.writeable = False
        object.__setattr__(self, "spins", s)
        object.__setattr__(self, "twist", float(self.twist))

    @property
    def n(self) -> int:
        return self.spins.shape[0]

    @property
    def closure_defect(self) -> float:
        """|twist| wrapped into [0, pi]; zero when the chain closes on the circle."""
        return abs(_wrap(self.twist))

    def extended(self, extra: int = 2) -> np.ndarray:
        """Spins u^0..u^{n+extra-1} with the twisted wrap applied."""
        c, s = math.cos(self.twist), math.sin(self.twist)
        head = self.spins[:extra]
        rotated = np.column_stack([c * head[:, 0] - s * head[:, 1],
                                   s * head[:, 0] + c * head[:, 1]])
        return np.vstack([self.spins, rotated])


def _wrap(angle: float) -> float:
    """Map into [-pi, pi)."""
    return (angle + math.pi) % (2.0 * math.pi) - math.pi


def _as_unit(v, name: str) -> np.ndarray:
    v = np.asarray(v, dtype=float).reshape(-1)
    if v.size != 2 or abs(math.hypot(v[0], v[1]) - 1.0) > UNIT_TOL:
        raise InvalidArgument(f"{name} must be a planar unit vector, got {v}")
    return v


def oriented_angle(v, w) -> tuple[int, float]:
    """Chirality and oriented central angle from v to w.

    chi = sign(v1 w2 - v2 w1) with sign(0) = -1; theta = chi*arccos((v, w)) in
    [-pi, pi).  The angle is computed through atan2, which equals the arccos form
    for unit vectors and stays accurate for nearly parallel spins.
    """
    v = _as_unit(v, "v")
    w = _as_unit(w, "w")
    det = v[0] * w[1] - v[1] * w[0]
    dot = v[0] * w[0] + v[1] * w[1]
    chi = 1 if det > 0 else -1
    theta = math.atan2(abs(det), dot) * chi
    return chi, theta + 0.0


def spins_from_angles(chain: AngleChain, u0=(1.0, 0.0)) -> SpinChain:
    u0 = _as_unit(u0, "u0")
    u0 = u0 / np.hypot(u0[0], u0[1])
    phi0 = math.atan2(u0[1], u0[0])
    phis = phi0 + np.concatenate([[0.0], np.cumsum(chain.thetas[:-1])])
    spins = np.column_stack([np.cos(phis), np.sin(phis)])
    spins[0] = u0
    return SpinChain(spins, twist=_wrap(float(np.sum(chain.thetas))))


def angles_from_spins(chain: SpinChain) -> AngleChain:
    u = chain.extended(1)
    det = u[:-1, 0] * u[1:, 1] - u[:-1, 1] * u[1:, 0]
    dot = np.einsum("ij,ij->i", u[:-1], u[1:])
    chi = np.where(det > 0, 1.0, -1.0)
    thetas = chi * np.arctan2(np.abs(det), dot)
    # right angles come back a rounding error beyond pi/2; put them on the boundary
    edge = (np.abs(thetas) > HALF_PI) & (np.abs(thetas) <= HALF_PI + 1e-12)
    thetas[edge] = np.copysign(HALF_PI, thetas[edge])
    bad = np.flatnonzero(np.abs(thetas) > HALF_PI)
    if bad.size:
        raise DomainViolation(int(bad[0]), float(thetas[bad[0]]))
    return AngleChain(thetas + 0.0)


# ---------------------------------------------------------------------------
# potential and energies


def _potential(theta, alpha: float):
    s2 = np.sin(0.5 * np.asarray(theta, dtype=float)) ** 2
    if alpha <= 4.0:
        return 2.0 * ((4.0 - alpha) / 4.0 - 2.0 * s2) ** 2
    return 2.0 * s2 * (alpha - 4.0 + 4.0 * s2)


def effective_potential(alpha: float, theta: float) -> float:
    """W_alpha(theta) = cos 2theta - alpha cos theta - m_alpha on J."""
    alpha = check_alpha(alpha)
    if not abs(theta) <= HALF_PI:
        raise InvalidArgument(f"theta={theta} outside [-pi/2, pi/2]")
    return float(_potential(theta, alpha))


def bond_energy(a, b, alpha: float):
    """Per-bond summand cos(a+b) - alpha/2 (cos a + cos b) - m_alpha, vectorized."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    mid = 0.5 * (a + b)
    return _potential(mid, alpha) + 2.0 * alpha * np.cos(mid) * np.sin(0.25 * (a - b)) ** 2


def _potential_slope(theta, alpha: float):
    """dW_alpha/dtheta in the same cancellation-free form as _potential."""
    theta = np.asarray(theta, dtype=float)
    s2 = np.sin(0.5 * theta) ** 2
    if alpha <= 4.0:
        return -4.0 * np.sin(theta) * ((4.0 - alpha) / 4.0 - 2.0 * s2)
    return np.sin(theta) * (alpha - 4.0 + 8.0 * s2)


def bond_gradient(a, b, alpha: float):
    """Partial derivatives of bond_energy in a and in b.

    Differentiating the stable form keeps small gradients accurate relative to
    the bond energy itself, which the literal sin(a+b) - alpha/2 sin a does not.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    mid = 0.5 * (a + b)
    common = 0.5 * _potential_slope(mid, alpha) - alpha * np.sin(mid) * np.sin(0.25 * (a - b)) ** 2
    skew = 0.5 * alpha * np.cos(mid) * np.sin(0.5 * (a - b))
    return common + skew, common - skew


def chain_gradient_floor(thetas: np.ndarray, alpha: float) -> np.ndarray:
    """Per-site rounding bound for chain_gradient: 16 ulps of the summed term sizes."""
    a, b = thetas, np.roll(thetas, -1)
    mid = 0.5 * (a + b)
    size = (0.5 * np.abs(_potential_slope(mid, alpha))
            + alpha * np.sin(0.25 * (a - b)) ** 2
            + 0.5 * alpha * np.abs(np.sin(0.5 * (a - b))))
    return 16.0 * np.finfo(float).eps * (size + np.roll(size, 1) + np.abs(chain_gradient(thetas, alpha)))


def bond_energy_literal(a, b, alpha: float):
    """The same summand written exactly as in the angle energy."""
    return np.cos(a + b) - 0.5 * alpha * (np.cos(a) + np.cos(b)) - m_alpha(alpha)


def chain_energy(thetas: np.ndarray, alpha: float) -> float:
    return float(np.sum(bond_energy(thetas, np.roll(thetas, -1), alpha)))


def chain_gradient(thetas: np.ndarray, alpha: float) -> np.ndarray:
    da, db = bond_gradient(thetas, np.roll(thetas, -1), alpha)
    return da + np.roll(db, 1)


def chain_hessian(thetas: np.ndarray, alpha: float) -> sparse.csc_matrix:
    """Cyclic tridiagonal Hessian of the periodic angle energy."""
    n = thetas.size
    c_next = np.cos(thetas + np.roll(thetas, -1))
    diag = -c_next - np.roll(c_next, 1) + alpha * np.cos(thetas)
    idx = np.arange(n)
    nxt = (idx + 1) % n
    rows = np.concatenate([idx, idx, nxt])
    cols = np.concatenate([idx, nxt, idx])
    vals = np.concatenate([diag, -c_next, -c_next])
    return sparse.csc_matrix((vals, (rows, cols)), shape=(n, n))


def energy_angles(chain: AngleChain, alpha: float) -> float:
    return chain_energy(chain.thetas, check_alpha(alpha))


def energy_spins(chain: SpinChain, alpha: float) -> float:
    """-alpha sum (u^i, u^{i+1}) + sum (u^i, u^{i+2}) - n m_alpha."""
    alpha = check_alpha(alpha)
    u = chain.extended(2)
    n = chain.n
    nn = np.einsum("ij,ij->", u[:n], u[1:n + 1])
    nnn = np.einsum("ij,ij->", u[:n], u[2:n + 2])
    return float(-alpha * nn + nnn - n * m_alpha(alpha))


def potential_lower_bound(chain: AngleChain, alpha: float) -> float:
    """Sum of W_alpha over bond midpoints (theta^i + theta^{i+1})/2.

    Minimizing the nearest-neighbour part of each bond at fixed
    theta^i + theta^{i+1} leaves exactly W_alpha at the midpoint, so this never
    exceeds energy_angles.  Evaluating W at the sites instead is not a bound:
    alpha=0, thetas=(pi/2, pi/2 - 0.3, pi/2) gives E below sum_i W(theta^i).
    """
    alpha = check_alpha(alpha)
    t = chain.thetas
    return float(np.sum(_potential(0.5 * (t + np.roll(t, -1)), alpha)))


def site_potential_sum(chain: AngleChain, alpha: float) -> float:
    return float(np.sum(_potential(chain.thetas, check_alpha(alpha))))


def scaled_energy(chain: AngleChain, alpha: float) -> float:
    alpha = check_alpha(alpha)
    if alpha >= 4.0:
        raise ScalingUndefined(
            f"alpha={alpha}: mu_alpha vanishes for alpha >= 4 (alpha = 4 is the singular point)"
        )
    return energy_angles(chain, alpha) / mu_alpha(alpha)
