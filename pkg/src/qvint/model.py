"""Body-frame kinetic-energy model for coupled rigid and morphing vehicles.

The kinetic energy is a quadratic form in the body-frame reference-point
velocity xdot and angular velocity omega,

    T = xdot.a_xx.xdot + xdot.A_xw.omega + xdot.a_x
      + omega.A_ww.omega + omega.a_w + a_0

with the 1/2 of the usual quadratic forms folded into the coefficients
(a rigid body of mass m has a_xx = (m/2) I). The gradients

    D1 = dT/dxdot = 2 a_xx xdot + A_xw omega + a_x
    D2 = dT/domega = 2 A_ww omega + A_xw^T xdot + a_w

are the body-frame momentum blocks the integrators in
:mod:`qvint.integrators` balance step to step. Shape changes (morphing) enter
through time-dependent coefficients produced by a :class:`MorphingSchedule`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .quat import _rotate

Array = np.ndarray

#: half-span of the synthetic morphing-wing pair [m]
WING_LENGTH = 0.8

#: mass of each synthetic wing point mass [kg]
WING_MASS = 0.5

#: default linear rotational damping coefficient for the morphing preset
DAMPING_BETA = 0.05

_SYM_TOL = 1e-12


def skew(v: Array) -> Array:
    """Cross-product matrix: skew(v) @ w == v x w."""
    x, y, z = v
    return np.array([[0.0, -z, y], [z, 0.0, -x], [-y, x, 0.0]])


def _cross(a: Array, b: Array) -> Array:
    """Hand-rolled 3-vector cross product (np.cross is slow on (3,) inputs)."""
    return np.array(
        [
            a[1] * b[2] - a[2] * b[1],
            a[2] * b[0] - a[0] * b[2],
            a[0] * b[1] - a[1] * b[0],
        ]
    )


def _as_matrix(m, name: str) -> Array:
    a = np.array(m, dtype=float)
    if a.shape == ():
        a = a * np.eye(3)
    if a.shape != (3, 3):
        raise ValueError(f"{name} must be a scalar or 3x3 matrix, got shape {a.shape}")
    return a


def _check_symmetric(a: Array, name: str) -> None:
    dev = float(np.linalg.norm(a - a.T))
    if dev > _SYM_TOL * (1.0 + float(np.linalg.norm(a))):
        raise ValueError(f"{name} must be symmetric, asymmetry norm {dev:g}")


@dataclass(frozen=True)
class CoefficientSet:
    """Coefficients of the body-frame kinetic energy quadratic form.

    a_xx and A_ww must be symmetric; A_xw carries the translation-rotation
    coupling and is unrestricted. Scalars passed for the matrix blocks are
    promoted to multiples of the identity.
    """

    a_xx: Array
    A_xw: Array
    A_ww: Array
    a_x: Array = field(default_factory=lambda: np.zeros(3))
    a_w: Array = field(default_factory=lambda: np.zeros(3))
    a_0: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "a_xx", _as_matrix(self.a_xx, "a_xx"))
        object.__setattr__(self, "A_xw", _as_matrix(self.A_xw, "A_xw"))
        object.__setattr__(self, "A_ww", _as_matrix(self.A_ww, "A_ww"))
        object.__setattr__(self, "a_x", np.array(self.a_x, dtype=float).reshape(3))
        object.__setattr__(self, "a_w", np.array(self.a_w, dtype=float).reshape(3))
        object.__setattr__(self, "a_0", float(self.a_0))
        _check_symmetric(self.a_xx, "a_xx")
        _check_symmetric(self.A_ww, "A_ww")

    def __add__(self, other: "CoefficientSet") -> "CoefficientSet":
        return CoefficientSet(
            self.a_xx + other.a_xx,
            self.A_xw + other.A_xw,
            self.A_ww + other.A_ww,
            self.a_x + other.a_x,
            self.a_w + other.a_w,
            self.a_0 + other.a_0,
        )

    def mass_matrix(self) -> Array:
        """6x6 velocity-to-momentum map [[2 a_xx, A_xw], [A_xw^T, 2 A_ww]]."""
        return np.block([[2.0 * self.a_xx, self.A_xw], [self.A_xw.T, 2.0 * self.A_ww]])

    def is_positive_definite(self) -> bool:
        """True when the 6x6 mass matrix is positive definite."""
        return bool(np.linalg.eigvalsh(self.mass_matrix()).min() > 0.0)

    def velocity_inverse(self) -> Array:
        """Cached inverse of the mass matrix, for momentum-to-velocity recovery."""
        inv = self.__dict__.get("_vinv")
        if inv is None:
            m = self.mass_matrix()
            if np.linalg.cond(m) > 1e12:
                raise ValueError("velocity-recovery matrix is singular or near singular")
            inv = np.linalg.inv(m)
            object.__setattr__(self, "_vinv", inv)
        return inv


@dataclass(frozen=True)
class BodyState:
    """Trajectory sample: time, orientation, position and body-frame velocities.

    q maps body to earth axes (scalar first); x_e is the reference-point
    position on earth axes; xdot_b and omega_b are the linear and angular
    velocity on body axes.
    """

    t: float
    q: Array
    x_e: Array
    xdot_b: Array
    omega_b: Array

    def __post_init__(self):
        object.__setattr__(self, "t", float(self.t))
        object.__setattr__(self, "q", np.array(self.q, dtype=float).reshape(4))
        object.__setattr__(self, "x_e", np.array(self.x_e, dtype=float).reshape(3))
        object.__setattr__(self, "xdot_b", np.array(self.xdot_b, dtype=float).reshape(3))
        object.__setattr__(self, "omega_b", np.array(self.omega_b, dtype=float).reshape(3))
        for name in ("q", "x_e", "xdot_b", "omega_b"):
            if not np.all(np.isfinite(getattr(self, name))):
                raise ValueError(f"BodyState.{name} has non-finite components")
        n = float(np.sqrt(self.q @ self.q))
        if abs(n - 1.0) > 1e-6:
            raise ValueError(f"BodyState.q norm {n!r} is not 1 within 1e-6")


# velocity-level kernels shared with the integrators (hot path, no BodyState)


def _energy_v(xdot: Array, omega: Array, c: CoefficientSet) -> float:
    return float(
        xdot @ (c.a_xx @ xdot)
        + xdot @ (c.A_xw @ omega)
        + xdot @ c.a_x
        + omega @ (c.A_ww @ omega)
        + omega @ c.a_w
        + c.a_0
    )


def _grad_xdot_v(xdot: Array, omega: Array, c: CoefficientSet) -> Array:
    return 2.0 * (c.a_xx @ xdot) + c.A_xw @ omega + c.a_x


def _grad_omega_v(xdot: Array, omega: Array, c: CoefficientSet) -> Array:
    return 2.0 * (c.A_ww @ omega) + c.A_xw.T @ xdot + c.a_w


def kinetic_energy(s: BodyState, c: CoefficientSet) -> float:
    """Kinetic energy of a state under a coefficient set [J]."""
    return _energy_v(s.xdot_b, s.omega_b, c)


def energy_grad_xdot(s: BodyState, c: CoefficientSet) -> Array:
    """dT/dxdot, the body-frame translational momentum block."""
    return _grad_xdot_v(s.xdot_b, s.omega_b, c)


def energy_grad_omega(s: BodyState, c: CoefficientSet) -> Array:
    """dT/domega, the body-frame rotational momentum block."""
    return _grad_omega_v(s.xdot_b, s.omega_b, c)


def canonical_momenta(s: BodyState, c: CoefficientSet, h: float) -> tuple[Array, Array]:
    """Discrete canonical momenta (p_x on earth axes, p_w on body axes).

    p_x = q (x) D1 (x) q* and p_w = D2 + (h/2) omega x D2; the h term is the
    discrete left-rectangle correction, so p_w depends on the step size.
    """
    g1 = _grad_xdot_v(s.xdot_b, s.omega_b, c)
    g2 = _grad_omega_v(s.xdot_b, s.omega_b, c)
    return _rotate(s.q, g1), g2 + (0.5 * h) * _cross(s.omega_b, g2)


@dataclass(frozen=True)
class RigidParams:
    """Mass properties of a single rigid body about a body-frame reference point.

    m is the total mass, c the center-of-mass offset from the reference point
    on body axes, I_ref the inertia tensor about the reference point.
    """

    m: float
    c: Array
    I_ref: Array

    def __post_init__(self):
        object.__setattr__(self, "m", float(self.m))
        object.__setattr__(self, "c", np.array(self.c, dtype=float).reshape(3))
        object.__setattr__(self, "I_ref", _as_matrix(self.I_ref, "I_ref"))
        _check_symmetric(self.I_ref, "I_ref")
        if self.m <= 0.0:
            raise ValueError("RigidParams.m must be positive")

    def com_inertia(self) -> Array:
        """Inertia tensor about the center of mass (parallel axis theorem)."""
        c = self.c
        return self.I_ref - self.m * (float(c @ c) * np.eye(3) - np.outer(c, c))


def physical_momenta(s: BodyState, rp: RigidParams) -> tuple[Array, Array]:
    """Physical momenta of a rigid body: (P_x earth axes, P_w earth axes).

    P_x = m v_com on earth axes; P_w is the angular momentum about the center
    of mass, excluding the orbital contribution of the reference point.
    """
    v_com = s.xdot_b + _cross(s.omega_b, rp.c)
    return rp.m * _rotate(s.q, v_com), _rotate(s.q, rp.com_inertia() @ s.omega_b)


def rigid_coefficients(rp: RigidParams) -> CoefficientSet:
    """Energy coefficients of a single rigid body about its reference point."""
    return CoefficientSet(
        a_xx=0.5 * rp.m * np.eye(3),
        A_xw=rp.m * skew(rp.c).T,
        A_ww=0.5 * rp.I_ref,
    )


def identify_rigid_params(c: CoefficientSet, tol: float = 1e-9) -> RigidParams:
    """Invert rigid_coefficients; rejects sets that are not a single rigid body."""
    m = 2.0 * float(np.trace(c.a_xx)) / 3.0
    scale = 1.0 + float(np.linalg.norm(c.A_xw))
    if np.linalg.norm(c.a_xx - 0.5 * m * np.eye(3)) > tol * (1.0 + abs(m)):
        raise ValueError("a_xx is not a scalar multiple of the identity")
    com = (
        np.array(
            [
                c.A_xw[1, 2] - c.A_xw[2, 1],
                c.A_xw[2, 0] - c.A_xw[0, 2],
                c.A_xw[0, 1] - c.A_xw[1, 0],
            ]
        )
        / (2.0 * m)
    )
    if np.linalg.norm(c.A_xw - m * skew(com).T) > tol * scale:
        raise ValueError("A_xw is not m skew(c)^T for any offset c")
    if np.linalg.norm(c.a_x) > tol * scale or np.linalg.norm(c.a_w) > tol * scale:
        raise ValueError("rigid bodies have vanishing a_x and a_w")
    return RigidParams(m=m, c=com, I_ref=2.0 * c.A_ww)


def preset_free_body() -> tuple[CoefficientSet, RigidParams]:
    """Rigid biomimetic-aircraft fixture used by the free-body scenario.

    The rigid parameters are recovered from the coefficient table by the
    identification above (m = 8 kg, c = (0.79375, 0, 0.005) m) and satisfy
    m skew(c)^T = A_xw exactly.
    """
    a_xx = 4.0 * np.eye(3)
    A_xw = np.array(
        [
            [0.0, 0.0400, 0.0],
            [-0.0400, 0.0, 6.350],
            [0.0, -6.350, 0.0],
        ]
    )
    A_ww = np.array(
        [
            [0.2342, 0.0, -6.4761e-5],
            [0.0, 3.0539, 0.0],
            [-6.4761e-5, 0.0, 3.2699],
        ]
    )
    cset = CoefficientSet(a_xx=a_xx, A_xw=A_xw, A_ww=A_ww)
    return cset, identify_rigid_params(cset)


ForceFn = Callable[[BodyState, float], tuple[Array, Array]]


@dataclass(frozen=True)
class MorphingSchedule:
    """Time-dependent model: coefficients, shape parameters and applied forces.

    coefficients(t) returns the CoefficientSet at time t; morph_params(t)
    returns the shape parameter vector (empty for rigid models); force(s, t)
    returns (F earth axes, torque body axes). force_free marks schedules whose
    force callback is identically zero, which lets integrators skip it.
    """

    name: str
    coefficients: Callable[[float], CoefficientSet]
    morph_params: Callable[[float], Array]
    force: ForceFn
    force_free: bool = True


def _zero_force(s: BodyState, t: float) -> tuple[Array, Array]:
    return np.zeros(3), np.zeros(3)


def constant_schedule(
    c: CoefficientSet, name: str = "free_body", force: ForceFn | None = None
) -> MorphingSchedule:
    """Schedule with fixed coefficients and an optional force callback."""
    return MorphingSchedule(
        name=name,
        coefficients=lambda t: c,
        morph_params=lambda t: np.zeros(0),
        force=force if force is not None else _zero_force,
        force_free=force is None,
    )


def point_mass_coefficients(m: float, r: Array, rdot: Array) -> CoefficientSet:
    """Energy coefficients of one point mass at body position r moving at rdot.

    Derived from T = (m/2) |xdot + omega x r + rdot|^2 expanded in the
    coefficient form; rdot is the shape-change velocity seen on body axes.
    """
    r = np.asarray(r, dtype=float)
    rdot = np.asarray(rdot, dtype=float)
    return CoefficientSet(
        a_xx=0.5 * m * np.eye(3),
        A_xw=m * skew(r).T,
        A_ww=0.5 * m * (float(r @ r) * np.eye(3) - np.outer(r, r)),
        a_x=m * rdot,
        a_w=m * _cross(r, rdot),
        a_0=0.5 * m * float(rdot @ rdot),
    )


def wing_motion(t: float) -> tuple[Array, Array, Array, Array]:
    """Positions and velocities (r+, rdot+, r-, rdot-) of the synthetic wing pair.

    Sweep theta = sin(t) and incidence phi = -0.5 cos(t) move each wing tip to
    (0, +-L cos(theta) cos(phi), L sin(theta)) on body axes.
    """
    th = np.sin(t)
    ph = -0.5 * np.cos(t)
    thd = np.cos(t)
    phd = 0.5 * np.sin(t)
    a = WING_LENGTH * np.cos(th) * np.cos(ph)
    b = WING_LENGTH * np.sin(th)
    ad = WING_LENGTH * (-np.sin(th) * thd * np.cos(ph) - np.cos(th) * np.sin(ph) * phd)
    bd = WING_LENGTH * np.cos(th) * thd
    r_p = np.array([0.0, a, b])
    r_m = np.array([0.0, -a, b])
    rdot_p = np.array([0.0, ad, bd])
    rdot_m = np.array([0.0, -ad, bd])
    return r_p, rdot_p, r_m, rdot_m


def preset_morphing(damping: bool = False, beta: float = DAMPING_BETA) -> MorphingSchedule:
    """Synthetic morphing-wing model: rigid fuselage plus two moving point masses.

    The fuselage reuses the free-body fixture; each wing is a point mass of
    WING_MASS at the wing_motion positions. With damping enabled the force
    callback applies the body torque -beta omega, standing in for aerodynamic
    dissipation; otherwise the schedule is force free.
    """
    fuselage, _ = preset_free_body()

    def coefficients(t: float) -> CoefficientSet:
        r_p, rdot_p, r_m, rdot_m = wing_motion(t)
        return (
            fuselage
            + point_mass_coefficients(WING_MASS, r_p, rdot_p)
            + point_mass_coefficients(WING_MASS, r_m, rdot_m)
        )

    def morph_params(t: float) -> Array:
        return np.array([np.sin(t), -0.5 * np.cos(t)])

    def damped(s: BodyState, t: float) -> tuple[Array, Array]:
        return np.zeros(3), -beta * s.omega_b

    return MorphingSchedule(
        name="morphing",
        coefficients=coefficients,
        morph_params=morph_params,
        force=damped if damping else _zero_force,
        force_free=not damping,
    )
