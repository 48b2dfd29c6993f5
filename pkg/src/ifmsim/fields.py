"""Classical field sources, trajectory bending, and light deflection.

Everything is in Gaussian CGS units: lengths in cm, time in s, mass in g,
charge in statC, electric field in statV/cm, magnetic field in gauss, force
in dyne.  The Lorentz force carries the symmetrized magnetic term
F = q[E + (v x B - B x v)/(2c)], which reduces to q[E + (v x B)/c] for
classical vectors; the implementation keeps the symmetrized form and the test
suite pins the identity.

Trajectories are integrated with classical fixed-step RK4 until the particle
crosses a configured exit plane (the second-grating plane) or leaves a
bounding box; the deflection angle is the angle between the initial and final
velocity.  A bisection root-finder inverts deflection-vs-distance to the
critical source distance for a given threshold angle.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class PhysicalConstants:
    """Fundamental constants, Gaussian CGS.

    c in cm/s, G in cm^3 g^-1 s^-2, hbar in erg*s.
    """

    c: float = 3.00e10
    G: float = 6.67e-8
    hbar: float = 1.0546e-27

    def __post_init__(self) -> None:
        if self.c <= 0 or self.G <= 0 or self.hbar <= 0:
            raise ValueError("physical constants must be strictly positive")


CGS = PhysicalConstants()


def _vec3(value, name: str) -> np.ndarray:
    v = np.asarray(value, dtype=float)
    if v.shape != (3,):
        raise ValueError(f"{name} must be a 3-vector, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise ValueError(f"{name} must be finite")
    return v


@dataclass(frozen=True, eq=False)
class PointCharge:
    """Point electric charge q (statC) at a fixed position (cm)."""

    q: float
    position: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "position", _vec3(self.position, "position"))
        if not math.isfinite(self.q):
            raise ValueError("charge must be finite")


@dataclass(frozen=True, eq=False)
class UniformBRegion:
    """Constant magnetic field B (gauss) inside an axis-aligned box (cm)."""

    B: np.ndarray
    box_min: np.ndarray
    box_max: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "B", _vec3(self.B, "B"))
        object.__setattr__(self, "box_min", _vec3(self.box_min, "box_min"))
        object.__setattr__(self, "box_max", _vec3(self.box_max, "box_max"))
        if not np.all(self.box_max > self.box_min):
            raise ValueError("field region box must have positive extent")

    @property
    def position(self) -> np.ndarray:
        """Center of the field region."""
        return 0.5 * (self.box_min + self.box_max)


@dataclass(frozen=True, eq=False)
class UniformERegion:
    """Constant electric field E (statV/cm) inside an axis-aligned box (cm).

    Companion of :class:`UniformBRegion`; used for constant-force checks and
    cage-style configurations.
    """

    E: np.ndarray
    box_min: np.ndarray
    box_max: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "E", _vec3(self.E, "E"))
        object.__setattr__(self, "box_min", _vec3(self.box_min, "box_min"))
        object.__setattr__(self, "box_max", _vec3(self.box_max, "box_max"))
        if not np.all(self.box_max > self.box_min):
            raise ValueError("field region box must have positive extent")

    @property
    def position(self) -> np.ndarray:
        return 0.5 * (self.box_min + self.box_max)


@dataclass(frozen=True, eq=False)
class PointMass:
    """Point mass M (g) at a fixed position (cm).

    Exerts no electromagnetic field; its effect on light is covered by
    :func:`light_deflection`.
    """

    M: float
    position: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "position", _vec3(self.position, "position"))
        if not math.isfinite(self.M) or self.M < 0:
            raise ValueError("mass must be finite and nonnegative")


FieldSource = PointCharge | UniformBRegion | UniformERegion | PointMass

# Nonrelativistic speed bound as a fraction of c.
MAX_SPEED_FRACTION = 0.01


@dataclass(frozen=True, eq=False)
class TestParticle:
    """Charged classical test particle: q (statC), m (g), r0 (cm), v0 (cm/s).

    Speeds are restricted to |v0| < 0.01c - the slow matter-wave regime.
    """

    __test__ = False  # not a pytest class, despite the name

    q: float
    m: float
    r0: np.ndarray
    v0: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "r0", _vec3(self.r0, "r0"))
        object.__setattr__(self, "v0", _vec3(self.v0, "v0"))
        if self.m <= 0:
            raise ValueError("mass must be positive")
        speed = float(np.linalg.norm(self.v0))
        if speed >= MAX_SPEED_FRACTION * CGS.c:
            raise ValueError(
                f"|v0| = {speed:.3e} cm/s violates the nonrelativistic bound "
                f"{MAX_SPEED_FRACTION * CGS.c:.3e} cm/s"
            )


@dataclass(frozen=True, eq=False)
class TrajectoryResult:
    """Sampled classical path plus the extracted deflection angle.

    ``t`` is strictly increasing; ``r`` and ``v`` are (n, 3) arrays sampled at
    those times.  ``termination`` records why integration stopped:
    "exit_plane" or "bounds".
    """

    t: np.ndarray
    r: np.ndarray
    v: np.ndarray
    deflection_angle: float
    termination: str

    @property
    def r_final(self) -> np.ndarray:
        return self.r[-1]

    @property
    def v_final(self) -> np.ndarray:
        return self.v[-1]


class SingularityError(RuntimeError):
    """Trajectory approached a point source below the singularity cutoff."""


class StepLimitError(RuntimeError):
    """Step cap exhausted before the trajectory reached the exit plane."""


class BracketError(ValueError):
    """Root-find bracket does not straddle the target deflection."""


class ProtocolError(RuntimeError):
    """Deflection-vs-distance is not monotone where the protocol requires it."""


def eval_fields(
    source: FieldSource, r, constants: PhysicalConstants = CGS
) -> tuple[np.ndarray, np.ndarray]:
    """Electric and magnetic field of ``source`` at point ``r`` (cm).

    Returns (E, B) in (statV/cm, gauss).  Point masses produce no
    electromagnetic field.  Evaluation exactly at a point source is a domain
    error.
    """
    r = _vec3(r, "r")
    zero = np.zeros(3)
    if isinstance(source, PointCharge):
        d = r - source.position
        dist2 = float(d @ d)
        if dist2 == 0.0:
            raise ValueError("field evaluated at the point-charge position")
        return source.q * d / dist2**1.5, zero
    if isinstance(source, UniformBRegion):
        inside = bool(np.all(r >= source.box_min) and np.all(r <= source.box_max))
        return zero, source.B.copy() if inside else zero.copy()
    if isinstance(source, UniformERegion):
        inside = bool(np.all(r >= source.box_min) and np.all(r <= source.box_max))
        return source.E.copy() if inside else zero.copy(), zero
    if isinstance(source, PointMass):
        return zero, zero.copy()
    raise TypeError(f"unsupported field source {type(source).__name__}")


def lorentz_force(q: float, v, E, B, constants: PhysicalConstants = CGS) -> np.ndarray:
    """Symmetrized Lorentz force F = q[E + (v x B - B x v)/(2c)] in dyne.

    For classical 3-vectors the magnetic term equals q (v x B)/c; the
    symmetrized form is kept as written.
    """
    v = _vec3(v, "v")
    E = _vec3(E, "E")
    B = _vec3(B, "B")
    return q * (E + (np.cross(v, B) - np.cross(B, v)) / (2.0 * constants.c))


def _acceleration_fn(particle: TestParticle, source: FieldSource, constants: PhysicalConstants):
    """Specialized scalar acceleration a(r, v) for the RK4 hot loop.

    Each branch is the scalar expansion of lorentz_force(q, v,
    *eval_fields(source, r)) / m; the equivalence is pinned by the test
    suite.
    """
    qm = particle.q / particle.m
    if isinstance(source, PointCharge):
        k = qm * source.q
        sx, sy, sz = (float(c) for c in source.position)

        def accel(x, y, z, vx, vy, vz):
            dx, dy, dz = x - sx, y - sy, z - sz
            inv = (dx * dx + dy * dy + dz * dz) ** -1.5
            return k * dx * inv, k * dy * inv, k * dz * inv

        return accel
    if isinstance(source, UniformERegion):
        ax0, ay0, az0 = (qm * float(c) for c in source.E)
        lx, ly, lz = (float(c) for c in source.box_min)
        hx, hy, hz = (float(c) for c in source.box_max)

        def accel(x, y, z, vx, vy, vz):
            if lx <= x <= hx and ly <= y <= hy and lz <= z <= hz:
                return ax0, ay0, az0
            return 0.0, 0.0, 0.0

        return accel
    if isinstance(source, UniformBRegion):
        s = qm / constants.c
        bx, by, bz = (float(c) for c in source.B)
        lx, ly, lz = (float(c) for c in source.box_min)
        hx, hy, hz = (float(c) for c in source.box_max)

        def accel(x, y, z, vx, vy, vz):
            if lx <= x <= hx and ly <= y <= hy and lz <= z <= hz:
                return (
                    s * (vy * bz - vz * by),
                    s * (vz * bx - vx * bz),
                    s * (vx * by - vy * bx),
                )
            return 0.0, 0.0, 0.0

        return accel
    if isinstance(source, PointMass):

        def accel(x, y, z, vx, vy, vz):
            return 0.0, 0.0, 0.0

        return accel
    raise TypeError(f"unsupported field source {type(source).__name__}")


def _deflection_between(v0: np.ndarray, v1: np.ndarray) -> float:
    """Angle between two velocity vectors, stable for small angles."""
    cross = np.cross(v0, v1)
    return float(math.atan2(float(np.linalg.norm(cross)), float(v0 @ v1)))


def integrate_trajectory(
    particle: TestParticle,
    source: FieldSource,
    exit_plane_x: float,
    dt: float,
    *,
    constants: PhysicalConstants = CGS,
    bounds: tuple[np.ndarray, np.ndarray] | None = None,
    max_steps: int = 2_000_000,
    singularity_cutoff: float = 1e-6,
) -> TrajectoryResult:
    """RK4 integration of the particle through the source's field.

    Integration runs until the x coordinate crosses ``exit_plane_x`` (the
    final partial step is refined onto the plane) or the particle leaves the
    optional bounding box.  The particle must initially move toward the plane.
    Approaching a point source within ``singularity_cutoff`` cm raises
    :class:`SingularityError`; exhausting ``max_steps`` raises
    :class:`StepLimitError`.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    x, y, z = (float(c) for c in particle.r0)
    vx, vy, vz = (float(c) for c in particle.v0)
    direction = 1.0 if exit_plane_x >= x else -1.0
    if vx * direction <= 0.0 or (exit_plane_x - x) * direction <= 0.0:
        raise ValueError("particle must start before the exit plane, moving toward it")

    accel = _acceleration_fn(particle, source, constants)
    guard_point = isinstance(source, (PointCharge, PointMass))
    if guard_point:
        gx, gy, gz = (float(c) for c in source.position)
        cutoff2 = singularity_cutoff * singularity_cutoff
    if bounds is not None:
        blo = _vec3(bounds[0], "bounds[0]")
        bhi = _vec3(bounds[1], "bounds[1]")

    def rk4(x, y, z, vx, vy, vz, h):
        a1x, a1y, a1z = accel(x, y, z, vx, vy, vz)
        hx, hy, hz = x + 0.5 * h * vx, y + 0.5 * h * vy, z + 0.5 * h * vz
        v2x, v2y, v2z = vx + 0.5 * h * a1x, vy + 0.5 * h * a1y, vz + 0.5 * h * a1z
        a2x, a2y, a2z = accel(hx, hy, hz, v2x, v2y, v2z)
        hx, hy, hz = x + 0.5 * h * v2x, y + 0.5 * h * v2y, z + 0.5 * h * v2z
        v3x, v3y, v3z = vx + 0.5 * h * a2x, vy + 0.5 * h * a2y, vz + 0.5 * h * a2z
        a3x, a3y, a3z = accel(hx, hy, hz, v3x, v3y, v3z)
        hx, hy, hz = x + h * v3x, y + h * v3y, z + h * v3z
        v4x, v4y, v4z = vx + h * a3x, vy + h * a3y, vz + h * a3z
        a4x, a4y, a4z = accel(hx, hy, hz, v4x, v4y, v4z)
        six = h / 6.0
        return (
            x + six * (vx + 2.0 * (v2x + v3x) + v4x),
            y + six * (vy + 2.0 * (v2y + v3y) + v4y),
            z + six * (vz + 2.0 * (v2z + v3z) + v4z),
            vx + six * (a1x + 2.0 * (a2x + a3x) + a4x),
            vy + six * (a1y + 2.0 * (a2y + a3y) + a4y),
            vz + six * (a1z + 2.0 * (a2z + a3z) + a4z),
        )

    ts = [0.0]
    rs = [(x, y, z)]
    vs = [(vx, vy, vz)]
    t = 0.0
    termination = None
    for _ in range(max_steps):
        if guard_point:
            dx, dy, dz = x - gx, y - gy, z - gz
            if dx * dx + dy * dy + dz * dz < cutoff2:
                raise SingularityError(
                    f"trajectory within {singularity_cutoff} cm of the point source"
                )
        nx, ny, nz, nvx, nvy, nvz = rk4(x, y, z, vx, vy, vz, dt)
        if (exit_plane_x - nx) * direction <= 0.0:
            # Crossed the plane inside this step: refine the substep onto it.
            h = dt * (exit_plane_x - x) / (nx - x)
            for _ in range(3):
                h = min(max(h, 1e-15 * dt), dt)
                nx, ny, nz, nvx, nvy, nvz = rk4(x, y, z, vx, vy, vz, h)
                miss = exit_plane_x - nx
                if nvx == 0.0 or abs(miss) <= 1e-15 * (abs(exit_plane_x) + dt * abs(nvx)):
                    break
                h += miss / nvx
            else:
                h = min(max(h, 1e-15 * dt), dt)
                nx, ny, nz, nvx, nvy, nvz = rk4(x, y, z, vx, vy, vz, h)
            x, y, z, vx, vy, vz = nx, ny, nz, nvx, nvy, nvz
            t += h
            termination = "exit_plane"
        else:
            x, y, z, vx, vy, vz = nx, ny, nz, nvx, nvy, nvz
            t += dt
        ts.append(t)
        rs.append((x, y, z))
        vs.append((vx, vy, vz))
        if termination is None and bounds is not None:
            pos = np.array((x, y, z))
            if np.any(pos < blo) or np.any(pos > bhi):
                termination = "bounds"
        if termination is not None:
            break
    else:
        raise StepLimitError(f"exit plane not reached within {max_steps} steps")

    v_final = np.array((vx, vy, vz))
    return TrajectoryResult(
        t=np.array(ts),
        r=np.array(rs),
        v=np.array(vs),
        deflection_angle=_deflection_between(particle.v0, v_final),
        termination=termination,
    )


@dataclass(frozen=True, eq=False)
class BeamGeometry:
    """Geometry tying a nominal beam path to the source-approach line.

    ``source_anchor`` is the point on the undeflected beam path closest to the
    source positions; moving the source to distance d places it at
    anchor + d * approach_direction.  ``exit_plane_x`` is the plane where the
    deflection is read off (the second-grating plane).
    """

    exit_plane_x: float
    source_anchor: np.ndarray
    approach_direction: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "source_anchor", _vec3(self.source_anchor, "source_anchor"))
        d = _vec3(self.approach_direction, "approach_direction")
        norm = float(np.linalg.norm(d))
        if norm == 0.0:
            raise ValueError("approach_direction must be nonzero")
        object.__setattr__(self, "approach_direction", d / norm)

    def source_position(self, distance: float) -> np.ndarray:
        return self.source_anchor + distance * self.approach_direction


def with_position(source: FieldSource, position) -> FieldSource:
    """Copy of ``source`` relocated so its reference position is ``position``.

    Box sources are translated rigidly so their center lands on the target.
    """
    position = _vec3(position, "position")
    if isinstance(source, (PointCharge, PointMass)):
        return dataclasses.replace(source, position=position)
    if isinstance(source, (UniformBRegion, UniformERegion)):
        shift = position - source.position
        return dataclasses.replace(
            source, box_min=source.box_min + shift, box_max=source.box_max + shift
        )
    raise TypeError(f"unsupported field source {type(source).__name__}")


def closest_approach_point(r0, v0, target) -> np.ndarray:
    """Point on the straight line r0 + s*v0 (s >= 0 unrestricted) nearest to ``target``."""
    r0 = _vec3(r0, "r0")
    v0 = _vec3(v0, "v0")
    target = _vec3(target, "target")
    vhat = v0 / float(np.linalg.norm(v0))
    return r0 + float((target - r0) @ vhat) * vhat


def deflection_at_distance(
    particle: TestParticle,
    source_template: FieldSource,
    geometry: BeamGeometry,
    distance: float,
    dt: float,
    *,
    constants: PhysicalConstants = CGS,
    **integrate_kwargs,
) -> float:
    """Deflection angle with the source placed ``distance`` cm from the beam."""
    source = with_position(source_template, geometry.source_position(distance))
    result = integrate_trajectory(
        particle, source, geometry.exit_plane_x, dt, constants=constants, **integrate_kwargs
    )
    return result.deflection_angle


def critical_distance(
    particle: TestParticle,
    source_template: FieldSource,
    geometry: BeamGeometry,
    phi_c: float,
    bracket: tuple[float, float],
    dt: float,
    *,
    constants: PhysicalConstants = CGS,
    rel_tol: float = 1e-6,
    monotonicity_samples: int = 5,
    **integrate_kwargs,
) -> float:
    """Source distance at which the deflection angle equals ``phi_c``.

    Bisection over ``bracket`` = (near, far) distances, to relative tolerance
    ``rel_tol``.  Deflection must decrease monotonically with distance over
    the bracket (checked on a coarse scan) and the bracket must straddle
    ``phi_c``.
    """
    lo, hi = bracket
    if not 0 < lo < hi:
        raise ValueError(f"bracket must satisfy 0 < near < far, got {bracket}")

    def deflection(d: float) -> float:
        return deflection_at_distance(
            particle, source_template, geometry, d, dt, constants=constants, **integrate_kwargs
        )

    samples = np.linspace(lo, hi, monotonicity_samples)
    angles = [deflection(float(d)) for d in samples]
    slack = 1e-12 * max(angles) if angles else 0.0
    for a, b in zip(angles, angles[1:]):
        if b > a + slack:
            raise ProtocolError("deflection is not monotone decreasing in source distance")
    if not angles[0] >= phi_c >= angles[-1]:
        raise BracketError(
            f"deflection range [{angles[-1]:.3e}, {angles[0]:.3e}] does not straddle {phi_c:.3e}"
        )

    while (hi - lo) > rel_tol * 0.5 * (hi + lo):
        mid = 0.5 * (lo + hi)
        if deflection(mid) >= phi_c:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def light_deflection(M: float, b: float, constants: PhysicalConstants = CGS) -> float:
    """First-order bending angle 4GM/(b c^2) of a light ray passing a mass.

    M in g, impact parameter b in cm; returns radians.
    """
    if b <= 0:
        raise ValueError("impact parameter must be positive")
    if M < 0:
        raise ValueError("mass must be nonnegative")
    return 4.0 * constants.G * M / (b * constants.c**2)


def sphere_radius_for_deflection(
    delta_phi: float, density: float, constants: PhysicalConstants = CGS
) -> float:
    """Radius of a uniform sphere whose grazing rays bend by ``delta_phi``.

    Inverts delta_phi = (16/3) pi G rho R^2 / c^2 (mass (4/3) pi R^3 rho at
    impact parameter R), giving R = sqrt(3 delta_phi c^2 / (16 pi G rho)) cm.
    """
    if delta_phi <= 0:
        raise ValueError("target deflection must be positive")
    if density <= 0:
        raise ValueError("density must be positive")
    return math.sqrt(3.0 * delta_phi * constants.c**2 / (16.0 * math.pi * constants.G * density))
