"""3D trajectory design: cone sets and full 3D projection-reconstruction sets.

Axial profiles (``fovt``, ``kmaxt``) are given as (transverse width, axial
width) shapes and read as functions of the polar angle from the +z axis, so
``fovt`` evaluated at 0 is the axial extent.  Transverse profiles (``fovp``)
are ordinary functions of azimuth.

Two 3D projection-reconstruction designs are provided: a cones-based method
that samples a discrete set of cones with randomized azimuthal offsets, and
a spiral-based method that walks a single continuous path over the sphere of
directions, which diffuses the residual polar-coherence of the cone stack.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .design2d import DegenerateShape, design_2d
from .sampling import angular_dcf_3d
from .shapes import Circle, Shape, polar_profile

__all__ = [
    "FovConstraintViolated",
    "ConeSet",
    "Trajectory3D",
    "design_cones",
    "design_pr3d_cones",
    "design_pr3d_spiral",
]

_HALF_PI = math.pi / 2.0
_TWO_PI = 2.0 * math.pi
_MASK64 = (1 << 64) - 1
_GOLDEN64 = 0x9E3779B97F4A7C15


class FovConstraintViolated(Exception):
    """The transverse and axial profiles do not satisfy the design contract."""


@dataclass(frozen=True)
class ConeSet:
    """Cone deflections from the +kz axis with per-cone k-space extents."""

    deflections: np.ndarray
    kmax: np.ndarray

    def __post_init__(self):
        self.deflections.setflags(write=False)
        self.kmax.setflags(write=False)

    @property
    def count(self) -> int:
        return int(self.deflections.size)


@dataclass
class Trajectory3D:
    """Per-projection polar/azimuth angles, extents and angular dcf weights.

    ``phi`` is the accumulated (unwrapped) azimuth, which doubles as the
    turn bookkeeping needed by the full-spiral end ramp.  ``cone_counts``
    holds the per-cone projection counts for cones-based designs.
    """

    theta: np.ndarray
    phi: np.ndarray
    kmax: np.ndarray
    dcf_angular: np.ndarray
    method: str
    projection_kind: str
    seed: int | None = None
    cone_counts: np.ndarray | None = None

    @property
    def count(self) -> int:
        return int(self.theta.size)


def _splitmix64(state: int) -> tuple[int, int]:
    state = (state + _GOLDEN64) & _MASK64
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return state, z ^ (z >> 31)


def _cone_unit(seed: int, cone_index: int) -> float:
    """Deterministic uniform double in [0, 1) for a (seed, cone) pair.

    Frozen across releases: trajectory reproducibility depends on it.
    """
    state = (int(seed) ^ ((cone_index + 1) * 0xD1342543DE82EF95)) & _MASK64
    state, _ = _splitmix64(state)
    _, z = _splitmix64(state)
    return (z >> 11) * 2.0**-53


def _as_kshape(kmaxt) -> Shape:
    if kmaxt is None:
        return Circle(0.5)
    if isinstance(kmaxt, (int, float)):
        return Circle(float(kmaxt))
    return kmaxt


def _require_kind(kind: str) -> None:
    if kind not in ("full", "half"):
        raise ValueError("kind must be 'full' or 'half'")


def design_cones(fovt: Shape, kmaxt=None) -> ConeSet:
    """Design the cone deflections for a cones acquisition.

    The realized field of view is circularly symmetric about z with the
    axial profile ``fovt``.  The first cone sits at half the local spacing
    from the pole so no cone degenerates to a single projection.  Sampling
    within each cone is out of scope here; only deflections and extents are
    returned.
    """
    kmaxt = _as_kshape(kmaxt)
    fovt_p = polar_profile(fovt)
    kmaxt_p = polar_profile(kmaxt)
    phi0 = 1.0 / (2.0 * kmaxt_p(0.0) * fovt_p(_HALF_PI))
    pset = design_2d(fovt_p, kmaxt_p, phi0=phi0, phi_width=math.pi)
    return ConeSet(deflections=np.asarray(pset.angles), kmax=np.asarray(pset.kmax))


def design_pr3d_cones(fovt: Shape, fovp: Shape, kmaxt=None, kind: str = "full",
                      seed: int = 0) -> Trajectory3D:
    """Cones-based 3D projection design with randomized azimuthal offsets.

    Cones are designed over the polar angle, then each cone is covered by a
    2D design of azimuths with the extent scaled by sin(theta) to account
    for the cone circumference.  The azimuthal starting angle of each cone
    is drawn from a seeded generator, which breaks up coherent in-plane
    aliasing.  The pole cone is a single projection; full-projection designs
    add one equatorial cone sampled over half a turn.
    """
    kmaxt = _as_kshape(kmaxt)
    _require_kind(kind)
    fovt_p = polar_profile(fovt)
    kmaxt_p = polar_profile(kmaxt)
    if fovp.max_value() > fovt_p(_HALF_PI) * (1.0 + 1e-9):
        raise FovConstraintViolated(
            "transverse FOV must not exceed the axial profile at the equator"
        )
    theta_width = _HALF_PI if kind == "full" else math.pi
    cones = design_2d(fovt_p, kmaxt_p, phi0=0.0, phi_width=theta_width)
    fovp_ref = fovp(_HALF_PI)

    theta_out: list[float] = []
    phi_out: list[float] = []
    kmax_out: list[float] = []
    counts: list[int] = []

    for n in range(cones.count):
        th = float(cones.angles[n])
        km = float(cones.kmax[n])
        if n == 0:
            # the first cone is the single projection along kz
            theta_out.append(0.0)
            phi_out.append(0.0)
            kmax_out.append(km)
            counts.append(1)
            continue
        kphi = km * math.sin(th)
        offset = _cone_unit(seed, n) / (kphi * fovp_ref)
        sub = design_2d(fovp, lambda a, k=kphi: k, phi0=offset,
                        phi_width=_TWO_PI, validate=False)
        theta_out.extend([th] * sub.count)
        phi_out.extend(sub.angles.tolist())
        kmax_out.extend([km] * sub.count)
        counts.append(sub.count)

    if kind == "full":
        kphi = float(kmaxt_p(_HALF_PI))
        offset = _cone_unit(seed, cones.count) / (kphi * fovp_ref)
        sub = design_2d(fovp, lambda a, k=kphi: k, phi0=offset,
                        phi_width=math.pi, validate=False)
        theta_out.extend([_HALF_PI] * sub.count)
        phi_out.extend(sub.angles.tolist())
        kmax_out.extend([kphi] * sub.count)
        counts.append(sub.count)

    traj = Trajectory3D(
        theta=np.asarray(theta_out),
        phi=np.asarray(phi_out),
        kmax=np.asarray(kmax_out),
        dcf_angular=np.ones(len(theta_out)),
        method="cones_based",
        projection_kind=kind,
        seed=int(seed),
        cone_counts=np.asarray(counts, dtype=int),
    )
    traj.dcf_angular = angular_dcf_3d(traj, fovt, fovp)
    return traj


def design_pr3d_spiral(fovt: Shape, fovp: Shape, kmaxt=None,
                       kind: str = "full") -> Trajectory3D:
    """Spiral-based 3D projection design along one continuous path.

    Polar knots come from a 2D design over the polar angle and are linearly
    interpolated in a parametrization that spends, between consecutive
    knots, a projection budget proportional to the local cone circumference.
    Azimuths then accumulate with the same midpoint-estimated recurrence as
    the 2D design, scaled by sin(theta).

    Full-projection designs extend the path a quarter turn past the equator
    to compensate the spacing of the opposing spiral ends; the matching dcf
    ramp is applied to the angular weights.
    """
    kmaxt = _as_kshape(kmaxt)
    _require_kind(kind)
    fovt_p = polar_profile(fovt)
    kmaxt_p = polar_profile(kmaxt)
    equator_fov = fovt_p(_HALF_PI)
    if abs(equator_fov - fovp.max_value()) > 1e-6 * equator_fov:
        raise FovConstraintViolated(
            "the axial profile at the equator must equal the largest transverse FOV"
        )

    theta_width = _HALF_PI if kind == "full" else math.pi
    pol = design_2d(fovt_p, kmaxt_p, phi0=0.0, phi_width=theta_width)
    knots_t = [float(a) for a in pol.angles]
    knots_k = [float(k) for k in pol.kmax]
    kphi = float(kmaxt_p(_HALF_PI))
    if kind == "half":
        knots_t.append(math.pi)
        knots_k.append(float(kmaxt_p(math.pi)))
    else:
        knots_t.append(_HALF_PI)
        knots_k.append(kphi)
        extra = _HALF_PI + 1.0 / (4.0 * kphi * fovt_p(math.pi))
        knots_t.append(extra)
        knots_k.append(float(kmaxt_p(extra)))

    n_phi_est = design_2d(fovp, lambda a, k=kphi: k, phi0=0.0,
                          phi_width=_TWO_PI).count

    segments: list[float] = []
    last = len(knots_t) - 2
    for i in range(len(knots_t) - 1):
        if kind == "full" and i == last:
            segments.append(n_phi_est / 4.0)
        else:
            mid = 0.5 * (knots_t[i] + knots_t[i + 1])
            segments.append(
                n_phi_est * math.sin(mid) * (knots_k[i] + knots_k[i + 1]) / (2.0 * kphi)
            )
    total = float(sum(segments))
    n_proj = int(math.floor(total + 0.5))
    if n_proj < 2:
        raise DegenerateShape("spiral design yields fewer than two projections")

    t_knots = np.concatenate(([1.0], 1.0 + np.cumsum(segments)))
    m = np.arange(1, n_proj + 1, dtype=float)
    theta = np.interp(m, t_knots, knots_t)
    kmax_m = np.interp(m, t_knots, knots_k)

    phi = np.empty(n_proj)
    acc = 0.0
    for i in range(n_proj):
        phi[i] = acc
        denom = kmax_m[i] * math.sin(theta[i])
        if denom > 0.0:
            d_est = min(1.0 / (denom * float(fovp(acc + _HALF_PI))), _TWO_PI)
            d = min(1.0 / (denom * float(fovp(acc + 0.5 * d_est + _HALF_PI))), _TWO_PI)
        else:
            d = _TWO_PI
        acc += d

    traj = Trajectory3D(
        theta=theta,
        phi=phi,
        kmax=kmax_m,
        dcf_angular=np.ones(n_proj),
        method="spiral_based",
        projection_kind=kind,
        seed=None,
    )
    traj.dcf_angular = angular_dcf_3d(traj, fovt, fovp)
    return traj
