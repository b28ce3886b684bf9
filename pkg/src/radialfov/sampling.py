"""Radial k-space sample generation and separable density compensation.

The density compensation splits into a radial factor shared by every
projection and an angular factor carrying the anisotropic spacing.  Radial
samples are placed on positions proportional to each projection's extent so
all projections share one normalized radial grid.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .shapes import polar_profile

__all__ = [
    "SpacingTooCoarse",
    "SampledKSpace",
    "sample_projections",
    "radial_dcf",
    "angular_dcf_2d",
    "angular_dcf_3d",
    "spiral_end_ramp",
]

_HALF_PI = math.pi / 2.0


class SpacingTooCoarse(UserWarning):
    """Radial spacing exceeds the bound set by the largest field of view."""


@dataclass(frozen=True)
class SampledKSpace:
    """Flat list of k-space sample coordinates with density weights.

    ``coords`` is (M, d) in cycles/px; ``dcf`` holds the total per-sample
    weight (radial times angular); ``projection`` maps each sample back to
    its projection index.  ``radial_positions`` is the normalized radial
    grid shared by every projection.
    """

    coords: np.ndarray
    dcf: np.ndarray
    projection: np.ndarray
    dkr: float
    projection_kind: str
    n_projections: int
    radial_positions: np.ndarray

    def __post_init__(self):
        for arr in (self.coords, self.dcf, self.projection, self.radial_positions):
            arr.setflags(write=False)


def _radial_cell_weights(rho_abs: np.ndarray, h: float, ndim: int) -> np.ndarray:
    """Measure of each sample's radial cell on the normalized grid.

    Away from the origin the annulus (2D) and shell (3D) measures reduce to
    the linear and quadratic laws; the origin keeps the exact measure of its
    half-spacing cell.
    """
    if ndim == 2:
        w = rho_abs * h
        w = np.where(rho_abs == 0.0, h * h / 8.0, w)
    else:
        w = rho_abs**2 * h
        w = np.where(rho_abs == 0.0, h**3 / 24.0, w)
    return w


def radial_dcf(kind: str, positions, normalize: bool = False) -> np.ndarray:
    """Radial density weights for equally spaced sample radii.

    ``kind`` is "2d" or "3d".  Weights grow linearly (2D) or quadratically
    (3D) with radius; a sample at radius zero gets the exact measure of its
    half-spacing disk or ball.
    """
    pos = np.asarray(positions, dtype=float)
    if pos.ndim != 1 or pos.size == 0:
        raise ValueError("positions must be a nonempty 1-D array")
    if np.any(pos < 0):
        raise ValueError("radii must be nonnegative")
    if pos.size > 1:
        steps = np.diff(pos)
        h = float(steps[0])
        if h <= 0 or not np.allclose(steps, h, rtol=1e-9, atol=0.0):
            raise ValueError("positions must be equally spaced and increasing")
    else:
        h = 1.0
    k = kind.lower()
    if k in ("2d", "2"):
        w = _radial_cell_weights(pos, h, 2)
    elif k in ("3d", "3"):
        w = _radial_cell_weights(pos, h, 3)
    else:
        raise ValueError("kind must be '2D' or '3D'")
    if normalize:
        w = w / w.sum()
    return w


def angular_dcf_2d(pset, fov) -> np.ndarray:
    """Per-projection angular weight: extent over the perpendicular FOV."""
    angles = np.asarray(pset.angles, dtype=float)
    return np.asarray(pset.kmax, dtype=float) / np.asarray(fov(angles + _HALF_PI))


def spiral_end_ramp(phi: np.ndarray, theta: np.ndarray) -> np.ndarray:
    """Down-weighting for the last two azimuthal half-turns of a full spiral.

    The opposing ends of full projections spiral against each other near the
    equator, compressing the effective spacing; the weights ramp linearly
    from 1 to 0.5 in theta across each of the final two half-turns.
    """
    phi = np.asarray(phi, dtype=float)
    theta = np.asarray(theta, dtype=float)
    factors = np.ones_like(phi)
    end = float(phi[-1])
    for hi in (end - math.pi, end):
        lo = hi - math.pi
        sel = (phi > lo) & (phi <= hi)
        if not np.any(sel):
            continue
        th = theta[sel]
        span = float(th.max() - th.min())
        if span > 0.0:
            t = (th - th.min()) / span
        else:
            t = np.ones_like(th)
        factors[sel] = 1.0 - 0.5 * t
    return factors


def angular_dcf_3d(traj, fovt, fovp) -> np.ndarray:
    """Per-projection angular weight for 3D sets: polar times azimuthal.

    ``fovt`` is the axial profile (transverse, axial widths) and ``fovp``
    the transverse profile.  Full-projection spiral designs additionally get
    the end-of-spiral ramp applied.
    """
    fovt_polar = polar_profile(fovt)
    theta = np.asarray(traj.theta, dtype=float)
    phi = np.asarray(traj.phi, dtype=float)
    weights = np.asarray(traj.kmax, dtype=float) / (
        np.asarray(fovt_polar(theta + _HALF_PI)) * np.asarray(fovp(phi + _HALF_PI))
    )
    if traj.method == "spiral_based" and traj.projection_kind == "full":
        weights = weights * spiral_end_ramp(phi, theta)
    return weights


def sample_projections(traj, dkr: float, kind: str | None = None,
                       angular_weights=None, max_fov: float | None = None) -> SampledKSpace:
    """Place radial samples along every projection of a design.

    ``traj`` is a ProjectionSet2D or a Trajectory3D.  ``dkr`` is the target
    radial spacing (cycles/px) for the longest projection; it may shrink so
    the extents are hit exactly.  Full projections span [-kmax, kmax], half
    projections [0, kmax].  ``angular_weights`` defaults to the trajectory's
    own angular weights (3D) or to ones (2D).  If ``max_fov`` is given and
    ``dkr`` exceeds 1/max_fov, a SpacingTooCoarse warning is emitted.
    """
    if dkr <= 0:
        raise ValueError("dkr must be positive")
    if hasattr(traj, "theta"):
        theta = np.asarray(traj.theta, dtype=float)
        phi = np.asarray(traj.phi, dtype=float)
        dirs = np.stack(
            [np.sin(theta) * np.cos(phi), np.sin(theta) * np.sin(phi), np.cos(theta)],
            axis=1,
        )
        extents = np.asarray(traj.kmax, dtype=float)
        kind = traj.projection_kind
        if angular_weights is None:
            angular_weights = traj.dcf_angular
    else:
        angles = np.asarray(traj.angles, dtype=float)
        dirs = np.stack([np.cos(angles), np.sin(angles)], axis=1)
        extents = np.asarray(traj.kmax, dtype=float)
        kind = kind or "full"
        if angular_weights is None:
            angular_weights = np.ones(extents.size)
    if kind not in ("full", "half"):
        raise ValueError("projection kind must be 'full' or 'half'")
    angular_weights = np.asarray(angular_weights, dtype=float)

    if max_fov is not None and dkr > (1.0 / max_fov) * (1.0 + 1e-9):
        warnings.warn(SpacingTooCoarse(
            f"radial spacing {dkr:g} exceeds 1/max(FOV) = {1.0 / max_fov:g}"
        ))

    kref = float(extents.max())
    nsteps = max(1, math.ceil(kref / dkr - 1e-9))
    if kind == "full":
        offsets = np.arange(-nsteps, nsteps + 1)
    else:
        offsets = np.arange(0, nsteps + 1)
    rho = offsets / float(nsteps)
    h = 1.0 / nsteps

    ndim = dirs.shape[1]
    radial = _radial_cell_weights(np.abs(rho), h, ndim)
    n_proj = int(extents.size)
    dcf = np.outer(angular_weights, radial)
    # every projection crosses k = 0, so the origin cell is shared
    dcf[:, offsets == 0] /= n_proj

    radii = np.outer(extents, rho)
    coords = (radii[:, :, None] * dirs[:, None, :]).reshape(-1, ndim)
    return SampledKSpace(
        coords=coords,
        dcf=dcf.reshape(-1),
        projection=np.repeat(np.arange(n_proj), rho.size),
        dkr=kref / nsteps,
        projection_kind=kind,
        n_projections=n_proj,
        radial_positions=rho,
    )
