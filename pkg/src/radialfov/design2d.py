"""Sequential projection-angle design realizing an anisotropic field of view.

Projection angles are generated one by one: the local angular step is the
reciprocal of ``kmax(theta) * fov(theta + pi/2)``, evaluated at an estimated
gap midpoint, so that the spacing at the projection ends matches the desired
field of view perpendicular to each spoke.  A final scaling makes the set
tile the requested angular width exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = ["DegenerateShape", "ProjectionSet2D", "design_2d", "isotropic_count"]

_HALF_PI = math.pi / 2.0
_MAX_STEPS = 20_000_000


class DegenerateShape(Exception):
    """The requested design cannot support a meaningful projection set."""


@dataclass(frozen=True)
class ProjectionSet2D:
    """Ordered projection angles with per-projection k-space extents.

    ``angles`` are strictly increasing radians starting at ``phi0``;
    ``kmax`` holds the matching extents in cycles/px.  ``scale_factor`` is
    the stretch applied so the set tiles ``phi_width`` exactly.
    """

    angles: np.ndarray
    kmax: np.ndarray
    scale_factor: float
    phi0: float
    phi_width: float

    def __post_init__(self):
        self.angles.setflags(write=False)
        self.kmax.setflags(write=False)

    @property
    def count(self) -> int:
        return int(self.angles.size)


def isotropic_count(fov: float, kmax: float) -> float:
    """Projection count of the uniform design: ``pi * kmax * fov``."""
    if fov <= 0 or kmax <= 0:
        raise ValueError("fov and kmax must be positive")
    return math.pi * kmax * fov


def _check_not_degenerate(fov, kmax) -> None:
    grid = np.linspace(0.0, 2.0 * math.pi, 720, endpoint=False)
    try:
        prod = np.asarray(fov(grid), dtype=float) * np.asarray(kmax(grid), dtype=float)
    except Exception:
        prod = np.array([float(fov(a)) * float(kmax(a)) for a in grid])
    worst = float(prod.min())
    if not worst > 1.0:
        raise DegenerateShape(
            f"fov*kmax falls to {worst:.6g}; the design needs it above 1 everywhere"
        )


def _admissible(n: int, parity) -> bool:
    if parity == "any":
        return True
    if parity == "even":
        return n % 2 == 0
    if parity == "odd":
        return n % 2 == 1
    return n % int(parity) == 0


def _apply_parity(n: int, parity) -> int:
    if parity == "any":
        return n
    modulus = 2 if parity in ("even", "odd") else abs(int(parity))
    if modulus == 0:
        raise ValueError("parity modulus must be nonzero")
    # Nearest admissible count no further than one modulus above; on a tie
    # keep the larger count so the design never undersamples.
    for d in range(modulus + 1):
        if _admissible(n + d, parity):
            return n + d
        if n - d >= 2 and _admissible(n - d, parity):
            return n - d
    raise DegenerateShape(f"no admissible projection count near {n}")


def design_2d(fov, kmax, phi0: float = 0.0, phi_width: float = math.pi,
              parity="any", validate: bool = True) -> ProjectionSet2D:
    """Design projection angles and extents for the given angular profiles.

    Parameters
    ----------
    fov, kmax:
        Angular profiles (callables of radians) for the desired field of
        view (px) and projection extent (cycles/px); both pi-periodic.
    phi0:
        First projection angle.
    phi_width:
        Angular span to tile, in (0, 2*pi].  Use pi for full projections
        and 2*pi for half projections.
    parity:
        "any", "even", "odd", or an integer m to force a multiple of m.
    validate:
        Check that fov*kmax stays above 1 everywhere before designing.

    Raises
    ------
    DegenerateShape
        If the profiles cannot support at least two projections.
    """
    if not 0.0 < phi_width <= 2.0 * math.pi + 1e-12:
        raise ValueError("phi_width must lie in (0, 2*pi]")
    if validate:
        _check_not_degenerate(fov, kmax)

    end = phi0 + phi_width
    raw = [float(phi0)]

    def _advance():
        theta = raw[-1]
        step_est = 1.0 / (float(kmax(theta)) * float(fov(theta + _HALF_PI)))
        mid = theta + 0.5 * step_est
        step = 1.0 / (float(kmax(mid)) * float(fov(mid + _HALF_PI)))
        if not (step > 0.0 and math.isfinite(step)):
            raise DegenerateShape("angular step is not positive and finite")
        raw.append(theta + step)

    while raw[-1] <= end:
        if len(raw) > _MAX_STEPS:
            raise DegenerateShape("projection recurrence failed to terminate")
        _advance()

    overshoot = raw[-1] - end
    undershoot = end - raw[-2]
    count = len(raw) - 1 if overshoot <= undershoot else len(raw) - 2
    count = _apply_parity(count, parity)
    if count < 2:
        raise DegenerateShape(f"design yields {count} projection(s); need at least 2")
    while len(raw) <= count:
        _advance()

    scale = phi_width / (raw[count] - phi0)
    angles = phi0 + scale * (np.asarray(raw[:count], dtype=float) - phi0)
    extents = np.asarray([float(kmax(a)) for a in angles])
    return ProjectionSet2D(
        angles=angles,
        kmax=extents,
        scale_factor=float(scale),
        phi0=float(phi0),
        phi_width=float(phi_width),
    )
