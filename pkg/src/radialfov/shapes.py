"""Angular profile functions used to describe fields of view and k-space extents.

A profile maps a direction angle (radians) to a positive length: either the
full extent of the target field of view along that direction (pixels), or the
k-space radius of a projection acquired at that angle (cycles/pixel).  All
profiles are centrally symmetric, so f(phi) == f(phi + pi) for every kind.

Canonical units are pixels: 1 px is the nominal resolution and the matching
nominal k-space extent is 0.5 cycles/px.
"""

from __future__ import annotations

import math

import numpy as np

__all__ = [
    "Shape",
    "Circle",
    "Ellipse",
    "Rectangle",
    "Diamond",
    "Stadium",
    "Star",
    "Tabulated",
    "dual_shape",
    "polar_profile",
    "max_radial_spacing",
    "shape_from_dict",
]

_PI = math.pi


class Shape:
    """A positive, pi-periodic function of the direction angle.

    Subclasses implement ``_values`` on angles already reduced to
    ``[0, period)``.  Instances are callable on scalars and arrays.
    """

    kind = "shape"
    period = _PI

    def _values(self, phi: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def __call__(self, phi):
        arr = np.mod(np.asarray(phi, dtype=float), self.period)
        out = self._values(arr)
        if np.ndim(phi) == 0:
            return float(out)
        return out

    def max_value(self) -> float:
        """Largest value the profile attains over one period."""
        raise NotImplementedError

    def area(self, n: int = 8192) -> float:
        """Area enclosed when the profile is read as a diameter function."""
        vals = self(np.linspace(0.0, _PI, n, endpoint=False))
        return float(np.mean(vals**2) * _PI / 4.0)

    def to_dict(self) -> dict:
        raise NotImplementedError


class Circle(Shape):
    """Isotropic profile: the same width in every direction."""

    kind = "circle"

    def __init__(self, width: float):
        if width <= 0:
            raise ValueError("width must be positive")
        self.width = float(width)

    def _values(self, phi):
        return np.full_like(phi, self.width)

    def max_value(self):
        return self.width

    def to_dict(self):
        return {"kind": "circle", "w": self.width}


class Ellipse(Shape):
    """Elliptical profile with full widths ``wx`` and ``wy`` along the axes."""

    kind = "ellipse"

    def __init__(self, wx: float, wy: float):
        if wx <= 0 or wy <= 0:
            raise ValueError("widths must be positive")
        self.wx = float(wx)
        self.wy = float(wy)

    def _values(self, phi):
        c = np.cos(phi)
        s = np.sin(phi)
        return self.wx * self.wy / np.sqrt((self.wy * c) ** 2 + (self.wx * s) ** 2)

    def max_value(self):
        return max(self.wx, self.wy)

    def to_dict(self):
        return {"kind": "ellipse", "wx": self.wx, "wy": self.wy}


class Rectangle(Shape):
    """Rectangular profile: the central chord of a ``wx`` by ``wy`` box."""

    kind = "rectangle"

    def __init__(self, wx: float, wy: float):
        if wx <= 0 or wy <= 0:
            raise ValueError("widths must be positive")
        self.wx = float(wx)
        self.wy = float(wy)

    def _values(self, phi):
        c = np.abs(np.cos(phi))
        s = np.abs(np.sin(phi))
        with np.errstate(divide="ignore"):
            along_x = np.where(c > 0.0, self.wx / np.where(c > 0.0, c, 1.0), np.inf)
            along_y = np.where(s > 0.0, self.wy / np.where(s > 0.0, s, 1.0), np.inf)
        return np.minimum(along_x, along_y)

    def max_value(self):
        return math.hypot(self.wx, self.wy)

    def to_dict(self):
        return {"kind": "rectangle", "wx": self.wx, "wy": self.wy}


class Diamond(Shape):
    """Rhombic profile with vertices on the axes at ``wx/2`` and ``wy/2``."""

    kind = "diamond"

    def __init__(self, wx: float, wy: float):
        if wx <= 0 or wy <= 0:
            raise ValueError("widths must be positive")
        self.wx = float(wx)
        self.wy = float(wy)

    def _values(self, phi):
        c = np.abs(np.cos(phi))
        s = np.abs(np.sin(phi))
        return 1.0 / (c / self.wx + s / self.wy)

    def max_value(self):
        return max(self.wx, self.wy)

    def to_dict(self):
        return {"kind": "diamond", "wx": self.wx, "wy": self.wy}


class Stadium(Shape):
    """Oval profile: a rectangle of length ``wx - wy`` capped by semicircles
    of diameter ``wy``.  The profile is the shape's breadth along each
    direction, ``(wx - wy)|cos(phi)| + wy``, and requires ``wx >= wy``.
    """

    kind = "stadium"

    def __init__(self, wx: float, wy: float):
        if wy <= 0:
            raise ValueError("widths must be positive")
        if wx < wy:
            raise ValueError("stadium requires wx >= wy")
        self.wx = float(wx)
        self.wy = float(wy)

    def _values(self, phi):
        return (self.wx - self.wy) * np.abs(np.cos(phi)) + self.wy

    def max_value(self):
        return self.wx

    def to_dict(self):
        return {"kind": "stadium", "wx": self.wx, "wy": self.wy}


class Star(Shape):
    """Lobed profile oscillating between ``lobe_min`` and ``lobe_max``.

    ``value(phi) = lobe_min + (lobe_max - lobe_min) * |cos(lobes * phi / 2)|``
    with an even lobe count so that central symmetry holds.
    """

    kind = "star"

    def __init__(self, lobe_min: float, lobe_max: float, lobes: int = 4):
        if lobe_min <= 0 or lobe_max <= 0:
            raise ValueError("lobe extents must be positive")
        if lobes < 2 or lobes % 2:
            raise ValueError("lobe count must be a positive even integer")
        self.lobe_min = float(lobe_min)
        self.lobe_max = float(lobe_max)
        self.lobes = int(lobes)

    def _values(self, phi):
        osc = np.abs(np.cos(0.5 * self.lobes * phi))
        return self.lobe_min + (self.lobe_max - self.lobe_min) * osc

    def max_value(self):
        return max(self.lobe_min, self.lobe_max)

    def to_dict(self):
        return {
            "kind": "star",
            "kmin": self.lobe_min,
            "kmax": self.lobe_max,
            "lobes": self.lobes,
        }


class Tabulated(Shape):
    """Profile given on a uniform angular grid with linear interpolation.

    Values supplied over a full ``2*pi`` turn are folded onto ``[0, pi)`` by
    averaging opposite angles, which enforces central symmetry.
    """

    kind = "tabulated"

    def __init__(self, values, period: float = _PI):
        vals = np.array(values, dtype=float, copy=True)
        if vals.ndim != 1 or vals.size < 2:
            raise ValueError("need a 1-D table with at least two knots")
        if np.any(~np.isfinite(vals)) or np.any(vals <= 0):
            raise ValueError("table values must be finite and positive")
        if abs(period - 2.0 * _PI) < 1e-12:
            if vals.size % 2:
                raise ValueError("a 2*pi table needs an even number of knots")
            half = vals.size // 2
            vals = 0.5 * (vals[:half] + vals[half:])
        elif abs(period - _PI) >= 1e-12:
            raise ValueError("period must be pi or 2*pi")
        self.values = vals
        self.values.setflags(write=False)

    def _values(self, phi):
        n = self.values.size
        x = phi / _PI * n
        i0 = np.floor(x).astype(int) % n
        i1 = (i0 + 1) % n
        frac = x - np.floor(x)
        return (1.0 - frac) * self.values[i0] + frac * self.values[i1]

    def max_value(self):
        return float(self.values.max())

    def to_dict(self):
        return {"kind": "tabulated", "values": list(map(float, self.values))}


class _Transformed(Shape):
    """Rotated, reflected and/or scaled view of another profile."""

    def __init__(self, base: Shape, rotation: float = 0.0, scale: float = 1.0,
                 reflect: bool = False, kind: str = "transformed"):
        self.base = base
        self.rotation = float(rotation)
        self.scale = float(scale)
        self.reflect = bool(reflect)
        self.kind = kind
        self.period = base.period

    def __call__(self, phi):
        arr = np.asarray(phi, dtype=float)
        arg = self.rotation - arr if self.reflect else arr + self.rotation
        out = self.scale * np.asarray(self.base(arg))
        if np.ndim(phi) == 0:
            return float(out)
        return out

    def max_value(self):
        return self.scale * self.base.max_value()

    def to_dict(self):
        return {
            "kind": self.kind,
            "base": self.base.to_dict(),
            "rotation": self.rotation,
            "scale": self.scale,
            "reflect": self.reflect,
        }


def dual_shape(fov: Shape, kmax_nominal: float = 0.5) -> Shape:
    """K-space extent profile proportional to the FOV rotated a quarter turn.

    The returned profile is ``c * fov(phi + pi/2)`` with ``c`` chosen so its
    maximum equals ``kmax_nominal``.  Designs with this extent profile have a
    uniform angular density weight and suppress in-FOV low-level aliasing.
    """
    if kmax_nominal <= 0:
        raise ValueError("kmax_nominal must be positive")
    scale = kmax_nominal / fov.max_value()
    return _Transformed(fov, rotation=_PI / 2.0, scale=scale, kind="dual")


def polar_profile(shape: Shape) -> Shape:
    """View an axial profile as a function of polar angle from the +z axis.

    The shape is given as (transverse width, axial width); the returned
    callable evaluates it at ``pi/2 - theta`` so the axial width is read at
    ``theta = 0`` and the transverse width at ``theta = pi/2``.
    """
    return _Transformed(shape, rotation=_PI / 2.0, reflect=True, kind="polar")


def max_radial_spacing(fov: Shape) -> float:
    """Coarsest radial sample spacing supporting ``fov`` without aliasing."""
    return 1.0 / fov.max_value()


_UNIT_SCALE = {"px": None, "mm": 1.0, "cm": 10.0}


def shape_from_dict(spec: dict, res: float | None = None) -> Shape:
    """Build a profile from its JSON form.

    Lengths are pixels unless the dict carries a ``unit`` field, in which
    case ``res`` (mm per pixel) is required to convert.
    """
    if not isinstance(spec, dict) or "kind" not in spec:
        raise ValueError("shape spec must be a dict with a 'kind' field")
    kind = spec["kind"]
    factor = 1.0
    unit = spec.get("unit", "px")
    if unit not in _UNIT_SCALE:
        raise ValueError(f"unknown unit {unit!r}")
    if _UNIT_SCALE[unit] is not None:
        if res is None or res <= 0:
            raise ValueError("a resolution (mm/px) is required for physical units")
        factor = _UNIT_SCALE[unit] / res

    def _len(key):
        if key not in spec:
            raise ValueError(f"shape spec missing {key!r}")
        return float(spec[key]) * factor

    if kind == "circle":
        return Circle(_len("w"))
    if kind == "ellipse":
        return Ellipse(_len("wx"), _len("wy"))
    if kind in ("rectangle", "rect"):
        return Rectangle(_len("wx"), _len("wy"))
    if kind == "diamond":
        return Diamond(_len("wx"), _len("wy"))
    if kind in ("stadium", "oval"):
        return Stadium(_len("wx"), _len("wy"))
    if kind == "star":
        return Star(float(spec["kmin"]), float(spec["kmax"]), int(spec.get("lobes", 4)))
    if kind == "tabulated":
        vals = np.asarray(spec["values"], dtype=float) * factor
        period = 2.0 * _PI if spec.get("period") in ("2pi", 2, "2*pi") else _PI
        return Tabulated(vals, period=period)
    if kind == "dual":
        base = shape_from_dict(spec["base"], res=res)
        return dual_shape(base, float(spec.get("kmax", 0.5)))
    raise ValueError(f"unknown shape kind {kind!r}")
