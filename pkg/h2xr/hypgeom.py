"""
Poincaré disk primitives and the isometries of H²×ℝ used for reflections.

Points are carried as :class:`DiskPoint` / :class:`IdealPoint` values at the
public surface and as complex numbers (or complex numpy arrays) internally.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Optional, Tuple, Union

import numpy as np

from . import exceptions

logger = logging.getLogger(__name__)

ARC_RADIUS_LIMIT = 1e6
"""Arcs with a larger Euclidean radius are reclassified as diameters."""

THROUGH_TOL = 1e-10
"""Euclidean residual under which a point counts as lying on a geodesic."""


@dataclass(frozen=True)
class DiskPoint:
    """Interior point of the Poincaré disk."""

    x: float
    """Disk x coordinate"""

    y: float
    """Disk y coordinate"""

    def __post_init__(self):
        if not (self.x * self.x + self.y * self.y < 1.0):
            raise exceptions.DomainError(
                f"({self.x}, {self.y}) is not inside the open unit disk"
            )

    @classmethod
    def from_complex(cls, z: complex) -> "DiskPoint":
        return cls(float(z.real), float(z.imag))

    @property
    def z(self) -> complex:
        return complex(self.x, self.y)

    def __repr__(self):
        return f"DiskPoint({self.x:.6g}, {self.y:.6g})"


@dataclass(frozen=True)
class IdealPoint:
    """Point e^{iθ} of the ideal boundary."""

    theta: float

    def __post_init__(self):
        object.__setattr__(self, "theta", float(self.theta) % (2.0 * math.pi))

    @property
    def z(self) -> complex:
        return complex(math.cos(self.theta), math.sin(self.theta))


@dataclass(frozen=True)
class SpacePoint:
    """Point (p, t) of H²×ℝ."""

    p: DiskPoint
    t: float

    @classmethod
    def from_complex(cls, z: complex, t: float) -> "SpacePoint":
        return cls(DiskPoint.from_complex(z), float(t))


ModelPoint = Union[DiskPoint, IdealPoint, complex]


def as_complex(point) -> complex:
    """Return the complex coordinate of a disk, ideal or plain complex point."""
    if isinstance(point, (DiskPoint, IdealPoint)):
        return point.z
    if isinstance(point, tuple):
        return complex(point[0], point[1])
    return complex(point)


def _check_interior(z) -> np.ndarray:
    z = np.asarray(z, dtype=complex)
    if np.any(np.abs(z) >= 1.0):
        raise exceptions.DomainError("point on or outside the unit circle")
    return z


def conformal_factor(p):
    """
    Conformal factor λ = 2 / (1 − x² − y²) of the disk metric.

    Args:
        p: DiskPoint, complex number, or complex numpy array

    Returns:
        λ as a float (or array for array input)

    Raises:
        DomainError: If any point is on or outside the unit circle

    Example:
        >>> conformal_factor(DiskPoint(0.5, 0.0))
        2.6666666666666665
    """
    if isinstance(p, DiskPoint):
        return 2.0 / (1.0 - p.x * p.x - p.y * p.y)
    z = _check_interior(p if not isinstance(p, tuple) else as_complex(p))
    lam = 2.0 / (1.0 - np.abs(z) ** 2)
    return float(lam) if lam.ndim == 0 else lam


def density(p):
    """D = 1/λ = (1 − x² − y²)/2."""
    lam = conformal_factor(p)
    return 1.0 / lam


def log_factor_gradient(z: np.ndarray) -> np.ndarray:
    """Gradient of ln λ as a complex number φ_x + iφ_y."""
    z = np.asarray(z, dtype=complex)
    return 2.0 * z / (1.0 - np.abs(z) ** 2)


def hyp_distance(p, q):
    """
    Hyperbolic distance between two interior points.

    Args:
        p: First point (DiskPoint, complex, or complex array)
        q: Second point (same kinds, broadcastable against p)

    Returns:
        Distance 2·artanh(|p − q| / |1 − p̄q|)

    Example:
        >>> round(hyp_distance(DiskPoint(0, 0), DiskPoint(0.5, 0)), 5)
        1.09861
    """
    scalar = not isinstance(p, np.ndarray) and not isinstance(q, np.ndarray)
    zp = _check_interior(as_complex(p) if scalar else p)
    zq = _check_interior(as_complex(q) if scalar else q)
    ratio = np.abs(zp - zq) / np.abs(1.0 - np.conj(zp) * zq)
    d = 2.0 * np.arctanh(np.minimum(ratio, 1.0 - 1e-16))
    return float(d) if scalar else d


def product_distance(z1, t1, z2, t2):
    """Distance in H²×ℝ: sqrt(d_H² + Δt²). Accepts arrays."""
    dh = hyp_distance(np.asarray(z1, dtype=complex), np.asarray(z2, dtype=complex))
    return np.hypot(dh, np.asarray(t1, dtype=float) - np.asarray(t2, dtype=float))


def mobius_to_origin(p: complex, z):
    """Disk automorphism z ↦ (z − p)/(1 − p̄z) sending p to 0."""
    return (z - p) / (1.0 - np.conj(p) * z)


def mobius_from_origin(p: complex, z):
    """Inverse of :func:`mobius_to_origin`: z ↦ (z + p)/(1 + p̄z)."""
    return (z + p) / (1.0 + np.conj(p) * z)


@dataclass(frozen=True)
class Geodesic:
    """
    Complete geodesic of the disk, oriented from ``start`` to ``end``.

    Diameters carry a unit ``direction``; arcs carry the ``center`` and
    ``radius`` of a circle orthogonal to the unit circle plus ``orientation``
    (+1 counter-clockwise around the center, −1 clockwise).
    """

    kind: str
    start: ModelPoint
    end: ModelPoint
    center: Optional[complex] = None
    radius: Optional[float] = None
    direction: Optional[complex] = None
    orientation: int = 1

    @property
    def is_diameter(self) -> bool:
        return self.kind == "diameter"

    def orthogonality_residual(self) -> float:
        """| |c|² − r² − 1 | for arcs; 0 for diameters."""
        if self.is_diameter:
            return 0.0
        return abs(abs(self.center) ** 2 - self.radius ** 2 - 1.0)

    def residual(self, z):
        """Euclidean distance-like residual of z from the geodesic's carrier."""
        z = np.asarray(z, dtype=complex)
        if self.is_diameter:
            res = np.abs((z * np.conj(self.direction)).imag)
        else:
            res = np.abs(np.abs(z - self.center) - self.radius)
        return float(res) if res.ndim == 0 else res

    def tangent(self, z):
        """Unit tangent (complex) in the direction of orientation."""
        z = np.asarray(z, dtype=complex)
        if self.is_diameter:
            tan = np.full(z.shape, self.direction, dtype=complex)
        else:
            w = z - self.center
            tan = self.orientation * 1j * w / np.abs(w)
        return complex(tan) if tan.ndim == 0 else tan

    def reflect(self, z):
        """Reflection of the disk across this geodesic."""
        z = np.asarray(z, dtype=complex)
        if self.is_diameter:
            out = self.direction ** 2 * np.conj(z)
        else:
            out = self.center + self.radius ** 2 / np.conj(z - self.center)
        return complex(out) if out.ndim == 0 else out

    def project(self, z):
        """Nearest point of the carrier (Euclidean), used to snap vertices."""
        z = np.asarray(z, dtype=complex)
        if self.is_diameter:
            out = (z * np.conj(self.direction)).real * self.direction
        else:
            w = z - self.center
            out = self.center + self.radius * w / np.abs(w)
        return complex(out) if out.ndim == 0 else out

    def distance(self, z):
        """Hyperbolic distance from z to the complete geodesic."""
        z = _check_interior(z)
        if self.is_diameter:
            normal = 1j * self.direction
            num = 2.0 * np.abs((np.conj(normal) * z).real)
            den = 1.0 - np.abs(z) ** 2
        else:
            num = np.abs(np.abs(z - self.center) ** 2 - self.radius ** 2)
            den = (1.0 - np.abs(z) ** 2) * self.radius
        d = np.arcsinh(num / den)
        return float(d) if d.ndim == 0 else d

    def ideal_endpoints(self) -> Tuple[complex, complex]:
        """Ideal endpoints (backward, forward) along the orientation."""
        if self.is_diameter:
            return -self.direction, self.direction
        c, r = self.center, self.radius
        e1 = (c + 1j * c * r) / abs(c) ** 2
        e2 = (c - 1j * c * r) / abs(c) ** 2
        a = as_complex(self.start)
        forward = (np.conj(self.tangent(a)) * (e1 - a)).real > 0
        return (e2, e1) if forward else (e1, e2)

    def arc_angle(self, z):
        """Polar angle of z around the arc center (arcs only)."""
        if self.is_diameter:
            raise exceptions.DomainError("arc_angle is undefined for a diameter")
        return np.angle(np.asarray(z, dtype=complex) - self.center)

    def point_at_arc_angle(self, phi):
        """Point of the carrier circle at polar angle phi (arcs only)."""
        if self.is_diameter:
            raise exceptions.DomainError("point_at_arc_angle is undefined for a diameter")
        return self.center + self.radius * np.exp(1j * np.asarray(phi, dtype=float))

    def nearest_to_origin(self) -> complex:
        """Point of the geodesic closest to the disk origin."""
        if self.is_diameter:
            return 0j
        c = self.center
        return c * (1.0 - self.radius / abs(c))


def geodesic_through(a, b) -> Geodesic:
    """
    Build the unique complete geodesic through two model points.

    Args:
        a: Start point (DiskPoint, IdealPoint or complex)
        b: End point (DiskPoint, IdealPoint or complex)

    Returns:
        Geodesic oriented from a to b

    Raises:
        DegenerateInputError: If a and b coincide

    Example:
        >>> g = geodesic_through(DiskPoint(0.5, 0), IdealPoint(math.pi / 2))
        >>> g.kind
        'arc'
    """
    za, zb = as_complex(a), as_complex(b)
    if abs(za - zb) < 1e-14:
        raise exceptions.DegenerateInputError(f"geodesic through coincident points {za}")
    for z in (za, zb):
        if abs(z) > 1.0 + 1e-12:
            raise exceptions.DomainError(f"{z} lies outside the closed disk")

    cross = (np.conj(za) * zb).imag
    scale = max(abs(za), abs(zb))
    if abs(cross) <= 1e-14 * max(scale, 1.0):
        return _diameter(a, b, za, zb)

    # center c of the circle: 2 Re(c ā) = 1 + |a|², same for b
    lhs = np.array([[za.real, za.imag], [zb.real, zb.imag]])
    rhs = 0.5 * np.array([1.0 + abs(za) ** 2, 1.0 + abs(zb) ** 2])
    try:
        cx, cy = np.linalg.solve(lhs, rhs)
    except np.linalg.LinAlgError:
        return _diameter(a, b, za, zb)
    c = complex(cx, cy)
    r = math.sqrt(max(abs(c) ** 2 - 1.0, 0.0))
    if r > ARC_RADIUS_LIMIT:
        logger.debug(f"Arc radius {r:.3g} exceeds limit, treating as diameter")
        return _diameter(a, b, za, zb)
    orientation = 1 if (np.conj(za - c) * (zb - c)).imag > 0 else -1
    return Geodesic("arc", a, b, center=c, radius=r, orientation=orientation)


def _diameter(a, b, za: complex, zb: complex) -> Geodesic:
    d = zb - za
    return Geodesic("diameter", a, b, direction=d / abs(d))


def angle_between(at, g1: Geodesic, g2: Geodesic) -> float:
    """
    Unoriented angle in [0, π] between two oriented geodesics at a common point.

    Raises:
        DomainError: If either geodesic misses the point by more than 1e-10
    """
    z = as_complex(at)
    for g in (g1, g2):
        if g.residual(z) > THROUGH_TOL:
            raise exceptions.DomainError(
                f"geodesic misses {z} (residual {g.residual(z):.3g})"
            )
    t1, t2 = g1.tangent(z), g2.tangent(z)
    cosine = (np.conj(t1) * t2).real
    return float(np.arccos(np.clip(cosine, -1.0, 1.0)))


def geodesic_segment_points(a, b, count: int) -> np.ndarray:
    """
    Points splitting the geodesic segment a→b into ``count`` equal hyperbolic pieces.

    Returns:
        Complex array of ``count + 1`` points, endpoints included
    """
    za, zb = as_complex(a), as_complex(b)
    _check_interior(np.array([za, zb]))
    if count < 1:
        raise exceptions.DomainError("count must be at least 1")
    w = mobius_to_origin(za, zb)
    rho = abs(w)
    if rho == 0.0:
        raise exceptions.DegenerateInputError("segment endpoints coincide")
    total = 2.0 * math.atanh(rho)
    s = np.linspace(0.0, total, count + 1)
    pts = mobius_from_origin(za, np.tanh(s / 2.0) * (w / rho))
    pts[0], pts[-1] = za, zb
    return pts


def project_to_geodesic(g: Geodesic, z):
    """Snap points onto the carrier of g."""
    return g.project(z)


def wedge_vertex(k: int, alpha: float, index: int) -> complex:
    """
    Polygon vertex p_index of the 2k-gon:
    p_{2m−1} = α e^{i(2m−2)π/k}, p_{2m} = e^{i(2m−1)π/k}.
    """
    if index < 1:
        raise exceptions.DomainError("wedge vertices are numbered from 1")
    angle = (index - 1) * math.pi / k
    radius = alpha if index % 2 == 1 else 1.0
    return radius * complex(math.cos(angle), math.sin(angle))


def wedge_vertices(k: int, alpha: float) -> Tuple[complex, complex]:
    """(p₁, p₂) of the fundamental wedge."""
    if k < 2:
        raise exceptions.DomainError(f"k must be an integer >= 2, got {k}")
    if not 0.0 < alpha < 1.0:
        raise exceptions.DomainError(f"alpha must lie in (0, 1), got {alpha}")
    return wedge_vertex(k, alpha, 1), wedge_vertex(k, alpha, 2)


def vertex_angle_at_origin(k: int, q) -> float:
    """Angle ∠p₂0q between the ray to the ideal vertex p₂ and the ray to q."""
    p2 = wedge_vertex(k, 0.5, 2)
    g_p2 = geodesic_through(0j, p2)
    g_q = geodesic_through(0j, as_complex(q))
    return angle_between(0j, g_p2, g_q)


# Isometries of H²×ℝ


@dataclass(frozen=True)
class SpaceIsometry:
    """
    Isometry of H²×ℝ: horizontal z ↦ (a w + b)/(b̄ w + ā) with w = z̄ when
    ``flip`` is set (anti-Möbius) else w = z; vertical t ↦ ε t + c.

    ``word`` records the generator names the isometry was composed from.
    """

    a: complex = 1 + 0j
    b: complex = 0j
    flip: bool = False
    epsilon: int = 1
    shift: float = 0.0
    word: Tuple[str, ...] = field(default=())

    def __post_init__(self):
        det = abs(self.a) ** 2 - abs(self.b) ** 2
        if det <= 0.0:
            raise exceptions.DomainError("horizontal part does not preserve the disk")
        scale = math.sqrt(det)
        object.__setattr__(self, "a", complex(self.a) / scale)
        object.__setattr__(self, "b", complex(self.b) / scale)
        if self.epsilon not in (1, -1):
            raise exceptions.DomainError("vertical sign must be +1 or -1")

    def horizontal(self, z):
        """Apply the horizontal part to complex points."""
        z = np.asarray(z, dtype=complex)
        w = np.conj(z) if self.flip else z
        out = (self.a * w + self.b) / (np.conj(self.b) * w + np.conj(self.a))
        return complex(out) if out.ndim == 0 else out

    def vertical(self, t):
        out = self.epsilon * np.asarray(t, dtype=float) + self.shift
        return float(out) if out.ndim == 0 else out

    def apply(self, point: SpacePoint) -> SpacePoint:
        return SpacePoint.from_complex(self.horizontal(point.p.z), self.vertical(point.t))

    def apply_points(self, z: np.ndarray, t: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """Vectorized apply on complex horizontal coordinates and heights."""
        return self.horizontal(z), self.vertical(t)

    def compose(self, other: "SpaceIsometry") -> "SpaceIsometry":
        """Return self ∘ other."""
        if self.flip:
            a2, b2 = np.conj(other.a), np.conj(other.b)
        else:
            a2, b2 = other.a, other.b
        a = self.a * a2 + self.b * np.conj(b2)
        b = self.a * b2 + self.b * np.conj(a2)
        return SpaceIsometry(
            a=a,
            b=b,
            flip=self.flip != other.flip,
            epsilon=self.epsilon * other.epsilon,
            shift=self.epsilon * other.shift + self.shift,
            word=self.word + other.word,
        )

    def inverse(self) -> "SpaceIsometry":
        if self.flip:
            a, b = self.a, -np.conj(self.b)
        else:
            a, b = np.conj(self.a), -self.b
        inv_word = tuple(
            w[:-3] if w.endswith("^-1") else f"{w}^-1" for w in reversed(self.word)
        )
        return SpaceIsometry(
            a=a,
            b=b,
            flip=self.flip,
            epsilon=self.epsilon,
            shift=-self.epsilon * self.shift,
            word=inv_word,
        )

    def named(self, name: str) -> "SpaceIsometry":
        """Copy of this isometry labelled as a single generator."""
        return SpaceIsometry(self.a, self.b, self.flip, self.epsilon, self.shift, (name,))

    def translation_length(self) -> float:
        """Hyperbolic translation length of an orientation-preserving horizontal part."""
        if self.flip:
            raise exceptions.DomainError("translation length needs an orientation-preserving map")
        half_trace = abs(self.a.real)
        return 2.0 * math.acosh(half_trace) if half_trace > 1.0 else 0.0

    def displacement(self, z: np.ndarray, t: np.ndarray) -> np.ndarray:
        """Product distance between each point and its image."""
        gz, gt = self.apply_points(z, t)
        return product_distance(z, t, gz, gt)

    def matches(self, other: "SpaceIsometry", tol: float = 1e-12) -> bool:
        """Equality as maps (the SU(1,1) lift is defined up to sign)."""
        if self.flip != other.flip or self.epsilon != other.epsilon:
            return False
        if abs(self.shift - other.shift) > tol:
            return False
        same = abs(self.a - other.a) + abs(self.b - other.b)
        opposite = abs(self.a + other.a) + abs(self.b + other.b)
        return min(same, opposite) <= tol


IDENTITY = SpaceIsometry()


def _su11_from_origin(p: complex) -> Tuple[complex, complex]:
    s = math.sqrt(1.0 - abs(p) ** 2)
    return 1.0 / s, p / s


def _reflection_parameters(g: Geodesic) -> Tuple[complex, complex]:
    if g.is_diameter:
        return complex(g.direction), 0j
    return 1j * g.center / g.radius, -1j / g.radius


def _about_point(p: complex, a: complex, b: complex) -> SpaceIsometry:
    """Conjugate the horizontal map (a, b) by the automorphism moving 0 to p."""
    ta, tb = _su11_from_origin(p)
    move = SpaceIsometry(a=ta, b=tb)
    return move.compose(SpaceIsometry(a=a, b=b)).compose(move.inverse())


def make_isometry(kind: str, **params) -> SpaceIsometry:
    """
    Build an isometry of H²×ℝ.

    Args:
        kind: One of ``identity``, ``vertical_line_rotation`` (p, angle=π),
            ``horizontal_geodesic_rotation`` (geodesic, t0=0),
            ``vertical_plane_mirror`` (geodesic), ``slice_mirror`` (t0=0),
            ``hyperbolic_translation`` (geodesic, length),
            ``vertical_translation`` (shift)
        **params: Parameters of the chosen kind; ``name`` labels the result

    Returns:
        SpaceIsometry

    Raises:
        DomainError: For unknown kinds or invalid parameters

    Example:
        >>> iso = make_isometry("slice_mirror", t0=0.0)
        >>> iso.apply(SpacePoint(DiskPoint(0.1, 0.2), 1.3)).t
        -1.3
    """
    if kind == "identity" and "name" not in params:
        return IDENTITY
    name = params.pop("name", kind)
    try:
        iso = _build_isometry(kind, params)
    except KeyError as e:
        raise exceptions.DomainError(f"{kind} needs parameter {e}") from e
    return iso.named(name)


def _build_isometry(kind: str, params: dict) -> SpaceIsometry:
    if kind == "identity":
        return IDENTITY
    if kind == "vertical_line_rotation":
        p = as_complex(params["p"])
        if abs(p) >= 1.0:
            raise exceptions.DomainError(f"axis point {p} is not inside the disk")
        angle = float(params.get("angle", math.pi))
        half = 0.5 * angle
        return _about_point(p, complex(math.cos(half), math.sin(half)), 0j)
    if kind in ("horizontal_geodesic_rotation", "vertical_plane_mirror"):
        g = params["geodesic"]
        if not isinstance(g, Geodesic):
            raise exceptions.DomainError("reflection axis must be a Geodesic")
        a, b = _reflection_parameters(g)
        if kind == "vertical_plane_mirror":
            return SpaceIsometry(a=a, b=b, flip=True)
        t0 = float(params.get("t0", 0.0))
        return SpaceIsometry(a=a, b=b, flip=True, epsilon=-1, shift=2.0 * t0)
    if kind == "slice_mirror":
        return SpaceIsometry(epsilon=-1, shift=2.0 * float(params.get("t0", 0.0)))
    if kind == "hyperbolic_translation":
        g = params["geodesic"]
        length = float(params["length"])
        m = g.nearest_to_origin()
        phi = float(np.angle(g.tangent(m)))
        ma, mb = _su11_from_origin(m)
        frame = SpaceIsometry(a=ma, b=mb).compose(
            SpaceIsometry(a=complex(math.cos(phi / 2), math.sin(phi / 2)))
        )
        boost = SpaceIsometry(a=math.cosh(length / 2), b=math.sinh(length / 2))
        return frame.compose(boost).compose(frame.inverse())
    if kind == "vertical_translation":
        return SpaceIsometry(shift=float(params["shift"]))
    raise exceptions.DomainError(f"unknown isometry kind {kind!r}")


def apply(iso: SpaceIsometry, point: SpacePoint) -> SpacePoint:
    """Apply an isometry to a point of H²×ℝ."""
    return iso.apply(point)
