"""
Truncated wedge domains and their triangulations.

The fundamental domain is the geodesic triangle with corners 0, p₁ = α and a
cap point q_j on the geodesic Γ from p₁ to the ideal vertex p₂ = e^{iπ/k}.
With a truncation side the domain is instead the quadrilateral 0–p₁–q_j–r_j,
where r_j is the foot of the perpendicular dropped from q_j to the ray 0p₂,
so that the side L2 lies on that ray.

Meshes are Delaunay triangulations of boundary samples and quadtree seeds,
spaced by a hyperbolic size field graded toward the ideal vertex and limited
by the width of the channel between Γ and L2.
"""

import hashlib
import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Callable, Dict, List, Optional, Tuple, Union

import numpy as np
from scipy.optimize import brentq
from scipy.spatial import Delaunay

from . import exceptions
from .hypgeom import (
    DiskPoint,
    Geodesic,
    geodesic_through,
    mobius_to_origin,
    vertex_angle_at_origin,
    wedge_vertex,
    wedge_vertices,
)

logger = logging.getLogger(__name__)

MIN_ANGLE_DEG = 5.0
DEFAULT_MAX_VERTICES = 200000
_WIDTH_FRACTION = 0.5
_CORNER_FLOOR = 0.1
_LEAF_RATIO = math.sqrt(2.0)
_CLEARANCE = 0.6


class BoundaryTag(str, Enum):
    """Label of a boundary edge of the wedge domain."""

    L1 = "L1"
    L2 = "L2"
    GAMMA_CAP = "GAMMA_CAP"
    TRUNC = "TRUNC"


def corner_angle(at: complex, a: complex, b: complex) -> float:
    """
    Angle at ``at`` between the geodesics toward ``a`` and toward ``b``.

    Both targets may be ideal points. The angle is read off after moving
    ``at`` to the origin, where geodesics through it are diameters.
    """
    wa = complex(mobius_to_origin(at, a))
    wb = complex(mobius_to_origin(at, b))
    return abs(float(np.angle(wb / wa)))


def alpha_min(k: int) -> float:
    """
    Smallest α for which the side 0p₁ meets the geodesic p₁p₂ at a right angle.

    Args:
        k: Number of vertical-plane ends, at least 3

    Returns:
        α(k), found by root bracketing on the corner angle at p₁

    Raises:
        DomainError: If k < 3

    Example:
        >>> round(alpha_min(3), 6)
        0.267949
    """
    if k < 3:
        raise exceptions.DomainError(f"alpha_min needs k >= 3, got {k}")
    p2 = wedge_vertex(k, 0.5, 2)

    def excess(alpha: float) -> float:
        return corner_angle(complex(alpha, 0.0), 0j, p2) - math.pi / 2.0

    return float(brentq(excess, 1e-9, 1.0 - 1e-9, xtol=1e-15, rtol=1e-15))


def alpha_min_closed_form(k: int) -> float:
    """Angle-of-parallelism form tanh d(0, α) = cos(π/k)."""
    return math.tanh(math.atanh(math.cos(math.pi / k)) / 2.0)


def cap_point(k: int, alpha: float, truncation: float) -> complex:
    """
    Point q_j of Γ at Euclidean distance ``truncation`` from the ideal vertex p₂.

    Raises:
        DomainError: If the distance is not strictly between 0 and |p₁ − p₂|
    """
    p1, p2 = wedge_vertices(k, alpha)
    if not 0.0 < truncation < abs(p1 - p2):
        raise exceptions.DomainError(
            f"truncation {truncation} must lie in (0, {abs(p1 - p2):.6g})"
        )
    gamma = geodesic_through(p1, p2)
    phi1 = float(gamma.arc_angle(p1))
    phi2 = float(gamma.arc_angle(p2))
    if gamma.orientation > 0 and phi2 < phi1:
        phi2 += 2.0 * math.pi
    if gamma.orientation < 0 and phi2 > phi1:
        phi2 -= 2.0 * math.pi

    def gap(phi: float) -> float:
        return abs(complex(gamma.point_at_arc_angle(phi)) - p2) - truncation

    phi = brentq(gap, phi1, phi2, xtol=1e-15)
    return gamma.project(complex(gamma.point_at_arc_angle(phi)))


def trunc_foot(k: int, q: complex) -> complex:
    """
    Foot r_j of the geodesic perpendicular from q to the ray 0p₂.

    The perpendicular is an arc centred on the line through 0 and p₂; its
    inner intersection with that line is 1 / (c + √(c² − 1)).
    """
    d = wedge_vertex(k, 0.5, 2)
    w = complex(q) * d.conjugate()
    if w.real <= 0.0:
        raise exceptions.DomainError(f"{q} does not project onto the ray 0p2")
    c = (abs(w) ** 2 + 1.0) / (2.0 * w.real)
    return d / (c + math.sqrt(c * c - 1.0))


@dataclass(frozen=True)
class WedgeSpec:
    """Parameters of a truncated wedge domain Ω(j)."""

    k: int
    """Number of ideal vertices of the 2k-gon (k >= 2)"""

    alpha: float
    """Euclidean radius of p₁ on the real axis"""

    cap_point: DiskPoint
    """Truncation vertex q_j on Γ"""

    target_h: float = 0.08
    """Target edge length in the sizing metric"""

    grading: float = 2.0
    """Grading exponent toward the ideal vertex (1 = plain hyperbolic sizing)"""

    max_vertices: int = DEFAULT_MAX_VERTICES
    """Vertex budget; larger meshes raise MeshCapacityError"""

    trunc_side: bool = False
    """Close the domain with the perpendicular q_j r_j so that L2 lies on the ray 0p₂"""

    def __post_init__(self):
        if int(self.k) != self.k or self.k < 2:
            raise exceptions.DomainError(f"k must be an integer >= 2, got {self.k}")
        p1, p2 = wedge_vertices(self.k, self.alpha)
        if self.target_h <= 0.0:
            raise exceptions.DomainError("target_h must be positive")
        if self.grading < 1.0:
            raise exceptions.DomainError("grading exponent must be >= 1")
        q = self.cap_point.z
        if abs(q - p1) < 1e-12:
            raise exceptions.DegenerateInputError("cap point coincides with p1")
        residual = geodesic_through(p1, p2).residual(q)
        if residual > 1e-10:
            raise exceptions.DomainError(f"cap point is off Γ (residual {residual:.3g})")

    @classmethod
    def truncated(cls, k: int, alpha: float, truncation: float, **kwargs) -> "WedgeSpec":
        """Spec whose cap point sits at Euclidean distance ``truncation`` from p₂."""
        q = cap_point(k, alpha, truncation)
        return cls(k=k, alpha=alpha, cap_point=DiskPoint.from_complex(q), **kwargs)

    @property
    def p1(self) -> complex:
        return wedge_vertices(self.k, self.alpha)[0]

    @property
    def p2(self) -> complex:
        return wedge_vertices(self.k, self.alpha)[1]

    @property
    def q(self) -> complex:
        return self.cap_point.z

    @property
    def r(self) -> complex:
        """Foot of the truncation side on the ray 0p₂."""
        return trunc_foot(self.k, self.q)

    def outline(self) -> List[Tuple[BoundaryTag, complex, complex]]:
        """Boundary pieces (tag, start, end) in counter-clockwise order from the origin."""
        pieces = [
            (BoundaryTag.L1, 0j, self.p1),
            (BoundaryTag.GAMMA_CAP, self.p1, self.q),
        ]
        if self.trunc_side:
            r = self.r
            pieces += [(BoundaryTag.TRUNC, self.q, r), (BoundaryTag.L2, r, 0j)]
        else:
            pieces.append((BoundaryTag.L2, self.q, 0j))
        return pieces

    def sides(self) -> Dict[BoundaryTag, Geodesic]:
        """Oriented side geodesics; L2 runs 0→q_j, or 0→p₂ with a TRUNC side."""
        out = {
            BoundaryTag.L1: geodesic_through(0j, self.p1),
            BoundaryTag.GAMMA_CAP: geodesic_through(self.p1, self.p2),
        }
        if self.trunc_side:
            out[BoundaryTag.L2] = geodesic_through(0j, self.p2)
            out[BoundaryTag.TRUNC] = geodesic_through(self.q, self.r)
        else:
            out[BoundaryTag.L2] = geodesic_through(0j, self.q)
        return out

    def truncation_angle(self) -> float:
        """∠p₂0q_j."""
        return vertex_angle_at_origin(self.k, self.q)

    def corner_angles(self) -> Dict[str, float]:
        """Interior angles of the geodesic polygon at its corners."""
        p1, q = self.p1, self.q
        if not self.trunc_side:
            return {
                "origin": corner_angle(0j, p1, q),
                "p1": corner_angle(p1, 0j, q),
                "cap": corner_angle(q, 0j, p1),
            }
        r = self.r
        return {
            "origin": corner_angle(0j, p1, r),
            "p1": corner_angle(p1, 0j, q),
            "cap": corner_angle(q, p1, r),
            "trunc": corner_angle(r, q, 0j),
        }


@dataclass
class TriMesh:
    """
    Triangulated planar domain in disk coordinates.

    Boundary edges are stored oriented with the domain on their left.
    """

    vertices: np.ndarray
    """Complex vertex coordinates, shape (n,)"""

    triangles: np.ndarray
    """Counter-clockwise vertex index triples, shape (m, 3)"""

    boundary: Dict[Tuple[int, int], BoundaryTag]
    """Oriented boundary edge → tag"""

    corners: Dict[str, int]
    """Marked corners: origin, p1, cap"""

    sides: Dict[BoundaryTag, Geodesic] = field(default_factory=dict)
    """Carrier geodesic of each tagged side"""

    spec: Optional[WedgeSpec] = None

    @property
    def n_vertices(self) -> int:
        return int(self.vertices.shape[0])

    @property
    def n_triangles(self) -> int:
        return int(self.triangles.shape[0])

    def edges(self) -> np.ndarray:
        """Unique undirected edges, shape (e, 2), sorted rows."""
        tri = self.triangles
        raw = np.concatenate([tri[:, [0, 1]], tri[:, [1, 2]], tri[:, [2, 0]]])
        raw.sort(axis=1)
        return np.unique(raw, axis=0)

    def boundary_mask(self) -> np.ndarray:
        mask = np.zeros(self.n_vertices, dtype=bool)
        for a, b in self.boundary:
            mask[a] = mask[b] = True
        return mask

    def tag_vertices(self, tag: BoundaryTag) -> np.ndarray:
        """Sorted indices of vertices on edges carrying ``tag``."""
        verts = {v for edge, t in self.boundary.items() if t == tag for v in edge}
        return np.array(sorted(verts), dtype=int)

    def tag_chain(self, tag: BoundaryTag) -> List[int]:
        """Vertices of a tagged side in boundary order."""
        nxt = {a: b for (a, b), t in self.boundary.items() if t == tag}
        if not nxt:
            return []
        heads = set(nxt) - set(nxt.values())
        if len(heads) != 1:
            raise exceptions.DomainError(f"{tag.value} edges do not form a single chain")
        chain = [heads.pop()]
        while chain[-1] in nxt:
            chain.append(nxt[chain[-1]])
        return chain

    def boundary_loop(self) -> List[int]:
        """The full boundary cycle starting at the origin corner."""
        nxt = {a: b for a, b in self.boundary}
        start = self.corners.get("origin", next(iter(nxt)))
        loop = [start]
        while nxt[loop[-1]] != start:
            loop.append(nxt[loop[-1]])
            if len(loop) > len(nxt):
                raise exceptions.DomainError("boundary is not a single loop")
        return loop

    def signed_areas(self) -> np.ndarray:
        """Euclidean signed areas of the triangles."""
        z = self.vertices[self.triangles]
        e1, e2 = z[:, 1] - z[:, 0], z[:, 2] - z[:, 0]
        return 0.5 * (np.conj(e1) * e2).imag

    def angles(self) -> np.ndarray:
        """Euclidean interior angles, shape (m, 3), in radians."""
        z = self.vertices[self.triangles]
        out = np.empty(self.triangles.shape)
        for corner in range(3):
            a = z[:, (corner + 1) % 3] - z[:, corner]
            b = z[:, (corner + 2) % 3] - z[:, corner]
            out[:, corner] = np.abs(np.angle(b / a))
        return out

    def hyperbolic_areas(self) -> np.ndarray:
        """Hyperbolic triangle areas by the edge-midpoint rule for λ²."""
        z = self.vertices[self.triangles]
        mids = 0.5 * (z + np.roll(z, -1, axis=1))
        lam2 = (2.0 / (1.0 - np.abs(mids) ** 2)) ** 2
        return np.abs(self.signed_areas()) * lam2.mean(axis=1)

    def total_area(self) -> float:
        return float(self.hyperbolic_areas().sum())

    def edge_lengths(self) -> Tuple[np.ndarray, np.ndarray]:
        """(edges, hyperbolic lengths)."""
        edges = self.edges()
        z = self.vertices
        a, b = z[edges[:, 0]], z[edges[:, 1]]
        ratio = np.abs(a - b) / np.abs(1.0 - np.conj(a) * b)
        return edges, 2.0 * np.arctanh(ratio)

    def side_residuals(self) -> Dict[BoundaryTag, float]:
        """Largest Euclidean residual of each tagged side's vertices from its geodesic."""
        out = {}
        for tag, geo in self.sides.items():
            verts = self.tag_vertices(tag)
            out[tag] = float(np.max(geo.residual(self.vertices[verts]))) if len(verts) else 0.0
        return out

    def polygon_angles(self) -> np.ndarray:
        """Interior angles of the geodesic boundary polygon at each boundary vertex."""
        loop = self.boundary_loop()
        z = self.vertices
        out = np.empty(len(loop))
        for i, v in enumerate(loop):
            prev_v, next_v = loop[i - 1], loop[(i + 1) % len(loop)]
            t_next = geodesic_through(z[v], z[next_v]).tangent(z[v])
            t_prev = geodesic_through(z[v], z[prev_v]).tangent(z[v])
            out[i] = (np.angle(t_prev) - np.angle(t_next)) % (2.0 * math.pi)
        return out

    def is_convex(self, tol: float = 1e-8) -> bool:
        return bool(np.all(self.polygon_angles() <= math.pi + tol))


    def min_angle_floor(self) -> float:
        """Smallest admissible triangle angle in radians.

        A deep truncation makes the cap corner itself sharper than 5°, so the
        floor follows the sharpest corner of the domain.
        """
        floor = math.radians(MIN_ANGLE_DEG)
        if self.spec is not None:
            floor = min(floor, 0.25 * min(self.spec.corner_angles().values()))
        return floor

    def validate(self) -> None:
        """
        Check conformity, orientation, tagging and triangle quality.

        Raises:
            DomainError: On the first violated invariant
        """
        if np.any(self.signed_areas() <= 0.0):
            raise exceptions.DomainError("triangles are not consistently oriented")
        tri = self.triangles
        directed = np.concatenate([tri[:, [0, 1]], tri[:, [1, 2]], tri[:, [2, 0]]])
        keys = directed[:, 0] * self.n_vertices + directed[:, 1]
        if len(np.unique(keys)) != len(keys):
            raise exceptions.DomainError("mesh is not conforming (repeated directed edge)")
        reverse = set((directed[:, 1] * self.n_vertices + directed[:, 0]).tolist())
        free = {(int(a), int(b)) for (a, b), key in zip(directed, keys) if key not in reverse}
        if free != set(self.boundary):
            raise exceptions.DomainError("boundary tags do not match the free edges")
        worst = float(self.angles().min())
        if worst <= self.min_angle_floor():
            raise exceptions.DomainError(
                f"degenerate triangle, min angle {math.degrees(worst):.3g} deg"
            )

    def checksum(self) -> str:
        """SHA-256 of the plain-text dump, keying fields to this mesh."""
        return hashlib.sha256(format_mesh(self).encode("ascii")).hexdigest()


def _sizing_weight(z: np.ndarray, grading: float) -> np.ndarray:
    lam = 2.0 / (1.0 - np.abs(z) ** 2)
    return lam * (0.5 * lam) ** (0.5 * (grading - 1.0))


class _WedgeRegion:
    """Signed distances and the size field of a wedge domain, in disk coordinates."""

    def __init__(self, spec: WedgeSpec):
        self.spec = spec
        self.sides = spec.sides()
        self.floor = _CORNER_FLOOR * float(self.graded(np.array([spec.q]))[0])

    def side_distance(self, tag: BoundaryTag, z: np.ndarray) -> np.ndarray:
        """Euclidean signed distance to a side's carrier, negative on the domain side."""
        geo = self.sides[tag]
        if geo.is_diameter:
            offset = (z * np.conj(geo.direction)).imag
            return -offset if tag is BoundaryTag.L1 else offset
        # the domain lies outside every arc's circle
        return geo.radius - np.abs(z - geo.center)

    def signed_distance(self, z: np.ndarray) -> np.ndarray:
        out = np.abs(z) - 1.0
        for tag in self.sides:
            out = np.maximum(out, self.side_distance(tag, z))
        return out

    def graded(self, z: np.ndarray) -> np.ndarray:
        """Euclidean length of a target_h step in the graded sizing metric."""
        radius = np.minimum(np.abs(z), 1.0 - 1e-9)
        return self.spec.target_h / _sizing_weight(radius, self.spec.grading)

    def size(self, z: np.ndarray) -> np.ndarray:
        width = np.abs(self.side_distance(BoundaryTag.GAMMA_CAP, z)) + np.abs(
            self.side_distance(BoundaryTag.L2, z)
        )
        return np.maximum(np.minimum(self.graded(z), _WIDTH_FRACTION * width), self.floor)


class _SidePath:
    """Euclidean arclength parametrization of one boundary piece."""

    def __init__(self, geo: Geodesic, start: complex, end: complex):
        self.geo = geo
        self.start, self.end = complex(start), complex(end)
        if geo.is_diameter:
            self.length = abs(self.end - self.start)
        else:
            self.phi0 = float(np.angle(self.start - geo.center))
            sweep = float(np.angle((self.end - geo.center) / (self.start - geo.center)))
            self.sign = 1.0 if sweep > 0.0 else -1.0
            self.length = geo.radius * abs(sweep)

    def at(self, u) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        if self.geo.is_diameter:
            return self.start + u * ((self.end - self.start) / self.length)
        phi = self.phi0 + self.sign * u / self.geo.radius
        return self.geo.center + self.geo.radius * np.exp(1j * phi)


def _capacity_error(spec: WedgeSpec, needed: int) -> exceptions.MeshCapacityError:
    suggested = spec.target_h * math.sqrt(needed / spec.max_vertices) * 1.05
    return exceptions.MeshCapacityError(
        f"wedge mesh needs more than {needed} vertices (budget {spec.max_vertices})",
        suggested_h=suggested,
    )


def _sample_side(
    path: _SidePath, size: Callable[[np.ndarray], np.ndarray], spec: WedgeSpec
) -> np.ndarray:
    """
    Arclength parameters 0 = u₀ < … < u_n = L spaced by the size field.

    Steps are marched from the finer end, so a sharp corner gets a geometric
    ladder of points, then rescaled to land on the far end.
    """
    length = path.length
    ends = size(path.at(np.array([0.0, length])))
    reverse = bool(ends[1] < ends[0])

    def local(v: float) -> float:
        pos = length - v if reverse else v
        return float(size(path.at(np.array([min(max(pos, 0.0), length)])))[0])

    marks = [0.0]
    v = 0.0
    while True:
        v += local(v + 0.5 * local(v))
        if v >= length:
            break
        marks.append(v)
        if len(marks) > spec.max_vertices:
            raise _capacity_error(spec, len(marks))
    shrink = length / v
    if len(marks) > 1 and length / marks[-1] < 1.0 / shrink:
        params = np.array(marks) * (length / marks[-1])
    else:
        params = np.append(marks, v) * shrink
    if reverse:
        params = length - params[::-1]
    params[0], params[-1] = 0.0, length
    return params


def _quadtree_seeds(region: _WedgeRegion, outline: np.ndarray, reserved: int) -> np.ndarray:
    """Centres of quadtree leaves sized by the size field, kept clear of the boundary."""
    spec = region.spec
    lo = complex(outline.real.min(), outline.imag.min())
    span = max(np.ptp(outline.real), np.ptp(outline.imag)) * 1.01
    centers = np.array([lo + 0.5 * span * (1 + 1j)])
    half = 0.5 * span
    kept: List[np.ndarray] = []
    count = reserved
    while centers.size:
        centers = centers[region.signed_distance(centers) <= half * math.sqrt(2.0)]
        size = region.size(centers)
        split = 2.0 * half > _LEAF_RATIO * size
        leaves, leaf_size = centers[~split], size[~split]
        leaves = leaves[region.signed_distance(leaves) <= -_CLEARANCE * leaf_size]
        kept.append(leaves)
        count += len(leaves)
        if count > spec.max_vertices:
            raise _capacity_error(spec, count)
        half *= 0.5
        parents = centers[split]
        centers = np.concatenate(
            [parents + half * offset for offset in (1 + 1j, 1 - 1j, -1 + 1j, -1 - 1j)]
        )
    return np.concatenate(kept)


def _close_outline(triangles: np.ndarray, n_outline: int) -> np.ndarray:
    """
    Re-attach outline vertices skipped by a kept triangle.

    Samples of a straight side that round into a sliver hull triangle leave the
    middle sample off the mesh once the sliver is dropped; the triangle on the
    long edge is fanned through the skipped samples instead.
    """
    owner = {}
    for row, tri in enumerate(triangles.tolist()):
        for i in range(3):
            owner[(tri[i], tri[(i + 1) % 3])] = (row, tri[(i + 2) % 3])
    dropped, extra = [], []
    for a, b in _free_edges(triangles):
        if a >= n_outline or b >= n_outline:
            raise exceptions.DomainError(f"mesh boundary edge ({a}, {b}) leaves the outline")
        gap = (b - a) % n_outline
        if gap == 1:
            continue
        row, apex = owner[(a, b)]
        chain = [(a + i) % n_outline for i in range(gap + 1)]
        dropped.append(row)
        extra.extend((u, v, apex) for u, v in zip(chain[:-1], chain[1:]))
    if not dropped:
        return triangles
    logger.debug(f"Re-attached {len(extra) - len(dropped)} skipped outline vertices")
    kept = np.delete(triangles, dropped, axis=0)
    return np.concatenate([kept, np.array(extra, dtype=int)])


def build_wedge(spec: WedgeSpec) -> TriMesh:
    """
    Triangulate the wedge domain of ``spec``.

    Every side is sampled by marching the size field, the interior is seeded
    with quadtree leaf centres, and the points are triangulated with
    ``scipy.spatial.Delaunay``. The arcs bulge into the domain, so triangles
    whose three vertices lie on one side fill the gap between an arc and its
    chord (or are rounding slivers of a straight side) and are dropped.

    Args:
        spec: Domain parameters

    Returns:
        Validated TriMesh with L1, GAMMA_CAP, L2 and, for a truncation side, TRUNC tags

    Raises:
        MeshCapacityError: If the mesh would exceed ``spec.max_vertices``
        DomainError: If the triangulation fails validation

    Example:
        >>> spec = WedgeSpec.truncated(2, 0.5, 0.1, target_h=0.1)
        >>> mesh = build_wedge(spec)
        >>> sorted(mesh.corners)
        ['cap', 'origin', 'p1']
    """
    region = _WedgeRegion(spec)
    sides = region.sides

    pieces: List[np.ndarray] = []
    tags: List[BoundaryTag] = []
    corners: Dict[str, int] = {}
    spans: List[Tuple[int, int]] = []
    offset = 0
    for name, (tag, start, end) in zip(("origin", "p1", "cap", "trunc"), spec.outline()):
        path = _SidePath(sides[tag], start, end)
        pts = path.at(_sample_side(path, region.size, spec))
        pts[0] = start
        corners[name] = offset
        spans.append((offset, offset + len(pts) - 1))
        pieces.append(pts[:-1])
        tags.extend([tag] * (len(pts) - 1))
        offset += len(pts) - 1
    outline = np.concatenate(pieces)
    n_outline = len(outline)
    if n_outline >= spec.max_vertices:
        raise _capacity_error(spec, n_outline)

    points = np.concatenate([outline, _quadtree_seeds(region, outline, n_outline)])
    triangulation = Delaunay(np.column_stack([points.real, points.imag]))
    if len(triangulation.coplanar):
        raise exceptions.DomainError(
            f"{len(triangulation.coplanar)} mesh points were dropped by the triangulation"
        )
    simplices = triangulation.simplices

    membership = np.zeros((len(spans), len(points)), dtype=bool)
    for side, (first, last) in enumerate(spans):
        membership[side, np.arange(first, last + 1) % n_outline] = True
    one_side = membership[:, simplices].all(axis=2).any(axis=0)
    triangles = _close_outline(_orient(points, simplices[~one_side]), n_outline)
    if len(np.unique(triangles)) != len(points):
        raise exceptions.DomainError("some mesh points are not covered by a triangle")

    mesh = TriMesh(
        vertices=points,
        triangles=triangles,
        boundary={(i, (i + 1) % n_outline): tag for i, tag in enumerate(tags)},
        corners=corners,
        sides=sides,
        spec=spec,
    )
    mesh.validate()
    logger.info(
        f"Built wedge mesh k={spec.k} alpha={spec.alpha}: "
        f"{mesh.n_vertices} vertices, {mesh.n_triangles} triangles"
    )
    return mesh


def _orient(vertices: np.ndarray, triangles: np.ndarray) -> np.ndarray:
    z = vertices[triangles]
    area = ((np.conj(z[:, 1] - z[:, 0])) * (z[:, 2] - z[:, 0])).imag
    out = triangles.copy()
    flip = area < 0
    out[flip, 1], out[flip, 2] = triangles[flip, 2], triangles[flip, 1]
    return out


def _free_edges(triangles: np.ndarray) -> List[Tuple[int, int]]:
    directed = [
        (int(a), int(b))
        for t in triangles
        for a, b in ((t[0], t[1]), (t[1], t[2]), (t[2], t[0]))
    ]
    present = set(directed)
    return [(a, b) for a, b in directed if (b, a) not in present]
def refine(mesh: TriMesh) -> TriMesh:
    """
    Uniform 1→4 subdivision.

    New boundary vertices are projected onto their side's geodesic and inherit
    the parent edge's tag.

    Example:
        >>> fine = refine(mesh)
        >>> fine.n_triangles == 4 * mesh.n_triangles
        True
    """
    edges = mesh.edges()
    n = mesh.n_vertices
    midpoint_index = {(int(a), int(b)): n + i for i, (a, b) in enumerate(edges)}
    z = mesh.vertices
    mids = 0.5 * (z[edges[:, 0]] + z[edges[:, 1]])

    boundary: Dict[Tuple[int, int], BoundaryTag] = {}
    for (a, b), tag in mesh.boundary.items():
        m = midpoint_index[(min(a, b), max(a, b))]
        geo = mesh.sides.get(tag)
        if geo is not None:
            mids[m - n] = geo.project(mids[m - n])
        boundary[(a, m)] = tag
        boundary[(m, b)] = tag

    def mid(a: int, b: int) -> int:
        return midpoint_index[(min(a, b), max(a, b))]

    tris = []
    for a, b, c in mesh.triangles:
        ab, bc, ca = mid(a, b), mid(b, c), mid(c, a)
        tris.extend([(a, ab, ca), (ab, b, bc), (ca, bc, c), (ab, bc, ca)])

    fine = TriMesh(
        vertices=np.concatenate([z, mids]),
        triangles=np.array(tris, dtype=int),
        boundary=boundary,
        corners=dict(mesh.corners),
        sides=dict(mesh.sides),
        spec=mesh.spec,
    )
    logger.debug(f"Refined mesh to {fine.n_vertices} vertices")
    return fine


def distance_to_side(mesh: TriMesh, tag: BoundaryTag) -> np.ndarray:
    """Hyperbolic distance from every vertex to the complete geodesic carrying ``tag``."""
    if tag not in mesh.sides:
        raise exceptions.DomainError(f"mesh has no side {tag.value}")
    return mesh.sides[tag].distance(mesh.vertices)


def compact_subregion(mesh: TriMesh, clearance: float = 0.5) -> np.ndarray:
    """Boolean mask of vertices farther than ``clearance`` from the Γ side."""
    return distance_to_side(mesh, BoundaryTag.GAMMA_CAP) > clearance


def format_mesh(mesh: TriMesh) -> str:
    """
    Plain-text mesh format.

    Lines: ``w k alpha qx qy target_h grading [trunc]`` (optional wedge record),
    ``v x y``, ``t i j k``, ``b i j TAG`` and ``c name index``.
    """
    lines = ["# h2xr mesh"]
    if mesh.spec is not None:
        s = mesh.spec
        lines.append(
            f"w {s.k} {float(s.alpha)!r} {float(s.q.real)!r} {float(s.q.imag)!r} {float(s.target_h)!r} {float(s.grading)!r}"
            + (" trunc" if s.trunc_side else "")
        )
    lines.extend(f"v {float(p.real)!r} {float(p.imag)!r}" for p in mesh.vertices)
    lines.extend(f"t {a} {b} {c}" for a, b, c in mesh.triangles)
    lines.extend(f"b {a} {b} {tag.value}" for (a, b), tag in sorted(mesh.boundary.items()))
    lines.extend(f"c {name} {index}" for name, index in sorted(mesh.corners.items()))
    return "\n".join(lines) + "\n"


def dump_mesh(mesh: TriMesh, path: Union[str, Path]) -> None:
    Path(path).write_text(format_mesh(mesh), encoding="ascii")


def load_mesh(path: Union[str, Path]) -> TriMesh:
    """
    Read a mesh written by :func:`dump_mesh`.

    Raises:
        DomainError: On malformed lines
    """
    verts, tris, boundary, corners = [], [], {}, {}
    spec = None
    for number, raw in enumerate(Path(path).read_text(encoding="ascii").splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        try:
            if parts[0] == "v":
                verts.append(complex(float(parts[1]), float(parts[2])))
            elif parts[0] == "t":
                tris.append(tuple(int(p) for p in parts[1:4]))
            elif parts[0] == "b":
                boundary[(int(parts[1]), int(parts[2]))] = BoundaryTag(parts[3])
            elif parts[0] == "c":
                corners[parts[1]] = int(parts[2])
            elif parts[0] == "w":
                q = complex(float(parts[3]), float(parts[4]))
                spec = WedgeSpec(
                    k=int(parts[1]),
                    alpha=float(parts[2]),
                    cap_point=DiskPoint.from_complex(q),
                    target_h=float(parts[5]),
                    grading=float(parts[6]),
                    trunc_side=parts[7:8] == ["trunc"],
                )
            else:
                raise ValueError(f"unknown record {parts[0]!r}")
        except (IndexError, ValueError) as e:
            raise exceptions.DomainError(f"{path}:{number}: {e}") from e
    return TriMesh(
        vertices=np.array(verts, dtype=complex),
        triangles=np.array(tris, dtype=int).reshape(-1, 3),
        boundary=boundary,
        corners=corners,
        sides=spec.sides() if spec is not None else {},
        spec=spec,
    )
