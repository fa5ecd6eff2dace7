"""
Immersed surfaces in H²×ℝ and their discrete differential geometry.

Vectors are expressed in the orthonormal product frame (∂x/λ, ∂y/λ, ∂t).
Tangent and normal data of neighbouring points are compared after parallel
transport along the joining edge, which in that frame is a rotation of the
horizontal components by β = φ_y Δx − φ_x Δy with φ = ln λ.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from . import exceptions
from .graphsolve import ScalarField
from .hypgeom import (
    SpaceIsometry,
    as_complex,
    geodesic_segment_points,
    hyp_distance,
    log_factor_gradient,
    product_distance,
    vertex_angle_at_origin,
)
from .meshdom import BoundaryTag, TriMesh

logger = logging.getLogger(__name__)

CHAIN_ORDER = ("L1", "VERT_P", "GAMMA_CAP", "VERT_Q", "TRUNC", "L2")
UNIT_TOL = 1e-8


@dataclass
class Immersion:
    """
    Triangulated surface in H²×ℝ given by vertex positions (z, t).

    Boundary chains are listed in boundary order with the surface on their left.
    """

    z: np.ndarray
    """Complex horizontal coordinates, shape (n,)"""

    t: np.ndarray
    """Heights, shape (n,)"""

    triangles: np.ndarray
    chains: Dict[str, List[int]] = field(default_factory=dict)
    corners: Dict[str, int] = field(default_factory=dict)
    source: Optional[np.ndarray] = None
    """Mesh vertex each immersion vertex was lifted from"""

    mesh: Optional[TriMesh] = None
    cap: Optional[float] = None

    def __post_init__(self):
        self.z = np.asarray(self.z, dtype=complex)
        self.t = np.asarray(self.t, dtype=float)
        self.triangles = np.asarray(self.triangles, dtype=int).reshape(-1, 3)
        if self.z.shape != self.t.shape:
            raise exceptions.DomainError("horizontal and vertical coordinates differ in length")
        if np.any(np.abs(self.z) >= 1.0):
            raise exceptions.DomainError("immersion vertex on or outside the unit circle")

    @property
    def n_vertices(self) -> int:
        return int(self.z.shape[0])

    @property
    def n_triangles(self) -> int:
        return int(self.triangles.shape[0])

    def edges(self) -> np.ndarray:
        tri = self.triangles
        raw = np.concatenate([tri[:, [0, 1]], tri[:, [1, 2]], tri[:, [2, 0]]])
        raw.sort(axis=1)
        return np.unique(raw, axis=0)

    def edge_lengths(self) -> Tuple[np.ndarray, np.ndarray]:
        """(edges, product-space distances between their endpoints)."""
        e = self.edges()
        a, b = e[:, 0], e[:, 1]
        return e, product_distance(self.z[a], self.t[a], self.z[b], self.t[b])

    def side_lengths(self) -> np.ndarray:
        """Length of the side opposite each corner, shape (m, 3)."""
        tri = self.triangles
        out = np.empty(tri.shape)
        for c in range(3):
            a, b = tri[:, (c + 1) % 3], tri[:, (c + 2) % 3]
            out[:, c] = product_distance(self.z[a], self.t[a], self.z[b], self.t[b])
        return out

    def metric(self) -> np.ndarray:
        """First fundamental form (g11, g12, g22) in the edge basis v0→v1, v0→v2."""
        ell = self.side_lengths()
        g11, g22 = ell[:, 2] ** 2, ell[:, 1] ** 2
        g12 = 0.5 * (g11 + g22 - ell[:, 0] ** 2)
        return np.column_stack([g11, g12, g22])

    def intrinsic_angles(self) -> np.ndarray:
        """Corner angles of the triangles with the product-distance side lengths."""
        ell = self.side_lengths()
        out = np.empty(ell.shape)
        for c in range(3):
            a, b, opp = ell[:, (c + 1) % 3], ell[:, (c + 2) % 3], ell[:, c]
            cos = (a * a + b * b - opp * opp) / (2.0 * a * b)
            out[:, c] = np.arccos(np.clip(cos, -1.0, 1.0))
        return out

    def areas(self) -> np.ndarray:
        """Triangle areas by the edge-midpoint rule for the pulled-back metric."""
        zt, tt = self.z[self.triangles], self.t[self.triangles]
        dz1, dz2 = zt[:, 1] - zt[:, 0], zt[:, 2] - zt[:, 0]
        dt1, dt2 = tt[:, 1] - tt[:, 0], tt[:, 2] - tt[:, 0]
        cross = (np.conj(dz1) * dz2).imag
        shear = np.abs(dt2 * dz1 - dt1 * dz2) ** 2
        mids = 0.5 * (zt + np.roll(zt, -1, axis=1))
        lam2 = (2.0 / (1.0 - np.abs(mids) ** 2)) ** 2
        gram = lam2 ** 2 * cross[:, None] ** 2 + lam2 * shear[:, None]
        return 0.5 * np.sqrt(gram).mean(axis=1)

    def total_area(self) -> float:
        return float(self.areas().sum())

    def angle_sums(self) -> np.ndarray:
        """Sum of intrinsic corner angles at each vertex."""
        theta = np.zeros(self.n_vertices)
        angles = self.intrinsic_angles()
        for c in range(3):
            np.add.at(theta, self.triangles[:, c], angles[:, c])
        return theta

    def free_edges(self) -> List[Tuple[int, int]]:
        tri = self.triangles
        directed = np.concatenate([tri[:, [0, 1]], tri[:, [1, 2]], tri[:, [2, 0]]])
        pairs = set(map(tuple, directed.tolist()))
        return [(a, b) for a, b in pairs if (b, a) not in pairs]

    def boundary_mask(self) -> np.ndarray:
        mask = np.zeros(self.n_vertices, dtype=bool)
        for a, b in self.free_edges():
            mask[a] = mask[b] = True
        return mask

    def transformed(self, iso: SpaceIsometry) -> "Immersion":
        """Image of the immersion under an ambient isometry."""
        z, t = iso.apply_points(self.z, self.t)
        return Immersion(
            z=z,
            t=t,
            triangles=self.triangles.copy(),
            chains={k: list(v) for k, v in self.chains.items()},
            corners=dict(self.corners),
            source=self.source,
            mesh=self.mesh,
            cap=self.cap,
        )


def _fan(triangles: np.ndarray, corner: int) -> Tuple[List[int], List[int]]:
    """Neighbours of a boundary vertex in counter-clockwise order, with the rows between them."""
    rows = np.nonzero((triangles == corner).any(axis=1))[0]
    nxt = {}
    for r in rows:
        tri = [int(v) for v in triangles[r]]
        k = tri.index(corner)
        nxt[tri[(k + 1) % 3]] = (tri[(k + 2) % 3], int(r))
    starts = set(nxt) - {c for c, _ in nxt.values()}
    if len(starts) != 1:
        raise exceptions.DomainError(f"vertex {corner} has no simple boundary fan")
    order, fan_rows = [starts.pop()], []
    while order[-1] in nxt:
        c, r = nxt[order[-1]]
        fan_rows.append(r)
        order.append(c)
    return order, fan_rows


def immerse(mesh: TriMesh, u: Union[ScalarField, np.ndarray], blow_up: bool = True) -> Immersion:
    """
    Lift a graph t = u(z) over a wedge mesh to an immersion.

    Where the boundary data jump at p₁, and at the cap corner of a triangle,
    the corner vertex is replaced by a column of copies at the heights of its
    fan neighbours, so the boundary gains the vertical segments over those
    points. The data are continuous at both ends of a TRUNC side.

    Args:
        mesh: Wedge mesh
        u: Heights per mesh vertex
        blow_up: Resolve the corners with a data jump into vertical segments

    Returns:
        Immersion with chains L1, VERT_P, GAMMA_CAP, VERT_Q, TRUNC, L2 (the
        vertical ones only when a jump is present, TRUNC only on a quadrilateral)

    Example:
        >>> imm = immerse(mesh, np.zeros(mesh.n_vertices))
        >>> abs(imm.total_area() - mesh.total_area()) < 1e-12
        True
    """
    values = u.values if isinstance(u, ScalarField) else np.asarray(u, dtype=float)
    if values.shape != (mesh.n_vertices,):
        raise exceptions.DomainError("height field does not conform to mesh")
    cap = u.cap if isinstance(u, ScalarField) else None

    z = list(mesh.vertices)
    t = list(values)
    source = list(range(mesh.n_vertices))
    triangles = [tuple(int(v) for v in row) for row in mesh.triangles]
    sides = (BoundaryTag.L1, BoundaryTag.GAMMA_CAP, BoundaryTag.TRUNC, BoundaryTag.L2)
    chains = {tag.value: mesh.tag_chain(tag) for tag in sides}
    if not chains["TRUNC"]:
        del chains["TRUNC"]
    corners = {"origin": mesh.corners["origin"]}
    jumps = [("p1", "VERT_P", "L1", "GAMMA_CAP", "p1_bottom", "p1_top")]
    if "TRUNC" in chains:
        corners["cap"] = mesh.corners["cap"]
        corners["trunc"] = mesh.corners["trunc"]
    else:
        jumps.append(("cap", "VERT_Q", "GAMMA_CAP", "L2", "cap_top", "cap_bottom"))
    tol = 1e-12 * max(1.0, float(np.abs(values).max(initial=0.0)))

    for name, vertical, before, after, first, last in jumps:
        corner = mesh.corners[name]
        fan, rows = _fan(mesh.triangles, corner)
        if not blow_up or abs(values[fan[0]] - values[fan[-1]]) <= tol:
            corners[name] = corner
            continue
        copies = [corner]
        t[corner] = values[fan[0]]
        for b in fan[1:]:
            if abs(values[b] - t[copies[-1]]) <= tol:
                copies.append(copies[-1])
                continue
            copies.append(len(z))
            z.append(mesh.vertices[corner])
            t.append(values[b])
            source.append(corner)
        for i, r in enumerate(rows):
            triangles[r] = (copies[i], fan[i], fan[i + 1])
            if copies[i + 1] != copies[i]:
                triangles.append((copies[i], fan[i + 1], copies[i + 1]))
        # boundary runs down the copies from the last fan neighbour to the first
        column = []
        for v in reversed(copies):
            if not column or column[-1] != v:
                column.append(v)
        chains[before][-1] = column[0]
        chains[after][0] = column[-1]
        chains[vertical] = column
        corners[first] = column[0]
        corners[last] = column[-1]

    ordered = {name: chains[name] for name in CHAIN_ORDER if name in chains}
    imm = Immersion(
        z=np.array(z),
        t=np.array(t),
        triangles=np.array(triangles),
        chains=ordered,
        corners=corners,
        source=np.array(source),
        mesh=mesh,
        cap=cap,
    )
    logger.debug(f"Immersed {imm.n_vertices} vertices, {imm.n_triangles} triangles")
    return imm


def from_positions(
    z: Sequence[complex],
    t: Sequence[float],
    triangles: Sequence[Sequence[int]],
    chains: Optional[Dict[str, List[int]]] = None,
    corners: Optional[Dict[str, int]] = None,
) -> Immersion:
    """Immersion from explicit vertex positions and connectivity."""
    return Immersion(
        z=np.asarray(z, dtype=complex),
        t=np.asarray(t, dtype=float),
        triangles=np.asarray(triangles, dtype=int),
        chains=dict(chains or {}),
        corners=dict(corners or {}),
    )


def vertical_plane_patch(
    a, b, heights: Tuple[float, float] = (-1.0, 1.0), n_along: int = 16, n_up: int = 16
) -> Immersion:
    """
    Ruled patch of the vertical plane Γ×ℝ over the geodesic segment from a to b.

    Chains run BOTTOM, RIGHT, TOP, LEFT around the patch.
    """
    if n_along < 1 or n_up < 1:
        raise exceptions.DomainError("patch needs at least one cell in each direction")
    base = geodesic_segment_points(as_complex(a), as_complex(b), n_along)
    levels = np.linspace(heights[0], heights[1], n_up + 1)
    z = np.tile(base, n_up + 1)
    t = np.repeat(levels, n_along + 1)

    def vid(i: int, j: int) -> int:
        return j * (n_along + 1) + i

    tris = []
    for j in range(n_up):
        for i in range(n_along):
            tris.append((vid(i, j), vid(i + 1, j), vid(i + 1, j + 1)))
            tris.append((vid(i, j), vid(i + 1, j + 1), vid(i, j + 1)))
    chains = {
        "BOTTOM": [vid(i, 0) for i in range(n_along + 1)],
        "RIGHT": [vid(n_along, j) for j in range(n_up + 1)],
        "TOP": [vid(i, n_up) for i in range(n_along, -1, -1)],
        "LEFT": [vid(0, j) for j in range(n_up, -1, -1)],
    }
    return Immersion(z=z, t=t, triangles=np.array(tris), chains=chains, corners={"base": 0})


@dataclass
class GeometryFields:
    """Angle function, tangent part of ∂t, shape operator and curvature."""

    nu: np.ndarray
    """ν = ⟨N, ∂t⟩ per vertex"""

    T: np.ndarray
    """Tangential part of ∂t per vertex, orthonormal components, shape (n, 3)"""

    normals: np.ndarray
    tri_normals: np.ndarray
    frames: np.ndarray
    """Per-triangle rows (f1, f2, N), shape (m, 3, 3)"""

    shape: np.ndarray
    """Fitted shape operator in the (f1, f2) basis, shape (m, 2, 2)"""

    asymmetry: np.ndarray
    """|S₁₂ − S₂₁| per triangle, zero for an exact fit"""

    mean_curvature: np.ndarray
    """Half the trace of S per triangle"""

    K: np.ndarray
    """Gauss curvature det S − ν² per triangle"""

    areas: np.ndarray

    @property
    def tri_nu(self) -> np.ndarray:
        return self.tri_normals[:, 2]

    def unit_defect(self) -> float:
        """Largest | |T|² + ν² − 1 | over vertices."""
        return float(np.abs((self.T ** 2).sum(axis=1) + self.nu ** 2 - 1.0).max(initial=0.0))


def transport_angle(za: np.ndarray, zb: np.ndarray) -> np.ndarray:
    """Rotation of horizontal frame components under parallel transport from za to zb."""
    dz = zb - za
    g = log_factor_gradient(0.5 * (za + zb))
    return (np.conj(dz) * g).imag


def edge_vectors(
    z: np.ndarray, t: np.ndarray, a: np.ndarray, b: np.ndarray, at: np.ndarray
) -> np.ndarray:
    dz = z[b] - z[a]
    lam = 2.0 / (1.0 - np.abs(at) ** 2)
    return np.column_stack([lam * dz.real, lam * dz.imag, t[b] - t[a]])


def geometry(imm: Immersion) -> GeometryFields:
    """
    Normals, ν, T, shape operator and Gauss curvature of an immersion.

    The shape operator of each triangle is the least-squares fit of
    −∇_e N over its three edges, with N the area-weighted vertex normals.
    It is used as fitted: its asymmetry and half its trace (H) are reported
    as discretization diagnostics and K comes from its determinant.

    Raises:
        DomainError: If a triangle has a degenerate metric
    """
    tri, z, t = imm.triangles, imm.z, imm.t
    g = imm.metric()
    det = g[:, 0] * g[:, 2] - g[:, 1] ** 2
    bad = np.nonzero(det <= 1e-14 * np.maximum(g[:, 0] * g[:, 2], 1e-300))[0]
    if len(bad):
        raise exceptions.DomainError(f"degenerate triangle metric at triangle {int(bad[0])}")

    centroid = z[tri].mean(axis=1)
    e1 = edge_vectors(z, t, tri[:, 0], tri[:, 1], centroid)
    e2 = edge_vectors(z, t, tri[:, 0], tri[:, 2], centroid)
    cross = np.cross(e1, e2)
    tri_normals = cross / np.linalg.norm(cross, axis=1)[:, None]
    f1 = e1 / np.linalg.norm(e1, axis=1)[:, None]
    f2 = np.cross(tri_normals, f1)
    frames = np.stack([f1, f2, tri_normals], axis=1)

    areas = imm.areas()
    acc = np.zeros((imm.n_vertices, 3))
    for c in range(3):
        np.add.at(acc, tri[:, c], tri_normals * areas[:, None])
    normals = acc / np.linalg.norm(acc, axis=1)[:, None]
    nu = normals[:, 2]
    T = -nu[:, None] * normals
    T[:, 2] += 1.0

    tangents = np.empty((imm.n_triangles, 3, 3))
    diffs = np.empty((imm.n_triangles, 3, 3))
    for k in range(3):
        a, b = tri[:, k], tri[:, (k + 1) % 3]
        tangents[:, k] = edge_vectors(z, t, a, b, 0.5 * (z[a] + z[b]))
        h = (normals[a, 0] + 1j * normals[a, 1]) * np.exp(1j * transport_angle(z[a], z[b]))
        diffs[:, k] = normals[b] - np.column_stack([h.real, h.imag, normals[a, 2]])
    basis = frames[:, :2, :]
    E = np.einsum("mij,mkj->mik", basis, tangents)  # (m, 2, 3)
    D = np.einsum("mij,mkj->mik", basis, diffs)
    A = E @ E.transpose(0, 2, 1)
    B = D @ E.transpose(0, 2, 1)
    M = -np.linalg.solve(A, B.transpose(0, 2, 1)).transpose(0, 2, 1)
    H = 0.5 * (M[:, 0, 0] + M[:, 1, 1])
    det_s = M[:, 0, 0] * M[:, 1, 1] - M[:, 0, 1] * M[:, 1, 0]
    K = det_s - tri_normals[:, 2] ** 2
    fields = GeometryFields(
        nu=nu,
        T=T,
        normals=normals,
        tri_normals=tri_normals,
        frames=frames,
        shape=M,
        asymmetry=np.abs(M[:, 0, 1] - M[:, 1, 0]),
        mean_curvature=H,
        K=K,
        areas=areas,
    )
    defect = fields.unit_defect()
    if defect > UNIT_TOL:
        logger.warning(f"|T|^2 + nu^2 deviates from 1 by {defect:.2e}")
    return fields


@dataclass
class TotalCurvature:
    """∫K dA with a cross-check and an error bar."""

    value: float
    """Σ K·area with K from the Gauss equation"""

    intrinsic: float
    """Angle-defect total over interior vertices"""

    error: float

    def __float__(self) -> float:
        return self.value


def total_curvature(
    imm: Immersion, fields: GeometryFields, coarse: Optional[float] = None
) -> TotalCurvature:
    """
    Total curvature of an immersion.

    Args:
        imm: Immersion
        fields: Its geometry
        coarse: Total curvature on a coarser mesh; when given the error bar is
            the refinement difference, otherwise the gap to the angle-defect value

    Returns:
        TotalCurvature
    """
    value = float(np.sum(fields.K * fields.areas))
    interior = ~imm.boundary_mask()
    intrinsic = float(np.sum(2.0 * math.pi - imm.angle_sums()[interior]))
    error = abs(value - coarse) if coarse is not None else abs(value - intrinsic)
    return TotalCurvature(value=value, intrinsic=intrinsic, error=error)


@dataclass
class GaussBonnetAudit:
    """Terms of ∫K + Σ∫k_g + Σθ = 2π for one piece."""

    total_curvature: float
    arc_turning: Dict[str, float]
    exterior_angles: Dict[str, float]
    closure_residual: float
    expected_angles: Dict[str, float] = field(default_factory=dict)
    expected_total_curvature: Optional[float] = None

    def angle_errors(self) -> Dict[str, float]:
        return {
            name: abs(self.exterior_angles[name] - value)
            for name, value in self.expected_angles.items()
            if name in self.exterior_angles
        }

    def total_curvature_error(self) -> Optional[float]:
        """Relative deviation from the expected total curvature."""
        if self.expected_total_curvature is None or self.expected_total_curvature == 0.0:
            return None
        return abs(self.total_curvature - self.expected_total_curvature) / abs(
            self.expected_total_curvature
        )


def _check_decomposition(imm: Immersion, chains: Dict[str, List[int]]) -> None:
    if not chains:
        raise exceptions.DomainError("boundary decomposition is empty")
    names = list(chains)
    directed = set()
    for i, name in enumerate(names):
        chain = chains[name]
        if len(chain) < 2:
            raise exceptions.DomainError(f"arc {name} has fewer than two vertices")
        if chain[-1] != chains[names[(i + 1) % len(names)]][0]:
            raise exceptions.DomainError(f"arc {name} does not end where the next arc starts")
        directed.update(zip(chain[:-1], chain[1:]))
    if directed != set(imm.free_edges()):
        raise exceptions.DomainError("boundary decomposition inconsistent with the tagged boundary")


def _quad_expected_terms(
    imm: Immersion, corner_names: List[str]
) -> Tuple[Dict[str, float], Optional[float]]:
    """
    Every side of the quadrilateral piece lifts to an ambient geodesic: the
    TRUNC data is linear in arclength. Only the cap corner is tilted out of
    its planar angle, by the slope of the TRUNC side.
    """
    spec = imm.mesh.spec
    interior = spec.corner_angles()
    slope = 0.0
    if imm.cap is not None:
        slope = imm.cap / float(hyp_distance(spec.q, spec.r))
    interior["cap"] = math.acos(math.cos(interior["cap"]) / math.sqrt(1.0 + slope ** 2))
    expected = {
        name: math.pi - interior[name] if name in interior else 0.5 * math.pi
        for name in corner_names
    }
    return expected, 2.0 * math.pi - sum(expected.values())


def _expected_terms(
    imm: Immersion, corner_names: List[str]
) -> Tuple[Dict[str, float], Optional[float]]:
    spec = imm.mesh.spec if imm.mesh is not None else None
    if spec is None:
        return {}, None
    if spec.trunc_side:
        return _quad_expected_terms(imm, corner_names)
    if len(corner_names) == 5:
        gap = vertex_angle_at_origin(spec.k, spec.q)
        expected = {name: 0.5 * math.pi for name in corner_names}
        expected["origin"] = (spec.k - 1) * math.pi / spec.k + gap
        return expected, (1 - spec.k) * math.pi / spec.k - gap
    interior = spec.corner_angles()
    expected = {name: math.pi - interior[name] for name in corner_names if name in interior}
    return expected, sum(interior.values()) - math.pi


def gauss_bonnet_audit(
    imm: Immersion, fields: GeometryFields, decomposition: Optional[Dict[str, List[int]]] = None
) -> GaussBonnetAudit:
    """
    Gauss–Bonnet bookkeeping over the boundary arcs of a piece.

    Geodesic curvature of an arc is its discrete turning Σ(π − Θ_v) over the
    arc's inner vertices; exterior angles π − Θ_v are measured at the arc
    joints. Angles Θ are intrinsic, from product-distance side lengths.

    Raises:
        DomainError: If the arcs do not traverse the boundary in order
    """
    chains = decomposition if decomposition is not None else imm.chains
    _check_decomposition(imm, chains)
    theta = imm.angle_sums()
    names = list(chains)
    by_index = {v: k for k, v in imm.corners.items()}

    turning = {name: float(np.sum(math.pi - theta[chains[name][1:-1]])) for name in names}
    exterior = {}
    for i, name in enumerate(names):
        joint = chains[name][0]
        label = by_index.get(joint, f"{names[i - 1]}/{name}")
        exterior[label] = float(math.pi - theta[joint])

    tc = float(np.sum(fields.K * fields.areas))
    closure = 2.0 * math.pi - tc - sum(turning.values()) - sum(exterior.values())
    expected, expected_tc = _expected_terms(imm, list(exterior))
    audit = GaussBonnetAudit(
        total_curvature=tc,
        arc_turning=turning,
        exterior_angles=exterior,
        closure_residual=closure,
        expected_angles=expected,
        expected_total_curvature=expected_tc,
    )
    logger.info(f"Gauss-Bonnet audit: TC={tc:.6f}, closure residual {closure:.3e}")
    return audit


def curvature_rows(imm: Immersion, fields: GeometryFields) -> List[Dict[str, float]]:
    """One CSV row per triangle."""
    rows = []
    for i in range(imm.n_triangles):
        s = fields.shape[i]
        rows.append(
            {
                "triangle": i,
                "area": float(fields.areas[i]),
                "nu": float(fields.tri_normals[i, 2]),
                "H": float(fields.mean_curvature[i]),
                "asymmetry": float(fields.asymmetry[i]),
                "K": float(fields.K[i]),
                "s11": float(s[0, 0]),
                "s12": float(s[0, 1]),
                "s21": float(s[1, 0]),
                "s22": float(s[1, 1]),
            }
        )
    return rows


def audit_rows(audit: GaussBonnetAudit) -> List[Dict[str, object]]:
    """Rows (term, name, measured, expected) summarising an audit."""
    rows: List[Dict[str, object]] = [
        {
            "term": "total_curvature",
            "name": "",
            "measured": audit.total_curvature,
            "expected": audit.expected_total_curvature,
        }
    ]
    for name, value in audit.arc_turning.items():
        rows.append({"term": "arc_turning", "name": name, "measured": value, "expected": 0.0})
    for name, value in audit.exterior_angles.items():
        rows.append(
            {
                "term": "exterior_angle",
                "name": name,
                "measured": value,
                "expected": audit.expected_angles.get(name),
            }
        )
    closure = audit.closure_residual
    rows.append({"term": "closure_residual", "name": "", "measured": closure, "expected": 0.0})
    return rows
