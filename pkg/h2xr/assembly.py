"""
Schwarz-reflection assembly of fundamental pieces into complete surfaces.

A complex stores its fundamental piece once together with one isometry per
copy. Seams record which chain of the base piece two copies share and the
generator relating them.
"""

import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components
from scipy.spatial import cKDTree

from . import exceptions
from .hypgeom import (
    IDENTITY,
    SpaceIsometry,
    geodesic_through,
    hyp_distance,
    make_isometry,
    wedge_vertex,
)
from .meshdom import alpha_min
from .surfgeo import GeometryFields, Immersion, edge_vectors, geometry, total_curvature

logger = logging.getLogger(__name__)

SEAM_TOL = 1e-9
MIRROR_ANGLE_TOL = 0.05


@dataclass(frozen=True)
class Piece:
    """One congruent copy of the base piece."""

    index: int
    iso: SpaceIsometry
    copy: int = 0
    """Translate number inside a periodic strip"""


@dataclass(frozen=True)
class Seam:
    """Chain shared by two pieces."""

    first: int
    second: int
    chain: str
    generator: str
    mismatch: float


@dataclass
class SurfaceComplex:
    """Pieces of an assembled surface, stored as isometries of one base piece."""

    name: str
    base: Immersion
    pieces: List[Piece]
    seams: List[Seam]
    generators: Dict[str, SpaceIsometry]
    piece_tc: Optional[float] = None
    notes: Dict[str, float] = field(default_factory=dict)
    """Build-specific figures (translation length, fundamental-domain TC, ...)"""

    @property
    def size(self) -> int:
        return len(self.pieces)

    def piece_points(self, index: int) -> Tuple[np.ndarray, np.ndarray]:
        return self.pieces[index].iso.apply_points(self.base.z, self.base.t)

    def immersions(self) -> List[Immersion]:
        return [self.base.transformed(p.iso) for p in self.pieces]

    def vertex_cloud(self) -> np.ndarray:
        """All piece vertices as (x, y, t) rows."""
        rows = []
        for i in range(self.size):
            z, t = self.piece_points(i)
            rows.append(np.column_stack([z.real, z.imag, t]))
        return np.concatenate(rows)

    @property
    def total_curvature(self) -> Optional[float]:
        """Sum of piece total curvatures (pieces are congruent)."""
        return None if self.piece_tc is None else self.size * self.piece_tc

    def open_chains(self) -> List[Tuple[int, str]]:
        """(piece, chain) pairs not matched by any seam."""
        used = {(s.first, s.chain) for s in self.seams} | {(s.second, s.chain) for s in self.seams}
        return [
            (p.index, name)
            for p in self.pieces
            for name in self.base.chains
            if (p.index, name) not in used
        ]

    def closure_defect(self) -> int:
        """Number of pieces whose isometry differs from the product of its word."""
        bad = 0
        for piece in self.pieces:
            product = IDENTITY
            for name in piece.iso.word:
                product = product.compose(self.generators[name])
            if not product.matches(piece.iso, tol=1e-9):
                bad += 1
        return bad


def _classify(generator: SpaceIsometry) -> str:
    if generator.flip:
        return "plane_mirror" if generator.epsilon == 1 else "horizontal_rotation"
    if generator.epsilon == -1 and abs(generator.b) < 1e-12 and abs(generator.a.imag) < 1e-12:
        return "slice_mirror"
    return "rotation"


def _mirror_normal(generator: SpaceIsometry, z: np.ndarray) -> np.ndarray:
    """Unit horizontal normal of a vertical mirror plane at (or near) its fixed points."""
    derivative = 1.0 / (np.conj(generator.b) * np.conj(z) + np.conj(generator.a)) ** 2
    normal = 1j * np.sqrt(derivative)
    return normal / np.abs(normal)


def check_seam(
    base: Immersion,
    generator: SpaceIsometry,
    chain: str,
    fields: Optional[GeometryFields] = None,
    seam_tol: float = SEAM_TOL,
    angle_tol: float = MIRROR_ANGLE_TOL,
) -> float:
    """
    Check that a chain of the base piece lies on the fixed set of ``generator``.

    Mirrors additionally require the piece to meet the mirror orthogonally
    along the chain. Both checks are made in the frame of the base piece, so
    they hold for every copy ``g·base`` extended by ``g·generator·g⁻¹``.

    Returns:
        Largest displacement of the chain under the generator

    Raises:
        SeamError: If the chain is off the fixed set or the meeting angle fails
    """
    if chain not in base.chains:
        raise exceptions.SeamError(f"base piece has no chain {chain}")
    verts = np.array(base.chains[chain])
    mismatch = float(generator.displacement(base.z[verts], base.t[verts]).max())
    if mismatch > seam_tol:
        label = "·".join(generator.word) or "identity"
        raise exceptions.SeamError(f"chain {chain} is {mismatch:.3e} off the fixed set of {label}")
    kind = _classify(generator)
    if kind not in ("plane_mirror", "slice_mirror"):
        return mismatch

    fields = geometry(base) if fields is None else fields
    on_chain = np.isin(base.triangles, verts).sum(axis=1) >= 2
    normals = fields.tri_normals[on_chain]
    if kind == "slice_mirror":
        offset = np.abs(normals[:, 2])
    else:
        centre = base.z[base.triangles[on_chain]].mean(axis=1)
        foot = 0.5 * (centre + generator.horizontal(centre))
        plane = _mirror_normal(generator, foot)
        offset = np.abs(normals[:, 0] * plane.real + normals[:, 1] * plane.imag)
    angle = float(np.arcsin(np.clip(offset, 0.0, 1.0)).max(initial=0.0))
    if angle > angle_tol:
        raise exceptions.SeamError(
            f"piece meets the mirror along {chain} off-orthogonally by {angle:.3f} rad"
        )
    return mismatch


def extend(
    piece: Immersion,
    generator: SpaceIsometry,
    seam_chain: str,
    fields: Optional[GeometryFields] = None,
    seam_tol: float = SEAM_TOL,
) -> SurfaceComplex:
    """
    Extend a piece across one of its chains by a rotation or mirror.

    Args:
        piece: Fundamental piece
        generator: Involution fixing the chain
        seam_chain: Name of the chain in ``piece.chains``

    Returns:
        Complex {piece, generator·piece} with the seam registered

    Raises:
        SeamError: If the chain is not on the generator's fixed set

    Example:
        >>> rot = make_isometry("horizontal_geodesic_rotation", geodesic=l2, name="R_L2")
        >>> extend(piece, rot, "L2").size
        2
    """
    mismatch = check_seam(piece, generator, seam_chain, fields, seam_tol)
    name = generator.word[0] if generator.word else "g"
    return SurfaceComplex(
        name=f"extend[{name}]",
        base=piece,
        pieces=[Piece(0, IDENTITY), Piece(1, generator)],
        seams=[Seam(0, 1, seam_chain, name, mismatch)],
        generators={name: generator},
    )


def _dihedral_words(first: SpaceIsometry, second: SpaceIsometry, k: int) -> List[SpaceIsometry]:
    """id, first, first·second, first·second·first, ... (2k elements)."""
    words = [IDENTITY]
    for j in range(1, 2 * k):
        step = first if j % 2 == 1 else second
        words.append(words[-1].compose(step))
    return words


def _piece_tc(piece: Immersion, fields: Optional[GeometryFields]) -> float:
    fields = geometry(piece) if fields is None else fields
    return total_curvature(piece, fields).value


def build_sigma_alpha_k(
    piece: Immersion,
    k: int,
    alpha: float,
    fields: Optional[GeometryFields] = None,
    seam_tol: float = SEAM_TOL,
) -> SurfaceComplex:
    """
    Σ(α,k): 2k copies of the graph piece by alternating π-rotations about L₂ and L₁.

    L₁ and L₂ are the geodesics from 0 through p₁ and toward the ideal vertex
    p₂, so the piece must be solved on the domain whose L2 side lies on the
    full ray 0p₂. The product of the 2k generators is the identity; its
    largest displacement on the closing chain is ``notes["closing_defect"]``.

    Raises:
        SeamError: If L₁ or L₂ of the piece is off its geodesic at height 0,
            or the closing seam does not match
    """
    if k < 2:
        raise exceptions.DomainError(f"k must be at least 2, got {k}")
    fields = geometry(piece) if fields is None else fields
    l1 = geodesic_through(0j, wedge_vertex(k, alpha, 1))
    l2 = geodesic_through(0j, wedge_vertex(k, alpha, 2))
    r1 = make_isometry("horizontal_geodesic_rotation", geodesic=l1, name="R_L1")
    r2 = make_isometry("horizontal_geodesic_rotation", geodesic=l2, name="R_L2")
    words = _dihedral_words(r2, r1, k)

    seams = []
    closing_defect = 0.0
    for j in range(2 * k):
        gen, chain = (r2, "L2") if j % 2 == 0 else (r1, "L1")
        mismatch = check_seam(piece, gen, chain, fields, seam_tol)
        if j == 2 * k - 1:
            verts = piece.chains[chain]
            closing = words[-1].compose(gen)
            closing_defect = float(closing.displacement(piece.z[verts], piece.t[verts]).max())
            if closing_defect > seam_tol:
                raise exceptions.SeamError(
                    f"closing seam of Σ(α,{k}) is off by {closing_defect:.3e}"
                )
            mismatch = max(mismatch, closing_defect)
        seams.append(Seam(j, (j + 1) % (2 * k), chain, gen.word[0], mismatch))
    complex_ = SurfaceComplex(
        name=f"sigma_alpha_k(k={k}, alpha={alpha:g})",
        base=piece,
        pieces=[Piece(j, w) for j, w in enumerate(words)],
        seams=seams,
        generators={"R_L1": r1, "R_L2": r2},
        piece_tc=_piece_tc(piece, fields),
        notes={"closing_defect": closing_defect},
    )
    logger.info(
        f"Assembled {complex_.name}: {complex_.size} pieces, TC {complex_.total_curvature:.6f}"
    )
    return complex_


def cap_level_signs(complex_: SurfaceComplex) -> List[int]:
    """Sign of the mean GAMMA_CAP height of each piece."""
    chain = complex_.base.chains.get("GAMMA_CAP", [])
    out = []
    for i in range(complex_.size):
        _, t = complex_.piece_points(i)
        out.append(int(np.sign(np.mean(t[chain])) if chain else 0))
    return out


def vertical_lines(complex_: SurfaceComplex, tol: float = 1e-9) -> List[complex]:
    """Distinct horizontal positions of the open VERT_P chains."""
    positions: List[complex] = []
    chain = complex_.base.chains.get("VERT_P")
    if not chain:
        return positions
    for index, name in complex_.open_chains():
        if name != "VERT_P":
            continue
        z, _ = complex_.piece_points(index)
        p = complex(z[chain[0]])
        if all(abs(p - q) > tol for q in positions):
            positions.append(p)
    return positions


def build_sigma_alpha(
    sigma_alpha_2: SurfaceComplex, alpha: float, copies: int = 3
) -> SurfaceComplex:
    """
    Σ(α): a strip of translates of Σ(α,2) by π-rotations about the vertical
    lines V₁ over p₁ = α and V₂ over p₃ = −α, the image of p₁ under R_L2.

    The composition R_V1·R_V2 is the hyperbolic translation T_α of length
    4·d(0, α); the measured length, that expected value and the
    fundamental-domain total curvature are recorded in ``notes``.
    """
    if copies < 1:
        raise exceptions.DomainError("need at least one translate")
    if len(sigma_alpha_2.generators) != 2 or sigma_alpha_2.size != 4:
        raise exceptions.DomainError("Σ(α) is built from the four-piece Σ(α,2)")
    base = sigma_alpha_2.base
    inner = sigma_alpha_2.pieces
    if "VERT_P" not in base.chains:
        raise exceptions.DomainError(
            "Σ(α) needs the vertical boundary chain VERT_P of a blown-up piece"
        )
    line = base.chains["VERT_P"]
    mirrored, _ = sigma_alpha_2.piece_points(1)
    p3 = wedge_vertex(2, alpha, 3)
    v1 = make_isometry("vertical_line_rotation", p=wedge_vertex(2, alpha, 1), name="R_V1")
    v2 = make_isometry("vertical_line_rotation", p=p3, name="R_V2")
    steps = [IDENTITY]
    for j in range(1, copies):
        steps.append(steps[-1].compose(v1 if j % 2 == 1 else v2))

    pieces, seams = [], []
    for c, step in enumerate(steps):
        shift = c * len(inner)
        for p in inner:
            pieces.append(Piece(len(pieces), step.compose(p.iso), copy=c))
        for s in sigma_alpha_2.seams:
            seams.append(Seam(shift + s.first, shift + s.second, s.chain, s.generator, s.mismatch))
    for c in range(copies - 1):
        gen = v1 if c % 2 == 0 else v2
        for p in inner:
            z, t = p.iso.apply_points(base.z[line], base.t[line])
            mismatch = float(gen.displacement(z, t).max())
            if mismatch <= SEAM_TOL:
                first = c * len(inner) + p.index
                seams.append(Seam(first, first + len(inner), "VERT_P", gen.word[0], mismatch))

    translation = v1.compose(v2)
    generators = dict(sigma_alpha_2.generators)
    generators.update({"R_V1": v1, "R_V2": v2})
    complex_ = SurfaceComplex(
        name=f"sigma_alpha(alpha={alpha:g}, copies={copies})",
        base=base,
        pieces=pieces,
        seams=seams,
        generators=generators,
        piece_tc=sigma_alpha_2.piece_tc,
        notes={
            "translation_length": translation.translation_length(),
            "expected_translation_length": 4.0 * hyp_distance(0j, complex(alpha)),
            "v2_offset": float(np.abs(mirrored[line] - p3).max()),
        },
    )
    if complex_.piece_tc is not None:
        complex_.notes["fundamental_domain_tc"] = 2 * len(inner) * complex_.piece_tc
    logger.info(f"Assembled {complex_.name}: {complex_.size} pieces")
    return complex_


def period_translation(strip: SurfaceComplex) -> SpaceIsometry:
    """T_α = R_V1·R_V2 of a Σ(α) strip."""
    try:
        return strip.generators["R_V1"].compose(strip.generators["R_V2"])
    except KeyError as e:
        raise exceptions.DomainError(f"{strip.name} has no vertical-line generators") from e


def build_sigma_k(
    conj: Immersion,
    k: int,
    alpha: float,
    audit_passed: Optional[bool] = None,
    fields: Optional[GeometryFields] = None,
    reference_tc: Optional[float] = None,
    seam_tol: float = SEAM_TOL,
) -> SurfaceComplex:
    """
    Σ(k): 4k copies of a normalized, snapped conjugate piece under the
    dihedral mirrors in Π₁ (real diameter) and Π₂ (angle π/k), times the
    mirror in the slice t = 0.

    The piece total curvature is measured on the conjugate piece itself.
    Conjugation is an isometry, so with ``reference_tc`` (the graph piece's
    value) the gap between the two is recorded as ``notes["tc_gap"]``.

    Raises:
        DomainError: If k < 2, or k ≥ 3 with alpha below alpha_min(k)
        AuditGateError: If the conjugate boundary audit did not pass
        SeamError: If a symmetry chain is off its mirror
    """
    if k < 2:
        raise exceptions.DomainError(f"k must be at least 2, got {k}")
    if k >= 3 and alpha < alpha_min(k):
        raise exceptions.DomainError(f"alpha={alpha:g} is below alpha_min({k})={alpha_min(k):.6f}")
    if audit_passed is False:
        raise exceptions.AuditGateError("conjugate boundary audit failed; refusing to assemble")
    fields = geometry(conj) if fields is None else fields
    pi1 = geodesic_through(0j, 0.5 + 0j)
    pi2 = geodesic_through(0j, 0.5 * complex(math.cos(math.pi / k), math.sin(math.pi / k)))
    m1 = make_isometry("vertical_plane_mirror", geodesic=pi1, name="M_1")
    m2 = make_isometry("vertical_plane_mirror", geodesic=pi2, name="M_2")
    s = make_isometry("slice_mirror", t0=0.0, name="S")
    rim = _dihedral_words(m2, m1, k)

    pieces, seams = [], []
    for j, w in enumerate(rim):
        pieces.append(Piece(2 * j, w))
        pieces.append(Piece(2 * j + 1, w.compose(s)))
    on_pi1 = check_seam(conj, m1, "L1", fields, seam_tol)
    on_pi2 = check_seam(conj, m2, "L2", fields, seam_tol)
    flat = check_seam(conj, s, "VERT_P", fields, seam_tol)
    for j in range(2 * k):
        gen, chain, mismatch = (m2, "L2", on_pi2) if j % 2 == 0 else (m1, "L1", on_pi1)
        nxt = (j + 1) % (2 * k)
        seams.append(Seam(2 * j, 2 * nxt, chain, gen.word[0], mismatch))
        seams.append(Seam(2 * j + 1, 2 * nxt + 1, chain, gen.word[0], mismatch))
        seams.append(Seam(2 * j, 2 * j + 1, "VERT_P", "S", flat))

    complex_ = SurfaceComplex(
        name=f"sigma_k(k={k}, alpha={alpha:g})",
        base=conj,
        pieces=pieces,
        seams=seams,
        generators={"M_1": m1, "M_2": m2, "S": s},
        piece_tc=_piece_tc(conj, fields),
    )
    complex_.notes["expected_tc"] = -4.0 * (k - 1) * math.pi
    if reference_tc is not None:
        complex_.notes["reference_tc"] = float(reference_tc)
        complex_.notes["tc_gap"] = abs(complex_.piece_tc - float(reference_tc))
    logger.info(
        f"Assembled {complex_.name}: {complex_.size} pieces, TC {complex_.total_curvature:.6f}"
    )
    return complex_


def extrapolate_total_curvature(
    angles: Sequence[float], values: Sequence[float]
) -> Tuple[float, float]:
    """
    Linear extrapolation of total curvature to a vanishing truncation angle.

    Returns:
        (value at angle 0, slope)
    """
    angles = np.asarray(angles, dtype=float)
    values = np.asarray(values, dtype=float)
    if len(values) == 0:
        raise exceptions.DomainError("no total-curvature samples to extrapolate")
    if len(values) == 1 or np.ptp(angles) == 0.0:
        return float(values.mean()), 0.0
    slope, intercept = np.polyfit(angles, values, 1)
    return float(intercept), float(slope)


def hausdorff(a: np.ndarray, b: np.ndarray) -> float:
    """Symmetric Hausdorff distance between point clouds (x, y, t)."""
    da, _ = cKDTree(b).query(a)
    db, _ = cKDTree(a).query(b)
    return float(max(da.max(initial=0.0), db.max(initial=0.0)))


def symmetry_defect(complex_: SurfaceComplex, iso: SpaceIsometry) -> float:
    """Hausdorff distance between the vertex set and its image under ``iso``."""
    cloud = complex_.vertex_cloud()
    z, t = iso.apply_points(cloud[:, 0] + 1j * cloud[:, 1], cloud[:, 2])
    return hausdorff(cloud, np.column_stack([z.real, z.imag, t]))


def period_defect(strip: SurfaceComplex) -> float:
    """
    Largest distance from T_α applied to the first translate to the strip's
    vertices (the overlap with the next translates).
    """
    cloud = strip.vertex_cloud()
    first = np.concatenate(
        [np.column_stack([*_split(strip, p.index)]) for p in strip.pieces if p.copy == 0]
    )
    z, t = period_translation(strip).apply_points(first[:, 0] + 1j * first[:, 1], first[:, 2])
    dist, _ = cKDTree(cloud).query(np.column_stack([z.real, z.imag, t]))
    return float(dist.max())


def _split(complex_: SurfaceComplex, index: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    z, t = complex_.piece_points(index)
    return z.real, z.imag, t


@dataclass
class EmbeddednessReport:
    """Triangle intersections between and within pieces."""

    intersecting_pairs: int
    candidate_pairs: int
    nearest_approach: float
    histogram: Tuple[np.ndarray, np.ndarray]
    examples: List[Tuple[int, int]] = field(default_factory=list)
    """(piece, triangle) index pairs of the first few intersections"""

    @property
    def embedded(self) -> bool:
        return self.intersecting_pairs == 0


def _cross(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.cross(a, b)


def _dot(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.einsum("ij,ij->i", a, b)


def _segment_hits(p0, p1, a, b, c, eps: float = 1e-9) -> np.ndarray:
    """Proper crossings of segments p0p1 through the interiors of triangles abc."""
    d = p1 - p0
    e1, e2 = b - a, c - a
    h = _cross(d, e2)
    det = _dot(e1, h)
    ok = np.abs(det) > 1e-14
    inv = np.where(ok, 1.0 / np.where(ok, det, 1.0), 0.0)
    s = p0 - a
    u = inv * _dot(s, h)
    q = _cross(s, e1)
    v = inv * _dot(d, q)
    w = inv * _dot(e2, q)
    return ok & (u > eps) & (v > eps) & (u + v < 1.0 - eps) & (w > eps) & (w < 1.0 - eps)


def _orient(p: np.ndarray, q: np.ndarray, r: np.ndarray) -> np.ndarray:
    return (np.conj(q - p) * (r - p)).imag


def _inside(point: np.ndarray, tri: np.ndarray) -> np.ndarray:
    s = [_orient(tri[:, i], tri[:, (i + 1) % 3], point) for i in range(3)]
    return ((s[0] > 0) & (s[1] > 0) & (s[2] > 0)) | ((s[0] < 0) & (s[1] < 0) & (s[2] < 0))


def _coplanar_overlap(tri_a: np.ndarray, tri_b: np.ndarray, normal: np.ndarray) -> np.ndarray:
    """Overlap of coplanar triangle pairs, projected along the normal's dominant axis."""
    rows = np.arange(len(normal))
    keep = np.array([[1, 2], [0, 2], [0, 1]])[np.argmax(np.abs(normal), axis=1)]
    za = tri_a[rows, :, keep[:, 0]] + 1j * tri_a[rows, :, keep[:, 1]]
    zb = tri_b[rows, :, keep[:, 0]] + 1j * tri_b[rows, :, keep[:, 1]]
    hit = _inside(za.mean(axis=1), zb) | _inside(zb.mean(axis=1), za)
    for i in range(3):
        a0, a1 = za[:, i], za[:, (i + 1) % 3]
        for j in range(3):
            b0, b1 = zb[:, j], zb[:, (j + 1) % 3]
            straddle_b = _orient(b0, b1, a0) * _orient(b0, b1, a1) < 0
            straddle_a = _orient(a0, a1, b0) * _orient(a0, a1, b1) < 0
            hit |= straddle_a & straddle_b
    return hit


def embeddedness_check(complex_: SurfaceComplex, bins: int = 10) -> EmbeddednessReport:
    """
    Count intersecting triangle pairs across the whole complex.

    Pairs sharing one or two vertex positions (mesh or seam neighbours) are
    adjacent and skipped; pairs sharing all three are coincident and count
    as intersecting.
    """
    base = complex_.base
    m = base.n_triangles
    cloud = complex_.vertex_cloud()
    n = base.n_vertices
    offsets = np.arange(complex_.size) * n
    tris = (base.triangles[None, :, :] + offsets[:, None, None]).reshape(-1, 3)
    owner = np.repeat(np.arange(complex_.size), m)

    tree = cKDTree(cloud)
    close = np.array(sorted(tree.query_pairs(1e-9)), dtype=int).reshape(-1, 2)
    graph = coo_matrix(
        (np.ones(len(close)), (close[:, 0], close[:, 1])), shape=(len(cloud), len(cloud))
    )
    _, position = connected_components(graph, directed=False)

    corners = cloud[tris]
    centroids = corners.mean(axis=1)
    radius = float(np.linalg.norm(corners - centroids[:, None, :], axis=2).max())
    pairs = np.array(sorted(cKDTree(centroids).query_pairs(2.0 * radius)), dtype=int).reshape(-1, 2)
    ids = position[tris]
    shared = (ids[pairs[:, 0]][:, :, None] == ids[pairs[:, 1]][:, None, :]).any(axis=2).sum(axis=1)
    coincident = pairs[shared == 3]
    pairs = pairs[shared == 0]

    hits = np.zeros(len(pairs), dtype=bool)
    ta, tb = corners[pairs[:, 0]], corners[pairs[:, 1]]
    for first, second in ((ta, tb), (tb, ta)):
        for e in range(3):
            p0, p1 = first[:, e], first[:, (e + 1) % 3]
            hits |= _segment_hits(p0, p1, second[:, 0], second[:, 1], second[:, 2])
    na = np.cross(ta[:, 1] - ta[:, 0], ta[:, 2] - ta[:, 0])
    nb = np.cross(tb[:, 1] - tb[:, 0], tb[:, 2] - tb[:, 0])
    size_a = np.linalg.norm(na, axis=1)
    size_b = np.linalg.norm(nb, axis=1)
    parallel = np.linalg.norm(np.cross(na, nb), axis=1) <= 1e-9 * size_a * size_b
    planar = parallel & (np.abs(_dot(tb[:, 0] - ta[:, 0], na)) <= 1e-9 * size_a)
    if planar.any():
        hits[planar] |= _coplanar_overlap(ta[planar], tb[planar], na[planar])

    found = np.concatenate([coincident, pairs[hits]])
    examples = [(int(owner[a]), int(a % m)) for a, _ in found[:5]]

    other = np.full(len(cloud), np.inf)
    k = min(8, len(cloud))
    dist, nbr = tree.query(cloud, k=k)
    vertex_piece = np.repeat(np.arange(complex_.size), n)
    for col in range(1, k):
        valid = (vertex_piece[nbr[:, col]] != vertex_piece) & (position[nbr[:, col]] != position)
        other = np.where(valid & (dist[:, col] < other), dist[:, col], other)
    finite = other[np.isfinite(other)]
    if len(finite):
        hist = np.histogram(finite, bins=bins)
    else:
        hist = (np.zeros(bins, dtype=int), np.zeros(bins + 1))
    report = EmbeddednessReport(
        intersecting_pairs=int(len(found)),
        candidate_pairs=int(len(pairs)),
        nearest_approach=float(finite.min()) if len(finite) else math.inf,
        histogram=hist,
        examples=examples,
    )
    logger.info(f"Embeddedness of {complex_.name}: {report.intersecting_pairs} intersecting pairs")
    return report


@dataclass
class SeamReport:
    """Plane angles between the two triangles meeting across each seam edge."""

    max_deviation: float
    per_seam: List[float]


def _triangle_at_edge(imm: Immersion) -> Dict[frozenset, int]:
    out = {}
    for r, row in enumerate(imm.triangles.tolist()):
        for k in range(3):
            out.setdefault(frozenset((row[k], row[(k + 1) % 3])), r)
    return out


def seam_continuity_check(complex_: SurfaceComplex) -> SeamReport:
    """Largest unoriented plane angle between seam-adjacent triangles of two pieces."""
    base = complex_.base
    at_edge = _triangle_at_edge(base)
    per_seam = []
    for seam in complex_.seams:
        chain = base.chains[seam.chain]
        za, ta = complex_.piece_points(seam.first)
        zb, tb = complex_.piece_points(seam.second)
        worst = 0.0
        for a, b in zip(chain[:-1], chain[1:]):
            tri = base.triangles[at_edge[frozenset((a, b))]]
            c = [v for v in tri if v not in (a, b)][0]
            mid = np.array([0.5 * (za[a] + za[b])])
            idx = np.array([a])
            ea = edge_vectors(za, ta, idx, np.array([b]), mid)[0]
            na = np.cross(ea, edge_vectors(za, ta, idx, np.array([c]), mid)[0])
            eb = edge_vectors(zb, tb, idx, np.array([b]), mid)[0]
            nb = np.cross(eb, edge_vectors(zb, tb, idx, np.array([c]), mid)[0])
            cos = abs(float(np.dot(na, nb))) / (np.linalg.norm(na) * np.linalg.norm(nb))
            worst = max(worst, math.acos(min(1.0, cos)))
        per_seam.append(worst)
    report = SeamReport(max_deviation=max(per_seam, default=0.0), per_seam=per_seam)
    logger.info(f"Seam continuity of {complex_.name}: max deviation {report.max_deviation:.4f} rad")
    return report


def format_manifest(complex_: SurfaceComplex) -> str:
    lines = [f"# complex {complex_.name}", f"# pieces {complex_.size}"]
    for p in complex_.pieces:
        word = "·".join(p.iso.word) or "id"
        lines.append(f"piece {p.index} {p.copy} {word}")
    for s in complex_.seams:
        lines.append(f"seam {s.first} {s.second} {s.chain} {s.generator} {s.mismatch:.3e}")
    return "\n".join(lines) + "\n"


def write_manifest(complex_: SurfaceComplex, path: Union[str, Path]) -> None:
    """Plain-text manifest: one line per piece (id, translate, word) and per seam."""
    Path(path).write_text(format_manifest(complex_), encoding="utf-8")
