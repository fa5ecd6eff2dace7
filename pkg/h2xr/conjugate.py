"""
Conformal charts, harmonic conjugates and the associate family of a piece.

The associate immersion X_θ has the metric and angle function of X, with
shape operator and tangent part of ∂t rotated by e^{θJ}. It is integrated
from triangle frames: the relative rotation between neighbouring frames is
rotated in its tangential part, the frames are constrained to carry ∂t at
(e^{θJ}T, ν), their headings about the vertical are relaxed by least squares
over the dual graph, and positions follow from a least-squares integration
of the rotated edge vectors. Holonomy is reported, never redistributed.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import scipy.sparse as sparse
from scipy.sparse.linalg import factorized, spsolve
from scipy.spatial import cKDTree
from scipy.spatial.transform import Rotation

from . import exceptions
from .hypgeom import SpaceIsometry, product_distance
from .surfgeo import GeometryFields, Immersion, geometry, transport_angle, edge_vectors

logger = logging.getLogger(__name__)

DEFAULT_CLOSURE_TOL = 0.1


def _local_coordinates(imm: Immersion) -> np.ndarray:
    """Isometric planar coordinates of each triangle: v0 at 0, v1 on the positive axis."""
    ell = imm.side_lengths()
    angles = imm.intrinsic_angles()
    out = np.zeros(imm.triangles.shape, dtype=complex)
    out[:, 1] = ell[:, 2]
    out[:, 2] = ell[:, 1] * np.exp(1j * angles[:, 0])
    return out


def _signed_area(w: np.ndarray) -> np.ndarray:
    return 0.5 * (np.conj(w[:, 1] - w[:, 0]) * (w[:, 2] - w[:, 0])).imag


def chart_jacobians(imm: Immersion, w: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """
    Jacobians of planar coordinates w against each triangle's isometric frame.

    Returns:
        (jacobians (m, 2, 2), distortion σ₁/σ₂ per triangle; ∞ where flipped)
    """
    local = _local_coordinates(imm)
    chart = np.asarray(w, dtype=complex)[imm.triangles]

    def columns(p: np.ndarray) -> np.ndarray:
        d1, d2 = p[:, 1] - p[:, 0], p[:, 2] - p[:, 0]
        first = np.column_stack([d1.real, d1.imag])
        second = np.column_stack([d2.real, d2.imag])
        return np.stack([first, second], axis=2)

    jac = columns(chart) @ np.linalg.inv(columns(local))
    sigma = np.linalg.svd(jac, compute_uv=False)
    det = np.linalg.det(jac)
    distortion = np.where(det > 0.0, sigma[:, 0] / np.maximum(sigma[:, 1], 1e-300), np.inf)
    return jac, distortion


@dataclass
class ConformalChart:
    """Planar conformal coordinates over an immersion."""

    imm: Immersion
    w: np.ndarray
    """Chart coordinate per vertex"""

    jacobians: np.ndarray
    distortion: np.ndarray
    """Quasi-conformal distortion σ₁/σ₂ ≥ 1 per triangle"""

    basepoint: int

    @property
    def mean_distortion(self) -> float:
        return float(np.average(self.distortion, weights=self.imm.areas()))

    @property
    def max_distortion(self) -> float:
        return float(self.distortion.max())

    def gradient(self, values: np.ndarray) -> np.ndarray:
        """Per-triangle chart gradient of nodal values as gx + i·gy."""
        w = self.w[self.imm.triangles]
        area = _signed_area(w)
        opposite = np.roll(w, -2, axis=1) - np.roll(w, -1, axis=1)
        grad = 1j * opposite / (2.0 * area[:, None])
        return (np.asarray(values, dtype=float)[self.imm.triangles] * grad).sum(axis=1)


def _pins(imm: Immersion) -> Tuple[int, int]:
    base = imm.corners.get("origin", 0)
    second = imm.corners.get("p1_bottom", imm.corners.get("p1"))
    if second is None or second == base:
        dist = product_distance(imm.z[base], imm.t[base], imm.z, imm.t)
        second = int(np.argmax(dist))
    return int(base), int(second)


def conformal_chart(imm: Immersion) -> ConformalChart:
    """
    Least-squares conformal flattening with two pinned vertices.

    The origin corner goes to 0 and the p₁ corner (or the farthest vertex)
    to its product distance on the positive real axis.

    Raises:
        ChartError: If any triangle comes out flipped
    """
    n, m = imm.n_vertices, imm.n_triangles
    local = _local_coordinates(imm)
    area = _signed_area(local)
    coeff = (np.roll(local, -2, axis=1) - np.roll(local, -1, axis=1)) / np.sqrt(area)[:, None]

    rows, cols, vals = [], [], []
    tri_rows = np.arange(m)
    for k in range(3):
        v = imm.triangles[:, k]
        c = coeff[:, k]
        # real part: Re c·x − Im c·y ; imaginary part: Im c·x + Re c·y
        rows += [tri_rows, tri_rows, m + tri_rows, m + tri_rows]
        cols += [v, n + v, v, n + v]
        vals += [c.real, -c.imag, c.imag, c.real]
    A = sparse.csr_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(2 * m, 2 * n)
    )

    base, second = _pins(imm)
    pinned = np.array([base, n + base, second, n + second])
    pin_values = np.array([0.0, 0.0, float(product_distance(
        imm.z[base], imm.t[base], imm.z[second], imm.t[second])), 0.0])
    free = np.ones(2 * n, dtype=bool)
    free[pinned] = False
    Af = A[:, free]
    rhs = -(A[:, pinned] @ pin_values)
    x = np.empty(2 * n)
    x[pinned] = pin_values
    x[free] = spsolve((Af.T @ Af).tocsc(), Af.T @ rhs)
    w = x[:n] + 1j * x[n:]

    jac, distortion = chart_jacobians(imm, w)
    flipped = ~np.isfinite(distortion)
    if flipped.any():
        raise exceptions.ChartError(
            f"conformal chart flips {int(flipped.sum())} triangles", distortion=distortion
        )
    chart = ConformalChart(imm=imm, w=w, jacobians=jac, distortion=distortion, basepoint=base)
    logger.info(
        f"Conformal chart: mean distortion {chart.mean_distortion:.4f},"
        f" max {chart.max_distortion:.4f}"
    )
    return chart


class _Incidence:
    """Least-squares integration of prescribed differences x[head] − x[tail]."""

    def __init__(self, tails: np.ndarray, heads: np.ndarray, size: int, pin: int):
        count = len(tails)
        rows = np.arange(count)
        self.matrix = sparse.csr_matrix(
            (
                np.concatenate([np.ones(count), -np.ones(count)]),
                (np.concatenate([rows, rows]), np.concatenate([heads, tails])),
            ),
            shape=(count, size),
        )
        self.pin = pin
        self.free = np.ones(size, dtype=bool)
        self.free[pin] = False
        self._free_matrix = self.matrix[:, self.free].tocsc()
        self._pin_column = self.matrix[:, [pin]].toarray().ravel()
        self._solve = factorized((self._free_matrix.T @ self._free_matrix).tocsc())

    def solve(self, rhs: np.ndarray, pin_value: float = 0.0) -> np.ndarray:
        x = np.empty(self.matrix.shape[1])
        x[self.pin] = pin_value
        x[self.free] = self._solve(self._free_matrix.T @ (rhs - self._pin_column * pin_value))
        return x

    def solve_complex(self, rhs: np.ndarray, pin_value: complex = 0j) -> np.ndarray:
        pin_value = complex(pin_value)
        return self.solve(rhs.real, pin_value.real) + 1j * self.solve(rhs.imag, pin_value.imag)

    def residual(self, x: np.ndarray, rhs: np.ndarray) -> np.ndarray:
        return self.matrix @ x - rhs


def _edge_rows(triangles: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """(tails, heads, owning triangle, local edge) for every triangle edge."""
    m = triangles.shape[0]
    tails = np.concatenate([triangles[:, k] for k in range(3)])
    heads = np.concatenate([triangles[:, (k + 1) % 3] for k in range(3)])
    owner = np.tile(np.arange(m), 3)
    local = np.repeat(np.arange(3), m)
    return tails, heads, owner, local


def _euler_characteristic(imm: Immersion) -> int:
    used = np.unique(imm.triangles)
    return len(used) - len(imm.edges()) + imm.n_triangles


@dataclass
class ChartFunction:
    """Nodal function over a chart with its integration diagnostics."""

    values: np.ndarray
    residual: float = 0.0
    """Largest mismatch of the prescribed edge differences"""

    harmonicity: float = 0.0
    """Largest normalized discrete Laplacian of the conjugated function"""


def _harmonicity(chart: ConformalChart, h: np.ndarray) -> float:
    w = chart.w[chart.imm.triangles]
    tri = chart.imm.triangles
    n = chart.imm.n_vertices
    lap = np.zeros(n)
    scale = np.zeros(n)
    for c in range(3):
        i, j = tri[:, (c + 1) % 3], tri[:, (c + 2) % 3]
        a = w[:, (c + 1) % 3] - w[:, c]
        b = w[:, (c + 2) % 3] - w[:, c]
        cot = (np.conj(a) * b).real / np.abs((np.conj(a) * b).imag)
        flow = 0.5 * cot * (h[i] - h[j])
        np.add.at(lap, i, flow)
        np.add.at(lap, j, -flow)
        np.add.at(scale, i, np.abs(flow))
        np.add.at(scale, j, np.abs(flow))
    interior = ~chart.imm.boundary_mask()
    ratio = np.abs(lap[interior]) / np.maximum(scale[interior], 1e-300)
    return float(ratio.max(initial=0.0))


def harmonic_conjugate(
    h: Union[np.ndarray, ChartFunction], chart: ConformalChart, basepoint: Optional[int] = None
) -> ChartFunction:
    """
    Harmonic conjugate h* with ∇h* = J∇h in the chart and h*(basepoint) = 0.

    Args:
        h: Nodal values over the chart's immersion
        chart: Conformal chart
        basepoint: Pinned vertex; the chart basepoint by default

    Returns:
        ChartFunction with the least-squares residual and the harmonicity of h

    Raises:
        PeriodError: If the piece is not simply connected

    Example:
        >>> hstar = harmonic_conjugate(chart.w.real, chart)
        >>> bool(np.allclose(hstar.values, chart.w.imag - chart.w.imag[chart.basepoint]))
        True
    """
    values = h.values if isinstance(h, ChartFunction) else np.asarray(h, dtype=float)
    imm = chart.imm
    if values.shape != (imm.n_vertices,):
        raise exceptions.DomainError("function does not conform to the chart")
    chi = _euler_characteristic(imm)
    if chi != 1:
        raise exceptions.PeriodError(
            f"piece has Euler characteristic {chi}; conjugate would have periods"
        )
    base = chart.basepoint if basepoint is None else basepoint
    tails, heads, owner, _ = _edge_rows(imm.triangles)
    system = _Incidence(tails, heads, imm.n_vertices, base)
    rhs = _conjugate_rows(chart, values, tails, heads, owner)
    hstar = system.solve(rhs, 0.0)
    residual = float(np.abs(system.residual(hstar, rhs)).max(initial=0.0))
    return ChartFunction(values=hstar, residual=residual, harmonicity=_harmonicity(chart, values))


def _conjugate_rows(chart: ConformalChart, values, tails, heads, owner) -> np.ndarray:
    """Prescribed differences ⟨J∇h, Δw⟩ along every triangle edge."""
    grad = chart.gradient(values)
    dw = chart.w[heads] - chart.w[tails]
    return (np.conj(1j * grad[owner]) * dw).real


@dataclass
class HopfData:
    """Hopf differential coefficients rotated by the accumulated angle θ."""

    base: np.ndarray
    theta: float = 0.0

    @property
    def Q(self) -> np.ndarray:
        if self.theta == 0.0:
            return self.base
        return self.base * np.exp(-2j * self.theta)


def hopf(h: Union[np.ndarray, ChartFunction], chart: ConformalChart) -> HopfData:
    """Per-triangle Q = −4(∂h/∂z)² with ∂h/∂z = (h_x − i h_y)/2."""
    values = h.values if isinstance(h, ChartFunction) else np.asarray(h, dtype=float)
    grad = chart.gradient(values)
    dh = 0.5 * np.conj(grad)
    return HopfData(base=-4.0 * dh ** 2)


def hopf_rotate(q: HopfData, theta: float) -> HopfData:
    """Associate-family rotation Q ↦ e^{−2iθ} Q."""
    return HopfData(base=q.base, theta=q.theta + float(theta))


def holomorphicity_defect(q: HopfData, chart: ConformalChart) -> Tuple[float, float]:
    """
    (max, mean) of normalized loop sums Σ Q dw around interior one-rings.
    """
    imm = chart.imm
    tri = imm.triangles
    n = imm.n_vertices
    coeff = q.Q
    loop = np.zeros(n, dtype=complex)
    scale = np.zeros(n)
    for c in range(3):
        a, b = tri[:, (c + 1) % 3], tri[:, (c + 2) % 3]
        dw = chart.w[b] - chart.w[a]
        np.add.at(loop, tri[:, c], coeff * dw)
        np.add.at(scale, tri[:, c], np.abs(coeff) * np.abs(dw))
    interior = ~imm.boundary_mask()
    defect = np.abs(loop[interior]) / np.maximum(scale[interior], 1e-300)
    if not len(defect):
        return 0.0, 0.0
    return float(defect.max()), float(defect.mean())


@dataclass
class AssociateImmersion:
    """Member X_θ of the associate family with its closure diagnostics."""

    immersion: Immersion
    theta: float
    frame_residual: float = 0.0
    frame_residual_mean: float = 0.0
    position_residual: float = 0.0
    """Largest relative mismatch of integrated edge vectors"""

    position_residual_mean: float = 0.0
    height_residual: float = 0.0
    """Largest |t_θ − (cos θ·h + sin θ·h*)| of the frame-integrated heights"""

    residual_map: Optional[np.ndarray] = None
    """Per-vertex largest relative edge mismatch"""

    normalization: Optional[SpaceIsometry] = None


def _dual_pairs(triangles: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    owner = {}
    for t, row in enumerate(triangles.tolist()):
        for k in range(3):
            owner[(row[k], row[(k + 1) % 3])] = t
    left, right = [], []
    for (a, b), t in owner.items():
        s = owner.get((b, a))
        if s is not None and t < s:
            left.append(t)
            right.append(s)
    return np.array(left, dtype=int), np.array(right, dtype=int)


def _rz(angle: np.ndarray) -> np.ndarray:
    angle = np.asarray(angle, dtype=float)
    c, s = np.cos(angle), np.sin(angle)
    out = np.zeros(angle.shape + (3, 3))
    out[..., 0, 0], out[..., 0, 1] = c, -s
    out[..., 1, 0], out[..., 1, 1] = s, c
    out[..., 2, 2] = 1.0
    return out


def _heading(Z: np.ndarray) -> np.ndarray:
    """Angle of the best rotation about the vertical approximating Z."""
    return np.arctan2(Z[..., 1, 0] - Z[..., 0, 1], Z[..., 0, 0] + Z[..., 1, 1])


def _canonical_frames(v: np.ndarray) -> np.ndarray:
    """Rotations taking the unit vectors v onto the vertical (heading 0)."""
    horizontal = np.hypot(v[:, 0], v[:, 1])
    angle = np.arctan2(horizontal, v[:, 2])
    axis = np.column_stack([v[:, 1], -v[:, 0], np.zeros(len(v))])
    safe = np.where(horizontal > 0.0, horizontal, 1.0)
    rotvec = np.where(horizontal[:, None] > 0.0, axis / safe[:, None] * angle[:, None], 0.0)
    upside = v[:, 2] <= -1.0 + 1e-15
    rotvec[upside] = [math.pi, 0.0, 0.0]
    return Rotation.from_rotvec(rotvec).as_matrix()


def associate_immersion(
    imm: Immersion,
    fields: GeometryFields,
    chart: ConformalChart,
    theta: float,
    basepoint: Optional[int] = None,
    tol: float = DEFAULT_CLOSURE_TOL,
    outer: int = 6,
) -> AssociateImmersion:
    """
    Integrate the associate immersion X_θ of a simply connected piece.

    Args:
        imm: Immersion X
        fields: Geometry of X
        chart: Conformal chart of X, giving the conjugate h* the heights
            are checked against
        theta: Associate angle, reduced mod 2π
        basepoint: Vertex fixed by the family; the chart basepoint by default
        tol: Largest admissible relative edge closure mismatch
        outer: Fixed-point passes updating the transport along the new surface

    Returns:
        AssociateImmersion

    Raises:
        IntegrationError: If the closure mismatch exceeds ``tol`` or the
            integrated piece leaves the disk
    """
    theta = float(theta) % (2.0 * math.pi)
    if min(theta, 2.0 * math.pi - theta) < 1e-15:
        same = Immersion(
            z=imm.z.copy(), t=imm.t.copy(), triangles=imm.triangles.copy(),
            chains={k: list(v) for k, v in imm.chains.items()}, corners=dict(imm.corners),
            source=imm.source, mesh=imm.mesh, cap=imm.cap,
        )
        return AssociateImmersion(immersion=same, theta=0.0, residual_map=np.zeros(imm.n_vertices))

    base = chart.basepoint if basepoint is None else basepoint
    tri = imm.triangles
    m = imm.n_triangles
    rot = complex(math.cos(theta), math.sin(theta))

    left, right = _dual_pairs(tri)
    if not len(left):
        raise exceptions.IntegrationError(
            "piece has no interior edges", residuals=np.zeros(imm.n_vertices)
        )
    centroids = imm.z[tri].mean(axis=1)
    beta = transport_angle(centroids[left], centroids[right])
    frames = fields.frames  # rows f1, f2, N
    rel = frames[left] @ _rz(beta).transpose(0, 2, 1) @ frames[right].transpose(0, 2, 1)
    omega = Rotation.from_matrix(rel).as_rotvec()
    tangential = (omega[:, 0] + 1j * omega[:, 1]) * rot
    rel_star = Rotation.from_rotvec(
        np.column_stack([tangential.real, tangential.imag, omega[:, 2]])
    ).as_matrix()

    vertical = frames[:, :, 2]
    rotated = (vertical[:, 0] + 1j * vertical[:, 1]) * rot
    canon = _canonical_frames(np.column_stack([rotated.real, rotated.imag, vertical[:, 2]]))
    base_tri = int(np.nonzero((tri == base).any(axis=1))[0][0])
    psi_base = float(_heading(frames[base_tri].T @ canon[base_tri].T))
    turn = _heading(canon[left] @ rel_star @ canon[right].transpose(0, 2, 1))
    headings = _Incidence(left, right, m, base_tri)

    tails, heads, owner, local_edge = _edge_rows(tri)
    edges = _Incidence(tails, heads, imm.n_vertices, base)
    local = _local_coordinates(imm)
    step = local[owner, (local_edge + 1) % 3] - local[owner, local_edge]
    tangent = np.column_stack([step.real, step.imag, np.zeros(len(step))])

    conjugate_rows = _conjugate_rows(chart, imm.t, tails, heads, owner)
    identity_rows = (
        math.cos(theta) * (imm.t[heads] - imm.t[tails]) + math.sin(theta) * conjugate_rows
    )
    identity = edges.solve(identity_rows, float(imm.t[base]))

    z = imm.z.copy()
    for _ in range(max(1, outer)):
        cz = z[tri].mean(axis=1)
        delta = transport_angle(cz[left], cz[right]) + turn
        psi = headings.solve(delta, psi_base)
        frame_star = _rz(psi) @ canon
        ambient = np.einsum("rij,rj->ri", frame_star[owner], tangent)
        mids = 0.5 * (z[tails] + z[heads])
        lam = 2.0 / (1.0 - np.abs(mids) ** 2)
        carry = np.exp(1j * transport_angle(cz[owner], mids))
        shift = (ambient[:, 0] + 1j * ambient[:, 1]) * carry / lam
        new = edges.solve_complex(shift, imm.z[base])
        if np.any(np.abs(new) >= 1.0):
            raise exceptions.IntegrationError(
                f"associate piece at theta={theta:.4f} leaves the disk", residuals=np.abs(new)
            )
        change = float(np.abs(new - z).max())
        z = new
        if change < 1e-13:
            break

    mids = 0.5 * (z[tails] + z[heads])
    lam = 2.0 / (1.0 - np.abs(mids) ** 2)
    mismatch = np.abs(edges.residual(z, shift)) * lam / np.maximum(np.abs(step), 1e-300)
    residual_map = np.zeros(imm.n_vertices)
    np.maximum.at(residual_map, tails, mismatch)
    np.maximum.at(residual_map, heads, mismatch)
    frame_mismatch = np.abs(headings.residual(psi, delta))
    heights = edges.solve(ambient[:, 2], float(imm.t[base]))

    out = Immersion(
        z=z, t=heights, triangles=tri.copy(),
        chains={k: list(v) for k, v in imm.chains.items()}, corners=dict(imm.corners),
        source=imm.source, mesh=imm.mesh, cap=imm.cap,
    )
    result = AssociateImmersion(
        immersion=out,
        theta=theta,
        frame_residual=float(frame_mismatch.max()),
        frame_residual_mean=float(frame_mismatch.mean()),
        position_residual=float(mismatch.max()),
        position_residual_mean=float(mismatch.mean()),
        height_residual=float(np.abs(heights - identity).max()),
        residual_map=residual_map,
    )
    logger.info(
        f"Associate immersion theta={theta:.4f}: closure max {result.position_residual:.3e}, "
        f"heading max {result.frame_residual:.3e}, height identity {result.height_residual:.3e}"
    )
    if result.position_residual > tol:
        raise exceptions.IntegrationError(
            f"closure residual {result.position_residual:.3e} exceeds {tol:g}",
            residuals=residual_map,
        )
    return result


def metric_error(original: Immersion, other: Immersion) -> float:
    """Largest relative difference of product-space edge lengths."""
    edges, a = original.edge_lengths()
    tails, heads = edges[:, 0], edges[:, 1]
    b = product_distance(other.z[tails], other.t[tails], other.z[heads], other.t[heads])
    return float((np.abs(a - b) / np.maximum(a, 1e-300)).max())


def _chain(imm: Immersion, name: str, reverse: bool = False) -> List[int]:
    if name not in imm.chains:
        raise exceptions.DomainError(f"immersion has no {name} chain")
    chain = list(imm.chains[name])
    return chain[::-1] if reverse else chain


def normalize_conjugate(conj: AssociateImmersion, k: int) -> AssociateImmersion:
    """
    Place a conjugate piece so that 0̃ projects to the disk origin, the image
    of R₂ runs along the positive real axis, the image of R₃ lies on the side
    of angle π/k and the image of R₁ has mean height 0.
    """
    imm = conj.immersion
    origin = imm.corners.get("origin")
    if origin is None:
        raise exceptions.DomainError("conjugate piece has no origin corner")
    p = complex(imm.z[origin])
    s = math.sqrt(1.0 - abs(p) ** 2)
    iso = SpaceIsometry(a=1.0 / s, b=-p / s)

    r2 = _chain(imm, "L1", reverse=True)[:-1]
    heading = float(np.angle(np.mean(iso.horizontal(imm.z[r2]))))
    iso = SpaceIsometry(a=complex(math.cos(-heading / 2), math.sin(-heading / 2))).compose(iso)

    r3 = _chain(imm, "L2", reverse=True)[1:]
    if float(np.mean(iso.horizontal(imm.z[r3])).imag) < 0.0:
        iso = SpaceIsometry(flip=True).compose(iso)

    r1 = imm.chains.get("VERT_P", [origin])
    level = float(np.mean(iso.vertical(imm.t[r1])))
    iso = SpaceIsometry(shift=-level).compose(iso)
    logger.debug(f"Normalized conjugate for k={k}: R1 level {level:.4f}")
    return AssociateImmersion(
        immersion=imm.transformed(iso),
        theta=conj.theta,
        frame_residual=conj.frame_residual,
        frame_residual_mean=conj.frame_residual_mean,
        position_residual=conj.position_residual,
        position_residual_mean=conj.position_residual_mean,
        height_residual=conj.height_residual,
        residual_map=conj.residual_map,
        normalization=iso,
    )


def snap_to_planes(conj: AssociateImmersion, k: int) -> Tuple[AssociateImmersion, float]:
    """
    Move the symmetry-line chains of a normalized conjugate exactly onto
    Π₁ (real diameter), Π₂ (diameter at angle π/k) and the slice t = 0.

    Returns:
        (snapped piece, largest product-space displacement)
    """
    imm = conj.immersion
    z, t = imm.z.copy(), imm.t.copy()
    direction = complex(math.cos(math.pi / k), math.sin(math.pi / k))
    for v in _chain(imm, "L1"):
        z[v] = z[v].real
    for v in _chain(imm, "L2"):
        z[v] = direction * (np.conj(direction) * z[v]).real
    if "VERT_P" in imm.chains:
        t[imm.chains["VERT_P"]] = 0.0
    z[imm.corners["origin"]] = 0j
    moved = float(product_distance(imm.z, imm.t, z, t).max())
    snapped = Immersion(
        z=z, t=t, triangles=imm.triangles, chains=imm.chains, corners=imm.corners,
        source=imm.source, mesh=imm.mesh, cap=imm.cap,
    )
    return (
        AssociateImmersion(
            immersion=snapped,
            theta=conj.theta,
            frame_residual=conj.frame_residual,
            frame_residual_mean=conj.frame_residual_mean,
            position_residual=conj.position_residual,
            position_residual_mean=conj.position_residual_mean,
            height_residual=conj.height_residual,
            residual_map=conj.residual_map,
            normalization=conj.normalization,
        ),
        moved,
    )


@dataclass(frozen=True)
class GeodesicFit:
    """Geodesic A|z|² + 2Re(B̄z) + A = 0 normalized to |B|² − A² = 1."""

    A: float
    B: complex

    def distance(self, z: np.ndarray) -> np.ndarray:
        z = np.asarray(z, dtype=complex)
        value = self.A * np.abs(z) ** 2 + 2.0 * (np.conj(self.B) * z).real + self.A
        return np.arcsinh(np.abs(value) / (1.0 - np.abs(z) ** 2))

    def normal(self, z: np.ndarray) -> np.ndarray:
        """Unit horizontal normal of the vertical plane over the geodesic."""
        grad = self.A * np.asarray(z, dtype=complex) + self.B
        return grad / np.abs(grad)


def fit_geodesic(z: Sequence[complex]) -> GeodesicFit:
    """
    Least-squares geodesic through projected points.

    Raises:
        DegenerateInputError: For fewer than two distinct points
    """
    z = np.asarray(z, dtype=complex)
    if len(np.unique(np.round(z, 14))) < 2:
        raise exceptions.DegenerateInputError("geodesic fit needs two distinct points")
    design = np.column_stack([np.abs(z) ** 2 + 1.0, 2.0 * z.real, 2.0 * z.imag])
    _, _, vt = np.linalg.svd(design)
    a, bx, by = vt[-1]
    scale = bx * bx + by * by - a * a
    if scale <= 0.0:
        raise exceptions.DegenerateInputError(
            "fitted circle does not meet the disk boundary orthogonally"
        )
    root = math.sqrt(scale)
    return GeodesicFit(A=float(a / root), B=complex(bx, by) / root)


@dataclass
class ConjugateAudit:
    """Boundary behaviour of a normalized conjugate piece."""

    k: int
    height_spread: float
    conormal_residual: float
    planarity: Dict[str, float]
    diameter: float
    orthogonality: Dict[str, float]
    plane_angle: float
    crossing_pairs: int
    nu_r2: Tuple[float, float]
    """ν at p̃₁ and at 0̃ along the image of R₂"""

    d1_violations: int
    nu_r3: Tuple[float, float]
    asymptote_drift: float
    limits: Dict[str, float] = field(default_factory=dict)

    @property
    def expected_angle(self) -> float:
        return math.pi / self.k

    def failures(self) -> List[str]:
        lim = {
            "height_spread": 1e-2,
            "planarity": 1e-2,
            "plane_angle": 0.02,
            "orthogonality": 0.05,
            **self.limits,
        }
        out = []
        if self.height_spread >= lim["height_spread"]:
            out.append("height_spread")
        if max(self.planarity.values()) >= lim["planarity"] * self.diameter:
            out.append("planarity")
        if abs(self.plane_angle - self.expected_angle) > lim["plane_angle"]:
            out.append("plane_angle")
        if max(self.orthogonality.values()) >= lim["orthogonality"]:
            out.append("orthogonality")
        if self.crossing_pairs:
            out.append("injectivity")
        if self.d1_violations:
            out.append("d1_monotone")
        return out

    @property
    def passed(self) -> bool:
        return not self.failures()


def _edge_triangles(imm: Immersion) -> Dict[Tuple[int, int], int]:
    out = {}
    for t, row in enumerate(imm.triangles.tolist()):
        for k in range(3):
            out[(row[k], row[(k + 1) % 3])] = t
    return out


def _segments_cross(p1, p2, q1, q2) -> np.ndarray:
    def orient(a, b, c):
        return ((b - a).conjugate() * (c - a)).imag

    d1, d2 = orient(q1, q2, p1), orient(q1, q2, p2)
    d3, d4 = orient(p1, p2, q1), orient(p1, p2, q2)
    return (d1 * d2 < 0.0) & (d3 * d4 < 0.0)


def projection_crossings(imm: Immersion) -> int:
    """Number of properly crossing edge pairs in the vertical projection."""
    edges = imm.edges()
    a, b = imm.z[edges[:, 0]], imm.z[edges[:, 1]]
    length = np.abs(b - a)
    keep = length > 0.0
    edges, a, b, length = edges[keep], a[keep], b[keep], length[keep]
    mids = 0.5 * (a + b)
    tree = cKDTree(np.column_stack([mids.real, mids.imag]))
    pairs = np.array(sorted(tree.query_pairs(float(length.max()))), dtype=int).reshape(-1, 2)
    if not len(pairs):
        return 0
    i, j = pairs[:, 0], pairs[:, 1]
    shared = (
        (edges[i, 0] == edges[j, 0]) | (edges[i, 0] == edges[j, 1])
        | (edges[i, 1] == edges[j, 0]) | (edges[i, 1] == edges[j, 1])
    )
    i, j = i[~shared], j[~shared]
    return int(np.count_nonzero(_segments_cross(a[i], b[i], a[j], b[j])))


def _diameter(imm: Immersion, limit: int = 400) -> float:
    verts = np.nonzero(imm.boundary_mask())[0]
    if len(verts) > limit:
        verts = verts[np.linspace(0, len(verts) - 1, limit).astype(int)]
    z, t = imm.z[verts], imm.t[verts]
    return float(product_distance(z[:, None], t[:, None], z[None, :], t[None, :]).max())


def conjugate_boundary_audit(
    conj: AssociateImmersion, k: int, fields: Optional[GeometryFields] = None
) -> ConjugateAudit:
    """
    Check the boundary behaviour of a normalized conjugate piece.

    The images of R₁ (vertical segment over p₁), R₂ (p₁ → 0) and R₃ (0 → the
    ideal vertex) are taken from the VERT_P, L1 and L2 chains.

    Raises:
        DomainError: If a required chain is missing
    """
    imm = conj.immersion
    fields = geometry(imm) if fields is None else fields
    r1 = _chain(imm, "VERT_P")
    r2 = _chain(imm, "L1", reverse=True)
    r3 = _chain(imm, "L2", reverse=True)
    by_edge = _edge_triangles(imm)
    normals = fields.tri_normals

    spread = float(np.ptp(imm.t[r1]))
    conormal = []
    for a, b in zip(r1[:-1], r1[1:]):
        tri = by_edge.get((a, b))
        if tri is None:
            raise exceptions.DomainError("VERT_P chain does not follow the boundary orientation")
        mid = np.array([0.5 * (imm.z[a] + imm.z[b])])
        d = edge_vectors(imm.z, imm.t, np.array([a]), np.array([b]), mid)[0]
        c = np.cross(normals[tri], d / np.linalg.norm(d))
        conormal.append(1.0 - abs(c[2]))

    fits = {"R2": fit_geodesic(imm.z[r2]), "R3": fit_geodesic(imm.z[r3])}
    planarity = {
        name: float(fits[name].distance(imm.z[chain]).max())
        for name, chain in (("R2", r2), ("R3", r3))
    }
    orthogonality = {}
    for name, chain in (("R2", imm.chains["L1"]), ("R3", imm.chains["L2"])):
        worst = 0.0
        for a, b in zip(chain[:-1], chain[1:]):
            tri = by_edge.get((a, b))
            if tri is None:
                continue
            n_plane = fits[name].normal(0.5 * (imm.z[a] + imm.z[b]))
            worst = max(worst, abs(normals[tri, 0] * n_plane.real + normals[tri, 1] * n_plane.imag))
        orthogonality[name] = float(worst)

    at = imm.z[imm.corners["origin"]]
    n1, n2 = fits["R2"].normal(at), fits["R3"].normal(at)
    angle = float(np.arccos(min(1.0, abs((np.conj(n1) * n2).real))))

    d1 = np.abs(imm.t[r2])
    steps = np.diff(d1)
    trend = np.sign(d1[-1] - d1[0]) or 1.0
    violations = int(np.count_nonzero(steps * trend <= 0.0))

    tail = r3[-max(2, len(r3) // 4):]
    audit = ConjugateAudit(
        k=k,
        height_spread=spread,
        conormal_residual=float(max(conormal, default=0.0)),
        planarity=planarity,
        diameter=_diameter(imm),
        orthogonality=orthogonality,
        plane_angle=angle,
        crossing_pairs=projection_crossings(imm),
        nu_r2=(float(fields.nu[r2[0]]), float(fields.nu[r2[-1]])),
        d1_violations=violations,
        nu_r3=(float(fields.nu[r3[0]]), float(fields.nu[r3[-1]])),
        asymptote_drift=float(fits["R3"].distance(imm.z[tail]).max()),
    )
    failures = audit.failures()
    if failures:
        logger.warning(f"Conjugate audit failed: {', '.join(failures)}")
    else:
        logger.info("Conjugate audit passed")
    return audit


def conjugate_audit_rows(audit: ConjugateAudit) -> List[Dict[str, object]]:
    """Rows (check, value, limit) of a conjugate audit."""
    failed = set(audit.failures())
    rows = [
        ("height_spread", audit.height_spread, 1e-2, "height_spread"),
        ("conormal_residual", audit.conormal_residual, None, None),
        ("planarity_R2", audit.planarity["R2"], 1e-2 * audit.diameter, "planarity"),
        ("planarity_R3", audit.planarity["R3"], 1e-2 * audit.diameter, "planarity"),
        ("orthogonality_R2", audit.orthogonality["R2"], 0.05, "orthogonality"),
        ("orthogonality_R3", audit.orthogonality["R3"], 0.05, "orthogonality"),
        ("plane_angle", audit.plane_angle, audit.expected_angle, "plane_angle"),
        ("crossing_pairs", audit.crossing_pairs, 0, "injectivity"),
        ("nu_R2_start", audit.nu_r2[0], None, None),
        ("nu_R2_end", audit.nu_r2[1], None, None),
        ("d1_violations", audit.d1_violations, 0, "d1_monotone"),
        ("nu_R3_start", audit.nu_r3[0], None, None),
        ("nu_R3_end", audit.nu_r3[1], None, None),
        ("asymptote_drift", audit.asymptote_drift, None, None),
    ]
    return [
        {
            "check": name,
            "value": value,
            "limit": limit,
            "passed": gate is None or gate not in failed,
        }
        for name, value, limit, gate in rows
    ]
