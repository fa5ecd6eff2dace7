"""
Vertical minimal surface equation on wedge meshes.

The equation div_H(∇_H u / W_u) = 0 is discretized with piecewise-linear
elements in disk coordinates, where it reads div(∇u / W) = 0 with
W = sqrt(1 + |∇u|²/λ²). Per element the flux coefficient 1/W is averaged at
the edge midpoints; edge weights are the cotangent coefficients scaled by it
and clipped at zero, which keeps the discrete maximum principle exact.
"""

import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, List, Optional, Sequence, Tuple, Union

import numpy as np
import scipy.sparse as sparse
from scipy.interpolate import LinearNDInterpolator
from scipy.sparse.linalg import spsolve

from . import exceptions
from .hypgeom import hyp_distance
from .meshdom import BoundaryTag, TriMesh, WedgeSpec, build_wedge, compact_subregion, refine

logger = logging.getLogger(__name__)

INTEGRITY_TOL = 1e-10


@dataclass
class ScalarField:
    """Nodal values over a mesh (heights in hyperbolic units)."""

    mesh: TriMesh
    values: np.ndarray
    cap: Optional[float] = None
    """Cap value n of the Dirichlet data the field solves, if any"""

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (self.mesh.n_vertices,):
            raise exceptions.DomainError(
                f"field has {self.values.shape[0]} values for {self.mesh.n_vertices} vertices"
            )
        if not np.all(np.isfinite(self.values)):
            raise exceptions.DomainError("field values must be finite")


@dataclass(frozen=True)
class SolverConfig:
    """Newton solver settings for a capped solve."""

    cap: float = 1.0
    """Dirichlet value n on GAMMA_CAP"""

    tol: float = 1e-10
    """Tolerance on the largest mean-value defect at free vertices"""

    max_iter: int = 50
    armijo: float = 1e-4
    """Sufficient-decrease constant of the backtracking line search"""

    min_step: float = 2.0 ** -30
    polish_steps: int = 2
    """Extra Newton steps taken after the tolerance is met"""

    continuation: bool = True
    """Ramp the cap by doubling when no warm start is given"""

    def __post_init__(self):
        if self.tol <= 0.0:
            raise exceptions.DomainError("Newton tolerance must be positive")
        if self.cap < 0.0:
            raise exceptions.DomainError("cap value must be non-negative")
        if self.max_iter < 1:
            raise exceptions.DomainError("max_iter must be at least 1")

    def with_cap(self, cap: float) -> "SolverConfig":
        return SolverConfig(
            cap=cap,
            tol=self.tol,
            max_iter=self.max_iter,
            armijo=self.armijo,
            min_step=self.min_step,
            polish_steps=self.polish_steps,
            continuation=self.continuation,
        )


@dataclass
class SolveReport:
    """Diagnostics of one Newton solve."""

    residual_norm: float = math.inf
    """Largest mean-value defect |R_i| / Σ_j w_ij over free vertices"""

    iterations: int = 0
    history: List[float] = field(default_factory=list)
    """Euclidean residual norm at each accepted iterate"""

    steps: List[float] = field(default_factory=list)
    """Accepted damping factors"""

    superlinear: bool = False
    clipped_edges: int = 0
    converged: bool = False


class _Discretization:
    """Per-mesh element data reused across residual evaluations."""

    def __init__(self, mesh: TriMesh):
        self.mesh = mesh
        tri = mesh.triangles
        z = mesh.vertices[tri]
        area = mesh.signed_areas()
        if np.any(area <= 0.0):
            raise exceptions.DomainError("mesh triangles must be counter-clockwise")
        self.area = area
        # ∇φ_c = J(z_{c+2} − z_{c+1}) / 2A, stored as complex x + iy
        opposite = np.roll(z, -2, axis=1) - np.roll(z, -1, axis=1)
        self.grad = 1j * opposite / (2.0 * area[:, None])
        dots = (np.conj(self.grad[:, :, None]) * self.grad[:, None, :]).real
        # cot(θ_c)/2 = −A ∇φ_{c+1}·∇φ_{c+2}
        self.cot = -area[:, None] * np.stack(
            [dots[:, (c + 1) % 3, (c + 2) % 3] for c in range(3)], axis=1
        )
        mids = 0.5 * (z + np.roll(z, -1, axis=1))
        self.lam = 2.0 / (1.0 - np.abs(mids) ** 2)

        self.ei = tri[:, [1, 2, 0]].ravel()
        self.ej = tri[:, [2, 0, 1]].ravel()
        lo, hi = np.minimum(self.ei, self.ej), np.maximum(self.ei, self.ej)
        keys = lo * mesh.n_vertices + hi
        self.edge_keys, self.edge_of = np.unique(keys, return_inverse=True)
        self.edge_i = self.edge_keys // mesh.n_vertices
        self.edge_j = self.edge_keys % mesh.n_vertices

    def gradient(self, u: np.ndarray) -> np.ndarray:
        return (u[self.mesh.triangles] * self.grad).sum(axis=1)

    def flux_coefficient(self, g: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """κ = mean 1/W at the edge midpoints and dκ/dG (complex)."""
        g2 = np.abs(g) ** 2
        denom = self.lam ** 2 + g2[:, None]
        kappa = (self.lam / np.sqrt(denom)).mean(axis=1)
        dkappa = -(self.lam / denom ** 1.5).mean(axis=1) * g
        return kappa, dkappa

    def edge_weights(self, kappa: np.ndarray) -> np.ndarray:
        per_corner = (kappa[:, None] * self.cot).ravel()
        return np.bincount(self.edge_of, weights=per_corner, minlength=len(self.edge_keys))

    def residual(self, u: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(R, edge weights clipped at 0, per-vertex weight sums)."""
        kappa, _ = self.flux_coefficient(self.gradient(u))
        w = np.maximum(self.edge_weights(kappa), 0.0)
        n = self.mesh.n_vertices
        flow = w * (u[self.edge_i] - u[self.edge_j])
        res = np.bincount(self.edge_i, flow, n) - np.bincount(self.edge_j, flow, n)
        diag = np.bincount(self.edge_i, w, n) + np.bincount(self.edge_j, w, n)
        return res, w, diag

    def jacobian(self, u: np.ndarray) -> sparse.csr_matrix:
        n = self.mesh.n_vertices
        tri = self.mesh.triangles
        kappa, dkappa = self.flux_coefficient(self.gradient(u))
        raw = self.edge_weights(kappa)
        active = raw > 0.0
        w = np.where(active, raw, 0.0)

        rows = [self.edge_i, self.edge_j, self.edge_i, self.edge_j]
        cols = [self.edge_i, self.edge_j, self.edge_j, self.edge_i]
        vals = [w, w, -w, -w]

        # derivative of κ_t through the element gradient
        dk = (np.conj(dkappa[:, None]) * self.grad).real
        coeff = (self.cot.ravel() * active[self.edge_of]) * (u[self.ei] - u[self.ej])
        owner = np.repeat(np.arange(tri.shape[0]), 3)
        for k in range(3):
            value = coeff * dk[owner, k]
            target = tri[owner, k]
            rows.extend([self.ei, self.ej])
            cols.extend([target, target])
            vals.extend([value, -value])
        mat = sparse.coo_matrix(
            (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(n, n)
        )
        return mat.tocsr()


def _discretization(mesh: TriMesh) -> _Discretization:
    cached = getattr(mesh, "_h2xr_discretization", None)
    if cached is None:
        cached = _Discretization(mesh)
        object.__setattr__(mesh, "_h2xr_discretization", cached)
    return cached


def residual(mesh: TriMesh, u: ScalarField) -> np.ndarray:
    """
    Per-vertex residual of the discrete vertical minimal surface equation.

    Args:
        mesh: Triangulated domain
        u: Nodal heights on ``mesh``

    Returns:
        Residual vector; zero at free vertices of an exact discrete solution

    Raises:
        DomainError: If the field belongs to a different mesh
    """
    if u.mesh is not mesh and (
        u.values.shape[0] != mesh.n_vertices or u.mesh.checksum() != mesh.checksum()
    ):
        raise exceptions.DomainError("field belongs to a different mesh")
    return _discretization(mesh).residual(u.values)[0]


def capped_data(mesh: TriMesh, cap: float) -> Tuple[np.ndarray, np.ndarray]:
    """
    Dirichlet mask and values: cap on GAMMA_CAP, 0 on L1 ∪ L2 (corner p₁ gets 0).

    A TRUNC side carries data falling linearly in hyperbolic arclength from
    the cap at q_j to 0 at r_j, so the data is continuous at both its ends.
    On the triangle the corner q_j gets 0.
    """
    mask = mesh.boundary_mask()
    values = np.zeros(mesh.n_vertices)
    values[mesh.tag_vertices(BoundaryTag.GAMMA_CAP)] = cap
    chain = mesh.tag_chain(BoundaryTag.TRUNC)
    if chain:
        z = mesh.vertices[chain]
        arclength = np.concatenate([[0.0], np.cumsum(hyp_distance(z[:-1], z[1:]))])
        values[chain] = cap * (1.0 - arclength / arclength[-1])
    for tag in (BoundaryTag.L1, BoundaryTag.L2):
        values[mesh.tag_vertices(tag)] = 0.0
    return mask, values


def harmonic_extension(mesh: TriMesh, mask: np.ndarray, values: np.ndarray) -> np.ndarray:
    """Discrete harmonic function with the given Dirichlet values."""
    disc = _discretization(mesh)
    w = np.maximum(disc.edge_weights(np.ones(mesh.n_triangles)), 0.0)
    n = mesh.n_vertices
    lap = sparse.coo_matrix(
        (
            np.concatenate([w, w, -w, -w]),
            (
                np.concatenate([disc.edge_i, disc.edge_j, disc.edge_i, disc.edge_j]),
                np.concatenate([disc.edge_i, disc.edge_j, disc.edge_j, disc.edge_i]),
            ),
        ),
        shape=(n, n),
    ).tocsr()
    free = ~mask
    u = np.where(mask, values, 0.0)
    if free.any():
        rhs = -lap[free][:, mask] @ values[mask]
        u[free] = spsolve(lap[free][:, free].tocsc(), rhs)
    return u


def _superlinear(history: Sequence[float]) -> bool:
    if len(history) >= 2 and history[-1] <= 1e-13 * max(1.0, history[0]):
        return True
    if len(history) < 3 or history[-2] == 0.0 or history[-3] == 0.0:
        return False
    r1 = history[-2] / history[-3]
    r2 = history[-1] / history[-2]
    return r2 < 0.1 and r2 < r1


def solve_dirichlet(
    mesh: TriMesh,
    mask: np.ndarray,
    values: np.ndarray,
    cfg: SolverConfig,
    initial: Optional[np.ndarray] = None,
) -> Tuple[np.ndarray, SolveReport]:
    """
    Damped Newton solve with general Dirichlet data on the masked vertices.

    Raises:
        ConvergenceError: If the tolerance is not met within ``cfg.max_iter``
        SolverIntegrityError: If the solution leaves the range of its data
    """
    disc = _discretization(mesh)
    free = ~mask
    u = harmonic_extension(mesh, mask, values) if initial is None else np.array(initial, float)
    u[mask] = values[mask]
    report = SolveReport()

    polish = 0
    while True:
        res, w, diag = disc.residual(u)
        norm = float(np.linalg.norm(res[free]))
        defect = float(np.max(np.abs(res[free]) / np.maximum(diag[free], 1e-300), initial=0.0))
        report.history.append(norm)
        report.iterations += 1
        report.residual_norm = defect
        kappa, _ = disc.flux_coefficient(disc.gradient(u))
        report.clipped_edges = int(np.count_nonzero(disc.edge_weights(kappa) < 0.0))
        logger.debug(f"Newton iterate {report.iterations}: |R|={norm:.3e} defect={defect:.3e}")

        if defect <= cfg.tol:
            report.converged = True
            if polish >= cfg.polish_steps or norm == 0.0:
                break
            polish += 1
        if report.iterations > cfg.max_iter:
            break

        jac = disc.jacobian(u)
        step_dir = np.zeros_like(u)
        step_dir[free] = spsolve(jac[free][:, free].tocsc(), -res[free])
        if not np.all(np.isfinite(step_dir)):
            raise exceptions.ConvergenceError("singular Newton system", report=report)

        step = 1.0
        while step >= cfg.min_step:
            trial = u + step * step_dir
            trial_norm = float(np.linalg.norm(disc.residual(trial)[0][free]))
            if trial_norm <= (1.0 - cfg.armijo * step) * norm or (
                report.converged and trial_norm <= norm
            ):
                break
            step *= 0.5
        else:
            if report.converged:
                break
            raise exceptions.ConvergenceError(
                f"line search stalled at |R|={norm:.3e}", report=report
            )
        report.steps.append(step)
        u = trial

    report.superlinear = _superlinear(report.history)
    if not report.converged:
        raise exceptions.ConvergenceError(
            f"no convergence after {cfg.max_iter} iterations (defect {report.residual_norm:.3e})",
            report=report,
        )
    _audit_bounds(u, mask, values)
    return u, report


def _audit_bounds(u: np.ndarray, mask: np.ndarray, values: np.ndarray) -> None:
    lo, hi = float(values[mask].min()), float(values[mask].max())
    over = max(float(u.max()) - hi, lo - float(u.min()))
    if over > INTEGRITY_TOL:
        raise exceptions.SolverIntegrityError(
            f"maximum principle violated by {over:.3e} (data range [{lo}, {hi}])"
        )


def solve_capped(
    mesh: TriMesh, cfg: SolverConfig, warm_start: Optional[ScalarField] = None
) -> Tuple[ScalarField, SolveReport]:
    """
    Solve with data 0 on L1 ∪ L2 and ``cfg.cap`` on GAMMA_CAP.

    Args:
        mesh: Wedge mesh
        cfg: Solver settings carrying the cap value
        warm_start: Solution for a smaller cap, rescaled as the initial guess

    Returns:
        (field, report)

    Example:
        >>> u, report = solve_capped(mesh, SolverConfig(cap=1.0))
        >>> 0.0 <= u.values.min() and u.values.max() <= 1.0
        True
    """
    mask, values = capped_data(mesh, cfg.cap)
    initial = None
    if warm_start is not None and warm_start.cap:
        initial = warm_start.values * (cfg.cap / warm_start.cap)
    elif cfg.continuation and cfg.cap > 1.0:
        ramp = 1.0
        ramp_field, _ = solve_capped(mesh, cfg.with_cap(ramp))
        while 2.0 * ramp < cfg.cap:
            ramp *= 2.0
            ramp_field, _ = solve_capped(mesh, cfg.with_cap(ramp), warm_start=ramp_field)
        initial = ramp_field.values * (cfg.cap / ramp)
    u, report = solve_dirichlet(mesh, mask, values, cfg, initial)
    logger.info(
        f"Solved cap n={cfg.cap:g}: {report.iterations} iterations,"
        f" defect {report.residual_norm:.2e}"
    )
    return ScalarField(mesh, u, cap=cfg.cap), report


@dataclass
class CapSweep:
    """Fields for an increasing cap schedule and their monotonicity audit."""

    caps: List[float]
    fields: List[ScalarField]
    reports: List[SolveReport]
    min_increment: float
    """Smallest u_{n+1} − u_n over all vertices and consecutive caps"""

    sup_differences: List[float]
    """sup |u_{n+1} − u_n| on the compact subregion"""

    subregion: np.ndarray

    @property
    def monotone(self) -> bool:
        return self.min_increment >= -INTEGRITY_TOL

    def gap_ratios(self) -> List[float]:
        d = self.sup_differences
        return [d[i + 1] / d[i] if d[i] > 0 else 0.0 for i in range(len(d) - 1)]


def cap_sweep(
    mesh: TriMesh,
    caps: Sequence[float],
    cfg: Optional[SolverConfig] = None,
    subregion: Optional[np.ndarray] = None,
) -> CapSweep:
    """
    Solve for each cap with warm-started continuation.

    Raises:
        DomainError: If caps are empty or not strictly increasing
    """
    caps = [float(c) for c in caps]
    if not caps:
        raise exceptions.DomainError("cap schedule is empty")
    if any(b <= a for a, b in zip(caps[:-1], caps[1:])):
        raise exceptions.DomainError(f"caps must be strictly increasing, got {caps}")
    if caps[0] < 0.0:
        raise exceptions.DomainError("caps must be non-negative")
    cfg = cfg or SolverConfig()
    mask = compact_subregion(mesh) if subregion is None else subregion

    fields, reports = [], []
    previous = None
    for cap in caps:
        u, report = solve_capped(mesh, cfg.with_cap(cap), warm_start=previous)
        fields.append(u)
        reports.append(report)
        previous = u if cap > 0.0 else None

    increments = [float((b.values - a.values).min()) for a, b in zip(fields[:-1], fields[1:])]
    sups = [
        float(np.abs(b.values[mask] - a.values[mask]).max(initial=0.0))
        for a, b in zip(fields[:-1], fields[1:])
    ]
    sweep = CapSweep(
        caps=caps,
        fields=fields,
        reports=reports,
        min_increment=min(increments, default=0.0),
        sup_differences=sups,
        subregion=mask,
    )
    if not sweep.monotone:
        logger.warning(f"Cap sweep not monotone: min increment {sweep.min_increment:.3e}")
    return sweep


@dataclass
class LimitEstimate:
    """Extrapolated n → ∞ heights on a compact subregion."""

    field: ScalarField
    """Extrapolated values on the subregion, last-cap values elsewhere"""

    error: np.ndarray
    """Estimated remaining error per vertex (0 outside the subregion)"""

    flagged: np.ndarray
    """Subregion vertices whose differences are not in geometric decay"""

    subregion: np.ndarray

    @property
    def max_error(self) -> float:
        return float(self.error[self.subregion].max(initial=0.0))


def limit_estimate(sweep: CapSweep, subregion: Optional[np.ndarray] = None) -> LimitEstimate:
    """
    Geometric-tail (Aitken) extrapolation of the last three caps.

    Raises:
        DomainError: If fewer than 3 caps were swept or the subregion touches GAMMA_CAP
    """
    if len(sweep.fields) < 3:
        raise exceptions.DomainError("limit estimate needs at least 3 caps")
    mesh = sweep.fields[-1].mesh
    mask = sweep.subregion if subregion is None else np.asarray(subregion, dtype=bool)
    if mask[mesh.tag_vertices(BoundaryTag.GAMMA_CAP)].any():
        raise exceptions.DomainError("subregion touches GAMMA_CAP where the limit is infinite")

    a, b, c = (f.values for f in sweep.fields[-3:])
    d1, d2 = b - a, c - b
    limit = c.copy()
    error = np.zeros_like(c)
    flagged = np.zeros(c.shape, dtype=bool)

    settled = mask & (np.abs(d1) <= 1e-14)
    error[settled] = np.abs(d2[settled])
    active = mask & ~settled
    ratio = np.zeros_like(c)
    ratio[active] = d2[active] / d1[active]
    geometric = active & (ratio >= 0.0) & (ratio < 1.0)
    tail = np.zeros_like(c)
    tail[geometric] = d2[geometric] * ratio[geometric] / (1.0 - ratio[geometric])
    limit[geometric] += tail[geometric]
    error[geometric] = np.abs(tail[geometric])
    flagged[active & ~geometric] = True
    error[flagged] = np.abs(d2[flagged])
    if flagged.any():
        logger.info(f"{int(flagged.sum())} vertices not yet in geometric decay")
    return LimitEstimate(
        field=ScalarField(mesh, limit),
        error=error,
        flagged=flagged,
        subregion=mask,
    )


@dataclass
class TruncationRun:
    spec: WedgeSpec
    mesh: TriMesh
    field: ScalarField
    report: SolveReport


@dataclass
class TruncationSweep:
    """Capped solves on a shrinking sequence of truncations."""

    runs: List[TruncationRun]
    sup_differences: List[float]
    """sup |u(j+1) − u(j)| over the compact part of the coarser domain"""

    max_increase: List[float]
    """max (u(j+1) − u(j)); non-positive when larger domains lower the graph"""


def solve_truncation_sweep(
    k: int,
    alpha: float,
    truncations: Sequence[float],
    cfg: SolverConfig,
    target_h: float = 0.08,
    grading: float = 2.0,
    trunc_side: bool = False,
) -> TruncationSweep:
    """
    Solve one cap over several truncations and compare on common compact regions.

    With ``trunc_side`` each domain is the quadrilateral closed by the
    geodesic through q_j perpendicular to the ray 0p₂.
    """
    if not truncations:
        raise exceptions.DomainError("truncation schedule is empty")
    runs = []
    for trunc in truncations:
        spec = WedgeSpec.truncated(
            k, alpha, trunc, target_h=target_h, grading=grading, trunc_side=trunc_side
        )
        mesh = build_wedge(spec)
        u, report = solve_capped(mesh, cfg)
        runs.append(TruncationRun(spec, mesh, u, report))

    sups, increases = [], []
    for coarse, fine in zip(runs[:-1], runs[1:]):
        mask = compact_subregion(coarse.mesh)
        pts = coarse.mesh.vertices[mask]
        interp = LinearNDInterpolator(
            np.column_stack([fine.mesh.vertices.real, fine.mesh.vertices.imag]), fine.field.values
        )
        other = interp(pts.real, pts.imag)
        valid = np.isfinite(other)
        diff = other[valid] - coarse.field.values[mask][valid]
        sups.append(float(np.abs(diff).max(initial=0.0)))
        increases.append(float(diff.max(initial=0.0)))
    return TruncationSweep(runs=runs, sup_differences=sups, max_increase=increases)


def refinement_order(fields: Sequence[ScalarField], mask: np.ndarray) -> float:
    """
    Observed convergence order from three successively refined solutions.

    Refinement keeps coarse vertex indices, so differences are taken on the
    coarsest mesh's vertices selected by ``mask``.
    """
    e1, e2 = _refinement_differences(fields, mask)
    if e2 == 0.0:
        return math.inf
    return math.log2(e1 / e2)


def _refinement_differences(
    fields: Sequence[ScalarField], mask: np.ndarray
) -> Tuple[float, float]:
    if len(fields) != 3:
        raise exceptions.DomainError("refinement order needs exactly three fields")
    mask = np.asarray(mask, dtype=bool)
    if not mask.any():
        raise exceptions.DomainError("refinement order needs a non-empty vertex set")
    n = fields[0].mesh.n_vertices
    e1 = float(np.abs(fields[1].values[:n] - fields[0].values)[mask].max())
    e2 = float(np.abs(fields[2].values[:n] - fields[1].values[:n])[mask].max())
    return e1, e2


@dataclass
class RefinementStudy:
    """Solutions on a mesh and its two uniform refinements."""

    fields: List[ScalarField]
    differences: Tuple[float, float]
    """sup differences between consecutive levels on the coarse subregion"""

    order: float
    subregion: np.ndarray


def refinement_study(
    mesh: TriMesh,
    cfg: SolverConfig,
    data: Optional[Callable[[np.ndarray], np.ndarray]] = None,
    subregion: Optional[np.ndarray] = None,
) -> RefinementStudy:
    """
    Solve on ``mesh``, ``refine(mesh)`` and ``refine(refine(mesh))``.

    Args:
        mesh: Coarsest mesh
        cfg: Solver settings; ``cfg.cap`` is used for the capped data
        data: Dirichlet values as a function of boundary positions, in place
            of the capped data
        subregion: Coarse-mesh vertices compared across levels, by default
            the compact subregion

    Returns:
        The study with its observed order
    """
    meshes = [mesh, refine(mesh)]
    meshes.append(refine(meshes[1]))
    fields = []
    for level in meshes:
        if data is None:
            mask, values = capped_data(level, cfg.cap)
        else:
            mask = level.boundary_mask()
            values = np.where(mask, data(level.vertices), 0.0)
        u, report = solve_dirichlet(level, mask, values, cfg)
        fields.append(ScalarField(level, u, cap=cfg.cap if data is None else None))
        logger.debug(f"Refinement level {level.n_vertices} vertices: {report.iterations} steps")
    region = compact_subregion(mesh) if subregion is None else np.asarray(subregion, dtype=bool)
    differences = _refinement_differences(fields, region)
    order = math.inf if differences[1] == 0.0 else math.log2(differences[0] / differences[1])
    logger.info(f"Observed refinement order {order:.3f} (differences {differences})")
    return RefinementStudy(fields=fields, differences=differences, order=order, subregion=region)


def format_field(u: ScalarField) -> str:
    lines = [f"# mesh {u.mesh.checksum()}"]
    if u.cap is not None:
        lines.append(f"# cap {float(u.cap)!r}")
    lines.extend(f"u {i} {float(v)!r}" for i, v in enumerate(u.values))
    return "\n".join(lines) + "\n"


def dump_field(u: ScalarField, path: Union[str, Path]) -> None:
    """Write ``u index value`` lines keyed by the mesh checksum."""
    Path(path).write_text(format_field(u), encoding="ascii")


def load_field(path: Union[str, Path], mesh: TriMesh) -> ScalarField:
    """
    Read a field written by :func:`dump_field`.

    Raises:
        DomainError: If the file was written for another mesh or is malformed
    """
    values = np.full(mesh.n_vertices, np.nan)
    cap = None
    checksum = None
    for number, raw in enumerate(Path(path).read_text(encoding="ascii").splitlines(), 1):
        parts = raw.split()
        if not parts:
            continue
        if parts[0] == "#":
            if len(parts) == 3 and parts[1] == "mesh":
                checksum = parts[2]
            elif len(parts) == 3 and parts[1] == "cap":
                cap = float(parts[2])
            continue
        try:
            if parts[0] != "u":
                raise ValueError(f"unknown record {parts[0]!r}")
            values[int(parts[1])] = float(parts[2])
        except (IndexError, ValueError) as e:
            raise exceptions.DomainError(f"{path}:{number}: {e}") from e
    if checksum != mesh.checksum():
        raise exceptions.DomainError(f"{path} was written for a different mesh")
    return ScalarField(mesh, values, cap=cap)
