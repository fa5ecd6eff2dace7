"""
Batch front door: solve → analyze → conjugate → assemble, with CSV/OBJ artifacts.

Usage::

    h2xr assemble --k 2 --alpha 0.5 --out runs/sigma2
    h2xr sweep --parameter truncation --values 0.2 0.1 0.05
    h2xr export --stage conjugate --out runs/conj
"""

import argparse
import logging
import math
import sys
import time
from contextlib import contextmanager
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Iterator, List, Optional, Sequence

from . import exceptions
from .assembly import (
    SurfaceComplex,
    build_sigma_alpha,
    build_sigma_alpha_k,
    build_sigma_k,
    embeddedness_check,
    extrapolate_total_curvature,
    period_defect,
    seam_continuity_check,
    symmetry_defect,
    write_manifest,
)
from .config import RunConfig, load_config, parse_value
from .conjugate import (
    AssociateImmersion,
    ConjugateAudit,
    associate_immersion,
    conformal_chart,
    conjugate_audit_rows,
    conjugate_boundary_audit,
    metric_error,
    normalize_conjugate,
    snap_to_planes,
)
from .graphsolve import (
    CapSweep,
    RefinementStudy,
    ScalarField,
    cap_sweep,
    dump_field,
    refinement_study,
    solve_capped,
)
from .meshdom import TriMesh, build_wedge, dump_mesh
from .meshdom import refine as refine_mesh
from .reports import Summary, with_differences, write_csv, write_obj
from .surfgeo import (
    GaussBonnetAudit,
    GeometryFields,
    Immersion,
    TotalCurvature,
    audit_rows,
    curvature_rows,
    gauss_bonnet_audit,
    geometry,
    immerse,
    total_curvature,
)

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_SOLVER = 3
EXIT_AUDIT = 4

DEPTH = {"solve": 0, "audit": 1, "conjugate": 2, "assemble": 3}
SWEEP_PARAMETERS = {
    "cap": "caps",
    "truncation": "truncations",
    "target_h": "mesh_h",
    "alpha": "alpha",
    "theta": "theta",
}

TC_GATE = {2: 0.05, 3: 0.08}
SEAM_GATE = 0.05
ANGLE_GATE = 0.02
SYMMETRY_GATE = 1e-9
METRIC_GATE = 1e-2
SNAP_GATE = 1e-2
"""Largest snap displacement as a fraction of the conjugate piece's diameter"""

ORDER_GATE = 1.5


def exit_code(error: BaseException) -> int:
    """Exit status for a failure."""
    if isinstance(error, (exceptions.AuditGateError, exceptions.SeamError)):
        return EXIT_AUDIT
    if isinstance(
        error,
        (
            exceptions.ConvergenceError,
            exceptions.SolverIntegrityError,
            exceptions.ChartError,
            exceptions.IntegrationError,
            exceptions.PeriodError,
            exceptions.MeshCapacityError,
        ),
    ):
        return EXIT_SOLVER
    return EXIT_CONFIG


def piece_count(config: RunConfig) -> int:
    """Fundamental pieces whose total curvature adds up to the reported surface value."""
    return {
        "delta_k": 1,
        "sigma_alpha_k": 2 * config.k,
        "sigma_alpha": 8,
        "sigma_k": 4 * config.k,
    }[config.target]


def expected_total_curvature(config: RunConfig) -> float:
    """Limit of the surface total curvature as caps grow and truncations vanish."""
    return piece_count(config) * (1 - config.k) * math.pi / config.k


@dataclass
class PieceStage:
    """Solved and analyzed graph piece."""

    mesh: TriMesh
    sweep: CapSweep
    immersion: Optional[Immersion] = None
    geometry: Optional[GeometryFields] = None
    total_curvature: Optional[TotalCurvature] = None
    audit: Optional[GaussBonnetAudit] = None

    @property
    def field(self) -> ScalarField:
        return self.sweep.fields[-1]


@dataclass
class ConjugateStage:
    associate: AssociateImmersion
    """Member used downstream; the snapped conjugate at θ = π/2"""

    metric_error: float
    audit: Optional[ConjugateAudit] = None
    """Boundary audit of the normalized conjugate before snapping"""

    normalized: Optional[AssociateImmersion] = None
    snap_distance: float = 0.0

    def rows(self) -> List[Dict[str, Any]]:
        """Integration diagnostics, one (check, value) row each."""
        assoc = self.associate
        return [
            {"check": "metric_error", "value": self.metric_error},
            {"check": "position_residual", "value": assoc.position_residual},
            {"check": "frame_residual", "value": assoc.frame_residual},
            {"check": "height_residual", "value": assoc.height_residual},
            {"check": "snap_distance", "value": self.snap_distance},
        ]


@dataclass
class RunResult:
    """Exit status, written files and the summary of one run."""

    status: int
    artifacts: Dict[str, Path] = field(default_factory=dict)
    summary: Optional[Summary] = None
    error: Optional[str] = None
    stage: Optional[str] = None


@contextmanager
def _stage(name: str, result: RunResult) -> Iterator[None]:
    logger.info(f"Stage {name}")
    result.stage = name
    try:
        yield
    except exceptions.H2xrError as e:
        logger.error(f"Stage {name} failed: {e}")
        raise


def build_mesh(config: RunConfig, truncation: Optional[float] = None) -> TriMesh:
    mesh = build_wedge(config.wedge_spec(truncation))
    for _ in range(config.refine):
        mesh = refine_mesh(mesh)
    return mesh


def solve_stage(config: RunConfig) -> PieceStage:
    mesh = build_mesh(config)
    return PieceStage(mesh=mesh, sweep=cap_sweep(mesh, config.caps, config.solver_config()))


def analyze_stage(piece: PieceStage) -> PieceStage:
    imm = immerse(piece.mesh, piece.field)
    fields = geometry(imm)
    piece.immersion = imm
    piece.geometry = fields
    piece.total_curvature = total_curvature(imm, fields)
    piece.audit = gauss_bonnet_audit(imm, fields)
    return piece


def conjugate_stage(config: RunConfig, piece: PieceStage) -> ConjugateStage:
    """
    Associate immersion at ``config.theta``.

    At θ = π/2 the conjugate is normalized and audited as integrated; only
    then are its symmetry chains snapped onto the mirror planes for assembly,
    and the distance they moved is kept as ``snap_distance``.
    """
    chart = conformal_chart(piece.immersion)
    assoc = associate_immersion(piece.immersion, piece.geometry, chart, config.theta)
    stage = ConjugateStage(
        associate=assoc, metric_error=metric_error(piece.immersion, assoc.immersion)
    )
    if abs(config.theta - math.pi / 2) < 1e-12 and "VERT_P" in piece.immersion.chains:
        normalized = normalize_conjugate(assoc, config.k)
        stage.audit = conjugate_boundary_audit(normalized, config.k)
        stage.normalized = normalized
        stage.associate, stage.snap_distance = snap_to_planes(normalized, config.k)
    return stage


def assemble_stage(
    config: RunConfig, piece: PieceStage, conj: Optional[ConjugateStage]
) -> Optional[SurfaceComplex]:
    """
    Build the configured surface.

    Raises:
        ConfigError: If sigma_k is requested with theta other than π/2
        AuditGateError: If the conjugate boundary audit failed
    """
    if config.target == "delta_k":
        return None
    if config.target == "sigma_alpha_k":
        return build_sigma_alpha_k(piece.immersion, config.k, config.alpha, piece.geometry)
    if config.target == "sigma_alpha":
        strip = build_sigma_alpha_k(piece.immersion, 2, config.alpha, piece.geometry)
        return build_sigma_alpha(strip, config.alpha, config.copies)
    if conj is None or conj.audit is None:
        raise exceptions.ConfigError(
            "sigma_k is assembled from the audited conjugate piece (theta=pi/2)"
        )
    return build_sigma_k(
        conj.associate.immersion,
        config.k,
        config.alpha,
        audit_passed=conj.audit.passed,
        reference_tc=piece.total_curvature.value,
    )


def _cap_rows(piece: PieceStage) -> List[Dict[str, Any]]:
    sweep = piece.sweep
    rows = []
    for i, (cap, report) in enumerate(zip(sweep.caps, sweep.reports)):
        rows.append(
            {
                "cap": cap,
                "iterations": report.iterations,
                "newton_residual": report.residual_norm,
                "superlinear": report.superlinear,
                "converged": report.converged,
                "max_height": float(sweep.fields[i].values.max()),
                "sup_difference": sweep.sup_differences[i - 1] if i else None,
            }
        )
    return rows


def _tc_rows(config: RunConfig, piece: PieceStage) -> List[Dict[str, Any]]:
    """Piece and surface total curvature over the cap schedule and the truncation schedule."""
    count = piece_count(config)
    spec = piece.mesh.spec
    rows = []
    for cap, u in zip(piece.sweep.caps, piece.sweep.fields):
        imm = immerse(piece.mesh, u)
        tc = total_curvature(imm, geometry(imm)).value
        rows.append(
            {
                "kind": "cap",
                "cap": cap,
                "truncation": min(config.truncations),
                "angle": spec.truncation_angle(),
                "piece_tc": tc,
                "surface_tc": count * tc,
            }
        )
    cfg = config.solver_config()
    for trunc in sorted(config.truncations, reverse=True):
        if trunc == min(config.truncations):
            tc = piece.total_curvature.value
            angle = spec.truncation_angle()
        else:
            mesh = build_mesh(config, trunc)
            u, _ = solve_capped(mesh, cfg)
            imm = immerse(mesh, u)
            tc = total_curvature(imm, geometry(imm)).value
            angle = mesh.spec.truncation_angle()
        rows.append(
            {
                "kind": "truncation",
                "cap": config.caps[-1],
                "truncation": trunc,
                "angle": angle,
                "piece_tc": tc,
                "surface_tc": count * tc,
            }
        )
    grid = [r for r in rows if r["kind"] == "truncation"]
    value, _ = extrapolate_total_curvature(
        [r["angle"] for r in grid], [r["surface_tc"] for r in grid]
    )
    rows.append(
        {
            "kind": "extrapolated",
            "cap": config.caps[-1],
            "truncation": 0.0,
            "angle": 0.0,
            "piece_tc": value / count,
            "surface_tc": value,
        }
    )
    return rows


def _assembly_rows(config: RunConfig, surface: SurfaceComplex) -> List[Dict[str, Any]]:
    embed = embeddedness_check(surface)
    seams = seam_continuity_check(surface)
    worst_seam = max((s.mismatch for s in surface.seams), default=0.0)
    rows: List[Dict[str, Any]] = [
        {"check": "pieces", "value": surface.size},
        {"check": "seams", "value": len(surface.seams)},
        {"check": "max_seam_mismatch", "value": worst_seam},
        {"check": "closure_defect", "value": surface.closure_defect()},
        {"check": "intersecting_pairs", "value": embed.intersecting_pairs},
        {"check": "nearest_approach", "value": embed.nearest_approach},
        {"check": "seam_max_deviation", "value": seams.max_deviation},
        {"check": "total_curvature", "value": surface.total_curvature},
    ]
    if config.target == "sigma_k":
        defect = max(
            symmetry_defect(surface, surface.generators[name]) for name in ("M_1", "M_2", "S")
        )
        rows.append({"check": "symmetry_defect", "value": defect})
        keys: Sequence[str] = ("reference_tc", "tc_gap")
    elif config.target == "sigma_alpha_k":
        turn = surface.generators["R_L2"].compose(surface.generators["R_L1"])
        rows.append({"check": "symmetry_defect", "value": symmetry_defect(surface, turn)})
        keys = ("closing_defect",)
    else:
        keys = (
            "translation_length",
            "expected_translation_length",
            "v2_offset",
            "fundamental_domain_tc",
        )
    for key in keys:
        if key in surface.notes:
            rows.append({"check": key, "value": surface.notes[key]})
    if config.target == "sigma_alpha" and config.copies >= 3:
        rows.append({"check": "period_defect", "value": period_defect(surface)})
    return rows


def _assembly_gates(summary: Summary, rows: Sequence[Dict[str, Any]]) -> None:
    """Summary gates over the rows of ``assembly.csv``."""
    by_check = {r["check"]: (i, r["value"]) for i, r in enumerate(rows, start=1)}
    row, value = by_check["intersecting_pairs"]
    summary.add("intersecting_pairs", value, "assembly.csv", row, value == 0)
    row, value = by_check["seam_max_deviation"]
    summary.add("seam_max_deviation", value, "assembly.csv", row, value < SEAM_GATE)
    for name in ("symmetry_defect", "period_defect"):
        if name in by_check:
            row, value = by_check[name]
            summary.add(name, value, "assembly.csv", row, value < SYMMETRY_GATE)
    if "translation_length" in by_check:
        row, value = by_check["translation_length"]
        error = abs(value - by_check["expected_translation_length"][1])
        summary.add("translation_length_error", error, "assembly.csv", row, error <= 1e-12)
    if "tc_gap" in by_check:
        row, value = by_check["tc_gap"]
        summary.add("conjugate_tc_gap", value, "assembly.csv", row)


def _refinement_rows(study: RefinementStudy) -> List[Dict[str, Any]]:
    rows: List[Dict[str, Any]] = []
    for level, u in enumerate(study.fields):
        rows.append(
            {
                "level": level,
                "vertices": u.mesh.n_vertices,
                "difference": study.differences[level - 1] if level else None,
            }
        )
    rows.append({"level": "order", "vertices": None, "difference": study.order})
    return rows


def _row_of(rows: Sequence[Dict[str, Any]], key: str, value: Any) -> int:
    for i, row in enumerate(rows, start=1):
        if row.get(key) == value:
            return i
    raise exceptions.DomainError(f"no row with {key}={value!r}")


def run(config: RunConfig, until: str = "assemble") -> RunResult:
    """
    Run the pipeline for ``config.target`` up to a stage and write artifacts.

    Args:
        config: Validated run configuration
        until: Last stage: solve, audit, conjugate or assemble

    Returns:
        RunResult; failures are reported through ``status`` (2 config,
        3 solver, 4 audit gate) with the failing stage named

    Example:
        >>> result = run(RunConfig(target="delta_k", caps=(0.0,)), until="audit")
        >>> result.status
        0
    """
    if until not in DEPTH:
        raise exceptions.ConfigError(f"unknown stage {until!r}")
    depth = DEPTH[until]
    out = Path(config.out)
    result = RunResult(status=EXIT_OK)
    summary = Summary(title=f"h2xr {config.target} k={config.k} alpha={config.alpha:g}")
    started = time.perf_counter()
    art = result.artifacts
    try:
        with _stage("solve", result):
            piece = solve_stage(config)
            cap_rows = _cap_rows(piece)
            art["cap_sweep"] = write_csv(out / "cap_sweep.csv", cap_rows)
            dump_mesh(piece.mesh, out / "mesh.txt")
            dump_field(piece.field, out / "field.txt")
            art["mesh"] = out / "mesh.txt"
            art["field"] = out / "field.txt"
            last, final = len(cap_rows), cap_rows[-1]
            residual, converged = final["newton_residual"], final["converged"]
            summary.add("newton_residual", residual, "cap_sweep.csv", last, converged)
            summary.add(
                "cap_monotone_min_increment",
                piece.sweep.min_increment,
                "cap_sweep.csv",
                last,
                piece.sweep.monotone,
            )
            if config.order_check:
                study = refinement_study(piece.mesh, config.solver_config())
                order_rows = _refinement_rows(study)
                art["refinement"] = write_csv(out / "refinement.csv", order_rows)
                summary.add(
                    "refinement_order",
                    study.order,
                    "refinement.csv",
                    len(order_rows),
                    study.order > ORDER_GATE,
                )
        if depth >= 1:
            with _stage("audit", result):
                analyze_stage(piece)
                gb_rows = audit_rows(piece.audit)
                art["gauss_bonnet"] = write_csv(out / "gauss_bonnet.csv", gb_rows)
                curvature = curvature_rows(piece.immersion, piece.geometry)
                art["curvature"] = write_csv(out / "curvature.csv", curvature)
                art["piece_obj"] = write_obj(out / "piece.obj", piece.immersion, ["piece"])
                error = piece.audit.total_curvature_error()
                summary.add(
                    "piece_total_curvature",
                    piece.audit.total_curvature,
                    "gauss_bonnet.csv",
                    1,
                    None if error is None else error < 0.02,
                )
                angle_errors = piece.audit.angle_errors()
                if angle_errors:
                    worst = max(angle_errors, key=angle_errors.get)
                    row = next(
                        i
                        for i, r in enumerate(gb_rows, start=1)
                        if r["term"] == "exterior_angle" and r["name"] == worst
                    )
                    summary.add(
                        "exterior_angle_error",
                        angle_errors[worst],
                        "gauss_bonnet.csv",
                        row,
                        angle_errors[worst] < ANGLE_GATE,
                    )
        conj = None
        if depth >= 2 and config.target != "delta_k":
            with _stage("conjugate", result):
                conj = conjugate_stage(config, piece)
                shown = conj.normalized if conj.normalized is not None else conj.associate
                art["conjugate_obj"] = write_obj(
                    out / "conjugate.obj", shown.immersion, ["conjugate"]
                )
                diagnostics = conj.rows()
                art["conjugate"] = write_csv(out / "conjugate.csv", diagnostics)
                summary.add(
                    "metric_error",
                    conj.metric_error,
                    "conjugate.csv",
                    _row_of(diagnostics, "check", "metric_error"),
                    conj.metric_error < METRIC_GATE,
                )
                if conj.audit is not None:
                    rows = conjugate_audit_rows(conj.audit)
                    art["conjugate_audit"] = write_csv(out / "conjugate_audit.csv", rows)
                    summary.add(
                        "conjugate_height_spread",
                        conj.audit.height_spread,
                        "conjugate_audit.csv",
                        _row_of(rows, "check", "height_spread"),
                        conj.audit.passed,
                    )
                    summary.add(
                        "snap_distance",
                        conj.snap_distance,
                        "conjugate.csv",
                        _row_of(diagnostics, "check", "snap_distance"),
                        conj.snap_distance < SNAP_GATE * conj.audit.diameter,
                    )
        if depth >= 3:
            with _stage("assemble", result):
                tc_rows = _tc_rows(config, piece)
                art["tc_grid"] = write_csv(out / "tc_grid.csv", tc_rows)
                expected = expected_total_curvature(config)
                extrapolated = tc_rows[-1]["surface_tc"]
                gate = TC_GATE.get(config.k, 0.08)
                summary.add(
                    "extrapolated_total_curvature",
                    extrapolated,
                    "tc_grid.csv",
                    len(tc_rows),
                    abs(extrapolated - expected) <= gate * abs(expected),
                )
                surface = assemble_stage(config, piece, conj)
                if surface is not None:
                    rows = _assembly_rows(config, surface)
                    art["assembly"] = write_csv(out / "assembly.csv", rows)
                    names = [f"piece_{p.index}" for p in surface.pieces]
                    art["complex_obj"] = write_obj(out / "complex.obj", surface.immersions(), names)
                    write_manifest(surface, out / "manifest.txt")
                    art["manifest"] = out / "manifest.txt"
                    _assembly_gates(summary, rows)
    except exceptions.H2xrError as e:
        result.status = exit_code(e)
        result.error = str(e)
    if not config.deterministic:
        logger.info(f"Run finished in {time.perf_counter() - started:.1f}s")
    if summary.entries:
        result.artifacts["summary"] = summary.write(out / "summary.txt")
    result.summary = summary
    return result


def _sweep_row(config: RunConfig, parameter: str, value: float) -> Dict[str, Any]:
    mesh = build_mesh(config)
    u, report = solve_capped(mesh, config.solver_config())
    imm = immerse(mesh, u)
    fields = geometry(imm)
    row: Dict[str, Any] = {
        parameter: value,
        "vertices": mesh.n_vertices,
        "angle": mesh.spec.truncation_angle(),
        "piece_tc": total_curvature(imm, fields).value,
        "expected_piece_tc": gauss_bonnet_audit(imm, fields).expected_total_curvature,
        "newton_residual": report.residual_norm,
        "iterations": report.iterations,
    }
    if parameter == "theta":
        assoc = associate_immersion(imm, fields, conformal_chart(imm), value)
        row["metric_error"] = metric_error(imm, assoc.immersion)
        row["closure_residual"] = assoc.position_residual
    return row


def sweep(config: RunConfig, parameter: str, values: Sequence[float]) -> List[Dict[str, Any]]:
    """
    One solve per value of a parameter, with finite differences between rows.

    Args:
        config: Base configuration
        parameter: cap, truncation, target_h, alpha or theta
        values: Parameter values in sweep order

    Returns:
        Table rows (also written to ``<out>/sweep_<parameter>.csv``)

    Raises:
        ConfigError: For an unknown parameter or an empty value list
    """
    if parameter not in SWEEP_PARAMETERS:
        choices = ", ".join(SWEEP_PARAMETERS)
        raise exceptions.ConfigError(f"cannot sweep {parameter!r}; choose from {choices}")
    if not values:
        raise exceptions.ConfigError("sweep needs at least one value")
    rows = []
    for value in values:
        key = SWEEP_PARAMETERS[parameter]
        change = (float(value),) if key in ("caps", "truncations") else float(value)
        logger.info(f"Sweep {parameter}={value:g}")
        rows.append(_sweep_row(config.replace(**{key: change}), parameter, float(value)))
    columns = [c for c in ("angle", "piece_tc", "metric_error") if c in rows[0]]
    table = with_differences(rows, columns)
    write_csv(Path(config.out) / f"sweep_{parameter}.csv", table)
    return table


def export(config: RunConfig, stage: str = "piece") -> Path:
    """
    Write an OBJ of one stage: the graph piece, its conjugate or the assembled surface.

    Raises:
        ConfigError: For an unknown stage
    """
    if stage not in ("piece", "conjugate", "complex"):
        raise exceptions.ConfigError(f"unknown export stage {stage!r}")
    piece = analyze_stage(solve_stage(config))
    out = Path(config.out) / f"{stage}.obj"
    if stage == "piece":
        return write_obj(out, piece.immersion, ["piece"])
    conj = conjugate_stage(config, piece)
    if stage == "conjugate":
        return write_obj(out, conj.associate.immersion, ["conjugate"])
    surface = assemble_stage(config, piece, conj)
    if surface is None:
        raise exceptions.ConfigError("delta_k has no assembled surface to export")
    return write_obj(out, surface.immersions(), [f"piece_{p.index}" for p in surface.pieces])


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key=value configuration file")
    common.add_argument("--target", help="delta_k, sigma_alpha_k, sigma_alpha or sigma_k")
    common.add_argument("--k", help="number of ideal vertex pairs (k >= 2)")
    common.add_argument("--alpha", help="radius of p1 in (0, 1)")
    common.add_argument("--caps", help="cap schedule, e.g. 1,2,4,8")
    common.add_argument("--trunc", help="truncation schedule, e.g. 0.2,0.1,0.05")
    common.add_argument("--mesh-h", dest="mesh_h", help="target edge length")
    common.add_argument("--refine", help="uniform refinement levels")
    common.add_argument(
        "--order-check",
        dest="order_check",
        action="store_true",
        default=None,
        help="also solve on two refinements and report the observed order",
    )
    common.add_argument("--theta", help="associate angle (accepts pi/2)")
    common.add_argument("--copies", help="translates in a sigma_alpha strip")
    common.add_argument("--out", help="output directory")
    common.add_argument(
        "--deterministic", action="store_true", default=None, help="byte-stable outputs"
    )
    common.add_argument("-v", "--verbose", action="store_true", help="debug logging")

    parser = argparse.ArgumentParser(prog="h2xr", description="Minimal surfaces in H²×ℝ")
    verbs = parser.add_subparsers(dest="verb", required=True)
    for verb in ("solve", "audit", "conjugate", "assemble"):
        verbs.add_parser(verb, parents=[common], help=f"run the pipeline through {verb}")
    sweep_parser = verbs.add_parser("sweep", parents=[common], help="one run per parameter value")
    sweep_parser.add_argument("--parameter", required=True, choices=sorted(SWEEP_PARAMETERS))
    sweep_parser.add_argument("--values", required=True, nargs="+")
    export_parser = verbs.add_parser("export", parents=[common], help="write an OBJ of one stage")
    export_parser.add_argument(
        "--stage", default="piece", choices=("piece", "conjugate", "complex")
    )
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    """Merge the configuration file with command-line overrides."""
    flags = {
        "target": "target",
        "k": "k",
        "alpha": "alpha",
        "caps": "caps",
        "trunc": "truncations",
        "mesh_h": "mesh_h",
        "refine": "refine",
        "theta": "theta",
        "copies": "copies",
        "out": "out",
    }
    overrides: Dict[str, Any] = {}
    for attr, key in flags.items():
        raw = getattr(args, attr, None)
        if raw is not None:
            overrides[key] = parse_value(key, raw)
    if args.deterministic:
        overrides["deterministic"] = True
    if args.order_check:
        overrides["order_check"] = True
    return load_config(args.config, overrides)


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(asctime)s %(name)s %(levelname)s: %(message)s",
    )
    try:
        config = config_from_args(args)
        if args.verb == "sweep":
            parse = "theta" if args.parameter == "theta" else "alpha"
            values = [parse_value(parse, v) for v in args.values]
            sweep(config, args.parameter, values)
            return EXIT_OK
        if args.verb == "export":
            export(config, args.stage)
            return EXIT_OK
    except exceptions.H2xrError as e:
        logger.error(f"{args.verb} failed: {e}")
        return exit_code(e)
    result = run(config, until=args.verb)
    if result.error:
        logger.error(f"{args.verb} failed in stage {result.stage}: {result.error}")
    elif result.summary is not None:
        print(result.summary.render(), end="")
    return result.status


if __name__ == "__main__":
    sys.exit(main())
