"""
Tests for immersions and their discrete geometry.
"""

import math

import numpy as np
import pytest

from h2xr import exceptions
from h2xr.graphsolve import SolverConfig, solve_capped
from h2xr.hypgeom import hyp_distance, make_isometry
from h2xr.meshdom import BoundaryTag, WedgeSpec, build_wedge
from h2xr.surfgeo import (
    CHAIN_ORDER,
    Immersion,
    audit_rows,
    curvature_rows,
    from_positions,
    gauss_bonnet_audit,
    geometry,
    immerse,
    total_curvature,
    vertical_plane_patch,
)


@pytest.fixture(scope="module")
def mesh():
    return build_wedge(WedgeSpec.truncated(2, 0.5, 0.2, target_h=0.15))


@pytest.fixture(scope="module")
def slice_piece(mesh):
    return immerse(mesh, np.zeros(mesh.n_vertices))


@pytest.fixture(scope="module")
def graph_piece(mesh):
    u, _ = solve_capped(mesh, SolverConfig(cap=1.0))
    return immerse(mesh, u)


class TestImmersion:
    """Tests for the immersion container."""

    def test_outside_disk(self):
        """Test vertices must lie inside the disk."""
        with pytest.raises(exceptions.DomainError, match="unit circle"):
            from_positions([0j, 1.0 + 0j, 0.5j], [0.0, 0.0, 0.0], [[0, 1, 2]])

    def test_length_mismatch(self):
        """Test z and t must have the same length."""
        with pytest.raises(exceptions.DomainError, match="differ in length"):
            Immersion(z=np.zeros(3, complex), t=np.zeros(2), triangles=np.array([[0, 1, 2]]))

    def test_slice_area_matches_mesh(self, mesh, slice_piece):
        """Test the zero graph has the area of its domain."""
        assert slice_piece.total_area() == pytest.approx(mesh.total_area(), rel=1e-12)

    def test_rotation_preserves_area(self, graph_piece):
        """Test areas are unchanged by a rotation about the vertical axis through 0."""
        rot = make_isometry("vertical_line_rotation", p=0j, angle=0.7)
        moved = graph_piece.transformed(rot)
        assert np.allclose(moved.areas(), graph_piece.areas(), rtol=1e-10)
        assert moved.chains == graph_piece.chains

    def test_free_edges_follow_chains(self, slice_piece):
        """Test the boundary chains cover the free edges."""
        directed = set()
        for chain in slice_piece.chains.values():
            directed.update(zip(chain[:-1], chain[1:]))
        assert directed == set(slice_piece.free_edges())


class TestImmerse:
    """Tests for lifting graphs over wedge meshes."""

    def test_no_jump_keeps_corners(self, slice_piece):
        """Test the zero graph has no vertical segments."""
        assert list(slice_piece.chains) == ["L1", "GAMMA_CAP", "L2"]
        assert set(slice_piece.corners) == {"origin", "p1", "cap"}

    def test_blow_up(self, graph_piece):
        """Test the data jumps become vertical segments."""
        assert tuple(graph_piece.chains) == tuple(c for c in CHAIN_ORDER if c != "TRUNC")
        vert = graph_piece.chains["VERT_P"]
        assert np.allclose(graph_piece.z[vert], 0.5)
        assert graph_piece.t[vert[0]] == pytest.approx(0.0, abs=1e-12)
        assert graph_piece.t[vert[-1]] == pytest.approx(1.0, abs=1e-12)
        assert graph_piece.cap == 1.0

    def test_wrong_length(self, mesh):
        """Test heights must match the mesh."""
        with pytest.raises(exceptions.DomainError, match="conform"):
            immerse(mesh, np.zeros(mesh.n_vertices - 1))


class TestGeometry:
    """Tests for normals, ν and curvature."""

    def test_slice_is_totally_geodesic(self, slice_piece):
        """Test a horizontal slice has ν = 1, T = 0 and K = −1."""
        fields = geometry(slice_piece)
        assert np.allclose(fields.nu, 1.0)
        assert np.allclose(fields.T, 0.0, atol=1e-12)
        assert np.allclose(fields.K, -1.0, atol=1e-12)
        assert fields.unit_defect() < 1e-12

    def test_vertical_plane_is_flat(self):
        """Test a vertical plane over a diameter has ν = 0 and K = 0."""
        patch = vertical_plane_patch(-0.5 + 0j, 0.5 + 0j, n_along=12, n_up=6)
        fields = geometry(patch)
        assert np.abs(fields.nu).max() < 1e-12
        assert np.abs(fields.K).max() < 1e-12
        assert np.abs(fields.shape).max() < 1e-12

    def test_vertical_plane_area(self):
        """Test the patch area is geodesic length times height."""
        patch = vertical_plane_patch(-0.5 + 0j, 0.5 + 0j, heights=(0.0, 1.0), n_along=32, n_up=4)
        assert patch.total_area() == pytest.approx(hyp_distance(-0.5 + 0j, 0.5 + 0j), rel=1e-2)

    def test_graph_unit_relation(self, graph_piece):
        """Test |T|² + ν² = 1 on a minimal graph."""
        assert geometry(graph_piece).unit_defect() < 1e-8

    def test_graph_curvature_nonpositive(self, graph_piece):
        """Test the graph piece has negative total curvature."""
        fields = geometry(graph_piece)
        assert total_curvature(graph_piece, fields).value < 0.0

    def test_shape_operator_kept_as_fitted(self, graph_piece):
        """Test K is det S − ν² of the fitted operator and H is half its trace."""
        fields = geometry(graph_piece)
        s = fields.shape
        det = s[:, 0, 0] * s[:, 1, 1] - s[:, 0, 1] * s[:, 1, 0]
        assert np.allclose(fields.K, det - fields.tri_nu ** 2, atol=1e-12)
        assert np.allclose(fields.mean_curvature, 0.5 * (s[:, 0, 0] + s[:, 1, 1]))
        assert np.allclose(fields.asymmetry, np.abs(s[:, 0, 1] - s[:, 1, 0]))

    def test_non_minimal_graph_has_mean_curvature(self, mesh):
        """Test the trace of the fitted operator survives on a non-minimal graph."""
        imm = immerse(mesh, np.abs(mesh.vertices) ** 2)
        fields = geometry(imm)
        assert abs(float(np.mean(fields.mean_curvature))) > 0.05

    def test_degenerate_triangle(self):
        """Test a collapsed triangle is reported."""
        imm = from_positions([0j, 0.1 + 0j, 0.2 + 0j], [0.0, 0.0, 0.0], [[0, 1, 2]])
        with pytest.raises(exceptions.DomainError, match="degenerate"):
            geometry(imm)

    def test_patch_needs_cells(self):
        """Test an empty patch is rejected."""
        with pytest.raises(exceptions.DomainError, match="at least one cell"):
            vertical_plane_patch(0j, 0.5 + 0j, n_along=0)


class TestTotalCurvature:
    """Tests for ∫K dA."""

    def test_slice(self, slice_piece):
        """Test the slice total curvature is minus its area."""
        tc = total_curvature(slice_piece, geometry(slice_piece))
        assert tc.value == pytest.approx(-slice_piece.total_area(), rel=1e-12)
        assert float(tc) == tc.value

    def test_refinement_error_bar(self, slice_piece):
        """Test a coarse value turns the error bar into the refinement difference."""
        fields = geometry(slice_piece)
        tc = total_curvature(slice_piece, fields, coarse=-1.0)
        assert tc.error == pytest.approx(abs(tc.value + 1.0))


class TestGaussBonnet:
    """Tests for the Gauss–Bonnet audit."""

    def test_slice_closure(self, mesh, slice_piece):
        """Test the closure residual is the gap between ∫K and the angle defects."""
        fields = geometry(slice_piece)
        audit = gauss_bonnet_audit(slice_piece, fields)
        tc = total_curvature(slice_piece, fields)
        interior = mesh.spec.corner_angles()
        assert audit.closure_residual == pytest.approx(tc.intrinsic - tc.value, abs=1e-9)
        assert audit.expected_total_curvature == pytest.approx(sum(interior.values()) - math.pi)
        assert audit.total_curvature_error() < 0.05
        assert set(audit.angle_errors()) == {"origin", "p1", "cap"}

    def test_blown_up_corners(self, graph_piece):
        """Test the audit names all five joints of a blown-up piece."""
        audit = gauss_bonnet_audit(graph_piece, geometry(graph_piece))
        assert set(audit.exterior_angles) == {
            "origin",
            "p1_bottom",
            "p1_top",
            "cap_top",
            "cap_bottom",
        }
        assert set(audit.expected_angles) == set(audit.exterior_angles)

    def test_bad_decomposition(self, slice_piece):
        """Test arcs out of order are rejected."""
        chains = dict(slice_piece.chains)
        reordered = {"L2": chains["L2"], "L1": chains["L1"], "GAMMA_CAP": chains["GAMMA_CAP"]}
        with pytest.raises(exceptions.DomainError, match="does not end"):
            gauss_bonnet_audit(slice_piece, geometry(slice_piece), reordered)

    def test_rows(self, slice_piece):
        """Test the CSV row builders."""
        fields = geometry(slice_piece)
        rows = curvature_rows(slice_piece, fields)
        assert len(rows) == slice_piece.n_triangles
        assert rows[0]["K"] == pytest.approx(-1.0)
        summary = audit_rows(gauss_bonnet_audit(slice_piece, fields))
        assert summary[0]["term"] == "total_curvature"


class TestQuadrilateralPiece:
    """Tests for pieces over the domain closed by a TRUNC side."""

    @pytest.fixture(scope="class")
    def quad(self):
        spec = WedgeSpec.truncated(3, 0.5, 0.1, target_h=0.15, trunc_side=True)
        return build_wedge(spec)

    @pytest.fixture(scope="class")
    def quad_graph(self, quad):
        u, _ = solve_capped(quad, SolverConfig(cap=1.0))
        return immerse(quad, u)

    def test_chains(self, quad_graph):
        """Test only p₁ is blown up and the TRUNC side sits between Γ and L2."""
        assert tuple(quad_graph.chains) == ("L1", "VERT_P", "GAMMA_CAP", "TRUNC", "L2")
        assert {"cap", "trunc"} <= set(quad_graph.corners)
        assert "cap_top" not in quad_graph.corners

    def test_trunc_heights(self, quad, quad_graph):
        """Test heights fall from the cap to zero along the TRUNC side."""
        chain = quad_graph.chains["TRUNC"]
        assert chain == quad.tag_chain(BoundaryTag.TRUNC)
        assert quad_graph.t[chain[0]] == pytest.approx(1.0)
        assert quad_graph.t[chain[-1]] == pytest.approx(0.0)

    def test_slice_expectations(self, quad):
        """Test the flat quadrilateral expects a right angle at r and TC = −area."""
        piece = immerse(quad, np.zeros(quad.n_vertices))
        audit = gauss_bonnet_audit(piece, geometry(piece))
        assert set(audit.exterior_angles) == {"origin", "p1", "cap", "trunc"}
        assert audit.expected_angles["trunc"] == pytest.approx(0.5 * math.pi, abs=1e-12)
        assert audit.expected_angles["origin"] == pytest.approx(2.0 * math.pi / 3.0, abs=1e-12)
        assert audit.expected_total_curvature == pytest.approx(-quad.total_area(), rel=1e-9)
        assert audit.total_curvature_error() < 0.05

    def test_graph_expectations(self, quad_graph):
        """Test the sloped TRUNC side sharpens the obtuse cap corner."""
        audit = gauss_bonnet_audit(quad_graph, geometry(quad_graph))
        planar = quad_graph.mesh.spec.corner_angles()["cap"]
        assert planar > 0.5 * math.pi
        assert audit.expected_angles["cap"] > math.pi - planar
        assert set(audit.expected_angles) == set(audit.exterior_angles)
        assert audit.expected_total_curvature < 0.0
