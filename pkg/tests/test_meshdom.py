"""
Tests for wedge domains and meshes.
"""

import math

import numpy as np
import pytest

from h2xr import exceptions
from h2xr.hypgeom import DiskPoint, geodesic_through
from h2xr.meshdom import (
    BoundaryTag,
    WedgeSpec,
    alpha_min,
    alpha_min_closed_form,
    build_wedge,
    cap_point,
    compact_subregion,
    corner_angle,
    dump_mesh,
    load_mesh,
    refine,
    trunc_foot,
)


@pytest.fixture(scope="module")
def spec():
    return WedgeSpec.truncated(2, 0.5, 0.2, target_h=0.15)


@pytest.fixture(scope="module")
def mesh(spec):
    return build_wedge(spec)


def exact_area(spec):
    return math.pi - sum(spec.corner_angles().values())


class TestAlphaMin:
    """Tests for the smallest admissible α."""

    @pytest.mark.parametrize("k", [3, 4, 6, 8, 12])
    def test_matches_closed_form(self, k):
        """Test root bracketing agrees with the angle-of-parallelism form."""
        assert alpha_min(k) == pytest.approx(alpha_min_closed_form(k), abs=1e-12)

    @pytest.mark.parametrize("k", [6, 8, 12])
    def test_large_k_right_angle(self, k):
        """Test the root puts a right angle at p₁ for p₂ close to the real axis."""
        p1 = complex(alpha_min(k), 0.0)
        p2 = complex(math.cos(math.pi / k), math.sin(math.pi / k))
        assert corner_angle(p1, 0j, p2) == pytest.approx(math.pi / 2, abs=1e-10)

    def test_k3_value(self):
        """Test α(3) = 2 − √3."""
        assert alpha_min(3) == pytest.approx(2.0 - math.sqrt(3.0), abs=1e-12)

    def test_right_angle_at_p1(self):
        """Test the corner at p₁ is right at α = α(k)."""
        spec = WedgeSpec.truncated(4, alpha_min(4), 0.1)
        assert spec.corner_angles()["p1"] == pytest.approx(math.pi / 2, abs=1e-9)

    def test_needs_k3(self):
        """Test k = 2 has no lower bound."""
        with pytest.raises(exceptions.DomainError, match="k >= 3"):
            alpha_min(2)


class TestWedgeSpec:
    """Tests for wedge parameters."""

    def test_cap_point_distance(self):
        """Test q_j sits on Γ at the requested distance from p₂."""
        q = cap_point(2, 0.5, 0.1)
        assert abs(q - 1j) == pytest.approx(0.1, abs=1e-12)
        assert geodesic_through(0.5 + 0j, 1j).residual(q) < 1e-12

    @pytest.mark.parametrize("truncation", [0.0, -0.1, 5.0])
    def test_cap_point_range(self, truncation):
        """Test truncations outside (0, |p₁ − p₂|) are rejected."""
        with pytest.raises(exceptions.DomainError, match="truncation"):
            cap_point(2, 0.5, truncation)

    def test_invalid_k(self):
        """Test k must be at least 2."""
        with pytest.raises(exceptions.DomainError, match="k must be"):
            WedgeSpec.truncated(1, 0.5, 0.1)

    def test_cap_point_off_gamma(self):
        """Test a cap point off Γ is rejected."""
        with pytest.raises(exceptions.DomainError, match="off"):
            WedgeSpec(k=2, alpha=0.5, cap_point=DiskPoint(0.3, 0.3))

    def test_cap_point_at_p1(self):
        """Test a cap point at p₁ is degenerate."""
        with pytest.raises(exceptions.DegenerateInputError):
            WedgeSpec(k=2, alpha=0.5, cap_point=DiskPoint(0.5, 0.0))

    def test_truncation_angle_shrinks(self):
        """Test ∠p₂0q_j decreases as q_j approaches p₂."""
        angles = [WedgeSpec.truncated(2, 0.5, t).truncation_angle() for t in (0.2, 0.1, 0.05)]
        assert angles[0] > angles[1] > angles[2] > 0.0

    def test_corner_angles_hyperbolic(self, spec):
        """Test the geodesic triangle has angle sum below π."""
        angles = spec.corner_angles()
        assert angles["origin"] == pytest.approx(math.pi / 2 - spec.truncation_angle(), abs=1e-12)
        assert sum(angles.values()) < math.pi


class TestBuildWedge:
    """Tests for the wedge triangulation."""

    def test_valid(self, mesh):
        """Test the mesh passes its own validation."""
        mesh.validate()
        assert sorted(mesh.corners) == ["cap", "origin", "p1"]

    def test_chains(self, mesh):
        """Test the tagged sides run O→P, P→Q, Q→O."""
        l1 = mesh.tag_chain(BoundaryTag.L1)
        cap = mesh.tag_chain(BoundaryTag.GAMMA_CAP)
        l2 = mesh.tag_chain(BoundaryTag.L2)
        assert l1[0] == mesh.corners["origin"] and l1[-1] == mesh.corners["p1"]
        assert cap[0] == mesh.corners["p1"] and cap[-1] == mesh.corners["cap"]
        assert l2[0] == mesh.corners["cap"] and l2[-1] == mesh.corners["origin"]

    def test_sides_on_geodesics(self, mesh):
        """Test boundary vertices lie on their side geodesics."""
        assert max(mesh.side_residuals().values()) < 1e-10

    def test_convex(self, mesh):
        """Test the boundary polygon is convex."""
        assert mesh.is_convex()

    def test_area(self, spec, mesh):
        """Test the hyperbolic area approximates π minus the angle sum."""
        assert mesh.total_area() == pytest.approx(exact_area(spec), rel=0.05)

    def test_capacity(self):
        """Test the vertex budget is enforced with a suggested mesh size."""
        small = WedgeSpec.truncated(2, 0.5, 0.1, target_h=0.05, max_vertices=50)
        with pytest.raises(exceptions.MeshCapacityError) as info:
            build_wedge(small)
        assert info.value.suggested_h > 0.05

    def test_compact_subregion(self, mesh):
        """Test the compact subregion keeps away from Γ."""
        mask = compact_subregion(mesh)
        assert not mask[mesh.tag_vertices(BoundaryTag.GAMMA_CAP)].any()
        assert mask.any()


class TestRefine:
    """Tests for uniform refinement."""

    def test_refine(self, spec, mesh):
        """Test 1→4 subdivision keeps coarse vertices and improves the area."""
        fine = refine(mesh)
        fine.validate()
        assert fine.n_triangles == 4 * mesh.n_triangles
        assert np.array_equal(fine.vertices[: mesh.n_vertices], mesh.vertices)
        assert max(fine.side_residuals().values()) < 1e-10
        target = exact_area(spec)
        assert abs(fine.total_area() - target) < abs(mesh.total_area() - target) + 5e-3


class TestMeshFile:
    """Tests for the plain-text mesh format."""

    def test_dump_load(self, mesh, tmp_path):
        """Test a dumped mesh reloads with the same checksum."""
        path = tmp_path / "mesh.txt"
        dump_mesh(mesh, path)
        again = load_mesh(path)
        assert again.checksum() == mesh.checksum()
        assert again.spec.k == 2

    def test_malformed(self, tmp_path):
        """Test malformed records name the file line."""
        path = tmp_path / "bad.txt"
        path.write_text("# h2xr mesh\nv 0.1\n", encoding="ascii")
        with pytest.raises(exceptions.DomainError, match=":2:"):
            load_mesh(path)


class TestTruncSide:
    """Tests for the quadrilateral domain closed by a truncation side."""

    @pytest.fixture(scope="class")
    def quad_spec(self):
        return WedgeSpec.truncated(3, 0.5, 0.1, target_h=0.15, trunc_side=True)

    @pytest.fixture(scope="class")
    def quad_mesh(self, quad_spec):
        return build_wedge(quad_spec)

    def test_foot_on_ray(self, quad_spec):
        """Test r_j lies on the ray 0p₂ and the side q_j r_j meets it orthogonally."""
        r = trunc_foot(3, quad_spec.q)
        assert np.angle(r) == pytest.approx(math.pi / 3, abs=1e-14)
        assert 0.0 < abs(r) < 1.0
        assert corner_angle(r, quad_spec.q, 0j) == pytest.approx(math.pi / 2, abs=1e-10)

    def test_corner_angles(self, quad_spec):
        """Test the origin angle is the full π/k and the foot angle is right."""
        angles = quad_spec.corner_angles()
        assert sorted(angles) == ["cap", "origin", "p1", "trunc"]
        assert angles["origin"] == pytest.approx(math.pi / 3, abs=1e-12)
        assert angles["trunc"] == pytest.approx(math.pi / 2, abs=1e-10)

    def test_chains(self, quad_mesh):
        """Test the sides run O→P, P→Q, Q→R, R→O."""
        c = quad_mesh.corners
        chains = {tag: quad_mesh.tag_chain(tag) for tag in BoundaryTag}
        assert (chains[BoundaryTag.L1][0], chains[BoundaryTag.L1][-1]) == (c["origin"], c["p1"])
        assert (chains[BoundaryTag.GAMMA_CAP][0], chains[BoundaryTag.GAMMA_CAP][-1]) == (
            c["p1"],
            c["cap"],
        )
        assert (chains[BoundaryTag.TRUNC][0], chains[BoundaryTag.TRUNC][-1]) == (
            c["cap"],
            c["trunc"],
        )
        assert (chains[BoundaryTag.L2][0], chains[BoundaryTag.L2][-1]) == (c["trunc"], c["origin"])

    def test_l2_on_ray(self, quad_spec, quad_mesh):
        """Test the L2 vertices sit on the complete geodesic through 0 and p₂."""
        ray = geodesic_through(0j, quad_spec.p2)
        l2 = quad_mesh.vertices[quad_mesh.tag_vertices(BoundaryTag.L2)]
        assert np.max(ray.residual(l2)) < 1e-12

    def test_area(self, quad_spec, quad_mesh):
        """Test the area approximates 2π minus the quadrilateral's angle sum."""
        exact = 2.0 * math.pi - sum(quad_spec.corner_angles().values())
        assert quad_mesh.total_area() == pytest.approx(exact, rel=0.05)

    def test_dump_load(self, quad_mesh, tmp_path):
        """Test the wedge record keeps the truncation side."""
        path = tmp_path / "quad.txt"
        dump_mesh(quad_mesh, path)
        again = load_mesh(path)
        assert again.spec.trunc_side
        assert BoundaryTag.TRUNC in again.sides
        assert again.checksum() == quad_mesh.checksum()


@pytest.mark.parametrize("trunc_side", [False, True])
@pytest.mark.parametrize("target_h", [0.15, 0.1, 0.08])
@pytest.mark.parametrize("truncation", [0.2, 0.1, 0.05])
@pytest.mark.parametrize("k", [2, 3, 4])
def test_build_matrix(k, truncation, target_h, trunc_side):
    """Test every wedge of the working range meshes into a valid, tagged triangulation."""
    spec = WedgeSpec.truncated(k, 0.5, truncation, target_h=target_h, trunc_side=trunc_side)
    mesh = build_wedge(spec)
    assert float(mesh.angles().min()) > mesh.min_angle_floor()
    assert max(mesh.side_residuals().values()) < 1e-10
    assert set(mesh.boundary.values()) == set(spec.sides())
    assert len(mesh.boundary_loop()) == len(mesh.boundary)
    assert mesh.n_vertices == len(np.unique(mesh.triangles))
