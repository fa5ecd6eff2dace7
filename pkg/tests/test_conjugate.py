"""
Tests for conformal charts, harmonic conjugates and associate immersions.
"""

import math

import numpy as np
import pytest

from h2xr import exceptions
from h2xr.conjugate import (
    AssociateImmersion,
    ConformalChart,
    ConjugateAudit,
    associate_immersion,
    conformal_chart,
    conjugate_audit_rows,
    conjugate_boundary_audit,
    fit_geodesic,
    harmonic_conjugate,
    hopf,
    hopf_rotate,
    metric_error,
    normalize_conjugate,
    projection_crossings,
    snap_to_planes,
)
from h2xr.graphsolve import SolverConfig, solve_capped
from h2xr.hypgeom import geodesic_segment_points, hyp_distance, make_isometry
from h2xr.meshdom import WedgeSpec, build_wedge
from h2xr.surfgeo import from_positions, geometry, immerse


@pytest.fixture(scope="module")
def mesh():
    return build_wedge(WedgeSpec.truncated(2, 0.5, 0.2, target_h=0.15))


@pytest.fixture(scope="module")
def slice_piece(mesh):
    return immerse(mesh, np.zeros(mesh.n_vertices))


@pytest.fixture(scope="module")
def chart(slice_piece):
    return conformal_chart(slice_piece)


def annulus():
    outer = 0.6 * np.exp(2j * math.pi * np.arange(6) / 6)
    inner = 0.3 * np.exp(2j * math.pi * (np.arange(6) + 0.5) / 6)
    tris = []
    for i in range(6):
        j = (i + 1) % 6
        tris.append((i, j, 6 + i))
        tris.append((j, 6 + j, 6 + i))
    return from_positions(np.concatenate([outer, inner]), np.zeros(12), tris)


def sample_audit(**overrides):
    values = dict(
        k=2,
        height_spread=0.0,
        conormal_residual=0.0,
        planarity={"R2": 0.0, "R3": 0.0},
        diameter=1.0,
        orthogonality={"R2": 0.0, "R3": 0.0},
        plane_angle=math.pi / 2,
        crossing_pairs=0,
        nu_r2=(0.0, 1.0),
        d1_violations=0,
        nu_r3=(1.0, 0.0),
        asymptote_drift=0.0,
    )
    values.update(overrides)
    return ConjugateAudit(**values)


class TestConformalChart:
    """Tests for least-squares conformal flattening."""

    def test_pins(self, slice_piece, chart):
        """Test the origin goes to 0 and p₁ to its distance on the real axis."""
        assert chart.w[slice_piece.corners["origin"]] == 0j
        assert chart.w[slice_piece.corners["p1"]] == pytest.approx(hyp_distance(0j, 0.5 + 0j))

    def test_no_flips(self, chart):
        """Test every triangle keeps its orientation."""
        assert np.all(np.isfinite(chart.distortion))
        assert chart.distortion.min() >= 1.0 - 1e-12
        assert chart.mean_distortion <= chart.max_distortion

    def test_gradient_of_coordinate(self, chart):
        """Test the chart gradient of Re w is 1."""
        assert np.allclose(chart.gradient(chart.w.real), 1.0)


class TestHarmonicConjugate:
    """Tests for the harmonic conjugate."""

    def test_conjugate_of_real_part(self, chart):
        """Test the conjugate of Re w is Im w up to its basepoint value."""
        hstar = harmonic_conjugate(chart.w.real, chart)
        assert np.allclose(hstar.values, chart.w.imag - chart.w.imag[chart.basepoint], atol=1e-10)
        assert hstar.residual < 1e-10

    def test_wrong_length(self, chart, slice_piece):
        """Test the function must live on the chart's vertices."""
        with pytest.raises(exceptions.DomainError, match="conform"):
            harmonic_conjugate(np.zeros(slice_piece.n_vertices + 2), chart)

    def test_periods(self):
        """Test an annulus is refused because its conjugate has a period."""
        ring = annulus()
        chart = ConformalChart(imm=ring, w=ring.z, jacobians=None, distortion=None, basepoint=0)
        with pytest.raises(exceptions.PeriodError, match="Euler characteristic 0"):
            harmonic_conjugate(np.zeros(ring.n_vertices), chart)


class TestHopf:
    """Tests for the Hopf differential."""

    def test_slice_vanishes(self, slice_piece, chart):
        """Test a horizontal slice has Q = 0."""
        assert np.abs(hopf(slice_piece.t, chart).Q).max() == 0.0

    def test_rotation(self, chart):
        """Test rotation multiplies Q by e^{−2iθ} and accumulates."""
        q = hopf(chart.w.real, chart)
        rotated = hopf_rotate(hopf_rotate(q, 0.3), 0.4)
        assert rotated.theta == pytest.approx(0.7)
        assert np.allclose(rotated.Q, q.Q * np.exp(-1.4j))
        assert np.allclose(np.abs(rotated.Q), np.abs(q.Q))


class TestAssociate:
    """Tests for associate immersions."""

    def test_zero_angle_is_copy(self, slice_piece, chart):
        """Test X₀ reproduces the piece."""
        result = associate_immersion(slice_piece, geometry(slice_piece), chart, 2.0 * math.pi)
        assert result.theta == 0.0
        assert np.array_equal(result.immersion.z, slice_piece.z)
        assert metric_error(slice_piece, result.immersion) == 0.0

    def test_metric_error_isometry(self, slice_piece):
        """Test an ambient isometry keeps edge lengths."""
        moved = slice_piece.transformed(make_isometry("slice_mirror", t0=0.4))
        assert metric_error(slice_piece, moved) < 1e-12

    def test_normalize_identity(self, slice_piece, chart):
        """Test a piece already in position is left in place."""
        copy = associate_immersion(slice_piece, geometry(slice_piece), chart, 0.0)
        normalized = normalize_conjugate(copy, 2)
        assert np.allclose(normalized.immersion.z, slice_piece.z, atol=1e-12)
        assert np.allclose(normalized.immersion.t, 0.0)

    def test_snap(self, slice_piece, chart):
        """Test snapping puts the symmetry lines exactly on their planes."""
        copy = associate_immersion(slice_piece, geometry(slice_piece), chart, 0.0)
        snapped, moved = snap_to_planes(copy, 2)
        imm = snapped.immersion
        assert np.all(imm.z[imm.chains["L1"]].imag == 0.0)
        assert np.allclose(imm.z[imm.chains["L2"]].real, 0.0, atol=1e-15)
        assert imm.z[imm.corners["origin"]] == 0j
        assert moved >= 0.0

    def test_normalize_needs_origin(self, slice_piece):
        """Test normalization needs the origin corner."""
        imm = from_positions(
            slice_piece.z, slice_piece.t, slice_piece.triangles, slice_piece.chains
        )
        bare = AssociateImmersion(immersion=imm, theta=0.0)
        with pytest.raises(exceptions.DomainError, match="origin"):
            normalize_conjugate(bare, 2)


class TestGeodesicFit:
    """Tests for fitting geodesics to projected chains."""

    def test_points_on_arc(self):
        """Test points of a geodesic arc fit with zero distance."""
        pts = geodesic_segment_points(0.2 + 0.1j, -0.3 + 0.4j, 5)
        fit = fit_geodesic(pts)
        assert fit.distance(pts).max() < 1e-10

    def test_diameter(self):
        """Test a diameter fit has A = 0."""
        fit = fit_geodesic([0j, 0.3 + 0j, 0.6 + 0j])
        assert abs(fit.A) < 1e-12
        assert fit.distance(np.array([0.1j]))[0] == pytest.approx(2.0 * math.atanh(0.1), abs=1e-12)

    def test_single_point(self):
        """Test one distinct point is degenerate."""
        with pytest.raises(exceptions.DegenerateInputError):
            fit_geodesic([0.1 + 0j, 0.1 + 0j])


class TestConjugateAudit:
    """Tests for the boundary audit of conjugate pieces."""

    def test_clean(self):
        """Test an audit within all limits passes."""
        audit = sample_audit()
        assert audit.passed
        assert all(row["passed"] for row in conjugate_audit_rows(audit))

    @pytest.mark.parametrize(
        "overrides, failure",
        [
            ({"height_spread": 0.5}, "height_spread"),
            ({"plane_angle": 1.0}, "plane_angle"),
            ({"crossing_pairs": 3}, "injectivity"),
            ({"d1_violations": 1}, "d1_monotone"),
            ({"orthogonality": {"R2": 0.2, "R3": 0.0}}, "orthogonality"),
        ],
    )
    def test_failures(self, overrides, failure):
        """Test each check reports its own failure."""
        assert sample_audit(**overrides).failures() == [failure]

    def test_projection_crossings(self, slice_piece):
        """Test a planar wedge has no crossing edges."""
        assert projection_crossings(slice_piece) == 0

    def test_needs_vertical_chain(self, slice_piece, chart):
        """Test the audit needs the image of the vertical segment."""
        copy = associate_immersion(slice_piece, geometry(slice_piece), chart, 0.0)
        with pytest.raises(exceptions.DomainError, match="VERT_P"):
            conjugate_boundary_audit(copy, 2)


@pytest.mark.slow
class TestConjugatePiece:
    """End-to-end conjugation of a capped graph piece."""

    @pytest.fixture(scope="class")
    def piece(self, mesh):
        u, _ = solve_capped(mesh, SolverConfig(cap=1.0))
        return immerse(mesh, u)

    def test_conjugate_closes(self, piece):
        """Test the θ = π/2 conjugate integrates and normalizes."""
        fields = geometry(piece)
        conj = associate_immersion(piece, fields, conformal_chart(piece), math.pi / 2)
        assert conj.position_residual <= 0.1
        normalized = normalize_conjugate(conj, 2)
        origin = normalized.immersion.corners["origin"]
        assert abs(normalized.immersion.z[origin]) < 1e-12
        assert normalized.normalization is not None

    def test_heights_from_frames(self, piece):
        """Test frame-integrated heights satisfy t_θ = cos θ·h + sin θ·h* at θ = π/3."""
        fields = geometry(piece)
        member = associate_immersion(piece, fields, conformal_chart(piece), math.pi / 3)
        assert member.height_residual < 2e-2
        spread = float(np.ptp(member.immersion.t))
        assert spread > 0.1
        assert member.height_residual < 0.05 * spread


class TestAssociateHeights:
    """Tests for heights of associate members."""

    def test_slice_stays_level(self, slice_piece, chart):
        """Test a horizontal slice keeps zero heights for every θ."""
        member = associate_immersion(slice_piece, geometry(slice_piece), chart, math.pi / 3)
        assert np.abs(member.immersion.t).max() < 1e-10
        assert member.height_residual < 1e-10

    def test_zero_angle_has_no_residual(self, slice_piece, chart):
        """Test θ = 0 returns the piece with a zero height residual."""
        member = associate_immersion(slice_piece, geometry(slice_piece), chart, 0.0)
        assert member.height_residual == 0.0
