"""
Tests for the batch pipeline and its command line.
"""

import math
from unittest import mock

import pytest

from h2xr import cli, exceptions
from h2xr.config import RunConfig
from h2xr.reports import Summary


@pytest.fixture
def config(tmp_path):
    return RunConfig(
        target="delta_k",
        caps=(0.0,),
        truncations=(0.2,),
        mesh_h=0.15,
        out=str(tmp_path / "run"),
        deterministic=True,
    )


class TestExitCode:
    """Tests for mapping failures to exit status."""

    @pytest.mark.parametrize(
        "error, status",
        [
            (exceptions.AuditGateError("gate"), 4),
            (exceptions.SeamError("seam"), 4),
            (exceptions.ConvergenceError("newton"), 3),
            (exceptions.SolverIntegrityError("bounds"), 3),
            (exceptions.ChartError("flip"), 3),
            (exceptions.IntegrationError("closure"), 3),
            (exceptions.PeriodError("period"), 3),
            (exceptions.MeshCapacityError("too fine", suggested_h=0.1), 3),
            (exceptions.ConfigError("bad key"), 2),
            (exceptions.DomainError("outside"), 2),
            (exceptions.DegenerateInputError("flat"), 2),
        ],
    )
    def test_mapping(self, error, status):
        """Test each failure class has its status."""
        assert cli.exit_code(error) == status


class TestExpectedCurvature:
    """Tests for piece counts and the limiting total curvature."""

    @pytest.mark.parametrize(
        "target, k, count",
        [("delta_k", 3, 1), ("sigma_alpha_k", 3, 6), ("sigma_alpha", 2, 8), ("sigma_k", 3, 12)],
    )
    def test_piece_count(self, target, k, count):
        """Test the number of fundamental pieces per surface."""
        assert cli.piece_count(RunConfig(target=target, k=k, alpha=0.6)) == count

    def test_sigma_k(self):
        """Test Σ(2) tends to −4π."""
        expected = cli.expected_total_curvature(RunConfig(target="sigma_k", k=2))
        assert expected == pytest.approx(-4.0 * math.pi)

    def test_piece(self):
        """Test one piece of Δ_k tends to (1−k)π/k."""
        config = RunConfig(target="delta_k", k=3, alpha=0.6)
        assert cli.expected_total_curvature(config) == pytest.approx(-2.0 * math.pi / 3.0)


class TestAssembleStage:
    """Tests for surface selection."""

    def test_delta_k_has_no_surface(self, config):
        """Test the graph target stops before assembly."""
        assert cli.assemble_stage(config, mock.Mock(), None) is None

    def test_sigma_k_needs_audited_conjugate(self, config):
        """Test Σ(k) is refused without the conjugate audit."""
        with pytest.raises(exceptions.ConfigError, match="audited conjugate"):
            cli.assemble_stage(config.replace(target="sigma_k"), mock.Mock(), None)

    def test_sigma_k_measures_conjugate_tc(self, config):
        """Test the graph piece TC is passed as a reference, not as the piece TC."""
        piece = mock.Mock()
        piece.total_curvature.value = -3.0
        conj = cli.ConjugateStage(
            associate=mock.Mock(), metric_error=0.0, audit=mock.Mock(passed=True)
        )
        with mock.patch("h2xr.cli.build_sigma_k") as build:
            cli.assemble_stage(config.replace(target="sigma_k"), piece, conj)
        assert build.call_args.kwargs["reference_tc"] == -3.0
        assert "piece_tc" not in build.call_args.kwargs


class TestConjugateStage:
    """Tests for the conjugate stage."""

    def test_audit_before_snap(self, config):
        """Test the audit sees the normalized piece and assembly gets the snapped one."""
        piece = mock.Mock()
        piece.immersion.chains = {"VERT_P": [0, 1]}
        normalized, snapped = mock.Mock(), mock.Mock()
        with mock.patch("h2xr.cli.conformal_chart"), mock.patch(
            "h2xr.cli.associate_immersion"
        ), mock.patch("h2xr.cli.metric_error", return_value=0.0), mock.patch(
            "h2xr.cli.normalize_conjugate", return_value=normalized
        ), mock.patch(
            "h2xr.cli.snap_to_planes", return_value=(snapped, 0.003)
        ) as snap, mock.patch(
            "h2xr.cli.conjugate_boundary_audit"
        ) as audit:
            stage = cli.conjugate_stage(config.replace(target="sigma_k"), piece)
        audit.assert_called_once_with(normalized, 2)
        snap.assert_called_once_with(normalized, 2)
        assert stage.associate is snapped
        assert stage.normalized is normalized
        assert stage.snap_distance == 0.003
        checks = [row["check"] for row in stage.rows()]
        assert checks[-1] == "snap_distance"
        assert "height_residual" in checks

    def test_other_angle_not_audited(self, config):
        """Test members other than the conjugate are neither audited nor snapped."""
        piece = mock.Mock()
        piece.immersion.chains = {"VERT_P": [0, 1]}
        with mock.patch("h2xr.cli.conformal_chart"), mock.patch(
            "h2xr.cli.associate_immersion"
        ), mock.patch("h2xr.cli.metric_error", return_value=0.0), mock.patch(
            "h2xr.cli.snap_to_planes"
        ) as snap:
            stage = cli.conjugate_stage(config.replace(target="sigma_alpha_k", theta=1.0), piece)
        snap.assert_not_called()
        assert stage.audit is None and stage.normalized is None


class TestAssemblyGates:
    """Tests for the summary gates over assembly checks."""

    def test_gates(self):
        """Test each assembly check gets its own verdict and row."""
        length = 4.394449154672439
        rows = [
            {"check": "intersecting_pairs", "value": 0},
            {"check": "seam_max_deviation", "value": 0.01},
            {"check": "symmetry_defect", "value": 1e-12},
            {"check": "translation_length", "value": length},
            {"check": "expected_translation_length", "value": length + 1e-9},
            {"check": "period_defect", "value": 1e-6},
        ]
        summary = Summary(title="gates")
        cli._assembly_gates(summary, rows)
        verdicts = {e.name: e.passed for e in summary.entries}
        assert verdicts == {
            "intersecting_pairs": True,
            "seam_max_deviation": True,
            "symmetry_defect": True,
            "period_defect": False,
            "translation_length_error": False,
        }
        assert {e.name: e.row for e in summary.entries}["translation_length_error"] == 4

    def test_tc_gap_is_reported(self):
        """Test the conjugate TC gap is listed without a verdict."""
        rows = [
            {"check": "intersecting_pairs", "value": 0},
            {"check": "seam_max_deviation", "value": 0.0},
            {"check": "tc_gap", "value": 0.02},
        ]
        summary = Summary(title="gates")
        cli._assembly_gates(summary, rows)
        assert summary.entries[-1].name == "conjugate_tc_gap"
        assert summary.entries[-1].passed is None


class TestRun:
    """Tests for the staged pipeline."""

    def test_unknown_stage(self, config):
        """Test an unknown stage is a config error."""
        with pytest.raises(exceptions.ConfigError, match="unknown stage"):
            cli.run(config, until="polish")

    def test_solver_failure(self, config):
        """Test a solver failure sets status 3 and names the stage."""
        with mock.patch("h2xr.cli.solve_stage", side_effect=exceptions.ConvergenceError("stalled")):
            result = cli.run(config, until="assemble")
        assert result.status == cli.EXIT_SOLVER
        assert result.stage == "solve"
        assert result.error == "stalled"
        assert "summary" not in result.artifacts

    @pytest.mark.slow
    def test_delta_k_audit(self, config):
        """Test a flat piece runs through the audit and writes its artifacts."""
        result = cli.run(config, until="audit")
        assert result.status == cli.EXIT_OK
        assert result.error is None
        for name in ("cap_sweep", "mesh", "field", "gauss_bonnet", "curvature", "piece_obj"):
            assert result.artifacts[name].exists()
        assert result.artifacts["summary"].exists()
        names = [entry.name for entry in result.summary.entries]
        assert names[:2] == ["newton_residual", "cap_monotone_min_increment"]
        assert "piece_total_curvature" in names
        assert "exterior_angle_error" in names

    @pytest.mark.slow
    def test_deterministic_outputs(self, config, tmp_path):
        """Test two deterministic runs write identical tables."""
        first = cli.run(config, until="solve")
        second = cli.run(config.replace(out=str(tmp_path / "again")), until="solve")
        table = first.artifacts["cap_sweep"].read_bytes()
        assert table == second.artifacts["cap_sweep"].read_bytes()


class TestSweep:
    """Tests for parameter sweeps."""

    def test_unknown_parameter(self, config):
        """Test only known parameters can be swept."""
        with pytest.raises(exceptions.ConfigError, match="cannot sweep"):
            cli.sweep(config, "copies", [1.0])

    def test_empty_values(self, config):
        """Test a sweep needs values."""
        with pytest.raises(exceptions.ConfigError, match="at least one value"):
            cli.sweep(config, "cap", [])

    def test_rows_and_differences(self, config):
        """Test one row per value with differences between rows."""
        rows = [{"angle": 0.3, "piece_tc": -1.0}, {"angle": 0.2, "piece_tc": -1.25}]
        with mock.patch("h2xr.cli._sweep_row", side_effect=rows) as row:
            table = cli.sweep(config, "truncation", [0.2, 0.1])
        assert row.call_args_list[0].args[0].truncations == (0.2,)
        assert row.call_args_list[1].args[0].truncations == (0.1,)
        assert table[1]["d_piece_tc"] == pytest.approx(-0.25)
        assert (cli.Path(config.out) / "sweep_truncation.csv").exists()


class TestExport:
    """Tests for OBJ export."""

    def test_unknown_stage(self, config):
        """Test the stage is checked before any solve."""
        with mock.patch("h2xr.cli.solve_stage") as solve:
            with pytest.raises(exceptions.ConfigError, match="unknown export stage"):
                cli.export(config, "mesh")
        solve.assert_not_called()


class TestCommandLine:
    """Tests for argument parsing and main."""

    def test_subcommands(self):
        """Test every verb parses with the shared options."""
        parser = cli.build_parser()
        for verb in ("solve", "audit", "conjugate", "assemble"):
            assert parser.parse_args([verb, "--k", "3"]).verb == verb
        args = parser.parse_args(["sweep", "--parameter", "theta", "--values", "0", "pi/2"])
        assert args.values == ["0", "pi/2"]
        assert parser.parse_args(["export", "--stage", "complex"]).stage == "complex"

    def test_missing_verb(self):
        """Test a verb is required."""
        with pytest.raises(SystemExit):
            cli.build_parser().parse_args([])

    def test_config_from_args(self, tmp_path):
        """Test flags override the configuration file."""
        path = tmp_path / "run.cfg"
        path.write_text("k = 3\nalpha = 0.6\ncaps = 1, 2\n", encoding="utf-8")
        args = cli.build_parser().parse_args(
            [
                "solve",
                "--config",
                str(path),
                "--alpha",
                "0.7",
                "--trunc",
                "0.2,0.1",
                "--deterministic",
            ]
        )
        config = cli.config_from_args(args)
        assert (config.k, config.alpha, config.caps) == (3, 0.7, (1.0, 2.0))
        assert config.truncations == (0.2, 0.1)
        assert config.deterministic is True

    def test_bad_config_file(self, tmp_path):
        """Test an unreadable configuration exits with status 2."""
        assert cli.main(["solve", "--config", str(tmp_path / "absent.cfg")]) == cli.EXIT_CONFIG

    def test_bad_flag_value(self):
        """Test an invalid flag value exits with status 2."""
        assert cli.main(["audit", "--k", "1"]) == cli.EXIT_CONFIG

    def test_sweep_verb(self, tmp_path):
        """Test the sweep verb parses angle values."""
        with mock.patch("h2xr.cli.sweep") as sweep:
            status = cli.main(
                ["sweep", "--out", str(tmp_path), "--parameter", "theta", "--values", "0", "pi/2"]
            )
        assert status == cli.EXIT_OK
        _, parameter, values = sweep.call_args.args
        assert parameter == "theta"
        assert values == [0.0, pytest.approx(math.pi / 2)]

    def test_run_status_returned(self, tmp_path):
        """Test main returns the pipeline status."""
        failed = cli.RunResult(status=cli.EXIT_AUDIT, error="gate", stage="assemble")
        with mock.patch("h2xr.cli.run", return_value=failed) as run:
            assert cli.main(["assemble", "--out", str(tmp_path)]) == cli.EXIT_AUDIT
        assert run.call_args.kwargs["until"] == "assemble"

    def test_order_check_flag(self):
        """Test --order-check turns on the refinement study."""
        args = cli.build_parser().parse_args(["solve", "--order-check"])
        assert cli.config_from_args(args).order_check is True
        assert cli.config_from_args(cli.build_parser().parse_args(["solve"])).order_check is False


@pytest.mark.slow
class TestOrderCheck:
    """Tests for the refinement study inside a run."""

    def test_refinement_table(self, config):
        """Test the observed order is written and cited in the summary."""
        result = cli.run(config.replace(order_check=True, caps=(1.0,)), until="solve")
        assert result.status == cli.EXIT_OK
        assert result.artifacts["refinement"].exists()
        entry = [e for e in result.summary.entries if e.name == "refinement_order"][0]
        assert entry.source == "refinement.csv"
        assert entry.row == 4
