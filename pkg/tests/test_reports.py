"""
Tests for CSV, OBJ and summary writers.
"""

import numpy as np
import pytest

from h2xr import exceptions
from h2xr.reports import (
    Summary,
    file_digest,
    format_obj,
    format_value,
    read_csv,
    with_differences,
    write_csv,
    write_obj,
)
from h2xr.surfgeo import from_positions


@pytest.fixture
def triangle():
    return from_positions([0j, 0.5 + 0j, 0.5j], [0.0, 1.0, 2.0], [[0, 1, 2]])


class TestFormatValue:
    """Tests for CSV cell formatting."""

    @pytest.mark.parametrize(
        "value, text",
        [
            (True, "true"),
            (np.bool_(False), "false"),
            (3, "3"),
            (np.int64(7), "7"),
            (0.1, "0.1"),
            (1.0 / 3.0, "0.333333333333"),
            (float("nan"), "nan"),
            (float("-inf"), "-inf"),
            (None, ""),
            ("L1", "L1"),
        ],
    )
    def test_values(self, value, text):
        """Test each value type renders deterministically."""
        assert format_value(value) == text


class TestCsv:
    """Tests for CSV tables."""

    def test_crlf_and_quoting(self, tmp_path):
        """Test RFC 4180 line ends and minimal quoting."""
        path = write_csv(tmp_path / "out" / "t.csv", [{"name": "a,b", "value": 1.5}])
        assert path.read_bytes() == b'name,value\r\n"a,b",1.5\r\n'

    def test_column_order(self, tmp_path):
        """Test columns follow first-seen key order and missing cells stay empty."""
        rows = [{"a": 1}, {"b": 2, "a": 3}]
        path = write_csv(tmp_path / "t.csv", rows)
        assert read_csv(path) == [{"a": "1", "b": ""}, {"a": "3", "b": "2"}]

    def test_deterministic(self, tmp_path):
        """Test identical rows give identical bytes."""
        rows = [{"cap": float(c), "value": c / 7.0} for c in range(1, 6)]
        first = write_csv(tmp_path / "a.csv", rows)
        second = write_csv(tmp_path / "b.csv", rows)
        assert file_digest(first) == file_digest(second)

    def test_differences(self):
        """Test consecutive differences are added per column."""
        rows = with_differences([{"tc": 1.0}, {"tc": 1.5}, {"tc": None}], ["tc"])
        assert [r["d_tc"] for r in rows] == [None, 0.5, None]


class TestObj:
    """Tests for OBJ export."""

    def test_single(self, triangle):
        """Test vertex and face records of one immersion."""
        text = format_obj([triangle], ["piece"])
        lines = text.splitlines()
        assert lines[1] == "o piece"
        assert lines[2] == "v 0 0 0"
        assert lines[3] == "v 0.5 0 1"
        assert lines[-1] == "f 1 2 3"

    def test_offsets(self, triangle, tmp_path):
        """Test face indices are offset across groups."""
        path = write_obj(tmp_path / "two.obj", [triangle, triangle])
        lines = path.read_text(encoding="utf-8").splitlines()
        faces = [line for line in lines if line.startswith("f ")]
        assert faces == ["f 1 2 3", "f 4 5 6"]
        assert "o piece_1" in lines

    def test_single_immersion_argument(self, triangle, tmp_path):
        """Test a bare immersion is accepted."""
        path = write_obj(tmp_path / "one.obj", triangle)
        assert path.read_text(encoding="utf-8").count("\nv ") == 3


class TestSummary:
    """Tests for the summary report."""

    def test_render(self):
        """Test every number cites its file and row."""
        summary = Summary(title="h2xr sigma_k")
        summary.add("total_curvature", -12.5, "tc_grid.csv", 4, passed=True)
        summary.add("nearest_approach", 0.02, "assembly.csv", 6)
        text = summary.render()
        assert text.startswith("# h2xr sigma_k\n")
        assert "total_curvature  = -12.5  [tc_grid.csv:4]  PASS" in text
        assert "nearest_approach = 0.02  [assembly.csv:6]\n" in text
        assert text.endswith("overall: PASS\n")

    def test_failed_gate(self):
        """Test one failed gate fails the summary."""
        summary = Summary(title="run")
        summary.add("a", 1.0, "x.csv", 1, passed=True)
        summary.add("b", 2.0, "x.csv", 2, passed=False)
        assert not summary.passed
        assert len(summary.gates) == 2
        assert "overall: FAIL" in summary.render()

    def test_no_gates(self):
        """Test informational summaries have no verdict line."""
        summary = Summary(title="run")
        summary.add("a", 1.0, "x.csv", 1)
        assert summary.passed
        assert "overall" not in summary.render()

    def test_rows_are_one_based(self):
        """Test row 0 is rejected."""
        with pytest.raises(exceptions.DomainError, match="1-based"):
            Summary(title="run").add("a", 1.0, "x.csv", 0)

    def test_write(self, tmp_path):
        """Test the summary file matches the rendered text."""
        summary = Summary(title="run")
        summary.add("a", 1.0, "x.csv", 1, passed=True)
        path = summary.write(tmp_path / "summary.txt")
        assert path.read_text(encoding="utf-8") == summary.render()
