"""
Tests for h2xr exceptions.
"""

import pytest

from h2xr import exceptions


def test_base_exception():
    """Test base H2xrError."""
    exc = exceptions.H2xrError("test message")
    assert str(exc) == "test message"
    assert isinstance(exc, Exception)


def test_domain_error():
    """Test DomainError."""
    exc = exceptions.DomainError("point outside the disk")
    assert isinstance(exc, exceptions.H2xrError)
    assert str(exc) == "point outside the disk"


def test_degenerate_input_is_domain_error():
    """Test DegenerateInputError is caught as a DomainError."""
    with pytest.raises(exceptions.DomainError):
        raise exceptions.DegenerateInputError("coincident endpoints")


def test_mesh_capacity_error():
    """Test MeshCapacityError carries a suggested mesh size."""
    exc = exceptions.MeshCapacityError("too many vertices", suggested_h=0.12)
    assert isinstance(exc, exceptions.H2xrError)
    assert exc.suggested_h == 0.12


def test_convergence_error():
    """Test ConvergenceError carries its report."""
    report = object()
    exc = exceptions.ConvergenceError("no convergence", report=report)
    assert exc.report is report


def test_chart_error():
    """Test ChartError carries the distortion map."""
    exc = exceptions.ChartError("flipped", distortion=[1.0, 2.0])
    assert exc.distortion == [1.0, 2.0]


def test_integration_error():
    """Test IntegrationError carries the residual map."""
    exc = exceptions.IntegrationError("no closure", residuals=[0.3])
    assert exc.residuals == [0.3]


def test_config_error_line():
    """Test ConfigError prefixes the line number."""
    exc = exceptions.ConfigError("unknown key 'q'", line=7)
    assert str(exc) == "line 7: unknown key 'q'"
    assert exc.line == 7


def test_config_error_without_line():
    """Test ConfigError without a line number."""
    exc = exceptions.ConfigError("bad")
    assert str(exc) == "bad"
    assert exc.line is None


@pytest.mark.parametrize(
    "cls",
    [
        exceptions.SolverIntegrityError,
        exceptions.PeriodError,
        exceptions.SeamError,
        exceptions.AuditGateError,
    ],
)
def test_plain_subclasses(cls):
    """Test the remaining failure families derive from H2xrError."""
    exc = cls("failed")
    assert isinstance(exc, exceptions.H2xrError)
    assert str(exc) == "failed"
