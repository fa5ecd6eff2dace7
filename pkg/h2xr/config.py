"""
Run configuration: a frozen dataclass plus a flat ``key=value`` file format.
"""

import dataclasses
import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable, Dict, Mapping, Optional, Tuple, Union

from . import exceptions
from .graphsolve import SolverConfig
from .meshdom import WedgeSpec, alpha_min

logger = logging.getLogger(__name__)

TARGETS = ("delta_k", "sigma_alpha_k", "sigma_alpha", "sigma_k")


@dataclass(frozen=True)
class RunConfig:
    """Parameters of one pipeline run."""

    target: str = "sigma_k"
    """Surface to build: delta_k, sigma_alpha_k, sigma_alpha or sigma_k"""

    k: int = 2
    alpha: float = 0.5
    caps: Tuple[float, ...] = (1.0, 2.0, 4.0, 8.0, 16.0)
    """Cap schedule n (strictly increasing)"""

    truncations: Tuple[float, ...] = (0.2, 0.1, 0.05)
    """Euclidean distances of q_j from the ideal vertex p₂"""

    mesh_h: float = 0.08
    refine: int = 0
    """Uniform refinement levels applied after meshing"""

    order_check: bool = False
    """Also solve on two further refinements and report the observed order"""

    tol: float = 1e-10
    max_iter: int = 50
    theta: float = math.pi / 2
    copies: int = 3
    """Translates of Σ(α,2) in a Σ(α) strip"""

    out: str = "h2xr-out"
    deterministic: bool = False
    """Fixed ordering and formatting so repeated runs write identical files"""

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        """
        Check parameter ranges.

        Raises:
            ConfigError: For out-of-range values, with ``key`` naming the field
        """
        if self.target not in TARGETS:
            raise exceptions.ConfigError(
                f"target must be one of {', '.join(TARGETS)}, got {self.target!r}", key="target"
            )
        if self.k < 2:
            raise exceptions.ConfigError(f"k must be an integer >= 2, got {self.k}", key="k")
        if not 0.0 < self.alpha < 1.0:
            raise exceptions.ConfigError(f"alpha must lie in (0, 1), got {self.alpha}", key="alpha")
        if self.target == "sigma_k" and self.k >= 3 and self.alpha < alpha_min(self.k):
            raise exceptions.ConfigError(
                f"alpha={self.alpha} is below alpha_min({self.k})={alpha_min(self.k):.6f}"
                " for sigma_k",
                key="alpha",
            )
        if self.target == "sigma_alpha" and self.k != 2:
            raise exceptions.ConfigError("sigma_alpha is assembled from k=2 pieces", key="k")
        if not self.caps or any(c < 0.0 for c in self.caps):
            raise exceptions.ConfigError(
                "caps must be a non-empty list of non-negative values", key="caps"
            )
        if any(b <= a for a, b in zip(self.caps[:-1], self.caps[1:])):
            raise exceptions.ConfigError("caps must be strictly increasing", key="caps")
        if not self.truncations or any(not 0.0 < t for t in self.truncations):
            raise exceptions.ConfigError(
                "truncations must be a non-empty list of positive values", key="truncations"
            )
        if self.mesh_h <= 0.0:
            raise exceptions.ConfigError("mesh_h must be positive", key="mesh_h")
        if self.refine < 0:
            raise exceptions.ConfigError("refine must be >= 0", key="refine")
        if self.tol <= 0.0:
            raise exceptions.ConfigError("tol must be positive", key="tol")
        if self.max_iter < 1:
            raise exceptions.ConfigError("max_iter must be at least 1", key="max_iter")
        if self.copies < 1:
            raise exceptions.ConfigError("copies must be at least 1", key="copies")

    def replace(self, **changes: Any) -> "RunConfig":
        """Copy with some fields changed (validated again)."""
        return dataclasses.replace(self, **changes)

    def solver_config(self, cap: Optional[float] = None) -> SolverConfig:
        cap = self.caps[-1] if cap is None else cap
        return SolverConfig(cap=cap, tol=self.tol, max_iter=self.max_iter)

    @property
    def trunc_side(self) -> bool:
        """Whether pieces are solved on the quadrilateral with the full L2 ray."""
        return self.target != "delta_k"

    def wedge_spec(self, truncation: Optional[float] = None) -> WedgeSpec:
        """Wedge for one truncation (the smallest by default)."""
        trunc = min(self.truncations) if truncation is None else truncation
        return WedgeSpec.truncated(
            self.k, self.alpha, trunc, target_h=self.mesh_h, trunc_side=self.trunc_side
        )


def _parse_bool(text: str) -> bool:
    lowered = text.strip().lower()
    if lowered in ("1", "true", "yes", "on"):
        return True
    if lowered in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _parse_floats(text: str) -> Tuple[float, ...]:
    return tuple(float(v) for v in text.replace(",", " ").split())


def _parse_int(text: str) -> int:
    value = float(text)
    if value != int(value):
        raise ValueError(f"not an integer: {text!r}")
    return int(value)


def _parse_angle(text: str) -> float:
    """Float, optionally written as a multiple of pi (``pi/2``, ``0.5*pi``)."""
    cleaned = text.strip().lower().replace(" ", "")
    if "pi" not in cleaned:
        return float(cleaned)
    head, _, tail = cleaned.partition("pi")
    factor = float(head.rstrip("*")) if head.rstrip("*") else 1.0
    divisor = float(tail.lstrip("/")) if tail else 1.0
    return factor * math.pi / divisor


PARSERS: Dict[str, Callable[[str], Any]] = {
    "target": str.strip,
    "k": _parse_int,
    "alpha": float,
    "caps": _parse_floats,
    "truncations": _parse_floats,
    "mesh_h": float,
    "refine": _parse_int,
    "order_check": _parse_bool,
    "tol": float,
    "max_iter": _parse_int,
    "theta": _parse_angle,
    "copies": _parse_int,
    "out": str.strip,
    "deterministic": _parse_bool,
}

ALIASES = {
    "trunc": "truncations",
    "cap": "caps",
    "mesh-h": "mesh_h",
    "max-iter": "max_iter",
    "order-check": "order_check",
    "m": "copies",
}


def parse_value(key: str, text: str) -> Any:
    """Convert one raw value by its key's parser."""
    key = ALIASES.get(key, key)
    if key not in PARSERS:
        raise exceptions.ConfigError(f"unknown key {key!r}")
    try:
        return PARSERS[key](text)
    except ValueError as e:
        raise exceptions.ConfigError(f"bad value for {key}: {e}") from e


def parse_config(text: str) -> Tuple[Dict[str, Any], Dict[str, int]]:
    """
    Parse ``key=value`` lines.

    Returns:
        (values by key, line number by key)

    Raises:
        ConfigError: With the offending line number
    """
    values: Dict[str, Any] = {}
    lines: Dict[str, int] = {}
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise exceptions.ConfigError(f"expected key=value, got {raw.strip()!r}", line=number)
        key, _, value = (part.strip() for part in line.partition("="))
        key = ALIASES.get(key, key)
        if key in values:
            raise exceptions.ConfigError(f"duplicate key {key!r}", line=number)
        try:
            values[key] = parse_value(key, value)
        except exceptions.ConfigError as e:
            raise exceptions.ConfigError(str(e), line=number) from e
        lines[key] = number
    return values, lines


def load_config(
    path: Optional[Union[str, Path]] = None,
    overrides: Optional[Mapping[str, Any]] = None,
) -> RunConfig:
    """
    Build a RunConfig from an optional file and explicit overrides.

    Overrides (already typed, e.g. from command-line flags) win over file
    values; ``None`` overrides are ignored.

    Args:
        path: ``key=value`` file, ``#`` starts a comment
        overrides: Field values taking precedence over the file

    Returns:
        Validated RunConfig

    Raises:
        ConfigError: For unreadable files, parse errors or invalid values;
            the message names the line when the value came from the file

    Example:
        >>> load_config(overrides={"k": 3, "alpha": 0.6}).k
        3
    """
    values: Dict[str, Any] = {}
    lines: Dict[str, int] = {}
    if path is not None:
        try:
            text = Path(path).read_text(encoding="utf-8")
        except OSError as e:
            raise exceptions.ConfigError(f"cannot read config {path}: {e}") from e
        values, lines = parse_config(text)
        logger.debug(f"Loaded {len(values)} keys from {path}")
    for key, value in (overrides or {}).items():
        if value is not None:
            values[ALIASES.get(key, key)] = value
            lines.pop(ALIASES.get(key, key), None)
    try:
        return RunConfig(**values)
    except exceptions.ConfigError as e:
        culprit = lines.get(e.key) if e.key is not None else None
        if culprit is None:
            raise
        raise exceptions.ConfigError(str(e), line=culprit, key=e.key) from e
    except TypeError as e:
        raise exceptions.ConfigError(f"invalid configuration: {e}") from e


def format_config(config: RunConfig) -> str:
    """Render a config back to the ``key=value`` format."""
    out = []
    for f in dataclasses.fields(config):
        value = getattr(config, f.name)
        if isinstance(value, tuple):
            value = ",".join(repr(v) for v in value)
        elif isinstance(value, bool):
            value = str(value).lower()
        out.append(f"{f.name}={value}")
    return "\n".join(out) + "\n"
