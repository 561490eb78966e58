"""Model parameters, unit conventions and momentum grids.

Couplings of the two-chain model, all in units of the XY exchange J of
chain B: chain A carries a splitting omega0, chain B a splitting Omega0
and nearest-neighbour hopping J, and the chains are coupled with strength
g through a bond-direction phase phi in [0, pi/2].

Every solver in the package receives a single immutable ``ModelParams``
record; ``validate`` is the entry gate used by the CLI and rescales the
couplings to canonical units (J = 1).
"""

from __future__ import annotations

import dataclasses
import math
import warnings
from dataclasses import dataclass

import numpy as np

__all__ = [
    "ModelParams",
    "MomentumGrid",
    "ValidationWarning",
    "validate",
    "momentum_grid",
    "read_config",
    "write_config",
]

_BOUNDARIES = ("open", "periodic")


class ValidationWarning(UserWarning):
    """Parameters outside the gapped decoupled regime (still computable)."""


@dataclass(frozen=True)
class ModelParams:
    """Couplings and geometry of the coupled-chain model.

    Attributes
    ----------
    omega0 : float
        Splitting of chain A.
    Omega0 : float
        Splitting of chain B.
    J : float
        XY exchange of chain B; sets the energy unit (J > 0 at validation).
    g : float
        Interchain coupling strength, g >= 0.
    phi : float
        Geometric angle of the coupling, radians in [0, pi/2].
    N : int
        Sites per chain (total spins = 2N).
    boundary : str
        "open" or "periodic".
    """

    omega0: float = 2.5
    Omega0: float = 2.5
    J: float = 1.0
    g: float = 0.0
    phi: float = 0.0
    N: int = 8
    boundary: str = "open"

    def in_units_of_J(self) -> "ModelParams":
        """Return the same parameters rescaled so that J = 1."""
        J = self.J
        return dataclasses.replace(
            self, omega0=self.omega0 / J, Omega0=self.Omega0 / J,
            J=1.0, g=self.g / J,
        )

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "ModelParams":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown parameter keys: {sorted(unknown)}")
        return cls(**d)


def validate(params: ModelParams) -> ModelParams:
    """Check invariants and echo the parameters in canonical units of J.

    Rejects phi outside [0, pi/2], non-positive J, negative g, N < 2 and
    unknown boundary values.  Omega0 <= 2J or omega0 <= 0 leave the gapped
    decoupled regime; such points are computable, so they only raise a
    ``ValidationWarning``.
    """
    if not (params.J > 0.0) or not math.isfinite(params.J):
        raise ValueError(f"J must be positive and finite (unit of energy), got {params.J}")
    if not (0.0 <= params.phi <= math.pi / 2):
        raise ValueError(f"phi must lie in [0, pi/2], got {params.phi}")
    if params.g < 0.0:
        raise ValueError(f"g must be non-negative, got {params.g}")
    if params.N < 2:
        raise ValueError(f"N must be at least 2, got {params.N}")
    if params.boundary not in _BOUNDARIES:
        raise ValueError(f"boundary must be one of {_BOUNDARIES}, got {params.boundary!r}")
    for name in ("omega0", "Omega0", "g", "phi"):
        if not math.isfinite(getattr(params, name)):
            raise ValueError(f"{name} must be finite")

    canonical = params.in_units_of_J()
    if canonical.Omega0 <= 2.0:
        warnings.warn(
            f"Omega0 = {canonical.Omega0}J <= 2J: outside the gapped decoupled "
            "regime; critical-line formulas may not apply",
            ValidationWarning, stacklevel=2,
        )
    if canonical.omega0 <= 0.0:
        warnings.warn(
            f"omega0 = {canonical.omega0}J <= 0: chain A is not gapped around "
            "the polarized state",
            ValidationWarning, stacklevel=2,
        )
    return canonical


@dataclass(frozen=True)
class MomentumGrid:
    """Ordered quasi-momenta in (-pi, pi].

    Both periodic-chain grids and dense scan grids use the same
    roots-of-unity construction k_n = 2 pi n / count mapped into (-pi, pi],
    so every grid contains k = 0, even-count grids contain k = pi, and
    e^{i k count} = 1 holds to machine precision.
    """

    points: np.ndarray
    kind: str = "periodic"  # "periodic" | "scan"

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        object.__setattr__(self, "points", pts)

    @property
    def count(self) -> int:
        return len(self.points)


def momentum_grid(count: int, kind: str = "periodic") -> MomentumGrid:
    """Evenly spaced momentum grid with ``count`` points in (-pi, pi]."""
    if count < 2:
        raise ValueError(f"momentum grid needs at least 2 points, got {count}")
    if kind not in ("periodic", "scan"):
        raise ValueError(f"kind must be 'periodic' or 'scan', got {kind!r}")
    n = np.arange(count)
    k = 2.0 * np.pi * n / count
    k = np.where(k > np.pi + 1e-12, k - 2.0 * np.pi, k)
    return MomentumGrid(points=np.sort(k), kind=kind)


# -- flat key=value config files ------------------------------------------

_CONFIG_KEYS = ("omega0", "Omega0", "J", "g", "phi", "N", "boundary")


def read_config(path) -> ModelParams:
    """Parse a flat key = value config file into ModelParams.

    Lines starting with '#' and blank lines are ignored.  Keys: omega0,
    Omega0, J, g, phi, N, boundary.  phi accepts plain floats or simple
    'pi'-expressions like 'pi/4' or '0.3*pi'.
    """
    values: dict = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
            key, _, val = line.partition("=")
            key, val = key.strip(), val.strip()
            if key not in _CONFIG_KEYS:
                raise ValueError(f"{path}:{lineno}: unknown key {key!r}")
            if key == "boundary":
                values[key] = val
            elif key == "N":
                values[key] = int(val)
            elif key == "phi":
                values[key] = parse_angle(val)
            else:
                values[key] = float(val)
    return ModelParams(**values)


def parse_angle(text: str) -> float:
    """Parse 'pi/4', '0.3*pi', '3pi/8' or a float literal into radians."""
    t = text.strip().lower().replace(" ", "")
    if "pi" not in t:
        return float(t)
    num, _, den = t.partition("/")
    scale = 1.0 / float(den) if den else 1.0
    num = num.replace("*", "")
    pre = num[: num.index("pi")]
    factor = float(pre) if pre not in ("", "+") else (-1.0 if pre == "-" else 1.0)
    return factor * math.pi * scale


def write_config(params: ModelParams, path) -> None:
    """Write ModelParams as a flat key = value file (round-trips exactly)."""
    with open(path, "w", encoding="utf-8") as fh:
        for key in _CONFIG_KEYS:
            fh.write(f"{key} = {getattr(params, key)!r}\n".replace("'", ""))
