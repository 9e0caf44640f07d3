"""Parameters, event records and elementary distributions of the classical cat model.

A cat takes the left or right arm of a bifurcation with equal probability and
carries a tail that points up or down with equal probability. Two very noisy
detectors record it: the cat detector ``x`` on the left arm is shifted by +1
when the cat passes, the tail detector ``y`` on the right arm by +1 (tail up)
or -1 (tail down). Afterwards each detector may emit a noise whose probability
depends on its own final reading; a noise heard by the cat sends it into the
box (the post-selection ``b``), otherwise it hides with probability ``p``.
"""
from __future__ import annotations

import enum
import math
from dataclasses import asdict, dataclass, field, replace
from typing import Any, Mapping, Optional

import numpy as np

# Structural constants of the model (not parameters).
PROB_LEFT = 0.5
PROB_TAIL_UP = 0.5
SHIFT = 1.0

PARAM_KEYS = ("Delta", "delta", "eps_c", "eps_t", "u", "v", "p", "q")

_Q_TOL = 1e-12


class ParameterError(ValueError):
    """Raised when a parameter set violates a model invariant."""


class Path(enum.Enum):
    LEFT = "left"
    RIGHT = "right"


class Tail(enum.Enum):
    UP = "up"
    DOWN = "down"


@dataclass(frozen=True)
class ModelParams:
    """All scalar parameters of the model.

    ``Delta`` is the width of the pointer priors, ``delta`` the width of both
    noise likelihoods, ``eps_c``/``eps_t`` their amplitudes and ``u``/``v``
    their centres. ``p`` is the probability that an undisturbed cat hides in
    the box and ``q = 1 - p`` the probability that it eats instead. When
    ``q`` is omitted it is filled in as ``1 - p``.

    Construction does not check anything; call :func:`validate`.
    """

    Delta: float
    delta: float
    eps_c: float
    eps_t: float
    u: float
    v: float
    p: float = 0.25
    q: Optional[float] = field(default=None)

    def __post_init__(self):
        if self.q is None:
            object.__setattr__(self, "q", 1.0 - self.p)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, doc: Mapping[str, Any]) -> "ModelParams":
        """Build from a parameter document; keys must be exactly :data:`PARAM_KEYS`."""
        if not isinstance(doc, Mapping):
            raise ParameterError("parameter document must be a JSON object")
        unknown = sorted(set(doc) - set(PARAM_KEYS))
        if unknown:
            raise ParameterError(f"unknown parameter keys: {', '.join(unknown)}")
        missing = [k for k in PARAM_KEYS if k not in doc]
        if missing:
            raise ParameterError(f"missing parameter keys: {', '.join(missing)}")
        values = {}
        for key in PARAM_KEYS:
            val = doc[key]
            if isinstance(val, bool) or not isinstance(val, (int, float)):
                raise ParameterError(f"{key} must be a number")
            values[key] = float(val)
        return cls(**values)

    def replace(self, **changes) -> "ModelParams":
        """Copy with changes; ``q`` follows ``p`` unless given explicitly."""
        if "p" in changes and "q" not in changes:
            changes["q"] = 1.0 - changes["p"]
        return replace(self, **changes)


def validate(params: ModelParams) -> ModelParams:
    """Return ``params`` unchanged if every invariant holds, else raise ParameterError."""
    for name in PARAM_KEYS:
        if not math.isfinite(getattr(params, name)):
            raise ParameterError(f"{name} must be finite")
    if params.Delta <= 0:
        raise ParameterError("Delta must be positive")
    if params.delta <= 0:
        raise ParameterError("delta must be positive")
    if not 0.0 <= params.eps_c <= 1.0:
        raise ParameterError("eps_c must lie in [0, 1]")
    if not 0.0 <= params.eps_t <= 1.0:
        raise ParameterError("eps_t must lie in [0, 1]")
    if not 0.0 <= params.p <= 1.0:
        raise ParameterError("p must lie in [0, 1]")
    if abs(params.q - (1.0 - params.p)) > _Q_TOL:
        raise ParameterError("q must equal 1-p")
    return params


def pointer_pdf(x0, Delta):
    """Centred Gaussian prior of a pointer with standard deviation ``Delta``.

    Accepts scalars or arrays.
    """
    z = np.divide(x0, Delta)
    return np.exp(-0.5 * z * z) / (math.sqrt(2.0 * math.pi) * Delta)


def _noise(value, amplitude, center, width):
    z = np.divide(np.subtract(value, center), width)
    return amplitude * np.exp(-0.5 * z * z)


def noise_prob_cat(x, params: ModelParams):
    """Probability that the cat detector makes a noise given its final reading ``x``."""
    return _noise(x, params.eps_c, params.u, params.delta)


def noise_prob_tail(y, params: ModelParams):
    """Probability that the tail detector makes a noise given its final reading ``y``."""
    return _noise(y, params.eps_t, params.v, params.delta)


@dataclass(frozen=True)
class Event:
    """One sampled run of the experiment."""

    path: Path
    tail: Tail
    x0: float
    y0: float
    x: float
    y: float
    noise_c: bool
    noise_t: bool
    heard: bool
    b: bool

    def __post_init__(self):
        if self.heard and not self.b:
            raise ValueError("a cat that heard a noise always hides in the box")

    @staticmethod
    def readouts(path: Path, tail: Tail, x0: float, y0: float) -> tuple[float, float]:
        """Final pointer values: exactly one pointer moves, by exactly one unit."""
        if path is Path.LEFT:
            return x0 + SHIFT, y0
        if tail is Tail.UP:
            return x0, y0 + SHIFT
        return x0, y0 - SHIFT


PAPER_PARAMS = ModelParams(
    Delta=1000.0,
    delta=10.0,
    eps_c=math.e / 30.0,
    eps_t=2.0 * math.e / 30.0,
    u=402.0,
    v=400.0,
    p=0.25,
    q=0.75,
)

# Desk-scale set: Delta=20, delta=2, amplitudes e/(3 delta) and 2e/(3 delta),
# centres solved for <x>_b = <y>_b = 1 with the exact closed forms.
DESK_PARAMS = ModelParams(
    Delta=20.0,
    delta=2.0,
    eps_c=math.e / 6.0,
    eps_t=math.e / 3.0,
    u=11.646932000710583,
    v=9.957604517010935,
    p=0.25,
    q=0.75,
)

NAMED_PARAMS = {"paper": PAPER_PARAMS, "desk": DESK_PARAMS}
