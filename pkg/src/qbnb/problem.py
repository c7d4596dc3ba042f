"""Problem description and the per-cube result every bounding rule returns."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import ConstraintViolation, MissingConstant, MissingOracle
from .geometry import Box

__all__ = ["Problem", "RuleOutcome", "Status"]


@dataclass(frozen=True, eq=False)
class Problem:
    """Minimize ``objective`` over the box ``domain``.

    ``unconstrained`` is the caller's assertion that the infimum over some open
    neighbourhood of the domain equals the minimum over the domain, which is
    what the gradient-free second and third order quasi-bounds rely on.
    ``l3_global`` states that ``L3`` bounds the Hessian variation on all of
    R^d rather than only on the domain.
    """

    domain: Box
    objective: Callable[[np.ndarray], float]
    gradient: Optional[Callable[[np.ndarray], np.ndarray]] = None
    hessian: Optional[Callable[[np.ndarray], np.ndarray]] = None
    L1: Optional[float] = None
    L2: Optional[float] = None
    L3: Optional[float] = None
    unconstrained: bool = False
    l3_global: bool = False
    name: str = "problem"
    f_min: Optional[float] = None
    minimizers: tuple = ()
    provenance: str = ""
    expression: object = None
    metadata: dict = field(default_factory=dict)

    @property
    def dim(self) -> int:
        return self.domain.dim

    def constant(self, name: str) -> float:
        value = getattr(self, name)
        if value is None:
            raise MissingConstant(name)
        return float(value)

    def oracle(self, name: str) -> Callable:
        fn = getattr(self, name)
        if fn is None:
            raise MissingOracle(name)
        return fn

    def require_unconstrained(self, rule: str) -> None:
        if not self.unconstrained:
            raise ConstraintViolation(f"rule {rule} is only valid on problems flagged unconstrained")


class Status(str, enum.Enum):
    BOUNDED = "bounded"
    ELIMINATED = "eliminated"
    UNBOUNDED = "unbounded"


@dataclass(slots=True)
class RuleOutcome:
    """Sample point and quasi-lower bound for one cube.

    ``f_sample`` is the objective at ``sample`` when the rule already computed
    it, else ``None``. ``order`` is 2 or 3 for the quasi-bounds that carry a
    convergence order tag (used by the combined rule), ``regularizer`` is the
    weight of the quadratic regularizer of the third order procedure.
    """

    qlb: float
    sample: np.ndarray
    status: Status = Status.BOUNDED
    f_sample: Optional[float] = None
    n_f: int = 0
    n_grad: int = 0
    n_hess: int = 0
    n_newton: int = 0
    order: Optional[int] = None
    regularizer: Optional[float] = None

    @classmethod
    def eliminated(cls, sample, **work) -> RuleOutcome:
        return cls(math.inf, sample, Status.ELIMINATED, **work)

    @classmethod
    def unbounded(cls, sample, **work) -> RuleOutcome:
        return cls(-math.inf, sample, Status.UNBOUNDED, **work)
