"""Deterministic global minimization of smooth functions over boxes by
branch and bound with quasi-lower bounds."""
from .errors import ConstraintViolation, DomainError, MissingConstant, MissingOracle, ParseError, QBnBError
from .functions import dixon_szego, get_problem, problem_from_expr, random_rastrigin_like, rastrigin, rastrigin_family
from .geometry import Box, Cube, ball2r_inside, bisect_longest, contraction_factor, radius
from .interval import Interval, eval_interval, lipschitz_bound, lipschitz_bounds
from .problem import Problem, RuleOutcome, Status
from .rules import RULES, make_rule
from .search import SearchConfig, SolveResult, SolveStatus, solve

__version__ = "0.1.0"
