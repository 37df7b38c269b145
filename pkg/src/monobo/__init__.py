"""Multi-objective Bayesian optimisation with hypervolume-based scalarisers (xHVI, HypI) and EHVI."""

from .core import Archive, dominates, latin_hypercube, nondominated_set, pareto_shells
from .hypervolume import hvi_minus, hvi_plus, hypervolume
from .problems import get_problem, true_front
from .runner import RunConfig, RunResult, run_campaign, run_one
from .scalarize import hypi_all, xhvi_all

__all__ = [
    "Archive",
    "RunConfig",
    "RunResult",
    "dominates",
    "get_problem",
    "hvi_minus",
    "hvi_plus",
    "hypervolume",
    "hypi_all",
    "latin_hypercube",
    "nondominated_set",
    "pareto_shells",
    "run_campaign",
    "run_one",
    "true_front",
    "xhvi_all",
]

__version__ = "0.1.0"
