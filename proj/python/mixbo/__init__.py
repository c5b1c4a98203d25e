"""Batch Bayesian optimization over mixed-type search spaces."""

from ._mixbo import (
    BudgetExhausted,
    Optimizer,
    ProtocolError,
    SearchSpace,
    ValidationError,
    evaluate,
    expected_improvement,
    latin_hypercube_init,
    problem_space,
    problems,
    random_init,
    run_problem,
    score,
)

__all__ = [
    "BudgetExhausted",
    "Optimizer",
    "ProtocolError",
    "SearchSpace",
    "ValidationError",
    "evaluate",
    "expected_improvement",
    "latin_hypercube_init",
    "problem_space",
    "problems",
    "random_init",
    "run_problem",
    "score",
]
