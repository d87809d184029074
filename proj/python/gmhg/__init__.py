"""Exact epsilon-Nash equilibria for tree-structured graphical multi-hypermatrix games.

Games and profiles are passed as JSON text in the library's schema; exact
quantities are returned as ``fractions.Fraction``.
"""

from ._gmhg import (
    GmhgError,
    InfeasibleAtRoot,
    InputError,
    TooLarge,
    brute_force,
    bench_star,
    canonical_game,
    csp_solve,
    exact_regret,
    generate_random_tree,
    generate_random_tree_normalform,
    generate_star,
    plan,
    solve,
    verify,
)

__all__ = [
    "GmhgError",
    "InfeasibleAtRoot",
    "InputError",
    "TooLarge",
    "brute_force",
    "bench_star",
    "canonical_game",
    "csp_solve",
    "exact_regret",
    "generate_random_tree",
    "generate_random_tree_normalform",
    "generate_star",
    "plan",
    "solve",
    "verify",
]
