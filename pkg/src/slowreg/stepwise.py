"""Stepwise heuristic: greedy per-vertex fits, then budget-driven removal.

Phase one fits every vertex independently with forward selection under a
ridge penalty. Phase two repairs the global budgets: while the union support
or the edgewise change count is too large, the feature whose removal hurts
the current objective least is dropped everywhere, and each vertex that
loses it may copy one feature from a random neighbor to stay aligned.
Each pass shrinks the union by one, so the loop is bounded by the initial
union size. The result always satisfies all three budgets, which makes it a
safe warm start and incumbent for the exact solver.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .oracle import beta_star, eval_cost
from .problem import ProblemInstance, QuadForm, SparsityBudget, build_quadform


def sparse_ridge_greedy(
    x: np.ndarray,
    y: np.ndarray,
    k: int,
    lam: float,
    allowed: np.ndarray | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Forward selection of up to k features for one ridge regression.

    Candidates are scored by the squared correlation of each column with the
    current residual, normalized by the column norm; after every pick the
    coefficients are refit exactly on the selected set. Returns the sorted
    selected indices and a dense coefficient vector.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64).ravel()
    d = x.shape[1]
    if allowed is None:
        allowed = np.arange(d)
    else:
        allowed = np.asarray(allowed, dtype=np.int64)
    mask = np.zeros(d, dtype=bool)
    mask[allowed] = True
    col_norm2 = np.einsum("ij,ij->j", x, x)
    selected: list[int] = []
    beta = np.zeros(d)
    residual = y.copy()
    for _ in range(min(int(k), allowed.size)):
        scores = x.T @ residual
        np.square(scores, out=scores)
        safe = np.where(col_norm2 > 0.0, col_norm2, 1.0)
        scores /= safe
        scores[~mask | (col_norm2 == 0.0)] = -np.inf
        scores[selected] = -np.inf
        best = int(np.argmax(scores))
        if scores[best] <= 0.0:
            break
        selected.append(best)
        beta = _ridge_refit(x, y, selected, lam)
        residual = y - x[:, selected] @ beta[selected]
    return np.array(sorted(selected), dtype=np.int64), beta


def _ridge_refit(x: np.ndarray, y: np.ndarray, support: list[int], lam: float) -> np.ndarray:
    beta = np.zeros(x.shape[1])
    if not support:
        return beta
    xs = x[:, support]
    gram = xs.T @ xs
    gram[np.diag_indices_from(gram)] += lam
    beta[support] = np.linalg.solve(gram, xs.T @ y)
    return beta


@dataclass
class StepwiseResult:
    z: np.ndarray                # flat boolean support, vertex-major
    beta: np.ndarray             # exact coupled refit on that support
    cost: float
    removal_iterations: int
    initial_union_size: int


def stepwise_fit(
    instance: ProblemInstance,
    budget: SparsityBudget,
    seed: int = 0,
    qf: QuadForm | None = None,
) -> StepwiseResult:
    """Feasibility-guaranteed heuristic support for the coupled problem."""
    graph = instance.graph
    t_count = instance.vertex_count
    d_count = instance.feature_count
    budget.validate(t_count, d_count)
    rng = np.random.default_rng(seed)
    if qf is None:
        qf = build_quadform(instance)

    coeffs = np.zeros((t_count, d_count))
    residuals = []
    col_norm2 = np.empty((t_count, d_count))
    for t in range(t_count):
        x_t, y_t = instance.x_blocks[t], instance.y_blocks[t]
        _, beta_t = sparse_ridge_greedy(
            x_t, y_t, budget.max_per_vertex, instance.lambda_beta
        )
        coeffs[t] = beta_t
        residuals.append(y_t - x_t @ beta_t)
        col_norm2[t] = np.einsum("ij,ij->j", x_t, x_t)

    supports = [set(np.flatnonzero(coeffs[t]).tolist()) for t in range(t_count)]
    initial_union = len(set().union(*supports))
    removal_iterations = 0

    while _over_budget(supports, graph, budget):
        if removal_iterations > initial_union:
            raise RuntimeError("removal loop failed to shrink the union support")
        j_star = _weakest_feature(instance, coeffs, residuals, col_norm2, supports)
        for t in range(t_count):
            if j_star not in supports[t]:
                continue
            new_support = supports[t] - {j_star}
            neighbors = graph.neighbors(t)
            if neighbors:
                s = int(neighbors[int(rng.integers(len(neighbors)))])
                candidates = sorted(supports[s] - supports[t] - {j_star})
                if candidates:
                    j_new = int(candidates[int(rng.integers(len(candidates)))])
                    new_support = new_support | {j_new}
            x_t = instance.x_blocks[t]
            beta_t = _ridge_refit(
                x_t, instance.y_blocks[t], sorted(new_support), instance.lambda_beta
            )
            coeffs[t] = beta_t
            residuals[t] = instance.y_blocks[t] - x_t @ beta_t
            supports[t] = set(np.flatnonzero(beta_t).tolist())
        removal_iterations += 1

    z = np.zeros(t_count * d_count, dtype=bool)
    for t in range(t_count):
        for j in supports[t]:
            z[t * d_count + j] = True
    beta = beta_star(qf, z)
    return StepwiseResult(
        z=z,
        beta=beta,
        cost=eval_cost(qf, z),
        removal_iterations=removal_iterations,
        initial_union_size=initial_union,
    )


def _over_budget(supports, graph, budget) -> bool:
    union = set().union(*supports) if supports else set()
    if len(union) > budget.max_global:
        return True
    changes = sum(
        len(supports[s] ^ supports[t]) for s, t in graph.edges
    )
    return changes > budget.max_changes


def _weakest_feature(instance, coeffs, residuals, col_norm2, supports) -> int:
    """Feature whose removal from every vertex raises the objective least.

    The score is the exact change of the full objective when column j is
    zeroed everywhere with no refit: the data term grows by
    2 b_tj x_j'r_t + b_tj^2 |x_j|^2 per vertex while both penalty terms
    release their j contributions.
    """
    t_count, d_count = coeffs.shape
    data = np.zeros(d_count)
    for t in range(t_count):
        colr = instance.x_blocks[t].T @ residuals[t]
        data += 2.0 * coeffs[t] * colr + coeffs[t] ** 2 * col_norm2[t]
    ridge = instance.lambda_beta * np.sum(coeffs**2, axis=0)
    smooth = np.zeros(d_count)
    for s, t in instance.graph.edges:
        smooth += (coeffs[t] - coeffs[s]) ** 2
    smooth *= instance.lambda_delta
    delta = data - ridge - smooth
    union = sorted(set().union(*supports))
    candidates = np.array(union, dtype=np.int64)
    return int(candidates[int(np.argmin(delta[candidates]))])
