"""Independent reference implementations used only to check the library.

Everything here recomputes results from first principles with its own code
paths (plain numpy expressions, exhaustive scans, grid refinement) so the
tests never compare the library against itself.
"""

from __future__ import annotations

import numpy as np


def config_features(configs):
    """Transformed factor columns (n, log2(c_b), g, log2(b_eff)) from configs."""
    n = np.array([c.n_params for c in configs], dtype=float)
    cb = np.array([c.c_b for c in configs], dtype=float)
    g = np.array([c.g for c in configs], dtype=float)
    w = np.array([c.w_base for c in configs], dtype=float)
    bs = np.array([c.b_s for c in configs], dtype=float)
    bz = np.array([c.b_z for c in configs], dtype=float)
    beff = w + (bs + bz) / g
    return {"n": n, "c_b": np.log2(cb), "g": g, "b_eff": np.log2(beff)}


def power_law_values(theta, feats, factor_names):
    """c * prod(t_k ** e_k) evaluated with plain numpy."""
    values = np.full(len(next(iter(feats.values()))), theta[0])
    for position, name in enumerate(factor_names, start=1):
        values = values * feats[name] ** theta[position]
    return values


def grid_refine_minimizer(y, feats, factor_names, sweeps=400, radius0=0.1, tol=1e-12):
    """Coordinate-descent least squares, independent of any Newton-type path.

    Each exponent is refined on a shrinking 17-point grid while the constant
    is profiled out in closed form (the model is linear in c). Converges to
    the same interior minimum as a damped Gauss-Newton run on this smooth,
    locally quadratic objective.
    """
    y = np.asarray(y, dtype=float)

    def best_c(exponents):
        basis = np.ones_like(y)
        for name, exponent in zip(factor_names, exponents):
            basis = basis * feats[name] ** exponent
        return float(np.dot(basis, y) / np.dot(basis, basis)), basis

    def sse_at(exponents):
        c, basis = best_c(exponents)
        return float(np.sum((y - c * basis) ** 2))

    # start from log-space least squares
    columns = [np.ones_like(y)] + [np.log(feats[name]) for name in factor_names]
    coefficients, *_ = np.linalg.lstsq(np.column_stack(columns), np.log(y), rcond=None)
    exponents = np.asarray(coefficients[1:], dtype=float)

    radius = np.full(len(factor_names), radius0)
    for _ in range(sweeps):
        for j in range(len(factor_names)):
            grid = np.linspace(exponents[j] - radius[j], exponents[j] + radius[j], 17)
            costs = []
            for value in grid:
                trial = exponents.copy()
                trial[j] = value
                costs.append(sse_at(trial))
            best = int(np.argmin(costs))
            exponents[j] = grid[best]
            if 0 < best < 16:
                radius[j] = max(radius[j] * 0.35, 1e-14)
            else:
                radius[j] *= 2.0
        if radius.size and float(np.max(radius)) < tol:
            break
    c, basis = best_c(exponents) if len(factor_names) else (float(np.mean(y)), np.ones_like(y))
    return np.concatenate([[c], exponents]), sse_at(exponents)


def brute_force_frontier_indices(accuracies, storages):
    """O(n^2) dominance scan: indices of non-dominated points.

    A point is dominated if some other point has accuracy >= and storage <=
    with at least one strict.
    """
    keep = []
    n = len(accuracies)
    for i in range(n):
        dominated = False
        for j in range(n):
            if j == i:
                continue
            if (
                accuracies[j] >= accuracies[i]
                and storages[j] <= storages[i]
                and (accuracies[j] > accuracies[i] or storages[j] < storages[i])
            ):
                dominated = True
                break
        if not dominated:
            keep.append(i)
    return keep


def central_difference_jacobian(evaluate, theta, rel_step=1e-6):
    """Central finite differences of a scalar function of a parameter vector."""
    theta = np.asarray(theta, dtype=float)
    partials = np.empty_like(theta)
    for j in range(len(theta)):
        h = rel_step * abs(theta[j])
        assert h > 0, "relative step needs a nonzero parameter"
        up = theta.copy()
        down = theta.copy()
        up[j] += h
        down[j] -= h
        partials[j] = (evaluate(up) - evaluate(down)) / (2.0 * h)
    return partials
