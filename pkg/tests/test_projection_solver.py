import numpy as np
import pytest

from scpo.projection import (
    FEASIBILITY_TOL,
    ProjectionStatus,
    UpdateBank,
    build_problem,
    solve_projection,
)


# ---------------------------------------------------------------------------
# Helpers
# ---------------------------------------------------------------------------


def bank_from(deltas, gs, g_ref, capacity=8):
    bank = UpdateBank(capacity=capacity, reference_g=g_ref)
    for delta, g in zip(deltas, gs):
        bank.append(delta, g)
    return bank


def _lattice(axis, m):
    return np.stack(np.meshgrid(*([axis] * m), indexing="ij"), axis=-1).reshape(-1, m)


def _grid_best(problem, C):
    S, diag_s = problem.S, problem.diag_s
    lin = (1.0 - C.sum(axis=1))[:, None] * problem.g_ref[None, :] + C @ problem.G.T
    quad = np.einsum("ni,ij,nj->n", C, S, C) + np.abs(C) @ diag_s
    cons = lin + 0.5 * quad[:, None] * problem.L[None, :]
    C = C[np.all(cons <= 0.0, axis=1)]
    R = C - problem.gram.e_m
    values = np.einsum("ni,ij,nj->n", R, S, R)
    best = int(np.argmin(values))
    return float(values[best]), C[best]


def grid_oracle(problem, lo=-3.0, hi=3.0, step=0.01, refinements=0):
    """
    Best feasible objective over a regular grid of coefficient vectors, then over
    successively 10x finer grids centered on the incumbent. Every grid point that
    counts is feasible, so the result never undercuts the true optimum.
    """
    axis = np.arange(lo, hi + step / 2, step)
    best, center = _grid_best(problem, _lattice(axis, problem.m))
    offsets = np.arange(-10, 11)
    for _ in range(refinements):
        step /= 10.0
        C = center + step * _lattice(offsets, problem.m)
        value, point = _grid_best(problem, C)
        if value < best:
            best, center = value, point
    return best


# ---------------------------------------------------------------------------
# Closed-form cases
# ---------------------------------------------------------------------------


def test_raw_step_returned_when_feasible():
    bank = UpdateBank.seeded(4, 1, [-1.0])
    bank.append([1.0], [-0.9])
    result = solve_projection(build_problem(bank))

    assert result.status is ProjectionStatus.RAW_STEP_FEASIBLE
    assert result.c_star.tolist() == [0.0, 1.0]
    assert result.delta_star.tolist() == [1.0]
    assert result.objective == 0.0


def test_one_dimensional_projection_hits_the_boundary():
    # -1 + 2c + c^2/2 <= 0 on c >= 0, nearest to c = 1 is sqrt(6) - 2
    bank = bank_from([[1.0]], [[0.5]], [-1.0])
    problem = build_problem(bank, L=[1.0])
    result = solve_projection(problem)

    assert result.status is ProjectionStatus.PROJECTED
    assert result.c_star[0] == pytest.approx(np.sqrt(6.0) - 2.0, abs=1e-3)
    assert result.max_constraint <= FEASIBILITY_TOL
    assert result.objective <= grid_oracle(problem, lo=-1.0, hi=1.0, step=1e-4) + 1e-6


def test_singular_gram():
    # two identical directions; c1 = 1, c2 = 0 reaches objective 0
    bank = bank_from([[1.0, 0.0], [1.0, 0.0]], [[-0.5], [2.0]], [-1.0])
    result = solve_projection(build_problem(bank))

    assert result.status is ProjectionStatus.PROJECTED
    assert result.objective <= 1e-6
    assert result.max_constraint <= FEASIBILITY_TOL
    np.testing.assert_allclose(result.delta_star, [1.0, 0.0], atol=1e-3)


def test_every_column_inactive_gives_zero_step():
    bank = bank_from([[1.0], [2.0]], [[np.inf], [np.inf]], [-1.0])
    result = solve_projection(build_problem(bank))
    assert result.status is ProjectionStatus.ZERO_STEP
    assert result.is_zero
    assert result.max_constraint == -1.0


def test_only_zero_columns_active_gives_zero_step():
    bank = UpdateBank.seeded(4, 2, [-1.0])
    bank.append([1.0, 1.0], [np.inf])
    result = solve_projection(build_problem(bank))
    assert result.status is ProjectionStatus.ZERO_STEP
    assert result.delta_star.tolist() == [0.0, 0.0]


def test_inactive_columns_keep_zero_weight():
    bank = bank_from([[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]], [[-0.2], [np.inf], [3.0]], [-1.0])
    result = solve_projection(build_problem(bank))
    assert result.c_star[1] == 0.0
    assert result.max_constraint <= FEASIBILITY_TOL


# ---------------------------------------------------------------------------
# Random instances against the grid oracle
# ---------------------------------------------------------------------------


def test_random_instances_match_grid_oracle():
    rng = np.random.default_rng(2024)
    for _ in range(200):
        m = int(rng.integers(1, 4))
        k = int(rng.integers(1, 5))
        g_ref = -rng.uniform(0.1, 2.0, size=k)
        bank = bank_from(rng.normal(size=(m, 4)), rng.normal(size=(m, k)), g_ref)
        problem = build_problem(bank, L=rng.uniform(0.0, 2.0, size=k))
        result = solve_projection(problem)

        assert result.status in (ProjectionStatus.RAW_STEP_FEASIBLE, ProjectionStatus.PROJECTED)
        assert result.max_constraint <= FEASIBILITY_TOL
        assert result.objective <= grid_oracle(problem, step=0.1, refinements=3) + 1e-4

        # c = 0 is feasible and the feasible set is convex
        for kappa in np.linspace(0.0, 1.0, 21):
            assert problem.max_violation(kappa * result.c_star) <= FEASIBILITY_TOL


def test_result_serializes():
    bank = bank_from([[1.0]], [[0.5]], [-1.0])
    data = solve_projection(build_problem(bank, L=[1.0])).to_dict()
    assert data["status"] == "projected"
    assert len(data["c_star"]) == 1
    assert data["newton_steps"] > 0
