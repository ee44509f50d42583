import math

import numpy as np
import pytest

from kmselect.bounds import theorem1_factor, theorem2_factor, theorem3_factor
from kmselect.errors import ArgumentError, RankDeficiencyError
from kmselect.kmeans import Clustering, brute_force_optimal, objective
from kmselect.linalg import sigma_k, spectral_norm
from kmselect.pipelines import (
    randomized_select,
    select_then_cluster,
    stage1_width,
    supervised_select,
    unsupervised_select,
)
from kmselect.sparsify import apply_plan


def zero_error_dataset(rng, k=2, copies=4, n=6):
    base = rng.standard_normal((k, n)) * 5.0
    a = np.vstack([base] * copies)
    labels = tuple((i % k) + 1 for i in range(k * copies))
    return a, Clustering(k * copies, k, labels)


# ---------------------------------------------------------------------------
# supervised pipeline
# ---------------------------------------------------------------------------


def test_supervised_bound_with_exhaustive_backend(rng):
    a = rng.standard_normal((10, 8))
    k, r = 2, 4
    given = brute_force_optimal(a, k)
    fs = supervised_select(a, given, k, r)
    assert fs.reduced.shape == (10, 4)
    out = brute_force_optimal(fs.reduced, k)
    assert objective(a, out) <= theorem1_factor(k, r, 1.0) * objective(a, given) + 1e-9


def test_supervised_zero_error_dataset(rng):
    a, given = zero_error_dataset(rng)
    assert objective(a, given) == pytest.approx(0.0, abs=1e-18)
    fs = supervised_select(a, given, 2, 4)
    out = brute_force_optimal(fs.reduced, 2)
    assert objective(a, out) == pytest.approx(0.0, abs=1e-12)


def test_supervised_deterministic(rng):
    a = rng.standard_normal((9, 7))
    given = brute_force_optimal(a, 2)
    assert supervised_select(a, given, 2, 4).plan == supervised_select(a, given, 2, 4).plan


def test_supervised_argument_errors(rng):
    a = rng.standard_normal((8, 6))
    given = brute_force_optimal(a, 2)
    with pytest.raises(ArgumentError):
        supervised_select(a, given, 2, 2)  # r must exceed k
    with pytest.raises(ArgumentError):
        supervised_select(a, given, 2, 6)  # r must stay below n
    with pytest.raises(ArgumentError):
        supervised_select(a, brute_force_optimal(a, 3), 2, 4)  # k mismatch
    with pytest.raises(ArgumentError):
        supervised_select(a[:6], given, 2, 4)  # m mismatch


def test_supervised_rank_error(rng):
    a = np.outer(rng.standard_normal(8), rng.standard_normal(6))
    given = brute_force_optimal(a, 2)
    with pytest.raises(RankDeficiencyError):
        supervised_select(a, given, 2, 4)


# ---------------------------------------------------------------------------
# unsupervised pipeline
# ---------------------------------------------------------------------------


def test_unsupervised_bound_with_exhaustive_backend(rng):
    a = rng.standard_normal((10, 8))
    k, r = 2, 4
    fs = unsupervised_select(a, k, r)
    out = brute_force_optimal(fs.reduced, k)
    f_opt = objective(a, brute_force_optimal(a, k))
    assert objective(a, out) <= theorem2_factor(8, k, r, 1.0) * f_opt + 1e-9


def test_unsupervised_orthogonal_equal_norm_columns(rng):
    q, _ = np.linalg.qr(rng.standard_normal((8, 8)))
    a = 3.0 * q[:, :5]  # orthogonal columns of equal norm
    k, r = 1, 2
    fs = unsupervised_select(a, k, r)
    sig = sigma_k(apply_plan(fs.basis.T, fs.plan), k)
    assert sig >= 1.0 - math.sqrt(k / r) - 1e-9
    assert spectral_norm(apply_plan(np.eye(5), fs.plan)) <= 1.0 + math.sqrt(5.0 / r) + 1e-9


def test_unsupervised_deterministic(rng):
    a = rng.standard_normal((9, 7))
    assert unsupervised_select(a, 2, 4).plan == unsupervised_select(a, 2, 4).plan


def test_deterministic_pipelines_keep_full_rank(rng):
    for t in range(10):
        local = np.random.default_rng(400 + t)
        a = local.standard_normal((10, 8))
        k = 2
        for fs in (
            unsupervised_select(a, k, 4),
            supervised_select(a, brute_force_optimal(a, k), k, 4),
        ):
            assert sigma_k(apply_plan(fs.basis.T, fs.plan), k) > 0.0


# ---------------------------------------------------------------------------
# randomized pipeline
# ---------------------------------------------------------------------------


def test_randomized_reproducible(rng):
    a = rng.standard_normal((12, 40))
    one = randomized_select(a, 2, 6, seed=11)
    two = randomized_select(a, 2, 6, seed=11)
    assert one.plan == two.plan
    np.testing.assert_array_equal(one.reduced, two.reduced)


def test_stage1_width_constant():
    assert stage1_width(2, 6) == max(6, 119)
    assert stage1_width(2, 300) == 300
    assert stage1_width(2, 6) == math.ceil(16 * 2 * math.log(40.0))


def test_randomized_degenerate_stage1_keeps_everything(rng):
    a = rng.standard_normal((10, 8))
    fs = randomized_select(a, 2, 4, seed=0)
    assert fs.stage1_size == 8  # identity first stage: c >= n
    assert fs.reduced.shape == (10, 4)


def test_randomized_two_stage_composition(rng):
    a = rng.standard_normal((12, 300))
    fs = randomized_select(a, 2, 6, seed=5)
    assert fs.stage1_size == 119
    assert fs.plan.source_dim == 300
    assert fs.plan.target_dim == 6
    np.testing.assert_array_equal(fs.reduced, apply_plan(a, fs.plan))
    assert all(w > 0 for w in fs.plan.weights)


def test_randomized_bound_monte_carlo(rng):
    a = rng.standard_normal((12, 300))
    k, r = 2, 6
    f_opt = objective(a, brute_force_optimal(a, k))
    factor = theorem3_factor(k, r, 1.0)
    hits = 0
    trials = 20
    for seed in range(trials):
        fs = randomized_select(a, k, r, seed=seed)
        out = brute_force_optimal(fs.reduced, k)
        hits += objective(a, out) <= factor * f_opt + 1e-9
    assert hits >= 0.4 * trials


def test_randomized_argument_error(rng):
    with pytest.raises(ArgumentError):
        randomized_select(rng.standard_normal((8, 10)), 3, 3, seed=0)


# ---------------------------------------------------------------------------
# select_then_cluster reports
# ---------------------------------------------------------------------------


def test_report_zero_error_dataset_all_methods(rng):
    a, given = zero_error_dataset(rng)
    for method in ("supervised", "unsupervised", "randomized"):
        report = select_then_cluster(
            a, 2, 4, method=method, backend="brute", seed=1, given=given
        )
        assert report["objective_original"] == pytest.approx(0.0, abs=1e-12)


def test_report_supervised_bound_holds(rng):
    a = rng.standard_normal((10, 8))
    given = brute_force_optimal(a, 2)
    report = select_then_cluster(a, 2, 4, method="supervised", backend="brute", given=given)
    assert report["bound_holds"] is True
    assert report["gamma_certified"] is True
    assert report["bound"]["name"] == "supervised-selection-bound"
    assert report["bound"]["lhs"] == report["objective_original"]
    assert report["objective_reduced"] >= 0.0


def test_report_unsupervised_near_full_selection(rng):
    a = rng.standard_normal((10, 8))
    n, k = 8, 2
    r = n - 1
    report = select_then_cluster(a, k, r, method="unsupervised", backend="brute")
    f_opt = objective(a, brute_force_optimal(a, k))
    factor = theorem2_factor(n, k, r, 1.0)
    assert report["objective_original"] <= factor * f_opt + 1e-9
    assert report["bound_holds"] is True


def test_report_lloyd_backend_certifies_nothing(rng):
    a = rng.standard_normal((30, 10))
    report = select_then_cluster(a, 3, 5, method="unsupervised", backend="lloyd", seed=2)
    assert report["gamma_certified"] is False
    assert report["bound"] is None and report["bound_holds"] is None
    assert report["objective_reduced"] > 0.0


def test_report_validation_errors(rng):
    a = rng.standard_normal((10, 8))
    with pytest.raises(ArgumentError):
        select_then_cluster(a, 2, 4, method="supervised", backend="brute")
    with pytest.raises(ArgumentError):
        select_then_cluster(a, 2, 4, method="nope", backend="brute")
    with pytest.raises(ArgumentError):
        select_then_cluster(a, 2, 4, method="unsupervised", backend="nope")
