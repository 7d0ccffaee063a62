import numpy as np
import pytest

from conftest import make_scen
from ucbenders.benders import BendersConfig, run
from ucbenders.cuts import (
    Cut,
    CutError,
    CutPool,
    FEATURE_NAMES,
    LABEL_NON_USEFUL,
    LABEL_USEFUL,
    apply_retention,
    cost_scale,
    cut_features,
    filter_by_criterion,
    label_by_replay,
    load_cut_archive,
    load_label_table,
    pool_stats,
    save_cut_archive,
    save_label_records,
)
from ucbenders.scenarios import ScenarioSet


def _cut(scenario, j_sp, duals, anchor, iteration=1):
    return Cut(scenario=scenario, iteration=iteration, j_sp=j_sp,
               duals=np.array(duals, dtype=float),
               anchor_u=np.array(anchor, dtype=int))


def test_cut_value_arithmetic():
    cut = _cut(0, 100.0, [[2.0, -3.0]], [[1, 0]])
    # psi(u) = 100 + 2*(u00-1) - 3*(u01-0)
    assert cut.value(np.array([[1, 0]])) == pytest.approx(100.0)
    assert cut.value(np.array([[0, 1]])) == pytest.approx(95.0)
    with pytest.raises(CutError):
        cut.value(np.array([[1, 0, 0]]))


def test_est_bytes_counts_nonzeros():
    cut = _cut(0, 1.0, [[2.0, 0.0, -1.0]], [[0, 0, 0]])
    assert cut.est_bytes() == 2 * 8 + 64


def _two_scen(base_total=(100.0, 50.0)):
    d0 = np.full((1, 1), base_total[0])
    d1 = np.full((1, 1), base_total[1])
    return ScenarioSet([d0, d1], np.array([0.5, 0.5]))


def test_filter_by_criterion_boundary():
    pool = CutPool()
    u = np.array([[1]])
    # psi values at u: 10, 13, 10+delta exactly
    cuts = [_cut(0, 10.0, [[0.0]], [[1]]),
            _cut(1, 13.0, [[0.0]], [[1]]),
            _cut(0, 11.0, [[0.0]], [[1]])]
    pool.add_iteration(cuts)
    alpha = np.array([10.0, 10.0])
    useful, non_useful = filter_by_criterion(pool, 1, u, alpha, delta=1.0)
    # |10-10|=0 keep, |10-13|=3 drop, |10-11|=1 keeps at the boundary
    assert cuts[0] in useful and cuts[2] in useful
    assert non_useful == [cuts[1]]
    assert cuts[1].label == LABEL_NON_USEFUL
    assert not cuts[1].retained


def test_filter_monotone_in_delta():
    u = np.array([[1]])
    alpha = np.array([0.0])
    rng = np.random.default_rng(3)
    j_vals = rng.uniform(0, 50, size=30)
    kept_counts = []
    for delta in (0.1, 1.0, 5.0, 20.0, 100.0):
        pool = CutPool()
        pool.add_iteration([_cut(0, j, [[0.0]], [[1]]) for j in j_vals])
        useful, _ = filter_by_criterion(pool, 1, u, alpha, delta)
        kept_counts.append(len(useful))
    assert kept_counts == sorted(kept_counts)  # larger delta keeps more


def test_retention_restores_high_load_cuts():
    scen = _two_scen((100.0, 50.0))
    pool = CutPool()
    cuts = [_cut(0, 1.0, [[0.0]], [[1]]), _cut(1, 2.0, [[0.0]], [[1]])]
    pool.add_iteration(cuts)
    for c in cuts:
        pool.drop(c)
    apply_retention(pool, scen, r=1, iteration=1)
    # scenario 0 carries more load, so its cut comes back
    assert cuts[0].retained and not cuts[1].retained


def test_retention_tie_breaks_low_id():
    scen = _two_scen((80.0, 80.0))
    pool = CutPool()
    cuts = [_cut(0, 1.0, [[0.0]], [[1]]), _cut(1, 2.0, [[0.0]], [[1]])]
    pool.add_iteration(cuts)
    for c in cuts:
        pool.drop(c)
    apply_retention(pool, scen, r=1, iteration=1)
    assert cuts[0].retained and not cuts[1].retained


def test_retention_always_keeps_one():
    scen = _two_scen()
    pool = CutPool()
    cut = _cut(1, 2.0, [[0.0]], [[1]])
    pool.add(cut)
    pool.drop(cut)
    apply_retention(pool, scen, r=0, iteration=1)
    assert cut.retained


def test_pool_stats_fractions():
    pool = CutPool()
    for i in range(224):
        c = _cut(0, float(i), [[0.0]], [[1]], iteration=1)
        c.label = LABEL_USEFUL if i < 103 else LABEL_NON_USEFUL
        pool.add(c)
    stats = pool_stats(pool)
    assert stats["total"] == 224
    assert stats["useful"] == 103
    assert stats["fraction"] == pytest.approx(0.46, abs=0.005)

    pool2 = CutPool()
    for i in range(2280):
        c = _cut(0, float(i), [[0.0]], [[1]], iteration=1)
        c.label = LABEL_USEFUL if i < 288 else LABEL_NON_USEFUL
        pool2.add(c)
    assert pool_stats(pool2)["fraction"] == pytest.approx(0.126, abs=0.001)


def test_cut_features_shape(desk1):
    scen = make_scen(desk1, n=2, seed=0)
    cut = _cut(0, 500.0, np.zeros((2, 3)), np.ones((2, 3), dtype=int))
    cut.alpha_at_gen = 450.0
    feats = cut_features(desk1, scen, cut, iteration_cap=400)
    assert feats.shape == (len(FEATURE_NAMES),)
    assert np.isfinite(feats).all()
    assert cost_scale(desk1) >= 1.0


def test_replay_labels_and_solve_count(desk1, desk1_sf, highs):
    scen = make_scen(desk1, n=3, seed=2)
    rep = run("conventional", desk1, scen, BendersConfig(), desk1_sf, backend=highs)
    counter = {}
    records = label_by_replay(desk1, scen, rep.pool, rep.alpha_floors, highs,
                              counter=counter)
    assert counter["solves"] == rep.pool.total  # one master solve per cut
    assert len(records) == rep.pool.total
    for r in records:
        expected = LABEL_USEFUL if r.lb_gain > 1e-6 else LABEL_NON_USEFUL
        assert r.label == expected
    assert any(r.label == LABEL_USEFUL for r in records)


def test_archive_round_trip(desk1, desk1_sf, highs, tmp_path):
    scen = make_scen(desk1, n=2, seed=1)
    rep = run("conventional", desk1, scen, BendersConfig(), desk1_sf, backend=highs)
    path = tmp_path / "cuts.json"
    save_cut_archive(rep.pool, path)
    again = load_cut_archive(path)
    assert again.total == rep.pool.total
    for a, b in zip(rep.pool.cuts, again.cuts):
        assert a.key == b.key
        assert a.j_sp == pytest.approx(b.j_sp)
        assert np.allclose(a.duals, b.duals)
        assert np.array_equal(a.anchor_u, b.anchor_u)
        assert a.retained == b.retained


def test_label_records_round_trip(desk1, desk1_sf, highs, tmp_path):
    scen = make_scen(desk1, n=2, seed=1)
    rep = run("conventional", desk1, scen, BendersConfig(), desk1_sf, backend=highs)
    records = label_by_replay(desk1, scen, rep.pool, rep.alpha_floors, highs)
    path = tmp_path / "labels.csv"
    save_label_records(records, path)
    X, y = load_label_table(path)
    assert X.shape == (len(records), len(FEATURE_NAMES))
    assert set(np.unique(y)) <= {0.0, 1.0}
    assert y.sum() == sum(1 for r in records if r.label == LABEL_USEFUL)


def test_empty_label_table(tmp_path):
    path = tmp_path / "empty.csv"
    path.write_text("scenario,iteration," + ",".join(FEATURE_NAMES) + ",label,lb_gain\n")
    with pytest.raises(CutError):
        load_label_table(path)
