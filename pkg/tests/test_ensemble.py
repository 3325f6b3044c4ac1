import numpy as np
import pytest
from numpy.testing import assert_allclose

from kerrcat.exceptions import InvalidArgumentError
from kerrcat.fock import vacuum
from kerrcat.trajectories import EnsembleAccumulator, TrajectoryRecord, ensemble, run_trajectory, trajectory_seed

TIMES = np.linspace(0.0, 1.0, 5)


def record(n: list[float], p: list[float]) -> TrajectoryRecord:
    return TrajectoryRecord(seed=0, dt=0.25, times=TIMES, photon_number=np.array(n), parity=np.array(p))


def test_seeds_are_stable_and_distinct():
    assert trajectory_seed(7, 3) == trajectory_seed(7, 3)
    seeds = {trajectory_seed(7, i) for i in range(100)}
    assert len(seeds) == 100
    assert trajectory_seed(7, 0) != trajectory_seed(8, 0)


def test_merge_is_associative():
    a = EnsembleAccumulator.from_record(record([0, 1, 2, 3, 4], [1, 1, -1, -1, 1]))
    b = EnsembleAccumulator.from_record(record([1, 1, 1, 1, 1], [1, -1, 1, -1, 1]))
    c = EnsembleAccumulator.from_record(record([2, 0, 2, 0, 2], [-1, -1, -1, 1, 1]))
    left, right = a.merge(b).merge(c), a.merge(b.merge(c))
    assert left.count == right.count == 3
    for name in ('sum_n', 'sum_n2', 'sum_p', 'sum_p2'):
        assert_allclose(getattr(left, name), getattr(right, name))
    assert EnsembleAccumulator.empty(TIMES).merge(a).count == 1


def test_summary_statistics():
    a = EnsembleAccumulator.from_record(record([0, 0, 0, 0, 0], [1, 1, 1, 1, 1]))
    b = EnsembleAccumulator.from_record(record([2, 2, 2, 2, 2], [-1, -1, -1, -1, -1]))
    single = a.summary()
    assert_allclose(single.stderr_photon_number, 0.0)
    pair = a.merge(b).summary()
    assert_allclose(pair.mean_photon_number, 1.0)
    assert_allclose(pair.mean_parity, 0.0)
    # sample std sqrt(2) over sqrt(2)
    assert_allclose(pair.stderr_photon_number, 1.0)


def test_merge_rejects_other_grid():
    a = EnsembleAccumulator.from_record(record([0] * 5, [1] * 5))
    with pytest.raises(InvalidArgumentError):
        a.merge(EnsembleAccumulator.empty(np.linspace(0, 2, 5)))
    with pytest.raises(InvalidArgumentError):
        EnsembleAccumulator.empty(TIMES).summary()


def test_single_trajectory_ensemble(small_params):
    summary = ensemble(small_params, vacuum(20), 1.0, 1e-3, 1, master_seed=5, output_dt=0.01)
    single = run_trajectory(small_params, vacuum(20), 1.0, 1e-3, trajectory_seed(5, 0), output_dt=0.01)
    assert summary.count == 1
    assert np.array_equal(summary.mean_photon_number, single.photon_number)
    assert np.array_equal(summary.mean_parity, single.parity)
    assert_allclose(summary.stderr_parity, 0.0)


def test_worker_count_does_not_change_result(small_params):
    serial = ensemble(small_params, vacuum(20), 1.0, 1e-3, 20, master_seed=1, workers=1, output_dt=0.05)
    parallel = ensemble(small_params, vacuum(20), 1.0, 1e-3, 20, master_seed=1, workers=3, output_dt=0.05)
    assert np.array_equal(serial.mean_photon_number, parallel.mean_photon_number)
    assert np.array_equal(serial.stderr_parity, parallel.stderr_parity)


def test_rejects_empty_ensemble(small_params):
    with pytest.raises(InvalidArgumentError):
        ensemble(small_params, vacuum(10), 1.0, 1e-3, 0, master_seed=0)


def test_rejects_zero_workers(small_params):
    with pytest.raises(InvalidArgumentError):
        ensemble(small_params, vacuum(10), 1.0, 1e-3, 4, master_seed=0, workers=0)


@pytest.mark.slow
def test_standard_error_shrinks_with_count(small_params):
    small = ensemble(small_params, vacuum(20), 2.0, 1e-3, 100, master_seed=3, output_dt=0.1)
    large = ensemble(small_params, vacuum(20), 2.0, 1e-3, 400, master_seed=3, output_dt=0.1)
    ratio = np.mean(large.stderr_photon_number[5:]) / np.mean(small.stderr_photon_number[5:])
    assert ratio == pytest.approx(0.5, rel=0.3)
