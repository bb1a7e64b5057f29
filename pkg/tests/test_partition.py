"""Measured-first reordering tests: permutation oracles and round trips."""
import numpy as np
import pytest

from vibsense import (
    BeamSpec,
    MeasuredModalCoordinate,
    PartitionedModel,
    UnknownLabel,
    build_cantilever_beam,
    partition_by_labels,
    reduce_model,
    reorder,
)


@pytest.fixture(scope="module")
def reduced():
    model = build_cantilever_beam(BeamSpec(n_elements=10))
    part = partition_by_labels(model, ["3:w", "6:w", "10:w"])
    return reduce_model(model, part, n_modes=4, damping_a=0.2, damping_b=1e-5)


def test_explicit_permutation_oracle(reduced):
    # measured = second master only -> ordering [1, 0, 2, ...modal]
    pm = reorder(reduced, ["6:w"])
    np.testing.assert_array_equal(pm.permutation[:3], [1, 0, 2])
    assert pm.k[0, 0] == reduced.k[1, 1]
    assert pm.m[0, 0] == reduced.m[1, 1]
    assert pm.labels[:3] == ("6:w", "3:w", "10:w")
    assert pm.labels[3:] == ("q0", "q1", "q2", "q3")


def test_all_masters_measured(reduced):
    pm = reorder(reduced, list(reduced.master_labels))
    assert pm.n_measured == 3
    nm = pm.n_measured
    # unmeasured block holds only modal coordinates
    np.testing.assert_array_equal(pm.k[nm:, nm:], reduced.k[nm:, nm:])
    np.testing.assert_array_equal(pm.k[:nm, :nm], reduced.k[:nm, :nm])


def test_round_trip_bit_identical(reduced):
    pm = reorder(reduced, ["10:w", "3:w"])
    np.testing.assert_array_equal(pm.to_reduced_order(pm.k), reduced.k)
    np.testing.assert_array_equal(pm.to_reduced_order(pm.m), reduced.m)
    np.testing.assert_array_equal(pm.to_reduced_order(pm.c), reduced.c)


def test_eigenvalues_preserved_as_multiset(reduced):
    pm = reorder(reduced, ["10:w"])
    full = np.sort(np.linalg.eigvalsh(reduced.k))
    perm = np.sort(np.linalg.eigvalsh(pm.k))
    np.testing.assert_allclose(perm, full, rtol=1e-10)


def test_block_views_tile(reduced):
    pm = reorder(reduced, ["3:w", "10:w"])
    nm = pm.n_measured
    mm, mu, uu = pm.blocks(pm.k)
    rebuilt = np.block([[mm, mu], [mu.T, uu]])
    np.testing.assert_array_equal(rebuilt, pm.k)
    assert pm.k_mm.shape == (nm, nm)


def test_measured_order_follows_user(reduced):
    pm = reorder(reduced, ["10:w", "3:w"])
    assert pm.measured_labels == ("10:w", "3:w")
    assert pm.k[0, 0] == reduced.k[2, 2]


def test_unknown_label(reduced):
    with pytest.raises(UnknownLabel):
        reorder(reduced, ["99:w"])


def test_measured_modal_coordinate(reduced):
    # 5:w exists in the full model but was condensed into modal coordinates
    with pytest.raises(MeasuredModalCoordinate):
        reorder(reduced, ["5:w"])


def test_duplicate_measured(reduced):
    with pytest.raises(ValueError):
        reorder(reduced, ["10:w", "10:w"])


def test_empty_measured(reduced):
    with pytest.raises(ValueError):
        reorder(reduced, [])


def test_from_matrices():
    m = np.diag([1.0, 2.0])
    k = np.array([[3.0, -1.0], [-1.0, 2.0]])
    pm = PartitionedModel.from_matrices(m, np.zeros((2, 2)), k, n_measured=1)
    assert pm.n == 2 and pm.n_measured == 1
    np.testing.assert_array_equal(pm.k, k)
    assert pm.labels == ("0:x", "1:x")
