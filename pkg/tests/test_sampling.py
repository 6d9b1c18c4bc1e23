import numpy as np
import pytest

from pgrec.data.sampling import sample_negatives
from pgrec.data.types import InteractionSet
from pgrec.errors import InsufficientNegativesError


@pytest.fixture
def positives():
    return InteractionSet.from_entries(
        [(0, 1, 1.0), (0, 4, 1.0), (1, 2, 1.0), (2, 0, 1.0), (2, 7, 1.0)]
    )


def test_negatives_avoid_interacted_items(positives):
    samples = sample_negatives(positives, 5, seed=1, n_items=20)
    by_row = positives.cols_by_row()
    for sample in samples:
        assert len(sample.neg_items) == 5
        assert len(set(sample.neg_items.tolist())) == 5
        assert not set(sample.neg_items.tolist()) & set(by_row[sample.row].tolist())
        assert sample.neg_items.min() >= 0 and sample.neg_items.max() < 20


def test_exclude_adds_forbidden_items(positives):
    exclude = InteractionSet.from_entries([(1, i, 1.0) for i in range(3, 10)])
    samples = sample_negatives(positives, 12, seed=0, n_items=20, exclude=exclude)
    row1 = [s for s in samples if s.row == 1][0]
    assert set(row1.neg_items.tolist()) == set(range(20)) - {2} - set(range(3, 10))


def test_keyed_samples_do_not_depend_on_other_cases(positives):
    full = sample_negatives(positives, 4, seed=9, n_items=50)
    alone = sample_negatives(
        InteractionSet.from_entries([(1, 2, 1.0)]), 4, seed=9, n_items=50
    )
    row1 = [s for s in full if s.row == 1][0]
    np.testing.assert_array_equal(row1.neg_items, alone[0].neg_items)


def test_same_seed_same_samples(positives):
    for keyed in (True, False):
        a = sample_negatives(positives, 3, seed=5, n_items=30, keyed=keyed)
        b = sample_negatives(positives, 3, seed=5, n_items=30, keyed=keyed)
        for x, y in zip(a, b):
            np.testing.assert_array_equal(x.neg_items, y.neg_items)


def test_too_few_eligible_items(positives):
    with pytest.raises(InsufficientNegativesError) as err:
        sample_negatives(positives, 19, seed=0, n_items=20)
    assert err.value.row in (0, 2)
