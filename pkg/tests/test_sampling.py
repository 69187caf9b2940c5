import numpy as np
import pytest
from scipy.stats import chisquare

from src.features.sampling import AliasTable, UnigramTable
from src.validators import ValidationError


def test_alias_table_encodes_weights_exactly():
    weights = [0.5, 3.0, 0.0, 1.5, 5.0]
    table = AliasTable(weights)
    np.testing.assert_allclose(table.probabilities(), np.array(weights) / sum(weights), atol=1e-12)


def test_alias_draws_pass_chi_square():
    weights = np.array([1.0, 2.0, 3.0, 4.0])
    table = AliasTable(weights)
    draws = table.draw_many(np.random.default_rng(5), 100_000)
    observed = np.bincount(draws, minlength=4)
    _, p = chisquare(observed, 100_000 * weights / weights.sum())
    assert p > 0.001


def test_single_draws_agree_with_batch_distribution():
    table = AliasTable([1.0, 1.0, 2.0])
    rng = np.random.default_rng(0)
    observed = np.bincount([table.draw(rng) for _ in range(20_000)], minlength=3)
    _, p = chisquare(observed, [5_000, 5_000, 10_000])
    assert p > 0.001


def test_zero_weight_never_drawn():
    table = AliasTable([0.0, 1.0, 0.0, 1.0])
    draws = table.draw_many(np.random.default_rng(1), 10_000)
    assert set(np.unique(draws)) <= {1, 3}


@pytest.mark.parametrize("weights", [[], [0.0, 0.0], [1.0, -1.0], [1.0, np.nan]])
def test_invalid_weights(weights):
    with pytest.raises(ValidationError):
        AliasTable(weights)


def test_unigram_table_uses_three_quarter_power():
    table = UnigramTable([1, 16, 81])
    draws = table.draw(np.random.default_rng(2), 72_000)
    observed = np.bincount(draws, minlength=3)
    # 1, 16 ** 0.75, 81 ** 0.75 = 1, 8, 27
    _, p = chisquare(observed, [2_000, 16_000, 54_000])
    assert p > 0.001
