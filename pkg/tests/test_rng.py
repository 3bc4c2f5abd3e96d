"""Bit-level checks for the in-repo SplitMix64 generator and FNV hashing."""

import pytest

from xmai.rng import MASK64, SplitMix64, derive_stream, fnv1a64, splitmix64_next

# First three outputs for seed 0 in the published reference implementation.
SEED0_OUTPUTS = (
    0xE220A8397B1DCDAF,
    0x6E789E6AA1B965F4,
    0x06C45D188009454F,
)


def test_seed_zero_golden_sequence():
    rng = SplitMix64(0)
    assert tuple(rng.next_u64() for _ in range(3)) == SEED0_OUTPUTS


def test_functional_and_stateful_agree():
    state = 12345
    rng = SplitMix64(12345)
    for _ in range(20):
        value, state = splitmix64_next(state)
        assert rng.next_u64() == value


def test_outputs_stay_in_64_bits():
    rng = SplitMix64(2**64 - 1)
    for _ in range(50):
        assert 0 <= rng.next_u64() <= MASK64


def test_next_float_range_and_determinism():
    a = SplitMix64(99)
    b = SplitMix64(99)
    values = [a.next_float() for _ in range(200)]
    assert values == [b.next_float() for _ in range(200)]
    assert all(0.0 <= v < 1.0 for v in values)
    assert len(set(values)) > 190  # not degenerate


def test_randbelow_bounds():
    rng = SplitMix64(7)
    seen = {rng.randbelow(5) for _ in range(200)}
    assert seen == {0, 1, 2, 3, 4}
    with pytest.raises(ValueError):
        rng.randbelow(0)


def test_choice():
    rng = SplitMix64(3)
    items = ["a", "b", "c"]
    assert all(rng.choice(items) in items for _ in range(20))
    with pytest.raises(ValueError):
        rng.choice([])


def test_shuffle_is_permutation_and_deterministic():
    items = list(range(10))
    first = items[:]
    SplitMix64(42).shuffle(first)
    second = items[:]
    SplitMix64(42).shuffle(second)
    assert first == second
    assert sorted(first) == items
    assert first != items  # astronomically unlikely to be identity


def test_fnv1a64_known_values():
    # Standard FNV-1a 64-bit test vectors.
    assert fnv1a64("") == 0xCBF29CE484222325
    assert fnv1a64("a") == 0xAF63DC4C8601EC8C
    assert fnv1a64(b"a") == fnv1a64("a")


def test_derive_stream_independent_of_sibling_labels():
    # The stream for one label never changes when other labels are drawn first.
    alone = derive_stream(5, "x2").next_u64()
    derive_stream(5, "x1").next_u64()
    assert derive_stream(5, "x2").next_u64() == alone


def test_derive_stream_distinct_labels_distinct_streams():
    a = derive_stream(0, "ex1")
    b = derive_stream(0, "ex2")
    assert [a.next_u64() for _ in range(4)] != [b.next_u64() for _ in range(4)]
