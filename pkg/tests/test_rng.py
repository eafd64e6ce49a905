import numpy as np
import pytest

from ddbounds.rng import GAMMA, PortableRng, child_seed


def reference_stream(seed, n):
    """Independent scalar SplitMix64, straight from the published recipe."""
    mask = 0xFFFFFFFFFFFFFFFF
    out = []
    state = seed & mask
    for _ in range(n):
        state = (state + GAMMA) & mask
        z = state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & mask
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & mask
        out.append(z ^ (z >> 31))
    return out


def test_matches_reference_recipe():
    rng = PortableRng(42)
    assert [rng.next_u64() for _ in range(20)] == reference_stream(42, 20)


def test_scalar_and_block_uniforms_agree():
    a = PortableRng(7)
    b = PortableRng(7)
    xs = [a.uniform() for _ in range(257)]
    assert np.array_equal(np.array(xs), b.uniforms(257))


def test_uniform_range_and_determinism():
    u = PortableRng(123).uniforms(10_000)
    assert np.all(u >= 0.0) and np.all(u < 1.0)
    assert np.array_equal(u, PortableRng(123).uniforms(10_000))


@pytest.mark.parametrize("n", [1, 2, 3, 64, 1001])
def test_gaussians_bulk_matches_scalar(n):
    a = PortableRng(99)
    b = PortableRng(99)
    scalar = np.array([a.gauss() for _ in range(n)])
    assert np.array_equal(scalar, b.gaussians(n))
    # the two generators must also be in the same stream position afterwards
    assert a.uniform() == b.uniform()


def test_gaussians_resume_mid_stream():
    a = PortableRng(5)
    b = PortableRng(5)
    first = np.array([a.gauss() for _ in range(7)])
    out_b = b.gaussians(3)
    out_b2 = b.gaussians(4)
    assert np.array_equal(first, np.concatenate([out_b, out_b2]))


def test_gaussian_moments():
    g = PortableRng(2024).gaussians(200_000)
    assert abs(g.mean()) < 0.01
    assert abs(g.std() - 1.0) < 0.01


def test_child_seed_distinct():
    seeds = {child_seed(1, i) for i in range(100)}
    seeds |= {child_seed(1, i, j) for i in range(10) for j in range(10)}
    assert len(seeds) == 200
    assert child_seed(1, 3) != child_seed(1, 3, 0)
    assert child_seed(1, 3) == child_seed(1, 3)


def test_sample_without_replacement():
    rng = PortableRng(11)
    idx = rng.sample_without_replacement(100, 32)
    assert len(set(idx.tolist())) == 32
    assert idx.min() >= 0 and idx.max() < 100
    with pytest.raises(ValueError):
        PortableRng(0).sample_without_replacement(3, 5)


def test_integer_bounds():
    rng = PortableRng(8)
    vals = [rng.integer(7) for _ in range(1000)]
    assert min(vals) >= 0 and max(vals) <= 6
    assert len(set(vals)) == 7
