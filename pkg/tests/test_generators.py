"""Tests for the configuration-family generators."""

import numpy as np
import pytest

from geomlab.generators import (GeneratorSpec, build, gen_concurrent_star,
                                gen_grid_packing, gen_greedy_concurrent,
                                gen_kstar, gen_random, gen_rectangle_example,
                                gen_tube_example)
from geomlab.incidence import count_naive, max_concurrency
from geomlab.planar import Point2, Scale, save_point_set, validate_separation


def test_grid_packing_counts():
    assert len(gen_grid_packing(0.5)) == 25
    assert len(gen_grid_packing(1.0 - 1e-12)) == 9
    assert len(gen_grid_packing(2.0 ** -3, region=(0, 0.25, 0, 0.125))) == 6


def test_grid_packing_empty_region():
    assert len(gen_grid_packing(0.25, region=(0.5, 0.4, 0, 1))) == 0


def test_tube_example_sizes_and_counts():
    delta = 2.0 ** -8
    P, L = gen_tube_example(delta)
    assert 12 <= len(P) <= 20
    assert 12 <= len(L) <= 20
    assert validate_separation(P).ok and validate_separation(L).ok
    count = count_naive(P, L, Scale(delta)).count
    assert 0.25 / delta <= count <= 4.0 / delta
    ratio = count_naive(P, L, Scale(delta)).normalized_ratio
    assert 0.05 <= ratio <= 20.0
    with pytest.raises(ValueError):
        gen_tube_example(0.25)


def test_rectangle_example():
    delta = 2.0 ** -6
    P, L = gen_rectangle_example(delta, 1.0, delta)  # degenerates to a 1 x delta tube
    assert 0.5 / delta <= len(P) <= 4.0 / delta
    assert validate_separation(P).ok and validate_separation(L).ok
    with pytest.raises(ValueError):
        gen_rectangle_example(delta, 0.5, 0.7)  # s > r
    # full square: both sides are near-maximal packings
    P2, L2 = gen_rectangle_example(2.0 ** -4, 1.0, 1.0)
    assert len(P2) == 17 ** 2
    assert len(L2) > 0.5 / (2.0 ** -4) ** 2


def test_rectangle_lines_all_meet_rectangle():
    delta, r, s = 2.0 ** -5, 0.5, 0.25
    _, L = gen_rectangle_example(delta, r, s)
    xs = np.linspace(0.0, r, 257)
    for a, b in L.params[::7]:
        ys = a * xs + b
        assert np.any((ys >= -1e-12) & (ys <= s + 1e-12))


def test_kstar_smallest():
    delta = 2.0 ** -6
    P, L = gen_kstar(2, 1, delta)
    assert len(P) == 1 and len(L) == 2
    assert count_naive(P, L, Scale(delta)).count == 2


def test_kstar_planted_incidences():
    delta = 2.0 ** -10
    P, L = gen_kstar(16, 8, delta)
    assert len(L) == 128
    assert count_naive(P, L, Scale(delta)).count >= 128
    assert validate_separation(L).ok
    # every center sees exactly its own k lines at radius delta
    for c in P:
        assert max_concurrency(L, c, Scale(delta)) >= 16


def test_kstar_infeasible_rejected():
    with pytest.raises(ValueError, match="infeasible"):
        gen_kstar(16, 4, 2.0 ** -4, epsilon=16 * 2.0 ** -4)


def test_concurrent_star_and_greedy():
    eps = 2.0 ** -6
    star = gen_concurrent_star(32, eps)
    assert len(star) == 32
    assert validate_separation(star).ok
    fam = gen_greedy_concurrent(eps, eps / 4.0)
    assert 0.5 / eps <= len(fam) <= 4.0 / eps
    assert validate_separation(fam).ok
    assert max_concurrency(fam, Point2(0, 0), Scale(eps / 4.0, eps)) == len(fam)


def test_random_empty_and_feasibility():
    P, L = gen_random(0, 0, 0.1, seed=1)
    assert len(P) == 0 and len(L) == 0
    with pytest.raises(ValueError):
        gen_random(10 ** 6, 1, 2.0 ** -4, seed=1)


def test_random_separation_and_determinism(tmp_path):
    P1, L1 = gen_random(1000, 1000, 2.0 ** -8, seed=2024)
    P2, L2 = gen_random(1000, 1000, 2.0 ** -8, seed=2024)
    assert np.array_equal(P1.coords, P2.coords)
    assert np.array_equal(L1.params, L2.params)
    assert validate_separation(P1).ok and validate_separation(L1).ok
    # byte-identical serialized output
    save_point_set(P1, tmp_path / "a.csv", generator="random", seed=2024)
    save_point_set(P2, tmp_path / "b.csv", generator="random", seed=2024)
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()
    P3, _ = gen_random(1000, 1000, 2.0 ** -8, seed=2025)
    assert not np.array_equal(P1.coords, P3.coords)


def test_build_dispatch_and_validation():
    ps, lf, meta = build(GeneratorSpec("tube", 2.0 ** -6))
    assert meta["kind"] == "tube" and len(ps) and len(lf)
    with pytest.raises(ValueError):
        GeneratorSpec("nonsense", 0.1)
    with pytest.raises(ValueError):
        GeneratorSpec("tube", 1.5)


@pytest.mark.parametrize("make", [
    lambda: gen_tube_example(2.0 ** -7),
    lambda: gen_rectangle_example(2.0 ** -5, 0.5, 0.25),
    lambda: gen_kstar(4, 3, 2.0 ** -8),
    lambda: gen_random(200, 150, 2.0 ** -6, seed=55),
])
def test_every_generator_output_is_separated(make):
    P, L = make()
    assert validate_separation(P).ok
    assert validate_separation(L).ok
