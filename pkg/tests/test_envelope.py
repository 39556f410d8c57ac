import math

import numpy as np
import pytest

from brkpyapi.brk_cli.brk_suite import brute_force_convex, brute_force_monotone_convex, random_function
from brkpyapi.brk_envelope.envelope import (SampledFunction, concave_envelope, convex_envelope,
                                            envelope_derivative, envelope_table, monotone_concave_envelope,
                                            monotone_convex_envelope)
from brkpyapi.brk_envelope.envelope_exception import EmptyIntervalException, EnvelopeException
from brkpyapi.brk_envelope.envelope_kind import EnvelopeKind


def sampled(fn, a: float, b: float, m: int) -> SampledFunction:
    grid = np.linspace(a, b, m)
    return SampledFunction(grid=grid, values=fn(grid))


class TestSampledFunction:
    def test_needs_two_nodes(self):
        with pytest.raises(EnvelopeException):
            SampledFunction(grid=[0.0], values=[1.0])

    def test_grid_strictly_increasing(self):
        with pytest.raises(EnvelopeException, match="strictly increasing"):
            SampledFunction(grid=[0.0, 0.0, 1.0], values=[1.0, 2.0, 3.0])

    def test_empty_interval(self):
        f = sampled(np.abs, -1.0, 1.0, 5)
        with pytest.raises(EmptyIntervalException):
            convex_envelope(f, interval=(0.5, 0.5))

    def test_interval_must_hit_nodes(self):
        f = sampled(np.abs, -1.0, 1.0, 5)
        with pytest.raises(EnvelopeException, match="not grid nodes"):
            convex_envelope(f, interval=(-0.3, 1.0))


class TestConvexEnvelope:
    def test_convex_input_is_its_own_envelope(self):
        f = sampled(np.abs, -1.0, 1.0, 41)
        env = convex_envelope(f)
        assert np.array_equal(env.values, f.values)
        assert env.contact.all()
        assert env.kind is EnvelopeKind.CONVEX

    def test_concave_input_gives_chord(self):
        f = sampled(lambda t: -t ** 2, -1.0, 0.0, 21)
        env = convex_envelope(f)
        assert np.allclose(env.values, f.grid, atol=1e-15)
        assert env.contact.tolist() == [True] + [False] * 19 + [True]

    def test_double_well(self):
        f = sampled(lambda t: t ** 4 - t ** 2, -1.0, 1.0, 201)
        env = convex_envelope(f)
        plateau = np.abs(f.grid) < 1.0 / math.sqrt(2.0) - 0.01
        assert np.allclose(env.values[plateau], -0.25, atol=1e-4)
        assert np.allclose(env.values, brute_force_convex(f.grid, f.values), atol=1e-14)
        assert np.all(np.diff(env.slopes) >= -1e-12)

    def test_sub_interval(self):
        f = sampled(lambda t: t ** 4 - t ** 2, -1.0, 1.0, 201)
        env = convex_envelope(f, interval=(float(f.grid[100]), 1.0))
        assert env.grid[0] == f.grid[100]
        assert env.values[0] == f.values[100]

    def test_endpoints_touch(self, rng):
        f = random_function(rng, 30)
        env = convex_envelope(f)
        assert env.values[0] == f.values[0]
        assert env.values[-1] == f.values[-1]
        assert np.all(env.values <= f.values + 1e-12)


class TestConcaveEnvelope:
    def test_concave_input(self):
        f = sampled(lambda t: -np.abs(t), -1.0, 1.0, 41)
        assert np.array_equal(concave_envelope(f).values, f.values)

    def test_convex_input_gives_chord(self):
        f = sampled(lambda t: t ** 2, 0.0, 1.0, 11)
        assert np.allclose(concave_envelope(f).values, f.grid, atol=1e-15)

    def test_mirror_identity(self, rng):
        f = random_function(rng, 50)
        mirrored = convex_envelope(SampledFunction(grid=f.grid, values=-f.values))
        assert np.array_equal(concave_envelope(f).values, -mirrored.values)
        assert np.all(np.diff(concave_envelope(f).slopes) <= 1e-12)


class TestMonotoneEnvelopes:
    def test_decreasing_convex_freezes(self):
        f = sampled(lambda t: t ** 2, -1.0, 0.0, 21)
        env = monotone_convex_envelope(f)
        assert np.allclose(env.values, 0.0, atol=1e-15)
        assert env.splice_index == 20

    def test_nondecreasing_convex_is_unchanged(self):
        f = sampled(lambda t: t ** 2, 0.0, 1.0, 21)
        env = monotone_convex_envelope(f)
        assert np.array_equal(env.values, convex_envelope(f).values)
        assert env.splice_index == 0

    def test_double_well(self):
        f = sampled(lambda t: t ** 4 - t ** 2, -1.0, 1.0, 201)
        env = monotone_convex_envelope(f)
        assert np.all(env.slopes >= 0.0)
        assert np.allclose(env.values[f.grid <= 0.7], -0.25, atol=1e-3)
        assert np.allclose(env.values, brute_force_monotone_convex(f.grid, f.values), atol=1e-14)

    def test_splice_identity_on_random_functions(self, rng):
        for _ in range(20):
            f = random_function(rng, 40)
            conv = convex_envelope(f)
            env = monotone_convex_envelope(f)
            j0: int = env.splice_index
            assert np.all(env.values[:j0] == conv.values[j0])
            assert np.array_equal(env.values[j0:], conv.values[j0:])

    def test_monotone_concave_is_nondecreasing(self, rng):
        f = random_function(rng, 40)
        env = monotone_concave_envelope(f)
        assert np.all(env.slopes >= 0.0)
        assert np.all(env.values[env.splice_index:] == env.values[env.splice_index])

    def test_monotone_concave_kind_is_nondecreasing_majorant(self, rng):
        for _ in range(20):
            f = random_function(rng, 30)
            env = monotone_concave_envelope(f)
            assert env.kind is EnvelopeKind.MONOTONE_CONCAVE
            assert not env.kind.is_convex
            assert np.all(np.diff(env.values) >= -1e-9)
            assert np.all(env.values >= env.function_values - 1e-12)


class TestEnvelopeDerivative:
    def test_chord_slope(self):
        env = convex_envelope(sampled(lambda t: -t ** 2, -1.0, 0.0, 11))
        sigma = envelope_derivative(env)
        assert np.allclose(sigma(np.linspace(-1.0, -0.01, 7)), 1.0)

    def test_frozen_slope(self):
        env = monotone_convex_envelope(sampled(lambda t: t ** 2, -1.0, 0.0, 11))
        assert np.all(envelope_derivative(env).slopes == 0.0)

    def test_normalization_and_order(self):
        env = convex_envelope(sampled(lambda t: t ** 4 - t ** 2, -1.0, 1.0, 101))
        sigma = envelope_derivative(env, d=2.0)
        assert np.allclose(sigma.slopes, env.slopes / 2.0)
        assert np.all(np.diff(sigma.slopes) >= -1e-12)

    def test_table_columns(self):
        env = convex_envelope(sampled(np.abs, -1.0, 1.0, 5))
        table = envelope_table(env)
        assert table.shape == (5, 5)
        assert np.all(table[:, 4] == 1.0)


class TestBruteForceAgreement:
    def test_random_functions(self, rng):
        for _ in range(50):
            f = random_function(rng, 60)
            scale = max(1.0, float(np.max(np.abs(f.values))))
            assert np.max(np.abs(convex_envelope(f).values - brute_force_convex(f.grid, f.values))) <= 1e-12 * scale
            assert np.max(np.abs(concave_envelope(f).values
                                 + brute_force_convex(f.grid, -f.values))) <= 1e-12 * scale
            assert np.max(np.abs(monotone_convex_envelope(f).values
                                 - brute_force_monotone_convex(f.grid, f.values))) <= 1e-12 * scale
