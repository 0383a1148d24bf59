"""The averaging operator: algebra, residuals, and field-wide checks."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from phtree import (
    BoundarySpec,
    ContractViolationError,
    GameParams,
    MissingValueError,
    ValidationError,
    Vertex,
    build_un,
    check_field,
    classify,
    dpp_average,
    residual_at,
    root,
)
from phtree.dpp import HARMONIOUS, SUBHARMONIOUS, SUPERHARMONIOUS

P = GameParams(3, 0.5, 0.5)


class TestGameParams:
    def test_derived_weights(self):
        assert P.theta == pytest.approx(7 / 12, abs=1e-15)
        assert P.delta == pytest.approx(5 / 12, abs=1e-15)

    def test_endpoints_accepted(self):
        assert GameParams(3, 1.0, 0.0).theta == pytest.approx(0.5)
        assert GameParams(3, 0.0, 1.0).theta == pytest.approx(2 / 3)

    @settings(max_examples=80, deadline=None)
    @given(m=st.integers(2, 12), alpha=st.floats(0.0, 1.0))
    def test_weight_identities(self, m, alpha):
        params = GameParams(m, alpha, 1.0 - alpha)
        assert abs(params.theta + params.delta - 1.0) <= 1e-14
        assert abs(params.delta - (params.alpha / 2 + params.beta / m)) <= 1e-14
        # delta is pinned to [1/m, 1/2] for admissible weights
        assert 1 / m - 1e-12 <= params.delta <= 0.5 + 1e-12

    def test_validation(self):
        with pytest.raises(ValidationError):
            GameParams(1, 0.5, 0.5)
        with pytest.raises(ValidationError):
            GameParams(3, 0.7, 0.5)
        with pytest.raises(ValidationError):
            GameParams(3, -0.1, 1.1)


class TestDppAverage:
    def test_hand_value(self):
        assert dpp_average(P, [0.0, 0.5, 1.0]) == pytest.approx(0.5, abs=1e-15)

    def test_fixes_constants(self):
        for params in (P, GameParams(3, 1.0, 0.0), GameParams(4, 0.25, 0.75)):
            values = [2.5] * params.m
            assert dpp_average(params, values) == pytest.approx(2.5, abs=1e-14)

    def test_pure_mean(self):
        params = GameParams(3, 0.0, 1.0)
        assert dpp_average(params, [0.0, 1 / 3, 2 / 3]) == pytest.approx(1 / 3, abs=1e-15)

    def test_arity_error(self):
        with pytest.raises(ContractViolationError):
            dpp_average(P, [0.0, 1.0])

    def test_nonfinite_error(self):
        with pytest.raises(ContractViolationError):
            dpp_average(P, [0.0, math.nan, 1.0])

    @settings(max_examples=80, deadline=None)
    @given(
        m=st.integers(2, 6),
        alpha=st.floats(0.0, 1.0),
        data=st.data(),
    )
    def test_monotone_translation_homogeneous_bounded(self, m, alpha, data):
        params = GameParams(m, alpha, 1.0 - alpha)
        values = data.draw(
            st.lists(st.floats(-10, 10), min_size=m, max_size=m)
        )
        base = dpp_average(params, values)
        # raising one input never lowers the output
        i = data.draw(st.integers(0, m - 1))
        bumped = list(values)
        bumped[i] += data.draw(st.floats(0.0, 5.0))
        assert dpp_average(params, bumped) >= base - 1e-12
        # translation equivariance
        c = data.draw(st.floats(-5, 5))
        shifted = dpp_average(params, [v + c for v in values])
        assert shifted == pytest.approx(base + c, abs=1e-10)
        # positive homogeneity
        s = data.draw(st.floats(0.0, 4.0))
        assert dpp_average(params, [s * v for v in values]) == pytest.approx(
            s * base, abs=1e-9
        )
        # discrete maximum principle
        assert min(values) - 1e-12 <= base <= max(values) + 1e-12
        if max(values) - min(values) > 1e-6:
            assert min(values) < base < max(values)

    def test_theta_weight_on_sorted_inputs(self):
        # with all middle coordinates at the max, the operator puts exactly
        # theta on the max and delta on the min
        for params in (P, GameParams(5, 0.3, 0.7)):
            lo, hi = -1.0, 2.0
            values = [lo] + [hi] * (params.m - 1)
            expected = params.theta * hi + params.delta * lo
            assert dpp_average(params, values) == pytest.approx(expected, abs=1e-14)
        # in general theta*max + delta*min is an upper bound
        rng = np.random.default_rng(0)
        for _ in range(200):
            values = rng.uniform(-1, 1, P.m)
            upper = P.theta * values.max() + P.delta * values.min()
            assert dpp_average(P, values) <= upper + 1e-12


def _const_field(c):
    return lambda v: c


class TestResidualAndClassify:
    def test_constant_field_residual_zero(self):
        for v in (root(3), Vertex(3, (0, 2))):
            assert residual_at(_const_field(1.7), v, P).value == pytest.approx(0.0, abs=1e-15)
            assert classify(_const_field(1.7), v, P) == HARMONIOUS

    def test_level_one_hand_residual(self):
        def field(v):
            return {(): 0.0, (0,): 0.0, (1,): 1 / 3, (2,): 2 / 3}[v.digits]

        r = residual_at(field, root(3), P)
        assert r.value == pytest.approx(1 / 3, abs=1e-14)

    def test_solver_field_is_harmonious(self):
        field = build_un(BoundarySpec.linear(), P, 4)
        for v in (root(3), Vertex(3, (1,)), Vertex(3, (2, 0, 1))):
            assert classify(field, v, P) == HARMONIOUS

    def test_growing_field_is_subharmonious(self):
        # value +level sits below its successor average by exactly 1
        field = lambda v: float(v.level)
        r = residual_at(field, Vertex(3, (1, 2)), P)
        assert r.value == pytest.approx(1.0, abs=1e-14)
        assert classify(field, Vertex(3, (1, 2)), P) == SUBHARMONIOUS

    def test_decreasing_field_is_superharmonious(self):
        field = lambda v: -float(v.level)
        assert classify(field, root(3), P) == SUPERHARMONIOUS

    def test_missing_value_names_vertex(self):
        table = {(): 0.0, (0,): 0.0, (1,): 0.0}  # (2,) missing

        def field(v):
            return table[v.digits]

        with pytest.raises(MissingValueError) as err:
            residual_at(field, root(3), P)
        assert err.value.vertex == Vertex(3, (2,))


class TestCheckField:
    def test_constant_boundary(self):
        field = build_un(BoundarySpec.constant(2.0), P, 3)
        report = check_field(field)
        assert report.max_abs_residual == pytest.approx(0.0, abs=1e-15)
        assert report.classification == HARMONIOUS

    def test_solver_output_within_tolerance(self):
        field = build_un(BoundarySpec.linear(), P, 4)
        report = check_field(field, P, tol=1e-12)
        assert report.max_abs_residual <= 1e-12
        assert report.vertices_checked == 1 + 3 + 9 + 27

    def test_corrupted_field_is_localised(self):
        field = build_un(BoundarySpec.linear(), P, 3)
        levels = [np.array(arr) for arr in field.levels]
        # perturb a leaf that is neither the min nor max of its siblings
        levels[3][13] += 0.1
        corrupted = type(field)(
            params=field.params,
            n=field.n,
            levels=tuple(levels),
            boundary=field.boundary,
        )
        report = check_field(corrupted, P)
        assert report.worst_vertex == Vertex(3, (1, 1))  # parent of leaf 13
        assert report.max_abs_residual >= 0.1 * P.beta / P.m - 1e-12
