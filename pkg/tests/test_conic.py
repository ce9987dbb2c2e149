import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dpconic.conic import (
    ConeSpec,
    ConicProgram,
    build_simple_lp,
    cone_membership,
    nonneg,
    program_from_json,
    program_to_json,
    rsoc,
    slack,
    soc,
    validate,
    zero,
)


def lp2() -> ConicProgram:
    return ConicProgram(np.eye(2), np.array([1.0, 1.0]), np.array([1.0, 1.0]),
                        ConeSpec([nonneg(2)]))


class TestValidate:
    def test_ok(self):
        assert validate(lp2()) == []

    def test_bad_b_length(self):
        p = ConicProgram(np.eye(2), np.array([1.0, 1.0, 1.0]), np.ones(2),
                         ConeSpec([nonneg(3)]))
        assert any("b length" in v for v in validate(p))

    def test_cone_dim_mismatch(self):
        p = ConicProgram(np.eye(2), np.ones(2), np.ones(2), ConeSpec([nonneg(1)]))
        assert any("cone dims" in v for v in validate(p))

    def test_nonfinite(self):
        A = np.eye(2)
        A = A.copy()
        A[0, 0] = np.inf
        p = ConicProgram(A, np.ones(2), np.ones(2), ConeSpec([nonneg(2)]))
        assert any("non-finite" in v for v in validate(p))

    def test_idempotent_and_pure(self):
        p = lp2()
        first = validate(p)
        assert validate(p) == first == []


class TestSlack:
    def test_identity(self):
        p = ConicProgram(np.eye(2), np.array([2.0, 3.0]), np.zeros(2),
                         ConeSpec([nonneg(2)]))
        assert np.allclose(slack(p, [1.0, 1.0]), [1.0, 2.0])

    def test_zero_x(self):
        p = lp2()
        assert np.allclose(slack(p, [0.0, 0.0]), p.b)

    def test_row(self):
        p = ConicProgram(np.array([[1.0, 1.0]]), np.array([5.0]), np.zeros(2),
                         ConeSpec([nonneg(1)]))
        assert np.allclose(slack(p, [2.0, 3.0]), [0.0])

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            slack(lp2(), [1.0, 2.0, 3.0])


class TestConeMembership:
    def test_soc_boundary(self):
        assert cone_membership(np.array([1.0, 0.6, 0.8]), ConeSpec([soc(3)]), 1e-9)

    def test_rsoc_violated(self):
        # 2*1*1 = 2 < 1.5^2 = 2.25
        assert not cone_membership(np.array([1.0, 1.0, 1.5]), ConeSpec([rsoc(3)]))

    def test_zero_block(self):
        assert cone_membership(np.zeros(2), ConeSpec([zero(2)]))

    def test_negative_tol_rejected(self):
        with pytest.raises(ValueError):
            cone_membership(np.zeros(2), ConeSpec([zero(2)]), tol=-1.0)

    def test_mixed_blocks(self):
        v = np.concatenate([[0.0], [0.5, 0.2], [1.0, 0.0, 1.0]])
        cones = ConeSpec([zero(1), nonneg(2), soc(3)])
        assert cone_membership(v, cones)

    @settings(max_examples=100, deadline=None)
    @given(
        v=st.lists(st.floats(-5, 5, allow_nan=False), min_size=3, max_size=3),
        tol1=st.floats(0, 1),
        tol2=st.floats(0, 1),
    )
    def test_monotone_in_tol(self, v, tol1, tol2):
        lo, hi = sorted([tol1, tol2])
        cones = ConeSpec([soc(3)])
        if cone_membership(np.array(v), cones, lo):
            assert cone_membership(np.array(v), cones, hi)


class TestSimpleLp:
    def test_standard_form(self):
        p = build_simple_lp(1.0, 1.0, 2.0)
        assert p.m == 2 and p.n == 1
        assert validate(p) == []
        # feasibility of the two endpoints, infeasibility outside
        assert cone_membership(slack(p, [1.0]), p.cones, 1e-12)
        assert cone_membership(slack(p, [2.0]), p.cones, 1e-12)
        assert not cone_membership(slack(p, [0.5]), p.cones, 1e-6)

    def test_rejects_empty_box(self):
        with pytest.raises(ValueError):
            build_simple_lp(1.0, 2.0, 1.0)


class TestSerialization:
    def test_round_trip_bit_exact(self):
        rng = np.random.default_rng(0)
        p = ConicProgram(rng.normal(size=(6, 3)), rng.normal(size=6),
                         rng.normal(size=3), ConeSpec([zero(1), nonneg(2), soc(3)]),
                         variable_names=("a", "b", "c"))
        q = program_from_json(program_to_json(p))
        assert np.array_equal(p.A, q.A)
        assert np.array_equal(p.b, q.b)
        assert np.array_equal(p.c, q.c)
        assert p.cones == q.cones
        assert p.variable_names == q.variable_names

    def test_schema_fields(self):
        doc = json.loads(program_to_json(lp2()))
        assert set(doc) >= {"m", "n", "A", "b", "c", "cones"}
        assert doc["cones"][0] == {"kind": "NonNeg", "dim": 2}

    @settings(max_examples=50, deadline=None)
    @given(vals=st.lists(st.floats(allow_nan=False, allow_infinity=False,
                                   width=64), min_size=4, max_size=4))
    def test_round_trip_arbitrary_doubles(self, vals):
        p = ConicProgram(np.array(vals).reshape(2, 2), np.array([1.0, 2.0]),
                         np.array([0.5, -0.5]), ConeSpec([nonneg(2)]))
        q = program_from_json(program_to_json(p))
        assert np.array_equal(p.A, q.A)
