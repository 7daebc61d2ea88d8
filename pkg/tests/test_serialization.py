import json

import numpy as np
import pytest

from modelspace.acceptance import random_symbol
from modelspace.clark import clark_measure
from modelspace.decompose import Component, Decomposition
from modelspace.errors import DomainError, ParseError
from modelspace.inner_function import BlaschkeProduct
from modelspace.serialization import (
    clark_from_json,
    clark_to_json,
    decomposition_from_json,
    decomposition_to_json,
    dumps,
    loads,
    matrix_from_json,
    matrix_to_json,
    parse_complex,
    symbol_from_json,
    symbol_to_json,
    theta_from_json,
    theta_to_json,
    vector_from_json,
    vector_to_json,
)
from modelspace.tto import D, DBAR


def through_text(obj):
    return loads(dumps(obj))


class TestScalars:
    def test_complex_pair(self):
        assert parse_complex([1.5, -2]) == 1.5 - 2j

    @pytest.mark.parametrize("bad", [[1.0], "1+2j", [1.0, "x"], [True, 0.0], [float("nan"), 0.0]])
    def test_rejects(self, bad):
        with pytest.raises(ParseError):
            parse_complex(bad)

    def test_shortest_round_trip_floats(self):
        x = 0.1 + 0.2
        text = dumps(vector_to_json(np.array([complex(x, 1 / 3)])))
        assert repr(x) in text
        assert vector_from_json(loads(text))[0] == complex(x, 1 / 3)

    def test_nan_refused(self):
        with pytest.raises(ValueError):
            dumps({"x": float("nan")})

    def test_invalid_json(self):
        with pytest.raises(ParseError):
            loads("{not json")


class TestTheta:
    def test_round_trip(self):
        B = BlaschkeProduct((0.1 + 0.2j, -0.5), np.exp(0.3j))
        back = theta_from_json(through_text(theta_to_json(B)))
        assert back.zeros == B.zeros and back.constant == B.constant

    def test_constant_defaults_to_one(self):
        assert theta_from_json({"zeros": [[0, 0]]}).constant == 1

    def test_unknown_field(self):
        with pytest.raises(ParseError):
            theta_from_json({"zeros": [], "degree": 0})

    def test_missing_field(self):
        with pytest.raises(ParseError):
            theta_from_json({"constant": [1, 0]})

    def test_domain_still_checked(self):
        with pytest.raises(DomainError):
            theta_from_json({"zeros": [[1.0, 0.0]]})


class TestMatrices:
    def test_round_trip(self, rng):
        A = rng.standard_normal((3, 4)) + 1j * rng.standard_normal((3, 4))
        assert np.array_equal(matrix_from_json(through_text(matrix_to_json(A))), A)

    def test_row_major(self):
        A = matrix_from_json({"rows": 2, "cols": 2, "data": [[1, 0], [2, 0], [3, 0], [4, 0]]})
        assert A[0, 1] == 2 and A[1, 0] == 3

    def test_size_mismatch(self):
        with pytest.raises(ParseError):
            matrix_from_json({"rows": 2, "cols": 2, "data": [[1, 0]]})


class TestSymbols:
    def test_round_trip(self, rng):
        for _ in range(5):
            phi = random_symbol(rng)
            assert symbol_from_json(through_text(symbol_to_json(phi))) == phi

    def test_unknown_kind(self):
        with pytest.raises(ParseError):
            symbol_from_json({"terms": [{"kind": "sin", "m": 1}]})

    def test_unknown_term_field(self):
        with pytest.raises(ParseError):
            symbol_from_json({"terms": [{"kind": "poly_analytic", "m": 1, "scale": 2}]})


class TestClark:
    def test_round_trip(self, random_basis):
        cm = clark_measure(random_basis, 1j)
        back = clark_from_json(through_text(clark_to_json(cm)))
        assert back.alpha == cm.alpha
        assert np.array_equal(back.atoms, cm.atoms) and np.array_equal(back.masses, cm.masses)

    def test_length_mismatch(self):
        with pytest.raises(ParseError):
            clark_from_json({"alpha": [1, 0], "atoms": [[1, 0]], "masses": []})


class TestDecomposition:
    def test_round_trip(self):
        d = Decomposition((Component(0.3, 1, D, (0.5, 1j)), Component(-0.2j, 0, DBAR, (2,))), 1e-12)
        assert decomposition_from_json(through_text(decomposition_to_json(d))) == d

    def test_schema(self):
        d = Decomposition((Component(0.3, 0, D, (2,)),), 0.0)
        obj = json.loads(dumps(decomposition_to_json(d)))
        assert obj == {"components": [{"point": [0.3, 0.0], "order": 0, "orientation": "D",
                                       "coefficients": [[2.0, 0.0]]}], "residual": 0.0}

    def test_coefficient_count(self):
        with pytest.raises(ParseError):
            decomposition_from_json({"components": [{"point": [0, 0], "order": 1, "orientation": "D",
                                                     "coefficients": [[1, 0]]}], "residual": 0})

    def test_bad_orientation(self):
        with pytest.raises(ParseError):
            decomposition_from_json({"components": [{"point": [0, 0], "order": 0, "orientation": "up",
                                                     "coefficients": [[1, 0]]}], "residual": 0})
