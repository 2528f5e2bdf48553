from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from oracles import gf2_rank, hgp_by_definition
from qldpc_gkp import codes, gf2
from qldpc_gkp.codes import CssValidationError, validate_css
from qldpc_gkp.io import BUILTIN_BUNDLES, load_bundle

binary = lambda r, c: hnp.arrays(np.uint8, (r, c), elements=st.integers(0, 1))


def test_repetition_is_valid():
    code = validate_css(np.zeros((0, 3), dtype=np.uint8), [[1, 1, 0], [0, 1, 1]])
    assert code.n == 3 and code.k == 1


def test_commuting_pair_accepted_and_anticommuting_rejected():
    validate_css([[1, 1, 1]], [[1, 1, 0]])
    with pytest.raises(CssValidationError, match="row 0 anticommutes with h_z row 0"):
        validate_css([[1, 1, 1]], [[1, 0, 0]])


def test_shape_mismatch_rejected():
    with pytest.raises(CssValidationError):
        validate_css([[1, 1]], [[1, 1, 0]])


def test_steane():
    code = codes.steane_code()
    assert not np.any(code.h_x.astype(int) @ code.h_z.T % 2)
    assert (code.n, code.k) == (7, 1)


def test_hgp_examples():
    small = codes.hypergraph_product([[1, 1]], [[1, 1]])
    assert (small.n, small.k) == (5, 1)
    rep = codes.repetition_checks(3)
    surf = codes.hypergraph_product(rep, rep)
    assert (surf.n, surf.k) == (13, 1)
    assert surf.k == 13 - gf2_rank(surf.h_x) - gf2_rank(surf.h_z)


@given(st.integers(1, 4), st.integers(2, 5), st.integers(1, 4), st.integers(2, 5), st.data())
def test_hgp_matches_definition_and_commutes(m1, n1, m2, n2, data):
    h1 = data.draw(binary(m1, n1))
    h2 = data.draw(binary(m2, n2))
    if not h1.any() or not h2.any():
        return
    code = codes.hypergraph_product(h1, h2)
    hx, hz = hgp_by_definition(h1, h2)
    assert np.array_equal(code.h_x, hx) and np.array_equal(code.h_z, hz)
    assert not np.any(code.h_x.astype(int) @ code.h_z.T % 2)


@given(st.integers(1, 3), st.integers(2, 4), st.integers(1, 3), st.integers(2, 4), st.data())
def test_lift_one_reduces_to_hgp(m1, n1, m2, n2, data):
    h1 = data.draw(binary(m1, n1))
    h2 = data.draw(binary(m2, n2))
    if not h1.any() or not h2.any():
        return
    b1 = [[[0] if x else [] for x in row] for row in h1]
    b2 = [[[0] if x else [] for x in row] for row in h2]
    lp = codes.lifted_product(b1, b2, 1)
    hgp = codes.hypergraph_product(h1, h2)
    assert np.array_equal(lp.h_x, hgp.h_x) and np.array_equal(lp.h_z, hgp.h_z)


@given(st.integers(2, 7), st.data())
def test_lifted_product_commutes(lift, data):
    ent = st.lists(st.integers(0, lift - 1), max_size=2, unique=True)
    b1 = data.draw(st.lists(st.lists(ent, min_size=3, max_size=3), min_size=2, max_size=2))
    b2 = data.draw(st.lists(st.lists(ent, min_size=2, max_size=2), min_size=1, max_size=2))
    if not any(any(e) for r in b1 for e in r) or not any(any(e) for r in b2 for e in r):
        return
    code = codes.lifted_product(b1, b2, lift)
    assert not np.any(code.h_x.astype(int) @ code.h_z.T % 2)


def test_single_entry_lift():
    code = codes.lifted_product([[[0]]], [[[0]]], 5)
    assert code.n == 10
    assert not np.any(code.h_x.astype(int) @ code.h_z.T % 2)


def test_exponent_out_of_range():
    with pytest.raises(ValueError):
        codes.lifted_product([[[7]]], [[[0]]], 5)


def test_lp_dimensions():
    lp = codes.tanner_lifted_product()
    assert lp.n == 1054
    assert lp.h_x.shape == (465, 1054) and lp.h_z.shape == (465, 1054)
    assert lp.k == 140


def test_bb144_dimensions():
    bb = codes.bb144()
    assert bb.n == 144 and bb.h_z.shape[0] == 72 and bb.k == 12
    assert set(bb.h_x.sum(axis=1)) == {6} and set(bb.h_z.sum(axis=0)) == {3}


@pytest.mark.parametrize("name", BUILTIN_BUNDLES)
def test_bundles_validate(name):
    bundle = load_bundle(name)
    code = bundle.code
    assert not np.any(code.h_x.astype(int) @ code.h_z.T % 2)
    assert code.k == bundle.declared["k"] == code.n - gf2.rank(code.h_x) - gf2.rank(code.h_z)
    for per_basis in bundle.schedules.values():
        for basis, sched in per_basis.items():
            if sched is not None:
                sched.validate(code.check_matrix(basis))


def test_declared_parameters():
    assert load_bundle("bb144").declared["k"] == 12
    assert load_bundle("lp1054").declared["k"] == 140
    assert load_bundle("lp1054").code.d == 20


def test_gf2_rank_matches_oracle():
    rng = np.random.default_rng(0)
    for _ in range(30):
        a = (rng.random((rng.integers(1, 9), rng.integers(1, 12))) < 0.4).astype(np.uint8)
        assert gf2.rank(a) == gf2_rank(a)


def test_nullspace_and_logicals():
    surf = codes.hypergraph_product(codes.repetition_checks(3), codes.repetition_checks(3))
    ker = gf2.nullspace(surf.h_x)
    assert not np.any(surf.h_x.astype(int) @ ker.T % 2)
    logical = gf2.logical_basis(surf.h_x, surf.h_z)
    assert logical.shape[0] == surf.k
    for row in logical:
        assert not gf2.in_rowspace(row, surf.h_z)
