from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from oracles import min_weight_solutions
from qldpc_gkp.decoder import BpOsdDecoder, DimensionError, bp_decode, osd_postprocess, soft_weight
from qldpc_gkp.detector_model import init_llrs
from qldpc_gkp.gkp import GkpParams

RULES = ["product_sum", "min_sum"]


def _instance(rng, m=6, n=12, density=0.35, p=0.15):
    h = (rng.random((m, n)) < density).astype(np.uint8)
    e = (rng.random(n) < p).astype(np.uint8)
    return h, e, (h.astype(int) @ e) % 2


@pytest.mark.parametrize("rule", RULES)
def test_zero_syndrome_fixed_point(rule):
    h = (np.random.default_rng(0).random((5, 9)) < 0.4).astype(np.uint8)
    res = BpOsdDecoder(h, rule=rule).decode(np.zeros(5, dtype=np.uint8), np.full(9, 8.0))
    assert not res.estimate.any() and res.converged and res.iterations_used == 1


@pytest.mark.parametrize("rule", RULES)
def test_repetition_weight_one(rep3, rule):
    s = np.array([1, 0])
    (best,) = min_weight_solutions(rep3.h_z, s)
    post, hard, conv = bp_decode(rep3.h_z, s, np.full(3, 2.0), rule=rule)
    assert conv and tuple(hard) == best == (1, 0, 0)


@given(st.floats(-30, 30))
def test_forced_single_column(llr):
    res = BpOsdDecoder(np.array([[1]])).decode([1], [llr])
    assert res.estimate.tolist() == [1]


def test_dimension_errors():
    d = BpOsdDecoder(np.ones((2, 3), dtype=np.uint8))
    with pytest.raises(DimensionError):
        d.decode([1, 0, 1], np.zeros(3))
    with pytest.raises(DimensionError):
        d.decode([1, 0], np.zeros(4))
    with pytest.raises(ValueError):
        bp_decode(np.ones((2, 3)), [0, 0], np.zeros(3), max_iters=0)


@given(
    hnp.arrays(np.uint8, st.tuples(st.integers(1, 6), st.integers(1, 10)), elements=st.integers(0, 1)),
    st.data(),
    st.sampled_from(RULES),
    st.integers(0, 3),
)
def test_output_satisfies_syndrome(h, data, rule, order):
    e = data.draw(hnp.arrays(np.uint8, h.shape[1], elements=st.integers(0, 1)))
    llr = data.draw(hnp.arrays(float, h.shape[1], elements=st.floats(-10, 10)))
    s = (h.astype(int) @ e) % 2
    res = BpOsdDecoder(h, rule=rule, osd_order=order, max_iters=4).decode(s, llr)
    assert np.array_equal((h.astype(int) @ res.estimate) % 2, s)


def test_osd_short_circuit():
    rng = np.random.default_rng(2)
    h, e, s = _instance(rng)
    out = osd_postprocess(h, s, rng.normal(size=12), order=2, hard_decision=e)
    assert np.array_equal(out, e)


def test_osd_rejects_inconsistent_syndrome():
    with pytest.raises(ValueError):
        osd_postprocess(np.array([[1, 1], [1, 1]]), [1, 0], np.zeros(2))


def test_osd_higher_order_never_worse():
    rng = np.random.default_rng(3)
    for _ in range(100):
        h, e, s = _instance(rng, m=8, n=16)
        llr = rng.normal(1.5, 2.0, 16)
        w0 = soft_weight(osd_postprocess(h, s, llr, 0), llr)
        w4 = soft_weight(osd_postprocess(h, s, llr, 4), llr)
        assert w4 <= w0 + 1e-12


def test_osd_order_exhaustive_on_tiny_instances():
    # with order >= number of free columns OSD is the exact soft-weight minimiser
    rng = np.random.default_rng(4)
    for _ in range(30):
        h, e, s = _instance(rng, m=4, n=7)
        llr = rng.normal(0.5, 2.0, 7)
        got = soft_weight(osd_postprocess(h, s, llr, 7), llr)
        best = min(
            soft_weight(x, llr)
            for x in np.array(np.meshgrid(*[[0, 1]] * 7)).reshape(7, -1).T
            if np.array_equal(h.astype(int) @ x % 2, s)
        )
        assert got == pytest.approx(best)


def test_planted_single_faults_recovered(rep3_greedy):
    ccm = rep3_greedy
    llr = init_llrs("prior", ccm, GkpParams(10.0))
    dec = BpOsdDecoder(ccm.matrix)
    H = ccm.matrix.toarray().astype(int)
    D = ccm.data_effects.toarray().astype(int)
    for j in range(ccm.n_columns):
        s = H[:, j]
        res = dec.decode(s, llr)
        assert np.array_equal(H @ res.estimate % 2, s)
        residual = (res.estimate @ D + D[j]) % 2
        if s[: 2 * ccm.m].any():
            # seen before the last round: the planted data effect is recovered exactly
            assert not residual.any()
        else:
            # last-round or invisible faults leave at most one data flip for the base code
            assert residual.sum() <= 1


def test_rules_agree_at_high_snr():
    rng = np.random.default_rng(5)
    for _ in range(100):
        h, e, s = _instance(rng, m=8, n=16, p=0.08)
        mag = rng.uniform(5, 10, 16)
        llr = np.where(e == 1, -mag, mag)
        a = bp_decode(h, s, llr, rule="product_sum")
        b = bp_decode(h, s, llr, rule="min_sum")
        assert np.array_equal(np.sign(a[0]), np.sign(b[0]))


def test_min_sum_scale_invariance():
    rng = np.random.default_rng(6)
    for _ in range(100):
        h, e, s = _instance(rng, m=8, n=16, p=0.2)
        llr = rng.normal(1.0, 2.0, 16)
        c = rng.uniform(0.1, 20)
        a = bp_decode(h, s, llr, max_iters=16, rule="min_sum")
        b = bp_decode(h, s, c * llr, max_iters=16, rule="min_sum")
        assert np.array_equal(a[1], b[1]) and a[2] == b[2]


def test_batch_matches_single_and_is_deterministic():
    rng = np.random.default_rng(7)
    h = (rng.random((10, 20)) < 0.25).astype(np.uint8)
    errs = (rng.random((40, 20)) < 0.15).astype(np.uint8)
    syn = errs.astype(int) @ h.T % 2
    llr = rng.normal(1.5, 1.5, (40, 20))
    for rule in RULES:
        dec = BpOsdDecoder(h, rule=rule, osd_order=2)
        batch = dec.decode(syn, llr)
        again = dec.decode(syn, llr)
        assert np.array_equal(batch.estimate, again.estimate)
        for i in (0, 7, 39):
            one = dec.decode(syn[i], llr[i])
            assert np.array_equal(one.estimate, batch.estimate[i])
            assert one.iterations_used == batch.iterations_used[i]
            assert np.allclose(one.posterior_llrs, batch.posterior_llrs[i])
