from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from pmfspace.bridge import symbolwise_decode
from pmfspace.detection.mimo import (
    MimoProblem,
    b_matrix,
    etb_construction,
    h_mimo_qpsk,
    input_map,
    mimo_app,
    mimo_factorize,
    mimo_inputs,
    mimo_pairs,
    mimo_parameters,
    mimo_reconstruct,
    permutation_matrix,
    permutation_set,
    qpsk,
    random_mimo,
    standard_permutation,
    tb_construction,
    tb_inputs,
    tb_row_map,
)
from pmfspace.errors import DimensionMismatch
from pmfspace.galois import all_configs
from pmfspace.joint import marginals_brute

seeds = st.integers(0, 2 ** 32 - 1)

B2 = [[1, 1, 0, 0], [0, 1, 1, 0], [1, 0, 0, 1], [0, 0, 1, 1]]
B_TB2 = [[1, 1, 0, 0], [0, 1, 1, 0], [0, 0, 1, 1], [1, 0, 0, 1]]
B3 = [
    [1, 1, 0, 0, 0, 0],
    [0, 1, 0, 1, 0, 0],
    [1, 0, 0, 0, 1, 0],
    [0, 0, 0, 1, 1, 0],
    [1, 0, 1, 0, 0, 0],
    [0, 0, 1, 1, 0, 0],
    [0, 1, 1, 0, 0, 0],
    [0, 0, 1, 0, 1, 0],
    [1, 0, 0, 0, 0, 1],
    [0, 0, 0, 1, 0, 1],
    [0, 1, 0, 0, 0, 1],
    [0, 0, 0, 0, 1, 1],
]
B_TB3 = [
    [1, 0, 1, 0, 0, 0],
    [0, 1, 1, 0, 0, 0],
    [0, 1, 0, 1, 0, 0],
    [0, 0, 1, 1, 0, 0],
    [0, 0, 1, 0, 1, 0],
    [0, 0, 0, 1, 1, 0],
    [0, 0, 0, 1, 0, 1],
    [0, 0, 0, 0, 1, 1],
    [1, 0, 0, 0, 1, 0],
    [1, 0, 0, 0, 0, 1],
    [0, 1, 0, 0, 0, 1],
    [1, 1, 0, 0, 0, 0],
]
ROW_MAP3 = [5, 7, 2, 6, 8, 4, 10, 12, 3, 9, 11, 1]


def _with_identity(a):
    return np.hstack([a, np.eye(len(a), dtype=int)]).tolist()


def _problem(rng, nr=2, nt=2, sigma2=0.5):
    return random_mimo(rng, nr, nt, sigma2)[0]


class TestQpsk:
    def test_gray_map(self):
        np.testing.assert_allclose(qpsk([[0, 0], [0, 1], [1, 1], [1, 0]]).ravel(), [1, 1j, -1, -1j])

    def test_unit_energy(self):
        assert np.allclose(np.abs(qpsk(all_configs(2, 6))), 1)

    def test_problem_validation(self):
        with pytest.raises(DimensionMismatch):
            MimoProblem(np.ones((2, 2)), np.ones(3), 1.0)
        with pytest.raises(ValueError):
            MimoProblem(np.ones((2, 2)), np.ones(2), 0.0)


class TestPrintedStructure:
    def test_h_mimo_qpsk(self):
        a = [[1, 0, 1, 0], [0, 1, 1, 0], [1, 0, 0, 1], [0, 1, 0, 1]]
        assert h_mimo_qpsk(2).h.tolist() == _with_identity(a)

    def test_b2(self):
        assert b_matrix(2).tolist() == B2

    def test_b_tb2(self):
        assert tb_construction(2)[1].tolist() == B_TB2

    def test_b3(self):
        assert b_matrix(3).tolist() == B3

    def test_b_tb3(self):
        assert tb_construction(3)[1].tolist() == B_TB3

    def test_row_map(self):
        assert [i + 1 for i in tb_row_map(3)] == ROW_MAP3

    @pytest.mark.parametrize("nt", [2, 3, 4, 8])
    def test_same_row_multiset(self, nt):
        b = sorted(map(tuple, b_matrix(nt).data))
        b_tb = sorted(map(tuple, tb_construction(nt)[1].data))
        assert b == b_tb

    def test_b_is_permuted_a(self):
        p = permutation_matrix(standard_permutation(3)).data
        a = h_mimo_qpsk(3).h.data[:, :6]
        assert ((a @ p) % 2).tolist() == B3

    @pytest.mark.parametrize("nt", [2, 3, 4, 8])
    def test_counts(self, nt):
        assert h_mimo_qpsk(nt).checks == 2 * nt * (nt - 1)
        assert tb_construction(nt)[2].checks == 2 * nt * (nt - 1)
        assert etb_construction(nt).checks == 2 * nt * nt

    def test_permutations_nt8(self):
        odds = list(range(1, 16, 2))
        evens = list(range(2, 17, 2))
        perms = [[i + 1 for i in p] for p in permutation_set(8)]
        assert len(perms) == 15
        assert perms[0] == odds + evens
        assert perms[1] == odds + evens[1:] + evens[:1]
        assert perms[8] == evens[1:] + evens[:1] + odds
        assert perms[14] == evens[-1:] + evens[:-1] + odds
        assert len({tuple(p) for p in perms}) == 15

    @pytest.mark.parametrize("nt", [2, 3, 4])
    def test_every_etb_permutation_covers_pairs(self, nt):
        for perm in permutation_set(nt):
            imap = input_map(etb_construction(nt), perm)
            live = {tuple(sorted(p)) for p, ok in zip(imap.pair.tolist(), imap.live) if ok}
            assert len(live) == 2 * nt * (nt - 1)


class TestFactorization:
    def test_t_vector(self, rng):
        p = _problem(rng)
        sigma = np.sqrt(p.sigma2)
        r, u, _ = mimo_factorize(p)
        _, inputs = mimo_inputs(p)
        rr = r[1, 0]
        t = np.array(
            [
                (u[0].real + u[0].imag) / 2,
                (u[0].real - u[0].imag) / 2,
                (u[1].real + u[1].imag) / 2,
                (u[1].real - u[1].imag) / 2,
                -rr.real / 2,
                -rr.imag / 2,
                rr.imag / 2,
                -rr.real / 2,
            ]
        ) / sigma
        np.testing.assert_allclose(inputs[:, 0] * sigma, t, atol=1e-12)

    def test_pair_order(self):
        assert mimo_pairs(2) == [(0, 2), (1, 2), (0, 3), (1, 3)]

    @pytest.mark.parametrize("seed", range(50))
    def test_reconstruction_2x2(self, seed):
        p = _problem(np.random.default_rng(seed))
        assert np.max(np.abs(mimo_reconstruct(p).probs - mimo_app(p).probs)) < 1e-9

    @given(st.sampled_from([(1, 2), (3, 2), (2, 3), (4, 3)]), seeds)
    def test_reconstruction_shapes(self, shape, seed):
        p = _problem(np.random.default_rng(seed), *shape, sigma2=1.0)
        assert np.max(np.abs(mimo_reconstruct(p).probs - mimo_app(p).probs)) < 1e-9

    @given(seeds)
    def test_decoder_marginals(self, seed):
        p = _problem(np.random.default_rng(seed), 3, 3, 1.0)
        code, inputs = mimo_inputs(p)
        got = symbolwise_decode(code, inputs)[:6]
        ref = marginals_brute(mimo_app(p))
        assert max(np.max(np.abs(a.probs - b.probs)) for a, b in zip(got, ref)) < 1e-9

    def test_batched_parameters(self, rng):
        probs = [_problem(rng, 3, 2) for _ in range(4)]
        lb, lp = mimo_parameters(np.stack([p.hc for p in probs]), np.stack([p.y for p in probs]), 0.5)
        for k, p in enumerate(probs):
            b1, p1 = mimo_parameters(p.hc, p.y, p.sigma2)
            np.testing.assert_allclose(lb[k], b1)
            np.testing.assert_allclose(lp[k], p1)
        assert np.allclose(lp, np.swapaxes(lp, -1, -2))

    @pytest.mark.parametrize("nt", [2, 3])
    def test_tb_code_is_permuted_mimo_code(self, nt, rng):
        # same factors, so the exact marginals through the tb code equal the direct APP
        p = _problem(rng, nt, nt, 1.0)
        code, inputs = tb_inputs(p)
        perm = standard_permutation(nt)
        got = symbolwise_decode(code, inputs)[: 2 * nt]
        ref = marginals_brute(mimo_app(p))
        for m, i in enumerate(perm):
            np.testing.assert_allclose(got[m].probs, ref[i].probs, atol=1e-9)

    @pytest.mark.parametrize("nt", [2, 3])
    def test_etb_code_exact(self, nt, rng):
        p = _problem(rng, nt, nt, 1.0)
        perm = permutation_set(nt)[-1]
        code, inputs = tb_inputs(p, perm, extended=True)
        got = symbolwise_decode(code, inputs)[: 2 * nt]
        ref = marginals_brute(mimo_app(p))
        for m, i in enumerate(perm):
            np.testing.assert_allclose(got[m].probs, ref[i].probs, atol=1e-9)

    def test_bad_permutation(self):
        with pytest.raises(ValueError):
            input_map(tb_construction(2)[2], [0, 0, 1, 2])
