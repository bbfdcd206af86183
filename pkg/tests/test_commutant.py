"""Commutant tables and twirls against enumeration and Monte Carlo oracles."""

from __future__ import annotations

import itertools
from fractions import Fraction
from functools import reduce

import numpy as np
import pytest

from kdesign.commutant import (
    PauliMonomial,
    PermutationOp,
    _alpha_from_sites,
    _fraction_inverse,
    _permutation_matrix,
    alpha,
    approx_haar_twirl,
    clifford_twirl,
    enumerate_monomials,
    export_weingarten_table,
    gram_matrix,
    haar_twirl,
    load_weingarten_table,
    monomial_count,
    monomial_full_matrix,
    monomial_site_matrix,
    permutation_gram,
    trace_norm_exponent,
    vandermonde_bound_check,
    weingarten_table,
)
from kdesign.dense import haar_state, haar_unitary
from kdesign.errors import ValidationError
from kdesign.pauli import (
    PauliString,
    clifford_to_matrix,
    enumerate_cliffords,
    pauli_matrix,
    random_clifford,
)


def test_monomial_counts():
    assert [monomial_count(k) for k in range(1, 7)] == [1, 2, 6, 30, 270, 4590]
    for k in range(1, 7):
        assert len(enumerate_monomials(k)) == monomial_count(k)
    with pytest.raises(ValidationError):
        enumerate_monomials(7)


def test_monomial_validation():
    with pytest.raises(ValidationError):
        PauliMonomial(2, 1, (0b01,), (0,))  # odd-weight column
    with pytest.raises(ValidationError):
        PauliMonomial(3, 2, (0b011, 0b011), (0, 0))  # dependent columns
    with pytest.raises(ValidationError):
        PauliMonomial(3, 1, (0b011,), (1,))  # phase bit on the diagonal
    with pytest.raises(ValidationError):
        PauliMonomial(3, 3, (0b011, 0b101, 0b110), (0, 0, 0))  # m > k-1


def swap_monomial() -> PauliMonomial:
    return PauliMonomial(2, 1, (0b11,), (0,))


def test_site_matrix_identity_and_swap():
    ident = enumerate_monomials(1)[0]
    np.testing.assert_allclose(monomial_site_matrix(ident).matrix, np.eye(2), atol=1e-14)

    sw = monomial_site_matrix(swap_monomial()).matrix
    want = np.zeros((4, 4))
    for i, j in itertools.product(range(2), repeat=2):
        want[j * 2 + i, i * 2 + j] = 1.0
    np.testing.assert_allclose(sw, want, atol=1e-12)
    np.testing.assert_allclose(sw @ sw, np.eye(4), atol=1e-12)
    assert np.trace(sw) == pytest.approx(2.0)


@pytest.mark.parametrize("k", [2, 3, 4])
def test_site_matrices_real_and_transpose_symmetric(k):
    for mono in enumerate_monomials(k):
        w = monomial_site_matrix(mono).matrix
        assert np.max(np.abs(w.imag)) < 1e-12
        np.testing.assert_allclose(w.conj().T, w.T, atol=1e-12)


@pytest.mark.parametrize("k", [2, 3, 4])
def test_site_matrices_commute_with_clifford_powers(k):
    # the defining property: invariance under single-qubit Clifford conjugation
    rng = np.random.default_rng(31)
    cs = [clifford_to_matrix(random_clifford(1, rng)) for _ in range(4)]
    for mono in enumerate_monomials(k):
        w = monomial_site_matrix(mono).matrix
        for c in cs:
            ck = reduce(np.kron, [c] * k)
            np.testing.assert_allclose(w @ ck, ck @ w, atol=1e-10)


def test_k3_monomials_are_the_six_permutations():
    sites = [monomial_site_matrix(m).matrix for m in enumerate_monomials(3)]
    perms = [_permutation_matrix(p, 2) for p in itertools.permutations(range(3))]
    matched = set()
    for s in sites:
        hits = [i for i, t in enumerate(perms) if np.max(np.abs(s - t)) < 1e-10]
        assert len(hits) == 1
        matched.add(hits[0])
    assert matched == set(range(6))


def test_monomial_state_boundedness():
    rng = np.random.default_rng(37)
    for k in (2, 3, 4):
        monos = enumerate_monomials(k)
        states = [haar_state(1, rng).amplitudes for _ in range(100)]
        for mono in monos:
            w = monomial_site_matrix(mono).matrix
            for psi in states:
                big = reduce(np.kron, [psi] * k)
                val = np.vdot(big, w @ big).real
                assert val <= 1 + 1e-9


# ---------------------------------------------------------------------------
# alpha distance


def test_alpha_basics():
    monos = enumerate_monomials(2)
    ident = next(m for m in monos if m.m == 0)
    sw = next(m for m in monos if m.m == 1)
    assert alpha(ident, ident, 3) == 0
    assert alpha(ident, sw, 3) == 1
    with pytest.raises(ValidationError):
        alpha(ident, enumerate_monomials(3)[0], 2)


@pytest.mark.parametrize("k", [2, 3, 4])
def test_alpha_property_suite(k):
    monos = enumerate_monomials(k)
    sites = [monomial_site_matrix(m).matrix for m in monos]
    mps = [trace_norm_exponent(m) for m in monos]
    nmon = len(monos)
    a = np.zeros((nmon, nmon), dtype=int)
    for i in range(nmon):
        for j in range(nmon):
            a[i, j] = _alpha_from_sites(sites[i], sites[j], k)
    assert np.array_equal(a, a.T)
    for i in range(nmon):
        for j in range(nmon):
            assert (a[i, j] == 0) == (i == j)
            assert a[i, j] <= k - 1
            assert a[i, j] >= abs(monos[i].m - monos[j].m)
            assert a[i, j] >= abs(mps[i] - mps[j])
    # triangle inequality against every permutation operator
    perm_sites = [_permutation_matrix(p, 2) for p in itertools.permutations(range(k))]
    for t in perm_sites:
        ap = [_alpha_from_sites(s, t, k) for s in sites]
        for i in range(nmon):
            for j in range(nmon):
                assert a[i, j] <= ap[i] + ap[j]


def test_trace_norm_exponent_examples():
    ident = enumerate_monomials(1)[0]
    assert trace_norm_exponent(ident) == 0
    assert trace_norm_exponent(swap_monomial()) == 0  # unitary site
    ks = {trace_norm_exponent(m) for m in enumerate_monomials(4)}
    assert min(ks) == 0 and max(ks) >= 1


# ---------------------------------------------------------------------------
# Gram / Weingarten tables


def test_gram_k2_n1_exact():
    t = gram_matrix(2, 1)
    np.testing.assert_allclose(t.gram, [[1, 0.5], [0.5, 1]], atol=1e-15)
    assert t.gram_min_singular == pytest.approx(0.5)


def test_gram_diagonal_and_nonsingular():
    for k, n in ((2, 1), (3, 2), (4, 3), (5, 4)):
        t = gram_matrix(k, n)
        np.testing.assert_allclose(np.diag(t.gram), 1.0, atol=1e-15)
        np.testing.assert_allclose(t.gram, t.gram.T, atol=1e-15)
        assert t.gram_min_singular > 0


def test_weingarten_k2_n1_exact():
    t = weingarten_table(2, 1)
    want = (4.0 / 3.0) * np.array([[1, -0.5], [-0.5, 1]])
    np.testing.assert_allclose(t.weingarten, want, atol=1e-12)
    assert not t.pseudo


def test_weingarten_inverse_property():
    for k, n in ((2, 1), (2, 2), (3, 2), (3, 3), (4, 3)):
        t = weingarten_table(k, n)
        nmon = len(t.monomials)
        np.testing.assert_allclose(t.weingarten @ t.gram, np.eye(nmon), atol=1e-9)
        assert not t.pseudo


def test_weingarten_pseudo_below_critical_n():
    t = weingarten_table(3, 1)
    assert t.pseudo
    # W G is still the projector onto the Gram row space
    p = t.weingarten @ t.gram
    np.testing.assert_allclose(p @ p, p, atol=1e-9)


def test_weingarten_fraction_oracle():
    # exact rational inversion of the k=3, n=2 Gram matrix
    t = weingarten_table(3, 2)
    a = np.rint(np.log2(1.0 / t.gram) / 2).astype(int)  # alpha values
    g = [[Fraction(1, 4**int(v)) for v in row] for row in a]
    inv = _fraction_inverse(g)
    want = np.array([[float(v) for v in row] for row in inv])
    np.testing.assert_allclose(t.weingarten, want, atol=1e-12)


# ---------------------------------------------------------------------------
# twirls


def brute_force_twirl(mats, o):
    acc = np.zeros_like(o)
    for u in mats:
        acc += u @ o @ u.conj().T
    return acc / len(mats)


def random_operand(dim, rng):
    g = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return g / np.linalg.norm(g, 2)


def test_clifford_twirl_fixes_monomials():
    for k, n in ((2, 1), (2, 2), (3, 2)):
        for mono in enumerate_monomials(k):
            full = monomial_full_matrix(mono, n).matrix
            out = clifford_twirl(full, k, n).matrix
            np.testing.assert_allclose(out, full, atol=1e-9)


def test_clifford_twirl_k1_kills_traceless():
    p = pauli_matrix(PauliString.from_label("XZ"))
    out = clifford_twirl(p, 1, 2).matrix
    np.testing.assert_allclose(out, 0, atol=1e-12)


def test_clifford_twirl_idempotent():
    rng = np.random.default_rng(41)
    o = random_operand(16, rng)
    once = clifford_twirl(o, 2, 2).matrix
    twice = clifford_twirl(once, 2, 2).matrix
    np.testing.assert_allclose(twice, once, atol=1e-10)


def test_clifford_twirl_matches_group_average_n1_k2():
    group = [clifford_to_matrix(c) for c in enumerate_cliffords(1)]
    kpow = [np.kron(u, u) for u in group]
    rng = np.random.default_rng(43)
    for _ in range(20):
        o = random_operand(4, rng)
        want = brute_force_twirl(kpow, o)
        got = clifford_twirl(o, 2, 1).matrix
        np.testing.assert_allclose(got, want, atol=1e-10)


def test_permutation_ops():
    t12 = PermutationOp((1, 0), 3)
    assert np.trace(t12.matrix) == pytest.approx(3.0)  # one cycle, d=3
    # homomorphism on S_3 with d=2
    perms = list(itertools.permutations(range(3)))
    for a in perms:
        for b in perms:
            ab = tuple(a[b[c]] for c in range(3))
            np.testing.assert_allclose(
                _permutation_matrix(a, 2) @ _permutation_matrix(b, 2),
                _permutation_matrix(ab, 2),
                atol=1e-14,
            )
    with pytest.raises(ValidationError):
        PermutationOp((0, 0), 2)


def test_permutation_gram_example():
    np.testing.assert_allclose(permutation_gram(2, 4), [[16, 4], [4, 16]], atol=1e-12)


def test_haar_twirl_k1():
    rng = np.random.default_rng(47)
    o = random_operand(8, rng)
    out = haar_twirl(o, 1, 8).matrix
    np.testing.assert_allclose(out, np.trace(o) * np.eye(8) / 8, atol=1e-12)


def test_haar_twirl_fixes_permutations():
    for k, d in ((2, 4), (3, 2), (3, 4)):
        for p in itertools.permutations(range(k)):
            t = _permutation_matrix(p, d)
            np.testing.assert_allclose(haar_twirl(t, k, d).matrix, t, atol=1e-9)


def test_haar_twirl_monte_carlo():
    # O = |00><00| twirled at k=2, d=4, against 10^5 Haar samples
    rng = np.random.default_rng(53)
    d, k, total, batches = 4, 2, 100_000, 20
    per = total // batches
    batch_means = np.empty((batches, d**k, d**k), dtype=complex)
    for bi in range(batches):
        vs = np.empty((per, d**k), dtype=complex)
        for s in range(per):
            u0 = haar_unitary(d, rng).matrix[:, 0]
            vs[s] = np.kron(u0, u0)
        batch_means[bi] = vs.T @ vs.conj() / per
    mean = batch_means.mean(axis=0)
    se = batch_means.std(axis=0, ddof=1) / np.sqrt(batches)
    o = np.zeros((16, 16))
    o[0, 0] = 1.0
    exact = haar_twirl(o, k, d).matrix
    assert np.all(np.abs(mean - exact) <= 4 * np.abs(se) + 1e-4)


def test_haar_twirl_pseudo_when_d_lt_k():
    # d=2 < k=3: T_pi are linearly dependent; the projection must still fix them
    t = _permutation_matrix((1, 2, 0), 2)
    np.testing.assert_allclose(haar_twirl(t, 3, 2).matrix, t, atol=1e-9)


def test_approx_haar_twirl_k1_and_permutation_action():
    rng = np.random.default_rng(59)
    o = random_operand(4, rng)
    np.testing.assert_allclose(
        approx_haar_twirl(o, 1, 4).matrix, haar_twirl(o, 1, 4).matrix, atol=1e-12
    )
    k, d = 2, 4
    perms = list(itertools.permutations(range(k)))
    for sigma in perms:
        got = approx_haar_twirl(_permutation_matrix(sigma, d), k, d).matrix
        want = np.zeros_like(got)
        for pi in perms:
            comp = tuple(pi[_inv(sigma)[c]] for c in range(k))  # pi sigma^-1
            want += float(d) ** (_ncycles(comp) - k) * _permutation_matrix(pi, d)
        np.testing.assert_allclose(got, want, atol=1e-10)


def _inv(p):
    out = [0] * len(p)
    for i, v in enumerate(p):
        out[v] = i
    return tuple(out)


def _ncycles(p):
    seen = [False] * len(p)
    c = 0
    for s in range(len(p)):
        if seen[s]:
            continue
        c += 1
        while not seen[s]:
            seen[s] = True
            s = p[s]
    return c


def test_approx_haar_twirl_close_to_exact():
    rng = np.random.default_rng(61)
    k, d = 2, 16
    g = rng.normal(size=(256, 256)) + 1j * rng.normal(size=(256, 256))
    rho = g @ g.conj().T
    rho /= np.trace(rho)
    a = approx_haar_twirl(rho, k, d).matrix
    h = haar_twirl(rho, k, d).matrix
    dist = np.abs(np.linalg.eigvalsh(a - h)).sum()
    assert dist <= 2 * k**2 / d


def test_three_design_agreement_and_k4_gap():
    rng = np.random.default_rng(67)
    n, d = 2, 4
    for k in (1, 2, 3):
        o = random_operand(d**k, rng)
        cl = clifford_twirl(o, k, n).matrix
        ha = haar_twirl(o, k, d).matrix
        assert np.max(np.abs(cl - ha)) < 1e-8
    o = random_operand(d**4, rng)
    gap = np.max(np.abs(clifford_twirl(o, 4, n).matrix - haar_twirl(o, 4, d).matrix))
    assert gap > 1e-7


def test_cross_layout_swap_consistency():
    # the two-copy SWAP monomial on n=2 must equal T_(01) with d=4
    full = monomial_full_matrix(swap_monomial(), 2).matrix
    np.testing.assert_allclose(full, _permutation_matrix((1, 0), 4), atol=1e-12)


# ---------------------------------------------------------------------------
# Vandermonde and archive


def test_vandermonde_k1():
    rep = vandermonde_bound_check(1)
    assert rep.row_sums == (2.0,)
    assert rep.bounds == (60.0,)
    assert rep.all_ok


def test_vandermonde_inverse_is_exact():
    k = 5
    m = [[Fraction(1, 1 << (i * j)) for j in range(1, k + 1)] for i in range(1, k + 1)]
    inv = _fraction_inverse(m)
    for i in range(k):
        for j in range(k):
            s = sum(m[i][l] * inv[l][j] for l in range(k))
            assert s == (1 if i == j else 0)


def test_vandermonde_all_k():
    for k in range(1, 17):
        rep = vandermonde_bound_check(k)
        assert rep.all_ok, f"k={k}"
        assert rep.max_ratio <= 1.0
    with pytest.raises(ValidationError):
        vandermonde_bound_check(17)


def test_archive_round_trip(tmp_path):
    t = weingarten_table(3, 2)
    path = tmp_path / "table_k3_n2.json"
    export_weingarten_table(t, str(path))
    back = load_weingarten_table(str(path))
    assert back.k == t.k and back.n == t.n and back.pseudo == t.pseudo
    assert back.monomials == t.monomials
    assert np.array_equal(back.gram, t.gram)
    assert np.array_equal(back.weingarten, t.weingarten)
    assert back.gram_min_singular == t.gram_min_singular
    # exporting twice is byte-identical
    path2 = tmp_path / "again.json"
    export_weingarten_table(t, str(path2))
    assert path.read_bytes() == path2.read_bytes()


def test_archive_rejects_gram_only(tmp_path):
    with pytest.raises(ValidationError):
        export_weingarten_table(gram_matrix(2, 1), str(tmp_path / "x.json"))
