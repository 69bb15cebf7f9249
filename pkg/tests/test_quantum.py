import json

import numpy as np
import pytest

from tsallis_causal.probability import JointDistribution, VariableSpec
from tsallis_causal.quantum import (DensityOperator, KrausChannel, StagedChannel, choi_state, cq_state,
                                    haar_random_unitary, is_povm, matrix_to_pairs, max_entangled,
                                    pairs_to_matrix, partial_trace, quantum_cmi, quantum_mi, quantum_tsallis,
                                    random_density_operator, random_povm, random_pure_state,
                                    random_staged_channel, search_conjecture_counterexamples,
                                    search_mixed_ssa_violation, staged_cmi, tau_state, verify_cq_theorem,
                                    verify_sigma_lemma, verify_stage1, verify_stage2, verify_stage3_onesided)
from tsallis_causal.quantum.suite import appendix_suite
from tsallis_causal.tsallis import bound_f, q_log, tsallis_cmi

QS = (1.0, 1.5, 2.0, 3.0)


def eig_entropy(m, q):
    """Independent oracle: entropy straight from numpy eigenvalues."""
    w = np.linalg.eigvalsh(m)
    w = w[w > 1e-14]
    if q == 1:
        return float(-(w * np.log(w)).sum())
    return float((1 - (w ** q).sum()) / (q - 1))


# -- density operators -----------------------------------------------------------

def test_density_operator_validation():
    with pytest.raises(ValueError):
        DensityOperator(np.eye(2))  # trace 2
    with pytest.raises(ValueError):
        DensityOperator(np.array([[0.5, 1], [0, 0.5]]))  # not Hermitian
    with pytest.raises(ValueError):
        DensityOperator(np.diag([1.5, -0.5]))
    with pytest.raises(ValueError):
        DensityOperator(np.eye(4) / 4, (2, 3))


def test_entropy_examples():
    pure = DensityOperator.from_pure(random_pure_state(4, seed=1))
    for q in QS:
        assert abs(quantum_tsallis(pure, q)) < 1e-10
    assert quantum_tsallis(DensityOperator.maximally_mixed(2), 2) == pytest.approx(0.5, abs=1e-14)
    for d in (2, 3, 5):
        for q in QS:
            assert quantum_tsallis(DensityOperator.maximally_mixed(d), q) == pytest.approx(q_log(d, q), abs=1e-12)
    with pytest.raises(ValueError):
        quantum_tsallis(pure, 0)


def test_entropy_matches_eigen_oracle():
    rng = np.random.default_rng(0)
    for _ in range(20):
        rho = random_density_operator((3,), seed=rng)
        for q in QS:
            assert quantum_tsallis(rho, q) == pytest.approx(eig_entropy(rho.matrix, q), abs=1e-12)


def test_partial_trace_examples():
    a = random_density_operator((2,), seed=1)
    b = random_density_operator((3,), seed=2)
    prod = a.tensor(b)
    np.testing.assert_allclose(partial_trace(prod, [0]).matrix, a.matrix, atol=1e-14)
    np.testing.assert_allclose(partial_trace(prod, [1]).matrix, b.matrix, atol=1e-14)
    bell = DensityOperator.from_pure(max_entangled(2), (2, 2))
    np.testing.assert_allclose(partial_trace(bell, [1]).matrix, np.eye(2) / 2, atol=1e-14)
    with pytest.raises((ValueError, IndexError)):
        partial_trace(bell, [2])
    with pytest.raises(ValueError):
        partial_trace(bell, [])


def test_schmidt_complement_entropies():
    rng = np.random.default_rng(3)
    for _ in range(10):
        rho = DensityOperator.from_pure(random_pure_state(8, rng), (2, 2, 2))
        for q in QS:
            assert quantum_tsallis(partial_trace(rho, [0, 2]), q) == pytest.approx(
                quantum_tsallis(partial_trace(rho, [1]), q), abs=1e-12)


def test_partial_trace_preserves_trace_and_positivity():
    rho = random_density_operator((2, 3, 2), seed=4)
    for keep in ([0], [1, 2], [0, 2], [2, 0]):
        r = partial_trace(rho, keep)
        assert np.trace(r.matrix).real == pytest.approx(1.0)
        assert np.linalg.eigvalsh(r.matrix).min() > -1e-12


# -- conditional mutual information ---------------------------------------------------

def test_cmi_product_state():
    parts = [random_density_operator((d,), seed=s) for d, s in ((2, 1), (3, 2), (2, 3))]
    rho = parts[0].tensor(parts[1]).tensor(parts[2])
    assert abs(quantum_cmi(rho, [0], [1], [2], 1)) < 1e-12
    for q in (1.5, 2.0, 3.0):
        sA, sB, sC = (eig_entropy(p.matrix, q) for p in parts)

        def joint(*ss):
            # pseudo-additivity folded over the factors
            out = 0.0
            for s in ss:
                out = out + s + (1 - q) * out * s
            return out

        expected = joint(sA, sC) + joint(sB, sC) - joint(sA, sB, sC) - sC
        assert quantum_cmi(rho, [0], [1], [2], q) == pytest.approx(expected, abs=1e-12)


def test_cmi_classical_embedding_flat_xy_constant_z():
    p = np.array([0.25 if z == 0 else 0 for x in range(2) for y in range(2) for z in range(2)])
    rho = DensityOperator(np.diag(p), (2, 2, 2))
    assert quantum_cmi(rho, [0], [1], [2], 2) == pytest.approx(0.25, abs=1e-14)
    d = JointDistribution([VariableSpec(n, 2) for n in "XYZ"], p)
    assert quantum_cmi(rho, [0], [1], [2], 1.5) == pytest.approx(tsallis_cmi(d, "X", "Y", "Z", 1.5), abs=1e-12)


def test_cmi_pure_state_equals_mi():
    rng = np.random.default_rng(5)
    for _ in range(20):
        rho = DensityOperator.from_pure(random_pure_state(12, rng), (2, 3, 2))
        for q in (1.0, 1.5, 2.0, 4.0):
            # complementary marginals of a pure state share spectra, so the C terms cancel
            c = quantum_cmi(rho, [0], [1], [2], q)
            assert c == pytest.approx(quantum_mi(rho, [0], [1], q), abs=1e-10)
            assert c >= -1e-10


def test_cmi_overlap_error():
    rho = random_density_operator((2, 2, 2), seed=0)
    with pytest.raises(ValueError):
        quantum_cmi(rho, [0], [0], [2], 2)
    with pytest.raises(ValueError):
        quantum_cmi(rho, [], [1], [2], 2)


def test_pseudo_additivity_and_subadditivity():
    rng = np.random.default_rng(6)
    for _ in range(20):
        a = random_density_operator((2,), seed=rng)
        b = random_density_operator((3,), seed=rng)
        ab = a.tensor(b)
        for q in (0.5, 1.5, 2.0, 3.0):
            sa, sb = quantum_tsallis(a, q), quantum_tsallis(b, q)
            assert quantum_tsallis(ab, q) == pytest.approx(sa + sb + (1 - q) * sa * sb, abs=1e-10)
        rho = random_density_operator((2, 3), seed=rng)
        for q in (1.0, 1.5, 2.0, 3.0):
            joint = quantum_tsallis(rho, q)
            assert joint <= quantum_tsallis(partial_trace(rho, [0]), q) + quantum_tsallis(
                partial_trace(rho, [1]), q) + 1e-10


def test_mixed_state_ssa_violation_exists():
    hit = search_mixed_ssa_violation(seed=0)
    assert hit["cmi"] < 0 and hit["q"] > 1
    assert quantum_cmi(hit["state"], [0], [1], [2], hit["q"]) == pytest.approx(hit["cmi"])


# -- random objects --------------------------------------------------------------

def test_haar_unitary():
    for d in (1, 2, 5):
        U = haar_random_unitary(d, seed=1)
        assert np.max(np.abs(U.conj().T @ U - np.eye(d))) < 1e-12
    np.testing.assert_array_equal(haar_random_unitary(3, seed=9), haar_random_unitary(3, seed=9))
    rng = np.random.default_rng(0)
    mean = sum(haar_random_unitary(3, rng) for _ in range(1000)) / 1000
    assert np.max(np.abs(mean)) < 0.1
    with pytest.raises(ValueError):
        haar_random_unitary(0)


def test_random_povm():
    proj = random_povm(3, 3, seed=2)
    assert is_povm(proj)
    for e in proj:
        assert np.linalg.matrix_rank(e, tol=1e-10) == 1
        np.testing.assert_allclose(e @ e, e, atol=1e-12)
    gen = random_povm(2, 4, seed=3)
    assert len(gen) == 4 and is_povm(gen)
    assert not is_povm([np.eye(2), np.eye(2)])


def test_matrix_pairs_roundtrip():
    m = haar_random_unitary(3, seed=4)
    back = pairs_to_matrix(json.loads(json.dumps(matrix_to_pairs(m))))
    np.testing.assert_array_equal(back, m)


# -- channels --------------------------------------------------------------------

def test_identity_channel_choi():
    ch = StagedChannel(np.eye(2), (2, 1))
    tau = tau_state(ch)
    np.testing.assert_allclose(tau.matrix, np.outer(max_entangled(2), max_entangled(2).conj()), atol=1e-14)
    np.testing.assert_allclose(partial_trace(tau, [len(tau.dims) - 1]).matrix, np.eye(2) / 2, atol=1e-14)
    assert np.allclose(choi_state(ch).input_marginal(), np.eye(2))


def test_depolarizing_channel_choi():
    paulis = [np.eye(2), np.array([[0, 1], [1, 0]]), np.array([[0, -1j], [1j, 0]]), np.diag([1, -1])]
    ch = KrausChannel([p / 2 for p in paulis], 2, (2,))
    np.testing.assert_allclose(tau_state(ch).matrix, np.eye(4) / 4, atol=1e-14)
    with pytest.raises(ValueError):
        KrausChannel([np.eye(2)] * 2, 2, (2,))


def test_unitary_channel_tau_is_pure():
    U = haar_random_unitary(4, seed=5)
    tau = tau_state(StagedChannel(U, (2, 2)))
    for q in QS:
        assert abs(quantum_tsallis(tau, q)) < 1e-10


def test_staged_channel_validation():
    with pytest.raises(ValueError):
        StagedChannel(np.ones((2, 2)), (2, 1))
    with pytest.raises(ValueError):
        StagedChannel(np.eye(4), (2, 3))
    with pytest.raises(ValueError):
        StagedChannel(np.eye(4), (2, 2), traced={"A"})


def test_staged_cmi_matches_full_density_matrix():
    rng = np.random.default_rng(8)
    ch = random_staged_channel((2, 2), 2, 2, (2, 2), (2, 2), ("A''", "B''"), rng)
    tau = tau_state(ch)
    for q in (1.0, 2.0, 3.5):
        assert staged_cmi(ch, q) == pytest.approx(quantum_cmi(tau, [0], [1], [2], q), abs=1e-12)


def test_stage1_examples():
    c = verify_stage1(np.eye(4), 2)
    assert c.value == pytest.approx(0.25, abs=1e-14) and float(bound_f(2, 2, 2)) == 0.25
    rng = np.random.default_rng(9)
    for dims in ((2, 2), (2, 3), (2, 4)):
        for q in (1.5, 2.0, 3.0):
            assert verify_stage1(haar_random_unitary(dims[0] * dims[1], rng), q, dims).deviation < 1e-9
    assert abs(verify_stage1(np.eye(4), 1).value) < 1e-12
    with pytest.raises(ValueError):
        verify_stage1(np.ones((4, 4)), 2)


def test_stage2_examples():
    base = verify_stage2(StagedChannel(np.eye(4), (2, 2)), 2)
    assert base.deviation < 1e-12
    rng = np.random.default_rng(10)
    for d_e in (1, 2, 3):
        ch = random_staged_channel((2, 2), d_e, d_e, seed=rng)
        assert verify_stage2(ch, 2).deviation < 1e-9
    with pytest.raises(ValueError):
        verify_stage2(random_staged_channel((2, 2), 1, 2, None, (2, 2), ("B''",), rng), 2)


def test_stage3_onesided():
    rng = np.random.default_rng(11)
    noop = random_staged_channel((2, 2), 1, 1, None, (2, 1), ("B''",), rng)
    assert verify_stage3_onesided(noop, 2).deviation < 1e-9
    for _ in range(30):
        ch = random_staged_channel((2, 3), 1, 2, None, (2, 3), ("B''",), rng)
        for q in (1.5, 2.0, 5.0):
            assert verify_stage3_onesided(ch, q).margin >= -1e-9
    # B kept trivial (dimension 1): everything went to B''
    full = random_staged_channel((2, 2), 1, 1, None, (1, 2), ("B''",), rng)
    c = verify_stage3_onesided(full, 2)
    assert abs(c.value) < 1e-12 and c.margin > 0
    with pytest.raises(ValueError):
        verify_stage3_onesided(noop, 0.5)


def test_conjecture_search():
    rep = search_conjecture_counterexamples("conj1", samples=60, seed=12)
    assert rep.samples == 60 and not rep.found
    assert rep.max_margin <= 1e-9
    json.loads(rep.to_json())
    with pytest.raises(ValueError):
        search_conjecture_counterexamples("conj3")
    with pytest.raises(ValueError):
        search_conjecture_counterexamples("conj1", q_range=(0.5, 2))


def test_conjecture_degenerate_no_trace_equals_bound():
    ch = random_staged_channel((2, 2), 1, 1, seed=13)
    for q in (1.5, 2.0):
        assert staged_cmi(ch, q) - float(bound_f(q, 2, 2)) == pytest.approx(0.0, abs=1e-10)


def test_cq_theorem_examples():
    sat = verify_cq_theorem([1.0], [np.eye(2) / 2], [np.eye(2) / 2], 2)
    assert sat.value == pytest.approx(0.25, abs=1e-14) and sat.details["saturated"]
    pure = [np.diag([1.0, 0.0]), np.diag([0.0, 1.0])]
    zero = verify_cq_theorem([0.5, 0.5], pure, pure, 2)
    assert abs(zero.value) < 1e-12 and not zero.details["saturated"]
    rng = np.random.default_rng(14)
    for _ in range(40):
        p = rng.dirichlet(np.ones(3))
        sa = [random_density_operator((2,), seed=rng).matrix for _ in range(3)]
        sb = [random_density_operator((3,), seed=rng).matrix for _ in range(3)]
        for q in (1.5, 2.0, 3.0):
            c = verify_cq_theorem(p, sa, sb, q)
            assert c.margin >= -1e-9 and c.details["cq_identity_deviation"] < 1e-10
    with pytest.raises(ValueError):
        verify_cq_theorem([1.0], [np.eye(2) / 2], [np.eye(2) / 2], 0.5)
    assert cq_state([1.0], [np.eye(2) / 2], [np.eye(2) / 2]).dims == (2, 2, 1)


def test_sigma_lemma_examples():
    rng = np.random.default_rng(15)
    ch = random_staged_channel((2, 2), 1, 2, None, (2, 2), ("B''",), rng)
    pure = DensityOperator.from_pure(random_pure_state(4, rng))
    c = verify_sigma_lemma(pure, ch, 2)
    assert c.value == pytest.approx(c.bound, abs=1e-10)
    ch2 = StagedChannel(np.eye(4), (2, 2))
    half = verify_sigma_lemma(DensityOperator.maximally_mixed(4), ch2, 2)
    assert half.details["trace_sigma_q"] == pytest.approx(0.25)
    assert half.details["identity_ok"]
    qubit_in = StagedChannel(np.eye(2), (2, 1))
    c = verify_sigma_lemma(DensityOperator.maximally_mixed(2), qubit_in, 2)
    assert c.details["trace_sigma_q"] == pytest.approx(0.5) and c.details["identity_ok"]
    with pytest.raises(ValueError):
        verify_sigma_lemma(DensityOperator.maximally_mixed(3), ch2, 2)


def test_appendix_suite_smoke():
    results = appendix_suite(seed=1, samples=5)
    assert len(results) == 10
    assert all(r.passed for r in results), [r.to_dict() for r in results if not r.passed]
    json.dumps([r.to_dict() for r in results])
