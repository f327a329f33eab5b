import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fermispin import PurityError
from fermispin.extraction import pair_singlet_state
from fermispin.measures import (
    Bipartition,
    EntanglementReport,
    analyze,
    bipartition_entropies,
    enumerate_bipartitions,
    gme_concurrence,
    linear_entropy,
    partial_trace,
    werner_decompose,
    werner_formulas,
    werner_p_from_concurrence,
    werner_state,
    wootters_concurrence,
)
from fermispin.models import SpinSystemSpec, heisenberg_ground_state

SINGLET = np.array([0, 1, -1, 0]) / np.sqrt(2)


def ghz(n):
    v = np.zeros(2**n, dtype=complex)
    v[0] = v[-1] = 1 / np.sqrt(2)
    return v


def random_pure(rng, n):
    v = rng.normal(size=2**n) + 1j * rng.normal(size=2**n)
    return v / np.linalg.norm(v)


def brute_reduced(vec, keep):
    """rho_A via explicit sums over basis strings."""
    n = vec.size.bit_length() - 1
    keep = sorted(keep)
    rest = [i for i in range(n) if i not in keep]
    rho = np.zeros((2 ** len(keep),) * 2, dtype=complex)
    for bits in itertools.product((0, 1), repeat=n):
        for bits2 in itertools.product((0, 1), repeat=len(keep)):
            full2 = list(bits)
            for k, b in zip(keep, bits2):
                full2[k] = b
            i = int("".join(map(str, bits)), 2)
            j = int("".join(map(str, full2)), 2)
            a = int("".join(str(bits[k]) for k in keep), 2) if keep else 0
            b = int("".join(map(str, bits2)), 2)
            rho[a, b] += vec[i] * np.conj(vec[j])
    return rho


@pytest.mark.parametrize("n,count", [(2, 1), (4, 7), (10, 511)])
def test_bipartition_count(n, count):
    bps = enumerate_bipartitions(n)
    assert len(bps) == count
    assert len(set(bps)) == count
    assert all(0 in b.part_a for b in bps)


def test_bipartition_order_and_range():
    bps = enumerate_bipartitions(4)
    assert [b.part_a for b in bps] == [(0,), (0, 1), (0, 2), (0, 3), (0, 1, 2), (0, 1, 3), (0, 2, 3)]
    for n in (1, 21):
        with pytest.raises(ValueError):
            enumerate_bipartitions(n)
    assert str(Bipartition.canonical(4, [2, 3])) == "{s1,s2}|{s3,s4}"


def test_partial_trace_examples():
    assert np.allclose(partial_trace(SINGLET, [0]), np.eye(2) / 2)
    a = pair_singlet_state(4, [(0, 1), (2, 3)]).vector
    assert np.allclose(partial_trace(a, [0, 1]), np.outer(SINGLET, SINGLET))
    with pytest.raises(ValueError):
        partial_trace(SINGLET, [])


def test_partial_trace_vs_brute_force(rng):
    for n in (2, 3, 4):
        v = random_pure(rng, n)
        for size in range(1, n + 1):
            for keep in itertools.combinations(range(n), size):
                ref = brute_reduced(v, keep)
                assert np.allclose(partial_trace(v, keep), ref, atol=1e-13)
                assert np.allclose(partial_trace(np.outer(v, v.conj()), keep), ref, atol=1e-13)


def test_ring4_pair_is_werner_two_thirds():
    gs = heisenberg_ground_state(SpinSystemSpec.ring(4)).state
    r = partial_trace(gs, [0, 1])
    wd = werner_decompose(r)
    assert wd.p == pytest.approx(2 / 3, abs=1e-12)
    assert wd.residual < 1e-12
    # <S_1.S_2> = -3p/4 for a Werner pair
    assert -3 * wd.p / 4 == pytest.approx(-0.5, abs=1e-12)


def test_linear_entropy_examples():
    assert linear_entropy(np.outer(SINGLET, SINGLET)) == pytest.approx(0, abs=1e-15)
    assert linear_entropy(np.eye(2) / 2) == pytest.approx(0.5)
    assert linear_entropy(werner_state(2 / 3)) == pytest.approx(5 / 12, abs=1e-14)
    with pytest.raises(ValueError):
        linear_entropy(np.eye(2))


def test_gme_examples():
    a = pair_singlet_state(4, [(0, 1), (2, 3)]).vector
    c, cuts = gme_concurrence(a)
    assert c == pytest.approx(0, abs=1e-7)
    assert cuts == [Bipartition(4, (0, 1))]
    for n in range(3, 9):
        c, cuts = gme_concurrence(ghz(n))
        assert c == pytest.approx(1, abs=1e-12)
        assert len(cuts) == 2 ** (n - 1) - 1


def test_gme_ring4():
    gs = heisenberg_ground_state(SpinSystemSpec.ring(4)).state
    c, cuts = gme_concurrence(gs)
    assert c == pytest.approx(np.sqrt(5 / 6), abs=1e-12)
    assert cuts == [Bipartition(4, (0, 1)), Bipartition(4, (0, 3))]


def test_gme_rejects_mixed_and_unnormalized():
    with pytest.raises(PurityError):
        gme_concurrence(np.eye(4) / 4)
    with pytest.raises(ValueError):
        gme_concurrence(2 * SINGLET)
    c, _ = gme_concurrence(np.outer(SINGLET, SINGLET))
    assert c == pytest.approx(1)


def test_schmidt_symmetry(rng):
    for n in (2, 3, 4, 5):
        v = random_pure(rng, n)
        for bp in enumerate_bipartitions(n):
            sa = linear_entropy(partial_trace(v, bp.part_a))
            sb = linear_entropy(partial_trace(v, bp.part_b))
            assert sa == pytest.approx(sb, abs=1e-12)


def test_scan_matches_partial_traces(rng):
    v = random_pure(rng, 5)
    for bp, sl in bipartition_entropies(v):
        assert sl == pytest.approx(linear_entropy(partial_trace(v, bp.part_a)), abs=1e-12)


def test_gme_invariances(rng):
    v = random_pure(rng, 5)
    c, cuts = gme_concurrence(v)
    assert gme_concurrence(np.exp(1.1j) * v)[0] == pytest.approx(c, abs=1e-12)
    perm = list(rng.permutation(5))
    w = np.transpose(v.reshape([2] * 5), perm).reshape(-1)
    c2, cuts2 = gme_concurrence(w)
    assert c2 == pytest.approx(c, abs=1e-12)
    # qubit k of w is qubit perm[k] of v
    mapped = {Bipartition.canonical(5, [perm[k] for k in b.part_a]) for b in cuts2}
    assert mapped == set(cuts)


def test_wootters_examples():
    assert wootters_concurrence(np.outer(SINGLET, SINGLET)) == pytest.approx(1, abs=1e-12)
    assert wootters_concurrence(np.eye(4) / 4) == pytest.approx(0, abs=1e-12)
    assert wootters_concurrence(werner_state(2 / 3)) == pytest.approx(0.5, abs=1e-12)
    with pytest.raises(ValueError):
        wootters_concurrence(np.eye(2) / 2)


def test_wootters_pure_states(rng):
    # pure two-qubit states: C = 2|ad - bc|
    for _ in range(50):
        a, b, c, d = random_pure(rng, 2)
        rho = np.outer([a, b, c, d], np.conj([a, b, c, d]))
        assert wootters_concurrence(rho) == pytest.approx(2 * abs(a * d - b * c), abs=1e-7)


def test_wootters_matches_nonhermitian_form(rng):
    yy = np.kron([[0, -1j], [1j, 0]], [[0, -1j], [1j, 0]])
    for _ in range(50):
        g = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
        rho = g @ g.conj().T
        rho /= np.trace(rho)
        lam = np.sort(np.sqrt(np.abs(np.linalg.eigvals(rho @ yy @ rho.conj() @ yy).real)))[::-1]
        assert wootters_concurrence(rho) == pytest.approx(max(0, lam[0] - lam[1:].sum()), abs=1e-8)


def test_werner_decompose_examples():
    wd = werner_decompose(np.outer(SINGLET, SINGLET))
    assert wd.p == pytest.approx(1) and wd.residual < 1e-14
    wd = werner_decompose(np.eye(4) / 4)
    assert wd.p == pytest.approx(0, abs=1e-15) and wd.residual < 1e-15
    wd = werner_decompose(np.diag([1, 0, 0, 0]).astype(complex))
    assert wd.residual > 0.1


def test_werner_formula_examples():
    assert werner_formulas(1) == pytest.approx((0, 1))
    assert werner_formulas(1 / 3)[1] == pytest.approx(0, abs=1e-15)
    sl, c = werner_formulas(0.623)
    assert sl == pytest.approx(0.459, abs=5e-4)
    assert c == pytest.approx(0.434, abs=1e-3)  # p itself is rounded to 3 decimals
    assert np.sqrt(2 * sl) == pytest.approx(0.958, abs=5e-4)
    with pytest.raises(ValueError):
        werner_formulas(-0.5)
    with pytest.raises(ValueError):
        werner_formulas(1.01)


@settings(max_examples=100, deadline=None)
@given(st.floats(-1 / 3, 1))
def test_werner_formulas_match_numerics(p):
    rho = werner_state(p)
    sl, c = werner_formulas(p)
    assert linear_entropy(rho) == pytest.approx(sl, abs=1e-12)
    assert wootters_concurrence(rho) == pytest.approx(c, abs=1e-12)
    assert werner_decompose(rho).p == pytest.approx(p, abs=1e-12)


def test_werner_monotone():
    ps = np.linspace(1 / 3 + 1e-6, 1, 50)
    sls, cs = zip(*(werner_formulas(p) for p in ps))
    assert np.all(np.diff(sls) < 0) and np.all(np.diff(cs) > 0)


def test_concurrence_inversion():
    for c in (0.1, 0.434, 0.955):
        assert werner_formulas(werner_p_from_concurrence(c))[1] == pytest.approx(c)


def test_reconstruction_preserves_concurrence():
    gs = heisenberg_ground_state(SpinSystemSpec.ring(6)).state
    for i, j in itertools.combinations(range(6), 2):
        r = partial_trace(gs, [i, j])
        wd = werner_decompose(r)
        assert wd.residual <= 1e-9
        assert wootters_concurrence(wd.reconstruct()) == pytest.approx(wootters_concurrence(r), abs=1e-12)


def test_report_roundtrip_and_csv():
    gs = heisenberg_ground_state(SpinSystemSpec.ring(4)).state
    rep = analyze(gs)
    again = EntanglementReport.from_dict(rep.to_dict())
    assert again.to_dict() == rep.to_dict()
    assert rep.max_pair() == ((0, 1), pytest.approx(0.5))
    assert rep.gme_concurrence == pytest.approx(min(np.sqrt(2 * sl) for _, sl in rep.bipartition_entropies), abs=1e-12)
    lines = rep.to_csv().splitlines()
    assert lines[0].startswith("kind,subset")
    assert sum(1 for ln in lines if ln.startswith("bipartition")) == 7
    assert sum(1 for ln in lines if ln.startswith("pair")) == 6
    assert "bipartition,1100," in rep.to_csv()
