import itertools

import numpy as np
import pytest

import dense_oracle as dense
from conftest import random_state
from fermispin import DOWN, UP, FockState, NumericalPreconditionError, OrbitalRotation, PurityError, SectorError
from fermispin.extraction import (
    ExtractionSpec,
    extract_pure,
    nbrdm,
    normalize_spin_state,
    pair_singlet_state,
    read_spin_matrix_csv,
    write_spin_matrix_csv,
)
from fermispin.fock import apply_singlet_creation, build_closed_shell
from fermispin.measures import werner_decompose, partial_trace
from fermispin.models import SpinSystemSpec, heisenberg_ground_state, ring, tight_binding_determinant

SINGLET = np.array([0, 1, -1, 0]) / np.sqrt(2)


def test_extraction_spec_validation():
    with pytest.raises(ValueError):
        ExtractionSpec((0, 0))
    with pytest.raises(ValueError):
        ExtractionSpec(())
    with pytest.raises(IndexError):
        ExtractionSpec((0, 4)).check(4)


def test_two_particle_singlet():
    s = apply_singlet_creation(FockState.vacuum(2), 0, 1).normalized()
    rho = normalize_spin_state(nbrdm(s, [0, 1]))
    assert np.allclose(rho.matrix, np.outer(SINGLET, SINGLET))


def test_doubly_occupied_determinant_is_diagonal():
    s = FockState.determinant(2, [(0, UP), (0, DOWN), (1, UP), (1, DOWN)])
    g = nbrdm(s, [0, 1])
    assert np.allclose(g.matrix, np.diag(np.diag(g.matrix)))
    assert np.allclose(g.matrix, dense.dense_nbrdm(s, [0, 1]))
    assert np.allclose(np.diag(g.matrix), 1)


def test_too_many_spins():
    with pytest.raises(SectorError):
        nbrdm(FockState.determinant(2, [(0, UP)]), [0, 1])
    with pytest.raises(ValueError):
        nbrdm(FockState.determinant(2, [(0, UP), (1, UP)]), [1, 1])


def test_normalize():
    s = FockState.determinant(2, [(0, UP), (0, DOWN), (1, UP), (1, DOWN)])
    g = nbrdm(s, [0, 1])
    assert g.weight == pytest.approx(4)
    rho = normalize_spin_state(g)
    assert rho.trace == pytest.approx(1) and rho.weight == pytest.approx(4)


def test_zero_trace_raises():
    s = FockState.determinant(3, [(0, UP), (0, DOWN)])
    with pytest.raises(NumericalPreconditionError):
        normalize_spin_state(nbrdm(s, [1, 2]))


def test_dft_state_weight_and_structure():
    s = build_closed_shell(OrbitalRotation.dft(4), 4)
    g = nbrdm(s, [0, 1, 2, 3])
    # six singly occupied configurations with |amp|^2 = (16,16,4,4,4,4)/256
    assert g.weight == pytest.approx(48 / 256, abs=1e-14)
    rho = normalize_spin_state(g)
    assert rho.purity() == pytest.approx(1, abs=1e-12)
    psi = extract_pure(rho)
    ring_gs = heisenberg_ground_state(SpinSystemSpec.ring(4)).state
    assert abs(np.vdot(ring_gs, psi)) == pytest.approx(1, abs=1e-12)


def test_extract_pure_errors():
    with pytest.raises(PurityError):
        extract_pure(np.eye(4) / 4)
    v = extract_pure(np.outer(SINGLET, SINGLET))
    assert np.allclose(v, -SINGLET) or np.allclose(v, SINGLET)


def test_extract_pure_phase_convention():
    v = np.array([0.3, -0.8j, 0.2, 0.469])
    v = v / np.linalg.norm(v)
    out = extract_pure(np.outer(v, v.conj()))
    k = np.argmax(np.abs(out))
    assert out[k].imag == pytest.approx(0, abs=1e-14) and out[k].real > 0


def test_pair_singlets():
    s2 = pair_singlet_state(2, [(0, 1)])
    assert np.allclose(s2.vector, SINGLET)
    a = pair_singlet_state(4, [(0, 1), (2, 3)]).vector
    b = pair_singlet_state(4, [(3, 0), (1, 2)]).vector
    c = pair_singlet_state(4, [(0, 2), (1, 3)]).vector
    # first-listed index carries the up spin: with S_41 this overlap is +1/2
    assert np.vdot(a, b) == pytest.approx(0.5)
    assert np.allclose(c, a - b)
    assert np.linalg.matrix_rank(np.array([a, b, c]), tol=1e-10) == 2
    for v in (a, b, c):
        assert np.linalg.norm(v) == pytest.approx(1)
    with pytest.raises(ValueError):
        pair_singlet_state(4, [(0, 1), (1, 2)])
    with pytest.raises(ValueError):
        pair_singlet_state(3, [(0, 1)])


def test_oracle_equivalence_small(rng):
    for M in (1, 2, 3):
        for N in range(1, 2 * M + 1):
            psi = random_state(rng, M, N)
            for n in range(1, min(N, M) + 1):
                orbs = list(rng.permutation(M)[:n])
                got = nbrdm(psi, orbs).matrix
                assert np.allclose(got, dense.dense_nbrdm(psi, orbs), atol=1e-12)


def test_hermitian_psd_and_sz_blocks(rng):
    for _ in range(20):
        M = int(rng.integers(2, 5))
        N = int(rng.integers(2, 2 * M))
        sz = N % 2 if rng.random() < 0.5 else -(N % 2)
        psi = random_state(rng, M, N, sz=sz)
        n = int(rng.integers(1, min(N, M) + 1))
        orbs = list(rng.permutation(M)[:n])
        g = nbrdm(psi, orbs)
        assert g.is_hermitian(1e-10)
        assert g.min_eigenvalue() >= -1e-10
        downs = np.array([bin(k).count("1") for k in range(2**n)])
        off_block = downs[:, None] != downs[None, :]
        assert np.max(np.abs(g.matrix[off_block]), initial=0) < 1e-10


def test_permutation_covariance(rng):
    for _ in range(10):
        M = 4
        psi = random_state(rng, M, 4, sz=0)
        orbs = [0, 1, 2, 3]
        perm = list(rng.permutation(4))
        base = normalize_spin_state(nbrdm(psi, orbs)).matrix
        permuted = normalize_spin_state(nbrdm(psi, [orbs[k] for k in perm])).matrix
        t = base.reshape([2] * 8)
        expected = np.transpose(t, perm + [4 + k for k in perm]).reshape(16, 16)
        assert np.allclose(permuted, expected, atol=1e-12)


def test_closed_shell_full_extraction_is_pure(rng):
    for M, N in ((2, 2), (4, 4), (6, 6), (5, 4), (6, 4)):
        s = build_closed_shell(OrbitalRotation.random(M, rng), N)
        orbs = list(rng.permutation(M)[:N])
        rho = normalize_spin_state(nbrdm(s, orbs))
        assert rho.purity() == pytest.approx(1, abs=1e-9)


def test_werner_bound_on_closed_shell_pairs(rng):
    for _ in range(10):
        M = int(rng.integers(2, 6))
        N = 2 * int(rng.integers(1, M + 1))
        s = build_closed_shell(OrbitalRotation.random(M, rng), N)
        i, j = rng.permutation(M)[:2]
        g = nbrdm(s, [i, j])
        if g.weight < 1e-12:
            continue
        wd = werner_decompose(normalize_spin_state(g).matrix)
        assert -1 / 3 - 1e-10 <= wd.p <= 1 + 1e-10
        assert wd.residual < 1e-9


def test_spin_matrix_csv_roundtrip(tmp_path, rng):
    s = random_state(rng, 3, 3)
    rho = normalize_spin_state(nbrdm(s, [0, 2]))
    path = tmp_path / "rho.csv"
    write_spin_matrix_csv(rho, path)
    assert np.allclose(read_spin_matrix_csv(path), rho.matrix, atol=1e-15)
    assert len(path.read_text().splitlines()) == 4
