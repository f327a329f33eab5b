"""
n-spin reduced density matrices extracted from a many-electron state.

For an ordered list of orbitals (o_1, ..., o_n) the unnormalized matrix is

    Gamma[s, s'] = <Psi| d+_{o_n s'_n} ... d+_{o_1 s'_1} d_{o_1 s_1} ... d_{o_n s_n} |Psi>

computed as the Gram matrix of the 2^n projected states
``v_s = d_{o_1 s_1} ... d_{o_n s_n} |Psi>``.  Spin index vectors are packed
into integers with the spin of o_1 as the leading (most significant) qubit and
the convention up = 0, down = 1.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import NumericalPreconditionError, PurityError, SectorError
from .fock import FockState, popcount

HERMITIAN_TOL = 1e-10
PURITY_TOL = 1e-8


@dataclass(frozen=True)
class ExtractionSpec:
    """Ordered, distinct orbitals defining the extracted spins."""

    orbitals: tuple[int, ...]

    def __post_init__(self):
        orbs = tuple(int(o) for o in self.orbitals)
        object.__setattr__(self, "orbitals", orbs)
        if not orbs:
            raise ValueError("extraction needs at least one orbital")
        if len(set(orbs)) != len(orbs):
            raise ValueError(f"repeated orbitals in extraction {orbs}")
        if min(orbs) < 0:
            raise IndexError("negative orbital index")

    @property
    def n(self) -> int:
        return len(self.orbitals)

    def check(self, M: int) -> None:
        bad = [o for o in self.orbitals if o >= M]
        if bad:
            raise IndexError(f"orbitals {bad} outside basis of size {M}")


@dataclass(frozen=True, eq=False)
class SpinDensityMatrix:
    """2^n x 2^n spin density matrix with the trace of the raw nBRDM as ``weight``."""

    n: int
    matrix: np.ndarray
    weight: float

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.matrix, dtype=dtype)

    @property
    def trace(self) -> float:
        return float(np.real(np.trace(self.matrix)))

    def purity(self) -> float:
        """Tr(rho^2) of the normalized matrix."""
        m = self.matrix / self.trace
        return float(np.sum(np.abs(m) ** 2))

    def is_hermitian(self, tol: float = HERMITIAN_TOL) -> bool:
        return bool(np.max(np.abs(self.matrix - self.matrix.conj().T)) <= tol)

    def min_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh(self.matrix).min())


def _as_spec(orbitals) -> ExtractionSpec:
    return orbitals if isinstance(orbitals, ExtractionSpec) else ExtractionSpec(tuple(orbitals))


def projected_vectors(state: FockState, orbitals) -> tuple[np.ndarray, np.ndarray]:
    """Residual determinants and the matrix V with ``V[D, s] = <D| v_s>``.

    Annihilators are applied right to left as written, d_{o_n} first.  Branches
    over the 2^n spin strings share prefixes, so the cost is ~2^(n+1) vectorized
    passes over the determinant list.
    """
    spec = _as_spec(orbitals)
    spec.check(state.M)
    n = spec.n
    if n > state.n_particles:
        raise SectorError(f"cannot extract {n} spins from {state.n_particles} electrons")
    branches = [(0, state.dets, state.amps)]
    for pos in reversed(range(n)):
        orb = spec.orbitals[pos]
        shift = n - 1 - pos
        grown = []
        for sigma, dets, amps in branches:
            for s in (0, 1):
                mask = np.int64(1) << (2 * orb + s)
                sel = (dets & mask) != 0
                if not sel.any():
                    continue
                d = dets[sel]
                sign = 1 - 2 * (popcount(d & (mask - 1)) & 1)
                grown.append((sigma | (s << shift), d ^ mask, amps[sel] * sign))
        branches = grown
    if not branches:
        return np.zeros(0, dtype=np.int64), np.zeros((0, 2**n), dtype=np.complex128)
    residual, inverse = np.unique(np.concatenate([b[1] for b in branches]), return_inverse=True)
    V = np.zeros((residual.size, 2**n), dtype=np.complex128)
    cols = np.concatenate([np.full(b[1].size, b[0]) for b in branches])
    np.add.at(V, (inverse, cols), np.concatenate([b[2] for b in branches]))
    return residual, V


def nbrdm(state: FockState, orbitals) -> SpinDensityMatrix:
    """Unnormalized n-body spin reduced density matrix over ``orbitals``."""
    spec = _as_spec(orbitals)
    _, V = projected_vectors(state, spec)
    gamma = V.T @ V.conj()
    gamma = 0.5 * (gamma + gamma.conj().T)
    return SpinDensityMatrix(spec.n, gamma, float(np.real(np.trace(gamma))))


def normalize_spin_state(gamma: SpinDensityMatrix) -> SpinDensityMatrix:
    tr = gamma.trace
    if not tr > 0:
        raise NumericalPreconditionError(
            "zero trace: no component with the extraction orbitals occupied"
        )
    return SpinDensityMatrix(gamma.n, gamma.matrix / tr, gamma.weight)


def fix_phase(vec: np.ndarray) -> np.ndarray:
    """Rotate the global phase so the largest-magnitude component is real positive."""
    vec = np.asarray(vec, dtype=np.complex128)
    mags = np.abs(vec)
    k = int(np.argmax(mags >= mags.max() * (1 - 1e-9)))
    return vec * (np.conj(vec[k]) / mags[k])


def extract_pure(rho, tol: float = PURITY_TOL) -> np.ndarray:
    """Dominant eigenvector of a (numerically) pure normalized spin state."""
    m = np.asarray(rho)
    m = m / np.real(np.trace(m))
    purity = float(np.sum(np.abs(m) ** 2))
    if purity < 1 - tol:
        raise PurityError(f"state is mixed (purity {purity:.12f}); pure extraction needs n = N")
    w, v = np.linalg.eigh(m)
    return fix_phase(v[:, -1])


def dense_spin_state(state: FockState, orbitals) -> tuple[np.ndarray, float]:
    """Normalized pure spin vector and extraction weight, for n = N extractions."""
    rho = normalize_spin_state(nbrdm(state, orbitals))
    return extract_pure(rho), rho.weight


@dataclass(frozen=True, eq=False)
class PairSingletState:
    n: int
    pairing: tuple[tuple[int, int], ...]
    vector: np.ndarray


def pair_singlet_state(n: int, pairing: Sequence[Sequence[int]]) -> PairSingletState:
    """Product of singlets (|ud> - |du>)/sqrt2 on each pair (i, j) of qubit positions.

    The first index of each pair carries the up spin in the positive term.
    """
    pairs = tuple((int(i), int(j)) for i, j in pairing)
    flat = sorted(itertools.chain.from_iterable(pairs))
    if n % 2 or flat != list(range(n)):
        raise ValueError(f"{pairs} is not a perfect matching of {n} spins")
    vec = np.zeros(2**n, dtype=np.complex128)
    r = 1 / np.sqrt(2)
    for choice in itertools.product((0, 1), repeat=len(pairs)):
        idx, amp = 0, 1.0
        for (i, j), c in zip(pairs, choice):
            # c = 0 -> i up, j down (+); c = 1 -> i down, j up (-)
            if c:
                idx |= 1 << (n - 1 - i)
                amp *= -r
            else:
                idx |= 1 << (n - 1 - j)
                amp *= r
        vec[idx] += amp
    return PairSingletState(n, pairs, vec)


def write_spin_matrix_csv(rho, path) -> None:
    """Row-major CSV, each row holding 2^n entries as interleaved (re, im)."""
    m = np.asarray(rho)
    with open(path, "w") as fh:
        for row in m:
            fh.write(",".join(f"{x.real:.16e},{x.imag:.16e}" for x in row) + "\n")


def read_spin_matrix_csv(path) -> np.ndarray:
    raw = np.loadtxt(path, delimiter=",", ndmin=2)
    return raw[:, 0::2] + 1j * raw[:, 1::2]
