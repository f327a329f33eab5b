"""
Many-electron states on a finite spin-orbital basis.

Spin-orbitals are ordered orbital-major, spin-up before spin-down, so the
canonical index of ``(orbital, spin)`` is ``2*orbital + spin``.  A determinant
is stored as an integer bitmask (bit ``p`` <-> canonical index ``p``) and
stands for

    d+_{p1} d+_{p2} ... d+_{pk} |vac>,   p1 < p2 < ... < pk

i.e. creation operators written left to right in increasing canonical index.
Every fermionic sign in the package follows from this single convention.

A ``FockState`` is a sparse map determinant -> complex amplitude within a fixed
particle-number sector, held as two sorted numpy arrays.
"""
from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import SectorError

PRUNE_TOL = 1e-14
UNITARY_TOL = 1e-10
MAX_ORBITALS = 31  # 2M bits must fit in int64


class Spin(enum.IntEnum):
    UP = 0
    DOWN = 1


UP = Spin.UP
DOWN = Spin.DOWN


@dataclass(frozen=True)
class SpinOrbital:
    orbital: int
    spin: Spin

    @property
    def index(self) -> int:
        return 2 * self.orbital + int(self.spin)

    def check(self, M: int) -> None:
        if not 0 <= self.orbital < M:
            raise IndexError(f"orbital {self.orbital} outside basis of size {M}")


def _spin_orbital(so) -> SpinOrbital:
    if isinstance(so, SpinOrbital):
        return so
    orb, spin = so
    return SpinOrbital(int(orb), Spin(spin))


def popcount(x: np.ndarray) -> np.ndarray:
    return np.bitwise_count(np.asarray(x, dtype=np.int64)).astype(np.int64)


def det_from_string(bits: str) -> int:
    """Bitmask from a 0/1 string whose k-th character is canonical index k."""
    value = 0
    for k, ch in enumerate(bits):
        if ch == "1":
            value |= 1 << k
        elif ch != "0":
            raise ValueError(f"invalid occupation character {ch!r}")
    return value


def det_to_string(det: int, M: int) -> str:
    return "".join("1" if (int(det) >> k) & 1 else "0" for k in range(2 * M))


def det_from_occupations(occupied: Iterable) -> int:
    """Bitmask from an iterable of ``(orbital, spin)`` pairs."""
    value = 0
    for so in occupied:
        value |= 1 << _spin_orbital(so).index
    return value


class FockState:
    """Sparse many-electron state with fixed basis size and particle number.

    Parameters
    ----------
    M : int
        Number of spatial orbitals (the basis has 2M spin-orbitals).
    n_particles : int
        Particle number of the sector.
    dets, amps : array_like
        Determinant bitmasks and amplitudes.  Duplicates are summed and
        entries with ``|amp| <= prune`` are dropped.
    """

    __slots__ = ("M", "n_particles", "_dets", "_amps")

    def __init__(self, M: int, n_particles: int, dets=(), amps=(), *, prune: float = PRUNE_TOL):
        if not 0 < M <= MAX_ORBITALS:
            raise ValueError(f"basis size must be in 1..{MAX_ORBITALS}, got {M}")
        if not 0 <= n_particles <= 2 * M:
            raise SectorError(f"{n_particles} particles do not fit in {2 * M} spin-orbitals")
        dets = np.asarray(dets, dtype=np.int64).reshape(-1)
        amps = np.asarray(amps, dtype=np.complex128).reshape(-1)
        if dets.shape != amps.shape:
            raise ValueError("dets and amps must have equal length")
        if dets.size:
            if np.any(dets < 0) or np.any(dets >> (2 * M)):
                raise ValueError("determinant has bits outside the basis")
            if np.any(popcount(dets) != n_particles):
                raise SectorError("determinant popcount differs from n_particles")
            if not np.all(np.isfinite(amps)):
                raise ValueError("non-finite amplitude")
            dets, inverse = np.unique(dets, return_inverse=True)
            summed = np.zeros(dets.size, dtype=np.complex128)
            np.add.at(summed, inverse, amps)
            keep = np.abs(summed) > prune
            dets, amps = dets[keep], summed[keep]
        dets.setflags(write=False)
        amps.setflags(write=False)
        self.M = int(M)
        self.n_particles = int(n_particles)
        self._dets = dets
        self._amps = amps

    # construction helpers -------------------------------------------------
    @classmethod
    def vacuum(cls, M: int) -> "FockState":
        return cls(M, 0, [0], [1.0])

    @classmethod
    def zero(cls, M: int, n_particles: int) -> "FockState":
        return cls(M, n_particles)

    @classmethod
    def from_dict(cls, M: int, n_particles: int, mapping: Mapping[int, complex], **kw) -> "FockState":
        return cls(M, n_particles, list(mapping.keys()), list(mapping.values()), **kw)

    @classmethod
    def determinant(cls, M: int, occupied: Iterable, amplitude: complex = 1.0) -> "FockState":
        det = det_from_occupations(occupied)
        return cls(M, int(popcount(det)), [det], [amplitude])

    # accessors ------------------------------------------------------------
    @property
    def dets(self) -> np.ndarray:
        return self._dets

    @property
    def amps(self) -> np.ndarray:
        return self._amps

    @property
    def amplitudes(self) -> dict[int, complex]:
        return {int(d): complex(a) for d, a in zip(self._dets, self._amps)}

    def amplitude(self, det: int) -> complex:
        i = np.searchsorted(self._dets, det)
        if i < self._dets.size and self._dets[i] == det:
            return complex(self._amps[i])
        return 0j

    def __len__(self) -> int:
        return int(self._dets.size)

    def __repr__(self) -> str:
        return f"FockState(M={self.M}, n_particles={self.n_particles}, terms={len(self)})"

    def is_zero(self) -> bool:
        return self._dets.size == 0

    def norm(self) -> float:
        return float(np.linalg.norm(self._amps))

    def normalized(self) -> "FockState":
        nrm = self.norm()
        if nrm == 0.0:
            raise ValueError("cannot normalize the zero state")
        return FockState(self.M, self.n_particles, self._dets, self._amps / nrm)

    def sz(self) -> np.ndarray:
        """Twice the Sz of each determinant (N_up - N_down)."""
        return popcount(self._dets & _EVEN_MASK) - popcount(self._dets & _ODD_MASK)

    # linear structure -----------------------------------------------------
    def _check_same_sector(self, other: "FockState") -> None:
        if self.M != other.M or self.n_particles != other.n_particles:
            raise SectorError(
                f"sector mismatch: (M={self.M}, N={self.n_particles}) vs "
                f"(M={other.M}, N={other.n_particles})"
            )

    def __add__(self, other: "FockState") -> "FockState":
        self._check_same_sector(other)
        return FockState(
            self.M,
            self.n_particles,
            np.concatenate([self._dets, other._dets]),
            np.concatenate([self._amps, other._amps]),
        )

    def __sub__(self, other: "FockState") -> "FockState":
        return self + (-1.0) * other

    def __mul__(self, scalar: complex) -> "FockState":
        return FockState(self.M, self.n_particles, self._dets, self._amps * complex(scalar))

    __rmul__ = __mul__

    def __neg__(self) -> "FockState":
        return -1.0 * self


_EVEN_MASK = int("01" * 31, 2)  # bits 0, 2, 4, ... (spin up)
_ODD_MASK = _EVEN_MASK << 1


def combine(terms: Sequence[tuple[complex, FockState]]) -> FockState:
    """Linear combination ``sum_i c_i |psi_i>`` of same-sector states."""
    if not terms:
        raise ValueError("empty combination")
    first = terms[0][1]
    for _, st in terms[1:]:
        first._check_same_sector(st)
    dets = np.concatenate([st.dets for _, st in terms])
    amps = np.concatenate([st.amps * complex(c) for c, st in terms])
    return FockState(first.M, first.n_particles, dets, amps)


# ---------------------------------------------------------------------------
# second-quantized operators
# ---------------------------------------------------------------------------

def apply_creation(state: FockState, so) -> FockState:
    """Apply d+ for spin-orbital ``so`` (a ``SpinOrbital`` or ``(orbital, spin)``)."""
    so = _spin_orbital(so)
    so.check(state.M)
    if state.n_particles == 2 * state.M:
        raise SectorError("creation on a completely filled basis leaves the Fock space")
    mask = np.int64(1) << so.index
    dets, amps = state.dets, state.amps
    free = (dets & mask) == 0
    d = dets[free]
    sign = 1 - 2 * (popcount(d & (mask - 1)) & 1)
    return FockState(state.M, state.n_particles + 1, d | mask, amps[free] * sign)


def apply_annihilation(state: FockState, so) -> FockState:
    """Apply d for spin-orbital ``so``; the adjoint of :func:`apply_creation`."""
    so = _spin_orbital(so)
    so.check(state.M)
    if state.n_particles == 0:
        raise SectorError("annihilation on the vacuum sector")
    mask = np.int64(1) << so.index
    dets, amps = state.dets, state.amps
    occ = (dets & mask) != 0
    d = dets[occ]
    sign = 1 - 2 * (popcount(d & (mask - 1)) & 1)
    return FockState(state.M, state.n_particles - 1, d ^ mask, amps[occ] * sign)


def inner_product(a: FockState, b: FockState) -> complex:
    """``<a|b>``, conjugate-linear in ``a``."""
    a._check_same_sector(b)
    _, ia, ib = np.intersect1d(a.dets, b.dets, assume_unique=True, return_indices=True)
    return complex(np.sum(np.conj(a.amps[ia]) * b.amps[ib]))


def fidelity(a: FockState, b: FockState, *, tol: float = 1e-8) -> float:
    """Overlap modulus ``|<a|b>|`` of two normalized states.

    The modulus (not its square) is returned.
    """
    a._check_same_sector(b)
    for st in (a, b):
        if abs(st.norm() - 1.0) > tol:
            raise ValueError(f"fidelity expects normalized states (norm {st.norm():.3e})")
    return float(min(1.0, abs(inner_product(a, b))))


def apply_singlet_creation(state: FockState, j: int, k: int) -> FockState:
    """Apply S+_{jk} = (d+_{j,up} d+_{k,down} - d+_{j,down} d+_{k,up}) / 2."""
    for o in (j, k):
        if not 0 <= o < state.M:
            raise IndexError(f"orbital {o} outside basis of size {state.M}")
    if state.n_particles + 2 > 2 * state.M:
        raise SectorError("singlet creation overfills the basis")
    t1 = apply_creation(apply_creation(state, (k, DOWN)), (j, UP))
    t2 = apply_creation(apply_creation(state, (k, UP)), (j, DOWN))
    return combine([(0.5, t1), (-0.5, t2)])


# ---------------------------------------------------------------------------
# orbital rotations
# ---------------------------------------------------------------------------

class OrbitalRotation:
    """Unitary single-particle transformation ``c+_i = sum_j u_ij d+_j``.

    Row ``i`` of the matrix holds the expansion of old orbital ``i`` on the
    new orbitals; the same matrix acts on both spin species.
    """

    __slots__ = ("matrix",)

    def __init__(self, matrix, *, tol: float = UNITARY_TOL):
        m = np.array(matrix, dtype=np.complex128)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError(f"rotation must be square, got shape {m.shape}")
        err = np.max(np.abs(m @ m.conj().T - np.eye(m.shape[0])))
        if err > tol:
            raise ValueError(f"matrix is not unitary (max |UU^+ - 1| = {err:.2e})")
        m.setflags(write=False)
        self.matrix = m

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @classmethod
    def identity(cls, M: int) -> "OrbitalRotation":
        return cls(np.eye(M))

    @classmethod
    def dft(cls, M: int) -> "OrbitalRotation":
        """Unitary discrete Fourier transform, ``u_jk = w^(jk) / sqrt(M)`` with ``w = exp(2 pi i / M)``.

        For M = 4 this is the two-qubit quantum Fourier transform.
        """
        j = np.arange(M)
        return cls(np.exp(2j * np.pi * np.outer(j, j) / M) / np.sqrt(M))

    @classmethod
    def random(cls, M: int, rng=None) -> "OrbitalRotation":
        from scipy.stats import unitary_group

        rng = np.random.default_rng(rng)
        return cls(unitary_group.rvs(M, random_state=rng) if M > 1 else np.exp(2j * np.pi * rng.random()) * np.eye(1))

    def dagger(self) -> "OrbitalRotation":
        return OrbitalRotation(self.matrix.conj().T)

    def __matmul__(self, other: "OrbitalRotation") -> "OrbitalRotation":
        return OrbitalRotation(self.matrix @ other.matrix)

    def __repr__(self) -> str:
        return f"OrbitalRotation(dim={self.dim})"


@lru_cache(maxsize=None)
def _combinations(M: int, k: int) -> tuple[np.ndarray, np.ndarray]:
    """All k-subsets of range(M) in lexicographic order, as index array and orbital bitmask."""
    combos_list = list(itertools.combinations(range(M), k))
    combos = np.array(combos_list, dtype=np.int64).reshape(len(combos_list), k)
    masks = np.sum(np.left_shift(np.int64(1), combos), axis=1).astype(np.int64) if k else np.zeros(1, np.int64)
    return combos, masks


def _spread(orbital_mask: np.ndarray, M: int) -> np.ndarray:
    """Map orbital bit j to bit 2j."""
    out = np.zeros_like(orbital_mask)
    for j in range(M):
        out |= ((orbital_mask >> j) & 1) << (2 * j)
    return out


def _compress(det: np.ndarray, spin: int, M: int) -> np.ndarray:
    """Orbital bitmask of the given spin species in ``det``."""
    out = np.zeros_like(det)
    for j in range(M):
        out |= ((det >> (2 * j + spin)) & 1) << j
    return out


def _block_sign(up: np.ndarray, dn: np.ndarray, M: int) -> np.ndarray:
    """Sign relating canonical (interleaved) order to all-up-then-all-down order.

    Counts pairs (down electron in orbital j, up electron in orbital i) with
    j < i: each such pair is out of order in the blocked product.
    """
    count = np.zeros_like(up)
    for j in range(M):
        above = up >> (j + 1)
        count += ((dn >> j) & 1) * popcount(above)
    return 1 - 2 * (count & 1)


_MINOR_CHUNK = 2_000_000


def _minors(u: np.ndarray, rows: np.ndarray) -> np.ndarray:
    """det(u[R, C]) for every row-set R in ``rows`` and every column k-subset C (lexicographic)."""
    nR, k = rows.shape
    M = u.shape[1]
    cols, _ = _combinations(M, k)
    if k == 0:
        return np.ones((nR, 1), dtype=np.complex128)
    out = np.empty((nR, cols.shape[0]), dtype=np.complex128)
    step = max(1, _MINOR_CHUNK // (cols.shape[0] * k * k))
    for start in range(0, nR, step):
        sub = u[rows[start:start + step]]  # (r, k, M)
        blocks = np.moveaxis(sub[:, :, cols], 2, 1)  # (r, nC, k, k)
        out[start:start + step] = np.linalg.det(blocks)
    return out


def _mask_to_rows(masks: np.ndarray, M: int, k: int) -> np.ndarray:
    bits = (masks[:, None] >> np.arange(M)) & 1
    rows = np.nonzero(bits)[1].reshape(masks.size, k)
    return rows


def rotate_orbitals(state: FockState, U: OrbitalRotation) -> FockState:
    """Express ``state`` (written on the old orbitals c) on the new orbitals d.

    An up-spin (down-spin) string of occupied old orbitals R expands into
    ``sum_C det(U[R, C]) d+_C``, so each spin sector transforms with the
    k-th compound matrix of U; multi-determinant states transform term by term.
    """
    M = state.M
    if U.dim != M:
        raise SectorError(f"rotation dimension {U.dim} differs from basis size {M}")
    if state.is_zero():
        return state
    u = U.matrix
    dets, amps = state.dets, state.amps
    up = _compress(dets, 0, M)
    dn = _compress(dets, 1, M)
    sign_in = _block_sign(up, dn, M)
    nup = popcount(up)
    out_d, out_a = [], []
    for ku in np.unique(nup):
        sel = nup == ku
        kd = state.n_particles - ku
        up_s, dn_s = up[sel], dn[sel]
        ru, iu = np.unique(up_s, return_inverse=True)
        rd, idn = np.unique(dn_s, return_inverse=True)
        psi = np.zeros((ru.size, rd.size), dtype=np.complex128)
        np.add.at(psi, (iu, idn), amps[sel] * sign_in[sel])
        cu = _minors(u, _mask_to_rows(ru, M, ku))  # (nRu, nCu)
        cd = _minors(u, _mask_to_rows(rd, M, kd))
        rotated = cu.T @ psi @ cd  # (nCu, nCd)
        _, mu = _combinations(M, int(ku))
        _, md = _combinations(M, int(kd))
        gu, gd = np.meshgrid(mu, md, indexing="ij")
        gu, gd = gu.ravel(), gd.ravel()
        new = _spread(gu, M) | (_spread(gd, M) << 1)
        out_d.append(new)
        out_a.append(rotated.ravel() * _block_sign(gu, gd, M))
    return FockState(M, state.n_particles, np.concatenate(out_d), np.concatenate(out_a))


def _check_closed_shell(U: OrbitalRotation, N: int) -> None:
    if N % 2:
        raise ValueError(f"closed-shell states need an even particle number, got {N}")
    if not 0 <= N <= 2 * U.dim:
        raise ValueError(f"{N} electrons do not fit in {U.dim} orbitals")


def build_closed_shell(U: OrbitalRotation, N: int) -> FockState:
    """Doubly occupy the first N/2 old orbitals and express the result on the new basis."""
    _check_closed_shell(U, N)
    ref = FockState.determinant(U.dim, [(i, s) for i in range(N // 2) for s in (UP, DOWN)])
    return rotate_orbitals(ref, U).normalized()


def build_singlet_product(U: OrbitalRotation, N: int) -> FockState:
    """Same state as :func:`build_closed_shell`, assembled from singlet creation operators.

    Each doubly occupied old orbital i contributes the pair operator
    ``sum_{j,k} u_ij u_ik S+_{jk}``; the factors are applied to the vacuum one
    after another.
    """
    _check_closed_shell(U, N)
    M = U.dim
    u = U.matrix
    state = FockState.vacuum(M)
    for i in reversed(range(N // 2)):
        terms = []
        for j in range(M):
            for k in range(M):
                c = u[i, j] * u[i, k]
                if abs(c) > PRUNE_TOL:
                    terms.append((c, apply_singlet_creation(state, j, k)))
        state = combine(terms)
    return state.normalized()
