"""
Desk-scale model systems: tight-binding determinants, Hubbard ground states by
exact diagonalization, and Heisenberg spin clusters.

Hopping convention: H_hop = sum_{(i,j) in edges} t_ij (c+_i c_j + c+_j c_i)
per spin, so t = -1 gives the usual bonding ground state.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy.sparse.csgraph import connected_components

from .errors import OpenShellError, SectorError, SectorTooLargeError
from .extraction import fix_phase
from .fock import FockState, OrbitalRotation, _block_sign, _combinations, _spread, build_closed_shell

DEFAULT_SECTOR_CAP = 2_000_000
DENSE_LIMIT = 3000
DEGENERACY_TOL = 1e-8


@dataclass(frozen=True)
class LatticeSpec:
    """Sites, hopping edges, on-site repulsion and optional density-density terms.

    ``density_density`` holds ``(i, j, V_ij)`` entries adding
    ``V_ij n_i n_j`` (PPP-style, user supplied coefficients).
    """

    M: int
    edges: tuple[tuple[int, int, float], ...]
    onsite_repulsion: float | tuple[float, ...] = 0.0
    topology: str = "custom"
    density_density: tuple[tuple[int, int, float], ...] = ()

    def __post_init__(self):
        edges = tuple((int(i), int(j), float(t)) for i, j, t in self.edges)
        object.__setattr__(self, "edges", edges)
        dd = tuple((int(i), int(j), float(v)) for i, j, v in self.density_density)
        object.__setattr__(self, "density_density", dd)
        if self.topology not in ("chain", "ring", "custom"):
            raise ValueError(f"unknown topology {self.topology!r}")
        for i, j, t in edges + dd:
            if not (0 <= i < self.M and 0 <= j < self.M) or i == j:
                raise ValueError(f"edge ({i}, {j}) invalid for {self.M} sites")
            if not np.isfinite(t):
                raise ValueError(f"non-finite coupling on edge ({i}, {j})")
        u = np.broadcast_to(np.asarray(self.onsite_repulsion, dtype=float), (self.M,))
        if np.any(u < 0) or not np.all(np.isfinite(u)):
            raise ValueError("on-site repulsion must be finite and non-negative")
        if self.M > 1:
            adj = sp.coo_matrix((np.ones(len(edges)), ([e[0] for e in edges], [e[1] for e in edges])), shape=(self.M, self.M))
            if connected_components(adj, directed=False)[0] != 1:
                raise ValueError("lattice graph is disconnected")

    @property
    def onsite(self) -> np.ndarray:
        return np.broadcast_to(np.asarray(self.onsite_repulsion, dtype=float), (self.M,)).copy()

    def with_repulsion(self, U) -> "LatticeSpec":
        return LatticeSpec(self.M, self.edges, U, self.topology, self.density_density)

    def scaled(self, alpha: float) -> "LatticeSpec":
        """All couplings multiplied by ``alpha`` (which must be >= 0 for the repulsion)."""
        return LatticeSpec(
            self.M,
            tuple((i, j, alpha * t) for i, j, t in self.edges),
            tuple(alpha * self.onsite),
            self.topology,
            tuple((i, j, alpha * v) for i, j, v in self.density_density),
        )


def chain(M: int, t: float = -1.0, U: float = 0.0) -> LatticeSpec:
    return LatticeSpec(M, tuple((i, i + 1, t) for i in range(M - 1)), U, "chain")


def ring(M: int, t: float = -1.0, U: float = 0.0) -> LatticeSpec:
    if M < 3:
        raise ValueError("a ring needs at least 3 sites")
    return LatticeSpec(M, tuple((i, (i + 1) % M, t) for i in range(M)), U, "ring")


def ssh_chain(M: int, t1: float = -1.0, t2: float = -0.5, U: float = 0.0) -> LatticeSpec:
    """Open chain with alternating hoppings; bond (0, 1) carries ``t1``."""
    return LatticeSpec(M, tuple((i, i + 1, t1 if i % 2 == 0 else t2) for i in range(M - 1)), U, "chain")


def hopping_matrix(spec: LatticeSpec) -> np.ndarray:
    h = np.zeros((spec.M, spec.M))
    for i, j, t in spec.edges:
        h[i, j] += t
        h[j, i] += t
    return h


@dataclass(frozen=True, eq=False)
class GroundStateResult:
    energy: float
    state: FockState | np.ndarray
    degenerate: bool
    residual: float = 0.0
    sz: float = 0.0


def tight_binding_determinant(spec: LatticeSpec, N: int, tol: float = DEGENERACY_TOL) -> tuple[FockState, OrbitalRotation]:
    """Closed-shell Slater determinant of the hopping Hamiltonian on the site basis.

    Returns the state and the MO rotation whose rows are the orbitals in
    increasing energy (occupied first).
    """
    if N % 2 or not 0 < N <= 2 * spec.M:
        raise ValueError(f"need an even electron number in 2..{2 * spec.M}, got {N}")
    eps, vecs = np.linalg.eigh(hopping_matrix(spec))
    nocc = N // 2
    if nocc < spec.M and eps[nocc] - eps[nocc - 1] < tol:
        raise OpenShellError(
            f"HOMO ({eps[nocc - 1]:.6g}) and LUMO ({eps[nocc]:.6g}) are degenerate; no closed shell at N={N}"
        )
    U = OrbitalRotation(vecs.T.astype(np.complex128))
    return build_closed_shell(U, N), U


# ---------------------------------------------------------------------------
# Hubbard model
# ---------------------------------------------------------------------------

def _hop_matrix_species(masks: np.ndarray, M: int, edges) -> sp.csr_matrix:
    """One-species hopping in a basis of orbital bitmasks (sorted)."""
    index = {int(m): k for k, m in enumerate(masks)}
    rows, cols, vals = [], [], []
    for k, m in enumerate(masks):
        m = int(m)
        for i, j, t in edges:
            for a, b in ((i, j), (j, i)):
                # c+_a c_b
                if (m >> b) & 1 and not (m >> a) & 1:
                    lo, hi = min(a, b), max(a, b)
                    between = bin(m & (((1 << hi) - 1) ^ ((1 << (lo + 1)) - 1))).count("1")
                    new = m ^ (1 << b) ^ (1 << a)
                    rows.append(index[new])
                    cols.append(k)
                    vals.append(t * (-1) ** between)
    n = len(masks)
    return sp.csr_matrix((vals, (rows, cols)), shape=(n, n))


def _occupations(masks: np.ndarray, M: int) -> np.ndarray:
    return ((masks[:, None] >> np.arange(M)) & 1).astype(float)


def hubbard_hamiltonian(spec: LatticeSpec, N: int, Sz: float, cap: int = DEFAULT_SECTOR_CAP):
    """Sparse Hamiltonian of the (N, Sz) sector and the canonical determinant of each basis state.

    The basis is the product (up configuration) x (down configuration), both in
    lexicographic combination order, with operators ordered all-up-then-all-down.
    """
    nup2 = N + 2 * Sz
    if abs(nup2 - round(nup2)) > 1e-12 or round(nup2) % 2:
        raise SectorError(f"Sz={Sz} incompatible with N={N}")
    nup = int(round(nup2)) // 2
    ndn = N - nup
    M = spec.M
    if not (0 <= nup <= M and 0 <= ndn <= M):
        raise SectorError(f"sector (N={N}, Sz={Sz}) is empty for {M} orbitals")
    _, mu = _combinations(M, nup)
    _, md = _combinations(M, ndn)
    dim = mu.size * md.size
    if dim > cap:
        raise SectorTooLargeError(f"sector dimension {dim} exceeds cap {cap}")
    hu = _hop_matrix_species(mu, M, spec.edges)
    hd = _hop_matrix_species(md, M, spec.edges)
    H = sp.kron(hu, sp.identity(md.size)) + sp.kron(sp.identity(mu.size), hd)
    nu_occ = _occupations(mu, M)
    nd_occ = _occupations(md, M)
    diag = (nu_occ * spec.onsite) @ nd_occ.T  # U_i n_iu n_id
    if spec.density_density:
        tot = nu_occ[:, None, :] + nd_occ[None, :, :]
        for i, j, v in spec.density_density:
            diag = diag + v * tot[:, :, i] * tot[:, :, j]
    H = (H + sp.diags(diag.ravel())).tocsr()
    gu, gd = np.meshgrid(mu, md, indexing="ij")
    gu, gd = gu.ravel(), gd.ravel()
    dets = _spread(gu, M) | (_spread(gd, M) << 1)
    signs = _block_sign(gu, gd, M)
    return H, dets, signs


def _lowest(H, k: int = 2):
    dim = H.shape[0]
    if dim <= DENSE_LIMIT:
        Hd = H.toarray() if sp.issparse(H) else np.asarray(H)
        if np.max(np.abs(Hd - Hd.conj().T)) > 1e-12 * max(1.0, np.abs(Hd).max()):
            raise ValueError("Hamiltonian is not Hermitian")
        w, v = np.linalg.eigh(Hd)
        return w[:k], v[:, :k]
    w, v = spla.eigsh(H, k=min(k, dim - 1), which="SA", tol=0)
    order = np.argsort(w)
    return w[order], v[:, order]


def _residual(H, vec, e) -> float:
    return float(np.linalg.norm(H @ vec - e * vec))


def hubbard_ground_state(spec: LatticeSpec, N: int, Sz: float = 0.0, cap: int = DEFAULT_SECTOR_CAP) -> GroundStateResult:
    H, dets, signs = hubbard_hamiltonian(spec, N, Sz, cap)
    w, v = _lowest(H, 2)
    vec = fix_phase(v[:, 0])
    degenerate = w.size > 1 and (w[1] - w[0]) < DEGENERACY_TOL * max(1.0, abs(w[0]))
    state = FockState(spec.M, N, dets, vec * signs)
    state = state.normalized()
    return GroundStateResult(float(w[0]), state, bool(degenerate), _residual(H, v[:, 0], w[0]), float(Sz))


# ---------------------------------------------------------------------------
# Heisenberg model
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SpinSystemSpec:
    n: int
    couplings: tuple[tuple[int, int, float], ...]

    def __post_init__(self):
        cs = tuple((int(i), int(j), float(J)) for i, j, J in self.couplings)
        object.__setattr__(self, "couplings", cs)
        if not cs:
            raise ValueError("at least one coupling is required")
        for i, j, J in cs:
            if not (0 <= i < self.n and 0 <= j < self.n) or i == j:
                raise ValueError(f"coupling ({i}, {j}) invalid for {self.n} spins")

    @classmethod
    def ring(cls, n: int, J: float = 1.0) -> "SpinSystemSpec":
        return cls(n, tuple((i, (i + 1) % n, J) for i in range(n)))

    @classmethod
    def chain(cls, n: int, J: float = 1.0) -> "SpinSystemSpec":
        return cls(n, tuple((i, i + 1, J) for i in range(n - 1)))


MAX_SPINS = 16


def _bit(n: int, i: int) -> int:
    """Bit of qubit position i (position 0 is the most significant)."""
    return 1 << (n - 1 - i)


def heisenberg_sector(spec: SpinSystemSpec, n_down: int):
    """Sparse H = sum J S_i . S_j on basis states with ``n_down`` down spins (bit value 1)."""
    n = spec.n
    states = np.array(
        sorted(sum(_bit(n, i) for i in c) for c in itertools.combinations(range(n), n_down)), dtype=np.int64
    )
    index = {int(s): k for k, s in enumerate(states)}
    rows, cols, vals = [], [], []
    for k, s in enumerate(states):
        s = int(s)
        diag = 0.0
        for i, j, J in spec.couplings:
            bi, bj = _bit(n, i), _bit(n, j)
            same = bool(s & bi) == bool(s & bj)
            diag += J * (0.25 if same else -0.25)
            if not same:
                rows.append(index[s ^ bi ^ bj])
                cols.append(k)
                vals.append(0.5 * J)
        rows.append(k)
        cols.append(k)
        vals.append(diag)
    d = states.size
    return sp.csr_matrix((vals, (rows, cols)), shape=(d, d)), states


def heisenberg_hamiltonian(spec: SpinSystemSpec) -> sp.csr_matrix:
    """Full 2^n x 2^n sparse Hamiltonian."""
    n = spec.n
    blocks = [heisenberg_sector(spec, k) for k in range(n + 1)]
    rows, cols, vals = [], [], []
    for H, states in blocks:
        coo = H.tocoo()
        rows.append(states[coo.row])
        cols.append(states[coo.col])
        vals.append(coo.data)
    return sp.csr_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(2**n, 2**n))


def heisenberg_ground_state(spec: SpinSystemSpec) -> GroundStateResult:
    """Lowest eigenvector of the Heisenberg cluster.

    Sectors are scanned by Sz; among degenerate sectors the lowest Sz wins, and
    the vector's phase is fixed so its largest component is real positive.
    """
    n = spec.n
    if n > MAX_SPINS:
        raise ValueError(f"at most {MAX_SPINS} spins supported, got {n}")
    results = []
    for n_down in range(n + 1):
        H, states = heisenberg_sector(spec, n_down)
        w, v = _lowest(H, 2)
        results.append((w, v, H, states, (n - 2 * n_down) / 2))
    e0 = min(r[0][0] for r in results)
    tol = DEGENERACY_TOL * max(1.0, abs(e0))
    ground = [r for r in results if r[0][0] - e0 < tol]
    w, v, H, states, sz = min(ground, key=lambda r: r[4])
    degenerate = len(ground) > 1 or (w.size > 1 and w[1] - w[0] < tol)
    vec = np.zeros(2**n, dtype=np.complex128)
    vec[states] = fix_phase(v[:, 0])
    return GroundStateResult(float(w[0]), vec, bool(degenerate), _residual(H, v[:, 0], w[0]), sz)


def _pauli_spin(n: int):
    sx = np.array([[0, 0.5], [0.5, 0]])
    sy = np.array([[0, -0.5j], [0.5j, 0]])
    sz = np.array([[0.5, 0], [0, -0.5]])
    ops = []
    for s in (sx, sy, sz):
        per = []
        for i in range(n):
            m = sp.identity(1, format="csr")
            for k in range(n):
                m = sp.kron(m, s if k == i else sp.identity(2), format="csr")
            per.append(m)
        ops.append(per)
    return ops


def total_spin_squared(vec: np.ndarray) -> float:
    """<S^2> of an n-spin state vector."""
    vec = np.asarray(vec, dtype=np.complex128)
    n = vec.size.bit_length() - 1
    total = 0.0
    for per in _pauli_spin(n):
        s = sum(per)
        w = s @ vec
        total += np.vdot(w, w).real
    return float(total / np.vdot(vec, vec).real)


def write_matrix_csv(H, path) -> None:
    """Dense real/complex matrix as CSV; complex entries are written as interleaved (re, im)."""
    m = H.toarray() if sp.issparse(H) else np.asarray(H)
    with open(path, "w") as fh:
        for row in m:
            fh.write(",".join(f"{x.real:.16e},{x.imag:.16e}" for x in np.asarray(row, dtype=complex)) + "\n")
