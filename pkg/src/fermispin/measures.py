"""
Entanglement of extracted spin states.

Qubit positions are 0-based; position 0 is the leading qubit (spin of the
first extraction orbital).  Bipartitions are kept in a canonical form where
qubit 0 belongs to ``part_a``.
"""
from __future__ import annotations

import csv
import io
import itertools
from dataclasses import dataclass, field

import numpy as np

from .errors import PurityError

TIE_TOL = 1e-9
NORM_TOL = 1e-8

SINGLET = np.array([0, 1, -1, 0], dtype=np.complex128) / np.sqrt(2)
_YY = np.kron(np.array([[0, -1j], [1j, 0]]), np.array([[0, -1j], [1j, 0]]))


@dataclass(frozen=True, order=True)
class Bipartition:
    n: int
    part_a: tuple[int, ...]

    def __post_init__(self):
        a = tuple(sorted(int(i) for i in self.part_a))
        object.__setattr__(self, "part_a", a)
        if not a or len(a) >= self.n or a[0] < 0 or a[-1] >= self.n or len(set(a)) != len(a):
            raise ValueError(f"{a} is not a proper nonempty subset of {self.n} spins")

    @classmethod
    def canonical(cls, n: int, subset) -> "Bipartition":
        sub = set(int(i) for i in subset)
        if 0 not in sub:
            sub = set(range(n)) - sub
        return cls(n, tuple(sorted(sub)))

    @property
    def part_b(self) -> tuple[int, ...]:
        return tuple(i for i in range(self.n) if i not in self.part_a)

    @property
    def smaller(self) -> tuple[int, ...]:
        """The smaller side (part_a on ties)."""
        return self.part_b if len(self.part_b) < len(self.part_a) else self.part_a

    @property
    def bitstring(self) -> str:
        return "".join("1" if i in self.part_a else "0" for i in range(self.n))

    def label(self, side=None) -> str:
        side = self.smaller if side is None else side
        return "{" + ",".join(f"s{i + 1}" for i in side) + "}"

    def __str__(self) -> str:
        return f"{self.label(self.part_a)}|{self.label(self.part_b)}"


def enumerate_bipartitions(n: int) -> list[Bipartition]:
    """All 2^(n-1) - 1 canonical bipartitions, by increasing |A| then lexicographically."""
    if not 2 <= n <= 20:
        raise ValueError(f"bipartition enumeration supports 2 <= n <= 20, got {n}")
    out = []
    for size in range(1, n):
        for rest in itertools.combinations(range(1, n), size - 1):
            out.append(Bipartition(n, (0,) + rest))
    return out


def _num_qubits(dim: int) -> int:
    n = dim.bit_length() - 1
    if dim != 1 << n:
        raise ValueError(f"dimension {dim} is not a power of two")
    return n


def _check_trace(rho: np.ndarray) -> None:
    tr = np.trace(rho)
    if abs(tr - 1) > NORM_TOL:
        raise ValueError(f"density matrix is not normalized (trace {tr:.6g})")


def partial_trace(state, keep) -> np.ndarray:
    """Reduced density matrix on the ``keep`` qubits (kept in ascending order).

    ``state`` is either a pure state vector or a density matrix.
    """
    keep = sorted(set(int(k) for k in keep))
    if not keep:
        raise ValueError("keep set must be nonempty")
    arr = np.asarray(state, dtype=np.complex128)
    n = _num_qubits(arr.shape[0])
    if keep[0] < 0 or keep[-1] >= n:
        raise IndexError(f"keep {keep} outside {n} qubits")
    rest = [i for i in range(n) if i not in keep]
    dk = 2 ** len(keep)
    if arr.ndim == 1:
        nrm = np.vdot(arr, arr).real
        if abs(nrm - 1) > NORM_TOL:
            raise ValueError(f"state vector is not normalized (norm^2 {nrm:.6g})")
        m = np.transpose(arr.reshape([2] * n), keep + rest).reshape(dk, -1)
        return m @ m.conj().T
    _check_trace(arr)
    t = arr.reshape([2] * (2 * n))
    perm = keep + rest + [n + i for i in keep] + [n + i for i in rest]
    t = np.transpose(t, perm).reshape(dk, 2 ** len(rest), dk, 2 ** len(rest))
    return np.einsum("ajbj->ab", t)


def linear_entropy(rho) -> float:
    """1 - Tr(rho^2)."""
    m = np.asarray(rho)
    _check_trace(m)
    return float(1.0 - np.sum(np.abs(m) ** 2))


def _pure_vector(psi) -> np.ndarray:
    arr = np.asarray(psi, dtype=np.complex128)
    if arr.ndim == 2:
        _check_trace(arr)
        purity = float(np.sum(np.abs(arr) ** 2))
        if purity < 1 - NORM_TOL:
            raise PurityError(f"GME concurrence is defined here for pure states only (purity {purity:.10f})")
        arr = np.linalg.eigh(arr)[1][:, -1]
    else:
        nrm = np.vdot(arr, arr).real
        if abs(nrm - 1) > NORM_TOL:
            raise ValueError(f"state vector is not normalized (norm^2 {nrm:.6g})")
    return arr


def bipartition_entropies(psi, bipartitions=None) -> list[tuple[Bipartition, float]]:
    """Linear entropy of ``part_a`` for every bipartition of a pure state.

    Purities come from the Schmidt coefficients of the reshaped vector.
    """
    vec = _pure_vector(psi)
    n = _num_qubits(vec.size)
    if bipartitions is None:
        bipartitions = enumerate_bipartitions(n)
    t = vec.reshape([2] * n)
    out = []
    for bp in bipartitions:
        m = np.transpose(t, list(bp.part_a) + list(bp.part_b)).reshape(2 ** len(bp.part_a), -1)
        s = np.linalg.svd(m, compute_uv=False)
        out.append((bp, float(1.0 - np.sum(s**4))))
    return out


def gme_concurrence(psi, tol: float = TIE_TOL) -> tuple[float, list[Bipartition]]:
    """Minimum over bipartitions of sqrt(2 S_L(rho_A)), with every minimizing cut."""
    scan = bipartition_entropies(psi)
    values = np.sqrt(2 * np.clip([sl for _, sl in scan], 0.0, None))
    best = float(values.min())
    return best, [bp for (bp, _), v in zip(scan, values) if v - best <= tol]


def _psd_sqrt(m: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh(0.5 * (m + m.conj().T))
    return (v * np.sqrt(np.clip(w, 0, None))) @ v.conj().T


def wootters_concurrence(rho) -> float:
    """Two-qubit concurrence max(0, l1 - l2 - l3 - l4).

    The l_i are the decreasing square roots of the eigenvalues of
    rho (Y x Y) rho* (Y x Y), i.e. the singular values of
    sqrt(rho) sqrt(rho~); the SVD avoids square roots of tiny eigenvalues.
    """
    m = np.asarray(rho, dtype=np.complex128)
    if m.shape != (4, 4):
        raise ValueError(f"concurrence needs a 4x4 two-qubit density matrix, got {m.shape}")
    _check_trace(m)
    r = _psd_sqrt(m)
    lam = np.linalg.svd(r @ (_YY @ r.conj() @ _YY), compute_uv=False)
    return float(max(0.0, lam[0] - lam[1] - lam[2] - lam[3]))


def werner_state(p: float) -> np.ndarray:
    return p * np.outer(SINGLET, SINGLET.conj()) + (1 - p) / 4 * np.eye(4)


@dataclass(frozen=True)
class WernerDecomposition:
    p: float
    residual: float

    def reconstruct(self) -> np.ndarray:
        return werner_state(self.p)


def werner_decompose(rho) -> WernerDecomposition:
    """Singlet-projection estimate p = (4 <S|rho|S> - 1) / 3 and the Frobenius misfit."""
    m = np.asarray(rho, dtype=np.complex128)
    if m.shape != (4, 4):
        raise ValueError(f"Werner decomposition needs a 4x4 matrix, got {m.shape}")
    _check_trace(m)
    p = float((4 * np.real(np.vdot(SINGLET, m @ SINGLET)) - 1) / 3)
    return WernerDecomposition(p, float(np.linalg.norm(m - werner_state(p))))


def werner_formulas(p: float) -> tuple[float, float]:
    """Closed-form linear entropy and concurrence of a Werner state."""
    if not -1 / 3 - 1e-12 <= p <= 1 + 1e-12:
        raise ValueError(f"Werner parameter {p} outside [-1/3, 1]")
    return 1 - (1 + 3 * p**2) / 4, max(0.0, (3 * p - 1) / 2)


def werner_p_from_concurrence(c: float) -> float:
    """Invert C(p) = (3p - 1)/2 on the entangled branch."""
    return (2 * c + 1) / 3


# ---------------------------------------------------------------------------
# reports
# ---------------------------------------------------------------------------

@dataclass
class EntanglementReport:
    n: int
    gme_concurrence: float | None = None
    argmin_bipartitions: list[Bipartition] = field(default_factory=list)
    bipartition_entropies: list[tuple[Bipartition, float]] = field(default_factory=list)
    pair_concurrences: dict[tuple[int, int], float] = field(default_factory=dict)
    pair_linear_entropies: dict[tuple[int, int], float] = field(default_factory=dict)
    werner_p: dict[tuple[int, int], float] = field(default_factory=dict)
    werner_residual: dict[tuple[int, int], float] = field(default_factory=dict)

    def max_pair(self) -> tuple[tuple[int, int], float] | None:
        """Pair with the largest concurrence (first in lexicographic order on ties)."""
        if not self.pair_concurrences:
            return None
        best = max(self.pair_concurrences.values())
        for pair in sorted(self.pair_concurrences):
            if self.pair_concurrences[pair] >= best - TIE_TOL:
                return pair, self.pair_concurrences[pair]

    def to_dict(self) -> dict:
        def key(p):
            return f"{p[0]},{p[1]}"

        out: dict = {"n": self.n}
        if self.gme_concurrence is not None:
            out["gme_concurrence"] = self.gme_concurrence
            out["argmin_bipartitions"] = [list(b.part_a) for b in self.argmin_bipartitions]
            out["bipartitions"] = [
                {"part_a": list(b.part_a), "linear_entropy": sl, "concurrence": float(np.sqrt(2 * max(sl, 0.0)))}
                for b, sl in self.bipartition_entropies
            ]
        for name in ("pair_concurrences", "pair_linear_entropies", "werner_p", "werner_residual"):
            table = getattr(self, name)
            if table:
                out[name] = {key(p): table[p] for p in sorted(table)}
        return out

    @classmethod
    def from_dict(cls, d: dict) -> "EntanglementReport":
        n = int(d["n"])

        def pairs(name):
            return {tuple(int(x) for x in k.split(",")): float(v) for k, v in d.get(name, {}).items()}

        return cls(
            n=n,
            gme_concurrence=d.get("gme_concurrence"),
            argmin_bipartitions=[Bipartition(n, tuple(a)) for a in d.get("argmin_bipartitions", [])],
            bipartition_entropies=[
                (Bipartition(n, tuple(b["part_a"])), float(b["linear_entropy"])) for b in d.get("bipartitions", [])
            ],
            pair_concurrences=pairs("pair_concurrences"),
            pair_linear_entropies=pairs("pair_linear_entropies"),
            werner_p=pairs("werner_p"),
            werner_residual=pairs("werner_residual"),
        )

    def to_csv(self) -> str:
        """Flat CSV: one row per bipartition, then one row per pair."""
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["kind", "subset", "i", "j", "linear_entropy", "concurrence", "werner_p"])
        for bp, sl in self.bipartition_entropies:
            w.writerow(["bipartition", bp.bitstring, "", "", f"{sl:.15g}", f"{np.sqrt(2 * max(sl, 0.0)):.15g}", ""])
        for pair in sorted(self.pair_concurrences):
            p = self.werner_p.get(pair)
            w.writerow([
                "pair", "", pair[0], pair[1],
                f"{self.pair_linear_entropies[pair]:.15g}",
                f"{self.pair_concurrences[pair]:.15g}",
                "" if p is None else f"{p:.15g}",
            ])
        return buf.getvalue()


def analyze(rho, *, gme: bool = True, pairs: bool = True, werner: bool = True) -> EntanglementReport:
    """Entanglement report for a normalized n-spin state (vector or density matrix)."""
    arr = np.asarray(rho, dtype=np.complex128)
    n = _num_qubits(arr.shape[0])
    report = EntanglementReport(n=n)
    if gme:
        report.bipartition_entropies = bipartition_entropies(arr)
        report.gme_concurrence, report.argmin_bipartitions = gme_concurrence(arr)
    if (pairs or werner) and n >= 2:
        for i, j in itertools.combinations(range(n), 2):
            r2 = partial_trace(arr, [i, j])
            if pairs:
                report.pair_concurrences[(i, j)] = wootters_concurrence(r2)
                report.pair_linear_entropies[(i, j)] = linear_entropy(r2)
            if werner:
                wd = werner_decompose(r2)
                report.werner_p[(i, j)] = wd.p
                report.werner_residual[(i, j)] = wd.residual
    return report
