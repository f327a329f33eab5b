"""
Build -> rotate -> extract -> measure pipelines driven by JSON configs.

A config looks like::

    {
      "schema": "fermispin.pipeline/1",
      "label": "ring4",
      "source": {"kind": "closed_shell", "unitary": {"dft": 4}, "N": 4},
      "extraction": [0, 1, 2, 3],
      "measures": ["gme", "pairs", "werner"],
      "output": {"path": "ring4.json", "format": "json"}
    }

Orbital and spin indices are 0-based.  Unknown keys are errors.
"""
from __future__ import annotations

import copy
import csv
import io
import json
import logging
import platform
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Sequence

import numpy as np
import scipy

from . import __version__
from .errors import ConfigError, PurityError
from .extraction import ExtractionSpec, nbrdm, normalize_spin_state, write_spin_matrix_csv
from .fock import FockState, OrbitalRotation, build_closed_shell, build_singlet_product, rotate_orbitals
from .formats import read_unitary, read_wavefunction
from .measures import EntanglementReport, analyze
from .models import (
    LatticeSpec,
    SpinSystemSpec,
    chain,
    heisenberg_ground_state,
    hubbard_ground_state,
    ring,
    ssh_chain,
    tight_binding_determinant,
)

log = logging.getLogger(__name__)

SCHEMA = "fermispin.pipeline/1"
RECORD_SCHEMA = "fermispin.record/1"
MEASURES = ("gme", "pairs", "werner")
SOURCE_KEYS = {
    "closed_shell": {"kind", "unitary", "N"},
    "singlet_product": {"kind", "unitary", "N"},
    "tight_binding": {"kind", "lattice", "N"},
    "hubbard": {"kind", "lattice", "N", "Sz"},
    "wavefunction_file": {"kind", "path", "renormalize"},
    "heisenberg": {"kind", "spins"},
}
SOURCE_REQUIRED = {
    "closed_shell": {"unitary", "N"},
    "singlet_product": {"unitary", "N"},
    "tight_binding": {"lattice", "N"},
    "hubbard": {"lattice", "N"},
    "wavefunction_file": {"path"},
    "heisenberg": {"spins"},
}
TOP_KEYS = {"schema", "label", "source", "extraction", "rotation", "measures", "output", "seed"}
LATTICE_KEYS = {"topology", "M", "t", "t1", "t2", "U", "edges", "density_density"}
SPIN_KEYS = {"topology", "n", "J", "couplings"}
OUTPUT_KEYS = {"path", "format", "rho_csv"}


def _check_keys(obj, allowed, where, required=()):
    if not isinstance(obj, dict):
        raise ConfigError(f"{where} must be an object")
    unknown = sorted(set(obj) - set(allowed))
    if unknown:
        raise ConfigError(f"unknown key(s) {unknown} in {where}")
    missing = sorted(set(required) - set(obj))
    if missing:
        raise ConfigError(f"missing key(s) {missing} in {where}")


def _int(value, where) -> int:
    if isinstance(value, bool) or not isinstance(value, (int, float)) or int(value) != value:
        raise ConfigError(f"{where} must be an integer, got {value!r}")
    return int(value)


@dataclass
class PipelineConfig:
    """Validated pipeline configuration; ``base_dir`` resolves relative file paths."""

    raw: dict
    base_dir: Path = field(default_factory=Path.cwd)
    origin: str | None = None

    def __post_init__(self):
        self.raw = copy.deepcopy(self.raw)
        self._check_structure()

    # parsing --------------------------------------------------------------
    @classmethod
    def from_file(cls, path) -> "PipelineConfig":
        path = Path(path)
        text = path.read_text()
        try:
            raw = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(exc.msg, path, exc.lineno, exc.colno) from None
        try:
            return cls(raw, path.parent, str(path))
        except ConfigError as exc:
            raise ConfigError(str(exc), path) from None

    def _check_structure(self) -> None:
        raw = self.raw
        _check_keys(raw, TOP_KEYS, "config", required={"schema", "source", "extraction"})
        if raw["schema"] != SCHEMA:
            raise ConfigError(f"unsupported schema {raw['schema']!r}; expected {SCHEMA!r}")
        src = raw["source"]
        if not isinstance(src, dict) or src.get("kind") not in SOURCE_KEYS:
            raise ConfigError(f"source.kind must be one of {sorted(SOURCE_KEYS)}")
        kind = src["kind"]
        _check_keys(src, SOURCE_KEYS[kind], f"source ({kind})", SOURCE_REQUIRED[kind])
        ext = raw["extraction"]
        if not isinstance(ext, list) or not ext:
            raise ConfigError("extraction must be a nonempty list of orbital indices")
        orbs = [_int(o, "extraction entry") for o in ext]
        try:
            ExtractionSpec(tuple(orbs))
        except (ValueError, IndexError) as exc:
            raise ConfigError(str(exc)) from None
        measures = raw.get("measures", list(MEASURES))
        if not isinstance(measures, list) or set(measures) - set(MEASURES):
            raise ConfigError(f"measures must be a list drawn from {list(MEASURES)}")
        if len(orbs) < 2 and measures:
            raise ConfigError("entanglement measures need at least two extracted spins")
        if "output" in raw:
            _check_keys(raw["output"], OUTPUT_KEYS, "output")
            if raw["output"].get("format", "json") not in ("json", "csv"):
                raise ConfigError("output.format must be 'json' or 'csv'")
        if "N" in src:
            _int(src["N"], "source.N")
        if "lattice" in src:
            _check_keys(src["lattice"], LATTICE_KEYS, "source.lattice", required={"topology"})
        if "spins" in src:
            _check_keys(src["spins"], SPIN_KEYS, "source.spins", required={"n"})

    # accessors --------------------------------------------------------------
    @property
    def label(self) -> str:
        return str(self.raw.get("label", self.origin or self.raw["source"]["kind"]))

    @property
    def extraction(self) -> ExtractionSpec:
        return ExtractionSpec(tuple(int(o) for o in self.raw["extraction"]))

    @property
    def measures(self) -> set[str]:
        return set(self.raw.get("measures", list(MEASURES)))

    def resolve(self, p) -> Path:
        p = Path(p)
        return p if p.is_absolute() else self.base_dir / p

    def unitary(self, spec) -> OrbitalRotation:
        if isinstance(spec, str):
            spec = {"file": spec}
        _check_keys(spec, {"file", "dft", "identity"}, "unitary")
        if len(spec) != 1:
            raise ConfigError("unitary needs exactly one of file / dft / identity")
        (key, value), = spec.items()
        if key == "file":
            return read_unitary(self.resolve(value))
        dim = _int(value, f"unitary.{key}")
        return OrbitalRotation.dft(dim) if key == "dft" else OrbitalRotation.identity(dim)

    def lattice(self) -> LatticeSpec:
        lat = self.raw["source"]["lattice"]
        topo = lat["topology"]
        U = lat.get("U", 0.0)
        try:
            if topo == "custom":
                return LatticeSpec(_int(lat["M"], "lattice.M"), tuple(tuple(e) for e in lat["edges"]), U,
                                   "custom", tuple(tuple(e) for e in lat.get("density_density", [])))
            M = _int(lat["M"], "lattice.M")
            if topo == "ring":
                spec = ring(M, lat.get("t", -1.0), U)
            elif topo == "chain":
                if "t1" in lat or "t2" in lat:
                    spec = ssh_chain(M, lat.get("t1", -1.0), lat.get("t2", -1.0), U)
                else:
                    spec = chain(M, lat.get("t", -1.0), U)
            else:
                raise ConfigError(f"unknown lattice topology {topo!r}")
            dd = tuple(tuple(e) for e in lat.get("density_density", []))
            return LatticeSpec(spec.M, spec.edges, U, spec.topology, dd) if dd else spec
        except KeyError as exc:
            raise ConfigError(f"lattice is missing {exc.args[0]!r}") from None
        except (ValueError, TypeError) as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(f"invalid lattice: {exc}") from None

    def spin_system(self) -> SpinSystemSpec:
        spins = self.raw["source"]["spins"]
        n = _int(spins["n"], "spins.n")
        topo = spins.get("topology", "custom")
        try:
            if topo == "ring":
                return SpinSystemSpec.ring(n, spins.get("J", 1.0))
            if topo == "chain":
                return SpinSystemSpec.chain(n, spins.get("J", 1.0))
            if topo == "custom":
                return SpinSystemSpec(n, tuple(tuple(c) for c in spins["couplings"]))
        except KeyError:
            raise ConfigError("custom spin system needs 'couplings'") from None
        except (ValueError, TypeError) as exc:
            raise ConfigError(f"invalid spin system: {exc}") from None
        raise ConfigError(f"unknown spin topology {topo!r}")

    # validation -------------------------------------------------------------
    def basis_size(self) -> int:
        """Number of orbitals (or spins) of the source, reading headers/files as needed."""
        src = self.raw["source"]
        kind = src["kind"]
        if kind in ("closed_shell", "singlet_product"):
            U = self.unitary(src["unitary"])
            N = int(src["N"])
            if N % 2 or not 0 <= N <= 2 * U.dim:
                raise ConfigError(f"source.N={N} must be even and at most {2 * U.dim}")
            return U.dim
        if kind in ("tight_binding", "hubbard"):
            M = self.lattice().M
            N = int(src["N"])
            if not 0 <= N <= 2 * M:
                raise ConfigError(f"source.N={N} does not fit {M} sites")
            return M
        if kind == "wavefunction_file":
            path = self.resolve(src["path"])
            with open(path) as fh:
                for lineno, ln in enumerate(fh, 1):
                    if ln.strip() and not ln.lstrip().startswith("#"):
                        try:
                            return int(ln.split()[0])
                        except (ValueError, IndexError):
                            raise ConfigError("wavefunction header must be 'M n_particles'", path, lineno, 1) from None
            raise ConfigError("empty wavefunction file", path)
        return self.spin_system().n

    def n_electrons(self) -> int | None:
        src = self.raw["source"]
        if "N" in src:
            return int(src["N"])
        return None

    def validate(self) -> int:
        """Fail fast on every out-of-range index; returns the basis size."""
        M = self.basis_size()
        try:
            self.extraction.check(M)
        except IndexError as exc:
            raise ConfigError(str(exc)) from None
        N = self.n_electrons()
        if N is not None and self.extraction.n > N:
            raise ConfigError(f"cannot extract {self.extraction.n} spins from {N} electrons")
        if "rotation" in self.raw:
            if self.raw["source"]["kind"] == "heisenberg":
                raise ConfigError("rotation does not apply to a spin-system source")
            R = self.unitary(self.raw["rotation"])
            if R.dim != M:
                raise ConfigError(f"rotation dimension {R.dim} differs from basis size {M}")
        return M


@dataclass
class RunRecord:
    """Self-contained result document of one pipeline run."""

    config: dict
    label: str
    results: dict
    versions: dict
    wall_clock: float
    seed: int | None = None

    @property
    def report(self) -> EntanglementReport:
        return EntanglementReport.from_dict(self.results["report"])

    def to_dict(self) -> dict:
        return _round_floats({
            "schema": RECORD_SCHEMA,
            "label": self.label,
            "config": self.config,
            "seed": self.seed,
            "versions": self.versions,
            "wall_clock_s": self.wall_clock,
            "results": self.results,
        })

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    @classmethod
    def from_dict(cls, d: dict) -> "RunRecord":
        if d.get("schema") != RECORD_SCHEMA:
            raise ConfigError(f"not a run record (schema {d.get('schema')!r})")
        return cls(d["config"], d["label"], d["results"], d["versions"], d["wall_clock_s"], d.get("seed"))

    @classmethod
    def load(cls, path) -> "RunRecord":
        path = Path(path)
        try:
            return cls.from_dict(json.loads(path.read_text()))
        except json.JSONDecodeError as exc:
            raise ConfigError(exc.msg, path, exc.lineno, exc.colno) from None

    def save(self, path) -> None:
        Path(path).write_text(self.to_json())


def _round_floats(obj):
    """Round every float to 15 significant digits."""
    if isinstance(obj, float):
        return float(f"{obj:.15g}")
    if isinstance(obj, dict):
        return {k: _round_floats(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round_floats(v) for v in obj]
    return obj


def versions() -> dict:
    return {"fermispin": __version__, "numpy": np.__version__, "scipy": scipy.__version__, "python": platform.python_version()}


def ingest_wavefunction(path, renormalize: bool = False) -> FockState:
    """Read and validate an external wavefunction file."""
    state = read_wavefunction(path)
    nrm = state.norm()
    log.info("ingested %s: M=%d N=%d terms=%d norm=%.15g", path, state.M, state.n_particles, len(state), nrm)
    return state.normalized() if renormalize else state


def _build_source(config: PipelineConfig):
    """Fock state (or spin vector for heisenberg sources) plus source metadata."""
    src = config.raw["source"]
    kind = src["kind"]
    meta: dict[str, Any] = {"kind": kind}
    if kind == "closed_shell":
        return build_closed_shell(config.unitary(src["unitary"]), int(src["N"])), meta
    if kind == "singlet_product":
        return build_singlet_product(config.unitary(src["unitary"]), int(src["N"])), meta
    if kind == "tight_binding":
        state, _ = tight_binding_determinant(config.lattice(), int(src["N"]))
        return state, meta
    if kind == "hubbard":
        gs = hubbard_ground_state(config.lattice(), int(src["N"]), float(src.get("Sz", 0.0)))
        meta.update(energy=gs.energy, degenerate=gs.degenerate)
        return gs.state, meta
    if kind == "wavefunction_file":
        state = ingest_wavefunction(config.resolve(src["path"]), bool(src.get("renormalize", False)))
        meta["norm"] = state.norm()
        return state, meta
    gs = heisenberg_ground_state(config.spin_system())
    meta.update(energy=gs.energy, degenerate=gs.degenerate)
    return gs.state, meta


def _spin_reduction(vec: np.ndarray, order: Sequence[int]) -> np.ndarray:
    n = vec.size.bit_length() - 1
    rest = [i for i in range(n) if i not in order]
    m = np.transpose(vec.reshape([2] * n), list(order) + rest).reshape(2 ** len(order), -1)
    return m @ m.conj().T


def run_pipeline(config: PipelineConfig, seed: int | None = None) -> RunRecord:
    """Run one configuration end to end and persist the record if an output path is set."""
    config.validate()
    t0 = time.perf_counter()
    source, meta = _build_source(config)
    spec = config.extraction
    if isinstance(source, FockState):
        if "rotation" in config.raw:
            source = rotate_orbitals(source, config.unitary(config.raw["rotation"]))
        rho = normalize_spin_state(nbrdm(source, spec))
        weight = rho.weight
        matrix = rho.matrix
    else:
        matrix = _spin_reduction(source, spec.orbitals)
        weight = 1.0
    purity = float(np.sum(np.abs(matrix) ** 2))
    measures = config.measures
    if "gme" in measures and purity < 1 - 1e-8:
        raise PurityError(
            f"GME requested but the extracted {spec.n}-spin state is mixed (purity {purity:.10f})"
        )
    report = analyze(matrix, gme="gme" in measures, pairs="pairs" in measures, werner="werner" in measures)
    results = {"n": spec.n, "weight": weight, "purity": purity, "source": meta, "report": report.to_dict()}
    record = RunRecord(
        config=config.raw,
        label=config.label,
        results=results,
        versions=versions(),
        wall_clock=time.perf_counter() - t0,
        seed=seed if seed is not None else config.raw.get("seed"),
    )
    out = config.raw.get("output")
    if out:
        if out.get("path"):
            path = config.resolve(out["path"])
            if out.get("format", "json") == "csv":
                path.write_text(report.to_csv())
            else:
                record.save(path)
        if out.get("rho_csv"):
            write_spin_matrix_csv(matrix, config.resolve(out["rho_csv"]))
    return record


def run_batch(configs: Sequence[PipelineConfig], workers: int = 1, seed: int | None = None) -> list[RunRecord]:
    """Run independent configs, returning records in input order."""
    for c in configs:
        c.validate()
    if workers <= 1:
        return [run_pipeline(c, seed) for c in configs]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda c: run_pipeline(c, seed), configs))


TABLE_COLUMNS = ("label", "n", "C_GME", "A*_xi", "max-pair C", "A*")


def _table_rows(records: Sequence[RunRecord]) -> list[list[str]]:
    rows = []
    for rec in records:
        rep = rec.report
        gme = a_xi = cmax = a_star = ""
        if rep.gme_concurrence is not None:
            gme = f"{rep.gme_concurrence:.3f}"
            if rep.argmin_bipartitions:
                a_xi = rep.argmin_bipartitions[0].label()
        best = rep.max_pair()
        if best is not None:
            (i, j), c = best
            cmax = f"{c:.3f}"
            a_star = f"{{s{i + 1},s{j + 1}}}"
        rows.append([rec.label, str(rec.results["n"]), gme, a_xi, cmax, a_star])
    return rows


def emit_table(records: Sequence[RunRecord], fmt: str = "text") -> str:
    """Summary table, one row per record in input order ("text" or "csv")."""
    if not records:
        raise ValueError("no records to tabulate")
    rows = _table_rows(records)
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(TABLE_COLUMNS)
        w.writerows(rows)
        return buf.getvalue()
    if fmt != "text":
        raise ValueError(f"unknown table format {fmt!r}")
    widths = [max(len(h), *(len(r[k]) for r in rows)) for k, h in enumerate(TABLE_COLUMNS)]
    lines = ["  ".join(h.ljust(w) for h, w in zip(TABLE_COLUMNS, widths)).rstrip()]
    lines.append("  ".join("-" * w for w in widths))
    lines += ["  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip() for r in rows]
    return "\n".join(lines) + "\n"


def demo_config(name: str) -> PipelineConfig:
    if name == "ring4":
        raw = {
            "schema": SCHEMA,
            "label": "ring4 (DFT closed shell)",
            "source": {"kind": "closed_shell", "unitary": {"dft": 4}, "N": 4},
            "extraction": [0, 1, 2, 3],
        }
    elif name == "benzene6":
        raw = {
            "schema": SCHEMA,
            "label": "benzene6 (Hueckel ring)",
            "source": {"kind": "tight_binding", "lattice": {"topology": "ring", "M": 6, "t": -1.0}, "N": 6},
            "extraction": [0, 1, 2, 3, 4, 5],
        }
    else:
        raise ConfigError(f"unknown demo {name!r}; choose ring4 or benzene6")
    return PipelineConfig(raw, origin=f"demo:{name}")
