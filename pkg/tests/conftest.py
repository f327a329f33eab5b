import numpy as np
import pytest

from fermispin import FockState
from fermispin.fock import _combinations, _spread


def random_state(rng, M, N, density=0.7, sz=None):
    """Random normalized state in the (M, N) sector; fixed Sz (=N_up - N_down) if given."""
    dets = []
    for nup in range(max(0, N - M), min(M, N) + 1):
        if sz is not None and 2 * nup - N != sz:
            continue
        _, mu = _combinations(M, nup)
        _, md = _combinations(M, N - nup)
        for a in mu:
            for b in md:
                dets.append(int(_spread(np.array([a]), M)[0] | (_spread(np.array([b]), M)[0] << 1)))
    dets = np.array(dets, dtype=np.int64)
    keep = rng.random(dets.size) < density
    if not keep.any():
        keep[rng.integers(dets.size)] = True
    dets = dets[keep]
    amps = rng.normal(size=dets.size) + 1j * rng.normal(size=dets.size)
    return FockState(M, N, dets, amps).normalized()


@pytest.fixture
def rng():
    return np.random.default_rng(20261014)


# --- acceptance summary ------------------------------------------------------

_CRITERIA: dict[str, list[tuple[str, str]]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(key, title): acceptance criterion a test belongs to")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or rep.when not in ("setup", "call"):
        return
    if rep.when == "setup" and rep.passed:
        return
    key, title = mark.args
    if hasattr(rep, "wasxfail"):
        status = "FAIL (known, see README)"
    else:
        status = "PASS" if rep.passed else "FAIL"
    _CRITERIA.setdefault(key, [(title, "")])
    _CRITERIA[key].append((item.name, status))


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for key in sorted(_CRITERIA, key=lambda k: int(k)):
        (title, _), *checks = _CRITERIA[key]
        ok = all(s == "PASS" for _, s in checks)
        tr.write_line(f"criterion {key:>2}: {'PASS' if ok else 'FAIL'}  {title}")
        for name, status in checks:
            if not ok:
                tr.write_line(f"    {status:<24} {name}")
