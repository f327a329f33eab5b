"""Spin entanglement extracted from many-electron states."""
from .errors import (
    ConfigError,
    FormatError,
    NumericalPreconditionError,
    OpenShellError,
    PurityError,
    SectorError,
    SectorTooLargeError,
)
from .fock import (
    DOWN,
    UP,
    FockState,
    OrbitalRotation,
    Spin,
    SpinOrbital,
    apply_annihilation,
    apply_creation,
    apply_singlet_creation,
    build_closed_shell,
    build_singlet_product,
    fidelity,
    inner_product,
    rotate_orbitals,
)

__version__ = "0.1.0"
