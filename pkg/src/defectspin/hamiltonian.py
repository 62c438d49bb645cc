"""Angular-momentum operators and spin-Hamiltonian assembly.

The Hamiltonian is built term by term in frequency units (MHz):

* EZI, electron Zeeman: (mu_B/h) B^T g S
* HFI, hyperfine: S^T A(k) I(k) with A in the crystal frame
* NZI, nuclear Zeeman: -(gamma_k/2pi) B . I(k)
* NQI, nuclear quadrupole: I(k)^T Q(k) I(k), Q from the EFG tensor

Matrices are dense and complex. The basis is a plain tensor product with
the electron factor first and the nuclear sites following in declared
order, each factor ordered by descending magnetic quantum number.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache, reduce

import numpy as np

from .isotopes import ELECTRON_ZEEMAN_MHZ_PER_G, Isotope
from .system import SpinSystem

ALL_TERMS = frozenset({"ezi", "hfi", "nzi", "nqi"})
DEFAULT_TERMS = ("ezi", "hfi", "nzi")
DIMENSION_CAP = 4096


class DimensionError(ValueError):
    """Hilbert space too large for dense diagonalization."""


@dataclass(frozen=True, eq=False)
class OperatorTriple:
    """Cartesian angular-momentum matrices for one spin."""

    dimension: int
    jx: np.ndarray
    jy: np.ndarray
    jz: np.ndarray

    def component(self, axis: int) -> np.ndarray:
        return (self.jx, self.jy, self.jz)[axis]


@lru_cache(maxsize=None)
def _operators(twice_spin: int) -> OperatorTriple:
    spin = twice_spin / 2.0
    dim = twice_spin + 1
    m = spin - np.arange(dim)          # descending: I, I-1, ..., -I
    jz = np.diag(m.astype(complex))
    jplus = np.zeros((dim, dim), dtype=complex)
    for i in range(dim - 1):
        # <m+1| J+ |m> with |m> at column i+1
        mm = m[i + 1]
        jplus[i, i + 1] = np.sqrt(spin * (spin + 1.0) - mm * (mm + 1.0))
    jminus = jplus.conj().T
    jx = (jplus + jminus) / 2.0
    jy = (jplus - jminus) / 2.0j
    for a in (jx, jy, jz):
        a.setflags(write=False)
    return OperatorTriple(dim, jx, jy, jz)


def spin_operators(spin: float) -> OperatorTriple:
    """Jx, Jy, Jz for spin quantum number ``spin`` in the |I, m> basis.

    Basis states are ordered m = I down to -I. Raises for a negative or
    non-half-integer argument.
    """
    twice = 2.0 * spin
    if spin < 0 or abs(twice - round(twice)) > 1e-9:
        raise ValueError(f"spin must be a non-negative half-integer, got {spin}")
    return _operators(int(round(twice)))


def efg_to_quadrupole(efg: np.ndarray, isotope: Isotope) -> np.ndarray:
    """Convert an EFG tensor (V/A^2) to the quadrupole matrix Q (MHz).

    Q = c * V with the isotope's conversion constant c. Only isotopes with
    I >= 1 have a quadrupole moment; anything else is rejected.
    """
    if isotope.spin < 1.0:
        raise ValueError(f"{isotope.symbol} is non-quadrupolar (I = {isotope.spin})")
    v = np.asarray(efg, dtype=float)
    if v.shape != (3, 3) or not np.allclose(v, v.T, atol=1e-8 * max(1.0, np.abs(v).max())):
        raise ValueError("EFG tensor must be a symmetric 3x3 matrix")
    return isotope.q_conversion * v


@dataclass(frozen=True, eq=False)
class HamiltonianMatrix:
    """Assembled Hamiltonian with its term mask and factor dimensions."""

    matrix: np.ndarray
    terms: frozenset
    dims: tuple[int, ...]           # (2, d_1, ..., d_K)
    field: np.ndarray

    @property
    def dimension(self) -> int:
        return self.matrix.shape[0]


def _embed(local: dict[int, np.ndarray], dims: tuple[int, ...]) -> np.ndarray:
    """Kronecker-expand operators acting on selected factors."""
    factors = [local.get(i, np.eye(d, dtype=complex)) for i, d in enumerate(dims)]
    return reduce(np.kron, factors)


def normalize_terms(terms) -> frozenset:
    mask = frozenset(str(t).lower() for t in terms)
    bad = mask - ALL_TERMS
    if bad:
        raise ValueError(f"unknown Hamiltonian terms: {sorted(bad)}")
    return mask


def build_hamiltonian(
    system: SpinSystem,
    field,
    terms=DEFAULT_TERMS,
    dimension_cap: int = DIMENSION_CAP,
) -> HamiltonianMatrix:
    """Assemble the requested terms for ``system`` at field ``field`` (Gauss).

    Raises ``DimensionError`` when the Hilbert space exceeds
    ``dimension_cap`` (use the hybrid solver for such systems) and
    ``ValueError`` when NQI is requested for a quadrupolar site without an
    EFG tensor.
    """
    mask = normalize_terms(terms)
    b = np.asarray(field, dtype=float)
    if b.shape != (3,):
        raise ValueError("field must be a 3-vector in Gauss")
    dims = (2,) + system.site_dimensions()
    n = system.dimension
    if n > dimension_cap:
        raise DimensionError(
            f"dimension {n} exceeds cap {dimension_cap}; "
            "diagonalize a first-shell subsystem with hybrid_solve instead"
        )
    electron = spin_operators(0.5)
    h = np.zeros((n, n), dtype=complex)

    if "ezi" in mask:
        heff = ELECTRON_ZEEMAN_MHZ_PER_G * (system.g_tensor.T @ b)
        local = sum(heff[a] * electron.component(a) for a in range(3))
        h += _embed({0: local}, dims)

    for k, (site, iso) in enumerate(system.sites):
        slot = k + 1
        if iso.spin == 0.0:
            continue
        ops = spin_operators(iso.spin)
        if "hfi" in mask:
            a_tensor = site.hyperfine_tensor()
            for i in range(3):
                row = sum(a_tensor[i, j] * ops.component(j) for j in range(3))
                h += _embed({0: electron.component(i), slot: row}, dims)
        if "nzi" in mask:
            # gamma/2pi in Hz/G times Gauss gives Hz; scale to MHz.
            coeff = -iso.gamma_over_2pi * 1e-6
            local = coeff * sum(b[j] * ops.component(j) for j in range(3))
            h += _embed({slot: local}, dims)
        if "nqi" in mask and iso.spin >= 1.0:
            if site.efg is None:
                raise ValueError(
                    f"site {k} ({site.element}, {site.group_id}): "
                    "NQI requested but no EFG tensor present"
                )
            q = efg_to_quadrupole(site.efg, iso)
            local = np.zeros((ops.dimension, ops.dimension), dtype=complex)
            for i in range(3):
                for j in range(3):
                    if q[i, j] != 0.0:
                        local += q[i, j] * (ops.component(i) @ ops.component(j))
            h += _embed({slot: local}, dims)

    scale = max(float(np.abs(h).max()), 1e-30)
    if np.abs(h - h.conj().T).max() > 1e-9 * scale:
        raise AssertionError("assembled Hamiltonian is not Hermitian")
    return HamiltonianMatrix(matrix=h, terms=mask, dims=dims, field=b)
