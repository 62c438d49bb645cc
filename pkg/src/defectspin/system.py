"""Spin-system domain types and the bundled defect dataset.

A defect is described shell by shell: each shell entry carries an element,
a site count, the shell index and one set of hyperfine principal values
(Axx, Ayy, Azz) in MHz. The loader expands every entry into individual
nuclear sites, placing them at equally spaced azimuths and attaching the
rotation that carries the local principal frame into the crystal frame.

Principal-axis orientation convention
-------------------------------------
Published tables list principal values only, so the axis directions are a
modeling choice. The convention used here, which reproduces the measured
line statistics, is:

* central atom and second-neighbor shells: tensor diagonal in the crystal
  frame, unique (zz) axis along the crystal c-axis (the spin density is
  pi-like and out-of-plane);
* first-neighbor shells: unique (zz) axis along the in-plane bond from the
  defect to the site, yy axis along c (the dominant coupling at a nearest
  neighbor runs along the sigma bond).

Equivalent sites within a shell are generated by rotations about the
c-axis, so every member of a symmetry group shares its principal values.

The optional EFG tensors are stored directly in crystal-frame components
``[Vxx, Vyy, Vzz, Vxy, Vxz, Vyz]`` in V/A^2. The bundled first-shell EFGs
are representative axial tensors, not first-principles values; they keep
all quadrupole matrix elements below 1 MHz.
"""

from __future__ import annotations

import dataclasses
import json
import math
import os
from dataclasses import dataclass, field

import numpy as np

from .isotopes import Isotope, default_isotope, isotopes_of, lookup

ENV_DATA_DIR = "DEFECTSPIN_DATA"

# Ideal-lattice distance of each neighbor shell, in units of the B-N bond.
_SHELL_DISTANCE = {0: 0.0, 1: 1.0, 2: math.sqrt(3.0)}


class DatasetError(Exception):
    """Raised when a bundled or user dataset cannot be parsed or validated."""


def axial_frame(azimuth: float) -> np.ndarray:
    """Rotation about the crystal c-axis by ``azimuth`` (radians)."""
    c, s = math.cos(azimuth), math.sin(azimuth)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def bond_frame(azimuth: float) -> np.ndarray:
    """Frame with the local zz axis along the in-plane bond at ``azimuth``.

    Columns are the local x, y, z axes in crystal coordinates: z along the
    bond, y along the crystal c-axis, x completing a right-handed set.
    """
    c, s = math.cos(azimuth), math.sin(azimuth)
    return np.array([[-s, 0.0, c], [c, 0.0, s], [0.0, 1.0, 0.0]])


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class NuclearSite:
    """One lattice site near the defect.

    ``principal_values`` are the hyperfine eigenvalues in MHz and ``frame``
    is the proper rotation taking the local principal frame into the
    crystal frame. ``efg``, when present, is the symmetric traceless
    electric-field-gradient tensor in crystal coordinates (V/A^2).
    """

    element: str
    shell_distance: float
    bond_azimuth: float
    principal_values: tuple[float, float, float]
    frame: np.ndarray
    efg: np.ndarray | None = None
    group_id: str = ""

    def __post_init__(self):
        object.__setattr__(self, "frame", _readonly(self.frame))
        object.__setattr__(
            self, "principal_values", tuple(float(v) for v in self.principal_values)
        )
        f = self.frame
        if f.shape != (3, 3):
            raise ValueError("frame must be 3x3")
        if not np.allclose(f.T @ f, np.eye(3), atol=1e-10):
            raise ValueError("frame is not orthonormal")
        if not math.isclose(float(np.linalg.det(f)), 1.0, abs_tol=1e-10):
            raise ValueError("frame must be a proper rotation (det +1)")
        if self.efg is not None:
            v = _readonly(self.efg)
            object.__setattr__(self, "efg", v)
            scale = max(float(np.abs(v).max()), 1e-30)
            if np.abs(v - v.T).max() > 1e-6 * scale:
                raise ValueError("efg must be symmetric")
            if abs(float(np.trace(v))) > 1e-6 * scale:
                raise ValueError("efg must be traceless")

    def hyperfine_tensor(self) -> np.ndarray:
        """Full 3x3 hyperfine tensor in the crystal frame, MHz."""
        return self.frame @ np.diag(self.principal_values) @ self.frame.T


@dataclass(frozen=True, eq=False)
class SpinSystem:
    """One S=1/2 electron coupled to an ordered list of nuclear sites."""

    label: str
    sites: tuple[tuple[NuclearSite, Isotope], ...]
    g_tensor: np.ndarray = field(default_factory=lambda: 2.0 * np.eye(3))

    def __post_init__(self):
        g = _readonly(self.g_tensor)
        if g.shape != (3, 3) or not np.allclose(g, g.T, atol=1e-12):
            raise ValueError("g_tensor must be a symmetric 3x3 matrix")
        object.__setattr__(self, "g_tensor", g)
        object.__setattr__(self, "sites", tuple(self.sites))

    @property
    def dimension(self) -> int:
        """Total Hilbert-space dimension 2 * prod(2I_k + 1), exact integer."""
        n = 2
        for _, iso in self.sites:
            n *= iso.multiplicity
        return n

    def site_dimensions(self) -> tuple[int, ...]:
        return tuple(iso.multiplicity for _, iso in self.sites)

    def subsystem(self, indices, label_suffix: str = "") -> "SpinSystem":
        picked = tuple(self.sites[i] for i in indices)
        return SpinSystem(self.label + label_suffix, picked, self.g_tensor)

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "g_tensor": self.g_tensor.tolist(),
            "sites": [
                {
                    "element": s.element,
                    "shell_distance": s.shell_distance,
                    "bond_azimuth": s.bond_azimuth,
                    "principal_values": list(s.principal_values),
                    "frame": s.frame.tolist(),
                    "efg": None if s.efg is None else s.efg.tolist(),
                    "group_id": s.group_id,
                    "isotope": iso.symbol,
                }
                for s, iso in self.sites
            ],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "SpinSystem":
        sites = []
        for entry in data["sites"]:
            site = NuclearSite(
                element=entry["element"],
                shell_distance=entry["shell_distance"],
                bond_azimuth=entry["bond_azimuth"],
                principal_values=tuple(entry["principal_values"]),
                frame=np.array(entry["frame"]),
                efg=None if entry.get("efg") is None else np.array(entry["efg"]),
                group_id=entry.get("group_id", ""),
            )
            sites.append((site, lookup(entry["isotope"])))
        return cls(data["label"], tuple(sites), np.array(data["g_tensor"]))


@dataclass(frozen=True, eq=False)
class ShellEntry:
    """One dataset row: a group of equivalent sites at a common shell."""

    element: str
    count: int
    shell: int
    principal_values: tuple[float, float, float]
    core_contribution: float | None = None
    efg: np.ndarray | None = None

    def bare_principal_values(self) -> tuple[float, float, float]:
        """Principal values with the isotropic core contribution removed."""
        if self.core_contribution is None:
            return self.principal_values
        return tuple(v - self.core_contribution for v in self.principal_values)


@dataclass(frozen=True, eq=False)
class DefectRecord:
    """A defect as shipped in the dataset: metadata plus expanded sites."""

    label: str
    zpl_energy: float | None
    shells: tuple[ShellEntry, ...]
    sites: tuple[NuclearSite, ...]
    notes: str = ""

    def __post_init__(self):
        if self.zpl_energy is not None and self.zpl_energy <= 0:
            raise ValueError(f"{self.label}: zpl_energy must be positive")


def _shell_azimuths(count: int) -> list[float]:
    # Three-site shells sit on the bonds (offset 90 deg keeps one bond on
    # the +y axis); six-site shells start from +x. Only relative azimuths
    # are physical and with B along c none of them matter.
    offset = math.pi / 2.0 if count == 3 else 0.0
    return [offset + 2.0 * math.pi * k / count for k in range(count)]


def expand_shell(entry: ShellEntry) -> list[NuclearSite]:
    """Expand a shell entry into individual sites with frames attached."""
    dist = _SHELL_DISTANCE.get(entry.shell, float(entry.shell))
    group = f"{entry.element}-shell{entry.shell}"
    sites = []
    for azimuth in _shell_azimuths(entry.count):
        frame = bond_frame(azimuth) if entry.shell == 1 else axial_frame(azimuth)
        sites.append(
            NuclearSite(
                element=entry.element,
                shell_distance=dist,
                bond_azimuth=azimuth,
                principal_values=entry.principal_values,
                frame=frame,
                efg=entry.efg,
                group_id=group,
            )
        )
    return sites


def _parse_shell(raw: dict, where: str) -> ShellEntry:
    for key in ("element", "count", "shell", "Axx", "Ayy", "Azz"):
        if key not in raw:
            raise DatasetError(f"{where}: missing mandatory field {key!r}")
    element = raw["element"]
    try:
        isotopes_of(element)
    except KeyError:
        raise DatasetError(f"{where}: unknown element {element!r}") from None
    count = raw["count"]
    if not isinstance(count, int) or count < 1:
        raise DatasetError(f"{where}: count must be a positive integer")
    efg = None
    if raw.get("efg") is not None:
        comp = raw["efg"]
        if len(comp) != 6:
            raise DatasetError(f"{where}: efg needs 6 components")
        xx, yy, zz, xy, xz, yz = (float(c) for c in comp)
        efg = np.array([[xx, xy, xz], [xy, yy, yz], [xz, yz, zz]])
    return ShellEntry(
        element=element,
        count=count,
        shell=int(raw["shell"]),
        principal_values=(float(raw["Axx"]), float(raw["Ayy"]), float(raw["Azz"])),
        core_contribution=raw.get("core_contribution"),
        efg=efg,
    )


def data_directory() -> str:
    """Directory holding the bundled datasets; overridable via env var."""
    override = os.environ.get(ENV_DATA_DIR)
    if override:
        return override
    return os.path.join(os.path.dirname(__file__), "data")


def dataset_version(path: str | None = None) -> str:
    try:
        with open(path or os.path.join(data_directory(), "defects.json")) as fh:
            return str(json.load(fh).get("version", "unversioned"))
    except OSError:
        return "unversioned"


def load_defect_dataset(path: str | None = None) -> list[DefectRecord]:
    """Load defect records from ``path`` or the bundled dataset.

    The file is JSON, either a bare list of defect objects or a wrapper
    ``{"version": ..., "defects": [...]}``. Each defect object has keys
    ``label``, optional ``zpl_eV``, optional ``notes`` and a ``sites`` list
    of shell entries ``{element, count, shell, Axx, Ayy, Azz,
    core_contribution?, efg?}``.
    """
    if path is None:
        path = os.path.join(data_directory(), "defects.json")
    try:
        with open(path) as fh:
            try:
                doc = json.load(fh)
            except json.JSONDecodeError as exc:
                raise DatasetError(
                    f"{path}: parse error at line {exc.lineno}: {exc.msg}"
                ) from None
    except OSError as exc:
        raise DatasetError(f"cannot read dataset: {exc}") from None
    raw_defects = doc.get("defects", doc) if isinstance(doc, dict) else doc
    if not isinstance(raw_defects, list):
        raise DatasetError(f"{path}: expected a list of defect records")
    records = []
    for i, raw in enumerate(raw_defects):
        where = f"{path}: defect #{i}"
        if "label" not in raw:
            raise DatasetError(f"{where}: missing mandatory field 'label'")
        label = raw["label"]
        shells = tuple(
            _parse_shell(s, f"{where} ({label})") for s in raw.get("sites", [])
        )
        sites = tuple(site for entry in shells for site in expand_shell(entry))
        records.append(
            DefectRecord(
                label=label,
                zpl_energy=raw.get("zpl_eV"),
                shells=shells,
                sites=sites,
                notes=raw.get("notes", ""),
            )
        )
    return records


def find_defect(records: list[DefectRecord], label: str) -> DefectRecord:
    for rec in records:
        if rec.label == label:
            return rec
    for rec in records:
        if rec.label.lower() == label.lower():
            return rec
    known = ", ".join(r.label for r in records)
    raise KeyError(f"unknown defect {label!r} (dataset has {known})")


def build_system(
    record: DefectRecord, isotope_overrides: dict[str, str] | None = None
) -> SpinSystem:
    """Assign isotopes to a defect's sites and return the spin system.

    By default every element gets its most abundant isotope (11B, 14N,
    12C). ``isotope_overrides`` maps element symbols to isotope symbols,
    e.g. ``{"C": "13C"}`` to study the carbon-13 defect.
    """
    overrides = isotope_overrides or {}
    pairs = []
    for site in record.sites:
        if site.element in overrides:
            iso = lookup(overrides[site.element])
            if iso.element != site.element:
                raise ValueError(
                    f"override {iso.symbol} is not an isotope of {site.element}"
                )
        else:
            iso = default_isotope(site.element)
        pairs.append((site, iso))
    return SpinSystem(record.label, tuple(pairs))


def replace_site(system: SpinSystem, index: int, site: NuclearSite, isotope: Isotope):
    """Functional single-site update preserving declared order."""
    sites = list(system.sites)
    sites[index] = (site, isotope)
    return dataclasses.replace(system, sites=tuple(sites))
