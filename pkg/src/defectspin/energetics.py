"""Charge-transition levels and complex binding energies.

Inputs are total-energy records per (defect, charge state), already
referenced to the valence band maximum, with an a-posteriori charge
correction carried as a separate number. Transition levels:

    (+1|0):  E = E0(q=0) - E0(q=+1) - delta(+1)   [delta if corrected]
    (0|-1):  E = E0(q=-1) - E0(q=0) + delta(-1)

Binding energy of an m-defect complex against its isolated constituents:

    E_b = E(complex) + (m - 1) E(pristine) - sum_i E(constituent_i)

and a negative value favors complex formation.
"""

from __future__ import annotations

import json
import math
import os
import warnings
from dataclasses import dataclass

from .system import DatasetError, data_directory

INDIRECT_GAP_EV = 5.950     # hBN indirect gap; CBM reference for flagging


@dataclass(frozen=True)
class EnergyRecord:
    """Total energy of one charge state of one defect."""

    label: str
    charge: int
    energy: float                   # eV, VBM-referenced supercell total
    correction: float | None = 0.0  # a-posteriori charge correction, eV
    flag: str | None = None

    def __post_init__(self):
        if not math.isfinite(self.energy):
            raise ValueError(f"{self.label}: energy must be finite")
        if self.charge == 0:
            if self.correction not in (0.0, None):
                raise ValueError(f"{self.label}: neutral state takes no correction")
            object.__setattr__(self, "correction", 0.0)
        elif self.correction is not None and self.correction < 0:
            raise ValueError(f"{self.label}: correction must be non-negative")


@dataclass(frozen=True)
class CtlResult:
    """One charge-transition level relative to the VBM."""

    label: str
    transition: str                 # "(+1|0)" or "(0|-1)"
    energy: float | None            # eV; None when the correction is unclear
    corrected: bool
    above_gap: bool
    gap: float = INDIRECT_GAP_EV
    flag: str | None = None


def compute_ctl(
    neutral: EnergyRecord, charged: EnergyRecord, corrected: bool
) -> CtlResult:
    """Level at which the two charge states swap stability."""
    if neutral.label != charged.label:
        raise ValueError(
            f"label mismatch: {neutral.label!r} vs {charged.label!r}"
        )
    if neutral.charge != 0:
        raise ValueError("first record must be the neutral state")
    if charged.charge == 1:
        transition = "(+1|0)"
        energy = neutral.energy - charged.energy
        sign = -1.0
    elif charged.charge == -1:
        transition = "(0|-1)"
        energy = charged.energy - neutral.energy
        sign = +1.0
    else:
        raise ValueError(f"unsupported charge {charged.charge}; expected +1 or -1")
    flag = charged.flag
    if corrected:
        if charged.correction is None:
            return CtlResult(
                label=neutral.label,
                transition=transition,
                energy=None,
                corrected=True,
                above_gap=False,
                flag=flag or "unclear",
            )
        energy += sign * charged.correction
    return CtlResult(
        label=neutral.label,
        transition=transition,
        energy=energy,
        corrected=corrected,
        above_gap=energy > INDIRECT_GAP_EV,
        flag=flag,
    )


def binding_energy(
    complex_record: EnergyRecord,
    constituents,
    pristine: EnergyRecord,
    multiplicity: int | None = None,
) -> float:
    """Formation energy of a complex from isolated constituents, eV."""
    constituents = list(constituents)
    for rec in [complex_record, pristine, *constituents]:
        if rec.charge != 0:
            raise ValueError(
                f"{rec.label}: binding energies mix only neutral states"
            )
    m = len(constituents) if multiplicity is None else multiplicity
    return (
        complex_record.energy
        + (m - 1) * pristine.energy
        - sum(rec.energy for rec in constituents)
    )


def group_records(records):
    """Records keyed by label, preserving first-seen order."""
    grouped: dict[str, dict[int, EnergyRecord]] = {}
    for rec in records:
        grouped.setdefault(rec.label, {})[rec.charge] = rec
    return grouped


def defect_levels(records) -> list[CtlResult]:
    """All computable levels, corrected and uncorrected, in dataset order."""
    results = []
    for label, states in group_records(records).items():
        if 0 not in states:
            warnings.warn(f"{label}: no neutral state; skipped")
            continue
        neutral = states[0]
        for q in (1, -1):
            if q not in states:
                warnings.warn(f"{label}: missing charge {q:+d}; transition omitted")
                continue
            for corrected in (False, True):
                results.append(compute_ctl(neutral, states[q], corrected))
    return results


def ctl_diagram(records) -> str:
    """Plot-ready delimited text with both band edges and every level."""
    levels = defect_levels(records)
    lines = [
        "# charge transition levels relative to the VBM (eV)",
        f"# band edges: VBM 0.000 CBM {INDIRECT_GAP_EV:.3f}",
        "# defect\ttransition\tvariant\tenergy_eV\tflag",
        f"VBM\t-\t-\t{0.0:.3f}\t-",
        f"CBM\t-\t-\t{INDIRECT_GAP_EV:.3f}\t-",
    ]
    if not levels:
        warnings.warn("no complete defect in records; diagram is empty")
    for r in levels:
        variant = "corrected" if r.corrected else "uncorrected"
        value = "unclear" if r.energy is None else f"{r.energy:.3f}"
        flag = r.flag or ("above-gap" if r.above_gap else "-")
        lines.append(f"{r.label}\t{r.transition}\t{variant}\t{value}\t{flag}")
    return "\n".join(lines) + "\n"


def _record_from_json(raw: dict, where: str) -> EnergyRecord:
    try:
        return EnergyRecord(
            label=raw["label"],
            charge=int(raw["charge"]),
            energy=float(raw["energy_eV"]),
            correction=(
                None if raw.get("correction_eV") is None else float(raw["correction_eV"])
            ),
            flag=raw.get("flag"),
        )
    except KeyError as exc:
        raise DatasetError(f"{where}: missing field {exc.args[0]!r}") from None
    except (TypeError, ValueError) as exc:
        raise DatasetError(f"{where}: {exc}") from None


def load_energy_records(path: str | None = None) -> list[EnergyRecord]:
    """Read energy records from JSON or whitespace-delimited text.

    Text rows are ``label charge energy_eV [correction_eV] [flag]`` with
    ``-`` marking an unavailable correction; ``#`` starts a comment. JSON
    files hold a list (or ``{"records": [...]}``) of objects with keys
    ``label``, ``charge``, ``energy_eV``, ``correction_eV``, ``flag``.
    """
    if path is None:
        path = os.path.join(data_directory(), "energies.json")
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise DatasetError(f"cannot read energy records: {exc}") from None
    if path.endswith(".json"):
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise DatasetError(
                f"{path}: parse error at line {exc.lineno}: {exc.msg}"
            ) from None
        raw_records = doc.get("records", doc) if isinstance(doc, dict) else doc
        return [
            _record_from_json(raw, f"{path}: record #{i}")
            for i, raw in enumerate(raw_records)
        ]
    records = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        parts = body.split()
        if len(parts) < 3:
            raise DatasetError(
                f"{path}: line {lineno}: expected 'label charge energy [delta] [flag]'"
            )
        try:
            charge = int(parts[1])
            energy = float(parts[2])
            correction = None
            if len(parts) > 3 and parts[3] != "-":
                correction = float(parts[3])
            if len(parts) <= 3:
                correction = 0.0
        except ValueError as exc:
            raise DatasetError(f"{path}: line {lineno}: {exc}") from None
        flag = parts[4] if len(parts) > 4 else None
        records.append(
            EnergyRecord(
                label=parts[0],
                charge=charge,
                energy=energy,
                correction=correction,
                flag=flag,
            )
        )
    return records


def load_complexes(path: str | None = None) -> dict:
    """Complex composition table plus the pristine-cell label.

    Returns ``{"pristine": label, "complexes": [{"complex": ...,
    "constituents": [...]}, ...]}``.
    """
    if path is None:
        path = os.path.join(data_directory(), "complexes.json")
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise DatasetError(f"cannot read complexes: {exc}") from None
    except json.JSONDecodeError as exc:
        raise DatasetError(f"{path}: parse error at line {exc.lineno}") from None
    if not isinstance(doc, dict):
        doc = {"complexes": doc}
    entries = doc.get("complexes", [])
    for entry in entries:
        if "complex" not in entry or "constituents" not in entry:
            raise DatasetError(f"{path}: entries need 'complex' and 'constituents'")
    return {"pristine": doc.get("pristine", "pristine"), "complexes": entries}
