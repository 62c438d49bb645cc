"""Isotope assignments over symmetry-equivalent site groups.

Enumeration is count-level: sites inside a symmetry group are physically
equivalent, so only how many of each isotope occupy the group matters and
the multinomial factor absorbs the collapsed site assignments. Hyperfine
tensors scale linearly with the nuclear g-factor when one isotope replaces
another of the same element.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass

import numpy as np

from .isotopes import isotopes_of, lookup
from .solvers import ENUMERATION_THRESHOLD, LineList, MODE_FULL, sample_configurations
from .system import SpinSystem

PROBABILITY_FLOOR = 1e-4

GroupCounts = tuple[tuple[str, int], ...]       # ((isotope symbol, count), ...)


@dataclass(frozen=True)
class IsotopePattern:
    """Counts of each isotope per symmetry group, with its probability."""

    counts: tuple[tuple[str, GroupCounts], ...]  # ((group_id, counts), ...)
    probability: float

    def count_of(self, symbol: str) -> int:
        """Total sites carrying ``symbol`` across all groups."""
        return sum(
            c for _, group in self.counts for s, c in group if s == symbol
        )

    def describe(self) -> str:
        parts = []
        for _, group in self.counts:
            for symbol, count in group:
                if count:
                    parts.append(f"{count}x{symbol}")
        return "+".join(parts) if parts else "reference"


def _compositions(total: int, bins: int):
    """All count vectors of length ``bins`` summing to ``total``.

    Ordered with the first bin descending, so two-isotope groups come out
    as (n, 0), (n-1, 1), ..., (0, n).
    """
    if bins == 1:
        yield (total,)
        return
    for first in range(total, -1, -1):
        for rest in _compositions(total - first, bins - 1):
            yield (first,) + rest


def _group_probability(counts, abundances) -> float:
    total = sum(counts)
    coef = math.factorial(total)
    for c in counts:
        coef //= math.factorial(c)
    p = float(coef)
    for c, a in zip(counts, abundances):
        p *= a**c
    return p


def enumerate_patterns(
    system: SpinSystem, variable_elements=("B",)
) -> list[IsotopePattern]:
    """Exhaustive count-level patterns for the variable elements.

    Groups of other elements keep their assigned isotopes and do not
    appear in the patterns. Probabilities multiply across groups and sum
    to one over the enumeration.
    """
    variable = tuple(variable_elements)
    groups: list[tuple[str, str, int]] = []       # (group_id, element, size)
    for site, _ in system.sites:
        if site.element not in variable:
            continue
        for g in groups:
            if g[0] == site.group_id:
                break
        else:
            groups.append((site.group_id, site.element, 0))
    sized = []
    for gid, element, _ in groups:
        size = sum(1 for s, _ in system.sites if s.group_id == gid)
        sized.append((gid, element, size))
    for element in variable:
        isotopes_of(element)                       # raises if unknown

    per_group: list[list[tuple[GroupCounts, float]]] = []
    for gid, element, size in sized:
        isos = isotopes_of(element)
        options = []
        for counts in _compositions(size, len(isos)):
            p = _group_probability(counts, [i.abundance for i in isos])
            options.append(
                (tuple((iso.symbol, c) for iso, c in zip(isos, counts)), p)
            )
        per_group.append(options)

    patterns = [IsotopePattern(counts=(), probability=1.0)]
    for (gid, _, _), options in zip(sized, per_group):
        patterns = [
            IsotopePattern(
                counts=base.counts + ((gid, counts),),
                probability=base.probability * p,
            )
            for base in patterns
            for counts, p in options
        ]
    return patterns


def rescale_hyperfine(a, from_isotope, to_isotope):
    """Scale a hyperfine tensor by the ratio of nuclear g-factors.

    Works on principal-value triples and full 3x3 tensors alike. Both
    isotopes must belong to the same element, and the source must have a
    nonzero g-factor.
    """
    src = from_isotope if not isinstance(from_isotope, str) else lookup(from_isotope)
    dst = to_isotope if not isinstance(to_isotope, str) else lookup(to_isotope)
    if src.element != dst.element:
        raise ValueError(
            f"cannot rescale across elements ({src.symbol} -> {dst.symbol})"
        )
    if src.g_n == 0.0:
        raise ValueError(f"{src.symbol} carries no hyperfine coupling to rescale")
    return np.asarray(a, dtype=float) * (dst.g_n / src.g_n)


def apply_pattern(system: SpinSystem, pattern: IsotopePattern) -> SpinSystem:
    """Concrete spin system for one pattern.

    Within each group, sites are reassigned in declared order: the first
    ``count`` sites take the first listed isotope and so on. With
    equivalent sites any ordering gives the same line statistics.
    """
    assignment: dict[str, list[str]] = {}
    for gid, counts in pattern.counts:
        symbols = []
        for symbol, count in counts:
            symbols.extend([symbol] * count)
        assignment[gid] = symbols
    cursor = {gid: 0 for gid in assignment}
    new_sites = []
    for site, iso in system.sites:
        if site.group_id in assignment:
            idx = cursor[site.group_id]
            cursor[site.group_id] += 1
            symbol = assignment[site.group_id][idx]
            if symbol != iso.symbol:
                new_iso = lookup(symbol)
                pv = tuple(rescale_hyperfine(site.principal_values, iso, new_iso))
                site = dataclasses.replace(site, principal_values=pv)
                iso = new_iso
        new_sites.append((site, iso))
    for gid, symbols in assignment.items():
        if cursor[gid] != len(symbols):
            raise ValueError(f"pattern counts for group {gid} exceed its size")
    label = f"{system.label}[{pattern.describe()}]"
    return SpinSystem(label, tuple(new_sites), system.g_tensor)


@dataclass(frozen=True)
class SolveSettings:
    """Perturbative-solver settings shared by composite runs."""

    order: int = 2
    mode: str = MODE_FULL
    sample_count: int = 100_000
    seed: int = 0
    enumeration_threshold: int = ENUMERATION_THRESHOLD
    probability_floor: float = PROBABILITY_FLOOR


def composite_lines(
    system: SpinSystem,
    patterns,
    field,
    settings: SolveSettings = SolveSettings(),
) -> LineList:
    """Abundance-weighted merge of per-pattern line lists.

    Patterns below ``settings.probability_floor`` are skipped; the skipped
    probability mass is reported in the result metadata. Each pattern gets
    a child seed derived from the configured seed and its index, so the
    merged list is deterministic for any evaluation order.
    """
    patterns = list(patterns)
    total_p = sum(p.probability for p in patterns)
    if abs(total_p - 1.0) > 1e-9:
        raise ValueError(f"pattern probabilities sum to {total_p}, expected 1")
    freqs, intens, weights = [], [], []
    skipped = 0.0
    solved = 0
    for k, pattern in enumerate(patterns):
        if pattern.probability < settings.probability_floor:
            skipped += pattern.probability
            continue
        concrete = apply_pattern(system, pattern)
        lines = sample_configurations(
            concrete,
            field,
            order=settings.order,
            mode=settings.mode,
            sample_count=settings.sample_count,
            seed=[settings.seed, k],
            enumeration_threshold=settings.enumeration_threshold,
        )
        freqs.append(lines.frequencies)
        intens.append(lines.intensities)
        weights.append(lines.weights * pattern.probability)
        solved += 1
    merged = LineList(
        method="composite",
        field=field,
        frequencies=np.concatenate(freqs) if freqs else np.zeros(0),
        intensities=np.concatenate(intens) if intens else np.zeros(0),
        weights=np.concatenate(weights) if weights else np.zeros(0),
        meta={
            "patterns_solved": solved,
            "patterns_skipped": len(patterns) - solved,
            "skipped_probability": skipped,
            "order": settings.order,
            "mode": settings.mode,
            "seed": settings.seed,
        },
    )
    return merged.sorted()
