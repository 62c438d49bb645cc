"""Command-line front end.

Subcommands mirror the library layers: ``odmr`` runs one solver pipeline
end to end, ``compare-methods`` tabulates every approach for a defect,
``isotopes`` walks the isotopologue patterns, ``ctl`` and ``binding``
cover the energetics arithmetic and ``export-dataset`` copies the bundled
data files. All tables print human-readable by default and switch to
delimited output with ``--format csv``. Flags may be preloaded from a
JSON config document; explicit flags win.

Exit codes: 0 success, 1 usage or configuration error, 2 numerical
failure, 3 dataset error.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import shutil
import sys
from dataclasses import dataclass, fields

import numpy as np

from . import energetics
from .energetics import (
    binding_energy,
    ctl_diagram,
    defect_levels,
    group_records,
    load_complexes,
    load_energy_records,
)
from .hamiltonian import DimensionError, build_hamiltonian
from .isotopes import isotopes_of
from .isotopologues import (
    IsotopePattern,
    SolveSettings,
    apply_pattern,
    composite_lines,
    enumerate_patterns,
)
from .solvers import (
    LineList,
    ZeroFieldError,
    exact_transitions,
    hybrid_solve,
    sample_configurations,
    shell_indices,
)
from .spectrum import (
    DEFAULT_LINE_WIDTH,
    peak_stats,
    shift,
    synthesize,
    write_linelist,
    write_spectrum,
)
from .system import (
    DatasetError,
    SpinSystem,
    build_system,
    dataset_version,
    find_defect,
    load_defect_dataset,
)

METHODS = ("ezi", "perturb1", "perturb2", "a-constants", "exact", "hybrid")
_SHELL_LADDER = {1: 1.0, 2: math.sqrt(3.0)}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


@dataclass(frozen=True)
class RunConfig:
    """Resolved settings of one spectroscopy run, echoed into outputs."""

    command: str
    defect: str | None
    system_path: str | None
    field_gauss: float
    direction: tuple[float, float, float]
    method: str
    exact_shell: int
    subset_terms: tuple[str, ...]
    include_nqi: bool
    isotope_mode: str
    pattern: str | None
    carbon13: bool
    element: str
    seed: int
    samples: int
    window: tuple[float, float]
    shift_mhz: float
    line_width: float
    grid: tuple[float, float, float]
    out_spectrum: str | None
    out_lines: str | None
    fmt: str
    data_dir: str | None

    @property
    def field_vector(self) -> np.ndarray:
        d = np.asarray(self.direction, dtype=float)
        norm = np.linalg.norm(d)
        if norm == 0:
            raise UsageError("field direction must be a nonzero vector")
        return self.field_gauss * d / norm

    def echo(self) -> dict:
        out = {"command": self.command}
        for f in fields(self):
            if f.name in ("command", "out_spectrum", "out_lines"):
                continue
            value = getattr(self, f.name)
            if value is None:
                continue
            out[f.name] = list(value) if isinstance(value, tuple) else value
        return out


def _parse_triple(text: str, name: str) -> tuple[float, ...]:
    try:
        parts = tuple(float(p) for p in text.split(","))
    except ValueError:
        raise UsageError(f"cannot parse {name} {text!r}") from None
    return parts


def _parse_window(text: str) -> tuple[float, float]:
    parts = text.split(",")
    if len(parts) != 2:
        raise UsageError("window must be 'lo,hi' in MHz (hi may be inf)")
    try:
        lo, hi = float(parts[0]), float(parts[1])
    except ValueError:
        raise UsageError(f"cannot parse window {text!r}") from None
    return lo, hi


def _config_from_args(args, command: str) -> RunConfig:
    direction = _parse_triple(args.direction, "direction")
    if len(direction) != 3:
        raise UsageError("direction needs three comma-separated components")
    grid = _parse_triple(getattr(args, "grid", "0,300,0.1"), "grid")
    if len(grid) != 3:
        raise UsageError("grid needs 'start,stop,step'")
    return RunConfig(
        command=command,
        defect=getattr(args, "defect", None),
        system_path=getattr(args, "system", None),
        field_gauss=args.B,
        direction=direction,
        method=getattr(args, "method", "perturb2"),
        exact_shell=getattr(args, "exact_shell", 1),
        subset_terms=tuple(
            t for t in getattr(args, "subset_terms", "nzi").split(",") if t
        ),
        include_nqi=getattr(args, "nqi", False),
        isotope_mode=getattr(args, "isotopes", "fixed"),
        pattern=getattr(args, "pattern", None),
        carbon13=getattr(args, "carbon13", False),
        element=getattr(args, "element", "B"),
        seed=args.seed,
        samples=args.samples,
        window=_parse_window(args.window),
        shift_mhz=getattr(args, "shift", 0.0),
        line_width=getattr(args, "width", DEFAULT_LINE_WIDTH),
        grid=grid,
        out_spectrum=getattr(args, "out_spectrum", None),
        out_lines=getattr(args, "out_lines", None),
        fmt=args.format,
        data_dir=args.data,
    )


def _dataset_path(config: RunConfig, name: str) -> str | None:
    if config.data_dir:
        return os.path.join(config.data_dir, name)
    return None


def _resolve_system(config: RunConfig) -> SpinSystem:
    if config.system_path:
        with open(config.system_path) as fh:
            return SpinSystem.from_dict(json.load(fh))
    if not config.defect:
        raise UsageError("either --defect or --system is required")
    records = load_defect_dataset(_dataset_path(config, "defects.json"))
    record = find_defect(records, config.defect)
    overrides = {"C": "13C"} if config.carbon13 else None
    return build_system(record, overrides)


def _parse_pattern(config: RunConfig, system: SpinSystem) -> IsotopePattern:
    counts: dict[str, int] = {}
    for chunk in config.pattern.split(","):
        if not chunk:
            continue
        if ":" not in chunk:
            raise UsageError(f"pattern chunk {chunk!r} is not 'isotope:count'")
        symbol, _, num = chunk.partition(":")
        try:
            counts[symbol.strip()] = int(num)
        except ValueError:
            raise UsageError(f"bad count in pattern chunk {chunk!r}") from None
    elements = {sym.lstrip("0123456789") for sym in counts}
    if len(elements) != 1:
        raise UsageError("explicit patterns cover exactly one element")
    element = elements.pop()
    groups = {}
    for site, _ in system.sites:
        if site.element == element:
            groups[site.group_id] = groups.get(site.group_id, 0) + 1
    if len(groups) != 1:
        raise UsageError(
            f"{element} occupies {len(groups)} site groups; explicit patterns "
            "need exactly one"
        )
    (gid, size), = groups.items()
    if sum(counts.values()) != size:
        raise UsageError(f"pattern counts must sum to the group size {size}")
    ordered = tuple(
        (iso.symbol, counts.get(iso.symbol, 0)) for iso in isotopes_of(element)
    )
    return IsotopePattern(counts=((gid, ordered),), probability=1.0)


def _hybrid_indices(config: RunConfig, system: SpinSystem) -> tuple[int, ...]:
    max_dist = _SHELL_LADDER.get(config.exact_shell)
    if max_dist is None:
        raise UsageError(f"--exact-shell must be one of {sorted(_SHELL_LADDER)}")
    indices = shell_indices(system, max_dist)
    if not indices:
        raise UsageError("no spin-carrying sites inside the requested shell")
    return indices


def _solve(config: RunConfig, system: SpinSystem) -> LineList:
    field = config.field_vector
    method = config.method
    if method == "ezi":
        bare = SpinSystem(system.label + ":electron", (), system.g_tensor)
        h = build_hamiltonian(bare, field, terms=("ezi",))
        return exact_transitions(h, bare)
    if method == "exact":
        terms = ("ezi", "hfi", "nzi") + (("nqi",) if config.include_nqi else ())
        h = build_hamiltonian(system, field, terms=terms)
        return exact_transitions(h, system)
    if method == "hybrid":
        terms = ("hfi",) + config.subset_terms
        return hybrid_solve(
            system, _hybrid_indices(config, system), field, subset_terms=terms
        )
    if method in ("perturb1", "perturb2", "a-constants"):
        order = 1 if method == "perturb1" else 2
        mode = "a_constants" if method == "a-constants" else "full_tensor"
        return sample_configurations(
            system,
            field,
            order=order,
            mode=mode,
            sample_count=config.samples,
            seed=config.seed,
        )
    raise UsageError(f"unknown method {method!r}")


def _run_pipeline(config: RunConfig, system: SpinSystem) -> LineList:
    if config.isotope_mode == "natural":
        if config.method not in ("perturb1", "perturb2", "a-constants"):
            raise UsageError(
                "--isotopes natural needs a perturbative method "
                "(perturb1, perturb2 or a-constants)"
            )
        patterns = enumerate_patterns(system, (config.element,))
        settings = SolveSettings(
            order=1 if config.method == "perturb1" else 2,
            mode="a_constants" if config.method == "a-constants" else "full_tensor",
            sample_count=config.samples,
            seed=config.seed,
        )
        return composite_lines(system, patterns, config.field_vector, settings)
    if config.isotope_mode == "explicit":
        if not config.pattern:
            raise UsageError("--isotopes explicit needs --pattern")
        concrete = apply_pattern(system, _parse_pattern(config, system))
        return _solve(config, concrete)
    if config.isotope_mode != "fixed":
        raise UsageError(f"unknown isotope mode {config.isotope_mode!r}")
    return _solve(config, system)


def _export_meta(config: RunConfig) -> dict:
    meta = config.echo()
    meta["dataset_version"] = dataset_version(_dataset_path(config, "defects.json"))
    meta["seed"] = config.seed
    return meta


def _print_table(rows: list[list[str]], header: list[str], fmt: str, out):
    if fmt == "csv":
        print(",".join(header), file=out)
        for row in rows:
            print(",".join(row), file=out)
        return
    widths = [
        max(len(h), *(len(r[i]) for r in rows)) if rows else len(h)
        for i, h in enumerate(header)
    ]
    print("  ".join(h.ljust(w) for h, w in zip(header, widths)), file=out)
    for row in rows:
        print("  ".join(c.ljust(w) for c, w in zip(row, widths)), file=out)


def cmd_odmr(args) -> int:
    config = _config_from_args(args, "odmr")
    system = _resolve_system(config)
    lines = _run_pipeline(config, system)
    if config.shift_mhz:
        lines = shift(lines, config.shift_mhz)
    stats = peak_stats(lines, config.window)
    out = sys.stdout
    if config.fmt == "csv":
        print("# " + json.dumps(_export_meta(config), sort_keys=True), file=out)
        print("center_MHz,sigma_MHz,fwhm_MHz,included_weight_fraction", file=out)
        print(
            f"{stats.center:.9g},{stats.sigma:.9g},"
            f"{stats.fwhm_gauss:.9g},{stats.included_weight_fraction:.9g}",
            file=out,
        )
    else:
        label = config.defect or os.path.basename(config.system_path or "system")
        print(
            f"defect {label}  method {config.method}  "
            f"B {config.field_gauss:g} G  seed {config.seed}",
            file=out,
        )
        print(
            f"FWHM {stats.fwhm_gauss:.0f} MHz, center {stats.center:.0f} MHz",
            file=out,
        )
        print(f"center_MHz {stats.center:.9g}", file=out)
        print(f"sigma_MHz {stats.sigma:.9g}", file=out)
        print(f"fwhm_MHz {stats.fwhm_gauss:.9g}", file=out)
        print(
            f"included_weight_fraction {stats.included_weight_fraction:.9g}",
            file=out,
        )
    meta = _export_meta(config)
    if config.out_lines:
        write_linelist(lines, config.out_lines, extra_meta=meta)
    if config.out_spectrum:
        start, stop, step = config.grid
        grid = start + step * np.arange(int(round((stop - start) / step)) + 1)
        rendered = synthesize(lines, grid, per_line_width=config.line_width)
        write_spectrum(rendered, config.out_spectrum, extra_meta=meta)
    return 0


def _method_variants(config: RunConfig):
    yield "ezi", config
    for name in ("a-constants", "perturb2", "perturb1"):
        yield name, _replace_config(config, method=name)
    hybrid_base = _replace_config(config, method="hybrid", subset_terms=("nzi",))
    yield "hybrid (1st: nzi)", hybrid_base
    # "+" rather than "," so the label stays a single CSV cell
    yield "hybrid (1st: nzi+nqi)", _replace_config(
        config, method="hybrid", subset_terms=("nzi", "nqi")
    )


def _replace_config(config: RunConfig, **changes) -> RunConfig:
    import dataclasses

    return dataclasses.replace(config, **changes)


def cmd_compare_methods(args) -> int:
    config = _config_from_args(args, "compare-methods")
    config = _replace_config(config, method="ezi")
    system = _resolve_system(config)
    rows = []
    for name, variant in _method_variants(config):
        try:
            stats = peak_stats(_solve(variant, system), config.window)
        except ValueError as exc:
            rows.append([name, "n/a", "n/a", str(exc)])
            continue
        if config.fmt == "csv":
            rows.append([name, f"{stats.fwhm_gauss:.9g}", f"{stats.center:.9g}"])
        else:
            rows.append([name, f"{stats.fwhm_gauss:.0f}", f"{stats.center:.0f}"])
    if config.fmt != "csv":
        print(
            f"defect {config.defect}  B {config.field_gauss:g} G  "
            f"window {config.window[0]:g}-{config.window[1]:g} MHz  "
            f"seed {config.seed}"
        )
    _print_table(rows, ["method", "fwhm_MHz", "center_MHz"], config.fmt, sys.stdout)
    return 0


def cmd_isotopes(args) -> int:
    config = _config_from_args(args, "isotopes")
    system = _resolve_system(config)
    if config.pattern:
        patterns = [_parse_pattern(config, system)]
    else:
        patterns = enumerate_patterns(system, (config.element,))
    symbols = [iso.symbol for iso in isotopes_of(config.element)]
    rows = []
    for k, pattern in enumerate(patterns):
        concrete = apply_pattern(system, pattern)
        lines = sample_configurations(
            concrete,
            config.field_vector,
            sample_count=config.samples,
            seed=[config.seed, k],
        )
        stats = peak_stats(lines, config.window)
        counts = [str(pattern.count_of(s)) for s in symbols]
        if config.fmt == "csv":
            rows.append(
                counts
                + [
                    f"{100.0 * pattern.probability:.9g}",
                    f"{stats.center:.9g}",
                    f"{stats.fwhm_gauss:.9g}",
                ]
            )
        else:
            rows.append(
                counts
                + [
                    f"{100.0 * pattern.probability:.2f}",
                    f"{stats.center:.0f}",
                    f"{stats.fwhm_gauss:.0f}",
                ]
            )
    header = [f"n_{s}" for s in symbols] + ["p_percent", "center_MHz", "fwhm_MHz"]
    if config.fmt != "csv":
        print(
            f"defect {config.defect}  B {config.field_gauss:g} G  seed {config.seed}"
        )
    _print_table(rows, header, config.fmt, sys.stdout)
    return 0


def cmd_ctl(args) -> int:
    path = args.records
    if path is None and args.data:
        path = os.path.join(args.data, "energies.json")
    records = load_energy_records(path)
    if not records:
        raise UsageError(f"no energy records in {path or 'bundled dataset'}")
    levels = defect_levels(records)
    by_key = {}
    order = []
    for r in levels:
        key = (r.label, r.transition)
        if key not in order:
            order.append(key)
        by_key.setdefault(key, {})[r.corrected] = r
    rows = []
    for key in order:
        label, transition = key
        pair = by_key[key]
        corr = pair.get(True)
        uncorr = pair.get(False)
        flags = set()
        for r in (corr, uncorr):
            if r is None:
                continue
            if r.energy is None:
                flags.add(r.flag or "unclear")
            elif r.above_gap:
                flags.add("above-gap")
        rows.append(
            [
                label,
                transition,
                "unclear" if corr is None or corr.energy is None
                else f"{corr.energy:.2f}",
                "-" if uncorr is None else f"{uncorr.energy:.2f}",
                ",".join(sorted(flags)) if flags else "-",
            ]
        )
    if args.format != "csv":
        print(f"charge transition levels (eV, VBM = 0, CBM = {energetics.INDIRECT_GAP_EV})")
    _print_table(
        rows,
        ["defect", "transition", "corrected_eV", "uncorrected_eV", "flags"],
        args.format,
        sys.stdout,
    )
    if args.diagram:
        with open(args.diagram, "w") as fh:
            fh.write(ctl_diagram(records))
    return 0


def cmd_binding(args) -> int:
    records_path = args.records
    complexes_path = args.complexes
    if args.data:
        records_path = records_path or os.path.join(args.data, "energies.json")
        complexes_path = complexes_path or os.path.join(args.data, "complexes.json")
    records = load_energy_records(records_path)
    table = load_complexes(complexes_path)
    neutral = {
        label: states[0]
        for label, states in group_records(records).items()
        if 0 in states
    }
    pristine_label = table["pristine"]
    if pristine_label not in neutral:
        raise DatasetError(f"no neutral record for pristine cell {pristine_label!r}")
    rows = []
    for entry in table["complexes"]:
        name = entry["complex"]
        constituents = entry["constituents"]
        missing = [c for c in [name, *constituents] if c not in neutral]
        if missing:
            raise DatasetError(f"missing neutral records: {', '.join(missing)}")
        eb = binding_energy(
            neutral[name],
            [neutral[c] for c in constituents],
            neutral[pristine_label],
        )
        value = f"{eb:.9g}" if args.format == "csv" else f"{eb:.2f}"
        rows.append([name, str(len(constituents)), value])
    if args.format != "csv":
        print("binding energies (eV); negative favors complex formation")
    _print_table(
        rows, ["complex", "constituents", "binding_eV"], args.format, sys.stdout
    )
    return 0


def cmd_export_dataset(args) -> int:
    from .system import data_directory

    source = args.data or data_directory()
    names = (
        ["defects", "energies", "complexes"] if args.what == "all" else [args.what]
    )
    os.makedirs(args.dest, exist_ok=True)
    for name in names:
        src = os.path.join(source, f"{name}.json")
        if not os.path.exists(src):
            raise DatasetError(f"dataset file not found: {src}")
        dst = os.path.join(args.dest, f"{name}.json")
        shutil.copyfile(src, dst)
        print(dst)
    return 0


def _add_common(p: argparse.ArgumentParser):
    p.add_argument("--format", choices=("table", "csv"), default="table")
    p.add_argument("--data", default=None, help="override the dataset directory")
    p.add_argument("--config", default=None, help="JSON document of flag defaults")


def _add_spectroscopy(p: argparse.ArgumentParser):
    p.add_argument("--defect", default=None, help="defect label from the dataset")
    p.add_argument("--system", default=None, help="path to a serialized spin system")
    p.add_argument("--B", type=float, default=42.0, help="field magnitude in Gauss")
    p.add_argument("--direction", default="0,0,1", help="field direction (crystal frame)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--samples", type=int, default=100_000,
                   help="Monte-Carlo sample count past the enumeration threshold")
    p.add_argument("--window", default="30,inf", help="analysis window lo,hi in MHz")


def build_parser() -> tuple[_Parser, dict]:
    parser = _Parser(prog="defectspin", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)
    registry = {}

    p = sub.add_parser("odmr", help="solve one defect and report peak statistics")
    _add_spectroscopy(p)
    p.add_argument("--method", choices=METHODS, default="perturb2")
    p.add_argument("--exact-shell", type=int, default=1, dest="exact_shell",
                   help="neighbor shell diagonalized exactly (hybrid)")
    p.add_argument("--subset-terms", default="nzi", dest="subset_terms",
                   help="extra exact-subsystem terms beyond hfi (hybrid)")
    p.add_argument("--nqi", action="store_true",
                   help="include nuclear quadrupole terms in the exact method")
    p.add_argument("--isotopes", choices=("fixed", "natural", "explicit"),
                   default="fixed")
    p.add_argument("--pattern", default=None,
                   help="explicit isotope counts, e.g. 11B:2,10B:1")
    p.add_argument("--carbon13", action="store_true",
                   help="substitute 13C on the carbon sites")
    p.add_argument("--shift", type=float, default=0.0,
                   help="constant spectrum shift in MHz")
    p.add_argument("--width", type=float, default=DEFAULT_LINE_WIDTH,
                   help="per-line FWHM for the synthesized spectrum")
    p.add_argument("--grid", default="0,300,0.1", help="spectrum grid start,stop,step")
    p.add_argument("--out-spectrum", default=None, dest="out_spectrum")
    p.add_argument("--out-lines", default=None, dest="out_lines")
    _add_common(p)
    p.set_defaults(func=cmd_odmr)
    registry["odmr"] = p

    p = sub.add_parser("compare-methods", help="one row per solver approach")
    _add_spectroscopy(p)
    _add_common(p)
    p.set_defaults(func=cmd_compare_methods)
    registry["compare-methods"] = p

    p = sub.add_parser("isotopes", help="per-pattern isotopologue statistics")
    _add_spectroscopy(p)
    p.add_argument("--element", default="B", help="element with variable isotopes")
    p.add_argument("--pattern", default=None,
                   help="restrict to one explicit pattern, e.g. 11B:3")
    _add_common(p)
    p.set_defaults(func=cmd_isotopes)
    registry["isotopes"] = p

    p = sub.add_parser("ctl", help="charge transition levels from energy records")
    p.add_argument("records", nargs="?", default=None,
                   help="energy records (JSON or delimited text); bundled by default")
    p.add_argument("--diagram", default=None, help="write plot-ready diagram text")
    _add_common(p)
    p.set_defaults(func=cmd_ctl)
    registry["ctl"] = p

    p = sub.add_parser("binding", help="complex binding energies")
    p.add_argument("records", nargs="?", default=None)
    p.add_argument("--complexes", default=None, help="complex composition table")
    _add_common(p)
    p.set_defaults(func=cmd_binding)
    registry["binding"] = p

    p = sub.add_parser("export-dataset", help="copy bundled data files")
    p.add_argument("--what", choices=("defects", "energies", "complexes", "all"),
                   default="all")
    p.add_argument("--dest", default=".")
    _add_common(p)
    p.set_defaults(func=cmd_export_dataset)
    registry["export-dataset"] = p

    return parser, registry


def _apply_config_file(args, registry):
    path = getattr(args, "config", None)
    if not path:
        return args
    try:
        with open(path) as fh:
            overrides = json.load(fh)
    except OSError as exc:
        raise UsageError(f"cannot read config file: {exc}") from None
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path}: config parse error at line {exc.lineno}") from None
    if not isinstance(overrides, dict):
        raise UsageError("config document must be a JSON object")
    sub = registry[args.command]
    for key, value in overrides.items():
        dest = key.replace("-", "_")
        if not hasattr(args, dest):
            raise UsageError(f"config key {key!r} matches no flag of {args.command}")
        # Flags that were left at their parser default take the config value.
        if getattr(args, dest) == sub.get_default(dest):
            setattr(args, dest, value)
    return args


def main(argv=None) -> int:
    parser, registry = build_parser()
    try:
        args = parser.parse_args(argv)
        args = _apply_config_file(args, registry)
        return args.func(args)
    except UsageError as exc:
        print(f"defectspin: usage error: {exc}", file=sys.stderr)
        return 1
    except DatasetError as exc:
        print(f"defectspin: dataset error: {exc}", file=sys.stderr)
        return 3
    except np.linalg.LinAlgError as exc:
        print(f"defectspin: numerical failure: {exc}", file=sys.stderr)
        return 2
    except (DimensionError, ZeroFieldError) as exc:
        print(f"defectspin: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"defectspin: error: {exc}", file=sys.stderr)
        return 1
    except (ValueError, KeyError) as exc:
        message = exc.args[0] if exc.args else exc
        print(f"defectspin: error: {message}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
