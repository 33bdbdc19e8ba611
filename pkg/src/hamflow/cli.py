"""Configuration-driven command line front end.

Scenarios are JSON files naming a builtin family, numeric knobs and a report
selection; runs write a key-value report plus CSV tables (eigenvalue tracks,
crossings, convergence) suitable for external plotting.  Exit codes: 0 all
agreement flags true, 1 disagreement, 2 config/schema violation, 3 numeric
failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import families as fam
from . import hamiltonian as ha
from . import maslov as ma
from . import spectral as sf
from .symplectic import souriau_map, intersection_dimension_rank, standard_space, lagrangian_from_matrix

THREADS_ENV = "HAMFLOW_THREADS"

EXIT_OK = 0
EXIT_DISAGREE = 1
EXIT_SCHEMA = 2
EXIT_NUMERIC = 3

KNOWN_REPORTS = ("theorem-a", "theorem-b", "corollary-a", "self-tests")

_NUMERIC_KEYS = {"grid", "trunc", "mesh", "tol", "contour_samples", "doubling", "third_opinion"}


class ConfigError(ValueError):
    """Scenario file violates the schema."""


@dataclass
class ScenarioConfig:
    family_id: str
    family_params: dict
    grid: int = 17
    trunc: float | None = None
    mesh: int = 160
    tol: float = 1e-6
    contour_samples: int = 256
    doubling: bool = False
    third_opinion: bool = False
    reports: tuple = ("theorem-a",)
    out: str = "results"


@dataclass
class RunArtifacts:
    report_path: str
    tracks_path: str | None
    crossings_path: str | None
    convergence_path: str | None
    integers: dict = field(default_factory=dict)
    all_agree: bool = True


def _thread_count() -> int:
    raw = os.environ.get(THREADS_ENV)
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            pass
    return os.cpu_count() or 1


def load_config(path: str) -> ScenarioConfig:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read scenario file {path}: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError("scenario must be a JSON object")
    unknown = set(raw) - {"family", "numeric", "reports", "out"}
    if unknown:
        raise ConfigError(f"unknown top-level keys: {sorted(unknown)}")

    family = raw.get("family")
    if not isinstance(family, dict) or "id" not in family:
        raise ConfigError("scenario needs a 'family' object with an 'id'")
    fid = family["id"]
    if fid not in fam.family_catalog():
        raise ConfigError(f"unknown family id '{fid}'")
    params = {k: v for k, v in family.items() if k != "id"}
    allowed = set(fam.family_catalog()[fid]["params"])
    bad = set(params) - allowed
    if bad:
        raise ConfigError(f"unknown parameters for family '{fid}': {sorted(bad)}")

    numeric = raw.get("numeric", {})
    if not isinstance(numeric, dict):
        raise ConfigError("'numeric' must be an object")
    bad = set(numeric) - _NUMERIC_KEYS
    if bad:
        raise ConfigError(f"unknown numeric keys: {sorted(bad)}")

    reports = tuple(raw.get("reports", ("theorem-a",)))
    bad = set(reports) - set(KNOWN_REPORTS)
    if bad:
        raise ConfigError(f"unknown reports: {sorted(bad)}; known: {KNOWN_REPORTS}")

    cfg = ScenarioConfig(family_id=fid, family_params=params, reports=reports,
                         out=raw.get("out", "results"))
    for key in _NUMERIC_KEYS:
        if key in numeric:
            setattr(cfg, key, numeric[key])
    _validate_ranges(cfg)
    return cfg


def _validate_ranges(cfg: ScenarioConfig) -> None:
    if not (3 <= int(cfg.grid) <= 4097):
        raise ConfigError("grid must be between 3 and 4097")
    if not (4 <= int(cfg.mesh) <= 20000):
        raise ConfigError("mesh must be between 4 and 20000")
    if cfg.trunc is not None and not (0.5 <= float(cfg.trunc) <= 200.0):
        raise ConfigError("trunc must be between 0.5 and 200")
    if not (0 < float(cfg.tol) <= 1e-2):
        raise ConfigError("tol must be in (0, 1e-2]")
    if not (16 <= int(cfg.contour_samples) <= 65536):
        raise ConfigError("contour_samples must be between 16 and 65536")


def _atomic_write(path: str, text: str) -> None:
    directory = os.path.dirname(path) or "."
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _family(cfg: ScenarioConfig):
    params = dict(cfg.family_params)
    if "rates" in params and params["rates"] is not None:
        params["rates"] = np.asarray(params["rates"], dtype=float)
    return fam.make_family(cfg.family_id, **params)


def _trunc(cfg, family) -> float:
    return float(cfg.trunc) if cfg.trunc is not None else 10.0 * family.decay_scale


def _run_reports(cfg: ScenarioConfig):
    family = _family(cfg)
    T = _trunc(cfg, family)
    grid = np.linspace(0.0, 1.0, int(cfg.grid))
    results = {}
    for name in cfg.reports:
        if name == "theorem-a":
            results[name] = ha.theorem_A_report(family, lam_grid=grid, T=T, N=int(cfg.mesh),
                                                third_opinion=bool(cfg.third_opinion),
                                                endpoint_kernel_tol=float(cfg.tol),
                                                chern_samples=int(cfg.contour_samples))
        elif name == "theorem-b":
            path_u, path_s = ha.stable_unstable_pair_path(family, grid, 0.0, T)
            results[name] = ha.theorem_B_report(path_u, path_s, -1.0, 1.0, int(cfg.mesh))
        elif name == "corollary-a":
            results[name] = ha.corollary_A_report(family, lam_grid=grid, T=T, N=int(cfg.mesh))
        elif name == "self-tests":
            results[name] = _self_test_report()
    return family, T, grid, results


def _self_test_report():
    """Normalization identities as a miniature report."""
    sp = standard_space(1)
    W = lagrangian_from_matrix(np.array([[1.0], [0.0]]), sp)
    gnor = ma.LagrangianPath.from_callable(
        sp, lambda lam: lagrangian_from_matrix(
            np.array([[-np.sin(np.pi * lam)], [np.cos(np.pi * lam)]]), sp), grid=17)
    mas = ma.maslov_index(gnor, W)
    flow, _ = sf.spectral_flow(sf.normalization_path(1, 1))
    kappa = sf.chern_winding(sf.SymmetricMatrixPath(lambda lam: np.array([[2 * lam - 1.0]])))
    return ha.IndexReport(sfl=flow, maslov=mas, chern=kappa)


def _report_lines(cfg, T, results) -> list:
    lines = [
        f"family = {cfg.family_id}",
        f"params = {json.dumps(cfg.family_params, sort_keys=True)}",
        f"trunc = {T:g}",
        f"mesh = {cfg.mesh}",
        f"grid = {cfg.grid}",
    ]
    for name in sorted(results):
        rep = results[name]
        lines.append(f"{name}.sfl = {rep.sfl}")
        lines.append(f"{name}.maslov = {rep.maslov}")
        if rep.chern is not None:
            lines.append(f"{name}.chern = {rep.chern}")
        lines.append(f"{name}.agree = {str(rep.agree).lower()}")
        for i, c in enumerate(rep.crossings):
            lines.append(f"{name}.crossing.{i} = {c.lam:.10f} dim {c.intersection_dim}")
        for key, val in sorted(rep.extras.items()):
            lines.append(f"{name}.{key} = {val}")
    return lines


def _tracks_rows(cfg, family, T, grid):
    """Per-lambda diagnostics: pencil eigenvalues, Souriau phases, intersections."""
    n_eigs = 4
    w = ha.pencil_window(-T, T, asym_gap=ha._asymptotic_gap(family, (grid[0], grid[-1])))
    sp = family.space

    def row(lam):
        op = ha.assemble_A0_operator(family, lam, T, int(cfg.mesh))
        vals = np.sort(op.eigenvalues(window=3.0 * w))
        order = np.argsort(np.abs(vals))
        vals = vals[order[:n_eigs]]
        eigs = list(vals) + [np.nan] * (n_eigs - len(vals))
        eu = ha.unstable_space(family, lam, 0.0, T)
        es = ha.stable_space(family, lam, 0.0, T)
        psi = np.angle(-np.linalg.eigvals(souriau_map(eu, es, sp)))
        psi = psi[np.argsort(np.abs(psi))][:2]
        phases = list(psi) + [np.nan] * (2 - len(psi))
        dim = intersection_dimension_rank(eu, es)
        return [float(lam)] + [float(x) for x in eigs] + [float(p) for p in phases] + [dim]

    workers = _thread_count()
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(row, grid))
    else:
        rows = [row(lam) for lam in grid]
    rows.sort(key=lambda r: r[0])
    header = (["lambda"] + [f"eig_{i + 1}" for i in range(n_eigs)]
              + ["phase_1", "phase_2", "intersection_dim"])
    return header, rows


def _csv(header, rows) -> str:
    def cell(v):
        if isinstance(v, (float, np.floating)):
            return "" if np.isnan(v) else f"{v:.12g}"
        return str(v)

    out = [",".join(header)]
    out.extend(",".join(cell(v) for v in r) for r in rows)
    return "\n".join(out) + "\n"


def run_scenario(config_path: str, overrides: dict | None = None,
                 tracks_only: bool = False) -> RunArtifacts:
    cfg = load_config(config_path)
    for key, val in (overrides or {}).items():
        if val is not None:
            setattr(cfg, key, val)
    _validate_ranges(cfg)

    family = _family(cfg)
    T = _trunc(cfg, family)
    grid = np.linspace(0.0, 1.0, int(cfg.grid))
    out = cfg.out

    tracks_path = os.path.join(out, "tracks.csv")
    header, rows = _tracks_rows(cfg, family, T, grid)
    _atomic_write(tracks_path, _csv(header, rows))

    if tracks_only:
        return RunArtifacts(report_path="", tracks_path=tracks_path,
                            crossings_path=None, convergence_path=None)

    family, T, grid, results = _run_reports(cfg)

    crossings_path = os.path.join(out, "crossings.csv")
    cross_rows = []
    for name, rep in results.items():
        for c in rep.crossings:
            cross_rows.append([c.lam, c.intersection_dim, name])
    cross_rows.sort(key=lambda r: r[0])
    _atomic_write(crossings_path, _csv(["lambda", "dim", "report"], cross_rows))

    convergence_path = os.path.join(out, "convergence.csv")
    if cfg.doubling and "theorem-a" in results:
        base = results["theorem-a"]
        rep2 = ha.theorem_A_report(family, lam_grid=grid, T=1.5 * T, N=int(cfg.mesh),
                                   locate_crossings=False)
        rep3 = ha.theorem_A_report(family, lam_grid=grid, T=T, N=2 * int(cfg.mesh),
                                   locate_crossings=False)
        conv_rows = [
            ["base", f"{T:g}", str(cfg.mesh), str(base.sfl), str(base.maslov)],
            ["trunc-x1.5", f"{1.5 * T:g}", str(cfg.mesh), str(rep2.sfl), str(rep2.maslov)],
            ["mesh-x2", f"{T:g}", str(2 * int(cfg.mesh)), str(rep3.sfl), str(rep3.maslov)],
        ]
        _atomic_write(convergence_path,
                      _csv(["setting", "trunc", "mesh", "sfl", "maslov"], conv_rows))
    else:
        _atomic_write(convergence_path,
                      _csv(["setting", "trunc", "mesh"], [["base", f"{T:g}", str(cfg.mesh)]]))

    report_path = os.path.join(out, "report.txt")
    lines = _report_lines(cfg, T, results)
    all_agree = all(rep.agree for rep in results.values())
    lines.append(f"all_agree = {str(all_agree).lower()}")
    _atomic_write(report_path, "\n".join(lines) + "\n")

    integers = {name: {"sfl": rep.sfl, "maslov": rep.maslov, "chern": rep.chern}
                for name, rep in results.items()}
    return RunArtifacts(report_path=report_path, tracks_path=tracks_path,
                        crossings_path=crossings_path, convergence_path=convergence_path,
                        integers=integers, all_agree=all_agree)


def _cmd_families() -> int:
    catalog = fam.family_catalog()
    for fid in sorted(catalog):
        entry = catalog[fid]
        print(f"{fid}")
        print(f"  assumptions: {entry['assumptions']}")
        for pname, pdesc in entry["params"].items():
            print(f"  param {pname}: {pdesc}")
        print(f"  notes: {entry['notes']}")
    return EXIT_OK


def _cmd_selftest() -> int:
    rep = _self_test_report()
    ok = rep.sfl == 1 and rep.maslov == 1 and rep.chern == 1
    print(f"normalization maslov = {rep.maslov} (want 1)")
    print(f"normalization spectral flow = {rep.sfl} (want 1)")
    print(f"kappa winding = {rep.chern} (want 1)")
    print("selftest " + ("passed" if ok else "FAILED"))
    return EXIT_OK if ok else EXIT_DISAGREE


def _overrides_from_args(args) -> dict:
    return {
        "out": args.out,
        "grid": args.grid,
        "trunc": args.trunc,
        "mesh": args.mesh,
        "tol": args.tol,
        "third_opinion": True if args.third_opinion else None,
    }


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hamflow",
        description="spectral flow / Maslov index / Chern winding scenario runner")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("config", help="scenario JSON file")
        p.add_argument("--out", default=None, help="output directory")
        p.add_argument("--grid", type=int, default=None, help="lambda grid size")
        p.add_argument("--trunc", type=float, default=None, help="time truncation T")
        p.add_argument("--mesh", type=int, default=None, help="Galerkin mesh intervals")
        p.add_argument("--tol", type=float, default=None, help="tolerance knob")
        p.add_argument("--third-opinion", action="store_true", dest="third_opinion",
                       help="also compute the determinant-winding Chern number")

    add_common(sub.add_parser("run", help="run the scenario reports and write artifacts"))
    sub.add_parser("families", help="list builtin family ids and parameters")
    add_common(sub.add_parser("tracks", help="write only the eigenvalue-track table"))
    sub.add_parser("selftest", help="run the builtin normalization checks")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "families":
        return _cmd_families()
    if args.command == "selftest":
        return _cmd_selftest()
    try:
        artifacts = run_scenario(args.config, _overrides_from_args(args),
                                 tracks_only=(args.command == "tracks"))
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_SCHEMA
    except Exception as exc:  # numeric failure of any pipeline
        print(f"numeric failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    if args.command == "tracks":
        print(f"tracks written to {artifacts.tracks_path}")
        return EXIT_OK
    print(f"report written to {artifacts.report_path}")
    for name, ints in sorted(artifacts.integers.items()):
        chern = "" if ints["chern"] is None else f" chern={ints['chern']}"
        print(f"  {name}: sfl={ints['sfl']} maslov={ints['maslov']}{chern}")
    if not artifacts.all_agree:
        diffs = [f"{name}: sfl={i['sfl']} maslov={i['maslov']} chern={i['chern']}"
                 for name, i in artifacts.integers.items()
                 if i["sfl"] != i["maslov"] or (i["chern"] is not None and i["chern"] != i["sfl"])]
        print("DISAGREEMENT:\n  " + "\n  ".join(diffs), file=sys.stderr)
        return EXIT_DISAGREE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
