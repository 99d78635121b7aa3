"""``floqlab`` command-line front end.

Every command reads a JSON run configuration (see :mod:`floqlab.config`),
evaluates the drive-amplitude sweep point by point, optionally in worker
processes, and writes CSV (or a JSON report) to ``--out`` or stdout.
Rows are assembled in grid order, so the output does not depend on the
number of workers.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from functools import partial
from itertools import combinations
from pathlib import Path

import numpy as np

from .config import RunConfig
from .dipole import dipole_elements
from .errors import (
    ConfigError,
    CutoffError,
    FloqlabError,
    InapplicableSymmetryError,
    ModelParseError,
    ModelValidationError,
    NyquistError,
    SolverError,
    SymmetryClassificationError,
)
from .floquet import FloquetSolution, floquet_solve, match_branches
from .response import susceptibility
from .symmetry import sit_check, symmetry_adapted, symmetry_report, verify_symmetry

log = logging.getLogger("floqlab")

EXIT_OK, EXIT_CONFIG, EXIT_SOLVER, EXIT_SYMMETRY = 0, 2, 3, 4
LOG10_FLOOR = -300.0

COMMANDS = ("quasienergies", "susceptibility", "dipoles", "symmetry-report", "dark-scan")


class StrictSymmetryError(FloqlabError):
    """A symmetry rule was inapplicable while running in strict mode."""


def fmt(x) -> str:
    """Fixed 12-significant-digit formatting with negative zero normalized."""
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    s = format(float(x), ".12g")
    return "0" if s == "-0" else s


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(v) for v in row])
    return buf.getvalue()


# -- per-point evaluation (runs in workers) ---------------------------------------


def _solve(cfg: RunConfig, f: float):
    """Model and Floquet solution at one drive amplitude, RS-adapted when possible."""
    bundle = cfg.bundle(f)
    try:
        sol = floquet_solve(bundle.hamiltonian, cfg.solver)
    except SolverError as exc:
        raise type(exc)(f"f = {f:.12g} omega: {exc}") from None
    for s in bundle.symmetries:
        if s.kind == "RS" and verify_symmetry(bundle.hamiltonian, s)[0]:
            try:
                sol = symmetry_adapted(sol, s)[0]
            except SymmetryClassificationError:
                pass
            break
    return bundle, sol


def _point(cfg: RunConfig, what: str, f: float) -> dict:
    bundle, sol = _solve(cfg, f)
    out = {"eps": sol.quasienergies, "u0": sol.initial_modes}
    if what == "quasienergies":
        return out
    ds = dipole_elements(sol, bundle.probe, cfg.harmonics)
    if what in ("dipoles", "dark_scan"):
        out["elements"] = np.asarray(ds.elements)
        out["max_abs"] = ds.max_abs
        return out
    if what == "susceptibility":
        pops = cfg.populations.populations(sol)
        grid = cfg.probe.values() * cfg.omega
        out["chi"] = np.stack(
            [susceptibility(ds, sol, pops, cfg.response, b, grid).chi for b in cfg.response.bands]
        )
        return out
    if what == "symmetry_report":
        out["report"] = _report(bundle, sol, ds, cfg.n_range)
        return out
    raise ValueError(what)


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, set):
        return sorted(_jsonable(v) for v in x)
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (float, np.floating)):
        return float(fmt(x))
    return x


def _report(bundle, sol, ds, n_range) -> dict:
    entries = []
    for s in bundle.symmetries:
        r = symmetry_report(bundle.hamiltonian, bundle.probe, s, sol, ds, n_range)
        ratios = list(r.validation.values())
        entries.append({
            "kind": s.kind,
            "t_shift_over_tau": s.t_shift_over_tau,
            "n_fold": s.n_fold,
            "alpha_v": s.alpha_v,
            "verified": r.verified,
            "max_residual": r.max_residual,
            "state_labels": r.state_labels,
            "predicted_dark": [list(t) for t in r.predicted_dark],
            "predicted_vanishing_bands": r.predicted_vanishing_bands,
            "validation": {
                "ratios": ratios,
                "max_ratio": max(ratios) if ratios else 0.0,
                "all_dark": bool(all(v < 1e-8 for v in ratios)),
            },
            "notes": r.notes,
        })
    phs = [
        s for s in bundle.symmetries
        if s.kind == "PHS" and verify_symmetry(bundle.hamiltonian, s)[0]
    ]
    sit = []
    for (i1, s1), (i2, s2) in combinations(enumerate(phs), 2):
        item = {"pair": [i1, i2]}
        try:
            rep = sit_check(s1, s2, sol, ds, n_range)
        except InapplicableSymmetryError as exc:
            item.update(applicable=False, reasons=exc.reasons)
        else:
            bands = sorted({n for (n, m), ok in rep.cancellation.items() if ok})
            item.update(
                applicable=True,
                states=list(rep.pair),
                relation_residual=rep.relation_residual,
                relation_holds=rep.relation_holds,
                cancelling_m=sorted({m for (n, m), ok in rep.cancellation.items() if ok}),
                all_bands_suppressed=bool(all(rep.cancellation.values())),
                bands=bands,
            )
        sit.append(item)
    return _jsonable({"symmetries": entries, "transparency": sit})


# -- sweep driver -----------------------------------------------------------------


def _evaluate(cfg: RunConfig, what: str, workers: int) -> tuple[np.ndarray, list[dict]]:
    fs = cfg.drive_values()
    job = partial(_point, cfg, what)
    if workers > 1 and len(fs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(job, fs, chunksize=max(1, len(fs) // (4 * workers))))
    else:
        results = []
        for i, f in enumerate(fs):
            results.append(job(f))
            log.info("point %d/%d done (f = %s)", i + 1, len(fs), fmt(f))
    return fs, results


def _track(results, omega) -> list[np.ndarray]:
    """Branch permutations along the sweep, anchored at the first point's ordering."""
    perms, prev = [], None
    for r in results:
        d = len(r["eps"])
        light = FloquetSolution(r["eps"], r["u0"][None], np.eye(d), omega)
        if prev is None:
            perm = np.arange(d)
        else:
            match = match_branches(prev, light)
            perm = match.permutation
            if match.discontinuous:
                log.warning("branch tracking discontinuous at a sweep point")
        prev = light.reorder(perm)
        perms.append(perm)
    return perms


def cmd_quasienergies(cfg: RunConfig, workers: int = 1) -> str:
    fs, results = _evaluate(cfg, "quasienergies", workers)
    rows = []
    for f, r, perm in zip(fs, results, _track(results, cfg.omega)):
        for branch, mu in enumerate(perm):
            rows.append((f, branch, r["eps"][mu] / cfg.omega))
    return _csv(("f_over_omega", "branch", "eps_over_omega"), rows)


def cmd_susceptibility(cfg: RunConfig, workers: int = 1) -> str:
    fs, results = _evaluate(cfg, "susceptibility", workers)
    grid = cfg.probe.values()
    rows = []
    for f, r in zip(fs, results):
        for j, wp in enumerate(grid):
            for b, band in enumerate(cfg.response.bands):
                c = r["chi"][b, j]
                a = abs(c)
                lg = math.log10(a) if a > 0 else LOG10_FLOOR
                rows.append((f, wp, band, c.real, c.imag, a, max(lg, LOG10_FLOOR)))
    header = ("f_over_omega", "omega_p_over_omega", "band", "re_chi", "im_chi", "abs_chi",
              "log10_abs_chi")
    return _csv(header, rows)


def _tracked_elements(cfg, what, workers):
    fs, results = _evaluate(cfg, what, workers)
    nr = cfg.n_range
    orders = np.arange(-nr, nr + 1)
    out = []
    for f, r, perm in zip(fs, results, _track(results, cfg.omega)):
        el = r["elements"][:, perm][:, :, perm]
        out.append((f, el[orders + cfg.harmonics], r["max_abs"]))
    return orders, out


def cmd_dipoles(cfg: RunConfig, workers: int = 1) -> str:
    orders, data = _tracked_elements(cfg, "dipoles", workers)
    rows = []
    for f, el, _ in data:
        d = el.shape[1]
        for mu in range(d):
            for nu in range(d):
                for k, n in enumerate(orders):
                    v = el[k, mu, nu]
                    rows.append((f, mu, nu, n, v.real, v.imag, abs(v)))
    return _csv(("f_over_omega", "mu", "nu", "n", "re_v", "im_v", "abs_v"), rows)


def cmd_dark_scan(cfg: RunConfig, workers: int = 1) -> str:
    orders, data = _tracked_elements(cfg, "dark_scan", workers)
    rows = []
    for f, el, vmax in data:
        d = el.shape[1]
        scale = vmax if vmax > 0 else 1.0
        for mu in range(d):
            for nu in range(d):
                for k, n in enumerate(orders):
                    rows.append((f, mu, nu, n, abs(el[k, mu, nu]) / scale))
    return _csv(("f_over_omega", "mu", "nu", "n", "abs_v_over_max"), rows)


def _inapplicable(point: dict) -> list[str]:
    problems = []
    for s in point["symmetries"]:
        for key in ("dark_rule_inapplicable", "pairing_error", "classification_error"):
            if key in s["notes"]:
                problems.append(f"{s['kind']}: {s['notes'][key]}")
    for t in point["transparency"]:
        if not t["applicable"]:
            problems.append(f"transparency {t['pair']}: {t['reasons']}")
    return problems


def cmd_symmetry_report(cfg: RunConfig, workers: int = 1, strict: bool = False) -> str:
    fs, results = _evaluate(cfg, "symmetry_report", workers)
    points = [{"f_over_omega": float(fmt(f)), **r["report"]} for f, r in zip(fs, results)]
    if strict:
        problems = [p for point in points for p in _inapplicable(point)]
        if problems:
            raise StrictSymmetryError("; ".join(str(p) for p in problems))
    doc = {"model": cfg.model, "points": points}
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def run_command(name: str, cfg: RunConfig, workers: int = 1, strict: bool = False) -> str:
    if name == "quasienergies":
        return cmd_quasienergies(cfg, workers)
    if name == "susceptibility":
        return cmd_susceptibility(cfg, workers)
    if name == "dipoles":
        return cmd_dipoles(cfg, workers)
    if name == "dark-scan":
        return cmd_dark_scan(cfg, workers)
    if name == "symmetry-report":
        return cmd_symmetry_report(cfg, workers, strict)
    raise ValueError(f"unknown command {name!r}")


# -- entry point ------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="floqlab",
        description="Floquet spectroscopy sweeps: quasienergies, susceptibilities, "
                    "dipole elements, dark-state scans and symmetry reports.",
    )
    p.add_argument("command", choices=COMMANDS + ("run",),
                   help="artifact to compute; 'run' writes every artifact listed in "
                        "the config's outputs into the --out directory")
    p.add_argument("--config", required=True, help="JSON run configuration")
    p.add_argument("--out", help="output file (directory for 'run'); default stdout")
    p.add_argument("--workers", type=int, default=1, help="worker processes (default 1)")
    p.add_argument("--seed", help="accepted for interface compatibility; unused")
    p.add_argument("--strict", action="store_true",
                   help="treat inapplicable symmetry rules as errors (exit code 4)")
    p.add_argument("-v", "--verbose", action="store_true", help="progress on stderr")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s", stream=sys.stderr)
    try:
        if args.workers < 1:
            raise ConfigError("--workers must be at least 1")
        cfg = RunConfig.load(args.config)
        if args.command == "run":
            if not args.out:
                raise ConfigError("'run' needs --out pointing to a directory")
            outdir = Path(args.out)
            outdir.mkdir(parents=True, exist_ok=True)
            for name in cfg.outputs:
                cmd = name.replace("_", "-")
                ext = "json" if cmd == "symmetry-report" else "csv"
                text = run_command(cmd, cfg, args.workers, args.strict)
                (outdir / f"{name}.{ext}").write_text(text)
            return EXIT_OK
        text = run_command(args.command, cfg, args.workers, args.strict)
    except (ConfigError, ModelParseError, ModelValidationError, CutoffError, NyquistError) as exc:
        print(f"floqlab: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SolverError as exc:
        print(f"floqlab: solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except StrictSymmetryError as exc:
        print(f"floqlab: symmetry rule inapplicable: {exc}", file=sys.stderr)
        return EXIT_SYMMETRY
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
