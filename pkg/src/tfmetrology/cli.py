"""Command-line front end: ``tfmetro <subcommand> ...``.

Exit codes: 0 success, 1 tolerance failure, 2 configuration error,
3 numerical precondition failed.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import platform
import re
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy

from . import __version__
from .errors import ConfigInvalid, TFError, ToleranceFailure
from .hom import scan
from .metrology import classify, crb_demo, fi_analytic, fi_curvature, curvature_scan, qfi, scaling_demo
from .operators import Generator, evolve_rotation, evolve_translation
from .reproduce import TARGETS, run as run_target
from .states import Amplitude1D, Jsa2D, SeparablePmState, pair_from_dict, state_from_dict
from .wigner import PhaseSpaceGrid, WignerMap, mode_plane, pair_lattice, snap_to_lattice, wigner1d, wigner_pm

log = logging.getLogger("tfmetrology")


# ---------------------------------------------------------------- io helpers

def read_json(path: str | Path):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except FileNotFoundError:
        raise ConfigInvalid(f"no such file: {path}") from None
    except json.JSONDecodeError as exc:
        raise ConfigInvalid(f"{path}: invalid JSON ({exc})") from None


def _finite(doc):
    """Replace NaN and infinities by None so the output is strict JSON."""
    if isinstance(doc, float):
        return doc if np.isfinite(doc) else None
    if isinstance(doc, dict):
        return {k: _finite(v) for k, v in doc.items()}
    if isinstance(doc, (list, tuple)):
        return [_finite(v) for v in doc]
    return doc


def dumps(doc) -> str:
    return json.dumps(_finite(doc), indent=2, sort_keys=True, allow_nan=False) + "\n"


def write_text(path: str | Path | None, text: str):
    if path is None or str(path) == "-":
        sys.stdout.write(text)
        return
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def write_bytes(path: str | Path, data: bytes):
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    Path(path).write_bytes(data)


def sha256_file(path: str | Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def load_generator(args) -> Generator:
    if args.preset:
        return Generator.from_dict(args.preset)
    if args.generator:
        return Generator.from_dict(read_json(args.generator))
    raise ConfigInvalid("give --generator FILE or --preset NAME")


def load_state(path: str):
    return state_from_dict(read_json(path))


def require_pair(state) -> Jsa2D:
    if not isinstance(state, Jsa2D):
        raise ConfigInvalid("this command needs a biphoton state document")
    return state


def evolve_state(state, gen: Generator, kappa: float, n_modes: int = 128):
    if gen.kind == "translation":
        return evolve_translation(state, gen, kappa)
    return evolve_rotation(state, gen, kappa, n_modes=n_modes)


def state_csv(state) -> str:
    if isinstance(state, (Amplitude1D, Jsa2D)):
        return state.to_csv()
    raise ConfigInvalid(f"cannot export {type(state).__name__}")


def slug(name: str) -> str:
    return re.sub(r"[^A-Za-z0-9]+", "_", name.replace("+", "p").replace("-", "m")).strip("_")


# ---------------------------------------------------------------- subcommands

def cmd_state(args) -> int:
    write_text(args.out, state_csv(load_state(args.state)))
    return 0


def cmd_evolve(args) -> int:
    state = load_state(args.state)
    out = evolve_state(state, load_generator(args), args.kappa, args.n_modes)
    write_text(args.out, state_csv(out))
    return 0


def cmd_hom_scan(args) -> int:
    state = require_pair(load_state(args.state))
    result = scan(state, load_generator(args), (args.kmin, args.kmax), args.steps)
    write_text(args.out, result.to_csv())
    return 0


def cmd_qfi(args) -> int:
    state = load_state(args.state)
    gen = load_generator(args)
    write_text(args.out, dumps({"generator": gen.name, "qfi": qfi(state, gen)}))
    return 0


def cmd_fi(args) -> int:
    state = require_pair(load_state(args.state))
    gen = load_generator(args)
    doc = {"generator": gen.name, "method": args.method}
    if args.method == "analytic":
        doc["fi"] = fi_analytic(state, gen)
    else:
        doc["fi"] = fi_curvature(curvature_scan(state, gen))
    write_text(args.out, dumps(doc))
    return 0


def cmd_classify(args) -> int:
    state = require_pair(load_state(args.state))
    report = classify(state, load_generator(args), curvature=not args.no_curvature)
    write_text(args.out, dumps(report.to_dict()))
    return 0


def cmd_crb_demo(args) -> int:
    state = require_pair(load_state(args.state))
    report = crb_demo(state, load_generator(args), args.kappa, args.n_samples, args.seed, args.repetitions)
    write_text(args.out, dumps(report.to_dict()))
    return 0


def cmd_scaling_demo(args) -> int:
    coeffs = [float(c) for c in args.coefficients.split(",")]
    report = scaling_demo(coeffs, range(args.n_min, args.n_max + 1), args.signs)
    write_text(args.out, dumps(report.to_dict()))
    return 0


def wigner_map(doc: dict, plane: str, tau_max: float, n_tau: int, phi_stride: int) -> WignerMap:
    """Map of ``plane`` for the state in ``doc``.

    single: one-photon state. plus/minus: factor maps of a separable pair in
    canonical coordinates. mode1: slice through the centre of the other photon.
    """
    if plane == "single":
        amp = state_from_dict(doc)
        if not isinstance(amp, Amplitude1D):
            raise ConfigInvalid("plane 'single' needs a one-photon state")
        return wigner1d(amp, PhaseSpaceGrid.for_amplitude(amp, tau_max, n_tau, phi_stride=phi_stride))
    if doc.get("kind") != "biphoton":
        raise ConfigInvalid(f"plane {plane!r} needs a biphoton state")
    if plane in ("plus", "minus"):
        pair: SeparablePmState = pair_from_dict(doc)
        fp = PhaseSpaceGrid.for_amplitude(pair.f_plus, tau_max, n_tau, phi_stride=phi_stride)
        fm = PhaseSpaceGrid.for_amplitude(pair.g_minus, tau_max, n_tau, phi_stride=phi_stride)
        wp, wm = wigner_pm(pair, fp, fm)
        return wp if plane == "plus" else wm
    if plane == "mode1":
        jsa = state_from_dict({**doc, "basis": "modes"})
        lat = pair_lattice(jsa, 1)
        centre = snap_to_lattice(pair_lattice(jsa, 2), jsa.grid2.center)
        grid = PhaseSpaceGrid(np.linspace(-tau_max, tau_max, n_tau), lat[::phi_stride])
        return mode_plane(jsa, 1, grid, (0.0, centre))
    raise ConfigInvalid(f"unknown plane {plane!r}")


def cmd_wigner(args) -> int:
    wmap = wigner_map(read_json(args.state), args.plane, args.tau_max, args.n_tau, args.phi_stride)
    if args.binary:
        if args.out in (None, "-"):
            raise ConfigInvalid("--binary needs an --out file")
        write_bytes(args.out, wmap.to_bytes())
    else:
        write_text(args.out, wmap.to_csv())
    return 0


def cmd_reproduce(args) -> int:
    report = run_target(args.target)
    write_text(args.out, dumps(report.to_dict()))
    failed = report.failures()
    for c in failed:
        print(f"FAIL {report.target}: {c.name}: computed {c.computed} expected {c.expected} "
              f"rel_error {c.rel_error:.3e} (tol {c.tol:g})", file=sys.stderr)
    print(f"{report.target}: {len(report.cells) - len(failed)}/{len(report.cells)} cells pass", file=sys.stderr)
    return 1 if failed else 0


# ---------------------------------------------------------------- pipeline

_CONFIG_KEYS = {"state", "generators", "scan", "crb", "curvature", "checks", "output_dir", "seed"}
_SCAN_KEYS = {"kmin", "kmax", "steps"}
_CRB_KEYS = {"kappa", "n_samples", "repetitions"}
_CHECK_KEYS = {"generator", "min_fi_ratio"}


def _only(doc, allowed: set, where: str) -> dict:
    if not isinstance(doc, dict):
        raise ConfigInvalid(f"{where} must be an object")
    extra = set(doc) - allowed
    if extra:
        raise ConfigInvalid(f"unknown keys in {where}: {sorted(extra)}")
    return doc


@dataclass(frozen=True)
class RunConfig:
    """Validated pipeline configuration.

    Keys: state (biphoton document), generators (non-empty list of presets
    or generator documents), optional scan {kmin, kmax, steps}, crb
    {kappa, n_samples, repetitions}, seed, curvature (bool), checks
    [{generator, min_fi_ratio}], output_dir.
    """

    state: dict
    generators: tuple
    scan: dict | None = None
    crb: dict | None = None
    seed: int = 0
    curvature: bool = True
    checks: tuple = ()
    output_dir: str | None = None
    source: dict = field(default_factory=dict, compare=False)

    @classmethod
    def from_dict(cls, doc) -> RunConfig:
        _only(doc, _CONFIG_KEYS, "config")
        if "state" not in doc:
            raise ConfigInvalid("config needs a state")
        state = doc["state"]
        if not isinstance(state, dict) or state.get("kind") != "biphoton":
            raise ConfigInvalid("pipeline state must be a biphoton document")
        gens = doc.get("generators")
        if not isinstance(gens, list) or not gens:
            raise ConfigInvalid("config needs a non-empty generators list")
        generators = tuple(Generator.from_dict(g) for g in gens)
        names = [g.name for g in generators]
        if len(set(names)) != len(names):
            raise ConfigInvalid("duplicate generators")
        scan_doc = doc.get("scan")
        if scan_doc is not None:
            _only(scan_doc, _SCAN_KEYS, "scan")
            if set(scan_doc) != _SCAN_KEYS:
                raise ConfigInvalid("scan needs kmin, kmax and steps")
            if not isinstance(scan_doc["steps"], int) or scan_doc["steps"] < 3:
                raise ConfigInvalid("scan steps must be an integer >= 3")
        crb_doc = doc.get("crb")
        if crb_doc is not None:
            _only(crb_doc, _CRB_KEYS, "crb")
            if not {"kappa", "n_samples"} <= set(crb_doc):
                raise ConfigInvalid("crb needs kappa and n_samples")
        seed = doc.get("seed", 0)
        if isinstance(seed, bool) or not isinstance(seed, int) or seed < 0:
            raise ConfigInvalid("seed must be a non-negative integer")
        curvature = doc.get("curvature", True)
        if not isinstance(curvature, bool):
            raise ConfigInvalid("curvature must be true or false")
        checks = doc.get("checks", [])
        if not isinstance(checks, list):
            raise ConfigInvalid("checks must be a list")
        for c in checks:
            _only(c, _CHECK_KEYS, "check")
            if c.get("generator") not in names:
                raise ConfigInvalid(f"check refers to unknown generator {c.get('generator')!r}")
        out = doc.get("output_dir")
        if out is not None and not isinstance(out, str):
            raise ConfigInvalid("output_dir must be a string")
        # the state document is validated by building it once, up front
        pair_from_dict(state)
        return cls(state, generators, scan_doc, crb_doc, seed, curvature, tuple(checks), out, doc)

    def inputs_hash(self) -> str:
        canon = json.dumps(self.source, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canon.encode()).hexdigest()


def versions() -> dict:
    return {"tfmetrology": __version__, "numpy": np.__version__, "scipy": scipy.__version__,
            "python": platform.python_version()}


def cmd_pipeline(config: RunConfig, out_dir: str | Path) -> int:
    """Build, evolve, measure and report; returns the exit status."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    state = require_pair(state_from_dict(config.state))
    outputs = []
    reports = {}
    for gen in config.generators:
        key = slug(gen.name)
        if config.scan is not None:
            s = config.scan
            path = out / f"scan_{key}.csv"
            write_text(path, scan(state, gen, (s["kmin"], s["kmax"]), s["steps"]).to_csv())
            outputs.append(path)
        rep = classify(state, gen, curvature=config.curvature).to_dict()
        rep["fi_over_qfi"] = rep["fi_analytic"] / rep["qfi"] if rep["qfi"] > 0 else None
        if config.crb is not None:
            c = config.crb
            rep["crb"] = crb_demo(state, gen, c["kappa"], int(c["n_samples"]), config.seed,
                                  int(c.get("repetitions", 200))).to_dict()
        reports[gen.name] = rep
        log.info("%s: qfi %.6g fi %.6g", gen.name, rep["qfi"], rep["fi_analytic"])
    failures = []
    for c in config.checks:
        ratio = reports[c["generator"]]["fi_over_qfi"]
        ok = ratio is not None and ratio >= c["min_fi_ratio"]
        failures += [] if ok else [f"{c['generator']}: F/Q = {ratio} < {c['min_fi_ratio']}"]
    report_path = out / "report.json"
    write_text(report_path, dumps({"generators": reports, "checks_failed": failures,
                                   "pass": not failures}))
    outputs.append(report_path)
    manifest = {"inputs_sha256": config.inputs_hash(), "versions": versions(), "seeds": {"seed": config.seed},
                "outputs": {p.name: sha256_file(p) for p in outputs}}
    write_text(out / "manifest.json", dumps(manifest))
    if failures:
        raise ToleranceFailure("; ".join(failures))
    return 0


def cmd_pipeline_args(args) -> int:
    config = RunConfig.from_dict(read_json(args.config))
    out_dir = args.out_dir or config.output_dir
    if out_dir is None:
        raise ConfigInvalid("give --out-dir or output_dir in the config")
    return cmd_pipeline(config, out_dir)


# ---------------------------------------------------------------- parser

def _gen_args(p):
    g = p.add_mutually_exclusive_group()
    g.add_argument("--generator", metavar="FILE", help="generator JSON document")
    g.add_argument("--preset", metavar="NAME", help="named generator, e.g. omega1, R1-R2, R_plus")


def _out(p, what="output"):
    p.add_argument("--out", metavar="FILE", default=None, help=f"{what} path (default: stdout)")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="tfmetro", description="Time-frequency quantum metrology toolkit.")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    ap.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("state", help="sample a state document onto its grid (CSV)")
    p.add_argument("--state", required=True, metavar="FILE")
    _out(p, "CSV")
    p.set_defaults(func=cmd_state)

    p = sub.add_parser("evolve", help="apply exp(-i kappa H) and export the result (CSV)")
    p.add_argument("--state", required=True, metavar="FILE")
    _gen_args(p)
    p.add_argument("--kappa", type=float, required=True)
    p.add_argument("--n-modes", type=int, default=128, help="Hermite modes for rotations")
    _out(p, "CSV")
    p.set_defaults(func=cmd_evolve)

    p = sub.add_parser("hom-scan", help="coincidence probability versus kappa (CSV)")
    p.add_argument("--state", required=True, metavar="FILE")
    _gen_args(p)
    p.add_argument("--kmin", type=float, required=True)
    p.add_argument("--kmax", type=float, required=True)
    p.add_argument("--steps", type=int, default=401)
    _out(p, "CSV")
    p.set_defaults(func=cmd_hom_scan)

    p = sub.add_parser("qfi", help="quantum Fisher information 4 Var(H) (JSON)")
    p.add_argument("--state", required=True, metavar="FILE")
    _gen_args(p)
    _out(p, "JSON")
    p.set_defaults(func=cmd_qfi)

    p = sub.add_parser("fi", help="Fisher information of the HOM measurement at kappa = 0 (JSON)")
    p.add_argument("--state", required=True, metavar="FILE")
    _gen_args(p)
    p.add_argument("--method", choices=("analytic", "curvature"), default="analytic")
    _out(p, "JSON")
    p.set_defaults(func=cmd_fi)

    p = sub.add_parser("classify", help="QFI, FI and optimality verdict (JSON)")
    p.add_argument("--state", required=True, metavar="FILE")
    _gen_args(p)
    p.add_argument("--no-curvature", action="store_true", help="skip the curvature fit")
    _out(p, "JSON")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("crb-demo", help="Monte-Carlo estimator spread versus the Cramer-Rao bound (JSON)")
    p.add_argument("--state", required=True, metavar="FILE")
    _gen_args(p)
    p.add_argument("--kappa", type=float, required=True, help="true parameter value")
    p.add_argument("--n-samples", type=int, default=100_000)
    p.add_argument("--repetitions", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)
    _out(p, "JSON")
    p.set_defaults(func=cmd_crb_demo)

    p = sub.add_parser("scaling-demo", help="QFI of sum_i s_i R_i on n-fold branch states (JSON)")
    p.add_argument("--coefficients", default="0.7071067811865476,0.7071067811865476",
                   help="comma-separated branch amplitudes A_k")
    p.add_argument("--n-min", type=int, default=2)
    p.add_argument("--n-max", type=int, default=6)
    p.add_argument("--signs", choices=("plus", "alternating"), default="plus")
    _out(p, "JSON")
    p.set_defaults(func=cmd_scaling_demo)

    p = sub.add_parser("wigner", help="chronocyclic Wigner map (CSV or binary)")
    p.add_argument("--state", required=True, metavar="FILE")
    p.add_argument("--plane", choices=("single", "plus", "minus", "mode1"), default="single")
    p.add_argument("--tau-max", type=float, default=4.0)
    p.add_argument("--n-tau", type=int, default=201)
    p.add_argument("--phi-stride", type=int, default=1, help="keep every k-th half-lattice frequency")
    p.add_argument("--binary", action="store_true",
                   help="write b'TFWM', <u32 version, n_tau, n_phi>, tau, phi, values as <f8")
    _out(p, "map")
    p.set_defaults(func=cmd_wigner)

    p = sub.add_parser("reproduce", help="recompute a reference table and compare cell by cell (JSON)")
    p.add_argument("--target", required=True, choices=sorted(TARGETS))
    _out(p, "JSON report")
    p.set_defaults(func=cmd_reproduce)

    p = sub.add_parser("pipeline", help="run a full config: scans, reports and a manifest")
    p.add_argument("--config", required=True, metavar="FILE")
    p.add_argument("--out-dir", metavar="DIR", default=None)
    p.set_defaults(func=cmd_pipeline_args)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except TFError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
