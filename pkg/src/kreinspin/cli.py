"""Scenario-driven command line: spectral scans, EP location, and time
evolution with CSV outputs.

Scenario files are INI-style key/value sections (see `example_scenario`
for the schema); every CSV carries a header row, 17-significant-digit
scientific floats, and LF line endings so identical scenarios produce
byte-identical bodies.  Exit codes: 0 success, 2 configuration error,
3 numerical failure (singular metric or Jordan residual).
"""

from __future__ import annotations

import argparse
import configparser
import csv
import hashlib
import json
import sys as _sys
import time as _time
from dataclasses import dataclass, asdict, replace
from pathlib import Path
from typing import Optional

import numpy as np
from scipy.optimize import linear_sum_assignment

from .dynamics import build_propagator, evolve, survival_probability
from .metric import MetricContext, SingularMetricError, build_metric
from .observables import expectation, squeezing_report, uncertainty_check
from .spectral import (
    Classification,
    JordanResidualError,
    Tolerances,
    count_real_eigenvalues,
    eigensystem,
    jordan_chains,
    locate_exceptional_points,
)
from .spin_core import (
    DissipativeOAT,
    NVLipkin,
    build_hamiltonian,
    build_spin_system,
    coherent_spin_state,
)

__all__ = [
    "ConfigError",
    "Scenario",
    "RunRecord",
    "load_scenario",
    "run_scenario",
    "scan_real_count",
    "locate_eps",
    "spectrum_flow",
    "main",
    "example_scenario",
]

SCHEMA_VERSION = 1
SUPPORTED_OUTPUTS = ("survival", "spin_means", "squeezing", "spectrum", "norms")
_FLOAT_FMT = "{:.17e}"


class ConfigError(ValueError):
    """A scenario file failed validation; the message names the field."""


@dataclass(frozen=True)
class Scenario:
    """Declarative description of one evolution run."""

    name: str
    model: object  # DissipativeOAT | NVLipkin
    n_particles: int
    theta0: float
    phi0: float
    t_start: float
    t_end: float
    n_points: int
    metric_mode: str = "auto"
    ep_mode: str = "auto"
    outputs: tuple = SUPPORTED_OUTPUTS
    normalize: bool = True
    inner_product: str = "euclidean"
    schema_version: int = SCHEMA_VERSION

    def validate(self):
        if self.schema_version != SCHEMA_VERSION:
            raise ConfigError(
                f"scenario.schema_version: expected {SCHEMA_VERSION}, got {self.schema_version}"
            )
        if self.n_particles < 1:
            raise ConfigError(f"model.n_particles: must be >= 1, got {self.n_particles}")
        if self.n_points < 2:
            raise ConfigError(f"time.n_points: must be >= 2, got {self.n_points}")
        if not self.t_end > self.t_start:
            raise ConfigError("time.t_end: must exceed time.t_start")
        if self.metric_mode not in (
            "auto",
            "force-case-i",
            "force-case-ii",
            "force-case-iii",
            "force-case-iv",
        ):
            raise ConfigError(f"run.metric_mode: unknown value {self.metric_mode!r}")
        if self.ep_mode not in ("auto", "force-jordan", "force-diagonal"):
            raise ConfigError(f"run.ep_mode: unknown value {self.ep_mode!r}")
        if self.inner_product not in ("euclidean", "metric"):
            raise ConfigError(f"run.inner_product: unknown value {self.inner_product!r}")
        bad = [o for o in self.outputs if o not in SUPPORTED_OUTPUTS]
        if bad:
            raise ConfigError(
                f"run.outputs: unsupported entries {bad}; choose from {SUPPORTED_OUTPUTS}"
            )


@dataclass(frozen=True)
class RunRecord:
    """Provenance of one scenario run; written as run_record.json."""

    scenario_name: str
    scenario_hash: str
    tolerances: dict
    classification: str
    metric_case: str
    wall_time_s: float
    output_files: dict


def _get(cp, section, key, conv, what):
    try:
        raw = cp.get(section, key)
    except (configparser.NoSectionError, configparser.NoOptionError) as exc:
        raise ConfigError(f"missing {section}.{key}") from exc
    try:
        return conv(raw)
    except ValueError as exc:
        raise ConfigError(f"{section}.{key}: expected {what}, got {raw!r}") from exc


def _get_bool(cp, section, key, default):
    if not cp.has_option(section, key):
        return default
    raw = cp.get(section, key).strip().lower()
    if raw in ("1", "true", "yes", "on"):
        return True
    if raw in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"{section}.{key}: expected a boolean, got {raw!r}")


def load_scenario(path) -> Scenario:
    """Parse and validate a scenario file.

    Raises
    ------
    ConfigError
        Naming the offending section.key on any validation failure.
    """
    path = Path(path)
    cp = configparser.ConfigParser()
    try:
        read = cp.read(path)
    except configparser.Error as exc:
        raise ConfigError(f"cannot parse {path}: {exc}") from exc
    if not read:
        raise ConfigError(f"cannot read scenario file {path}")

    schema = _get(cp, "scenario", "schema_version", int, "an integer")
    name = cp.get("scenario", "name", fallback=path.stem)

    variant = _get(cp, "model", "variant", str, "a string").strip().lower()
    n_particles = _get(cp, "model", "n_particles", int, "an integer")
    if variant == "dissipative_oat":
        model = DissipativeOAT(
            omega=_get(cp, "model", "omega", float, "a float"),
            lam=_get(cp, "model", "lambda", float, "a float"),
            kappa=_get(cp, "model", "kappa", float, "a float"),
        )
    elif variant == "nv_lipkin":
        model = NVLipkin(
            epsilon=_get(cp, "model", "epsilon", float, "a float"),
            gamma=_get(cp, "model", "gamma", float, "a float"),
            chi=_get(cp, "model", "chi", float, "a float"),
            v=_get(cp, "model", "v", float, "a float"),
        )
    else:
        raise ConfigError(
            f"model.variant: expected dissipative_oat or nv_lipkin, got {variant!r}"
        )

    outputs_raw = cp.get("run", "outputs", fallback="")
    outputs = tuple(tok.strip() for tok in outputs_raw.split(",") if tok.strip())

    scenario = Scenario(
        name=name,
        model=model,
        n_particles=n_particles,
        theta0=_get(cp, "initial", "theta0", float, "a float"),
        phi0=_get(cp, "initial", "phi0", float, "a float"),
        t_start=_get(cp, "time", "t_start", float, "a float"),
        t_end=_get(cp, "time", "t_end", float, "a float"),
        n_points=_get(cp, "time", "n_points", int, "an integer"),
        metric_mode=cp.get("run", "metric_mode", fallback="auto").strip(),
        ep_mode=cp.get("run", "ep_mode", fallback="auto").strip(),
        outputs=outputs,
        normalize=_get_bool(cp, "run", "normalize", True),
        inner_product=cp.get("run", "inner_product", fallback="euclidean").strip(),
        schema_version=schema,
    )
    scenario.validate()
    return scenario


def example_scenario() -> str:
    """A documented scenario file covering the full schema."""
    return (
        "[scenario]\n"
        "schema_version = 1\n"
        "name = example\n"
        "\n"
        "[model]\n"
        "# variant: dissipative_oat (omega, lambda, kappa)\n"
        "#          nv_lipkin       (epsilon, gamma, chi, v; MHz)\n"
        "variant = dissipative_oat\n"
        "n_particles = 10\n"
        "omega = -5.0\n"
        "lambda = 1.0\n"
        "kappa = 1.5\n"
        "\n"
        "[initial]\n"
        "# coherent spin state angles, radians\n"
        "theta0 = 0.7853981633974483\n"
        "phi0 = 0.0\n"
        "\n"
        "[time]\n"
        "t_start = 0.0\n"
        "t_end = 10.0\n"
        "n_points = 201\n"
        "\n"
        "[run]\n"
        "# metric_mode: auto | force-case-i | force-case-ii | force-case-iii | force-case-iv\n"
        "metric_mode = auto\n"
        "# ep_mode: auto | force-jordan | force-diagonal\n"
        "ep_mode = auto\n"
        "normalize = true\n"
        "# inner_product: euclidean | metric (survival probability overlap)\n"
        "inner_product = euclidean\n"
        "outputs = survival, spin_means, squeezing, norms, spectrum\n"
    )


def _write_csv(path: Path, header, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow(
                [
                    _FLOAT_FMT.format(v) if isinstance(v, float) else v
                    for v in row
                ]
            )


def _file_hash(path) -> str:
    h = hashlib.sha256()
    h.update(Path(path).read_bytes())
    return h.hexdigest()


def run_scenario(
    scenario_path,
    out_dir,
    tol: Optional[Tolerances] = None,
    overrides: Optional[dict] = None,
) -> RunRecord:
    """Execute one scenario file and emit the requested CSV outputs.

    overrides (ep_mode / normalize / inner_product) take precedence over
    the file.  Returns the RunRecord, also written as
    <name>_run_record.json next to the data files.
    """
    t0 = _time.perf_counter()
    tol = tol or Tolerances()
    scenario = load_scenario(scenario_path)
    if overrides:
        scenario = replace(scenario, **{k: v for k, v in overrides.items() if v is not None})
        scenario.validate()
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    sys = build_spin_system(scenario.n_particles / 2.0)
    H = build_hamiltonian(sys, scenario.model)
    sd = eigensystem(H, tol)

    jd = None
    if scenario.ep_mode == "force-jordan" or (
        scenario.ep_mode == "auto" and sd.classification == Classification.DEFECTIVE
    ):
        jd = jordan_chains(H, sd, tol)
        prop = build_propagator(H, jd, tol)
    else:
        prop = build_propagator(H, sd, tol)

    op, ctx = build_metric(H, sd, tol=tol, mode=scenario.metric_mode, jd=jd)

    initial = coherent_spin_state(sys, scenario.theta0, scenario.phi0)
    times = np.linspace(scenario.t_start, scenario.t_end, scenario.n_points)
    result = evolve(initial, prop, times, ctx=ctx)

    files = {}
    if "survival" in scenario.outputs:
        p = survival_probability(
            initial,
            result,
            normalized=scenario.normalize,
            ctx=ctx if scenario.inner_product == "metric" else None,
        )
        path = out_dir / f"{scenario.name}_survival.csv"
        _write_csv(path, ["t", "p"], zip(times.tolist(), p.tolist()))
        files["survival"] = str(path)

    if "spin_means" in scenario.outputs:
        rows = []
        for i, t in enumerate(times):
            state = result.states_k[i]
            rows.append(
                [float(t)]
                + [
                    expectation(state, o, ctx, normalized=scenario.normalize)
                    for o in (sys.sx, sys.sy, sys.sz)
                ]
            )
        path = out_dir / f"{scenario.name}_spin_means.csv"
        _write_csv(path, ["t", "sx", "sy", "sz"], rows)
        files["spin_means"] = str(path)

    if "squeezing" in scenario.outputs:
        rows = []
        for i, t in enumerate(times):
            rep = squeezing_report(result.states_k[i], ctx, sys)
            rows.append(
                [
                    float(t),
                    rep.zeta2_x,
                    rep.zeta2_y,
                    rep.zeta2_x_db,
                    rep.zeta2_y_db,
                    rep.uncertainty_product,
                ]
            )
        path = out_dir / f"{scenario.name}_squeezing.csv"
        _write_csv(
            path,
            ["t", "zeta2_x", "zeta2_y", "zeta2_x_db", "zeta2_y_db", "uncertainty_product"],
            rows,
        )
        files["squeezing"] = str(path)

    if "norms" in scenario.outputs:
        euclid = np.einsum("ti,ti->t", result.states_k.conj(), result.states_k).real
        path = out_dir / f"{scenario.name}_norms.csv"
        _write_csv(
            path,
            ["t", "s_norm", "euclidean_norm2"],
            zip(times.tolist(), result.s_norms.tolist(), euclid.tolist()),
        )
        files["norms"] = str(path)

    if "spectrum" in scenario.outputs:
        path = out_dir / f"{scenario.name}_spectrum.csv"
        _write_csv(
            path,
            ["j", "re_e", "im_e"],
            [
                [int(j), float(w.real), float(w.imag)]
                for j, w in enumerate(sd.eigenvalues)
            ],
        )
        files["spectrum"] = str(path)

    record = RunRecord(
        scenario_name=scenario.name,
        scenario_hash=_file_hash(scenario_path),
        tolerances={
            "tau_real": tol.tau_real,
            "tau_pair": tol.tau_pair,
            "tau_defect": tol.tau_defect,
            "tau_jordan": tol.tau_jordan,
            "tau_cluster": tol.tau_cluster,
        },
        classification=sd.classification.value,
        metric_case=ctx.case_tag.value,
        wall_time_s=_time.perf_counter() - t0,
        output_files=files,
    )
    with open(out_dir / f"{scenario.name}_run_record.json", "w", encoding="utf-8") as fh:
        json.dump(asdict(record), fh, indent=2, sort_keys=True)
        fh.write("\n")
    return record


def scan_real_count(
    n_list,
    ratio_range,
    n_grid: int,
    out_dir,
    tol: Optional[Tolerances] = None,
) -> Path:
    """CSV of real-eigenvalue counts over a kappa/lambda grid per N."""
    tol = tol or Tolerances()
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    grid = np.linspace(ratio_range[0], ratio_range[1], n_grid)
    rows = []
    for n in n_list:
        counts = count_real_eigenvalues(n / 2.0, grid, tol)
        for ratio, cnt in zip(grid, counts):
            rows.append([int(n), float(ratio), int(cnt)])
    path = out_dir / "real_count.csv"
    _write_csv(path, ["n_particles", "kappa_over_lambda", "real_count"], rows)
    return path


def locate_eps(
    n_particles: int,
    ratio_range,
    out_dir,
    tol: Optional[Tolerances] = None,
) -> Path:
    """CSV of bisection-refined exceptional points in ratio_range."""
    tol = tol or Tolerances()
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    eps = locate_exceptional_points(n_particles / 2.0, ratio_range, tol)
    rows = [
        [
            float(ep.ratio),
            float(ep.eigenvalue.real),
            float(ep.eigenvalue.imag),
            int(ep.block_size),
        ]
        for ep in eps
    ]
    path = out_dir / "exceptional_points.csv"
    _write_csv(
        path,
        ["kappa_over_lambda", "eigenvalue_re", "eigenvalue_im", "block_size"],
        rows,
    )
    return path


def spectrum_flow(
    n_particles: int,
    ratio_range,
    n_grid: int,
    out_dir,
    tol: Optional[Tolerances] = None,
) -> Path:
    """CSV of eigenvalue tracks over a kappa/lambda grid.

    Tracks are continued across grid points by optimal nearest-neighbor
    assignment, ties broken by real part through the initial ordering.
    """
    tol = tol or Tolerances()
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    sys = build_spin_system(n_particles / 2.0)
    grid = np.linspace(ratio_range[0], ratio_range[1], n_grid)
    rows = []
    prev = None
    for ratio in grid:
        H = build_hamiltonian(sys, DissipativeOAT(omega=-5.0, lam=1.0, kappa=float(ratio)))
        w = np.linalg.eigvals(H)
        if prev is None:
            order = np.lexsort((w.imag, w.real))
            w = w[order]
        else:
            cost = np.abs(w[None, :] - prev[:, None])
            _, cols = linear_sum_assignment(cost)
            w = w[cols]
        prev = w
        for j, val in enumerate(w):
            rows.append([float(ratio), int(j), float(val.real), float(val.imag)])
    path = out_dir / "spectrum_flow.csv"
    _write_csv(path, ["kappa_over_lambda", "j", "re_e", "im_e"], rows)
    return path


# ---------------------------------------------------------------------------
# argparse front end
# ---------------------------------------------------------------------------


def _add_common(p: argparse.ArgumentParser):
    p.add_argument("--out", default=".", help="output directory")
    p.add_argument("--tol-real", type=float, default=None)
    p.add_argument("--tol-pair", type=float, default=None)
    p.add_argument("--tol-defect", type=float, default=None)
    p.add_argument("--tol-jordan", type=float, default=None)
    p.add_argument("--tol-cluster", type=float, default=None)
    p.add_argument(
        "--ep-mode", choices=["auto", "force-jordan", "force-diagonal"], default=None
    )
    p.add_argument(
        "--normalize",
        action=argparse.BooleanOptionalAction,
        default=None,
        help="divide observables / survival by the evolving norm",
    )
    p.add_argument(
        "--inner-product", choices=["euclidean", "metric"], default=None
    )


def _tol_from_args(args) -> Tolerances:
    base = Tolerances()
    kw = {}
    for field_name, arg_name in (
        ("tau_real", "tol_real"),
        ("tau_pair", "tol_pair"),
        ("tau_defect", "tol_defect"),
        ("tau_jordan", "tol_jordan"),
        ("tau_cluster", "tol_cluster"),
    ):
        v = getattr(args, arg_name)
        if v is not None:
            kw[field_name] = v
    return replace(base, **kw) if kw else base


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="kreinspin",
        description="Non-Hermitian collective-spin dynamics with Krein-space metrics",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute a scenario file")
    p_run.add_argument("scenario", help="path to the scenario file")
    _add_common(p_run)

    p_scan = sub.add_parser("scan-real-count", help="real-eigenvalue counts over a grid")
    p_scan.add_argument("--n-list", default="2,4,6,8,10,12", help="comma-separated N values")
    p_scan.add_argument("--ratio-min", type=float, default=0.0)
    p_scan.add_argument("--ratio-max", type=float, default=3.0)
    p_scan.add_argument("--n-grid", type=int, default=121)
    _add_common(p_scan)

    p_ep = sub.add_parser("locate-eps", help="bisection-refined exceptional points")
    p_ep.add_argument("--n", type=int, required=True, help="particle count N")
    p_ep.add_argument("--ratio-min", type=float, default=0.0)
    p_ep.add_argument("--ratio-max", type=float, default=0.5)
    _add_common(p_ep)

    p_flow = sub.add_parser("spectrum-flow", help="eigenvalue tracks vs kappa/lambda")
    p_flow.add_argument("--n", type=int, required=True, help="particle count N")
    p_flow.add_argument("--ratio-min", type=float, default=0.0)
    p_flow.add_argument("--ratio-max", type=float, default=0.5)
    p_flow.add_argument("--n-grid", type=int, default=201)
    _add_common(p_flow)

    p_ex = sub.add_parser("example-scenario", help="print a documented scenario file")

    args = parser.parse_args(argv)
    if args.command == "example-scenario":
        print(example_scenario(), end="")
        return 0

    tol = _tol_from_args(args)
    try:
        if args.command == "run":
            overrides = {
                "ep_mode": args.ep_mode,
                "normalize": args.normalize,
                "inner_product": args.inner_product,
            }
            record = run_scenario(args.scenario, args.out, tol, overrides)
            print(f"classification={record.classification} metric_case={record.metric_case}")
            for name, path in record.output_files.items():
                print(f"{name}: {path}")
        elif args.command == "scan-real-count":
            n_list = [int(tok) for tok in args.n_list.split(",") if tok.strip()]
            path = scan_real_count(
                n_list, (args.ratio_min, args.ratio_max), args.n_grid, args.out, tol
            )
            print(path)
        elif args.command == "locate-eps":
            path = locate_eps(args.n, (args.ratio_min, args.ratio_max), args.out, tol)
            print(path)
        elif args.command == "spectrum-flow":
            path = spectrum_flow(
                args.n, (args.ratio_min, args.ratio_max), args.n_grid, args.out, tol
            )
            print(path)
    except ConfigError as exc:
        print(f"config error: {exc}", file=_sys.stderr)
        return 2
    except (SingularMetricError, JordanResidualError) as exc:
        print(f"numerical failure: {exc}", file=_sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
