"""Scenario-driven batch runner.

Scenario files are flat JSON objects; results land as RFC-4180 CSV plus a
JSON provenance sidecar (scenario hash, seed, grid resolution, code version).
Exit codes: 0 success, 2 configuration error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import itertools
import json
import os
import sys
import tempfile
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import __version__
from .clocks import FreeClockState, rotator_init
from .errors import ConfigError, NumericalError, ScenarioParseError
from .frames import FrameSystem, build_chart, compose_transform, exchange_chain
from .packets import default_grid, expectation, make_gaussian
from .relkin import (
    ModeSuperposition,
    RelClockSystem,
    boosted_evolve,
    frame_to_frame,
    mc_variance_check,
    nonrel_limit_report,
    proper_time_stats,
    time_boost,
)

KINDS = ("jacobi-demo", "rotator-dilation", "freeclock-dilation",
         "entangled-clock", "frame-transform", "nonrel-limit")

_DEFAULTS = {"grid_points": 2048, "mc_samples": 0, "seed": 0, "histogram_bins": 720}


# --- scenario loading and validation ------------------------------------------

def load_scenario(path: str) -> dict:
    try:
        with open(path, encoding="utf-8") as f:
            raw = json.load(f)
    except json.JSONDecodeError as e:
        raise ScenarioParseError(e.msg, line=e.lineno, column=e.colno) from e
    except OSError as e:
        raise ScenarioParseError(f"cannot read scenario file: {e}") from e
    if not isinstance(raw, dict):
        raise ScenarioParseError("scenario file must contain a JSON object")
    sc = dict(raw)
    sc.setdefault("name", os.path.splitext(os.path.basename(path))[0])
    for key, value in _DEFAULTS.items():
        sc.setdefault(key, value)
    return sc


@dataclass(frozen=True)
class Diagnostic:
    field: str
    error: str
    message: str

    def __str__(self):
        return f"{self.field}: {self.error}: {self.message}"


class _Checker:
    """Collects one diagnostic per violated precondition, field by field."""

    def __init__(self, sc: dict):
        self.sc = sc
        self.diags: list[Diagnostic] = []

    def flag(self, field, error, message):
        self.diags.append(Diagnostic(field, error, message))

    def number(self, field, *, positive=False, nonzero=False, integer=False,
               minimum=None, maximum=None):
        v = self.sc.get(field)
        if v is None:
            self.flag(field, "ConfigError", "required field is missing")
            return None
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            self.flag(field, "ConfigError", f"expected a number, got {v!r}")
            return None
        if integer and int(v) != v:
            self.flag(field, "ConfigError", f"expected an integer, got {v!r}")
            return None
        if positive and v <= 0:
            self.flag(field, "NonPositiveWidth", "must be > 0")
            return None
        if nonzero and v == 0:
            self.flag(field, "ZeroMeanMomentum", "must be nonzero")
            return None
        if minimum is not None and v < minimum:
            self.flag(field, "ConfigError", f"must be >= {minimum}")
            return None
        if maximum is not None and v > maximum:
            self.flag(field, "ConfigError", f"must be <= {maximum}")
            return None
        return v

    def array(self, field, *, positive=False, nonnegative=False, min_len=1):
        v = self.sc.get(field)
        if v is None:
            self.flag(field, "ConfigError", "required field is missing")
            return None
        if not isinstance(v, list) or len(v) < min_len or not all(
                isinstance(x, (int, float)) and not isinstance(x, bool) for x in v):
            self.flag(field, "ConfigError",
                      f"expected a list of at least {min_len} numbers")
            return None
        if positive and any(x <= 0 for x in v):
            self.flag(field, "NonPositiveWidth", "all entries must be > 0")
            return None
        if nonnegative and any(x < 0 for x in v):
            self.flag(field, "ConfigError", "all entries must be >= 0")
            return None
        return v


def _check_packet(chk: _Checker):
    center = chk.number("packet_center")
    width = chk.number("packet_width", positive=True)
    lo, hi = chk.sc.get("grid_min"), chk.sc.get("grid_max")
    if center is not None and width is not None and lo is not None and hi is not None:
        if lo > center - 6 * width or hi < center + 6 * width:
            chk.flag("grid_min", "GridTooNarrow",
                     "explicit grid must cover packet_center +- 6 packet_width")
    return center, width


def _check_rotator(chk: _Checker, rest_mass):
    omega = chk.number("omega", positive=True)
    j_z = chk.number("j_z", integer=True, minimum=1)
    if rest_mass is not None and omega is not None and j_z is not None:
        if rest_mass - 2 * np.pi * omega * j_z <= 0:
            chk.flag("omega", "ConfigError",
                     "mass operator loses positivity: need 2*pi*omega*j_z < rest_mass")
    return omega, j_z


def validate_scenario(sc: dict) -> list[Diagnostic]:
    chk = _Checker(sc)
    kind = sc.get("kind")
    if kind not in KINDS:
        chk.flag("kind", "ConfigError", f"must be one of {', '.join(KINDS)}")
        return chk.diags
    chk.number("grid_points", integer=True, minimum=16)
    chk.number("mc_samples", integer=True, minimum=0)
    chk.number("seed", integer=True, minimum=0)

    if kind == "jacobi-demo":
        chk.array("masses", positive=True, min_len=2)
    elif kind == "rotator-dilation":
        rest = chk.number("rest_mass", positive=True)
        _check_packet(chk)
        _check_rotator(chk, rest)
        chk.array("tau_grid", nonnegative=True)
    elif kind == "freeclock-dilation":
        m_a = chk.number("m_a", positive=True)
        m_b = chk.number("m_b", positive=True)
        chk.number("p_bar", nonzero=True)
        chk.number("a_x", positive=True)
        _check_packet(chk)
        chk.array("tau_grid", nonnegative=True)
        del m_a, m_b  # rest mass is implied, nothing further to cross-check
    elif kind == "entangled-clock":
        rest = chk.number("rest_mass", positive=True)
        momenta = chk.array("mode_momenta")
        weights = chk.array("mode_weights", positive=True)
        if momenta is not None and len(set(momenta)) != len(momenta):
            chk.flag("mode_momenta", "ConfigError", "mode momenta must be distinct")
        if momenta is not None and weights is not None and len(momenta) != len(weights):
            chk.flag("mode_weights", "ConfigError",
                     "must have the same length as mode_momenta")
        _check_rotator(chk, rest)
        chk.number("tau0", minimum=0)
        chk.number("histogram_bins", integer=True, minimum=8)
    elif kind == "frame-transform":
        chk.number("m1", positive=True)
        chk.number("m2", positive=True)
        _check_packet(chk)
        chk.number("tau1")
        chk.number("tau2")
    elif kind == "nonrel-limit":
        chk.number("m1", positive=True)
        chk.number("m2", positive=True)
        betas = chk.array("betas", positive=True)
        if betas is not None and any(b > 0.1 for b in betas):
            chk.flag("betas", "ConfigError",
                     "nonrelativistic limit needs beta <= 0.1")
    return chk.diags


# --- result tables -------------------------------------------------------------

@dataclass(frozen=True)
class ResultTable:
    name: str
    columns: tuple[tuple[str, str], ...]  # (name, unit)
    rows: list[tuple]
    summary: dict


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return str(v)


def render_csv(table: ResultTable) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf)  # RFC-4180: minimal quoting, CRLF terminators
    writer.writerow([name for name, _ in table.columns])
    for row in table.rows:
        writer.writerow([_cell(v) for v in row])
    return buf.getvalue()


def scenario_hash(sc: dict) -> str:
    canon = json.dumps(sc, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()


def render_sidecar(sc: dict, table: ResultTable) -> str:
    prov = {
        "code_version": __version__,
        "columns": [{"name": n, "unit": u} for n, u in table.columns],
        "grid_points": sc["grid_points"],
        "kind": sc["kind"],
        "mc_samples": sc["mc_samples"],
        "name": table.name,
        "rows": len(table.rows),
        "scenario_hash": scenario_hash(sc),
        "seed": sc["seed"],
        "summary": table.summary,
    }
    return json.dumps(prov, sort_keys=True, indent=2) + "\n"


def _atomic_write(path: str, data: str) -> None:
    directory = os.path.dirname(path) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as f:
            f.write(data)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


# --- scenario runners ----------------------------------------------------------

def _run_jacobi_demo(sc: dict) -> ResultTable:
    system = FrameSystem.from_masses(sc["masses"])
    n = system.size
    rows = []
    for label in range(1, n + 1):
        chart = build_chart(system, label)
        pairing = float(np.max(np.abs(chart.pairing_matrix() - np.eye(n))))
        product = np.eye(n)
        for op in exchange_chain(system, label):
            product = op.matrix @ product
        chain_res = float(np.max(np.abs(
            product - compose_transform(system, 1, label).matrix)))
        for i, mu in enumerate(chart.reduced_masses):
            rows.append((label, i, float(mu), pairing, chain_res))
    columns = (("frame", "1"), ("coord", "1"), ("reduced_mass", "mass"),
               ("pairing_residual", "1"), ("chain_residual", "1"))
    worst = max(r[3] for r in rows)
    return ResultTable(sc["name"], columns, rows,
                       {"bodies": n, "worst_pairing_residual": worst})


def _dilation_system(sc: dict) -> RelClockSystem:
    packet = make_gaussian(
        default_grid(sc["packet_center"], sc["packet_width"], sc["grid_points"]),
        sc["packet_center"], sc["packet_width"],
        mass=sc["rest_mass"] if "rest_mass" in sc else sc["m_a"] + sc["m_b"])
    if sc["kind"] == "rotator-dilation":
        clock = rotator_init(int(sc["j_z"]), sc["omega"])
        return RelClockSystem(sc["rest_mass"], packet, clock)
    clock = FreeClockState(sc["m_a"], sc["m_b"], sc["p_bar"], sc["a_x"])
    return RelClockSystem(sc["m_a"] + sc["m_b"], packet, clock)


def _run_dilation(sc: dict) -> ResultTable:
    sys_ = _dilation_system(sc)
    n_mc = int(sc["mc_samples"])
    rows = []
    for i, tau0 in enumerate(sc["tau_grid"]):
        s = proper_time_stats(sys_, float(tau0))
        mc = (None,) * 4
        if n_mc > 0:
            chk = mc_variance_check(sys_, float(tau0), n_mc, int(sc["seed"]), stream=i)
            mc = (chk.mean, chk.variance, chk.stderr_mean, chk.stderr_variance)
        rows.append((float(tau0), s.tau_mean, s.d_tau, s.d_b, s.g2, s.d0, s.d_x) + mc)
    columns = (("tau0", "time"), ("tau_mean", "time"), ("d_tau", "time^2"),
               ("d_b", "1"), ("g2", "time"), ("d0", "time^2"), ("d_x", "time^2"),
               ("mc_mean", "time"), ("mc_variance", "time^2"),
               ("mc_stderr_mean", "time"), ("mc_stderr_variance", "time^2"))
    model = "rotator" if sc["kind"] == "rotator-dilation" else "freeclock"
    return ResultTable(sc["name"], columns, rows,
                       {"model": model, "alpha_i": sys_.alpha_i})


def _run_entangled(sc: dict) -> ResultTable:
    weights = np.asarray(sc["mode_weights"], dtype=float)
    coeffs = np.sqrt(weights / weights.sum())
    modes = ModeSuperposition(np.asarray(sc["mode_momenta"], dtype=float), coeffs)
    sys_ = RelClockSystem(sc["rest_mass"], modes, rotator_init(int(sc["j_z"]), sc["omega"]))
    tau0 = float(sc["tau0"])
    ent = boosted_evolve(sys_, tau0)
    bins = int(sc["histogram_bins"])
    thetas = (np.arange(bins) + 0.5) * 2 * np.pi / bins
    density = ent.hand_density(thetas)
    rows = [(float(t), float(d)) for t, d in zip(thetas, density)]
    predicted = np.sort(
        (2 * np.pi * sc["omega"] * time_boost(modes.points, sc["rest_mass"]) * tau0)
        % (2 * np.pi))
    return ResultTable(sc["name"], (("theta", "rad"), ("density", "1/rad")), rows,
                       {"predicted_peaks": [float(p) for p in predicted],
                        "tau0": tau0, "modes": len(coeffs)})


def _run_frame_transform(sc: dict) -> ResultTable:
    m1, m2 = sc["m1"], sc["m2"]
    packet = make_gaussian(
        default_grid(sc["packet_center"], sc["packet_width"], sc["grid_points"]),
        sc["packet_center"], sc["packet_width"], mass=m2)
    mapped = frame_to_frame(packet, m1, m2, sc["tau1"], sc["tau2"])
    back = frame_to_frame(mapped, m2, m1, sc["tau2"], sc["tau1"])
    b_12 = expectation(packet, lambda p: m2 / np.sqrt(m2 ** 2 + p ** 2)).real
    b_21 = expectation(mapped, lambda p: m1 / np.sqrt(m1 ** 2 + p ** 2)).real
    rows = [
        ("input_center", sc["packet_center"]),
        ("mapped_center", mapped.center),
        ("expected_center", -(m1 / m2) * sc["packet_center"]),
        ("mapped_width", mapped.width),
        ("mapped_norm", mapped.norm()),
        ("boost_mean_frame1", b_12),
        ("boost_mean_frame2", b_21),
        ("round_trip_error", float(np.max(np.abs(back.amplitudes - packet.amplitudes)))),
    ]
    return ResultTable(sc["name"], (("quantity", "label"), ("value", "mixed")), rows,
                       {"m1": m1, "m2": m2})


def _run_nonrel_limit(sc: dict) -> ResultTable:
    betas = sorted(sc["betas"], reverse=True)  # final row is the most converged
    report = nonrel_limit_report(sc["m1"], sc["m2"], betas, n=int(sc["grid_points"]))
    k_m = (sc["m1"] + sc["m2"]) / sc["m1"]
    rows = [(r.beta, r.h_ratio, r.x_ratio, k_m, 1.0 / k_m) for r in report]
    columns = (("beta", "1"), ("h_ratio", "1"), ("x_ratio", "1"),
               ("k_m", "1"), ("inv_k_m", "1"))
    return ResultTable(sc["name"], columns, rows, {"k_m": k_m})


_RUNNERS = {
    "jacobi-demo": _run_jacobi_demo,
    "rotator-dilation": _run_dilation,
    "freeclock-dilation": _run_dilation,
    "entangled-clock": _run_entangled,
    "frame-transform": _run_frame_transform,
    "nonrel-limit": _run_nonrel_limit,
}


def run_scenario(sc: dict) -> ResultTable:
    diags = validate_scenario(sc)
    if diags:
        raise ConfigError("; ".join(str(d) for d in diags))
    return _RUNNERS[sc["kind"]](sc)


def write_results(sc: dict, table: ResultTable, out_dir: str) -> str:
    os.makedirs(out_dir, exist_ok=True)
    csv_path = os.path.join(out_dir, f"{table.name}.csv")
    _atomic_write(csv_path, render_csv(table))
    _atomic_write(os.path.join(out_dir, f"{table.name}.provenance.json"),
                  render_sidecar(sc, table))
    return csv_path


# --- sweep expansion -----------------------------------------------------------

def expand_sweep(sc: dict) -> list[dict]:
    grid = sc.get("sweep")
    if not isinstance(grid, dict) or not grid:
        raise ConfigError("sweep scenarios need a nonempty 'sweep' object")
    for key, values in grid.items():
        if not isinstance(values, list) or not values:
            raise ConfigError(f"sweep.{key}: expected a nonempty list of values")
    base = {k: v for k, v in sc.items() if k != "sweep"}
    keys = sorted(grid)
    out = []
    for index, combo in enumerate(itertools.product(*(grid[k] for k in keys))):
        child = dict(base)
        child.update(dict(zip(keys, combo)))
        child["name"] = f"{base['name']}-{index:03d}"
        child["seed"] = int(base["seed"]) + index  # per-scenario RNG stream
        out.append(child)
    return out


def _worker_count(n_jobs: int) -> int:
    cap = os.environ.get("QRF_THREADS")
    workers = min(n_jobs, os.cpu_count() or 1)
    if cap:
        try:
            workers = min(workers, max(1, int(cap)))
        except ValueError:
            raise ConfigError(f"QRF_THREADS must be an integer, got {cap!r}") from None
    return max(1, workers)


def run_sweep(sc: dict, out_dir: str) -> list[str]:
    children = expand_sweep(sc)
    for child in children:
        diags = validate_scenario(child)
        if diags:
            raise ConfigError(f"{child['name']}: " + "; ".join(str(d) for d in diags))

    def job(child):
        return write_results(child, run_scenario(child), out_dir)

    with ThreadPoolExecutor(max_workers=_worker_count(len(children))) as pool:
        return list(pool.map(job, children))


# --- entry point ---------------------------------------------------------------

def _apply_overrides(sc: dict, args) -> dict:
    sc = dict(sc)
    for field in ("seed", "grid_points", "mc_samples"):
        value = getattr(args, field)
        if value is not None:
            sc[field] = value
    return sc


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qrfsim",
        description="Run quantum-reference-frame scenarios and emit CSV tables.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, text in (("run", "execute one scenario"),
                       ("validate", "check a scenario without executing it"),
                       ("sweep", "execute the cartesian expansion of a scenario")):
        p = sub.add_parser(name, help=text)
        p.add_argument("--scenario", required=True, help="path to a scenario JSON file")
        if name != "validate":
            p.add_argument("--out", default=".", help="output directory")
            p.add_argument("--seed", type=int, default=None)
            p.add_argument("--grid-points", type=int, default=None, dest="grid_points")
            p.add_argument("--mc-samples", type=int, default=None, dest="mc_samples")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        sc = load_scenario(args.scenario)
        if args.command == "validate":
            diags = validate_scenario(sc)
            for d in diags:
                print(d)
            if diags:
                return 2
            print("ok")
            return 0
        sc = _apply_overrides(sc, args)
        if args.command == "run":
            path = write_results(sc, run_scenario(sc), args.out)
            print(f"wrote {path}")
        else:
            for path in run_sweep(sc, args.out):
                print(f"wrote {path}")
        return 0
    except ScenarioParseError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except ConfigError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except NumericalError as e:
        print(f"numerical failure: {e}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
