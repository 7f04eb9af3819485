"""Command-line front end: interp, verify, diagnose and sweep subcommands.

Configuration can come from an INI-style file (``--config``), from
command-line flags, or from built-in defaults, with precedence
flag > file > default.  Unknown config keys or sections abort before any
computation.  All outputs except timing columns are byte-deterministic
given (config, seed), for any ``--threads`` value.

Exit codes: 0 success, 1 theorem/diagnostic violation, 2 usage/input error.
"""

from __future__ import annotations

import argparse
import configparser
import math
import statistics
import sys
from itertools import product
from pathlib import Path

import numpy as np

from .interp import (
    CoincidentPointsError,
    NumericallySingularError,
    PolynomialDegeneracyError,
    error_report,
    eval_interpolant,
    fit,
    fit_augmented,
    save_interpolant_json,
)
from .kernels import KernelParams
from .sampling import (
    Ball,
    Box,
    BoxShell,
    PointSet,
    Uniform,
    WeightedRejection,
    derive_seed,
    sample_points,
    unit_box,
)
from .serialize import dump_json, fmt17
from .svgplot import svg_line_plot
from .testfuncs import get_test_function
from .unisolvence import (
    DECOMPOSE_MAX_N,
    TrialConfig,
    argument_margin,
    branch_analyticity_check,
    laplace_quadratic_decompose,
    pick_direction,
    run_trials,
    with_last_maximal,
    write_summary_json,
    write_trials_csv,
    CASE_ONE_DIM,
    CASE_ORTHOGONAL,
    CaseViolationError,
    CLASS_VIOLATION,
)

EXIT_OK = 0
EXIT_VIOLATION = 1
EXIT_USAGE = 2


class UsageError(Exception):
    """Bad configuration or input; maps to exit code 2."""


def _parse_int_list(text):
    return tuple(int(tok) for tok in str(text).split(",") if tok.strip())


def _parse_float_list(text):
    return tuple(float(tok) for tok in str(text).split(",") if tok.strip())


def _parse_bool(text):
    if isinstance(text, bool):
        return text
    t = str(text).strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


# Per-section config schema: key -> (parser, default).  Defaults are the
# documented behavior when neither the config file nor a flag sets the key.
_SCHEMA = {
    "common": {
        "seed": (int, 42),
        "out": (str, "gmq_out"),
        "threads": (int, 1),
    },
    "interp": {
        "function": (str, "franke"),
        "data": (str, ""),
        "n": (_parse_int_list, (50,)),
        "dim": (int, 2),
        "epsilon": (float, 1.0),
        "k": (int, 1),
        "beta": (float, 1.5),
        "augmented": (_parse_bool, False),
        "grid_n": (int, 1024),
        "svg": (_parse_bool, False),
    },
    "verify": {
        "dim": (int, 2),
        "n": (int, 10),
        "trials": (int, 200),
        "epsilon": (float, 1.0),
        "k": (int, 2),
        "beta": (float, 1.5),
        "domain": (str, "box"),
        "density": (str, "uniform"),
        "rank_tol": (float, None),
        "theorem_mode": (_parse_bool, True),
    },
    "diagnose": {
        "k_list": (_parse_int_list, (1, 2, 3)),
        "d_list": (_parse_int_list, (1, 2, 3)),
        "n_list": (_parse_int_list, (2, 3, 4, 5, 6)),
        "geometries": (int, 100),
        "epsilon": (float, 1.0),
        "beta": (float, 1.5),
    },
    "sweep": {
        "dim": (int, 2),
        "n": (int, 10),
        "trials": (int, 200),
        "epsilon": (float, 1.0),
        "k": (int, 2),
        "beta": (float, 1.5),
        "sweep_n": (_parse_int_list, ()),
        "sweep_d": (_parse_int_list, ()),
        "sweep_epsilon": (_parse_float_list, ()),
        "sweep_k": (_parse_int_list, ()),
        "sweep_beta": (_parse_float_list, ()),
        "theorem_mode": (_parse_bool, True),
        "svg": (_parse_bool, False),
    },
}


def load_config_file(path) -> dict:
    """Parse an INI config, rejecting unknown sections and keys."""
    cp = configparser.ConfigParser()
    try:
        with open(path, "r", encoding="utf-8") as fh:
            cp.read_file(fh)
    except (OSError, configparser.Error) as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from exc
    out: dict = {}
    for section in cp.sections():
        if section not in _SCHEMA:
            raise UsageError(
                f"unknown config section [{section}] (known: {sorted(_SCHEMA)})"
            )
        out[section] = {}
        for key, raw in cp.items(section):
            if key not in _SCHEMA[section]:
                raise UsageError(
                    f"unknown key '{key}' in section [{section}] "
                    f"(known: {sorted(_SCHEMA[section])})"
                )
            if raw.strip() == "":
                continue
            parser, _ = _SCHEMA[section][key]
            try:
                out[section][key] = parser(raw)
            except ValueError as exc:
                raise UsageError(
                    f"bad value for {section}.{key}: {raw!r} ({exc})"
                ) from exc
    return out


def resolve(section: str, cli_values: dict, config: dict) -> dict:
    """Merge one section with precedence CLI flag > config file > default."""
    merged = {}
    for key, (_, default) in _SCHEMA[section].items():
        value = cli_values.get(key)
        if value is None:
            value = config.get(section, {}).get(key)
        if value is None:
            value = default
        merged[key] = value
    return merged


def _build_domain(kind: str, dim: int):
    if kind == "box":
        return unit_box(dim)
    if kind == "ball":
        return Ball((0.0,) * dim, 1.0)
    if kind == "shell":
        if dim < 2:
            raise UsageError("domain 'shell' needs dim >= 2")
        return BoxShell(unit_box(dim), Box((0.25,) * dim, (0.75,) * dim))
    raise UsageError(f"unknown domain kind {kind!r} (box|ball|shell)")


def _build_density(kind: str):
    if kind == "uniform":
        return Uniform()
    if kind == "ramp":
        # weight grows linearly along the first coordinate
        return WeightedRejection(weight=lambda pts: 0.1 + pts[:, 0], bound=1.2)
    if kind == "bump":
        return WeightedRejection(
            weight=lambda pts: np.exp(-4.0 * np.sum((pts - 0.5) ** 2, axis=1)),
            bound=1.0,
        )
    raise UsageError(f"unknown density kind {kind!r} (uniform|ramp|bump)")


def _load_data_csv(path):
    rows = []
    try:
        with open(path, "r", encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if not line or line.startswith("#"):
                    continue
                rows.append([float(tok) for tok in line.split(",")])
    except OSError as exc:
        raise UsageError(f"cannot read data file {path}: {exc}") from exc
    except ValueError as exc:
        raise UsageError(f"malformed data file {path}: {exc}") from exc
    if not rows or len(rows[0]) < 2:
        raise UsageError("data file needs rows of d coordinates plus one value")
    arr = np.array(rows, dtype=float)
    return arr[:, :-1], arr[:, -1]


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------


def cmd_interp(common: dict, cfg: dict) -> int:
    out = Path(common["out"])
    out.mkdir(parents=True, exist_ok=True)
    seed = common["seed"]
    params = KernelParams(cfg["epsilon"], cfg["k"], cfg["beta"])

    if cfg["data"]:
        points, values = _load_data_csv(cfg["data"])
        node_sets = [(points.shape[0], PointSet(points, seed=seed), values)]
        func = None
    else:
        func = get_test_function(cfg["function"])
        n_list = sorted(set(cfg["n"]))
        if not n_list or n_list[0] < 1:
            raise UsageError("n must list positive node counts")
        master = sample_points(
            unit_box(cfg["dim"]), Uniform(), max(n_list), derive_seed(seed, 0)
        )
        node_sets = []
        for n in n_list:
            ps = master.subset(n)
            node_sets.append((n, ps, np.asarray(func(ps.points), dtype=float)))

    grid = sample_points(
        unit_box(node_sets[0][1].dim), Uniform(), cfg["grid_n"], derive_seed(seed, 1)
    )

    rows = []
    last_ok = {}
    failures = []
    for n, ps, values in node_sets:
        for mode, fitter in (("plain", fit), ("augmented", fit_augmented)):
            if mode == "augmented" and not cfg["augmented"]:
                continue
            try:
                s = fitter(params, ps, values)
            except (CoincidentPointsError, PolynomialDegeneracyError):
                raise
            except NumericallySingularError as exc:
                f = exc.factorization
                print(
                    f"interp: n={n} {mode}: numerically singular "
                    f"(rank {f.rank}/{f.size}, cond {f.condition:.3e}, "
                    f"sigma_min {f.sigma_min:.3e})"
                )
                failures.append((n, mode))
                continue
            nodal = float(
                np.max(np.abs(eval_interpolant(s, ps.points) - values))
            )
            if func is not None:
                stats = error_report(s, func, grid)
                max_err, rms = stats.max_error, stats.rms_error
            else:
                max_err = rms = math.nan
            rows.append((n, mode, nodal, max_err, rms))
            last_ok[mode] = s

    errors_csv = out / "errors.csv"
    with open(errors_csv, "w", encoding="utf-8") as fh:
        fh.write("n,mode,nodal_residual,max_error,rms_error\n")
        for n, mode, nodal, max_err, rms in rows:
            fh.write(f"{n},{mode},{fmt17(nodal)},{fmt17(max_err)},{fmt17(rms)}\n")

    if "plain" in last_ok:
        save_interpolant_json(last_ok["plain"], out / "interpolant.json")
    if "augmented" in last_ok:
        save_interpolant_json(last_ok["augmented"], out / "interpolant_augmented.json")

    if cfg["svg"] and func is not None:
        plain_rows = [(n, rms) for n, mode, _, _, rms in rows if mode == "plain"]
        if plain_rows:
            svg_line_plot(
                out / "error_vs_n.svg",
                [n for n, _ in plain_rows],
                [rms for _, rms in plain_rows],
                title=f"RMS error vs n ({cfg['function']})",
                xlabel="n",
                ylabel="rms error",
                logy=True,
            )

    print(f"interp: wrote {errors_csv}")
    return EXIT_VIOLATION if failures else EXIT_OK


def _print_summary_table(summary: dict) -> None:
    echo = summary["config_echo"]
    print(
        f"verify: d={echo['dim']} n={echo['n']} eps={echo['epsilon']} "
        f"k={echo['k']} beta={echo['beta']} trials={summary['trials']}"
    )
    print(
        f"  full={summary['full']}  deficient={summary['deficient']}  "
        f"indeterminate={summary['indeterminate']}  degenerate={summary['degenerate']}"
    )


def _make_trial_config(cfg: dict, common: dict) -> TrialConfig:
    params = KernelParams(cfg["epsilon"], cfg["k"], cfg["beta"])
    domain = _build_domain(cfg.get("domain", "box"), cfg["dim"])
    density = _build_density(cfg.get("density", "uniform"))
    return TrialConfig(
        domain=domain,
        density=density,
        params=params,
        n=cfg["n"],
        trials=cfg["trials"],
        master_seed=common["seed"],
        rank_tolerance=cfg.get("rank_tol"),
        theorem_mode=cfg.get("theorem_mode", False),
    )


def cmd_verify(common: dict, cfg: dict) -> int:
    out = Path(common["out"])
    out.mkdir(parents=True, exist_ok=True)
    try:
        config = _make_trial_config(cfg, common)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    records, summary = run_trials(config, threads=common["threads"])
    write_trials_csv(records, config, out / "trials.csv")
    write_summary_json(summary, out / "summary.json")
    _print_summary_table(summary)
    print(f"verify: wrote {out / 'trials.csv'} and {out / 'summary.json'}")
    return EXIT_OK if summary["deficient"] == 0 else EXIT_VIOLATION


def cmd_diagnose(common: dict, cfg: dict) -> int:
    out = Path(common["out"])
    out.mkdir(parents=True, exist_ok=True)
    seed = common["seed"]
    bad_n = [n for n in cfg["n_list"] if not 2 <= n <= DECOMPOSE_MAX_N]
    if bad_n:
        raise UsageError(
            f"decomposition n values {bad_n} refused: the cofactor oracle "
            f"supports 2 <= n <= {DECOMPOSE_MAX_N}"
        )

    # battery 1: bordered-determinant quadratic identity
    worst_defect, identity_checks = _identity_battery(cfg, seed)

    # battery 2: branch case analyses
    case_report, violations = _case_batteries(cfg, seed)

    report = {
        "quadratic_identity": {
            "checks": identity_checks,
            "worst_relative_defect": worst_defect,
            "tolerance": 1e-9,
        },
        "cases": case_report,
        "violations": violations,
    }
    path = out / "diagnostics.json"
    dump_json(report, path)
    print(
        f"diagnose: worst quadratic defect {worst_defect:.3e} over "
        f"{identity_checks} checks; {violations} case violations; wrote {path}"
    )
    failed = worst_defect > 1e-9 or violations > 0
    return EXIT_VIOLATION if failed else EXIT_OK


def _identity_battery(cfg: dict, seed: int):
    from .kernels import gmq_eval

    eps, beta = cfg["epsilon"], cfg["beta"]
    worst = 0.0
    checks = 0
    stream = 10_000
    per_cell = max(1, cfg["geometries"] // 20)
    for n in cfg["n_list"]:
        for d in cfg["d_list"]:
            for k in cfg["k_list"]:
                params = KernelParams(eps, k, beta)
                for _ in range(per_cell):
                    stream += 1
                    nodes = sample_points(
                        unit_box(d), Uniform(), n, derive_seed(seed, stream)
                    )
                    stream += 1
                    xs = sample_points(
                        unit_box(d), Uniform(), 5, derive_seed(seed, stream)
                    )
                    for x in xs.points:
                        qd = laplace_quadratic_decompose(params, nodes, x)
                        phin = gmq_eval(
                            params, float(np.linalg.norm(x - nodes.points[-1]))
                        )
                        recon = qd.c2 * phin**2 + qd.ax * phin + qd.bx
                        defect = abs(qd.fx - recon) / max(1.0, abs(qd.fx))
                        worst = max(worst, defect)
                        checks += 1
    return worst, checks


def _case_batteries(cfg: dict, seed: int):
    eps, beta = cfg["epsilon"], cfg["beta"]
    geoms = cfg["geometries"]
    violations = 0
    report = {}
    stream = 50_000
    for k in cfg["k_list"]:
        params = KernelParams(eps, k, beta)
        for d in cfg["d_list"]:
            worst_margin = math.inf
            closed_defect = 0.0
            arg_low, arg_high = math.inf, -math.inf
            for _ in range(geoms):
                stream += 1
                nodes = sample_points(
                    unit_box(d), Uniform(), 6, derive_seed(seed, stream)
                )
                if d == 1:
                    nodes = with_last_maximal(nodes)
                    u = np.array([1.0])
                else:
                    stream += 1
                    u, _ = pick_direction(nodes, 0, derive_seed(seed, stream))
                rep = branch_analyticity_check(params, nodes, u)
                violations += sum(
                    1 for e in rep.entries if e.classification == CLASS_VIOLATION
                )
                worst_margin = min(worst_margin, rep.worst_margin)
                if rep.closed_form_defect is not None:
                    closed_defect = max(closed_defect, rep.closed_form_defect)
                if k >= 2:
                    last = nodes.points[-1]
                    for j in range(nodes.n - 1):
                        r = float(np.linalg.norm(last - nodes.points[j]))
                        case = CASE_ONE_DIM if d == 1 else CASE_ORTHOGONAL
                        try:
                            ang = argument_margin(params, r, case)
                        except CaseViolationError:
                            violations += 1
                            continue
                        arg_low = min(arg_low, ang)
                        arg_high = max(arg_high, ang)
            entry = {"worst_margin": worst_margin}
            if k == 1:
                entry["closed_form_defect"] = closed_defect
            else:
                entry["argument_range"] = [arg_low, arg_high]
                entry["argument_bound"] = math.pi / k
            report[f"k={k},d={d}"] = entry
    return report, violations


def cmd_sweep(common: dict, cfg: dict) -> int:
    out = Path(common["out"])
    out.mkdir(parents=True, exist_ok=True)
    axes = {
        "n": cfg["sweep_n"],
        "d": cfg["sweep_d"],
        "epsilon": cfg["sweep_epsilon"],
        "k": cfg["sweep_k"],
        "beta": cfg["sweep_beta"],
    }
    swept = {name: vals for name, vals in axes.items() if vals}
    if not swept:
        raise UsageError(
            "sweep needs at least one axis (sweep_n, sweep_d, sweep_epsilon, "
            "sweep_k, sweep_beta)"
        )
    names = list(swept)
    rows = []
    deficient_total = 0
    for combo in product(*(swept[name] for name in names)):
        point = dict(zip(names, combo))
        cell = {
            "dim": int(point.get("d", cfg["dim"])),
            "n": int(point.get("n", cfg["n"])),
            "trials": cfg["trials"],
            "epsilon": float(point.get("epsilon", cfg["epsilon"])),
            "k": int(point.get("k", cfg["k"])),
            "beta": float(point.get("beta", cfg["beta"])),
            "domain": "box",
            "density": "uniform",
            "rank_tol": None,
            "theorem_mode": cfg["theorem_mode"],
        }
        try:
            config = _make_trial_config(cell, common)
        except ValueError as exc:
            raise UsageError(str(exc)) from exc
        records, summary = run_trials(config, threads=common["threads"])
        sigma = statistics.median(r.sigma_min for r in records)
        conds = statistics.median(r.condition for r in records)
        deficient_total += summary["deficient"]
        rows.append(
            (
                cell["dim"],
                cell["n"],
                cell["epsilon"],
                cell["k"],
                cell["beta"],
                summary["trials"],
                summary["full"],
                summary["deficient"],
                summary["indeterminate"],
                sigma,
                conds,
            )
        )

    path = out / "sweep.csv"
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(
            "d,n,epsilon,k,beta,trials,full,deficient,indeterminate,"
            "median_sigma_min,median_cond\n"
        )
        for row in rows:
            d, n, e, k, b, t, fu, de, ind, sig, con = row
            fh.write(
                f"{d},{n},{fmt17(e)},{k},{fmt17(b)},{t},{fu},{de},{ind},"
                f"{fmt17(sig)},{fmt17(con)}\n"
            )
    print(f"sweep: wrote {path} ({len(rows)} grid points)")

    if cfg["svg"]:
        axis = names[0]
        # plot median cond against the first swept axis, other axes at their
        # first value
        firsts = {name: swept[name][0] for name in names[1:]}
        xs, ys = [], []
        for combo, row in zip(product(*(swept[name] for name in names)), rows):
            point = dict(zip(names, combo))
            if all(point[name] == firsts[name] for name in names[1:]):
                xs.append(point[axis])
                ys.append(row[-1])
        svg_line_plot(
            out / "sweep.svg",
            xs,
            ys,
            title=f"median condition vs {axis}",
            xlabel=axis,
            ylabel="median cond",
            logy=True,
        )
    return EXIT_VIOLATION if deficient_total else EXIT_OK


# ---------------------------------------------------------------------------
# Argument parsing
# ---------------------------------------------------------------------------


def _add_common(parser):
    parser.add_argument("--config", help="INI config file")
    parser.add_argument("--seed", type=int, help="master seed (default 42)")
    parser.add_argument("--out", help="output directory (default gmq_out)")
    parser.add_argument("--threads", type=int, help="worker threads (default 1)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gmq",
        description=(
            "Generalized MultiQuadric interpolation, Monte Carlo unisolvence "
            "verification, branch-point diagnostics and parameter sweeps."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("interp", help="fit and evaluate an interpolant")
    _add_common(p)
    p.add_argument("--function", help="built-in test function (franke|gauss|cosprod)")
    p.add_argument("--data", help="CSV data file: d coordinates then a value per row")
    p.add_argument("--n", type=_parse_int_list, help="node counts, e.g. 25,50,100")
    p.add_argument("--dim", type=int, help="dimension for built-in functions")
    p.add_argument("--epsilon", type=float)
    p.add_argument("--k", type=int)
    p.add_argument("--beta", type=float)
    p.add_argument("--augmented", action=argparse.BooleanOptionalAction, default=None)
    p.add_argument("--grid-n", dest="grid_n", type=int, help="error grid size")
    p.add_argument("--svg", action=argparse.BooleanOptionalAction, default=None)

    p = sub.add_parser("verify", help="Monte Carlo nonsingularity trials")
    _add_common(p)
    p.add_argument("--dim", type=int)
    p.add_argument("--n", type=int)
    p.add_argument("--trials", type=int)
    p.add_argument("--epsilon", type=float)
    p.add_argument("--k", type=int)
    p.add_argument("--beta", type=float)
    p.add_argument("--domain", choices=("box", "ball", "shell"))
    p.add_argument("--density", choices=("uniform", "ramp", "bump"))
    p.add_argument("--rank-tol", dest="rank_tol", type=float)
    p.add_argument(
        "--theorem-mode", dest="theorem_mode",
        action=argparse.BooleanOptionalAction, default=None,
    )

    p = sub.add_parser("diagnose", help="determinant split and branch-case batteries")
    _add_common(p)
    p.add_argument("--k-list", dest="k_list", type=_parse_int_list)
    p.add_argument("--d-list", dest="d_list", type=_parse_int_list)
    p.add_argument(
        "--n-list", dest="n_list", type=_parse_int_list,
        help=f"decomposition sizes, each in 2..{DECOMPOSE_MAX_N}",
    )
    p.add_argument("--n", dest="n_list", type=_parse_int_list, help=argparse.SUPPRESS)
    p.add_argument("--geometries", type=int)
    p.add_argument("--epsilon", type=float)
    p.add_argument("--beta", type=float)
    p.add_argument("--k", dest="k_list", type=_parse_int_list, help=argparse.SUPPRESS)

    p = sub.add_parser("sweep", help="Cartesian parameter sweep of verify runs")
    _add_common(p)
    p.add_argument("--dim", type=int)
    p.add_argument("--n", type=int)
    p.add_argument("--trials", type=int)
    p.add_argument("--epsilon", type=float)
    p.add_argument("--k", type=int)
    p.add_argument("--beta", type=float)
    p.add_argument("--sweep-n", dest="sweep_n", type=_parse_int_list)
    p.add_argument("--sweep-d", dest="sweep_d", type=_parse_int_list)
    p.add_argument("--sweep-epsilon", dest="sweep_epsilon", type=_parse_float_list)
    p.add_argument("--sweep-k", dest="sweep_k", type=_parse_int_list)
    p.add_argument("--sweep-beta", dest="sweep_beta", type=_parse_float_list)
    p.add_argument(
        "--theorem-mode", dest="theorem_mode",
        action=argparse.BooleanOptionalAction, default=None,
    )
    p.add_argument("--svg", action=argparse.BooleanOptionalAction, default=None)

    return parser


_COMMANDS = {
    "interp": cmd_interp,
    "verify": cmd_verify,
    "diagnose": cmd_diagnose,
    "sweep": cmd_sweep,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = load_config_file(args.config) if args.config else {}
        cli_values = {
            k: v for k, v in vars(args).items() if k not in ("command", "config")
        }
        common = resolve("common", cli_values, config)
        cfg = resolve(args.command, cli_values, config)
        code = _COMMANDS[args.command](common, cfg)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except CoincidentPointsError as exc:
        print(f"error: coincident points: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except PolynomialDegeneracyError as exc:
        print(f"error: polynomial degeneracy: {exc}", file=sys.stderr)
        return EXIT_VIOLATION
    return code


if __name__ == "__main__":
    sys.exit(main())
