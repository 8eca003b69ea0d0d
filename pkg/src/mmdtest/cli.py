"""Command-line surface: tests, tuning, simulations, and oracle checks.

Every run emits a machine-readable payload carrying the resolved seed, the
library version, and a hash of the resolved configuration; rerunning with
the same seed and config reproduces the numeric payload byte for byte.
Exit codes: 0 success, 1 usage error, 2 data error, 3 failed check.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .asymptotics import (
    SpectralModel,
    alt_limit,
    estimate_null_eigenvalues,
    group_ratios,
    sample_null_limit,
)
from .checks import run_oracle_checks
from .errors import MMDTestError, ParameterError, ShapeError
from .estimators import gap_bound, mmd_unbiased, mmd_ustat
from .io import config_hash, read_matrix_csv, write_matrix_csv
from .kernels import FAMILIES, KernelSpec, gram_blocks, gram_matrix
from .permtest import RejectionCurveConfig, permutation_test, rejection_rate
from .samples import SampleSet
from .simulate import (
    ks_to_normal,
    laplace_sampler,
    normal_sampler,
    qq_pairs,
    replicate_mmd,
)
from .tuner import TuneConfig, split_samples, tune
from .variance import plugin_zetas, sigma_hat

ENV_PREFIX = "MMDTEST_"


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(f"{self.format_usage()}{self.prog}: error: {message}")


def _int_list(text: str) -> tuple[int, ...]:
    try:
        values = tuple(int(part) for part in text.split(",") if part != "")
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")
    if not values:
        raise argparse.ArgumentTypeError("list must be nonempty")
    return values


def _float_list(text: str) -> tuple[float, ...]:
    try:
        values = tuple(float(part) for part in text.split(",") if part != "")
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")
    if not values:
        raise argparse.ArgumentTypeError("list must be nonempty")
    return values


def _resolve(value, env_name: str, fallback, cast):
    """Flag beats environment beats built-in default."""
    if value is not None:
        return value
    raw = os.environ.get(ENV_PREFIX + env_name)
    if raw is not None:
        try:
            return cast(raw)
        except (TypeError, ValueError):
            raise ParameterError(f"invalid {ENV_PREFIX}{env_name}={raw!r}") from None
    return fallback


def _add_common(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--seed", type=int, default=None, help="RNG seed (env MMDTEST_SEED)")
    sub.add_argument("--threads", type=int, default=None, help="worker threads (env MMDTEST_THREADS)")
    sub.add_argument("--out", default=None, help="output path (env MMDTEST_OUT); default stdout")
    sub.add_argument(
        "--format", choices=("json", "csv"), default=None, help="output format (env MMDTEST_FORMAT)"
    )


def _add_kernel_flags(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--kernel", choices=FAMILIES, default="gaussian")
    sub.add_argument("--lengthscale", type=float, default=None)


def _kernel_from_args(args) -> KernelSpec:
    if args.kernel == "gaussian":
        ls = 1.0 if args.lengthscale is None else args.lengthscale
        return KernelSpec("gaussian", {"lengthscale": ls})
    if args.lengthscale is not None:
        raise ParameterError(f"--lengthscale is meaningless for the {args.kernel} kernel")
    return KernelSpec(args.kernel)


def _common(args) -> dict:
    return {
        "seed": _resolve(args.seed, "SEED", 0, int),
        "threads": max(1, _resolve(args.threads, "THREADS", 1, int)),
        "out": _resolve(args.out, "OUT", None, str),
        "format": _resolve(args.format, "FORMAT", "json", str),
    }


def _sub_seed(seed: int, tag: int) -> int:
    # Independent integer seed per purpose so streams never collide.
    return int(np.random.SeedSequence([seed, tag]).generate_state(1)[0])


def _emit(command: str, common: dict, config: dict, result: dict, rows) -> int:
    payload = {
        "command": command,
        "version": __version__,
        "seed": common["seed"],
        "config": config,
        "config_hash": config_hash({"command": command, "seed": common["seed"], **config}),
        "result": result,
    }
    out = common["out"]
    if common["format"] == "json":
        text = json.dumps(payload, indent=2) + "\n"
        if out is None:
            sys.stdout.write(text)
        else:
            Path(out).write_text(text, encoding="utf-8")
        return 0
    matrix = np.array(rows, dtype=float)
    if out is None:
        for row in matrix:
            sys.stdout.write(",".join(repr(float(v)) for v in row) + "\n")
    else:
        write_matrix_csv(out, matrix)
        meta = {k: v for k, v in payload.items() if k != "result"}
        Path(out + ".meta.json").write_text(json.dumps(meta, indent=2) + "\n", encoding="utf-8")
    return 0


def _load_samples(x_file: str, y_file: str) -> SampleSet:
    x = read_matrix_csv(x_file)
    y = read_matrix_csv(y_file)
    if x.shape[1] != y.shape[1]:
        raise ShapeError(
            f"{x_file} has {x.shape[1]} columns but {y_file} has {y.shape[1]}"
        )
    return SampleSet(x, y)


def cmd_test(args) -> int:
    common = _common(args)
    permutations = _resolve(args.permutations, "PERMUTATIONS", 200, int)
    samples = _load_samples(args.x_file, args.y_file)
    spec = _kernel_from_args(args)
    result = permutation_test(
        samples,
        spec,
        alpha=args.alpha,
        permutations=permutations,
        seed=common["seed"],
        threads=common["threads"],
    )
    config = {
        "kernel": spec.to_dict(),
        "alpha": args.alpha,
        "permutations": permutations,
        "nx": samples.nx,
        "ny": samples.ny,
    }
    row = [
        result.statistic,
        result.p_value,
        result.threshold,
        float(result.reject),
        result.alpha,
        float(result.num_permutations),
        float(result.seed),
        float(result.nx),
        float(result.ny),
    ]
    return _emit("test", common, config, result.to_dict(), [row])


def cmd_variance(args) -> int:
    common = _common(args)
    samples = _load_samples(args.x_file, args.y_file)
    spec = _kernel_from_args(args)
    blocks = gram_blocks(spec, samples)
    unbiased = mmd_unbiased(blocks).value
    zx, zy = plugin_zetas(blocks)
    sh = sigma_hat(zx, zy, samples.nx, samples.ny)
    result = {
        "mmd_unbiased": unbiased,
        "zeta_hat_x": zx,
        "zeta_hat_y": zy,
        "sigma_hat": sh,
        "nx": samples.nx,
        "ny": samples.ny,
    }
    row = [unbiased, zx, zy, sh]
    if samples.nx == samples.ny:
        result["mmd_ustat"] = mmd_ustat(blocks).value
        row.append(result["mmd_ustat"])
        if math.isfinite(spec.sup_value()):
            result["gap_bound"] = gap_bound(spec.sup_value(), samples.nx, args.delta)
            row.append(result["gap_bound"])
    config = {"kernel": spec.to_dict(), "delta": args.delta, "nx": samples.nx, "ny": samples.ny}
    return _emit("variance", common, config, result, [row])


def cmd_power_sim(args) -> int:
    common = _common(args)
    permutations = _resolve(args.permutations, "PERMUTATIONS", 200, int)
    reps = _resolve(args.reps, "REPS", 2000, int)
    spec = _kernel_from_args(args)
    if args.null:
        sample_q = normal_sampler(0.0, 1.0)
    else:
        if args.q_std <= 0:
            raise ParameterError(f"--q-std must be positive, got {args.q_std}")
        sample_q = normal_sampler(args.q_mean, args.q_std)
    curve_config = RejectionCurveConfig(
        sample_p=normal_sampler(0.0, 1.0),
        sample_q=sample_q,
        kernel=spec,
        nx_grid=args.nx_grid,
        ny=args.ny,
        alpha=args.alpha,
        permutations=permutations,
        reps=reps,
        seed=common["seed"],
        threads=common["threads"],
    )
    curve = rejection_rate(curve_config)
    config = {
        "kernel": spec.to_dict(),
        "null": args.null,
        "q_mean": args.q_mean,
        "q_std": args.q_std,
        "nx_grid": list(args.nx_grid),
        "ny": args.ny,
        "alpha": args.alpha,
        "permutations": permutations,
        "reps": reps,
    }
    result = {"curve": [p.to_dict() for p in curve]}
    rows = [[float(p.nx), p.rate, p.stderr] for p in curve]
    return _emit("power-sim", common, config, result, rows)


def _hist(values: np.ndarray, bins: int) -> dict:
    counts, edges = np.histogram(values, bins=bins)
    return {"edges": edges.tolist(), "counts": counts.tolist()}


def _hist_rows(code: float, values: np.ndarray, bins: int) -> list:
    counts, edges = np.histogram(values, bins=bins)
    centers = 0.5 * (edges[:-1] + edges[1:])
    return [[code, float(c), float(n)] for c, n in zip(centers, counts)]


def cmd_null_dist(args) -> int:
    common = _common(args)
    reps = _resolve(args.reps, "REPS", 500, int)
    if args.draws < 1:
        raise ParameterError(f"--draws must be >= 1, got {args.draws}")
    spec = _kernel_from_args(args)
    nx = args.nx
    ny = nx // 2 if args.regime == "prop" else math.ceil(5.0 * math.sqrt(nx))
    if min(nx, ny) < 2:
        raise ParameterError(f"regime {args.regime} gives ny={ny}; need nx large enough for ny >= 2")
    n_min = min(nx, ny)
    seed = common["seed"]
    sample_p = laplace_sampler(0.0, 1.0 / math.sqrt(2.0))
    sample_q = laplace_sampler(0.0, 3.0) if args.alt else sample_p

    stats = replicate_mmd(
        sample_p, sample_q, nx, ny, spec, reps, _sub_seed(seed, 1), threads=common["threads"]
    )
    rho_x, rho_y = group_ratios(nx, ny)
    config = {
        "kernel": spec.to_dict(),
        "alt": args.alt,
        "regime": args.regime,
        "nx": nx,
        "ny": ny,
        "reps": reps,
        "draws": args.draws,
        "eig_n": args.eig_n,
        "ref_n": args.ref_n,
        "bins": args.bins,
        "qq": args.qq,
    }

    if not args.alt:
        min_scaled = n_min * stats
        sum_scaled = (nx + ny) * stats
        rng = np.random.default_rng([seed, 2])
        eig_points = sample_p(rng, args.eig_n)
        eigs = estimate_null_eigenvalues(gram_matrix(spec, eig_points))
        model = SpectralModel(tuple(eigs), rho_x, rho_y)
        limit = sample_null_limit(model, args.draws, _sub_seed(seed, 3))
        pairs = qq_pairs(min_scaled, limit, num=args.qq)
        result = {
            "mode": "null",
            "eigenvalues": list(model.eigenvalues),
            "qq_min_scaled": pairs.tolist(),
            "hist_min_scaled": _hist(min_scaled, args.bins),
            "hist_sum_scaled": _hist(sum_scaled, args.bins),
            "min_scaled_variance": float(np.var(min_scaled)),
            "sum_scaled_variance": float(np.var(sum_scaled)),
        }
        rows = [[0.0, float(e), float(t)] for e, t in pairs]
        rows += _hist_rows(1.0, min_scaled, args.bins)
        rows += _hist_rows(2.0, sum_scaled, args.bins)
        return _emit("null-dist", common, config, result, rows)

    rng = np.random.default_rng([seed, 4])
    reference = SampleSet(sample_p(rng, args.ref_n), sample_q(rng, args.ref_n))
    ref_blocks = gram_blocks(spec, reference)
    ref_mmd = mmd_unbiased(ref_blocks).value
    zx, zy = plugin_zetas(ref_blocks)
    limit = alt_limit(max(zx, 0.0), max(zy, 0.0), rho_x, rho_y, ref_mmd)
    centered = math.sqrt(n_min) * (stats - ref_mmd)
    rng = np.random.default_rng([seed, 5])
    theo = limit.sd * rng.standard_normal(args.draws)
    pairs = qq_pairs(centered, theo, num=args.qq)
    result = {
        "mode": "alt",
        "reference_mmd": ref_mmd,
        "zeta_hat_x": zx,
        "zeta_hat_y": zy,
        "limit_variance": limit.variance,
        "ks_to_normal": ks_to_normal(centered, 0.0, limit.sd) if limit.sd > 0 else None,
        "qq_min_scaled": pairs.tolist(),
        "hist_min_scaled": _hist(centered, args.bins),
    }
    rows = [[0.0, float(e), float(t)] for e, t in pairs]
    rows += _hist_rows(1.0, centered, args.bins)
    return _emit("null-dist", common, config, result, rows)


def cmd_tune(args) -> int:
    common = _common(args)
    permutations = _resolve(args.permutations, "PERMUTATIONS", 200, int)
    samples = _load_samples(args.x_file, args.y_file)
    if args.config is not None:
        try:
            payload = json.loads(Path(args.config).read_text(encoding="utf-8"))
        except OSError as exc:
            raise ParameterError(f"cannot read config file: {exc}") from None
        except json.JSONDecodeError as exc:
            raise ParameterError(f"invalid config JSON: {exc}") from None
        payload.setdefault("seed", common["seed"])
        tune_config = TuneConfig(**payload)
    else:
        grid = {"lengthscale": args.grid} if args.family == "gaussian" else {}
        tune_config = TuneConfig(
            family=args.family,
            param_grid=grid,
            lambda_reg=args.lambda_reg,
            refine_steps=args.refine_steps,
            train_fraction=args.train_fraction,
            seed=common["seed"],
        )
    result = tune(samples, tune_config)
    _, holdout = split_samples(samples, tune_config.train_fraction, tune_config.seed)
    held_test = permutation_test(
        holdout,
        result.best_spec,
        alpha=args.alpha,
        permutations=permutations,
        seed=_sub_seed(common["seed"], 6),
        threads=common["threads"],
    )
    config = {
        "tune": tune_config.to_dict(),
        "alpha": args.alpha,
        "permutations": permutations,
    }
    payload = {"tune": result.to_dict(), "holdout_test": held_test.to_dict()}
    if result.best_spec.family == "gaussian":
        rows = [[spec.lengthscale, value] for spec, value in result.trace]
    else:
        rows = [[value] for _, value in result.trace]
    return _emit("tune", common, config, payload, rows)


def cmd_oracle_check(args) -> int:
    common = _common(args)
    report = run_oracle_checks(
        tol=args.tol, count=args.count, seed=common["seed"], perturb=args.perturb
    )
    config = {"count": args.count, "tol": args.tol, "perturb": args.perturb}
    rows = [
        [float(i), report.max_rel_errors[name]] for i, name in enumerate(sorted(report.max_rel_errors))
    ]
    code = _emit("oracle-check", common, config, report.to_dict(), rows)
    if code != 0:
        return code
    return 0 if report.passed else 3


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="mmdtest", description=__doc__)
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    subs = parser.add_subparsers(dest="command", required=True)

    p = subs.add_parser("test", parents=[], help="two-sample permutation test on CSV data")
    p.add_argument("x_file")
    p.add_argument("y_file")
    _add_kernel_flags(p)
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--permutations", type=int, default=None)
    _add_common(p)
    p.set_defaults(func=cmd_test)

    p = subs.add_parser("variance", help="estimates and plug-in variance report for CSV data")
    p.add_argument("x_file")
    p.add_argument("y_file")
    _add_kernel_flags(p)
    p.add_argument("--delta", type=float, default=0.05)
    _add_common(p)
    p.set_defaults(func=cmd_variance)

    p = subs.add_parser("power-sim", help="rejection-rate curve over nx")
    _add_kernel_flags(p)
    p.add_argument("--null", action="store_true", help="simulate under P = Q")
    p.add_argument("--q-mean", type=float, default=0.0)
    p.add_argument("--q-std", type=float, default=1.2)
    p.add_argument("--nx-grid", type=_int_list, default=(50, 100, 200, 400, 800))
    p.add_argument("--ny", type=int, default=50)
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--permutations", type=int, default=None)
    p.add_argument("--reps", type=int, default=None)
    _add_common(p)
    p.set_defaults(func=cmd_power_sim)

    p = subs.add_parser("null-dist", help="scaled statistic distribution vs the limit")
    _add_kernel_flags(p)
    p.add_argument("--alt", action="store_true", help="Laplace alternative instead of the null")
    p.add_argument("--regime", choices=("prop", "nonprop"), default="nonprop")
    p.add_argument("--nx", type=int, default=400)
    p.add_argument("--reps", type=int, default=None)
    p.add_argument("--draws", type=int, default=20000)
    p.add_argument("--eig-n", type=int, default=1000)
    p.add_argument("--ref-n", type=int, default=2000)
    p.add_argument("--bins", type=int, default=40)
    p.add_argument("--qq", type=int, default=99)
    _add_common(p)
    p.set_defaults(func=cmd_null_dist)

    p = subs.add_parser("tune", help="lengthscale selection by SNR on a training split")
    p.add_argument("x_file")
    p.add_argument("y_file")
    p.add_argument("--config", default=None, help="JSON file with tuning config fields")
    p.add_argument("--family", choices=FAMILIES, default="gaussian")
    p.add_argument(
        "--grid",
        type=_float_list,
        default=(0.1, 0.31622776601683794, 1.0, 3.1622776601683795, 10.0, 31.622776601683793, 100.0),
    )
    p.add_argument("--lambda-reg", type=float, default=1e-8)
    p.add_argument("--refine-steps", type=int, default=10)
    p.add_argument("--train-fraction", type=float, default=0.5)
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--permutations", type=int, default=None)
    _add_common(p)
    p.set_defaults(func=cmd_tune)

    p = subs.add_parser("oracle-check", help="closed forms vs the enumeration oracle")
    p.add_argument("--count", type=int, default=200)
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--perturb", action="store_true", help="inject a 1e-6 error; the check must fail")
    _add_common(p)
    p.set_defaults(func=cmd_oracle_check)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        sys.stderr.write(str(exc) + "\n")
        return 1
    try:
        return args.func(args)
    except ParameterError as exc:
        sys.stderr.write(f"mmdtest: {exc}\n")
        return 1
    except MMDTestError as exc:
        sys.stderr.write(f"mmdtest: {exc}\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
