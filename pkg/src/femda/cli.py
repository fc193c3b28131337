"""Command-line entry point.

Subcommands:
  synthetic   budgeted + contamination pipeline on generated mixtures
  real        the same pipeline on a user-supplied CSV dataset (PCA first)
  validate    numerical oracle suites (quadrature weight identity, Fisher
              information Monte-Carlo, sampler moment checks)
  selftest    fast invariant checks of the core library

Exit codes: 0 success, 1 configuration/usage error, 2 runtime error.
"""

import argparse
import csv
import sys
from pathlib import Path

import numpy as np

from . import __version__
from ._backend import backend_name
from .config import ConfigError, config_from_overrides, default_config_text, load_config
from .dataio import load_csv
from .errors import FemdaError
from .harness import emit_csv, run_budgeted


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="femda",
        description="Robust discriminant analysis benchmark harness",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--config", metavar="PATH", help="INI experiment config file")
        p.add_argument("--seed", type=int, help="base seed (overrides config)")
        p.add_argument("--out", metavar="DIR", help="output directory (overrides config)")
        p.add_argument("--methods", metavar="LIST", help="comma list, e.g. qda,femda")
        p.add_argument(
            "--contamination", metavar="LIST", help="comma list of fractions, e.g. 0,0.2"
        )
        p.add_argument("--repetitions", type=int, help="repetition count (overrides config)")
        p.add_argument("--quiet", action="store_true", help="suppress progress output")

    p_syn = sub.add_parser("synthetic", help="run the synthetic-data pipeline")
    add_common(p_syn)

    p_real = sub.add_parser("real", help="run the real-data pipeline on a CSV file")
    add_common(p_real)
    p_real.add_argument("--data", metavar="PATH", help="dataset CSV (features + label column)")
    p_real.add_argument("--pca-dim", type=int, help="projection dimension (overrides config)")

    p_val = sub.add_parser("validate", help="run the numerical oracle suites")
    p_val.add_argument("--quiet", action="store_true")

    p_self = sub.add_parser("selftest", help="run fast library invariant checks")
    p_self.add_argument("--quiet", action="store_true")

    p_cfg = sub.add_parser("print-config", help="print the default config file")
    p_cfg.set_defaults(quiet=False)
    return parser


def _gather_overrides(args, mode):
    overrides = {"mode": mode}
    if args.seed is not None:
        overrides["base_seed"] = args.seed
    if args.out is not None:
        overrides["output_dir"] = args.out
    if args.methods is not None:
        overrides["methods"] = args.methods
    if args.contamination is not None:
        overrides["contamination_grid"] = args.contamination
    if args.repetitions is not None:
        overrides["repetitions"] = args.repetitions
    if mode == "real" and getattr(args, "data", None):
        overrides["data"] = args.data
    return overrides


def _load(args, mode):
    overrides = _gather_overrides(args, mode)
    if args.config:
        cfg = load_config(args.config, overrides)
    else:
        cfg = config_from_overrides(overrides)
    if mode == "real" and getattr(args, "pca_dim", None) is not None:
        from dataclasses import replace

        cfg = replace(cfg, real=replace(cfg.real, pca_dim=args.pca_dim))
    return cfg


def _cmd_experiment(args, mode):
    cfg = _load(args, mode)
    dataset = None
    if mode == "real":
        if not cfg.real.data:
            raise ConfigError("real mode needs a dataset path: pass --data <csv>")
        dataset = load_csv(
            cfg.real.data,
            label_column=cfg.real.label_column,
            has_header=cfg.real.has_header,
        )
        if not args.quiet:
            print(
                f"loaded {dataset.name}: {len(dataset)} rows, "
                f"{dataset.data.shape[1]} features, {dataset.class_count} classes"
            )
    if not args.quiet:
        print(
            f"running {mode} pipeline: {len(cfg.methods)} methods, "
            f"{cfg.repetitions} repetitions, grid {list(cfg.contamination_grid)}, "
            f"kernel backend: {backend_name()}"
        )
    records = run_budgeted(cfg, dataset)
    paths = emit_csv(records, cfg.output_dir)
    if mode == "real" and dataset.label_names:
        label_path = Path(cfg.output_dir) / "label_map.csv"
        with open(label_path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["label", "name"])
            for i, name in enumerate(dataset.label_names):
                writer.writerow([i, name])
        paths.append(label_path)
    if not args.quiet:
        n_err = sum(1 for r in records if r.error)
        print(f"wrote {len(records)} records ({n_err} errors) to:")
        for p in paths:
            print(f"  {p}")
    return 0


def _check(name, ok, detail, quiet):
    line = f"{'PASS' if ok else 'FAIL'}  {name}: {detail}"
    if not quiet or not ok:
        print(line)
    return ok


def _cmd_validate(args):
    from .datagen import ClusterSpec, GeneralizedGaussian, StudentT, sample_cluster
    from .estimators import jeffreys_fisher_info_mc, numeric_weight_oracle, tqda_weight_mmle
    from .spd import cholesky as spd_cholesky

    ok = True
    # Quadrature route to the Student weight vs the closed form.
    worst = 0.0
    for nu in (2.0, 5.0, 10.0, 50.0):
        for m in (4, 10, 20):
            for d in (0.1, 1.0, 10.0, 100.0):
                ref = tqda_weight_mmle(nu, m, d)
                num = numeric_weight_oracle(nu, m, d)
                worst = max(worst, abs(num - ref) / ref)
    ok &= _check(
        "student-weight quadrature oracle (48-point grid)",
        worst <= 1e-6,
        f"max relative deviation {worst:.3e} (tolerance 1e-6)",
        args.quiet,
    )

    # Fisher information of the scale parameter, Gaussian radial law.
    est = jeffreys_fisher_info_mc(m=10, tau=1.0, n_samples=1_000_000, seed=20240801)
    ok &= _check(
        "scale-parameter Fisher information (m=10, tau=1)",
        4.75 <= est <= 5.25,
        f"estimate {est:.4f}, closed form 5.0",
        args.quiet,
    )
    est2 = jeffreys_fisher_info_mc(m=4, tau=2.0, n_samples=1_000_000, seed=20240802)
    ok &= _check(
        "scale-parameter Fisher information (m=4, tau=2)",
        abs(est2 - 0.5) <= 0.025,
        f"estimate {est2:.4f}, closed form 0.5",
        args.quiet,
    )

    # Sampler moments.
    rng = np.random.default_rng(20240803)
    m = 10
    eye = spd_cholesky(np.eye(m))
    spec_t = ClusterSpec(1.0, StudentT(10.0), np.zeros(m), eye)
    xs = sample_cluster(spec_t, 100_000, rng)
    cov = xs.T @ xs / len(xs)
    dev = np.linalg.norm(cov - 1.25 * np.eye(m)) / np.linalg.norm(1.25 * np.eye(m))
    ok &= _check(
        "student sampler covariance (nu=10 -> 1.25 I)",
        dev <= 0.05,
        f"relative Frobenius deviation {dev:.4f}",
        args.quiet,
    )
    spec_g = ClusterSpec(1.0, GeneralizedGaussian(1.0), np.zeros(m), eye)
    xs = sample_cluster(spec_g, 100_000, rng)
    cov = xs.T @ xs / len(xs)
    dev = np.linalg.norm(cov - np.eye(m)) / np.linalg.norm(np.eye(m))
    ok &= _check(
        "generalized-gaussian beta=1 reduces to gaussian",
        dev <= 0.05,
        f"relative Frobenius deviation {dev:.4f}",
        args.quiet,
    )
    beta = 0.8
    spec_h = ClusterSpec(1.0, GeneralizedGaussian(beta), np.zeros(m), eye)
    xs = sample_cluster(spec_h, 100_000, rng)
    q = np.einsum("ij,ij->i", xs, xs)
    mean_qbeta = float((q**beta).mean())
    scalar = rng.gamma(shape=m / (2 * beta), scale=2.0, size=100_000)
    dev = abs(mean_qbeta - scalar.mean()) / scalar.mean()
    ok &= _check(
        "radial law moment E[Q^beta] vs scalar gamma simulation (beta=0.8)",
        dev <= 0.02,
        f"relative deviation {dev:.4f}",
        args.quiet,
    )
    print("validate:", "all oracles PASS" if ok else "FAILURES present")
    return 0 if ok else 2


def _cmd_selftest(args):
    from .classifiers import fit as clf_fit
    from .classifiers import predict as clf_predict
    from .datagen import SyntheticConfig, contaminate, generate_mixture
    from .estimators import FitConfig, fit_femda
    from .spd import cholesky as spd_cholesky
    from .spd import mahalanobis_sq, spd_geodesic_distance

    ok = True
    rng = np.random.default_rng(7)

    a_raw = rng.standard_normal((4, 4))
    a = spd_cholesky(a_raw @ a_raw.T + 4 * np.eye(4))
    b_raw = rng.standard_normal((4, 4))
    b = spd_cholesky(b_raw @ b_raw.T + 4 * np.eye(4))
    mtx = rng.standard_normal((4, 4)) + 2 * np.eye(4)
    d0 = spd_geodesic_distance(a, b)
    d1 = spd_geodesic_distance(
        spd_cholesky(mtx @ a.matrix @ mtx.T), spd_cholesky(mtx @ b.matrix @ mtx.T)
    )
    ok &= _check("geodesic distance affine invariance", abs(d0 - d1) < 1e-8,
                 f"|delta| = {abs(d0 - d1):.2e}", args.quiet)

    x, mu = rng.standard_normal(4), rng.standard_normal(4)
    base = mahalanobis_sq(x, mu, a)
    drift = max(
        abs(mahalanobis_sq(x, mu, spd_cholesky(c * a.matrix)) - base / c)
        for c in (1e-3, 1.0, 1e3)
    )
    ok &= _check("mahalanobis 1/c scaling", drift < 1e-10, f"max drift {drift:.2e}", args.quiet)

    X, y, _ = generate_mixture(SyntheticConfig(n=600, seed=3))
    clf = clf_fit("femda", X, y, FitConfig())
    s0 = clf_predict(clf, X[:100])
    scaled = [
        type(mod)(
            mu=mod.mu, sigma=spd_cholesky(37.0 * mod.sigma.matrix), nu=mod.nu,
            converged=mod.converged, iterations=mod.iterations,
            final_step_norm=mod.final_step_norm,
        )
        for mod in clf.models
    ]
    clf_scaled = type(clf)(method=clf.method, class_count=clf.class_count, models=scaled)
    ok &= _check(
        "scale-insensitive decision rule",
        np.array_equal(s0, clf_predict(clf_scaled, X[:100])),
        "predictions invariant under sigma -> 37 sigma",
        args.quiet,
    )

    model = fit_femda(X[y == 0], FitConfig(n_iter_max=5))
    from ._backend import kernels

    d = kernels.maha_sq_chol(np.ascontiguousarray(X[y == 0]), model.mu, model.sigma.chol)
    w = np.minimum(0.5, 1.0 / d)
    ok &= _check("weight cap", float(w.max()) <= 0.5, f"max weight {w.max():.3f}", args.quiet)

    X2 = contaminate(X, y, 0.35, np.random.default_rng(1))
    lo, hi = X.min(axis=0), X.max(axis=0)
    inside = np.all((X2 >= lo - 1e-12) & (X2 <= hi + 1e-12))
    ok &= _check("contamination stays in the bounding box", bool(inside), "all rows inside", args.quiet)

    Xa, ya, _ = generate_mixture(SyntheticConfig(n=500, seed=11))
    Xb, yb, _ = generate_mixture(SyntheticConfig(n=500, seed=11))
    ok &= _check(
        "generator determinism",
        np.array_equal(Xa, Xb) and np.array_equal(ya, yb),
        "same seed, identical draw",
        args.quiet,
    )
    print("selftest:", "all checks PASS" if ok else "FAILURES present")
    return 0 if ok else 2


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "synthetic":
            return _cmd_experiment(args, "synthetic")
        if args.command == "real":
            return _cmd_experiment(args, "real")
        if args.command == "validate":
            return _cmd_validate(args)
        if args.command == "selftest":
            return _cmd_selftest(args)
        if args.command == "print-config":
            print(default_config_text(), end="")
            return 0
        parser.error(f"unknown command {args.command!r}")
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (FemdaError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


cli_main = main

if __name__ == "__main__":
    sys.exit(main())
