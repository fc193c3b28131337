"""Experiment configuration: dataclasses plus the INI file schema.

The config file is flat INI (section/key = value) so it stays hand-editable.
Schema (all keys optional; defaults shown by ``default_config_text``):

    [experiment]  mode, methods, repetitions, time_budget_factor,
                  contamination_grid, base_seed, output_dir
    [synthetic]   k, m, n, radius, xi, lambda_min, lambda_max,
                  train_fraction, cluster_families, priors
    [fit]         n_iter_max, eps, lambda_reg, trim_cap, nu_search_lo,
                  nu_search_hi, nu_tol, qda_logdet
    [real]        data, pca_dim, train_fraction, label_column, has_header

``cluster_families`` is a comma list of ``gg:<beta>`` / ``t:<nu>`` entries.
"""

import configparser
from dataclasses import dataclass, field
from typing import Optional, Tuple, Union

from .classifiers import Method
from .datagen import GeneralizedGaussian, StudentT, SyntheticConfig
from .errors import ConfigError
from .estimators import FitConfig

__all__ = [
    "RealConfig",
    "ExperimentConfig",
    "load_config",
    "config_from_overrides",
    "default_config_text",
]

_DEFAULT_GRID = (0.0, 0.05, 0.10, 0.15, 0.20, 0.25, 0.30, 0.35)
_DEFAULT_METHODS = (Method.QDA, Method.RQDA, Method.FEMDA, Method.TQDA, Method.KNN)


@dataclass(frozen=True)
class RealConfig:
    """Real-dataset pipeline knobs."""

    data: Optional[str] = None
    pca_dim: Optional[int] = None
    train_fraction: float = 0.7
    label_column: Union[str, int] = "last"
    has_header: bool = False


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything one experiment run depends on, besides wall-clock time."""

    mode: str = "synthetic"
    methods: Tuple[Method, ...] = _DEFAULT_METHODS
    repetitions: int = 5
    time_budget_factor: float = 30.0
    contamination_grid: Tuple[float, ...] = _DEFAULT_GRID
    synthetic: SyntheticConfig = field(default_factory=SyntheticConfig)
    synthetic_train_fraction: float = 0.7
    real: RealConfig = field(default_factory=RealConfig)
    fit: FitConfig = field(default_factory=FitConfig)
    base_seed: int = 0
    output_dir: str = "results"

    def __post_init__(self):
        if self.mode not in ("synthetic", "real"):
            raise ConfigError(f"mode must be 'synthetic' or 'real', got {self.mode!r}")
        if not self.methods:
            raise ConfigError("methods must not be empty")
        if self.repetitions < 1:
            raise ConfigError("repetitions must be >= 1")
        if self.time_budget_factor < 1:
            raise ConfigError("time_budget_factor must be >= 1")
        grid = tuple(self.contamination_grid)
        if not grid:
            raise ConfigError("contamination_grid must not be empty")
        if any(not 0.0 <= f <= 1.0 for f in grid):
            raise ConfigError("contamination fractions must lie in [0, 1]")
        if list(grid) != sorted(grid):
            raise ConfigError("contamination_grid must be ascending")
        if not 0.0 < self.synthetic_train_fraction < 1.0:
            raise ConfigError("synthetic train_fraction must lie in (0, 1)")


def _parse_family(token: str):
    kind, _, value = token.partition(":")
    kind = kind.strip().lower()
    try:
        param = float(value)
    except ValueError:
        raise ConfigError(f"bad family parameter in {token!r}") from None
    if kind in ("gg", "gaussian", "generalized_gaussian"):
        return GeneralizedGaussian(param)
    if kind in ("t", "student", "student_t"):
        return StudentT(param)
    raise ConfigError(f"unknown family kind in {token!r} (expected gg:<beta> or t:<nu>)")


def _csv_list(raw: str):
    return [tok.strip() for tok in raw.split(",") if tok.strip()]


def load_config(path, overrides: Optional[dict] = None) -> ExperimentConfig:
    """Read an INI config file; ``overrides`` wins over file values."""
    parser = configparser.ConfigParser()
    read = parser.read(path)
    if not read:
        raise ConfigError(f"config file not found: {path}")
    try:
        return _from_parser(parser, overrides or {})
    except (ValueError, ConfigError) as exc:
        raise ConfigError(f"{path}: {exc}") from None


def config_from_overrides(overrides: Optional[dict] = None) -> ExperimentConfig:
    """Build a config from schema defaults plus the given overrides."""
    try:
        return _from_parser(configparser.ConfigParser(), overrides or {})
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def _from_parser(parser, overrides) -> ExperimentConfig:
    exp = parser["experiment"] if parser.has_section("experiment") else {}
    syn = parser["synthetic"] if parser.has_section("synthetic") else {}
    fit = parser["fit"] if parser.has_section("fit") else {}
    real = parser["real"] if parser.has_section("real") else {}

    def get(section, key, cast, default):
        if key in section:
            raw = section[key]
            if cast is bool:
                return str(raw).strip().lower() in ("1", "true", "yes", "on")
            return cast(raw)
        return default

    base_seed = int(overrides.get("base_seed", get(exp, "base_seed", int, 0)))
    methods_raw = overrides.get("methods") or get(exp, "methods", str, None)
    if methods_raw is None:
        methods = _DEFAULT_METHODS
    else:
        if isinstance(methods_raw, str):
            methods_raw = _csv_list(methods_raw)
        methods = tuple(Method.parse(tok) for tok in methods_raw)
    grid_raw = overrides.get("contamination_grid") or get(exp, "contamination_grid", str, None)
    if grid_raw is None:
        grid = _DEFAULT_GRID
    else:
        if isinstance(grid_raw, str):
            grid_raw = _csv_list(grid_raw)
        grid = tuple(float(tok) for tok in grid_raw)

    families_raw = get(syn, "cluster_families", str, None)
    families = tuple(_parse_family(tok) for tok in _csv_list(families_raw)) if families_raw else None
    priors_raw = get(syn, "priors", str, None)
    priors = tuple(float(tok) for tok in _csv_list(priors_raw)) if priors_raw else None
    synthetic = SyntheticConfig(
        k=get(syn, "k", int, 3),
        m=get(syn, "m", int, 10),
        n=get(syn, "n", int, 3000),
        radius=get(syn, "radius", float, 2.0),
        xi=get(syn, "xi", float, 1.0),
        lambda_min=get(syn, "lambda_min", float, 1.0),
        lambda_max=get(syn, "lambda_max", float, 20.0),
        seed=base_seed,
        cluster_families=families,
        priors=priors,
    )
    fit_cfg = FitConfig(
        n_iter_max=get(fit, "n_iter_max", int, 10),
        eps=get(fit, "eps", float, 1e-5),
        lambda_reg=get(fit, "lambda_reg", float, 1e-5),
        trim_cap=get(fit, "trim_cap", float, 0.5),
        nu_search_lo=get(fit, "nu_search_lo", float, 0.1),
        nu_search_hi=get(fit, "nu_search_hi", float, 100.0),
        nu_tol=get(fit, "nu_tol", float, 1e-3),
        qda_logdet=get(fit, "qda_logdet", bool, False),
    )
    label_col = get(real, "label_column", str, "last")
    if label_col != "last":
        label_col = int(label_col)
    real_cfg = RealConfig(
        data=overrides.get("data") or get(real, "data", str, None) or None,
        pca_dim=get(real, "pca_dim", int, None),
        train_fraction=get(real, "train_fraction", float, 0.7),
        label_column=label_col,
        has_header=get(real, "has_header", bool, False),
    )
    cfg = ExperimentConfig(
        mode=overrides.get("mode", get(exp, "mode", str, "synthetic")),
        methods=methods,
        repetitions=int(overrides.get("repetitions", get(exp, "repetitions", int, 5))),
        time_budget_factor=get(exp, "time_budget_factor", float, 30.0),
        contamination_grid=grid,
        synthetic=synthetic,
        synthetic_train_fraction=get(syn, "train_fraction", float, 0.7),
        real=real_cfg,
        fit=fit_cfg,
        base_seed=base_seed,
        output_dir=str(overrides.get("output_dir", get(exp, "output_dir", str, "results"))),
    )
    return cfg


def default_config_text() -> str:
    """A commented config file with every key at its default."""
    return """\
[experiment]
mode = synthetic
methods = qda, rqda, femda, tqda, knn
repetitions = 5
time_budget_factor = 30
contamination_grid = 0.0, 0.05, 0.10, 0.15, 0.20, 0.25, 0.30, 0.35
base_seed = 0
output_dir = results

[synthetic]
k = 3
m = 10
n = 3000
radius = 2.0
xi = 1.0
lambda_min = 1.0
lambda_max = 20.0
train_fraction = 0.7
cluster_families = gg:0.8, gg:1.5, t:10
priors = 0.33, 0.33, 0.34

[fit]
n_iter_max = 10
eps = 1e-5
lambda_reg = 1e-5
trim_cap = 0.5
nu_search_lo = 0.1
nu_search_hi = 100
nu_tol = 1e-3
qda_logdet = false

[real]
; data = path/to/dataset.csv
; pca_dim = 5
train_fraction = 0.7
label_column = last
has_header = false
"""
