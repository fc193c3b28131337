import pytest

from femda.classifiers import Method
from femda.config import (
    ExperimentConfig,
    config_from_overrides,
    default_config_text,
    load_config,
)
from femda.datagen import GeneralizedGaussian, StudentT
from femda.errors import ConfigError


class TestDefaults:
    def test_schema_defaults(self):
        cfg = config_from_overrides()
        assert cfg.mode == "synthetic"
        assert cfg.repetitions == 5
        assert cfg.time_budget_factor == 30.0
        assert cfg.contamination_grid == (0.0, 0.05, 0.10, 0.15, 0.20, 0.25, 0.30, 0.35)
        assert cfg.synthetic.k == 3
        assert cfg.synthetic.m == 10
        assert cfg.synthetic.n == 3000
        assert cfg.synthetic.radius == 2.0
        assert cfg.synthetic.lambda_min == 1.0
        assert cfg.synthetic.lambda_max == 20.0
        assert cfg.synthetic_train_fraction == 0.7
        assert cfg.fit.n_iter_max == 10
        assert cfg.fit.eps == 1e-5
        assert cfg.fit.lambda_reg == 1e-5
        assert cfg.fit.trim_cap == 0.5
        assert cfg.fit.qda_logdet is False
        assert cfg.methods == (
            Method.QDA,
            Method.RQDA,
            Method.FEMDA,
            Method.TQDA,
            Method.KNN,
        )

    def test_default_families(self):
        cfg = config_from_overrides()
        fams = cfg.synthetic.cluster_families
        assert isinstance(fams[0], GeneralizedGaussian) and fams[0].beta == 0.8
        assert isinstance(fams[1], GeneralizedGaussian) and fams[1].beta == 1.5
        assert isinstance(fams[2], StudentT) and fams[2].nu == 10.0

    def test_default_config_text_round_trips(self, tmp_path):
        path = tmp_path / "exp.ini"
        path.write_text(default_config_text())
        cfg = load_config(path)
        assert cfg == config_from_overrides()


class TestFileParsing:
    def test_values_and_overrides(self, tmp_path):
        path = tmp_path / "exp.ini"
        path.write_text(
            """
[experiment]
mode = synthetic
methods = qda, femda
repetitions = 2
base_seed = 7
output_dir = out

[synthetic]
n = 450
m = 4
cluster_families = gg:1.0, t:5, gg:0.9
priors = 0.4, 0.3, 0.3

[fit]
qda_logdet = true
"""
        )
        cfg = load_config(path)
        assert cfg.methods == (Method.QDA, Method.FEMDA)
        assert cfg.repetitions == 2
        assert cfg.base_seed == 7
        assert cfg.synthetic.n == 450
        assert cfg.synthetic.priors == (0.4, 0.3, 0.3)
        assert isinstance(cfg.synthetic.cluster_families[1], StudentT)
        assert cfg.fit.qda_logdet is True
        over = load_config(path, {"base_seed": 99, "methods": "knn"})
        assert over.base_seed == 99
        assert over.methods == (Method.KNN,)

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError):
            load_config(tmp_path / "nope.ini")

    def test_bad_method(self):
        with pytest.raises(ConfigError):
            config_from_overrides({"methods": "qda, nonsense"})

    def test_bad_family(self, tmp_path):
        path = tmp_path / "exp.ini"
        path.write_text("[synthetic]\ncluster_families = weird:3, gg:1, gg:1\n")
        with pytest.raises(ConfigError):
            load_config(path)


class TestValidation:
    def test_empty_methods(self):
        with pytest.raises(ConfigError):
            ExperimentConfig(methods=())

    def test_grid_must_ascend(self):
        with pytest.raises(ConfigError):
            ExperimentConfig(contamination_grid=(0.2, 0.1))

    def test_grid_range(self):
        with pytest.raises(ConfigError):
            ExperimentConfig(contamination_grid=(0.0, 1.5))

    def test_repetitions(self):
        with pytest.raises(ConfigError):
            ExperimentConfig(repetitions=0)

    def test_budget_factor(self):
        with pytest.raises(ConfigError):
            ExperimentConfig(time_budget_factor=0.5)

    def test_mode(self):
        with pytest.raises(ConfigError):
            ExperimentConfig(mode="imaginary")
