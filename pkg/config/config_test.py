from config.config import OUT_DIR_ENV, Config


def test_defaults_from_values_yaml(monkeypatch):
    monkeypatch.delenv(OUT_DIR_ENV, raising=False)
    config = Config.load()
    assert config.limits.max_family is None
    assert config.limits.transformation_bound == 4096
    assert config.output.directory is None


def test_env_overrides_output_directory(monkeypatch, tmp_path):
    monkeypatch.setenv(OUT_DIR_ENV, str(tmp_path))
    assert Config.load().output.directory == str(tmp_path)


def test_partial_yaml_keeps_defaults(monkeypatch, tmp_path):
    monkeypatch.delenv(OUT_DIR_ENV, raising=False)
    path = tmp_path / "values.yaml"
    path.write_text("limits:\n  max_family: 3\n")
    config = Config.load(path)
    assert config.limits.max_family == 3
    assert config.limits.seed == 0
    assert config.logging.level == "WARNING"
