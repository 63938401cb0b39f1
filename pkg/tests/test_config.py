import pytest

from trisymp.config import ConfigError, RunConfig, config_from_mapping, load_config


def test_load_flat_file(tmp_path):
    p = tmp_path / "run.cfg"
    p.write_text("# comment\nmesh = octagon:4\nperiods = 1, 0.5 -0.25 0  # trailing\nflip_convention = yes\n"
                 "radii = 0.01 0.02 0.03\nsweep = 2 2 2\nepsilon = 1e-3\n")
    cfg = load_config(p, ["C=100"])
    assert cfg.mesh == "octagon:4" and cfg.periods == (1.0, 0.5, -0.25, 0.0)
    assert cfg.flip_convention and cfg.sweep == (2, 2, 2) and cfg.radii == (0.01, 0.02, 0.03)
    assert cfg.pinned == {"epsilon": 1e-3, "C": 100.0}
    assert cfg.resolve("mesh.off") == tmp_path / "mesh.off"


@pytest.mark.parametrize("text", ["nonsense_key = 1\n", "epsilon = abc\n", "radii = 0.03 0.02 0.01\n",
                                  "epsilon = -1\n", "family = other\n", "flip_convention = maybe\n",
                                  "periods = 1 0\nform = f.txt\n", "[section]\nmesh = torus:4\n"])
def test_bad_values(tmp_path, text):
    p = tmp_path / "bad.cfg"
    p.write_text(text)
    with pytest.raises(ConfigError):
        load_config(p)


def test_missing_file_and_bad_override(tmp_path):
    with pytest.raises(ConfigError):
        load_config(tmp_path / "nope.cfg")
    with pytest.raises(ConfigError):
        load_config(None, ["novalue"])


def test_digest_ignores_output_dir_only():
    a = config_from_mapping({"mesh": "torus:8", "output_dir": "x"})
    b = config_from_mapping({"mesh": "torus:8", "output_dir": "y"})
    c = config_from_mapping({"mesh": "torus:9"})
    assert a.digest() == b.digest() != c.digest()
    assert len(a.digest()) == 12
    assert RunConfig().digest() == RunConfig().digest()
