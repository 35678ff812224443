import pytest

from netnorm.config import ConfigError, Settings, apply_overrides, load_config, nest, parse_config_text, section


def test_parse_and_override(tmp_path):
    p = tmp_path / "run.cfg"
    p.write_text("# comment\nadjust.family = bernoulli\n\nstudy.sizes = 20..40:10\n")
    flat = apply_overrides(load_config(p), ["adjust.family=offset_bernoulli", "seed = 4"])
    assert flat == {"adjust.family": "offset_bernoulli", "study.sizes": "20..40:10", "seed": "4"}
    assert Settings(flat).int_list("study.sizes") == [20, 30, 40]


def test_bad_lines():
    with pytest.raises(ConfigError) as info:
        parse_config_text("a = 1\nnot a pair\n", "x.cfg")
    assert "x.cfg:2" in str(info.value)
    with pytest.raises(ConfigError):
        apply_overrides({}, ["novalue"])


def test_section_and_nest():
    flat = {"model.m.family": "bernoulli", "model.m.params.p": "0.3", "other": "1"}
    assert section(flat, "model") == {"m.family": "bernoulli", "m.params.p": "0.3"}
    assert nest(section(flat, "model")) == {"m": {"family": "bernoulli", "params": {"p": "0.3"}}}
    with pytest.raises(ConfigError):
        nest({"a": "1", "a.b": "2"})


def test_typed_access():
    s = Settings({"i": "3", "f": "0.5", "b": "yes", "l": "a, b", "fl": "0.1,0.25"})
    assert s.int("i") == 3 and s.float("f") == 0.5 and s.bool("b") is True
    assert s.list("l") == ["a", "b"] and s.float_list("fl") == [0.1, 0.25]
    assert s.int("missing", 7) == 7
    with pytest.raises(ConfigError):
        Settings({"i": "x"}).int("i")
