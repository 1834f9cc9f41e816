import pytest

from beamdoa.config import ConfigError, RunConfig, build_config, load_config, parse_pairs


def test_empty_config_is_default():
    assert build_config({}) == RunConfig()
    assert build_config(parse_pairs("# only a comment\n\n")) == RunConfig()


def test_single_override():
    cfg = build_config(parse_pairs("beams = 3  # fewer beams\n"))
    assert cfg.beams == 3
    assert cfg.hyper == RunConfig().hyper and cfg.aug == RunConfig().aug and cfg.b_list == RunConfig().b_list


def test_lists_and_intervals(tmp_path):
    p = tmp_path / "c.txt"
    p.write_text("snr=0,10\nb_list=3,16\naug_k=2,5\niters=7\nln_placement=input\n")
    cfg = load_config(p)
    assert cfg.snr_list == (0.0, 10.0) and cfg.b_list == (3, 16)
    assert cfg.aug.k_range == (2.0, 5.0)
    assert cfg.hyper.total_iters == 7 and cfg.hyper.ln_placement == "input"


@pytest.mark.parametrize("text,key", [
    ("dropout=1.5", "dropout"),
    ("beams=abc", "beams"),
    ("trials=0", "trials"),
    ("beams=100", "beams"),
    ("aug_m=5,1", "aug_m"),
    ("ln_placement=middle", "ln_placement"),
])
def test_invalid_values_name_the_key(text, key):
    with pytest.raises(ConfigError) as info:
        build_config(parse_pairs(text))
    assert key in str(info.value)


def test_missing_equals_rejected():
    with pytest.raises(ConfigError):
        parse_pairs("beams 8\n")


def test_unknown_key_warns(caplog):
    cfg = build_config({"colour": "blue"})
    assert cfg == RunConfig()
    assert "colour" in caplog.text
