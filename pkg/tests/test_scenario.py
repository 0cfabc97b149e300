import json

import pytest

from hybridlink.links import Protocol, TxpPolicy
from hybridlink.scenario import (SWITCHING_SCENARIO, ConfigError, Scenario, apply_overrides,
                                 load_config)


def test_default_scenario():
    sc = Scenario.default()
    assert sc.image_size_bytes == 40960
    assert [c.to for c in sc.switch_schedule] == [Protocol.WIFI, Protocol.BLE]
    assert all(c.align_frame_start for c in sc.switch_schedule)


@pytest.mark.parametrize("change, field", [
    ({"bogus": 1}, "bogus"),
    ({"seed": -1}, "seed"),
    ({"ble": {"policy": "psychic"}}, "ble.policy"),
    ({"wifi": {"band": "6"}}, "wifi.band"),
    ({"switch_schedule": [{"t_ms": 5, "to": "lora"}]}, "switch_schedule[0].to"),
    ({"switch_schedule": [{"t_ms": 5, "to": "ble", "align": "later"}]},
     "switch_schedule[0].align"),
    ({"faults": {"drop_chunk": [1]}}, "faults.drop_chunk"),
    ({"auto": {"fps_demand": [[0, 2]], "up_fraction": 0.5, "down_fraction": 0.6}},
     "auto"),
    ({"soc_wifi_host_mw": 900.0}, "power"),
])
def test_config_errors_name_the_field(change, field):
    data = dict(SWITCHING_SCENARIO, **change)
    with pytest.raises(ConfigError) as exc:
        Scenario.from_dict(data)
    assert exc.value.field.startswith(field)


def test_overrides_parse_json_values():
    data = apply_overrides(SWITCHING_SCENARIO, ["ble.policy=adaptive", "ble.fem=true", "seed=4",
                                                 "wifi.noise_sigma_db=0.5"])
    sc = Scenario.from_dict(data)
    assert sc.ble.ble_policy is TxpPolicy.ADAPTIVE and sc.seed == 4
    assert SWITCHING_SCENARIO["seed"] == 0
    with pytest.raises(ConfigError):
        apply_overrides({}, ["no_equals_sign"])


def test_load_config_errors(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{nope")
    with pytest.raises(ConfigError):
        load_config(bad)
    arr = tmp_path / "arr.json"
    arr.write_text(json.dumps([1, 2]))
    with pytest.raises(ConfigError):
        load_config(arr)


def test_calibration_override():
    data = dict(SWITCHING_SCENARIO, calibration={"switch_overhead_wifi_to_ble_ms": 7.0})
    assert Scenario.from_dict(data).library.calibration.overhead_ms(Protocol.WIFI) == 7.0
