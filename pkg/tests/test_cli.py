import json
import math

import numpy as np
import pytest

from hybrid_radiance import ConfigError
from hybrid_radiance.cli import main, parse_config, run

VALID_TWO_ATOM = {
    "command": "two-atom",
    "geometry": {
        "n_atoms": 2,
        "spacing": 0.318,
        "phi": 1.5708,
        "eta0": 0.3,
        "n_phonons": 1,
    },
}


def _write_config(tmp_path, doc, name="config.json"):
    path = tmp_path / name
    path.write_text(json.dumps(doc))
    return path


# ---------------------------------------------------------------------------
# parsing

def test_parse_valid_two_atom():
    config = parse_config(json.dumps(VALID_TWO_ATOM))
    assert config.command == "two-atom"
    assert config.geometry.n_atoms == 2
    assert config.geometry.gamma == 1.0  # default filled
    assert config.output.precision == 12
    assert config.output.format == "csv"


def test_parse_missing_n_atoms_names_path():
    doc = {"command": "two-atom", "geometry": {"spacing": 0.2}}
    with pytest.raises(ConfigError, match="geometry.n_atoms"):
        parse_config(json.dumps(doc))


def test_parse_negative_spacing_rejected():
    doc = {"command": "two-atom", "geometry": {"n_atoms": 2, "spacing": -1}}
    with pytest.raises(ConfigError, match="spacing"):
        parse_config(json.dumps(doc))


def test_parse_unknown_keys_rejected():
    doc = dict(VALID_TWO_ATOM, extra={"x": 1})
    with pytest.raises(ConfigError, match="extra"):
        parse_config(json.dumps(doc))
    doc = {"command": "two-atom", "geometry": dict(VALID_TWO_ATOM["geometry"], typo=3)}
    with pytest.raises(ConfigError, match="geometry.typo"):
        parse_config(json.dumps(doc))


def test_parse_scan_validation():
    doc = dict(VALID_TWO_ATOM, scan={"parameter": "eta0", "values": [0.0, 0.1]})
    config = parse_config(json.dumps(doc))
    assert config.scan.values == (0.0, 0.1)
    with pytest.raises(ConfigError, match="scan.parameter"):
        parse_config(json.dumps(dict(VALID_TWO_ATOM, scan={"parameter": "bogus", "values": [1]})))
    with pytest.raises(ConfigError, match=r"scan.values\[1\]"):
        parse_config(json.dumps(dict(VALID_TWO_ATOM,
                                     scan={"parameter": "n_atoms", "values": [2, 2.5]})))


def test_parse_phi_deg_conversion():
    doc = {"command": "two-atom",
           "geometry": {"n_atoms": 2, "spacing": 0.2, "phi_deg": 90}}
    config = parse_config(json.dumps(doc))
    assert config.geometry.phi == pytest.approx(math.pi / 2)
    both = {"command": "two-atom",
            "geometry": {"n_atoms": 2, "spacing": 0.2, "phi": 1.0, "phi_deg": 90}}
    with pytest.raises(ConfigError, match="phi_deg"):
        parse_config(json.dumps(both))


def test_parse_command_resolution():
    no_command = {"geometry": {"n_atoms": 2, "spacing": 0.2}}
    assert parse_config(json.dumps(no_command), command="kernels").command == "kernels"
    with pytest.raises(ConfigError, match="command"):
        parse_config(json.dumps(no_command))
    with pytest.raises(ConfigError, match="contradicts"):
        parse_config(json.dumps(VALID_TWO_ATOM), command="band")


def test_parse_output_constraints():
    doc = dict(VALID_TWO_ATOM, output={"precision": 3})
    with pytest.raises(ConfigError, match="output.precision"):
        parse_config(json.dumps(doc))
    doc = dict(VALID_TWO_ATOM, output={"format": "xml"})
    with pytest.raises(ConfigError, match="output.format"):
        parse_config(json.dumps(doc))


def test_parse_invalid_json():
    with pytest.raises(ConfigError, match="invalid JSON"):
        parse_config("{not json")


# ---------------------------------------------------------------------------
# running commands

def test_run_two_atom_writes_csv_and_sidecar(tmp_path):
    config = parse_config(json.dumps(VALID_TWO_ATOM))
    paths = run(config, out_dir=tmp_path)
    data, meta = paths
    lines = data.read_text().splitlines()
    assert lines[0] == "parity,n_total,n_antisym,rate,shift,rate_ratio"
    assert len(lines) == 1 + 4  # 2 parities x (n_ph + 1)
    sidecar = json.loads(meta.read_text())
    assert sidecar["command"] == "two-atom"
    assert sidecar["config"]["geometry"]["n_atoms"] == 2
    assert sidecar["row_count"] == 4


def test_run_determinism_byte_identical(tmp_path):
    doc = {
        "command": "spectrum",
        "geometry": {"n_atoms": 4, "spacing": 0.2, "eta0": 0.2, "n_phonons": 1},
        "scan": {"parameter": "eta0", "values": [0.0, 0.1, 0.2]},
    }
    config = parse_config(json.dumps(doc))
    first = run(config, out_dir=tmp_path / "a")[0].read_bytes()
    second = run(config, out_dir=tmp_path / "b")[0].read_bytes()
    assert first == second


def test_run_scan_prefixes_parameter_column(tmp_path):
    doc = dict(VALID_TWO_ATOM, scan={"parameter": "eta0", "values": [0.0, 0.1]})
    config = parse_config(json.dumps(doc))
    data = run(config, out_dir=tmp_path)[0]
    lines = data.read_text().splitlines()
    assert lines[0].startswith("eta0,")
    assert len(lines) == 1 + 2 * 4


def test_run_workers_preserve_order(tmp_path):
    doc = dict(VALID_TWO_ATOM, scan={"parameter": "eta0", "values": [0.0, 0.1, 0.2, 0.3]})
    config = parse_config(json.dumps(doc))
    serial = run(config, out_dir=tmp_path / "s")[0].read_bytes()
    parallel = run(config, out_dir=tmp_path / "p", workers=4)[0].read_bytes()
    assert serial == parallel


def test_run_spectrum_schema(tmp_path):
    doc = {
        "command": "spectrum",
        "geometry": {"n_atoms": 5, "spacing": 0.2, "eta0": 0.3, "n_phonons": 2},
    }
    config = parse_config(json.dumps(doc))
    data = run(config, out_dir=tmp_path)[0]
    lines = data.read_text().splitlines()
    assert lines[0] == "m,re_e,im_e,rate,shift,entropy,separable"
    assert len(lines) == 1 + 75
    separable = [line.split(",")[-1] for line in lines[1:]]
    assert separable.count("1") == 5
    sidecar = json.loads(data.with_name("spectrum.meta.json").read_text())
    assert sidecar["negative_rate_modes"] == []


def test_run_entropy_scan_schema(tmp_path):
    doc = {
        "command": "entropy-scan",
        "geometry": {"n_atoms": 2, "spacing": 0.1, "eta0": 0.3, "n_phonons": 1},
        "scan": {"parameter": "spacing", "values": [0.1, 0.4]},
        "entropy-scan": {"n_list": [2, 3, 4]},
    }
    config = parse_config(json.dumps(doc))
    data = run(config, out_dir=tmp_path)[0]
    lines = data.read_text().splitlines()
    assert lines[0] == "n_atoms,ln_n,max_entropy,d_over_lambda"
    assert len(lines) == 1 + 6
    # spacing scan lands in the d_over_lambda column, not a prefix
    d_values = {line.split(",")[-1] for line in lines[1:]}
    assert len(d_values) == 2


def test_run_find_d0_defaults(tmp_path):
    doc = {"command": "find-d0", "geometry": {"n_atoms": 2, "spacing": 0.2}}
    config = parse_config(json.dumps(doc))
    data = run(config, out_dir=tmp_path)[0]
    lines = data.read_text().splitlines()
    assert lines[0] == "phi,kappa0,d0_over_lambda"
    assert len(lines) == 1 + 17
    mid = lines[9].split(",")  # phi = pi/2 is the middle of the default sweep
    assert float(mid[0]) == pytest.approx(math.pi / 2)
    assert float(mid[1]) == pytest.approx(2.0, abs=0.05)


def test_run_json_format(tmp_path):
    doc = dict(VALID_TWO_ATOM, output={"format": "json", "path": "out"})
    config = parse_config(json.dumps(doc))
    data = run(config, out_dir=tmp_path)[0]
    assert data.suffix == ".json"
    payload = json.loads(data.read_text())
    assert payload["columns"][0] == "parity"
    assert len(payload["rows"]) == 4


def test_run_dump_flags(tmp_path):
    doc = {
        "command": "spectrum",
        "geometry": {"n_atoms": 2, "spacing": 0.2, "eta0": 0.1, "n_phonons": 1},
    }
    config = parse_config(json.dumps(doc))
    paths = run(config, out_dir=tmp_path, dump_basis=True, dump_matrix=True)
    names = {p.name for p in paths}
    assert "spectrum.basis.json" in names
    assert "spectrum.heff_re.csv" in names
    assert "spectrum.heff_im.csv" in names
    basis = json.loads((tmp_path / "spectrum.basis.json").read_text())
    assert len(basis) == 4


# ---------------------------------------------------------------------------
# process-level entry point and exit codes

def test_main_success_and_artifacts(tmp_path, capsys):
    cfg = _write_config(tmp_path, VALID_TWO_ATOM)
    code = main(["two-atom", "--config", str(cfg), "--out", str(tmp_path)])
    assert code == 0
    assert (tmp_path / "two_atom.csv").exists()
    assert (tmp_path / "two_atom.meta.json").exists()


def test_main_config_error_exit_2(tmp_path, capsys):
    cfg = _write_config(tmp_path, {"geometry": {"spacing": 0.2}})
    code = main(["spectrum", "--config", str(cfg), "--out", str(tmp_path)])
    assert code == 2
    record = json.loads(capsys.readouterr().err.strip())
    assert record["error"] == "ConfigError"
    assert "n_atoms" in record["message"]


def test_main_capacity_error_exit_4(tmp_path, capsys):
    doc = {
        "command": "spectrum",
        "geometry": {"n_atoms": 40, "spacing": 0.2, "n_phonons": 10},
    }
    cfg = _write_config(tmp_path, doc)
    code = main(["spectrum", "--config", str(cfg), "--out", str(tmp_path)])
    assert code == 4
    record = json.loads(capsys.readouterr().err.strip())
    assert record["error"] == "CapacityError"


@pytest.mark.filterwarnings("ignore:positivity violation")
def test_main_numerical_error_exit_3(tmp_path, capsys):
    doc = {
        "command": "evolve",
        "geometry": {"n_atoms": 2, "spacing": 0.2, "eta0": 0.2},
        "evolve": {"n_max": 1, "dt": 50.0, "t_final": 5000.0,
                   "initial": {"spin": "symmetric"}},
    }
    cfg = _write_config(tmp_path, doc)
    code = main(["evolve", "--config", str(cfg), "--out", str(tmp_path)])
    assert code == 3
    record = json.loads(capsys.readouterr().err.strip())
    assert record["error"] == "IntegrationError"


def test_main_missing_config_file(tmp_path, capsys):
    code = main(["spectrum", "--config", str(tmp_path / "nope.json")])
    assert code == 2


def test_main_evolve_trajectory_schema(tmp_path):
    doc = {
        "command": "evolve",
        "geometry": {"n_atoms": 2, "spacing": 0.2},
        "evolve": {"n_max": 0, "dt": 0.001, "t_final": 0.5,
                   "initial": {"spin": "symmetric"}},
    }
    cfg = _write_config(tmp_path, doc)
    assert main(["evolve", "--config", str(cfg), "--out", str(tmp_path)]) == 0
    lines = (tmp_path / "evolve.csv").read_text().splitlines()
    assert lines[0] == "t,trace,excited_total,pop_0,pop_1,min_eig,positivity_warning"
    first = lines[1].split(",")
    assert float(first[1]) == pytest.approx(1.0, abs=1e-12)
