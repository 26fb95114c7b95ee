import json
import random
import subprocess
import sys

import pytest

from tatelattice import schema
from tatelattice.cli import main
from tatelattice.engine import Block, InvalidInstanceError, solve
from tatelattice.instances import disc20_instance, hidden_instance


@pytest.fixture
def instance_file(tmp_path):
    path = tmp_path / "inst.json"
    path.write_text(schema.dumps(schema.instance_to_dict(disc20_instance())))
    return path


def test_instance_roundtrip():
    rng = random.Random(0)
    inst, _ = hidden_instance(rng, (Block(1, (5, 0, 1)), Block(1, (-2, 0, 1))), (3, 11), p=7)
    data = schema.instance_to_dict(inst)
    back = schema.instance_from_dict(json.loads(schema.dumps(data)))
    assert schema.instance_to_dict(back) == data


def test_certificate_roundtrip():
    rng = random.Random(1)
    inst, _ = hidden_instance(rng, (Block(1, (4, 0, 1)),), (2, 3), p=5)
    cert = solve(inst)
    data = schema.certificate_to_dict(cert)
    back = schema.certificate_from_dict(json.loads(schema.dumps(data)))
    assert schema.certificate_to_dict(back) == data


def test_unreduced_residues_rejected():
    data = schema.instance_to_dict(disc20_instance())
    data["locals"]["3"][0][0] = -1
    with pytest.raises(InvalidInstanceError):
        schema.instance_from_dict(data)


def test_single_block_h_is_inferred():
    data = schema.instance_to_dict(disc20_instance())
    del data["blocks"][0]["h"]
    assert schema.instance_from_dict(data).blocks[0].h == 1


def test_solve_and_verify(tmp_path, instance_file, capsys):
    out = tmp_path / "cert.json"
    assert main(["solve", str(instance_file), "--output", str(out)]) == 0
    assert main(["verify", str(instance_file), str(out)]) == 0
    assert "accepted" in capsys.readouterr().out


def test_verify_rejects_low_precision(tmp_path, instance_file, capsys):
    out = tmp_path / "cert.json"
    assert main(["solve", str(instance_file), "--precision", "8", "-o", str(out)]) == 0
    assert main(["verify", str(instance_file), str(out)]) == 1
    assert "insufficient precision" in capsys.readouterr().out


def test_verify_rejects_tampered(tmp_path, instance_file, capsys):
    out = tmp_path / "cert.json"
    main(["solve", str(instance_file), "-o", str(out)])
    data = json.loads(out.read_text())
    data["A"][0][1] += 1
    out.write_text(json.dumps(data))
    assert main(["verify", str(instance_file), str(out)]) == 1
    assert "rejected" in capsys.readouterr().out


def test_solve_invalid_instance_exit_code(tmp_path, capsys):
    data = schema.instance_to_dict(disc20_instance())
    data["n"] = 4
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(data))
    assert main(["solve", str(path)]) == 1


def test_solve_output_is_deterministic(tmp_path, instance_file):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    main(["solve", str(instance_file), "--seed", "4", "-o", str(a)])
    main(["solve", str(instance_file), "--seed", "4", "-o", str(b)])
    assert a.read_bytes() == b.read_bytes()


def test_classify_inline(capsys):
    assert main(["classify", "5,0,1", "--primes", "2,3,11"]) == 0
    info = json.loads(capsys.readouterr().out)
    assert info["disc"] == -20
    assert info["primes"]["3"] == "split" and info["primes"]["11"] == "inert"


def test_classify_from_instance_file(instance_file, capsys):
    assert main(["classify", str(instance_file)]) == 0
    assert json.loads(capsys.readouterr().out)["disc"] == -20


def test_classify_rejects_repeated_root(capsys):
    assert main(["classify", "1,2,1"]) == 1


def test_hilbert(capsys):
    assert main(["hilbert", "-1", "-1"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["ramified"] == ["inf", "2"] and out["division"]
    assert main(["hilbert", "-1", "3", "--place", "3"]) == 0
    assert capsys.readouterr().out.strip() == "-1"


def test_demo_counterexample(capsys):
    assert main(["demo-counterexample", "--trials", "5", "--seed", "2"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["stable"] == 0 and out["witnesses"] == 5


def test_demo_rejects_split_algebra(capsys):
    assert main(["demo-counterexample", "--trials", "2", "--a", "1", "--b", "1"]) == 1


def test_console_entry_point(instance_file):
    proc = subprocess.run([sys.executable, "-m", "tatelattice.cli", "hilbert", "2", "5",
                           "--place", "5"], capture_output=True, text=True)
    assert proc.returncode == 0 and proc.stdout.strip() == "-1"


def test_unknown_exit_code(tmp_path, capsys):
    data = {"n": 2, "p": 0, "blocks": [{"r": 1, "f": [4, 0, 1]}], "S": [2],
            "precision": 1, "locals": {"2": [[0, 0], [0, 0]]}}
    path = tmp_path / "low.json"
    path.write_text(json.dumps(data))
    assert main(["solve", str(path)]) == 2
    assert "unknown at 2" in capsys.readouterr().err
