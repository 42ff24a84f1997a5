import json

import numpy as np
import pytest

from nswiener import Diagonal, IndexWindow, NSOperator, identity, shift
from nswiener.cli import format_operator, main, read_operator, write_operator
from nswiener.diag_core import max_abs_diff, restrict

from conftest import random_banded


@pytest.fixture
def files(tmp_path):
    def put(name, F):
        p = tmp_path / name
        write_operator(F, p)
        return str(p)
    put.dir = tmp_path
    return put


def stationary_file(files):
    W = NSOperator.stationary(IndexWindow(-20, 20), {0: 1.25, 1: 0.5, -1: 0.5})
    return files("w.json", W)


def test_round_trip_is_byte_identical(files, rng):
    for k in range(5):
        path = files(f"f{k}.json", random_banded(rng))
        text = open(path).read()
        assert format_operator(read_operator(path)) == text


def test_multiply_identity_and_shift_example(files, rng):
    w = IndexWindow(0, 2)
    F = random_banded(rng, m=2, lo=0, length=3, offsets=[0, 1])
    # identity on every row F touches; the zero rows beyond would cut F off
    a, b = files("i.json", identity(2, w.expand(1))), files("f.json", F)
    out = str(files.dir / "p.json")
    assert main(["multiply", a, b, out]) == 0
    assert max_abs_diff(read_operator(out), F) == 0

    D1 = NSOperator.from_arrays(w, {1: np.array([1, 2, 3.0]).reshape(3, 1, 1)})
    D2 = NSOperator.from_arrays(w, {1: np.array([4, 5, 6.0]).reshape(3, 1, 1)})
    assert main(["multiply", files("d1.json", D1), files("d2.json", D2), out]) == 0
    P = read_operator(out)
    assert np.array_equal(P.blocks_on(2, IndexWindow(1, 2))[:, 0, 0], [5, 12])


def test_deterministic_outputs(files, rng):
    a, b = files("a.json", random_banded(rng, m=2)), files("b.json", random_banded(rng, m=2))
    outs = [str(files.dir / f"o{k}.json") for k in range(2)]
    for o in outs:
        assert main(["multiply", a, b, o]) == 0
    assert open(outs[0]).read() == open(outs[1]).read()


def test_parse_errors(files, capsys):
    bad = files.dir / "bad.json"
    bad.write_text('{"block_size": 1, "window": [0, 1]}')
    assert main(["norm", str(bad)]) == 2
    assert "'diagonals'" in capsys.readouterr().err
    bad.write_text('{"block_size": 1, "window": [0, 1], "diagonals": {"0": [], "0": []}}')
    assert main(["norm", str(bad)]) == 2
    bad.write_text("{not json")
    assert main(["norm", str(bad)]) == 2
    assert main(["norm", str(files.dir / "missing.json")]) == 2


def test_dimension_mismatch(files):
    w = IndexWindow(0, 3)
    a, b = files("a.json", identity(1, w)), files("b.json", identity(2, w))
    assert main(["multiply", a, b, str(files.dir / "o.json")]) == 3


def test_norm_identity(files, capsys):
    assert main(["norm", files("i.json", identity(1, IndexWindow(0, 4)))]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["wiener"] == 1.0


def test_adjoint(files, rng):
    F = random_banded(rng)
    out = str(files.dir / "adj.json")
    assert main(["adjoint", files("f.json", F), out]) == 0
    assert max_abs_diff(read_operator(out), F.H) == 0


def test_zadeh(files, rng):
    U = random_banded(rng, offsets=[0, 1, 2])
    out = str(files.dir / "z.json")
    assert main(["zadeh", files("u.json", U), out, "--z", "0,0"]) == 0
    assert read_operator(out).support == [0]
    W = random_banded(rng, offsets=[-1, 0, 1])
    assert main(["zadeh", files("w.json", W), out, "--z", "0.5,0"]) == 6
    assert main(["zadeh", files("w.json", W), out, "--z", "zero"]) == 2


def test_factor_and_verify(files, capsys):
    w = stationary_file(files)
    prefix = str(files.dir / "st")
    assert main(["factor", w, prefix, "--pad", "10"]) == 0
    U = read_operator(prefix + ".factor.json")
    mid = IndexWindow(-10, 9)
    assert np.abs(U.blocks_on(0, mid) - 1).max() <= 1e-6
    assert np.abs(U.blocks_on(1, mid) - 0.5).max() <= 1e-6
    report = json.load(open(prefix + ".report.json"))
    for key in ("reconstruction_residual", "min_eig_certificate", "stabilization_gap", "tail_mass"):
        assert key in report
    capsys.readouterr()

    assert main(["verify", w, prefix + ".factor.json", "--t-samples", "0,1.57,3.0"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["t_samples"] == [0, 1.57, 3.0] and doc["passed"]

    d1 = U.diagonal(1)
    blocks = d1.blocks.copy()
    blocks[5] += 1e-3
    bad = NSOperator(1, U.diagonals | {1: Diagonal(d1.window, blocks)}, U.window)
    assert main(["verify", w, files("bad.json", bad)]) == 1


def test_factor_identity(files):
    prefix = str(files.dir / "id")
    assert main(["factor", files("i.json", identity(1, IndexWindow(0, 9))), prefix]) == 0
    assert max_abs_diff(read_operator(prefix + ".factor.json"), identity(1, IndexWindow(0, 9))) == 0


def test_factor_indefinite(files, capsys):
    w = IndexWindow(0, 10)
    W = restrict(shift(1, w) + shift(1, w).H, w)
    assert main(["factor", files("zz.json", W), str(files.dir / "zz")]) == 4
    assert "certificate" in capsys.readouterr().err


def test_factor_not_stabilized(files):
    W = NSOperator.stationary(IndexWindow(0, 20), {0: 1 + 0.999 ** 2, 1: 0.999, -1: 0.999})
    assert main(["factor", files("slow.json", W), str(files.dir / "s"),
                 "--pad", "1", "--tol", "1e-12"]) == 5


def test_factor_not_self_adjoint(files):
    w = IndexWindow(0, 5)
    assert main(["factor", files("u.json", identity(1, w) + shift(1, w)), str(files.dir / "u")]) == 6
