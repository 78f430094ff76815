import csv
import io
import json
import os
import subprocess
import sys
from fractions import Fraction as F

import pytest

from doubling_spectrum.cli import (
    DEFAULT_RANDOM_WIDTH,
    SCHEMA,
    main,
    parse_c,
    parse_grid,
    write_atomic,
)
from doubling_spectrum.dyadic import BinaryFixed
from doubling_spectrum.errors import ParseError


def run(argv, capsys):
    code = main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def test_parse_c():
    assert parse_c("1/3") == F(1, 3)
    assert parse_c("0.25") == F(1, 4)
    r = parse_c("random")
    assert isinstance(r, BinaryFixed) and r.width == DEFAULT_RANDOM_WIDTH
    assert parse_c("random") == r
    assert parse_c("random", seed=1) != r
    for bad in ("3/2", "-1/4", "abc", "1/0", "1"):
        with pytest.raises(ParseError):
            parse_c(bad)


def test_parse_grid():
    assert parse_grid("-1:1:1/2") == [-1.0, -0.5, 0.0, 0.5, 1.0]
    assert parse_grid("0,1/4") == [0.0, 0.25]
    with pytest.raises(ParseError):
        parse_grid("1:0:1")


def test_extremes_csv(capsys):
    code, out, _ = run(["extremes", "--c", "1/3", "--max-period", "6", "--format", "csv"], capsys)
    assert code == 0
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0] == ["c", "period", "word", "average", "is_singular",
                       "is_argmax", "is_argmin", "arc_length"]
    assert all(len(r) == 8 for r in rows)
    assert sum(r[5] == "True" for r in rows[1:]) >= 1


def test_json_schema(capsys):
    code, out, _ = run(["gelfond", "--c", "1/4", "--max-period", "8"], capsys)
    assert code == 0
    doc = json.loads(out)
    assert doc["schema"] == SCHEMA and doc["rows"]


def test_exit_codes(capsys):
    assert run(["spectrum", "--c", "0", "--alpha", "-0.7"], capsys)[0] == 1
    assert run(["extremes", "--c", "3/2"], capsys)[0] == 2
    with pytest.raises(SystemExit) as exc:
        main(["extremes"])
    assert exc.value.code == 2


def test_output_file_and_outdir(tmp_path, capsys, monkeypatch):
    target = tmp_path / "sub" / "x.json"
    assert run(["mcstar", "--c", "1/3", "--N", "20", "-o", str(target)], capsys)[0] == 0
    assert json.loads(target.read_text())["rows"]
    assert [p.name for p in target.parent.iterdir()] == ["x.json"]
    monkeypatch.setenv("DOUBLING_SPECTRUM_OUTDIR", str(tmp_path / "out"))
    assert run(["mcstar", "--c", "1/3", "--N", "20", "--format", "csv"], capsys)[0] == 0
    assert (tmp_path / "out" / "mcstar.csv").exists()


def test_write_atomic_leaves_old_file_on_failure(tmp_path):
    p = tmp_path / "a.txt"
    write_atomic(str(p), "old")

    class Boom:
        def __str__(self):
            raise RuntimeError

    with pytest.raises(TypeError):
        write_atomic(str(p), Boom())
    assert p.read_text() == "old"
    assert os.listdir(tmp_path) == ["a.txt"]


def test_deterministic_output(tmp_path, capsys):
    outs = []
    for k, threads in enumerate(("1", "1", "2")):
        f = tmp_path / f"m{k}.json"
        run(["montecarlo", "--samples", "8", "--N", "200",
             "--threads", threads, "-o", str(f)], capsys)
        outs.append(f.read_bytes())
    assert outs[0] == outs[1]
    assert json.loads(outs[0])["rows"] == json.loads(outs[2])["rows"]


def test_validate(capsys):
    code, _, err = run(["validate"], capsys)
    assert code == 0 and "FAIL" not in err


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "doubling_spectrum", "cover-check", "--max-sum", "6",
                        "--format", "csv"], capture_output=True, text=True)
    assert r.returncode == 0 and r.stdout.startswith("i,j,")
