import json
import math
import os

import pytest
from hypothesis import given, strategies as st

from leroycm import cli, io
from leroycm.errors import SchemaError
from leroycm.io import (
    CurveArtifactRecord,
    ResultCache,
    atomic_write,
    curve_csv,
    curve_filename,
    read_curve_csv,
    read_record,
    write_curve_csv,
    write_record,
)
from leroycm.mlr import MLRParams

finite = st.floats(allow_nan=False, allow_infinity=False)


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


class TestCSV:
    def test_filename(self):
        assert curve_filename(MLRParams.of("1/2", 1, 2)) == "m_1-2_1_2.csv"
        assert curve_filename(MLRParams.of("3/10", "4/3", 3)) == "m_3-10_4-3_3.csv"

    def test_format(self):
        text = curve_csv([(0.1, -1 / 3, 0.0)])
        assert text == "y,m,abs_err\n0.10000000000000001,-0.33333333333333331,0\n"

    @given(st.lists(st.tuples(finite, finite, finite), max_size=20))
    def test_round_trip_is_byte_stable(self, rows):
        text = curve_csv(rows)
        parsed = list(__import__("csv").reader(text.splitlines()))[1:]
        back = [tuple(float(v) for v in r) for r in parsed]
        assert back == [tuple(float(v) for v in r) for r in rows]
        assert curve_csv(back) == text

    def test_file_round_trip(self, tmp_path):
        p = MLRParams.of("1/3", 1, 2)
        rows = [(0.0, 0.5, 1e-17), (0.25, 0.125, 2e-17)]
        path = write_curve_csv(tmp_path, p, rows)
        assert read_curve_csv(path) == rows
        first = path.read_bytes()
        write_curve_csv(tmp_path, p, read_curve_csv(path))
        assert path.read_bytes() == first and b"\r" not in first

    def test_bad_header(self, tmp_path):
        f = tmp_path / "x.csv"
        f.write_text("y,value,err\n1,2,3\n")
        with pytest.raises(SchemaError):
            read_curve_csv(f)


class TestRecord:
    def make(self, **kw):
        return CurveArtifactRecord(generator="weight", params={"alpha": "1/2", "beta": "1", "n": 2},
                                   columns=("y", "m", "abs_err"), rows=((0.0, 1.0, 0.0), (1.0, 0.5, 1e-16)),
                                   extra={"radius": 2.0}, **kw)

    def test_round_trip(self, tmp_path):
        rec = self.make()
        path = write_record(tmp_path / "r.json", rec)
        assert read_record(path) == rec
        assert json.loads(path.read_text())["schema_version"] == 1

    def test_unknown_version_rejected(self, tmp_path):
        d = json.loads(self.make().to_json())
        for v in (2, 0, None, "1"):
            d["schema_version"] = v
            with pytest.raises(SchemaError):
                CurveArtifactRecord.from_dict(d)
        del d["schema_version"]
        with pytest.raises(SchemaError):
            CurveArtifactRecord.from_dict(d)

    def test_not_json(self):
        with pytest.raises(SchemaError):
            CurveArtifactRecord.from_json("[1, 2")
        with pytest.raises(SchemaError):
            CurveArtifactRecord.from_json("[1, 2]")

    def test_deterministic(self, monkeypatch):
        monkeypatch.delenv("SOURCE_DATE_EPOCH", raising=False)
        a, b = self.make().to_json(), self.make().to_json()
        assert a == b and '"created_at": "1970-01-01T00:00:00Z"' in a
        monkeypatch.setenv("SOURCE_DATE_EPOCH", "1700000000")
        assert self.make().created_at == "2023-11-14T22:13:20Z"


class TestAtomicWrite:
    def test_replaces(self, tmp_path):
        f = tmp_path / "sub" / "a.txt"
        atomic_write(f, "one\n")
        atomic_write(f, "two\n")
        assert f.read_text() == "two\n"
        assert os.listdir(f.parent) == ["a.txt"]

    def test_failure_keeps_old_content(self, tmp_path):
        f = tmp_path / "a.txt"
        atomic_write(f, "keep\n")
        with pytest.raises(TypeError):
            atomic_write(f, 12345)
        assert f.read_text() == "keep\n"
        assert os.listdir(tmp_path) == ["a.txt"]


class TestCache:
    key = {"kind": "cm bound", "n": 1, "alpha": "1/2"}

    def rec(self):
        return CurveArtifactRecord(generator="cm bound", params={"n": 1}, columns=("alpha", "M"),
                                   rows=(("1/2", 0.5),))

    def test_miss_put_hit(self, tmp_path):
        c = ResultCache(tmp_path)
        assert c.get(self.key) is None
        c.put(self.key, self.rec())
        assert c.get(self.key) == self.rec()
        assert c.get({**self.key, "alpha": "1/3"}) is None

    def test_env_override(self, tmp_path, monkeypatch):
        monkeypatch.setenv(io.CACHE_ENV, str(tmp_path / "env"))
        assert ResultCache().directory == tmp_path / "env"

    def test_stale_entries_are_misses(self, tmp_path):
        c = ResultCache(tmp_path)
        c.path(self.key).parent.mkdir(parents=True, exist_ok=True)
        c.path(self.key).write_text(json.dumps({"schema_version": 99}))
        assert c.get(self.key) is None
        c.path(self.key).write_text(json.dumps({"schema_version": 1}))
        assert c.get(self.key) is None

    def test_tool_version_is_part_of_the_key(self, monkeypatch):
        d1 = ResultCache.digest(self.key)
        monkeypatch.setattr(io, "tool_version", lambda: "99.0")
        assert ResultCache.digest(self.key) != d1


class TestEvalCommand:
    def test_at_zero(self, capsys):
        code, out, _ = run(capsys, "eval", "--alpha", "1/2", "--beta", "1", "--n", "2", "--x", "0", "--json")
        assert code == 0 and json.loads(out)["value"] == 1.0

    def test_erfc_value(self, capsys):
        code, out, _ = run(capsys, "eval", "--alpha", "1/2", "--beta", "1", "--n", "1", "--x", "1", "--json")
        assert code == 0
        assert json.loads(out)["value"] == pytest.approx(math.e * math.erfc(1.0), rel=1e-14)

    def test_cross_check(self, capsys):
        code, out, _ = run(capsys, "eval", "--alpha", "1/2", "--beta", "1", "--n", "2", "--x", "1",
                           "--cross-check", "--json")
        rep = json.loads(out)
        assert code == 0 and rep["route_difference"] <= 1e-9
        code, out, _ = run(capsys, "eval", "--alpha", "1/2", "--beta", "1", "--n", "2", "--x", "1",
                           "--cross-check")
        assert code == 0 and "hypergeometric route" in out

    def test_route_disagreement_exit_code(self, capsys):
        code, _, _ = run(capsys, "eval", "--alpha", "1/3", "--beta", "1/2", "--n", "2", "--x", "6",
                         "--cross-check", "--cross-tol", "1e-300")
        assert code == 4

    def test_convergence_failure_exit_code(self, capsys):
        code, _, err = run(capsys, "eval", "--alpha", "1/3", "--beta", "1/2", "--n", "1", "--x", "10",
                           "--precision", "standard")
        assert code == 3 and json.loads(err)["exit_code"] == 3

    def test_bad_arguments(self, capsys):
        code, _, err = run(capsys, "eval", "--alpha", "1/2", "--beta", "1/0", "--n", "2", "--x", "1")
        assert code == 2 and "error" in json.loads(err)
        code, _, _ = run(capsys, "eval", "--alpha", "3/2", "--beta", "1", "--n", "2", "--x", "1")
        assert code == 2
        with pytest.raises(SystemExit) as e:
            cli.main(["eval", "--alpha", "1/2", "--beta", "1", "--n", "2", "--x", "1", "--tol", "-1"])
        assert e.value.code == 2


class TestWeightCommand:
    def test_arcsine_row(self, capsys, tmp_path):
        code, _, _ = run(capsys, "weight", "--alpha", "1/2", "--beta", "1", "--n", "2", "--grid", "100",
                         "--out", str(tmp_path))
        assert code == 0
        rows = read_curve_csv(tmp_path / "m_1-2_1_2.csv")
        assert len(rows) == 100
        m1 = dict((y, m) for y, m, _ in rows)[1.0]
        assert m1 == pytest.approx(2 / (math.pi * math.sqrt(3)), rel=1e-13)

    def test_figure_00(self, capsys, tmp_path):
        code, out, _ = run(capsys, "weight", "--figure", "00", "--grid", "200", "--out", str(tmp_path))
        assert code == 0
        for n in (2, 3, 4, 5):
            rows = read_curve_csv(tmp_path / f"m_1-{n}_1_{n}.csv")
            assert rows[0][0] == 0.0 and max(y for y, _, _ in rows) < n
            assert min(m for _, m, _ in rows) > 0
        assert out.count("negative intervals: none") == 4

    def test_figure_1_reports_negative_part(self, capsys, tmp_path):
        code, out, _ = run(capsys, "weight", "--figure", "1", "--grid", "300", "--out", str(tmp_path))
        assert code == 0 and len(list(tmp_path.glob("m_3-7_*_2.csv"))) == 4
        line = next(s for s in out.splitlines() if s.startswith("(3/7, 1/2, 2)"))
        assert "(0.086, 1.666)" in line

    def test_json_output_is_deterministic(self, capsys, tmp_path):
        args = ["weight", "--alpha", "1/3", "--beta", "1", "--n", "2", "--grid", "50", "--json"]
        run(capsys, *args, "--out", str(tmp_path / "a"))
        run(capsys, *args, "--out", str(tmp_path / "b"))
        a = (tmp_path / "a" / "m_1-3_1_2.json").read_bytes()
        assert a == (tmp_path / "b" / "m_1-3_1_2.json").read_bytes()
        rec = read_record(tmp_path / "a" / "m_1-3_1_2.json")
        assert rec.generator == "weight" and len(rec.rows) == 50 and rec.extra["radius"] == math.inf

    def test_super_rejected(self, capsys, tmp_path):
        code, _, err = run(capsys, "weight", "--alpha", "1/2", "--beta", "1", "--n", "3", "--out", str(tmp_path))
        assert code == 2 and "radius of convergence 0" in json.loads(err)["message"]

    def test_usage(self, capsys, tmp_path):
        with pytest.raises(SystemExit) as e:
            cli.main(["weight", "--figure", "1", "--csv", "--json"])
        assert e.value.code == 2
        with pytest.raises(SystemExit):
            cli.main(["weight", "--figure", "1", "--grid", "1"])
        code, _, _ = run(capsys, "weight", "--alpha", "1/2", "--out", str(tmp_path))
        assert code == 2


class TestVerifyCommand:
    def test_pass_and_report(self, capsys, tmp_path):
        out_file = tmp_path / "v.json"
        code, out, _ = run(capsys, "verify", "--alpha", "1/2", "--beta", "1", "--n", "2", "--x", "0,1",
                           "--s", "2", "--out", str(out_file))
        assert code == 0 and "PASS" in out
        rec = read_record(out_file)
        assert rec.extra["pass"] and len(rec.rows) == 3

    def test_residual_exit_code(self, capsys):
        code, out, _ = run(capsys, "verify", "--alpha", "1/3", "--beta", "1", "--n", "2", "--x", "0.5,2,5",
                           "--no-recursion", "--tol", "1e-300")
        assert code == 4 and "FAIL" in out

    def test_precondition(self, capsys):
        code, _, _ = run(capsys, "verify", "--alpha", "1/2", "--beta", "1/2", "--n", "2", "--x", "1")
        assert code == 2


class TestCmCommands:
    def test_scan(self, capsys, tmp_path):
        code, out, _ = run(capsys, "cm", "scan", "--alpha", "3/7", "--beta", "1/2", "--n", "2",
                           "--out", str(tmp_path / "s.json"))
        assert code == 0 and "NEGATIVE_FOUND" in out and "(0.086, 1.666)" in out
        rec = read_record(tmp_path / "s.json")
        (a, b), = rec.rows
        assert abs(a - 0.086) <= 0.01 and abs(b - 1.666) <= 0.01

    def test_bound_with_cache(self, capsys, tmp_path, monkeypatch):
        monkeypatch.setenv(io.CACHE_ENV, str(tmp_path / "cache"))
        args = ["cm", "bound", "--n", "1", "--alphas", "1/5,1/4,1/3,1/2"]
        code, out, _ = run(capsys, *args, "--out", str(tmp_path / "c1.json"))
        assert code == 0 and out.count("(computed)") == 4
        rec = read_record(tmp_path / "c1.json")
        for alpha, M in rec.rows:
            num, den = map(int, alpha.split("/"))
            assert abs(M - num / den) <= 2e-2
        assert all(s["certificate"]["verdict_negative"] == "NEGATIVE_FOUND" for s in rec.extra["samples"])
        assert len(list((tmp_path / "cache").glob("*.json"))) == 4
        code, out, _ = run(capsys, *args, "--out", str(tmp_path / "c2.json"))
        assert code == 0 and out.count("(cached)") == 4
        assert (tmp_path / "c1.json").read_bytes() == (tmp_path / "c2.json").read_bytes()

    def test_bound_rejects_alpha_at_one_over_n(self, capsys):
        code, _, err = run(capsys, "cm", "bound", "--n", "2", "--alphas", "1/2", "--no-cache")
        assert code == 2 and "1/2" in json.loads(err)["message"]

    def test_derivs(self, capsys):
        code, out, _ = run(capsys, "cm", "derivs", "--alpha", "1/2", "--beta", "1", "--n", "2", "--order", "3")
        assert code == 0 and "sign pattern holds" in out
        code, out, _ = run(capsys, "cm", "derivs", "--alpha", "1/2", "--beta", "1/2", "--n", "2")
        assert code == 0 and "sign pattern fails" in out
