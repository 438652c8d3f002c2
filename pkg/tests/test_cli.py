import io
import json
import shutil
import subprocess
import sys

import pytest

from ucpo.cli import main
from ucpo.schema import SCHEMA_FILE, SEED_FILE, data_path


def run(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = main(list(argv), out=out, err=err)
    return code, out.getvalue(), err.getvalue()


@pytest.fixture
def bad_ttl(tmp_path):
    p = tmp_path / "bad.ttl"
    p.write_text('@prefix ucpo: <http://vivocaz.fr/ucpo/ns#> .\nucpo:a ucpo:b "open .\n')
    return str(p)


def test_load_and_metrics_json():
    code, out, _ = run("load", SCHEMA_FILE, SEED_FILE, "--then", "metrics", "--json")
    assert code == 0
    doc = json.loads(out[out.index("{"):])
    assert doc["schema"] == {"attributeRichness": 0.421053, "inheritanceRichness": 0.578947,
                             "relationshipRichness": 0.55102, "axiomClassRatio": 30.552632,
                             "classRelationRatio": 0.77551}
    assert doc["base"]["individualCount"] == 159
    assert doc["expressivity"] == "ALH(D)"


def test_metrics_text():
    code, out, _ = run("metrics")
    assert code == 0
    assert "relationshipRichness 0.551020" in " ".join(out.split())
    assert out.rstrip().endswith("ALH(D)")


def test_query_listing():
    code, out, _ = run("query", "listing1.rq")
    lines = out.splitlines()
    assert code == 0 and lines[0] == "?user\t?brand"
    rows = [ln.split("\t") for ln in lines[1:]]
    assert 0 < len(rows) <= 10
    assert [r[0] for r in rows] == sorted(r[0] for r in rows)


def test_query_inline():
    code, out, _ = run("query", "-e", "SELECT ?u WHERE { ?u a ucpo:User . } ORDER BY ?u LIMIT 2")
    assert code == 0 and out.splitlines()[1] == "<http://vivocaz.fr/ucpo/ns#claire>"


def test_recommend_louis():
    code, out, _ = run("recommend", "--user", "louis", "--profile", "louisProfile", "--k", "3")
    assert code == 0
    recs = json.loads(out)
    assert {r["model"] for r in recs} == {"Peugeot 206", "Peugeot 207", "Peugeot 208"}
    for r in recs:
        assert round(sum(x for _, x in r["explanation"]), 4) == pytest.approx(r["score"], abs=2e-4)


def test_recommend_prefixed_names():
    a = run("recommend", "--user", "ucpo:pierre", "--profile", "ucpo:pierreProfile")
    b = run("recommend", "--user", "<http://vivocaz.fr/ucpo/ns#pierre>", "--profile", "pierreProfile")
    assert a == b and a[0] == 0


def test_validate_and_cq_clean():
    code, out, _ = run("validate", "--then", "cq")
    assert code == 0
    assert "0 violation(s)" in out and "8/8 passed" in out


def test_serialize_round_trip(tmp_path):
    target = tmp_path / "all.ttl"
    assert run("serialize", "--out", str(target))[0] == 0
    code, out, _ = run("--schema", str(target), "--data", str(target), "metrics", "--json")
    assert code == 0 and json.loads(out)["base"]["totalAxiomCount"] == 1161


def test_serialize_stdout_is_parseable():
    code, out, _ = run("serialize")
    assert code == 0 and out.startswith("@prefix ")


def test_then_chain_equals_separate_runs():
    chained = run("metrics", "--then", "query", "listing1.rq", "--then", "recommend",
                  "--user", "henri", "--profile", "henriFamily", "--k", "2")
    parts = [run("metrics"), run("query", "listing1.rq"),
             run("recommend", "--user", "henri", "--profile", "henriFamily", "--k", "2")]
    assert chained[0] == 0
    assert chained[1] == "".join(p[1] for p in parts)


@pytest.mark.parametrize("argv", [
    ("metrics", "--json"), ("query", "listing1.rq"), ("cq",), ("serialize",),
    ("recommend", "--user", "henri", "--profile", "henriPro"),
])
def test_byte_identical_repeats(argv):
    assert run(*argv) == run(*argv)


# -- exit codes ----------------------------------------------------------------

def test_missing_file():
    code, _, err = run("load", "/nonexistent/x.ttl")
    assert code == 2 and "no such file" in err


def test_bad_turtle(bad_ttl):
    code, _, err = run("load", bad_ttl)
    assert code == 2 and f"{bad_ttl}:2:15: syntax: unterminated string" in err
    code, _, err = run("--data", bad_ttl, "metrics")
    assert code == 2


def test_bad_query(tmp_path):
    q = tmp_path / "q.rq"
    q.write_text("SELECT ?x\nWHERE { ?x a ucpo:User . OPTIONAL { ?x ucpo:p ?y } }")
    code, _, err = run("query", str(q))
    assert code == 2 and f"{q}:2:" in err and "unsupported" in err
    assert run("query", "-e", "SELECT ?y WHERE { ?x a ucpo:User }")[0] == 2


def test_query_arguments():
    assert run("query")[0] == 2
    assert run("query", "listing1.rq", "-e", "SELECT * WHERE { ?s ?p ?o }")[0] == 2


def test_unknown_user_and_profile():
    code, _, err = run("recommend", "--user", "nobody", "--profile", "louisProfile")
    assert code == 1 and "unknown user" in err
    code, _, err = run("recommend", "--user", "louis", "--profile", "henriPro")
    assert code == 1 and "no profile" in err
    assert run("recommend", "--user", "zz:louis", "--profile", "louisProfile")[0] == 2
    assert run("recommend", "--user", "louis", "--profile", "louisProfile", "--k", "0")[0] == 2


def test_usage_errors():
    assert run()[0] == 2
    assert run("frobnicate")[0] == 2
    assert run("metrics", "--bogus")[0] == 2
    assert run("--help")[0] == 0


def test_validation_violations_exit_one(tmp_path):
    extra = tmp_path / "extra.ttl"
    extra.write_text("@prefix ucpo: <http://vivocaz.fr/ucpo/ns#> .\n"
                     "ucpo:henri ucpo:hasPet ucpo:rex .\n")
    seed = str(data_path(SEED_FILE))
    code, out, _ = run("--data", seed, "--data", str(extra), "validate")
    assert code == 1 and "unknown-property" in out and "1 violation(s)" in out


def test_cq_regression_exit_one(tmp_path):
    seed = data_path(SEED_FILE).read_text(encoding="utf-8")
    broken = tmp_path / "seed.ttl"
    broken.write_text(seed.replace("vo:hasUseCase vo:familyTravel, vo:leisure ;",
                                   "vo:hasUseCase vo:familyTravel ;", 1))
    assert broken.read_text() != seed
    code, out, _ = run("--data", str(broken), "cq")
    assert code == 1 and "7/8 passed" in out


def test_failed_command_stops_chain():
    code, out, _ = run("recommend", "--user", "nobody", "--profile", "x", "--then", "metrics")
    assert code == 1 and out == ""


def test_recommend_config_override(tmp_path, monkeypatch):
    conf = tmp_path / "w.conf"
    conf.write_text("weight.brandAffinity = 1\nweight.modelAffinity = 0\n"
                    "weight.attributeFit = 0\nweight.contextFit = 0\n")
    monkeypatch.setenv("UCPO_CONFIG", str(conf))
    code, out, _ = run("recommend", "--user", "louis", "--profile", "louisProfile")
    assert code == 0 and {r["score"] for r in json.loads(out)} == {1.0}
    conf.write_text("weight.brandAffinity = 2\n")
    assert run("recommend", "--user", "louis", "--profile", "louisProfile")[0] == 2


@pytest.mark.skipif(shutil.which("ucpo") is None, reason="console script not installed")
def test_console_script():
    proc = subprocess.run(["ucpo", "metrics", "--json"], capture_output=True, text=True)
    assert proc.returncode == 0 and json.loads(proc.stdout)["expressivity"] == "ALH(D)"


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "ucpo.cli", "query", "listing1.rq"],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and proc.stdout.startswith("?user\t?brand\n")
