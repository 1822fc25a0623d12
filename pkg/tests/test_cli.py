import json

import pytest

from lbflow.cli import main
from lbflow.specfile import loads


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def test_check_radial_passes(capsys, corpus):
    code, out, _ = run(capsys, "check", corpus / "radial.spec")
    assert code == 0 and "exponentiability: exponentiable-at-point" in out


def test_check_quadratic_rejected(capsys, corpus, tmp_path):
    js = tmp_path / "r.json"
    code, out, _ = run(capsys, "--json", js, "check", corpus / "quadratic_reject.spec")
    assert code == 1
    doc = json.loads(js.read_text())
    by = {c["name"]: c for c in doc["checks"]}
    assert by["m_squared_zero"]["verdict"] == "fail"
    assert by["m_squared_zero"]["witness"]["value"] == "4*u1[1]^2"
    assert doc["schema_version"] == 1 and doc["seed"] == 42


def test_check_phi_cycle(capsys, corpus):
    code, out, _ = run(capsys, "check", corpus / "phi_cycle.spec")
    assert code == 1 and "theorem2_iii_cycle_condition: fail" in out


def test_check_unknown_exit(capsys, tmp_path):
    p = tmp_path / "u.spec"
    p.write_text('n = 1 ; m = 1 ; xi1 = "0" ; eta0_1 = "u1[2]^2"\n')
    code, out, _ = run(capsys, "check", p)
    assert code == 2


def test_parse_error_position(capsys, tmp_path):
    p = tmp_path / "bad.spec"
    p.write_text('n = 1 ; m = 2\nxi1 = "0" ; eta0_1 = "u1[" ; eta0_2 = "0"\n')
    code, _, err = run(capsys, "check", p)
    assert code == 3 and "line 2" in err and "offset 3" in err


def test_flow_closed_and_rk4(capsys, corpus):
    code, out, _ = run(capsys, "flow", corpus / "radial.spec", "--t", "0.1", "--point", "0,0,0,1,2")
    assert code == 0 and out.splitlines()[0] == "(0.0, 0.2, 0.2, 1.0, 2.0)"
    code, out, _ = run(capsys, "flow", corpus / "radial.spec", "--t", "0.1", "--point", "0,0,0,1,2", "--mode", "rk4")
    vals = [float(v) for v in out.splitlines()[0].strip("()").split(",")]
    assert code == 0 and max(abs(a - b) for a, b in zip(vals, [0, 0.2, 0.2, 1, 2])) < 1e-9
    code, out, _ = run(capsys, "flow", corpus / "radial.spec", "--t", "0", "--point", "0,0,0,1,2")
    assert out.splitlines()[0] == "(0.0, 0.0, 0.0, 1.0, 2.0)"


def test_flow_germ_csv(capsys, corpus, tmp_path):
    csv = tmp_path / "g.csv"
    code, out, _ = run(capsys, "flow", corpus / "translation.spec", "--t", "0.5", "--germ", "sin(x1); x1",
                       "--window", "0,1", "--germ-samples", "5", "--csv", csv)
    assert code == 0
    rows = csv.read_text().splitlines()
    assert rows[0] == "t,x,f1,f2,f1t,f2t,psi_t" and len(rows) == 6


def test_construct_roundtrip(capsys, tmp_path):
    for args in (["--family", "radial", "--F1", "l^2/2", "--g", "0"],
                 ["--family", "affine", "--gamma", "1", "--F1", "l^2/2", "--g", "l"]):
        code, out, _ = run(capsys, "construct", *args)
        assert code == 0
        p = tmp_path / "c.spec"
        p.write_text(out)
        assert run(capsys, "check", p)[0] == 0


def test_construct_radial_matches_corpus(capsys, corpus):
    code, out, _ = run(capsys, "construct", "--family", "radial", "--F1", "l^2/2", "--g", "0")
    a, b = loads(out), loads((corpus / "radial.spec").read_text())
    assert a.eta0 == b.eta0 and a.xi == b.xi


def test_construct_general_tangency_error(capsys):
    code, _, err = run(capsys, "construct", "--family", "general", "--lam", "u2[1]", "--slope", "l",
                       "--q0", "l", "--F1", "l")
    assert code == 3 and "constant along" in err


def test_construct_unintegrated_variant_fails(capsys):
    code, _, _ = run(capsys, "construct", "--family", "affine", "--F1", "l^2/2", "--g", "l", "--unintegrated")
    assert code == 1


def test_prolong_and_truncate(capsys, corpus):
    code, out, _ = run(capsys, "prolong", corpus / "symmetrized.spec", "--order", "2")
    assert code == 0 and "eps u1[2] = 1/2*u1[4] - 1/2*u2[4]" in out
    code, out, _ = run(capsys, "truncate", corpus / "symmetrized.spec")
    assert code == 0 and out.startswith("k = 2")


def test_verify(capsys, corpus):
    for name in ("radial.spec", "affine.spec", "symmetrized.spec", "translation.spec"):
        code, out, _ = run(capsys, "verify", corpus / name)
        assert code == 0, out


def test_global_flags_after_subcommand(capsys, corpus, tmp_path):
    js = tmp_path / "a.json"
    run(capsys, "check", corpus / "radial.spec", "--seed", "7", "--samples", "20", "--json", js)
    assert json.loads(js.read_text())["seed"] == 7


def test_json_is_deterministic(capsys, corpus, tmp_path):
    outs = []
    for i in range(2):
        js = tmp_path / f"{i}.json"
        run(capsys, "--seed", "42", "--json", js, "check", corpus / "affine.spec")
        outs.append(js.read_bytes())
    assert outs[0] == outs[1]


EXPECTED_EXIT = {
    "affine": 0, "affine_unintegrated": 1, "phi_admissible": 0, "phi_cycle": 1, "quadratic_reject": 1,
    "radial": 0, "radial_xi": 0, "symmetrized": 0, "translation": 0,
}


@pytest.mark.parametrize("name", sorted(EXPECTED_EXIT))
def test_corpus_exit_codes(capsys, corpus, name):
    code, out, _ = run(capsys, "check", corpus / f"{name}.spec")
    assert code == EXPECTED_EXIT[name], out


def test_corpus_is_complete(corpus):
    assert sorted(p.stem for p in corpus.glob("*.spec")) == sorted(EXPECTED_EXIT)


def test_benchmark_smoke(capsys):
    import importlib.util
    from pathlib import Path

    path = Path(__file__).resolve().parents[1] / "benchmarks" / "bench_kernels.py"
    spec = importlib.util.spec_from_file_location("bench_kernels", path)
    mod = importlib.util.module_from_spec(spec)
    spec.loader.exec_module(mod)
    mod.main(["--repeat", "1", "--points", "200", "--t", "0.05"])
    assert "rk4" in capsys.readouterr().out
