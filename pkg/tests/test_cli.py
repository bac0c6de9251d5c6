import json

import pytest

from fatminors.cli import main, run_corpus
from fatminors.corpus import k4_trap, k4minus_trap
from fatminors.graph import cycle_graph, format_edge_list, path_graph


def write(tmp_path, name, G):
    p = tmp_path / name
    p.write_text(format_edge_list(G))
    return str(p)


def test_decompose_path_roundtrip(tmp_path, capsys):
    g = write(tmp_path, "p.txt", path_graph(100))
    out = tmp_path / "o"
    assert main(["decompose", g, "--target", "k4minus", "--fat", "1", "--out", str(out)]) == 0
    rep = json.loads((out / "report.json").read_text())
    assert rep["branch"] == "decomposition" and rep["orw"] <= 43
    assert (out / "bag_radii.png").stat().st_size > 0
    dec = str(out / "decomposition.txt")
    assert main(["verify", g, dec, "--kind", "decomposition"]) == 0
    assert main(["verify", g, str(out / "qi.txt"), "--kind", "qi", "--host", dec]) == 0


def test_decompose_deterministic(tmp_path):
    g = write(tmp_path, "c.txt", cycle_graph(120))
    for d in ("a", "b"):
        assert main(["decompose", g, "--out", str(tmp_path / d)]) == 0
    assert (tmp_path / "a/decomposition.txt").read_text() == (tmp_path / "b/decomposition.txt").read_text()


@pytest.mark.parametrize("target,G", [("k4minus", k4minus_trap(60)), ("k4", k4_trap(40))])
def test_trap_witness_verifies(tmp_path, target, G):
    g = write(tmp_path, "t.txt", G)
    out = tmp_path / "o"
    code = main(["decompose", g, "--target", target, "--out", str(out)])
    if target == "k4minus":
        assert code == 10
        assert main(["verify", g, str(out / "witness.txt"), "--kind", "model"]) == 0
    else:
        # at production constants the single seed ball swallows the trap
        assert code == 0


def test_malformed_input(tmp_path, capsys):
    bad = tmp_path / "bad.txt"
    bad.write_text("0 1\n1 x\n")
    assert main(["decompose", str(bad)]) == 2
    assert "line 2" in capsys.readouterr().err


def test_verify_mutations(tmp_path, capsys):
    g = write(tmp_path, "p.txt", path_graph(100))
    out = tmp_path / "o"
    main(["decompose", g, "--out", str(out)])
    dec = (out / "decomposition.txt").read_text()
    lines = [ln if not ln.startswith("bag") else " ".join(t for t in ln.split() if t != "50") for ln in dec.splitlines()]
    mut = tmp_path / "m.txt"
    mut.write_text("\n".join(lines) + "\n")
    capsys.readouterr()
    assert main(["verify", g, str(mut), "--kind", "decomposition"]) == 1
    assert "(H1)" in capsys.readouterr().out
    qi = (out / "qi.txt").read_text().splitlines()
    M, A = qi[0].split()
    qi[0] = f"{M} 0"
    mq = tmp_path / "q.txt"
    mq.write_text("\n".join(qi) + "\n")
    assert main(["verify", g, str(mq), "--kind", "qi", "--host", str(out / "decomposition.txt")]) == 1
    assert "fails" in capsys.readouterr().out


def test_verify_kind_mismatch(tmp_path):
    g = write(tmp_path, "p.txt", path_graph(30))
    out = tmp_path / "o"
    main(["decompose", g, "--out", str(out)])
    assert main(["verify", g, str(out / "decomposition.txt"), "--kind", "model"]) == 2
    assert main(["verify", g, str(out / "qi.txt"), "--kind", "decomposition"]) == 2


def test_budget_exit(tmp_path, monkeypatch):
    g = write(tmp_path, "c.txt", cycle_graph(4300))
    monkeypatch.setenv("FATMINORS_BUDGET", "0")
    assert main(["decompose", g, "--target", "k4", "--scaled-constants", "4", "--json"]) == 20


def test_scaled_constants_rejected(tmp_path):
    g = write(tmp_path, "p.txt", path_graph(5))
    assert main(["decompose", g, "--target", "k4", "--scaled-constants", "2"]) == 2
    assert main(["decompose", g, "--target", "k4minus", "--scaled-constants", "4"]) == 2


def test_corpus_empty_and_small(tmp_path, capsys):
    assert main(["corpus", "--spec", "", "--out", str(tmp_path / "e")]) == 0
    assert (tmp_path / "e/summary.tsv").read_text().count("\n") == 1
    assert main(["corpus", "--scale", "small", "--out", str(tmp_path / "s")]) == 0
    rows = (tmp_path / "s/summary.tsv").read_text().splitlines()
    assert len(rows) > 30 and all("\ttrue\t" in r for r in rows[1:])
    assert (tmp_path / "s/corpus.png").stat().st_size > 0


def test_corpus_budget_row():
    rows = run_corpus("cycle", "small", (1,), ("k4",), scaled=4, budget=0)
    assert rows and all(r["branch"] in ("decomposition", "budget-error") for r in rows)
