import random

import pytest

from collabanon.attacks import homogeneity_rate
from collabanon.cli import main
from collabanon.graph import parse_network, serialize_network
from collabanon.kanon import verify_k_anonymity
from collabanon.ldiversity import diversity_partition
from oracles import random_graph


@pytest.fixture
def g20(tmp_path):
    g = random_graph(random.Random(20), 20, 0.15, "AB", ["flu", "hiv", "cold", "gout"])
    path = tmp_path / "g.txt"
    path.write_text(serialize_network(g))
    return path


def run(capsys, *argv):
    try:
        rc = main([str(a) for a in argv])
    except SystemExit as exc:
        rc = exc.code
    out, err = capsys.readouterr()
    return rc, out, err


def test_anonymize_k_then_verify(capsys, g20, tmp_path):
    out = tmp_path / "k.txt"
    assert run(capsys, "anonymize-k", "--input", g20, "--k", 2, "--output", out)[0] == 0
    rc, text, _ = run(capsys, "verify", "--input", out, "--k", 2)
    assert rc == 0 and "k-anonymous: true" in text
    assert verify_k_anonymity(parse_network(out.read_text()), 2)


def test_verify_fails_on_raw_graph(capsys, g20):
    rc, text, _ = run(capsys, "verify", "--input", g20, "--k", 5)
    assert rc == 1 and "k-anonymous: false" in text


def test_anonymize_l_then_attack(capsys, g20, tmp_path):
    out = tmp_path / "l.txt"
    assert run(capsys, "anonymize-l", "--input", g20, "--l", 2, "--k", 2, "--output", out)[0] == 0
    rc, text, _ = run(capsys, "attack", "--mode", "homogeneity", "--input", out)
    assert rc == 0 and "certain-inference rate: 0" in text
    pub = parse_network(out.read_text())
    assert homogeneity_rate(pub, diversity_partition(pub)) == 0


def test_outputs_deterministic(capsys, g20, tmp_path):
    a, b = tmp_path / "a.txt", tmp_path / "b.txt"
    for path in (a, b):
        run(capsys, "anonymize-l", "--input", g20, "--l", 2, "--k", 3, "--seed", 4, "--output", path)
    assert a.read_bytes() == b.read_bytes()
    assert run(capsys, "naive", "--input", g20, "--seed", 9)[1] == run(capsys, "naive", "--input", g20, "--seed", 9)[1]


def test_anon_ip_truncate(capsys, tmp_path):
    f = tmp_path / "ips.txt"
    f.write_text("10.20.30.40\n")
    rc, text, _ = run(capsys, "anon-ip", "--scheme", "truncate", "--keep", 16, "--input", f)
    assert rc == 0 and text == "10.20.0.0\n"


def test_anon_ip_pseudonym_table(capsys, tmp_path):
    f = tmp_path / "flows.csv"
    f.write_text("src,dst,bytes\n10.0.0.1,10.0.0.2,5\n10.0.0.2,10.0.0.1,7\n")
    table = tmp_path / "table.csv"
    rc, text, _ = run(capsys, "anon-ip", "--scheme", "pseudonym", "--key", "k", "--input", f, "--table-out", table)
    assert rc == 0
    rows = text.splitlines()
    assert rows[0] == "src,dst,bytes"
    assert rows[1].split(",")[0] == rows[2].split(",")[1]
    assert len(table.read_text().splitlines()) == 3


@pytest.mark.parametrize(
    "argv",
    [
        ["verify", "--input", "/nonexistent/file", "--k", "2"],
        ["anon-ip", "--scheme", "truncate"],
        ["anonymize-k", "--input", "BAD", "--k", "0"],
        ["query", "--store", "/nonexistent/store.jsonl", "--where", "city=x"],
    ],
)
def test_errors_exit_nonzero(capsys, argv, tmp_path):
    bad = tmp_path / "bad.txt"
    bad.write_text("v 1 A\ne 1 1\n")
    argv = [str(bad) if a == "BAD" else a for a in argv]
    rc, _, err = run(capsys, *argv)
    assert rc != 0 and "error" in err


def test_malformed_input_reports_line(capsys, tmp_path):
    bad = tmp_path / "bad.txt"
    bad.write_text("v 1 A\nv 2 B\nq nonsense\n")
    rc, _, err = run(capsys, "stats", "--input", bad)
    assert rc == 2 and "3" in err


def test_naive_interpol_golden(capsys, data_path):
    rc, text, _ = run(
        capsys, "naive",
        "--input", data_path("interpol.txt"),
        "--mapping-in", data_path("interpol_mapping.txt"),
    )
    assert rc == 0
    assert text == open(data_path("interpol_naive.txt")).read()


def test_naive_mapping_out(capsys, g20, tmp_path):
    m = tmp_path / "m.txt"
    rc, text, _ = run(capsys, "naive", "--input", g20, "--mapping-out", m)
    assert rc == 0 and len(m.read_text().splitlines()) == 20
    assert parse_network(text).number_of_edges() == parse_network(g20.read_text()).number_of_edges()


def test_partition_and_reduction(capsys, data_path):
    rc, text, _ = run(capsys, "partition", "--input", data_path("interpol.txt"), "--kind", "structural", "--reduction")
    assert rc == 0
    assert sum(line.startswith("class ") for line in text.splitlines()) == 12
    rc, _, err = run(capsys, "partition", "--input", data_path("interpol.txt"), "--kind", "refinement", "--reduction")
    assert rc == 2 and "error" in err


def test_stats(capsys, g20, tmp_path):
    rc, text, _ = run(capsys, "stats", "--input", g20, "--original", g20)
    assert rc == 0
    assert "edges_added 0" in text and "degree_l1 0" in text


def test_merge_query_revoke(capsys, tmp_path):
    store = tmp_path / "s.jsonl"
    p1, p2 = tmp_path / "p1.txt", tmp_path / "p2.txt"
    p1.write_text(
        "v 1 A s=x\nv 2 A s=y\nv 3 B s=x\nv 4 B s=y\ne 1 2\ne 3 4\ne 2 3\n"
        "a 1 name=a\na 2 name=b\na 3 name=c\na 4 name=d\n"
    )
    p2.write_text("v 1 A s=x\nv 2 B s=z\ne 1 2\na 1 name=e\na 2 name=f\n")
    snap = tmp_path / "snap.txt"
    assert run(capsys, "merge", "--store", store, "--party", "P1", "--input", p1, "--k", 2)[0] == 0
    assert run(capsys, "merge", "--store", store, "--party", "P2", "--input", p2, "--k", 2, "--output", snap)[0] == 0
    assert verify_k_anonymity(parse_network(snap.read_text()), 2)
    rc, text, _ = run(capsys, "query", "--store", store, "--where", "label=B", "--k", 2)
    assert rc == 0 and len(parse_network(text)) == 3
    rc, _, err = run(capsys, "query", "--store", store, "--where", "name=a", "--k", 2)
    assert rc == 2 and "error" in err
    assert run(capsys, "revoke", "--store", store, "--party", "P2", "--input", p2, "--k", 2)[0] == 0
    rc, text, _ = run(capsys, "query", "--store", store, "--where", "label=B", "--k", 2)
    assert len(parse_network(text)) == 2
