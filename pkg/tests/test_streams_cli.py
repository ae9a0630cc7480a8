from __future__ import annotations

import io
from pathlib import Path

import pytest

from dynmatch import cli
from dynmatch.graph import DynamicGraph, format_stream, parse_stream
from dynmatch.streams import (
    GENERATORS,
    erdos_renyi_dynamic,
    generate,
    planted_matching_adversarial,
    sliding_window,
)

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.mark.parametrize("kind", sorted(GENERATORS))
def test_streams_are_valid_and_seeded(kind):
    a = generate(kind, 30, 400, seed=7)
    assert a == generate(kind, 30, 400, seed=7)
    assert a != generate(kind, 30, 400, seed=8)
    g = DynamicGraph(30)
    for ev in a:
        g.apply(ev)  # raises on a duplicate insert or a missing delete
    assert len(a) == 400


def test_generate_rejects_bad_input():
    with pytest.raises(ValueError):
        generate("nope", 10, 5)
    with pytest.raises(ValueError):
        generate("sliding-window", 10, -1)


def test_sliding_window_deletes_oldest():
    events = sliding_window(20, 300, seed=1, window=15)
    order = []
    for ev in events:
        if ev.is_insert:
            order.append(ev.edge)
        else:
            assert ev.edge == order.pop(0)
            assert len(order) == 14


def test_er_hovers_near_target():
    g = DynamicGraph(50)
    for ev in erdos_renyi_dynamic(50, 3000, seed=2):
        g.apply(ev)
    assert 60 <= g.edge_count <= 140


def test_planted_edges_survive():
    events = planted_matching_adversarial(40, 600, seed=3)
    g = DynamicGraph(40)
    for ev in events:
        g.apply(ev)
    planted = [ev.edge for ev in events[:2] if ev.is_insert]
    assert all(e in g for e in planted)


def run_cli(capsys, *argv: str) -> tuple[int, str, str]:
    rc = cli.main(list(argv))
    out, err = capsys.readouterr()
    return rc, out, err


def test_gen_zero_steps_is_header_only(capsys):
    rc, out, _ = run_cli(capsys, "gen", "--n", "12", "--steps", "0")
    assert rc == 0 and out == "12\n"


def test_gen_is_deterministic(capsys, tmp_path):
    path = tmp_path / "s.txt"
    rc, _, _ = run_cli(capsys, "gen", "--n", "16", "--steps", "50", "--seed", "4", "-o", str(path))
    assert rc == 0
    _, out, _ = run_cli(capsys, "gen", "--n", "16", "--steps", "50", "--seed", "4")
    assert path.read_text() == out
    assert parse_stream(out).n == 16


def test_run_empty_stream(capsys, tmp_path):
    path = tmp_path / "empty.txt"
    path.write_text("8\n")
    rc, out, _ = run_cli(capsys, "run", str(path))
    assert rc == 0
    assert out == ",".join(cli.CSV_COLUMNS) + "\n"


def test_uniform_rejects_lambda_at_beta(capsys, tmp_path):
    path = tmp_path / "s.txt"
    path.write_text(format_stream(8, generate("erdos-renyi-dynamic", 8, 10, 0)))
    rc, _, err = run_cli(capsys, "run", str(path), "--algo", "uniform-sparsify", "--beta", "1", "--lambda", "1")
    assert rc != 0 and "BadWeights" in err


def test_degenerate_params_exit_code(capsys, tmp_path):
    path = tmp_path / "s.txt"
    path.write_text(format_stream(64, generate("erdos-renyi-dynamic", 64, 10, 0)))
    rc, _, err = run_cli(capsys, "run", str(path), "--beta", "16", "--lambda", "1/4", "--delta", "1/4")
    assert rc == 2 and "DegenerateParams" in err
    rc, _, _ = run_cli(capsys, "run", str(path), "--beta", "16", "--lambda", "1/4", "--delta", "1/4",
                       "--allow-degenerate")
    assert rc == 0


@pytest.mark.parametrize("algo", cli.ALGORITHMS)
def test_run_verifies_and_is_byte_identical(capsys, tmp_path, algo):
    path = tmp_path / "s.txt"
    path.write_text(format_stream(32, generate("erdos-renyi-dynamic", 32, 120, 5)))
    args = ["run", str(path), "--algo", algo, "--verify-every", "10", "--seed", "3"]
    if algo == "uniform-sparsify" or algo == "uniform-sparsify-batch":
        args += ["--beta", "1", "--lambda", "1/8"]
    rc1, out1, err1 = run_cli(capsys, *args)
    rc2, out2, _ = run_cli(capsys, *args)
    assert rc1 == 0, err1
    assert out1 == out2
    rows = out1.splitlines()
    assert rows[0] == ",".join(cli.CSV_COLUMNS) and len(rows) == 121
    checked = [r.split(",") for r in rows[1:] if r.split(",")[3]]
    assert len(checked) == 12
    assert all(int(r[3]) >= int(r[2]) for r in checked)


def test_metrics_file(capsys, tmp_path):
    path = tmp_path / "s.txt"
    path.write_text(format_stream(20, generate("sliding-window", 20, 40, 1)))
    metrics = tmp_path / "m.csv"
    rc, out, _ = run_cli(capsys, "run", str(path), "--metrics", str(metrics))
    assert rc == 0 and out == ""
    assert len(metrics.read_text().splitlines()) == 41


def test_verify_reports_ok(capsys, tmp_path):
    path = tmp_path / "s.txt"
    path.write_text(format_stream(24, generate("erdos-renyi-dynamic", 24, 60, 2)))
    rc, out, _ = run_cli(capsys, "verify", str(path))
    assert rc == 0 and out.strip() == "ok: 60 steps verified"


def test_verify_expander(capsys):
    fx = FIXTURES / "expander_n16_r32_d4_s4.txt"
    rc, out, _ = run_cli(capsys, "verify", "--expander", str(fx), "--k", "4", "--eps", "1/4")
    assert rc == 0 and out.rstrip().endswith("ok")
    rc, out, _ = run_cli(capsys, "verify", "--expander", str(fx), "--k", "4", "--eps", "0")
    assert rc == 1


def test_bench_prints_both_profiles(capsys, tmp_path):
    path = tmp_path / "s.txt"
    path.write_text(format_stream(32, generate("sliding-window", 32, 27, 0)))
    rc, out, _ = run_cli(capsys, "bench", str(path), "--k", "3")
    lines = out.splitlines()
    assert rc == 0 and [ln.split(":")[0] for ln in lines] == ["amortized", "scheduled"]
    assert all("max/median=" in ln for ln in lines)


def test_bench_stream_longer_than_cap(capsys, tmp_path):
    path = tmp_path / "s.txt"
    path.write_text(format_stream(32, generate("sliding-window", 32, 28, 0)))
    rc, _, err = run_cli(capsys, "bench", str(path), "--k", "3")
    assert rc == 2 and "StepCapExceeded" in err


def test_parse_error_exit_code(capsys, tmp_path):
    path = tmp_path / "bad.txt"
    path.write_text("4\n+ 0 0\n")
    rc, _, err = run_cli(capsys, "run", str(path))
    assert rc == 2 and "line 2" in err


def test_format_ratio():
    assert cli.format_ratio(0, 0) == "1.000000"
    assert cli.format_ratio(3, 0) == "inf"
    assert cli.format_ratio(3, 2) == "1.500000"
