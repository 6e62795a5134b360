import json
import xml.etree.ElementTree as ET

import pytest

from rankcost.cli import main
from rankcost.grid import GridMap, ProblemInstance, load_instance, save_instance, validate_outcome
from rankcost.solver import load_solution

from .conftest import DATA

FIG1 = str(DATA / "fig1.json")


def test_generate_files_and_determinism(tmp_path, capsys):
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["generate", "--count", "3", "--nets", "3", "--density", "0.1", "--seed", "5", "-o", str(a)]) == 0
    assert main(["generate", "--count", "3", "--nets", "3", "--density", "0.1", "--seed", "5", "-o", str(b)]) == 0
    names = sorted(p.name for p in a.iterdir())
    assert names == [f"16x16_obstacles_{i:03d}.json" for i in range(3)]
    for n in names:
        assert (a / n).read_bytes() == (b / n).read_bytes()
        inst = load_instance((a / n).read_bytes())
        assert inst.num_nets == 3 and len(inst.grid.obstacles) == round(0.1 * 256)
    assert "wrote 3 instances" in capsys.readouterr().out


def test_generate_zero_count(tmp_path):
    assert main(["generate", "--count", "0", "-o", str(tmp_path / "none")]) == 0
    assert list((tmp_path / "none").iterdir()) == []


def test_generate_infeasible(tmp_path, capsys):
    assert main(["generate", "--width", "2", "--height", "2", "--nets", "3", "--count", "1",
                 "-o", str(tmp_path)]) == 1
    assert "error" in capsys.readouterr().err


def test_solve_writes_solution_and_log(tmp_path, capsys):
    sol, log = tmp_path / "s.json", tmp_path / "log.jsonl"
    assert main(["solve", FIG1, "--generations", "20", "--threads", "1", "-o", str(sol), "--log", str(log)]) == 0
    assert "connected 2/2 nets, length 12, generations 20" in capsys.readouterr().out
    fig1 = load_instance(DATA.joinpath("fig1.json").read_bytes())
    outcome, order = load_solution(sol.read_bytes(), fig1)
    assert validate_outcome(fig1, outcome).valid and outcome.all_connected
    lines = [json.loads(x) for x in log.read_text().splitlines()]
    assert [x["generation"] for x in lines] == list(range(20))
    assert "wallclock" not in lines[0]
    assert main(["solve", FIG1, "--generations", "2", "--threads", "1", "--log", str(log), "--log-timing"]) == 0
    assert "wallclock" in json.loads(log.read_text().splitlines()[0])


def test_solve_zero_generations(capsys):
    assert main(["solve", FIG1, "--generations", "0"]) == 0
    assert "connected 1/2 nets, length -, generations 0" in capsys.readouterr().out


def test_solve_cost_only_post_process(tmp_path, capsys):
    sol = tmp_path / "s.json"
    assert main(["solve", FIG1, "--mode", "cost_only", "--post-process", "--generations", "30", "-o", str(sol)]) == 0
    _, order = load_solution(sol.read_bytes())
    assert order == (0, 1)


def test_solve_bad_instance(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text('{"version": 1, "width": 3, "height": 3, "obstacles": [], "nets": [{"start": [0, 0], "end": [5, 5]}]}')
    assert main(["solve", str(bad)]) == 1
    assert main(["solve", str(tmp_path / "missing.json")]) == 1
    assert capsys.readouterr().err.count("error") == 2


def test_render_ascii(capsys, tmp_path):
    empty = tmp_path / "empty.json"
    empty.write_bytes(save_instance(ProblemInstance(GridMap(3, 3), ())))
    assert main(["render", str(empty)]) == 0
    assert capsys.readouterr().out == "...\n...\n...\n"
    sol = tmp_path / "s.json"
    main(["solve", FIG1, "--generations", "20", "-o", str(sol)])
    capsys.readouterr()
    assert main(["render", FIG1, "--solution", str(sol)]) == 0
    art = capsys.readouterr().out.splitlines()
    assert len(art) == 6 and all(len(r) == 6 for r in art)
    assert sum(r.count("S") for r in art) == 2 and sum(r.count("a") for r in art) == 7


def test_render_svg_is_xml(tmp_path):
    out = tmp_path / "f.svg"
    assert main(["render", FIG1, "--format", "svg", "-o", str(out)]) == 0
    root = ET.fromstring(out.read_text())
    assert root.tag.endswith("svg") and root.get("width") == "120"


def test_render_rejects_mismatched_solution(tmp_path, capsys):
    other = tmp_path / "other.json"
    main(["generate", "--width", "6", "--height", "6", "--nets", "2", "--count", "1", "-o", str(tmp_path / "g")])
    src = next((tmp_path / "g").iterdir())
    sol = tmp_path / "s.json"
    main(["solve", str(src), "--generations", "0", "-o", str(sol)])
    other.write_bytes(DATA.joinpath("fig1.json").read_bytes())
    capsys.readouterr()
    assert main(["render", str(other), "--solution", str(sol)]) == 1
    assert "does not match" in capsys.readouterr().err


def test_bench_and_regenerate(tmp_path, capsys):
    inst_dir, rep, rep2 = tmp_path / "inst", tmp_path / "rep", tmp_path / "rep2"
    main(["generate", "--width", "8", "--height", "8", "--nets", "3", "--count", "3", "-o", str(inst_dir)])
    capsys.readouterr()
    assert main(["bench", str(inst_dir), "--algorithms", "seq-astar:5,seq-astar:20,rc,rc-pp",
                 "--seeds", "0,1", "--generations", "10", "-o", str(rep)]) == 0
    table = capsys.readouterr().out
    assert table.splitlines()[2].startswith("seq-astar:5") and "common instances:" in table
    assert len(json.loads((rep / "records.json").read_text())["records"]) == 24
    assert main(["bench", "--from-records", str(rep / "records.json"), "-o", str(rep2)]) == 0
    assert (rep / "table.txt").read_bytes() == (rep2 / "table.txt").read_bytes()
    assert (rep / "records.json").read_bytes() == (rep2 / "records.json").read_bytes()


def test_bench_needs_input(tmp_path):
    with pytest.raises(SystemExit):
        main(["bench", "-o", str(tmp_path)])
