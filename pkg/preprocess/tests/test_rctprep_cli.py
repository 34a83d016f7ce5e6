from rctprep.cli import main

RAW = (
    "###1\n"
    "BACKGROUND\tpain is a common problem among adults .\n"
    "OBJECTIVE\tWe aimed to determine whether massage reduced pain .\n"
    "METHOD\tA total of 60 adults were randomized .\n"
    "RESULT\tmassage significantly reduced pain in adults .\n"
    "CONCLUSION\tThese findings suggest that massage relieved pain .\n"
)


def test_preprocess_prints_summary(tmp_path, capsys):
    source = tmp_path / "raw.txt"
    source.write_text(RAW, encoding="utf-8")
    out = tmp_path / "out.conllu"
    assert main(["preprocess", "--in", str(source), "--out", str(out)]) == 0
    assert "5 sentences written" in capsys.readouterr().out
    assert out.exists()


def test_preprocess_missing_input(tmp_path, capsys):
    code = main(["preprocess", "--in", str(tmp_path / "nope.txt"), "--out", str(tmp_path / "o")])
    assert code == 1
    assert "error" in capsys.readouterr().err


def test_fixture_subcommand(tmp_path, capsys):
    source = tmp_path / "raw.txt"
    source.write_text(RAW, encoding="utf-8")
    out = tmp_path / "sample.txt"
    assert main(["fixture", "--in", str(source), "--per-class", "1", "--seed", "3", "--out", str(out)]) == 0
    assert "5 sentences" in capsys.readouterr().out


def test_fixture_insufficient_exits_one(tmp_path, capsys):
    source = tmp_path / "raw.txt"
    source.write_text("###1\nRESULT\tit worked .\n", encoding="utf-8")
    out = tmp_path / "sample.txt"
    assert main(["fixture", "--in", str(source), "--per-class", "2", "--seed", "3", "--out", str(out)]) == 1
    assert "BACKGROUND" in capsys.readouterr().err


def test_bad_flag_exits_one(capsys):
    assert main(["preprocess", "--bogus"]) == 1
