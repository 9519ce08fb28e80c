"""Tests for the command-line surface"""

import json

import pytest

from fukayagen import cli, gentle, linalg, surface, twcx


@pytest.fixture
def fixture_path(fixtures_dir):
    def path(name: str) -> str:
        return str(fixtures_dir / name)

    return path


class TestSurfaceCommands:
    """Test surface validate and info"""

    def test_validate_ok(self, fixture_path):
        """Test a valid surface passes"""
        result = cli.run(["surface", "validate", fixture_path("a3.json")])

        assert result.code == 0
        assert result.text.startswith("✓")

    def test_validate_bad(self, fixture_path):
        """Test issues give exit code 1 and a count"""
        result = cli.run(["surface", "validate", fixture_path("bad.json")])

        assert result.code == 1
        assert "issue(s)" in result.text

    def test_info_json(self, fixture_path):
        """Test --json returns the invariants as data"""
        result = cli.run(["surface", "info", fixture_path("atilde11.json"), "--json"])

        assert result.data["boundary_components"] == 2
        assert result.data["genus"] == 0


class TestCategoryCommands:
    """Test cat build, hom and the checks"""

    def test_build_writes_presentation(self, fixture_path, tmp_path):
        """Test --out writes a gentle.v1 document"""
        out = tmp_path / "a3-gentle.json"
        result = cli.run(["cat", "build", fixture_path("a3.json"), "--out", str(out)])

        assert result.code == 0
        doc = json.loads(out.read_text())
        assert doc["format"] == gentle.FORMAT
        assert len(doc["arrows"]) == 2

    def test_hom(self, fixture_path):
        """Test the composite path spans Hom(X1, X3)"""
        result = cli.run(["cat", "hom", fixture_path("a3.json"), "X1", "X3", "--json"])

        assert result.data == [{"arrows": ["X1+>X2-", "X2+>X3-"], "degree": 0}]

    def test_check_ainfty(self, fixture_path):
        """Test the triangle passes the A∞ check"""
        result = cli.run(["cat", "check-ainfty", fixture_path("disk3.json"), "--max-len", "4"])
        assert result.code == 0


class TestComplexCommands:
    """Test obj and tw commands"""

    def test_obj_build(self, fixture_path):
        """Test a word file becomes a twisted complex document"""
        result = cli.run(
            [
                "obj",
                "build",
                fixture_path("word-a3.json"),
                "--category",
                fixture_path("a3.json"),
                "--json",
            ]
        )

        assert result.code == 0
        assert result.data["summands"] == [{"arc": "X1", "shift": 0}, {"arc": "X2", "shift": -1}]

    def test_tw_hom(self, fixture_path, tmp_path):
        """Test Hom between two single arcs read from files"""
        p, disks = gentle.from_ribbon(surface.linear_tree(2))
        cat = gentle.Products(p, disks, linalg.field("q"))
        for arc in ("X1", "X2"):
            (tmp_path / f"{arc}.json").write_text(json.dumps(twcx.to_dict(twcx.single(cat, arc))))

        result = cli.run(
            [
                "tw",
                "hom",
                str(tmp_path / "X1.json"),
                str(tmp_path / "X2.json"),
                "--category",
                fixture_path("a2.json"),
                "--json",
            ]
        )
        assert result.data == {"0": 1}


class TestLatticeAndStability:
    """Test k0 and stab commands"""

    def test_k0(self, fixture_path):
        """Test the triangle lattice report"""
        result = cli.run(["k0", fixture_path("disk3.json")])
        assert result.text.startswith("rank 2 on 3 arcs")

    def test_k0_json(self, fixture_path):
        result = cli.run(["k0", fixture_path("disk3.json"), "--json"])

        assert result.data["relations"] == [[1, 1, -1]]
        assert result.data["torsion"] == []

    def test_stable_count(self, fixture_path):
        """Test the stable count of the three-chamber A3 S-graph"""
        result = cli.run(["stab", "stable-count", fixture_path("sgraph-a3-3.json")])
        assert result.text == "3"

    def test_dot(self, fixture_path, tmp_path):
        """Test the S-graph is written as DOT"""
        out = tmp_path / "a2.dot"
        cli.run(["stab", "dot", fixture_path("sgraph-a2.json"), "--out", str(out)])

        assert "graph" in out.read_text()

    def test_explore_jobs(self, fixture_path):
        """Test two workers find the A2 pentagon"""
        args = ["--depth", "5", "--jobs", "2", "--json"]
        result = cli.run(["stab", "explore", fixture_path("sgraph-a2.json"), *args])

        assert len(result.data["chambers"]) == 5
        assert len(result.data["walls"]) == 5

    def test_fixture_by_name(self, fixtures_dir, tmp_path, monkeypatch):
        """Test a bare name is looked up under the configured fixtures directory"""
        name = "a3-three-stables.json"
        (tmp_path / name).write_text((fixtures_dir / "sgraph-a3-3.json").read_text())
        monkeypatch.setenv("FUKAYAGEN_FIXTURES", str(tmp_path))

        assert cli.run(["stab", "stable-count", name]).text == "3"


class TestNetCommands:
    """Test net reduce"""

    def test_reduce_round_trip(self, fixture_path):
        """Test the reduced representation pushes forward to the input"""
        files = [fixture_path("net-height2.json"), fixture_path("netrep-height2.json")]
        result = cli.run(["net", "reduce", *files, "--json"])

        assert result.code == 0
        assert result.data["round_trip"] is True


class TestMain:
    """Test exit codes and error reporting"""

    def test_usage_error(self):
        """Test an unknown group is a usage error"""
        assert cli.run(["nope"]).code == 2

    def test_prints_json(self, fixture_path, capsys):
        """Test main prints the data document on --json"""
        assert cli.main(["k0", fixture_path("disk3.json"), "--json"]) == 0
        assert json.loads(capsys.readouterr().out)["rank"] == 2

    def test_malformed_file(self, tmp_path, capsys):
        """Test a malformed document exits 1 with the location on stderr"""
        bad = tmp_path / "broken.json"
        bad.write_text("{")

        assert cli.main(["surface", "validate", str(bad)]) == 1
        err = capsys.readouterr().err
        assert "FormatError" in err
        assert "broken.json" in err

    def test_failed_check_exit_code(self, fixture_path, capsys):
        """Test a failed validation exits 1"""
        assert cli.main(["surface", "validate", fixture_path("bad.json")]) == 1
        assert "❌" in capsys.readouterr().out
