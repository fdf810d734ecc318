import io
import json
import math
import tempfile
from contextlib import redirect_stderr, redirect_stdout
from pathlib import Path
from unittest import TestCase

from database.models import DatabaseManager
from main import main
from utils.plotting import read_pgm
from utils.reporting import read_csv

QUADRATIC = {"P": [[0, 1], [0], [1]], "Q": [[1]], "start": {"a": [0], "b": [1]}}
QUADRATIC_AT_LAMBDA = {"P": [[0, 1], [0], [1]], "Q": [[1]], "start": {"a": [0, 1], "b": [1]}}


class CliTestCase(TestCase):

    def setUp(self):
        tmp = tempfile.TemporaryDirectory()
        self.addCleanup(tmp.cleanup)
        self.root = Path(tmp.name)
        self.out = self.root / "out"

    def write_config(self, data, name="config.json") -> str:
        path = self.root / name
        path.write_text(json.dumps(data))
        return str(path)

    def run_cli(self, *argv):
        stdout, stderr = io.StringIO(), io.StringIO()
        with redirect_stdout(stdout), redirect_stderr(stderr):
            code = main(list(argv))
        return code, stdout.getvalue(), stderr.getvalue()


class TestValidateCommand(CliTestCase):

    def test_valid_family(self):
        config = self.write_config({"family": QUADRATIC})
        code, stdout, _ = self.run_cli("--config", config, "--out", str(self.out), "validate")
        self.assertEqual(code, 0)
        self.assertIn("valid", stdout)

    def test_non_constant_leading_coefficient(self):
        config = self.write_config({"family": {"P": [[1], [0], [0, 1]], "Q": [[1]]}})
        code, stdout, _ = self.run_cli("--config", config, "--out", str(self.out), "validate")
        self.assertNotEqual(code, 0)
        self.assertIn("constant_leading_coefficients", stdout)
        report = json.loads((self.out / "validate.json").read_text())
        self.assertFalse(report["passed"])


class TestConfigErrors(TestCase):

    def run_cli(self, *argv):
        with redirect_stdout(io.StringIO()), redirect_stderr(io.StringIO()) as stderr:
            code = main(list(argv))
        return code, stderr.getvalue()

    def test_negative_tolerance(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / "bad.json"
            path.write_text(json.dumps({"family": QUADRATIC, "bounds": {"tol": -1}}))
            code, stderr = self.run_cli("--config", str(path), "validate")
        self.assertEqual(code, 2)
        self.assertIn("bounds.tol", stderr)

    def test_missing_section(self):
        with tempfile.TemporaryDirectory() as tmp:
            code, stderr = self.run_cli("--out", tmp, "validate")
            self.assertTrue((Path(tmp) / "validate.error.json").exists())
        self.assertEqual(code, 2)
        self.assertIn("family", stderr)

    def test_unreadable_config(self):
        code, _ = self.run_cli("--config", "/nonexistent/config.json", "validate")
        self.assertEqual(code, 2)


class TestFindParamsCommand(CliTestCase):

    def test_gleason_rationals_in_csv(self):
        config = self.write_config({"family": QUADRATIC, "bounds": {"max_pre": 2, "max_per": 2}})
        code, _, _ = self.run_cli("--config", config, "--out", str(self.out), "find-params")
        self.assertEqual(code, 0)
        rows = read_csv(self.out / "find-params.csv")
        rational = {row["lambda"] for row in rows if row["kind"] == "rational"}
        self.assertEqual(rational, {"0", "-1", "-2"})

    def test_flags_override_config(self):
        config = self.write_config({"family": QUADRATIC, "bounds": {"max_pre": 2, "max_per": 2}})
        self.run_cli("--config", config, "--out", str(self.out), "find-params", "--max-pre", "0", "--max-per", "1")
        rows = read_csv(self.out / "find-params.csv")
        self.assertEqual([row["lambda"] for row in rows], ["0"])

    def test_rows_stored_in_database(self):
        config = self.write_config({"family": QUADRATIC})
        url = f"sqlite:///{self.root / 'runs.db'}"
        code, _, _ = self.run_cli("--config", config, "--out", str(self.out), "--db", url, "find-params")
        self.assertEqual(code, 0)
        manager = DatabaseManager(url)
        runs = manager.list_runs("find-params")
        self.assertEqual(len(runs), 1)
        stored = manager.get_run(runs[0]["run_id"])
        self.assertEqual(len(stored["rows"]), len(read_csv(self.out / "find-params.csv")))


class TestMapCommands(CliTestCase):

    def test_orbit_of_a_two_cycle(self):
        config = self.write_config({"map": {"P": [-1, 0, 1]}, "point": 0})
        code, _, _ = self.run_cli("--config", config, "--out", str(self.out), "orbit")
        self.assertEqual(code, 0)
        report = json.loads((self.out / "orbit.json").read_text())
        self.assertEqual((report["kind"], report["preperiod"], report["period"]), ("preperiodic", 0, 2))

    def test_height_of_a_rational_point(self):
        config = self.write_config({"map": {"P": [0, 0, 1]}})
        code, _, _ = self.run_cli("--config", config, "--out", str(self.out), "height", "--point", "3")
        self.assertEqual(code, 0)
        report = json.loads((self.out / "height.json").read_text())
        self.assertAlmostEqual(report["value"], math.log(3), delta=1e-8)


class TestFamilyIterateCommand(CliTestCase):

    def test_degree_law_holds(self):
        config = self.write_config({"family": QUADRATIC_AT_LAMBDA})
        code, stdout, _ = self.run_cli("--config", config, "--out", str(self.out), "family-iterate", "--n", "4")
        self.assertEqual(code, 0)
        self.assertIn("holds", stdout)
        degrees = [int(row["deg_A"]) for row in read_csv(self.out / "family-iterate.csv")]
        self.assertEqual(degrees, [1, 2, 4, 8, 16])

    def test_resource_cap_writes_partial_output(self):
        config = self.write_config({"family": QUADRATIC, "bounds": {"max_degree": 4}})
        code, _, stderr = self.run_cli("--config", config, "--out", str(self.out), "family-iterate", "--n", "5")
        self.assertEqual(code, 3)
        self.assertIn("resource cap", stderr)
        failure = json.loads((self.out / "family-iterate.error.json").read_text())
        self.assertEqual(failure["error"], "ResourceLimitError")
        self.assertEqual(len(failure["partial"]), 4)


class TestMetricsCommand(CliTestCase):

    def test_reports_are_deterministic(self):
        config = self.write_config({"family": QUADRATIC_AT_LAMBDA, "bounds": {"n_max": 4, "sample_size": 4}})
        first, second = self.root / "first", self.root / "second"
        for out in (first, second):
            code, _, _ = self.run_cli("--config", config, "--out", str(out), "--seed", "7", "metrics-report")
            self.assertEqual(code, 0)
        for name in ("metrics-report.json", "metrics-ratios.csv", "metrics-convergence.csv"):
            self.assertEqual((first / name).read_bytes(), (second / name).read_bytes(), name)


class TestSpecializeCommand(CliTestCase):

    def test_generic_height_is_one(self):
        config = self.write_config({"family": QUADRATIC_AT_LAMBDA})
        code, stdout, _ = self.run_cli("--config", config, "--out", str(self.out), "specialize",
                                       "--samples", "1,-1,2,-2")
        self.assertEqual(code, 0)
        self.assertIn("ĥ_f(c) = 1", stdout)
        self.assertEqual(len(read_csv(self.out / "specialize.csv")), 4)


class TestP2Commands(CliTestCase):

    def setUp(self):
        super().setUp()
        self.config = self.write_config(
            {"p2": {"P": [0, -1, 0, 1], "Q": [0, 0, 0, 1], "lam": 0, "mu": -7, "a": 1, "b": 2}})

    def test_step_lands_on_fixed_point(self):
        code, _, _ = self.run_cli("--config", self.config, "--out", str(self.out), "p2", "step", "--steps", "2")
        self.assertEqual(code, 0)
        report = json.loads((self.out / "p2-step.json").read_text())
        self.assertEqual(report["orbit"], [[1, 2, 1], [0, 1, 1], [0, 1, 1]])

    def test_counterexample_up_to_k(self):
        code, _, _ = self.run_cli("--config", self.config, "--out", str(self.out), "p2", "counterexample",
                                  "--k", "4", "--up-to")
        self.assertEqual(code, 0)
        report = json.loads((self.out / "p2-counterexample.json").read_text())
        self.assertTrue(report["passed"])
        self.assertEqual([r["k"] for r in report["reports"]], [1, 2, 3, 4])


class TestPlotCommand(CliTestCase):

    def test_window_around_the_center(self):
        config = self.write_config({"family": QUADRATIC})
        code, _, _ = self.run_cli("--config", config, "--out", str(self.out), "plot",
                                  "--width", "4", "--resolution", "64")
        self.assertEqual(code, 0)
        pixels = read_pgm(self.out / "plot.pgm")
        self.assertEqual(pixels.shape, (64, 64))
        self.assertEqual(pixels[32, 32], 0)
        sidecar = json.loads((self.out / "plot.json").read_text())
        self.assertGreater(sidecar["v_max"], 0)
        self.assertEqual(sidecar["window"], {"center": [0.0, 0.0], "width": 4.0})
