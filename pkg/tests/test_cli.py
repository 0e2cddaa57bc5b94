# tests/test_cli.py
from __future__ import annotations
import io
import json
import tempfile
import unittest
from contextlib import redirect_stdout
from pathlib import Path

import numpy as np

from apps.schrotbc.cli import EXIT_CONFIG, EXIT_OK, _parser, build_config, main
from apps.schrotbc.config import RunConfig, preset_config
from apps.schrotbc.errors import ConfigError
from apps.schrotbc.sweep import ComparisonReport, convergence_sweep, is_monotone
from tests.conftest import ACCEPTANCE, ACCEPTANCE_REASON, TINY


def write_config(directory: str, **changes) -> str:
    path = Path(directory) / "cfg.json"
    path.write_text(json.dumps({**TINY, **changes}))
    return str(path)


class BuildConfigTests(unittest.TestCase):
    def parse(self, *argv):
        return build_config(_parser().parse_args(list(argv)))

    def test_default_tables(self):
        self.assertEqual(self.parse("run").nt, 1025)
        self.assertEqual(self.parse("run", "--dim", "3").dim, 3)
        self.assertEqual(self.parse("sweep").nt_set, [256, 512, 1024, 2048, 4096])
        bdf1 = self.parse("sweep", "--method", "BDF1")
        self.assertEqual((bdf1.nt_set[0], bdf1.nt_set[-1], bdf1.nt), (1024, 16384, 1024))

    def test_overrides(self):
        c = self.parse("run", "--scheme", "cp20", "--method", "bdf1", "--grid", "32", "--nt", "65",
                       "--profile", "fhg-ii", "--c0", "8", "--beta", "-1")
        self.assertEqual((c.scheme, c.method.name, c.n_lgl, c.n_fourier, c.nt), ("CP20", "BDF1", 32, 32, 65))
        self.assertEqual((c.profile.label, c.profile.c0, c.domain.beta), ("fhg-ii", 8.0, -1))

    def test_pade_order_alone_applies_to_family(self):
        c = self.parse("run", "--pade-order", "20")
        self.assertEqual((c.scheme, c.scheme_spec().label), ("NP", "NP20-TR"))
        with self.assertRaises(ConfigError):
            self.parse("run", "--scheme", "CP50", "--pade-order", "20")

    def test_nt_lists(self):
        c = self.parse("sweep", "--nt", "9", "5", "7")
        self.assertEqual((c.nt_set, c.nt), ([5, 7, 9], 5))
        with self.assertRaises(ConfigError):
            self.parse("run", "--nt", "5", "9")


class PresetsCommandTests(unittest.TestCase):
    def test_single_table(self):
        buf = io.StringIO()
        with redirect_stdout(buf):
            code = main(["presets", "--table", "III"])
        self.assertEqual(code, EXIT_OK)
        block = json.loads(buf.getvalue())
        self.assertEqual((block["lgl_points"], block["nt"]), ("64 x 64", 1025))

    def test_all_tables(self):
        buf = io.StringIO()
        with redirect_stdout(buf):
            main(["presets"])
        self.assertEqual(sorted(json.loads(buf.getvalue())), ["I", "II", "III", "IV", "V"])


class RunCommandTests(unittest.TestCase):
    def test_writes_series(self):
        with tempfile.TemporaryDirectory() as tmp:
            out = Path(tmp) / "run"
            code = main(["run", "--config", write_config(tmp), "--nt", "2", "--out", str(out)])
            self.assertEqual(code, EXIT_OK)
            lines = (out / "errors.csv").read_text().splitlines()
            summary = json.loads((out / "summary.json").read_text())
            self.assertTrue((out / "timing.json").exists())
        self.assertEqual(len(lines), 3)
        self.assertEqual(summary["scheme"], "NP50-TR")
        self.assertEqual(summary["steps"], 1)

    def test_bad_configuration(self):
        with tempfile.TemporaryDirectory() as tmp:
            with self.assertLogs("cli", level="ERROR"):
                self.assertEqual(main(["run", "--config", write_config(tmp, nt=1)]), EXIT_CONFIG)
            self.assertEqual(main(["run", "--config", str(Path(tmp) / "absent.json")]), EXIT_CONFIG)
            self.assertEqual(main(["run", "--dim", "3", "--scheme", "CQ", "--out", tmp]), EXIT_CONFIG)


class SweepCommandTests(unittest.TestCase):
    def test_sweep_summary(self):
        with tempfile.TemporaryDirectory() as tmp:
            out = Path(tmp) / "sweep"
            code = main(["sweep", "--config", write_config(tmp, method="BDF1"), "--nt", "3", "4", "5",
                         "--threads", "1", "--out", str(out)])
            self.assertEqual(code, EXIT_OK)
            summary = json.loads((out / "summary.json").read_text())
            self.assertTrue((out / "nt_000004" / "errors.csv").exists())
        self.assertEqual([p["nt"] for p in summary["points"]], [3, 4, 5])
        self.assertEqual(summary["scheme"], "NP50-BDF1")
        self.assertIn("slope", summary)

    def test_too_few_levels(self):
        with self.assertRaises(ConfigError):
            convergence_sweep(RunConfig(**TINY, nt_set=[3, 5]), threads=1)

    def test_compare_all_maps(self):
        with tempfile.TemporaryDirectory() as tmp:
            out = Path(tmp) / "cmp"
            code = main(["compare", "--config", write_config(tmp, method="BDF1"), "--threads", "1",
                         "--out", str(out)])
            self.assertEqual(code, EXIT_OK)
            report = json.loads((out / "comparison.json").read_text())
        self.assertEqual(report["method"], "BDF1")
        self.assertEqual(sorted(report["schemes"]), ["CP20", "CP50", "CQ", "HF", "NP20", "NP50"])
        self.assertEqual(report["schemes"]["CQ"]["deviation_from_cq"], 0.0)
        self.assertLessEqual(report["schemes"]["NP50"]["deviation_from_cq"], 1e-4)

    def test_monotone_rule(self):
        used = np.ones(3, dtype=bool)
        self.assertTrue(is_monotone([1e-2, 1.2e-2, 5e-3], used))
        self.assertFalse(is_monotone([1e-2, 2e-2, 5e-3], used))
        self.assertTrue(is_monotone([1e-2, 2e-2, 5e-3], np.array([True, False, True])))

    def test_deviation_needs_reference(self):
        self.assertIsNone(ComparisonReport(method="TR", results={}).deviation("CQ"))


@unittest.skipUnless(ACCEPTANCE, ACCEPTANCE_REASON)
class ConvergenceOrderAcceptanceTests(unittest.TestCase):
    bands = {"BDF1": (0.7, 1.3), "TR": (1.6, 2.3)}

    def test_observed_orders(self):
        for scheme in ("CQ", "NP50"):
            for method, (lo, hi) in self.bands.items():
                with self.subTest(scheme=scheme, method=method):
                    report = convergence_sweep(preset_config("IV", scheme=scheme, method=method))
                    self.assertGreaterEqual(report.fit.slope, lo)
                    self.assertLessEqual(report.fit.slope, hi)
                    self.assertTrue(report.monotone)


if __name__ == "__main__":
    unittest.main(verbosity=2)
