import csv
import json
import unittest
from pathlib import Path

from click.testing import CliRunner

from dmrsense import __version__
from dmrsense.cli import main


class TestCli(unittest.TestCase):

    def setUp(self) -> None:
        self.runner = CliRunner()

    def test_version(self) -> None:
        result = self.runner.invoke(main, ["--version"])
        self.assertEqual(result.exit_code, 0)
        self.assertIn(__version__, result.output)

    def test_bounds(self) -> None:
        with self.runner.isolated_filesystem():
            result = self.runner.invoke(main, ["bounds"])
            self.assertEqual(result.exit_code, 0, result.output)
            self.assertIn("R_max: 625.0000 m", result.output)
            self.assertIn("delta_R: 4.8828 m", result.output)
            record = json.loads(Path("bounds.json").read_text())
            self.assertEqual(record["n_fft"], 128)

    def test_bounds_single_path_preset(self) -> None:
        with self.runner.isolated_filesystem():
            result = self.runner.invoke(main, ["bounds", "--preset", "single-path"])
            self.assertEqual(result.exit_code, 0, result.output)
            self.assertIn("v_max: 233.5575 m/s", result.output)

    def test_simulate_wide_grid(self) -> None:
        with self.runner.isolated_filesystem():
            result = self.runner.invoke(main, ["simulate", "-s", "n_subcarriers=512", "--no-noise", "-o", "run"])
            self.assertEqual(result.exit_code, 0, result.output)
            self.assertIn("est_range: 48.83 m (index 20", result.output)
            record = json.loads(Path("run/estimate.json").read_text())
            self.assertEqual(record["range_index"], 20)
            self.assertIsNone(record["snr_db"])
            self.assertTrue(record["in_window"])
            self.assertNotIn("unambiguous window", result.output)
            for name in ("range_profile.csv", "doppler_profile.csv", "manifest.json"):
                self.assertTrue(Path("run", name).exists(), name)

    def test_simulate_out_of_window_target(self) -> None:
        with self.runner.isolated_filesystem():
            result = self.runner.invoke(main, ["simulate", "-s", "range_m=700", "--no-noise"])
            self.assertEqual(result.exit_code, 0, result.output)
            self.assertIn("out of unambiguous window", result.output)
            self.assertIn("R_max 625.0000 m", result.output)
            self.assertFalse(json.loads(Path("estimate.json").read_text())["in_window"])
            self.assertFalse(json.loads(Path("manifest.json").read_text())["in_window"])

    def test_simulate_time_channel(self) -> None:
        with self.runner.isolated_filesystem():
            result = self.runner.invoke(main, ["simulate", "--channel", "time", "--no-noise", "--dump-samples"])
            self.assertEqual(result.exit_code, 0, result.output)
            self.assertIn("est_range: 48.83 m (index 10", result.output)
            self.assertEqual(Path("samples.bin").read_bytes()[:4], b"DMRS")

    def test_simulate_noisy_is_reproducible(self) -> None:
        with self.runner.isolated_filesystem():
            first = self.runner.invoke(main, ["simulate", "--seed", "5", "-s", "snr_db=-5"])
            second = self.runner.invoke(main, ["simulate", "--seed", "5", "-s", "snr_db=-5"])
            self.assertEqual(first.exit_code, 0, first.output)
            self.assertEqual(first.output, second.output)

    def test_grid(self) -> None:
        with self.runner.isolated_filesystem():
            result = self.runner.invoke(main, ["grid", "--preset", "short"])
            self.assertEqual(result.exit_code, 0, result.output)
            self.assertIn("N_J=128 M_J=8", result.output)
            with open("grid.csv", newline="") as f:
                rows = list(csv.reader(f))
            self.assertEqual(rows[0], ["k", "m", "re", "im", "occupied"])
            self.assertEqual(len(rows), 1 + 256 * 28)

    def test_crlb(self) -> None:
        with self.runner.isolated_filesystem():
            result = self.runner.invoke(main, ["crlb"])
            self.assertEqual(result.exit_code, 0, result.output)
            with open("crlb.csv", newline="") as f:
                rows = list(csv.reader(f))
            self.assertEqual(len(rows), 1 + 52)
            manifest = json.loads(Path("manifest.json").read_text())
            self.assertAlmostEqual(manifest["numeric_over_closed_form"]["range"], 0.7473214188966, delta=1e-9)

    def test_sweep_compare(self) -> None:
        with self.runner.isolated_filesystem():
            result = self.runner.invoke(
                main,
                ["sweep", "--preset", "short", "--signal", "both", "--trials", "3", "-s", "sweep_values=0,10"],
            )
            self.assertEqual(result.exit_code, 0, result.output)
            with open("compare.csv", newline="") as f:
                rows = list(csv.reader(f))
            self.assertEqual(rows[0][0], "signal")
            self.assertEqual(len(rows), 1 + 4)
            manifest = json.loads(Path("manifest.json").read_text())
            self.assertEqual(manifest["signals"], ["dmrs", "data"])

    def test_sweep_single_signal(self) -> None:
        with self.runner.isolated_filesystem():
            result = self.runner.invoke(
                main,
                ["sweep", "--preset", "short", "--trials", "2", "--workers", "2", "-s", "sweep_values=5"],
            )
            self.assertEqual(result.exit_code, 0, result.output)
            self.assertTrue(Path("sweep.csv").exists())

    def test_missing_config_file(self) -> None:
        with self.runner.isolated_filesystem():
            result = self.runner.invoke(main, ["bounds", "-c", "nope.cfg"])
            self.assertEqual(result.exit_code, 2)

    def test_unknown_config_key(self) -> None:
        with self.runner.isolated_filesystem():
            Path("run.cfg").write_text("bandwidth = 30e6\n")
            result = self.runner.invoke(main, ["bounds", "-c", "run.cfg"])
            self.assertEqual(result.exit_code, 3)
            self.assertIn("Error:", result.output)
            self.assertIn("bandwidth", result.output)

    def test_malformed_config_line(self) -> None:
        with self.runner.isolated_filesystem():
            Path("bad.cfg").write_text("trials = 5\nthis line has no equals\n")
            result = self.runner.invoke(main, ["bounds", "-c", "bad.cfg"])
            self.assertEqual(result.exit_code, 2)
            self.assertIn("bad.cfg:2", result.output)
            self.assertIn("this line has no equals", result.output)

    def test_invalid_override(self) -> None:
        with self.runner.isolated_filesystem():
            result = self.runner.invoke(main, ["sweep", "-s", "trials=0"])
            self.assertEqual(result.exit_code, 3)

    def test_malformed_assignment(self) -> None:
        result = self.runner.invoke(main, ["bounds", "-s", "trials"])
        self.assertEqual(result.exit_code, 2)

    def test_crlb_degenerate_lattice(self) -> None:
        with self.runner.isolated_filesystem():
            result = self.runner.invoke(main, ["crlb", "-s", "dmrs_positions=2"])
            self.assertEqual(result.exit_code, 3)
            self.assertIn("Error:", result.output)


if __name__ == "__main__":
    unittest.main()
