"""
Unit tests for the command-line interface.
"""

import io
import json
import os
import tempfile
import unittest
from contextlib import redirect_stderr, redirect_stdout
from unittest.mock import patch

from fmus_cubic import __version__
from fmus_cubic.cli import EXIT_NUMERICAL, EXIT_OK, EXIT_USAGE, main
from fmus_cubic.config import load_calibration
from fmus_cubic.exceptions import NumericalError


def run(argv):
    """Run the CLI and return (exit code, stdout)."""
    out = io.StringIO()
    with redirect_stdout(out), redirect_stderr(io.StringIO()):
        code = main(argv)
    return code, out.getvalue()


def run_json(argv):
    code, text = run(argv)
    return code, json.loads(text)


class TestCli(unittest.TestCase):
    """Test cases for the fmus-cubic commands."""

    def assertUsageError(self, argv):
        with redirect_stdout(io.StringIO()), redirect_stderr(io.StringIO()):
            with self.assertRaises(SystemExit) as ctx:
                main(argv)
        self.assertEqual(ctx.exception.code, EXIT_USAGE)

    def test_fluid(self):
        """Test the fluid command on published cells."""
        code, envelope = run_json(["fluid", "--C", "0.4", "--beta", "0.3", "--rtt", "1", "--p", "0.01"])
        self.assertEqual(code, EXIT_OK)
        self.assertEqual(envelope["command"], "fluid")
        self.assertEqual(envelope["version"], __version__)
        self.assertIsNone(envelope["seed"])
        self.assertAlmostEqual(envelope["results"]["mean_window"], 33.33, delta=0.01)
        _, envelope = run_json(["fluid", "--rtt", "0.2", "--p", "0.005"])
        self.assertAlmostEqual(envelope["results"]["mean_window"], 18.53, delta=0.01)
        self.assertTrue(envelope["results"]["reno_branch"])

    def test_fluid_without_reno(self):
        """Test the pure fluid window."""
        _, envelope = run_json(["fluid", "--rtt", "0.2", "--p", "0.005", "--no-reno"])
        self.assertLess(envelope["results"]["mean_window"], 18.53)

    def test_fluid_usage_errors(self):
        """Test out-of-range parameters."""
        self.assertUsageError(["fluid", "--p", "0"])
        self.assertUsageError(["fluid", "--beta", "1.5"])
        self.assertUsageError(["fluid", "--rtt", "-1"])

    def test_iterate_csv(self):
        """Test the loss-map trace."""
        code, text = run(["iterate", "--x0", "1,100", "--iters", "5"])
        self.assertEqual(code, EXIT_OK)
        lines = text.splitlines()
        self.assertEqual(lines[0], "k,x0=1,x0=100")
        self.assertEqual(len(lines), 7)

    def test_iterate_from_fixed_point(self):
        """Test a constant column from x*."""
        _, envelope = run_json(["iterate", "--format", "json", "--iters", "3", "--x0", "1"])
        x_star = envelope["results"]["x_star"]
        _, envelope = run_json(["iterate", "--format", "json", "--iters", "3", "--x0", repr(x_star)])
        column = list(envelope["results"]["trajectories"].values())[1]
        for x in column:
            self.assertAlmostEqual(x / x_star, 1.0, places=8)

    def test_simulate_is_byte_identical(self):
        """Test that the same seed gives the same output bytes."""
        argv = ["simulate", "--p", "0.01", "--rtts", "20000", "--seed", "3"]
        first = run(argv)
        second = run(argv)
        self.assertEqual(first, second)
        envelope = json.loads(first[1])
        self.assertEqual(envelope["seed"], 3)
        self.assertEqual(envelope["inputs"]["n_rtts"], 20000)
        self.assertGreater(envelope["results"]["losses"], 0)

    def test_simulate_usage_errors(self):
        """Test invalid run lengths."""
        self.assertUsageError(["simulate", "--rtts", "0"])
        self.assertUsageError(["simulate", "--wmax", "0"])
        self.assertUsageError(["simulate", "--accounting", "per_byte"])

    def test_simulate_accounting(self):
        """Test that whole_rtt counts more packets on the same loss sequence."""
        argv = ["simulate", "--p", "0.01", "--rtts", "20000", "--seed", "3"]
        _, lost = run_json(argv)
        _, whole = run_json(argv + ["--accounting", "whole_rtt"])
        self.assertEqual(lost["inputs"]["accounting"], "lost_packet")
        self.assertEqual(whole["inputs"]["accounting"], "whole_rtt")
        self.assertEqual(lost["results"]["losses"], whole["results"]["losses"])
        self.assertEqual(lost["results"]["window_average"], whole["results"]["window_average"])
        self.assertLess(lost["results"]["mean_window"], whole["results"]["mean_window"])

    def test_simulate_trace_csv(self):
        """Test the window trace as CSV."""
        code, text = run(["simulate", "--rtts", "100", "--trace", "10", "--format", "csv"])
        self.assertEqual(code, EXIT_OK)
        lines = text.splitlines()
        self.assertEqual(lines[0], "rtt_index,window")
        self.assertEqual(len(lines), 11)

    def test_limit_mc(self):
        """Test the limit-chain estimate and its determinism."""
        argv = ["limit-mc", "--n", "300", "--burnin", "10", "--seed", "5"]
        first = run(argv)
        self.assertEqual(first, run(argv))
        envelope = json.loads(first[1])
        self.assertEqual(envelope["seed"], 5)
        self.assertEqual(envelope["results"]["n_samples"], 300)
        self.assertAlmostEqual(envelope["results"]["coefficient"], 1 / envelope["results"]["mean_gbar"])

    def test_limit_mc_trace(self):
        """Test the running-mean trace as CSV."""
        _, text = run(["limit-mc", "--n", "50", "--trace", "--format", "csv"])
        lines = text.splitlines()
        self.assertEqual(lines[0], "n,running_mean")
        self.assertEqual(len(lines), 51)

    def test_seed_from_environment(self):
        """Test the environment override of the default seed."""
        with patch.dict(os.environ, {"FMUS_CUBIC_SEED": "9"}):
            _, envelope = run_json(["limit-mc", "--n", "50", "--burnin", "0"])
        self.assertEqual(envelope["seed"], 9)

    def test_table(self):
        """Test the default table as CSV."""
        code, text = run(["table"])
        self.assertEqual(code, EXIT_OK)
        lines = text.splitlines()
        self.assertEqual(lines[0], "p,R,det_fluid,approx_markov")
        self.assertEqual(len(lines), 26)
        self.assertEqual(lines[1].split(",")[:2], ["0.01", "1"])

    def test_table_json_and_out(self):
        """Test JSON records written to a file."""
        with tempfile.TemporaryDirectory() as directory:
            path = os.path.join(directory, "table.json")
            code, text = run(
                ["table", "--beta", "0.2", "--p-list", "3e-3", "--rtt-list", "1", "--format", "json", "--out", path]
            )
            self.assertEqual(code, EXIT_OK)
            self.assertEqual(text, "")
            with open(path, encoding="utf-8") as handle:
                envelope = json.load(handle)
        row = envelope["results"][0]
        self.assertAlmostEqual(row["approx_markov"], 120.12, delta=1.5)
        self.assertIsNone(envelope["seed"])

    def test_table_usage_errors(self):
        """Test empty lists and unknown methods."""
        self.assertUsageError(["table", "--p-list", ""])
        self.assertUsageError(["table", "--rtt-list", ","])
        self.assertUsageError(["table", "--methods", "ns2"])

    def test_table_uncalibrated_beta(self):
        """Test that a missing calibration is reported as a usage error."""
        self.assertUsageError(["table", "--beta", "0.5", "--p-list", "0.01", "--rtt-list", "1"])

    def test_bound(self):
        """Test gamma, H(0) and the dominance report."""
        code, envelope = run_json(["bound", "--y-list", "0,1,2"])
        self.assertEqual(code, EXIT_OK)
        results = envelope["results"]
        self.assertAlmostEqual(results["gamma"], 0.0510, delta=0.001)
        self.assertEqual(results["bound"][0]["H"], 1.0)
        self.assertIsNone(results["bound"][0]["x_star"])
        self.assertTrue(results["dominance"]["holds"])

    def test_bound_survival_curves(self):
        """Test survival curves next to H(y) as CSV."""
        _, text = run(["bound", "--y-list", "0,1", "--x-list", "0,2", "--format", "csv"])
        self.assertEqual(text.splitlines()[0], "y,H,x=0,x=2")

    def test_ks(self):
        """Test the KS command on a small sample."""
        code, envelope = run_json(["ks", "--p", "0.01,0.001", "--samples", "2000", "--seed", "4"])
        self.assertEqual(code, EXIT_OK)
        self.assertEqual(envelope["seed"], 4)
        self.assertEqual([row["p"] for row in envelope["results"]], [0.01, 0.001])
        for row in envelope["results"]:
            self.assertGreater(row["ks"], 0.0)
            self.assertLess(row["ks"], 1.0)

    def test_ks_usage_errors(self):
        """Test invalid sample sizes and windows below p**0.75."""
        self.assertUsageError(["ks", "--samples", "0"])
        self.assertUsageError(["ks", "--p", "0.01", "--x", "0.001"])

    def test_calibrate(self):
        """Test writing a calibration file."""
        with tempfile.TemporaryDirectory() as directory:
            path = os.path.join(directory, "calibration.json")
            code, envelope = run_json(
                ["calibrate", "--beta-list", "0.3", "--n", "200", "--burnin", "10", "--out", path]
            )
            self.assertEqual(code, EXIT_OK)
            entries = load_calibration(path)
        self.assertEqual(len(entries), 1)
        self.assertEqual(entries[0].n, 200)
        self.assertEqual(entries[0].coefficient, envelope["results"][0]["coefficient"])

    def test_numerical_failure_exit_code(self):
        """Test that numerical failures exit with status 1."""
        with patch("fmus_cubic.cli.fluid.solve", side_effect=NumericalError("no bracket")):
            code, text = run(["fluid"])
        self.assertEqual(code, EXIT_NUMERICAL)
        self.assertEqual(text, "")


if __name__ == "__main__":
    unittest.main()
