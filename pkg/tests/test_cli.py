import io
import tempfile
import unittest
from contextlib import redirect_stderr, redirect_stdout
from pathlib import Path
from unittest import mock

import numpy as np

from config import settings
from models import WaveguideSpec
from scripts.gsm_cat import EXIT_CONFIG, EXIT_NUMERICAL, EXIT_OK, main
from services.evolution import modal_coherence
from services.waveguide import characteristic_lengths
from utils.csv_utils import read_csv


def read_column(path, name):
    _, header, rows = read_csv(path)
    index = header.index(name)
    return np.array([float(row[index]) for row in rows])


PRESETS = settings.PRESETS_DIR

SMALL = """
[source]
a0 = 10
r0 = 10
x0 = 10

[waveguide]
n0 = 1.5
omega = 0.007
lambda = 0.63

[numerics]
grid_points = 257

[scan]
z_min = 0
z_max = 5000
n_z = 41
regime = both

[outputs]
prefix = small
"""


class CliTestCase(unittest.TestCase):
    """End-to-end runs of the gsm-cat command."""

    def setUp(self):
        self.show_progress = settings.SHOW_PROGRESS
        settings.SHOW_PROGRESS = False
        self.tmp = tempfile.TemporaryDirectory()
        self.out = Path(self.tmp.name)
        self.small = self.out / "small.cfg"
        self.small.write_text(SMALL, encoding="utf-8")

    def tearDown(self):
        settings.SHOW_PROGRESS = self.show_progress
        self.tmp.cleanup()

    def run_cli(self, *argv):
        stdout, stderr = io.StringIO(), io.StringIO()
        with redirect_stdout(stdout), redirect_stderr(stderr):
            code = main(list(argv) + ["--output-dir", str(self.out)])
        return code, stdout.getvalue(), stderr.getvalue()

    def test_missing_config(self):
        code, _, err = self.run_cli("info", "--config", str(self.out / "missing.cfg"))
        self.assertEqual(code, EXIT_CONFIG)
        self.assertIn("Configuration error", err)

    def test_bad_override(self):
        code, _, err = self.run_cli("info", "--config", str(self.small), "--set", "source.a0=-1")
        self.assertEqual(code, EXIT_CONFIG)
        self.assertIn("source.a0", err)

    def test_numerical_guard_exit(self):
        code, _, err = self.run_cli("info", "--config", str(PRESETS / "fig5.cfg"), "--set", "numerics.max_modes=5")
        self.assertEqual(code, EXIT_NUMERICAL)
        self.assertIn("Numerical guard failed", err)

    def test_indefinite_coherence_matrix_exit(self):
        def indefinite(coupling, dec):
            G = modal_coherence(coupling, dec)
            G[-1, -1] -= 0.5 * np.trace(G)
            return G

        with mock.patch("services.engine.modal_coherence", side_effect=indefinite):
            code, _, err = self.run_cli("info", "--config", str(self.small))
        self.assertEqual(code, EXIT_NUMERICAL)
        self.assertIn("negative eigenvalue", err)

    def test_purity_curve_a0_sweep_needs_finite_r0(self):
        code, _, err = self.run_cli(
            "purity-curve", "--config", str(PRESETS / "fig1.cfg"),
            "--set", "purity_curve.vary=a0", "--set", "source.r0=inf",
        )
        self.assertEqual(code, EXIT_CONFIG)
        self.assertIn("purity_curve.vary", err)

    def test_info_with_coupling_dump(self):
        code, out, _ = self.run_cli("info", "--config", str(PRESETS / "fig5.cfg"), "--dump-coupling")
        self.assertEqual(code, EXIT_OK)
        self.assertIn("L_osc", out)
        _, header, rows = read_csv(self.out / "fig5_coupling.csv")
        self.assertEqual(len(rows), 40)
        self.assertEqual(header[0], "p")

    def test_scan_both_regimes(self):
        code, _, _ = self.run_cli("scan", "--config", str(self.small), "--backend", "local", "--workers", "2")
        self.assertEqual(code, EXIT_OK)
        exact = self.out / "small_scan_exact.csv"
        paraxial = self.out / "small_scan_paraxial.csv"
        self.assertTrue(exact.exists())
        self.assertTrue(paraxial.exists())
        self.assertEqual(read_column(exact, "z_um").size, 41)
        self.assertAlmostEqual(float(read_column(paraxial, "r_c_um")[0]), 10.0, delta=1e-4)

    def test_profile_split_columns(self):
        code, _, _ = self.run_cli("profile", "--config", str(self.small), "--z", "1000")
        self.assertEqual(code, EXIT_OK)
        _, header, rows = read_csv(self.out / "small_profile_z1000.csv")
        self.assertEqual(header, ["x_um", "I_total", "I_diagonal", "I_cross"])
        self.assertEqual(len(rows), 257)

        code, _, _ = self.run_cli("profile", "--config", str(self.small), "--z", "1000", "--no-split")
        self.assertEqual(code, EXIT_OK)
        _, header, _ = read_csv(self.out / "small_profile_z1000.csv")
        self.assertEqual(header, ["x_um", "I_total"])

    def test_mixture_at_given_distance(self):
        code, out, _ = self.run_cli(
            "mixture", "--config", str(PRESETS / "fig6.cfg"), "--z", "100000", "--set", "numerics.grid_points=257"
        )
        self.assertEqual(code, EXIT_OK)
        self.assertIn("Mixture at z = 100000 um", out)
        for name in ("plus", "minus", "overlay", "sum"):
            self.assertTrue((self.out / f"fig6_mixture_{name}.csv").exists())

        plus = read_column(self.out / "fig6_mixture_plus.csv", "I_total")
        minus = read_column(self.out / "fig6_mixture_minus.csv", "I_total")
        total = read_column(self.out / "fig6_mixture_sum.csv", "I_total")
        for a, b, c in zip(plus, minus, total):
            self.assertAlmostEqual(c, 0.5 * (a + b), delta=1e-9 * max(abs(a) + abs(b), 1.0))

    def test_purity_curve(self):
        code, _, _ = self.run_cli("purity-curve", "--config", str(PRESETS / "fig1.cfg"), "--set", "purity_curve.n=5")
        self.assertEqual(code, EXIT_OK)
        path = self.out / "fig1_purity_curve.csv"
        closed = read_column(path, "purity_closed_form")
        numeric = read_column(path, "purity_numeric")
        self.assertEqual(closed.size, 5)
        for a, b in zip(closed, numeric):
            self.assertAlmostEqual(a, b, delta=1e-8)
        self.assertTrue(all(later > earlier for earlier, later in zip(closed, closed[1:])))

    def test_find_cat_without_recoherence(self):
        w0 = characteristic_lengths(WaveguideSpec(n0=1.5, omega=0.007, wavelength=0.63)).w0
        code, out, _ = self.run_cli(
            "find-cat",
            "--config",
            str(self.small),
            "--set",
            f"source.a0={w0!r}",
            "--set",
            "source.r0=inf",
            "--set",
            "source.x0=0",
            "--set",
            "find_cat.blocks=40",
        )
        self.assertEqual(code, EXIT_OK)
        self.assertIn("✗", out)
        self.assertTrue((self.out / "small_find_cat.csv").exists())


if __name__ == '__main__':
    unittest.main()
