import math
import unittest

import numpy as np
from scipy.signal import find_peaks

from models import CoherenceMatrix, Moments, Regime, SourceSpec, WaveguideSpec
from services.engine import Engine
from services.observables import (
    TraceError,
    coherence_radius,
    heisenberg_bound,
    moments,
    purity_from_kernel,
    purity_numeric,
    schrodinger_robertson,
    squeezing,
    up_bound,
)
from services.source import decompose, purity_closed_form
from services.waveguide import build_mode_basis

GUIDE = WaveguideSpec(n0=1.5, omega=0.007, wavelength=0.63)
K = GUIDE.k


class FundamentalModeTestCase(unittest.TestCase):
    """Moments of the waveguide ground state."""

    def setUp(self):
        self.basis = build_mode_basis(GUIDE, 6)
        G = np.zeros((6, 6), dtype=complex)
        G[0, 0] = 1.0
        self.cm = CoherenceMatrix(G=G, z=0.0, regime=Regime.EXACT)

    def test_minimum_uncertainty(self):
        m = moments(self.cm, self.basis)
        omega = GUIDE.omega
        self.assertAlmostEqual(m.sigma_x2 / (1.0 / (2 * K * omega)), 1.0, places=14)
        self.assertAlmostEqual(m.sigma_p2 / (omega / (2 * K)), 1.0, places=14)
        self.assertEqual(m.sigma_xp, 0.0)
        self.assertEqual(m.mean_x, 0.0)
        self.assertAlmostEqual(m.sigma_x2 * m.sigma_p2 / heisenberg_bound(K), 1.0, places=14)

    def test_squeezing_is_unity(self):
        self.assertAlmostEqual(squeezing(moments(self.cm, self.basis), GUIDE.omega), 1.0, places=14)

    def test_coherent_radius_is_infinite(self):
        self.assertTrue(math.isinf(coherence_radius(moments(self.cm, self.basis), K)))

    def test_pure_state_purity(self):
        self.assertEqual(purity_numeric(self.cm), 1.0)

    def test_zero_trace(self):
        empty = CoherenceMatrix(G=np.zeros((6, 6)), z=0.0, regime=Regime.EXACT)
        with self.assertRaises(TraceError):
            moments(empty, self.basis)
        with self.assertRaises(TraceError):
            purity_numeric(empty)

    def test_shape_mismatch(self):
        with self.assertRaises(ValueError):
            moments(self.cm, build_mode_basis(GUIDE, 4))


class MomentHelpersTestCase(unittest.TestCase):

    def test_bounds(self):
        self.assertEqual(up_bound(SourceSpec(a0=10, r0=math.inf), K), heisenberg_bound(K))
        self.assertAlmostEqual(up_bound(SourceSpec(a0=10, r0=5), K) * 4 * K ** 2, 9.0, places=12)
        self.assertAlmostEqual(up_bound(SourceSpec(a0=10, r0=5), K), 2.262e-2, delta=1e-5)

    def test_coherence_radius_from_moments(self):
        m = Moments(mean_x=0.0, mean_p=0.0, sigma_x2=25.0, sigma_p2=0.09 / K ** 2, sigma_xp=0.0)
        excess = schrodinger_robertson(m) - heisenberg_bound(K)
        expected = math.sqrt(2.0 * m.sigma_x2 / (K ** 2 * excess))
        self.assertAlmostEqual(coherence_radius(m, K), expected, places=10)
        self.assertAlmostEqual(coherence_radius(m, K), 5.0, places=10)

    def test_coherence_radius_is_vectorized(self):
        bound = heisenberg_bound(K)
        values = {"sigma_x2": np.array([25.0, 25.0]), "up_sr": np.array([bound, 9.0 * bound])}
        r_c = coherence_radius(values, K)
        self.assertTrue(math.isinf(r_c[0]))
        self.assertAlmostEqual(r_c[1], 5.0, places=10)

    def test_squeezing_rejects_zero_momentum_spread(self):
        m = Moments(mean_x=0.0, mean_p=0.0, sigma_x2=1.0, sigma_p2=0.0, sigma_xp=0.0)
        with self.assertRaises(ValueError):
            squeezing(m, GUIDE.omega)


class LaunchIdentityTestCase(unittest.TestCase):
    """Moments of a GSM launch at z = 0."""

    def test_identity_grid(self):
        for a0 in (5.0, 10.0, 20.0):
            for r0 in (2.0, 5.0, 10.0, math.inf):
                for x0 in (0.0, 10.0, 20.0):
                    source = SourceSpec(a0=a0, r0=r0, x0=x0)
                    record = Engine(source, GUIDE).record_at(0.0)
                    with self.subTest(a0=a0, r0=r0, x0=x0):
                        self.assertAlmostEqual(record.sigma_x2 / (a0 ** 2 / 4), 1.0, delta=1e-6)
                        self.assertAlmostEqual(record.sigma_xp, 0.0, delta=1e-9)
                        self.assertAlmostEqual(record.mean_x, x0, delta=1e-6 * max(x0, 1.0))
                        self.assertAlmostEqual(record.up_sr / up_bound(source, K), 1.0, delta=1e-9)
                        self.assertAlmostEqual(record.sr_excess, 1.0, delta=1e-9)
                        if math.isinf(r0):
                            self.assertTrue(math.isinf(record.r_c))
                        else:
                            self.assertAlmostEqual(record.r_c / r0, 1.0, delta=1e-6)

    def test_squeezing_at_launch(self):
        source = SourceSpec(a0=10, r0=10, x0=10)
        record = Engine(source, GUIDE).record_at(0.0)
        sigma_p2 = (1.0 / source.a0 ** 2 + 2.0 / source.r0 ** 2) / K ** 2
        self.assertAlmostEqual(record.sigma_p2 / sigma_p2, 1.0, delta=1e-6)
        self.assertAlmostEqual(record.nu, GUIDE.omega * (source.a0 / 2) / math.sqrt(sigma_p2), delta=1e-6)


class PurityTestCase(unittest.TestCase):
    """Purity and entropy along z."""

    @classmethod
    def setUpClass(cls):
        cls.source = SourceSpec(a0=10, r0=5, x0=20)
        cls.engine = Engine(cls.source, GUIDE)

    def test_matches_closed_form(self):
        self.assertAlmostEqual(self.engine.purity, 1.0 / 3.0, delta=1e-9)
        self.assertAlmostEqual(self.engine.entropy, 2.0 * math.log(2.0), places=12)

    def test_invariant_along_z(self):
        purity0 = self.engine.record_at(0.0).purity
        for z in np.linspace(0.0, 3.0e6, 13):
            record = self.engine.record_at(float(z))
            with self.subTest(z=z):
                self.assertAlmostEqual(record.purity, purity0, delta=1e-10)
                self.assertEqual(record.entropy, self.engine.entropy)

    def test_kernel_quadrature(self):
        for r0 in (1.0, 5.0, 10.0, 100.0):
            source = SourceSpec(a0=10, r0=r0, x0=20)
            with self.subTest(r0=r0):
                self.assertAlmostEqual(purity_from_kernel(source), purity_closed_form(decompose(source)), delta=1e-10)
        self.assertAlmostEqual(purity_from_kernel(SourceSpec(a0=10, r0=math.inf)), 1.0, delta=1e-10)


class PropagationTestCase(unittest.TestCase):
    """Moments along z in both regimes."""

    @classmethod
    def setUpClass(cls):
        cls.engine = Engine(SourceSpec(a0=10, r0=5, x0=10), GUIDE)

    def test_band_sums_match_full_matrix(self):
        zs = [0.0, 337.0, 5000.0, 123456.0]
        for regime in (Regime.EXACT, Regime.PARAXIAL):
            fast = self.engine.records(zs, regime)
            for z, record in zip(zs, fast):
                full = self.engine.record_at(z, regime)
                with self.subTest(z=z, regime=regime.value):
                    for field in ("sigma_x2", "sigma_p2", "up_sr", "r_c", "nu", "mean_x"):
                        self.assertAlmostEqual(
                            getattr(record, field),
                            getattr(full, field),
                            delta=1e-8 * max(abs(getattr(full, field)), 1.0),
                        )
                    self.assertAlmostEqual(record.sigma_xp, full.sigma_xp, delta=1e-10)

    def test_record_uses_moment_helpers(self):
        z = 4321.0
        record = self.engine.record_at(z)
        m = moments(self.engine.coherence(z), self.engine.basis)
        self.assertAlmostEqual(record.nu, squeezing(m, GUIDE.omega), delta=1e-12 * record.nu)
        self.assertAlmostEqual(record.sigma_x2, m.sigma_x2, delta=1e-12 * m.sigma_x2)
        self.assertAlmostEqual(record.up_h, m.sigma_x2 * m.sigma_p2, delta=1e-12 * record.up_h)

    def test_summary_diagnostics(self):
        summary = self.engine.summary()
        self.assertAlmostEqual(summary["entropy_spectrum"], summary["entropy"], delta=1e-8)
        self.assertLess(summary["kernel_residual"], 1e-8)

    def test_chunking_does_not_change_values(self):
        zs = np.linspace(0.0, 2.0e5, 1500)
        whole = self.engine.scan_arrays(zs)
        parts = [self.engine.scan_arrays(chunk) for chunk in np.array_split(zs, 7)]
        np.testing.assert_allclose(whole["r_c"], np.concatenate([p["r_c"] for p in parts]), rtol=1e-14)
        np.testing.assert_allclose(whole["nu"], np.concatenate([p["nu"] for p in parts]), rtol=1e-14)

    def test_paraxial_invariant(self):
        zs = np.linspace(0.0, 2.5e6, 200)
        up_sr = self.engine.scan_arrays(zs, Regime.PARAXIAL)["up_sr"]
        self.assertLess(float(np.max(np.abs(up_sr / up_sr[0] - 1.0))), 1e-8)
        self.assertAlmostEqual(up_sr[0], 9.0 / (4.0 * K ** 2), delta=1e-9)
        self.assertAlmostEqual(up_sr[0], 2.262e-2, delta=1e-5)

    def test_nonparaxial_products_grow_between_revivals(self):
        z_rev = self.engine.lengths.z_rev_estimate
        records = self.engine.records(np.linspace(0.2 * z_rev, 0.8 * z_rev, 300))
        self.assertGreater(max(r.sr_excess for r in records), 1.05)
        self.assertTrue(all(r.sr_excess >= 1.0 - 1e-9 for r in records))
        self.assertTrue(all(r.up_h >= r.up_sr * (1.0 - 1e-12) for r in records))

    def test_coherence_radius_collapses(self):
        L_osc = self.engine.lengths.L_osc
        r_c = self.engine.scan_arrays(np.linspace(0.0, 10.0 * L_osc, 2000))["r_c"]
        self.assertAlmostEqual(r_c[0], 5.0, delta=1e-5)
        self.assertLess(float(np.min(r_c)), 0.6 * 5.0)


class SqueezingPeriodTestCase(unittest.TestCase):
    """Squeezing coefficient oscillates with the ray half-period."""

    def test_period(self):
        engine = Engine(SourceSpec(a0=10, r0=10, x0=10), GUIDE)
        zs = np.linspace(0.0, 6000.0, 4000)
        nu = engine.scan_arrays(zs)["nu"]
        peaks, _ = find_peaks(nu)
        self.assertGreaterEqual(peaks.size, 6)
        spacing = float(np.median(np.diff(zs[peaks])))
        self.assertAlmostEqual(spacing / engine.lengths.L_osc, 1.0, delta=0.02)
        self.assertAlmostEqual(engine.lengths.L_osc, 673.3, delta=0.2)


if __name__ == '__main__':
    unittest.main()
