import math
import sys
import unittest

import numpy as np

from models import Regime, SourceSpec, WaveguideSpec
from services.source import decompose
from services.waveguide import (
    CutoffError,
    beta,
    betas,
    build_mode_basis,
    characteristic_lengths,
    default_mode_count,
    displacement_mode_number,
    estimate_mean_mode_number,
    m_guided,
    mode_scale,
    relative_betas,
    waveguide_mode,
    waveguide_modes,
)
from utils.errors import NumericalGuardError
from utils.hgbasis import build_quadrature


def paper_guide(**changes) -> WaveguideSpec:
    values = {"n0": 1.5, "omega": 0.007, "lambda": 0.63}
    values.update(changes)
    return WaveguideSpec.model_validate(values)


class WaveguideSpecTestCase(unittest.TestCase):

    def test_wavenumber(self):
        self.assertAlmostEqual(paper_guide().k, 9.97331, places=5)

    def test_alias_and_field_name(self):
        self.assertEqual(paper_guide(), WaveguideSpec(n0=1.5, omega=0.007, wavelength=0.63))


class CutoffTestCase(unittest.TestCase):
    """Number of guided modes."""

    def test_paper_cutoff(self):
        self.assertEqual(m_guided(paper_guide()), 1602)

    def test_doubling_gradient_halves_cutoff(self):
        ratio = m_guided(paper_guide(omega=0.014)) / m_guided(paper_guide())
        self.assertAlmostEqual(ratio, 0.5, delta=0.01)

    def test_vanishing_gradient_has_no_cutoff(self):
        self.assertEqual(m_guided(paper_guide(omega=1e-20)), sys.maxsize)

    def test_beyond_cutoff(self):
        spec = paper_guide()
        beta(spec, 1602)
        with self.assertRaises(CutoffError) as ctx:
            beta(spec, 1603)
        self.assertIsInstance(ctx.exception, NumericalGuardError)
        with self.assertRaises(CutoffError):
            build_mode_basis(spec, 1604)
        # The paraxial expansion has no cutoff
        self.assertLess(beta(spec, 5000, Regime.PARAXIAL), spec.k * spec.n0)


class PropagationConstantTestCase(unittest.TestCase):
    """Exact and paraxial propagation constants."""

    def setUp(self):
        self.spec = paper_guide()

    def test_fundamental(self):
        self.assertAlmostEqual(beta(self.spec, 0), 14.95763, delta=1e-5)

    def test_homogeneous_limit(self):
        spec = paper_guide(omega=1e-9)
        for m in (0, 10, 100):
            self.assertAlmostEqual(beta(spec, m), spec.k * spec.n0, places=6)

    def test_exact_below_paraxial(self):
        exact = betas(self.spec, 400, Regime.EXACT)
        paraxial = betas(self.spec, 400, Regime.PARAXIAL)
        self.assertTrue(np.all(exact <= paraxial))
        self.assertTrue(np.all(exact[1:] < paraxial[1:]))

    def test_exact_spectrum_is_concave(self):
        exact = betas(self.spec, 1603, Regime.EXACT)
        self.assertTrue(np.all(np.diff(exact) < 0))
        self.assertTrue(np.all(np.diff(exact, n=2) < 0))

    def test_paraxial_spectrum_is_equidistant(self):
        delta = relative_betas(self.spec, 300, 0, Regime.PARAXIAL)
        np.testing.assert_allclose(np.diff(delta), -self.spec.omega / self.spec.n0, rtol=1e-12)

    def test_relative_constants_match_differences(self):
        m_ref = 15
        full = betas(self.spec, 200, Regime.EXACT)
        delta = relative_betas(self.spec, 200, m_ref, Regime.EXACT)
        np.testing.assert_allclose(delta, full - full[m_ref], rtol=0, atol=1e-12)
        self.assertEqual(delta[m_ref], 0.0)

    def test_invalid_index(self):
        with self.assertRaises(ValueError):
            beta(self.spec, -1)


class ModeBasisTestCase(unittest.TestCase):
    """Retained guided modes."""

    def setUp(self):
        self.spec = paper_guide()
        self.basis = build_mode_basis(self.spec, 201, m_ref=12)

    def test_basis_contents(self):
        self.assertEqual(self.basis.M, 201)
        self.assertEqual(self.basis.m_guided, 1602)
        self.assertEqual(self.basis.m_ref, 12)
        self.assertAlmostEqual(self.basis.scale, mode_scale(self.spec))
        np.testing.assert_array_equal(self.basis.delta_beta(Regime.EXACT), self.basis.delta_exact)
        np.testing.assert_array_equal(self.basis.delta_beta("paraxial"), self.basis.delta_paraxial)

    def test_reference_mode_is_clipped(self):
        self.assertEqual(build_mode_basis(self.spec, 10, m_ref=50).m_ref, 9)

    def test_fundamental_peak(self):
        k_omega = self.spec.k * self.spec.omega
        self.assertAlmostEqual(waveguide_mode(self.basis, 0, 0.0), (k_omega / math.pi) ** 0.25, places=12)
        self.assertAlmostEqual(waveguide_mode(self.basis, 0, 0.0), 0.3862, delta=5e-4)
        self.assertEqual(waveguide_mode(self.basis, 1, 0.0), 0.0)

    def test_orthonormal_modes(self):
        rule = build_quadrature(-120.0, 120.0, 4801)
        psi = waveguide_modes(self.basis, rule.nodes)
        gram = (psi * rule.weights) @ psi.T
        self.assertLess(float(np.max(np.abs(gram - np.eye(201)))), 1e-10)

    def test_mode_index_out_of_range(self):
        with self.assertRaises(ValueError):
            waveguide_mode(self.basis, 201, 0.0)
        with self.assertRaises(ValueError):
            build_mode_basis(self.spec, 0)


class CharacteristicLengthsTestCase(unittest.TestCase):

    def test_paper_lengths(self):
        lengths = characteristic_lengths(paper_guide())
        self.assertAlmostEqual(lengths.L_osc, 673.2, delta=0.1)
        self.assertAlmostEqual(lengths.w0, 5.353, delta=1e-3)
        self.assertAlmostEqual(lengths.z_rev_estimate / 1e6, 2.158, delta=1e-3)
        self.assertAlmostEqual(lengths.z_cat_estimate, lengths.z_rev_estimate / 2)
        self.assertAlmostEqual(lengths.z_rev_quadratic, 2 * lengths.z_rev_estimate)

    def test_revival_scales_with_inverse_square_gradient(self):
        fast = characteristic_lengths(paper_guide())
        slow = characteristic_lengths(paper_guide(omega=0.0035))
        self.assertAlmostEqual(slow.z_rev_estimate / fast.z_rev_estimate, 4.0, places=12)


class ModeCountTestCase(unittest.TestCase):
    """Mean mode number estimates and the retained-mode heuristic."""

    def setUp(self):
        self.spec = paper_guide()
        self.source = SourceSpec(a0=10, r0=5, x0=20)

    def test_mean_mode_estimate(self):
        self.assertAlmostEqual(estimate_mean_mode_number(self.source, self.spec), 14.98, delta=0.01)

    def test_matched_fundamental_has_no_excitation(self):
        w0 = characteristic_lengths(self.spec).w0
        matched = SourceSpec(a0=w0, r0=math.inf, x0=0.0)
        self.assertAlmostEqual(estimate_mean_mode_number(matched, self.spec), 0.0, places=12)

    def test_displacement_scaling(self):
        near = displacement_mode_number(self.source, self.spec)
        far = displacement_mode_number(self.source.model_copy(update={"x0": 40.0}), self.spec)
        self.assertAlmostEqual(near, 13.96, delta=0.01)
        self.assertAlmostEqual(far / near, 4.0, places=12)

    def test_default_mode_count(self):
        dec = decompose(self.source)
        M = default_mode_count(dec, self.spec)
        self.assertGreater(M, 150)
        self.assertLessEqual(M, m_guided(self.spec) + 1)
        self.assertEqual(default_mode_count(dec, self.spec, max_modes=50), 50)
        self.assertEqual(default_mode_count(dec, self.spec, max_modes=5000), 1603)


if __name__ == '__main__':
    unittest.main()
