import math
import unittest
from dataclasses import replace

import numpy as np

from dmrsense.config.settings import DmrsConfig, OfdmParams
from dmrsense.exceptions import ConfigurationError, DegenerateConfigurationError
from dmrsense.sensing.crlb import (
    CrlbInputs,
    crlb_closed_form,
    crlb_curve,
    crlb_numeric_fisher,
    crlb_ratio,
    fisher_matrix,
    get_crlb_method,
)
from dmrsense.waveform.refsig import build_data_grid, build_dmrs_grid


def _close(test: unittest.TestCase, actual: float, expected: float, rel: float = 1e-10) -> None:
    test.assertAlmostEqual(actual, expected, delta=abs(expected) * rel)


class TestCrlbInputs(unittest.TestCase):

    def setUp(self) -> None:
        self.params = OfdmParams()
        self.cfg = DmrsConfig.mapping_type_a(self.params.m_symbols)

    def test_from_config(self) -> None:
        inputs = CrlbInputs.from_config(self.params, self.cfg, snr_db=10.0)
        self.assertEqual((inputs.n_j, inputs.m_j), (128, 40))
        self.assertAlmostEqual(inputs.gamma, 10.0, delta=1e-12)
        self.assertAlmostEqual(inputs.snr_db, 10.0, delta=1e-12)

    def test_from_grid_matches_config(self) -> None:
        grid = build_dmrs_grid(self.params, self.cfg)
        from_grid = CrlbInputs.from_grid(grid, self.params, snr_db=0.0)
        from_config = CrlbInputs.from_config(self.params, self.cfg, snr_db=0.0)
        self.assertEqual(from_grid.subcarriers, from_config.subcarriers)
        self.assertEqual(from_grid.symbols, from_config.symbols)
        self.assertEqual(from_grid.comb_carrier, 2)

    def test_invalid_gamma(self) -> None:
        inputs = CrlbInputs.from_config(self.params, self.cfg, snr_db=0.0)
        for gamma in (0.0, -1.0, math.inf, math.nan):
            with self.subTest(gamma=gamma), self.assertRaises(ConfigurationError):
                replace(inputs, gamma=gamma)
        with self.assertRaises(ConfigurationError):
            inputs.with_snr(-math.inf)

    def test_invalid_bare_dims(self) -> None:
        with self.assertRaises(ConfigurationError):
            CrlbInputs.from_config(self.params, self.cfg, snr_db=0.0, bare_dims="grid")


class TestClosedForm(unittest.TestCase):

    def setUp(self) -> None:
        params = OfdmParams()
        self.inputs = CrlbInputs.from_config(params, DmrsConfig.mapping_type_a(params.m_symbols), snr_db=0.0)

    def test_reference_values(self) -> None:
        report = crlb_closed_form(self.inputs)
        _close(self, report.crlb_range_m2, 5.428553862871892e-04)
        _close(self, report.crlb_velocity_mps2, 3.647406270431064e+07)
        self.assertEqual(report.method, "closed_form")
        self.assertTrue(report.notes)

    def test_inverse_snr_scaling(self) -> None:
        base = crlb_closed_form(self.inputs)
        louder = crlb_closed_form(self.inputs.with_snr(10.0))
        _close(self, louder.crlb_range_m2, base.crlb_range_m2 / 10)
        _close(self, louder.crlb_velocity_mps2, base.crlb_velocity_mps2 / 10)

    def test_attenuation_scaling(self) -> None:
        base = crlb_closed_form(self.inputs)
        weaker = crlb_closed_form(replace(self.inputs, xi=0.5))
        _close(self, weaker.crlb_range_m2, 4 * base.crlb_range_m2)

    def test_extracted_bare_dims(self) -> None:
        total = crlb_closed_form(self.inputs)
        extracted = crlb_closed_form(replace(self.inputs, bare_dims="extracted"))
        _close(self, extracted.crlb_range_m2, 2 * total.crlb_range_m2)
        _close(self, extracted.crlb_velocity_mps2, 3.5 * total.crlb_velocity_mps2)

    def test_root_values(self) -> None:
        report = crlb_closed_form(self.inputs)
        _close(self, report.root_crlb_range_m ** 2, report.crlb_range_m2)


class TestNumericFisher(unittest.TestCase):

    def setUp(self) -> None:
        params = OfdmParams()
        self.params = params
        self.inputs = CrlbInputs.from_config(params, DmrsConfig.mapping_type_a(params.m_symbols), snr_db=0.0)

    def test_reference_values(self) -> None:
        report = crlb_numeric_fisher(self.inputs)
        _close(self, report.crlb_range_m2, 4.056874575357881e-04, rel=1e-9)
        _close(self, report.crlb_velocity_mps2, 4.261111116128446e-04, rel=1e-9)
        self.assertLess(report.condition_number, 1e3)

    def test_centered_lattice(self) -> None:
        report = crlb_numeric_fisher(replace(self.inputs, centered=True))
        _close(self, report.crlb_range_m2, 7.077634905517568e-04, rel=1e-9)
        _close(self, report.crlb_velocity_mps2, 7.458466539772437e-04, rel=1e-9)

    def test_fisher_matrix(self) -> None:
        fisher = fisher_matrix(self.inputs)
        self.assertEqual(fisher.shape, (2, 2))
        self.assertEqual(fisher[0, 1], fisher[1, 0])
        self.assertTrue(np.all(np.linalg.eigvalsh(fisher / np.sqrt(np.outer(np.diag(fisher), np.diag(fisher)))) > 0))

    def test_lattice_order_irrelevant(self) -> None:
        rng = np.random.default_rng(3)
        shuffled = replace(
            self.inputs,
            subcarriers=tuple(rng.permutation(self.inputs.subcarriers)),
            symbols=tuple(rng.permutation(self.inputs.symbols)),
        )
        self.assertNotEqual(shuffled.subcarriers, self.inputs.subcarriers)
        for centered in (False, True):
            with self.subTest(centered=centered):
                base = replace(self.inputs, centered=centered)
                permuted = replace(shuffled, centered=centered)
                np.testing.assert_allclose(fisher_matrix(permuted), fisher_matrix(base), rtol=1e-12)
                _close(
                    self,
                    crlb_numeric_fisher(permuted).crlb_velocity_mps2,
                    crlb_numeric_fisher(base).crlb_velocity_mps2,
                    rel=1e-12,
                )

    def test_ratio_to_closed_form(self) -> None:
        range_ratio, velocity_ratio = crlb_ratio(self.inputs)
        _close(self, range_ratio, 7.473214188966e-01, rel=1e-9)
        _close(self, velocity_ratio, 1.168257879763e-11, rel=1e-9)
        louder = crlb_ratio(self.inputs.with_snr(17.0))
        _close(self, louder[0], range_ratio)
        _close(self, louder[1], velocity_ratio)

    def test_longer_symbols_tighten_velocity(self) -> None:
        bounds = [
            crlb_numeric_fisher(replace(self.inputs, t_total=t_total)).crlb_velocity_mps2
            for t_total in (4e-6, 8e-6, 16e-6)
        ]
        self.assertGreater(bounds[0], bounds[1])
        self.assertGreater(bounds[1], bounds[2])
        _close(self, bounds[0] / bounds[1], 4.0, rel=1e-9)

    def test_data_grid_is_tighter(self) -> None:
        data = CrlbInputs.from_grid(build_data_grid(self.params, seed=0), self.params, snr_db=0.0)
        data_report = crlb_numeric_fisher(data)
        dmrs_report = crlb_numeric_fisher(self.inputs)
        self.assertLess(data_report.crlb_range_m2, dmrs_report.crlb_range_m2)
        self.assertLess(data_report.crlb_velocity_mps2, dmrs_report.crlb_velocity_mps2)

    def test_single_symbol_is_degenerate(self) -> None:
        single = replace(self.inputs, symbols=(2,))
        for method in (crlb_closed_form, crlb_numeric_fisher):
            with self.subTest(method=method.__name__), self.assertRaises(DegenerateConfigurationError):
                method(single)

    def test_single_subcarrier_is_degenerate(self) -> None:
        with self.assertRaises(DegenerateConfigurationError):
            crlb_numeric_fisher(replace(self.inputs, subcarriers=(0,)))


class TestCrlbCurve(unittest.TestCase):

    def setUp(self) -> None:
        params = OfdmParams(m_symbols=28)
        self.inputs = CrlbInputs.from_config(params, DmrsConfig.mapping_type_a(28), snr_db=0.0)

    def test_decreasing_with_snr(self) -> None:
        for method in ("closed_form", "numeric_fisher"):
            with self.subTest(method=method):
                reports = crlb_curve(self.inputs, [-10.0, 0.0, 10.0], method)
                values = [r.crlb_range_m2 for r in reports]
                self.assertEqual(len(values), 3)
                self.assertTrue(all(a > b for a, b in zip(values, values[1:])))

    def test_doubling_gamma_halves_closed_form(self) -> None:
        base = crlb_closed_form(self.inputs)
        doubled = crlb_closed_form(replace(self.inputs, gamma=2 * self.inputs.gamma))
        _close(self, doubled.crlb_range_m2, base.crlb_range_m2 / 2, rel=1e-14)
        _close(self, doubled.crlb_velocity_mps2, base.crlb_velocity_mps2 / 2, rel=1e-14)

    def test_wider_spacing_tightens_range(self) -> None:
        params = OfdmParams(m_symbols=28)
        cfg = DmrsConfig.mapping_type_a(28)
        for method in (crlb_closed_form, crlb_numeric_fisher):
            with self.subTest(method=method.__name__):
                values = [
                    method(CrlbInputs.from_config(params.with_delta_f(delta_f), cfg, snr_db=0.0)).crlb_range_m2
                    for delta_f in (30e3, 60e3, 120e3)
                ]
                self.assertGreater(values[0], values[1])
                self.assertGreater(values[1], values[2])

    def test_methods_parallel_across_snr(self) -> None:
        snr_values = np.arange(-15.0, 11.0)
        closed = crlb_curve(self.inputs, snr_values, "closed_form")
        numeric = crlb_curve(self.inputs, snr_values, "numeric_fisher")
        for name in ("crlb_range_m2", "crlb_velocity_mps2"):
            with self.subTest(bound=name):
                ratios = np.array([getattr(n, name) / getattr(c, name) for n, c in zip(numeric, closed)])
                self.assertLess(np.var(ratios / ratios.mean()), 1e-6)

    def test_unknown_method(self) -> None:
        with self.assertRaises(ConfigurationError):
            get_crlb_method("bayesian")
        with self.assertRaises(ConfigurationError):
            crlb_curve(self.inputs, [0.0], "bayesian")


if __name__ == "__main__":
    unittest.main()
