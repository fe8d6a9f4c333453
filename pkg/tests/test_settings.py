import math
import unittest

from dmrsense.config.settings import (
    NOMINAL_SPEED_OF_LIGHT,
    SPEED_OF_LIGHT,
    DmrsConfig,
    OfdmParams,
    TargetScenario,
    get_preset,
    next_power_of_two,
)
from dmrsense.exceptions import ConfigurationError


class TestOfdmParams(unittest.TestCase):

    def setUp(self) -> None:
        self.params = OfdmParams()

    def test_nr_defaults(self) -> None:
        self.assertAlmostEqual(self.params.t_total, 8.92e-6, delta=1e-18)
        self.assertAlmostEqual(self.params.t_symbol * self.params.delta_f, 1.0, delta=1e-12)
        self.assertEqual(self.params.n_ifft, 256)
        self.assertEqual(self.params.n_cp, 18)
        self.assertEqual(self.params.speed_of_light, NOMINAL_SPEED_OF_LIGHT)

    def test_sample_interval_spans_symbol(self) -> None:
        self.assertAlmostEqual(
            self.params.sample_interval * self.params.n_ifft / self.params.t_symbol, 1.0, delta=1e-12
        )

    def test_cp_discrepancy(self) -> None:
        expected = 18 * self.params.sample_interval - self.params.t_cp
        self.assertAlmostEqual(self.params.cp_discrepancy, expected, delta=1e-20)
        self.assertLess(abs(self.params.cp_discrepancy), self.params.sample_interval / 2)

    def test_n_ifft_rounds_up(self) -> None:
        self.assertEqual(OfdmParams(n_subcarriers=300).n_ifft, 512)
        self.assertEqual(next_power_of_two(1), 1)
        self.assertEqual(next_power_of_two(256), 256)
        self.assertEqual(next_power_of_two(257), 512)

    def test_n_ifft_below_n_subcarriers(self) -> None:
        with self.assertRaises(ConfigurationError):
            OfdmParams(n_subcarriers=256, n_ifft=128)

    def test_with_delta_f_keeps_cp_fraction(self) -> None:
        halved = self.params.with_delta_f(60e3)
        self.assertAlmostEqual(halved.t_cp / halved.t_symbol, self.params.t_cp / self.params.t_symbol, delta=1e-12)
        self.assertAlmostEqual(halved.t_total, 2 * self.params.t_total, delta=1e-15)

    def test_with_t_total(self) -> None:
        longer = self.params.with_t_total(16e-6)
        self.assertAlmostEqual(longer.t_total, 16e-6, delta=1e-18)
        with self.assertRaises(ConfigurationError):
            self.params.with_t_total(4e-6)

    def test_from_t_total(self) -> None:
        params = OfdmParams.from_t_total(8.92e-6, delta_f=120e3)
        self.assertAlmostEqual(params.t_cp, self.params.t_cp, delta=1e-18)

    def test_invalid_dimensions(self) -> None:
        for kwargs in ({"n_subcarriers": 0}, {"m_symbols": 0}, {"f_c": 0.0}, {"delta_f": -1.0}):
            with self.subTest(kwargs=kwargs), self.assertRaises(ConfigurationError):
                OfdmParams(**kwargs)

    def test_physical_speed_of_light(self) -> None:
        self.assertEqual(SPEED_OF_LIGHT, 299792458.0)


class TestDmrsConfig(unittest.TestCase):

    def test_defaults(self) -> None:
        cfg = DmrsConfig()
        self.assertEqual(cfg.symbol_positions, (2, 5, 8, 11))
        self.assertEqual(cfg.n_dmrs_subcarriers(256), 128)
        self.assertEqual(cfg.n_dmrs_subcarriers(255), 128)

    def test_comb_values(self) -> None:
        with self.assertRaises(ConfigurationError):
            DmrsConfig(comb_carrier=3)
        with self.assertRaises(ConfigurationError):
            DmrsConfig(comb_symbol=5)
        with self.assertRaises(ConfigurationError):
            DmrsConfig(carrier_offset=2)

    def test_positions_strictly_increasing(self) -> None:
        with self.assertRaises(ConfigurationError):
            DmrsConfig(symbol_positions=(2, 2, 5))
        with self.assertRaises(ConfigurationError):
            DmrsConfig(symbol_positions=(5, 2))

    def test_validate_for_out_of_range(self) -> None:
        with self.assertRaises(ConfigurationError):
            DmrsConfig(symbol_positions=(2, 14)).validate_for(OfdmParams(m_symbols=14))

    def test_mapping_type_a_default(self) -> None:
        cfg = DmrsConfig.mapping_type_a(140)
        self.assertEqual(cfg.n_dmrs_symbols, 40)
        self.assertEqual(cfg.symbol_positions[:8], (2, 5, 8, 11, 16, 19, 22, 25))

    def test_mapping_type_a_variants(self) -> None:
        cases = {
            (0, 2): (2, 16),
            (1, 2): (2, 11, 16, 25),
            (2, 2): (2, 7, 11, 16, 21, 25),
            (3, 3): (3, 5, 8, 11, 17, 19, 22, 25),
        }
        for (additional, first), expected in cases.items():
            with self.subTest(additional=additional, first=first):
                cfg = DmrsConfig.mapping_type_a(28, additional_positions=additional, first_symbol=first)
                self.assertEqual(cfg.symbol_positions, expected)

    def test_mapping_type_a_rejects_bad_pattern(self) -> None:
        with self.assertRaises(ConfigurationError):
            DmrsConfig.mapping_type_a(14, additional_positions=4)
        with self.assertRaises(ConfigurationError):
            DmrsConfig.mapping_type_a(14, first_symbol=4)

    def test_retile(self) -> None:
        cfg = DmrsConfig.mapping_type_a(140).retile(28)
        self.assertEqual(cfg.symbol_positions, (2, 5, 8, 11, 16, 19, 22, 25))


class TestTargetScenario(unittest.TestCase):

    def test_delay_and_doppler(self) -> None:
        tgt = TargetScenario(range_m=48.0, velocity_mps=18.0)
        self.assertAlmostEqual(tgt.delay(), 3.2e-7, delta=1e-20)
        self.assertAlmostEqual(tgt.doppler(24e9), 2880.0, delta=1e-9)

    def test_noise_variance(self) -> None:
        self.assertAlmostEqual(TargetScenario(snr_db=10.0).noise_variance, 0.1, delta=1e-15)
        self.assertAlmostEqual(TargetScenario(snr_db=0.0).noise_variance, 1.0, delta=1e-15)

    def test_noiseless(self) -> None:
        self.assertTrue(TargetScenario(snr_db=None).noiseless)
        self.assertTrue(TargetScenario(snr_db=math.inf).noiseless)
        self.assertEqual(TargetScenario(snr_db=None).snr_linear, math.inf)

    def test_zero_linear_snr(self) -> None:
        with self.assertRaises(ConfigurationError):
            TargetScenario(snr_db=-math.inf).noise_variance

    def test_invalid(self) -> None:
        with self.assertRaises(ConfigurationError):
            TargetScenario(attenuation=0.0)
        with self.assertRaises(ConfigurationError):
            TargetScenario(range_m=-1.0)

    def test_within(self) -> None:
        tgt = TargetScenario(range_m=48.0, velocity_mps=-18.0)
        self.assertTrue(tgt.within(312.5, 233.5))
        self.assertFalse(tgt.within(40.0, 233.5))


class TestPresets(unittest.TestCase):

    def test_known(self) -> None:
        self.assertEqual(get_preset("default"), {})
        self.assertEqual(get_preset("short"), {"m_symbols": 28})
        self.assertEqual(get_preset("single-path")["doppler_path"], "uniform")

    def test_returns_copy(self) -> None:
        get_preset("short")["m_symbols"] = 1
        self.assertEqual(get_preset("short")["m_symbols"], 28)

    def test_unknown(self) -> None:
        with self.assertRaises(ConfigurationError):
            get_preset("table3")


if __name__ == "__main__":
    unittest.main()
