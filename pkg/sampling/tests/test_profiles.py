import tempfile
from pathlib import Path

import numpy as np
from django.test import SimpleTestCase

from sampling.profiles import ThetaProfile, fill_theta, read_theta_csv, write_theta_csv
from sampling.shells import ShellPartition

RAW = [0, 0, 0.2, 0, 0.4, 0, 0]


class FillThetaTests(SimpleTestCase):

    def setUp(self):
        self.partition = ShellPartition(n=7, sigma=1.0, count=7, r_min=0.0, r_max=7.0)

    def test_interpolates_and_extends(self):
        filled = fill_theta(RAW, self.partition, gamma=0.7, tail_extend=5)
        np.testing.assert_allclose(filled.theta, [0.2, 0.2, 0.2, 0.3, 0.4, 0.4, 0.4], atol=1e-15)
        self.assertTrue(filled.filled)

    def test_threshold_zeroes_tail(self):
        filled = fill_theta(RAW, self.partition, gamma=0.35, tail_extend=5)
        np.testing.assert_allclose(filled.theta, [0.2, 0.2, 0.2, 0.3, 0, 0, 0], atol=1e-15)

    def test_lower_extension_is_limited(self):
        raw = [0, 0, 0, 0, 0, 0.1, 0.2]
        filled = fill_theta(raw, self.partition, gamma=1.0, tail_extend=2)
        np.testing.assert_allclose(filled.theta, [0, 0, 0, 0.1, 0.1, 0.1, 0.2], atol=1e-15)

    def test_dense_profile_unchanged(self):
        raw = [0.05, 0.1, 0.2, 0.3, 0.35, 0.5, 0.6]
        np.testing.assert_allclose(fill_theta(raw, self.partition, gamma=0.7).theta, raw, atol=1e-15)

    def test_monotone_input_stays_monotone(self):
        rng = np.random.default_rng(8)
        for _ in range(50):
            raw = np.sort(rng.uniform(0, 1, 7))
            raw[rng.random(7) < 0.4] = 0
            nonzero = raw[raw > 0]
            if nonzero.size and (np.diff(nonzero) >= 0).all():
                filled = fill_theta(raw, self.partition, gamma=1.0, tail_extend=5).theta
                lo = np.flatnonzero(filled > 0)[0]
                self.assertTrue((np.diff(filled[lo:]) >= -1e-15).all())

    def test_all_zero(self):
        filled = fill_theta(np.zeros(7), self.partition, gamma=0.7)
        self.assertTrue(filled.is_zero())

    def test_counts_carried_over(self):
        raw = ThetaProfile.from_counts(errors=[0, 0, 1, 0, 2, 0, 0], trials=[3, 3, 5, 0, 5, 0, 0])
        filled = fill_theta(raw, self.partition, gamma=0.7)
        np.testing.assert_array_equal(filled.trials, [3, 3, 5, 0, 5, 0, 0])
        np.testing.assert_allclose(filled.theta, [0.2, 0.2, 0.2, 0.3, 0.4, 0.4, 0.4], atol=1e-15)

    def test_length_mismatch(self):
        with self.assertRaises(ValueError):
            fill_theta([0.1, 0.2], self.partition, gamma=0.7)


class ThetaProfileTests(SimpleTestCase):

    def test_from_counts(self):
        profile = ThetaProfile.from_counts([1, 0, 0], [4, 0, 2])
        np.testing.assert_array_equal(profile.theta, [0.25, 0.0, 0.0])

    def test_rejects_out_of_range(self):
        with self.assertRaises(ValueError):
            ThetaProfile(theta=[1.5])
        with self.assertRaises(ValueError):
            ThetaProfile(theta=[0.5], errors=[3], trials=[2])
        with self.assertRaises(ValueError):
            ThetaProfile(theta=[0.5], gamma=0.0)

    def test_csv_round_trip(self):
        partition = ShellPartition(n=7, sigma=0.8, count=4, r_min=0.3, r_max=4.1)
        profile = ThetaProfile.from_counts([0, 1, 3, 7], [10, 9, 8, 7], gamma=0.7)
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / 'theta.csv'
            write_theta_csv(path, profile, partition)
            text = path.read_text()
            loaded = read_theta_csv(path, gamma=0.7, expected_shells=4)
        self.assertTrue(text.startswith('shell_index,r_lo,r_hi,theta,errors,trials\n'))
        np.testing.assert_array_equal(loaded.theta, profile.theta)
        np.testing.assert_array_equal(loaded.trials, profile.trials)

    def test_csv_shell_count_mismatch(self):
        partition = ShellPartition(n=7, sigma=0.8, count=2, r_min=0.3, r_max=4.1)
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / 'theta.csv'
            write_theta_csv(path, ThetaProfile.uniform(2), partition)
            with self.assertRaises(ValueError):
                read_theta_csv(path, expected_shells=3)
