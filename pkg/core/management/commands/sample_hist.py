"""
Shell histogram
Empirical shell frequencies of noise drawn from the tilted pmf of a theta file
"""
import numpy as np
from django.conf import settings
from django.core.management.base import BaseCommand

from core.cli import add_code_arguments, load_code, output_stream, report_failure, usage_error
from core.csvio import write_csv
from decoding.channel import snr_to_sigma
from sampling.profiles import read_theta_csv
from sampling.shells import build_partition, is_pmf, sample_noise, shell_masses

CSV_COLUMNS = ('shell_index', 'r_lo', 'r_hi', 'count', 'frequency', 'pmf', 'chi_mass')


class Command(BaseCommand):
    help = 'Histogram of shells sampled from P* built from a theta CSV'

    def add_arguments(self, parser):
        add_code_arguments(parser)
        parser.add_argument('--snr', type=float, required=True, help='Eb/N0 in dB')
        parser.add_argument('--shells', type=int, required=True, help='Number of shells M')
        parser.add_argument('--theta', required=True, help='Theta CSV (shell_index,r_lo,r_hi,theta,errors,trials)')
        parser.add_argument('--samples', type=int, default=100000)
        parser.add_argument('--epsilon-tail', type=float, default=settings.WBPDECODE_CONFIG['EPSILON_TAIL'])
        parser.add_argument('--seed', type=int, default=0)
        parser.add_argument('--output', default=None, help='CSV path (default stdout)')

    def handle(self, *args, **options):
        if options['samples'] < 1:
            raise usage_error(f"--samples must be positive, got {options['samples']}")
        code = load_code(options['code'], options['d_min'])
        try:
            profile = read_theta_csv(options['theta'], expected_shells=options['shells'])
        except OSError as e:
            raise usage_error(f"Cannot read {options['theta']}: {e.strerror or e}") from e
        except ValueError as e:
            raise usage_error(str(e)) from e

        try:
            sigma = snr_to_sigma(options['snr'], code.rate)
            partition = build_partition(code.n, sigma, options['shells'], options['epsilon_tail'])
            base = shell_masses(partition)
            tilted = is_pmf(base, profile)
            _, shells = sample_noise(tilted, np.random.default_rng(options['seed']), size=options['samples'])
        except Exception as e:
            raise report_failure(e) from e

        counts = np.bincount(shells, minlength=partition.count)
        frequency = counts / options['samples']
        b = partition.boundaries
        rows = (
            (l, float(b[l]), float(b[l + 1]), int(counts[l]), float(frequency[l]),
             float(tilted.masses[l]), float(base.masses[l]))
            for l in range(partition.count)
        )
        with output_stream(options['output'], self.stdout) as out:
            write_csv(out, CSV_COLUMNS, rows)
