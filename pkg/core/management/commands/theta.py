"""
Theta profile
Monte Carlo per-shell error ratios of a decoder at one SNR, raw and filled
"""
from pathlib import Path

import numpy as np
from django.conf import settings
from django.core.management.base import BaseCommand

from active.loop import estimate_theta
from core.cli import (
    add_code_arguments, add_weight_arguments, load_code, report_failure, resolve_weights, runtime_error,
)
from decoding.channel import snr_to_sigma
from decoding.engine import WBPDecoder
from decoding.tanner import build_tanner
from evaluation.diagnostics import theta_trend_violations
from sampling.profiles import fill_theta, write_theta_csv
from sampling.shells import build_partition, shell_masses

RAW_FILE = 'theta_raw.csv'
FILLED_FILE = 'theta_filled.csv'


class Command(BaseCommand):
    help = 'Estimate theta per shell against the Chi masses and write raw and filled profiles'

    def add_arguments(self, parser):
        project = settings.WBPDECODE_CONFIG
        add_code_arguments(parser)
        add_weight_arguments(parser)
        parser.add_argument('--snr', type=float, required=True, help='Eb/N0 in dB')
        parser.add_argument('--shells', type=int, default=100, help='Number of shells M')
        parser.add_argument('--samples', type=int, default=20000, help='Test samples')
        parser.add_argument('--gamma', type=float, default=0.7)
        parser.add_argument('--epsilon-tail', type=float, default=project['EPSILON_TAIL'])
        parser.add_argument('--tail-extend', type=int, default=project['TAIL_EXTEND'])
        parser.add_argument('--seed', type=int, default=0)
        parser.add_argument('--output-dir', default='.', help=f"Where {RAW_FILE} and {FILLED_FILE} go")

    def handle(self, *args, **options):
        code = load_code(options['code'], options['d_min'])
        graph = build_tanner(code.pcm)
        weights = resolve_weights(options, graph)
        out_dir = Path(options['output_dir'])
        try:
            sigma = snr_to_sigma(options['snr'], code.rate)
            partition = build_partition(code.n, sigma, options['shells'], options['epsilon_tail'])
            decoder = WBPDecoder(graph, weights, weights.layers, options['clip'])
            raw = estimate_theta(decoder, partition, shell_masses(partition), options['samples'], sigma,
                                 np.random.default_rng(options['seed']), gamma=options['gamma'])
            filled = fill_theta(raw, partition, options['gamma'], options['tail_extend'])
        except Exception as e:
            raise report_failure(e) from e

        try:
            out_dir.mkdir(parents=True, exist_ok=True)
            write_theta_csv(out_dir / RAW_FILE, raw, partition)
            write_theta_csv(out_dir / FILLED_FILE, filled, partition)
        except OSError as e:
            raise runtime_error(f"Cannot write theta files to {out_dir}: {e.strerror or e}") from e

        self.stdout.write(f"{int(raw.errors.sum())} errors in {int(raw.trials.sum())} samples; "
                          f"raw support {raw.support.size}/{partition.count}, "
                          f"filled support {filled.support.size}/{partition.count}")
        if code.r_pack is not None:
            shell = partition.shell_of(code.r_pack)
            where = 'outside the shell range' if shell is None else f"in shell {shell}"
            self.stdout.write(f"packing radius {code.r_pack:.6g} lies {where}")
        violations = theta_trend_violations(raw)
        if violations:
            self.stderr.write(f"theta decreases significantly between shells {violations}")
        self.stdout.write(self.style.SUCCESS(f"Wrote {out_dir / RAW_FILE} and {out_dir / FILLED_FILE}"))
