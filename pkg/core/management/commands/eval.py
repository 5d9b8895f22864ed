"""
Error-rate sweep
Monte Carlo BER/FER of a decoder over an SNR grid, written as CSV
"""
from django.core.management.base import BaseCommand

from core.cli import (
    add_code_arguments, add_grid_arguments, add_simulation_arguments, add_weight_arguments,
    grid_from_options, load_code, output_stream, report_failure, resolve_weights, simulation_kwargs,
)
from decoding.tanner import build_tanner
from evaluation.montecarlo import sweep, write_sweep_csv


class Command(BaseCommand):
    help = 'Monte Carlo BER/FER sweep; CSV columns snr_db,blocks,block_errors,bit_errors,fer,ber,converged'

    def add_arguments(self, parser):
        add_code_arguments(parser)
        add_weight_arguments(parser)
        add_grid_arguments(parser)
        add_simulation_arguments(parser)
        parser.add_argument('--output', default=None, help='CSV path (default stdout)')

    def handle(self, *args, **options):
        code = load_code(options['code'], options['d_min'])
        weights = resolve_weights(options, build_tanner(code.pcm))
        grid = grid_from_options(options)
        try:
            stats = sweep(weights, code, grid, layers=weights.layers, clip=options['clip'],
                          **simulation_kwargs(options))
        except Exception as e:
            raise report_failure(e) from e
        with output_stream(options['output'], self.stdout) as out:
            write_sweep_csv(out, stats)
