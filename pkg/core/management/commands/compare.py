"""
Trained vs unit weights
Sweeps both decoders on one grid and fails when training made things worse everywhere
"""
import logging

from django.conf import settings
from django.core.management.base import BaseCommand

from core.cli import (
    add_code_arguments, add_grid_arguments, add_simulation_arguments, grid_from_options, load_code,
    load_weights, output_stream, report_failure, runtime_error, simulation_kwargs,
)
from core.csvio import write_csv
from decoding.tanner import build_tanner
from decoding.weights import WeightSet
from evaluation.montecarlo import snr_gain, sweep

logger = logging.getLogger('wbpdecode')

CSV_COLUMNS = ('snr_db', 'trained_fer', 'unit_fer', 'trained_ber', 'unit_ber',
               'trained_converged', 'unit_converged')


class Command(BaseCommand):
    help = 'Compare trained weights with plain BP; exits 1 if the trained FER is higher at every SNR'

    def add_arguments(self, parser):
        add_code_arguments(parser)
        parser.add_argument('--weights', required=True, help='Trained weight file')
        parser.add_argument('--clip', type=float, default=settings.WBPDECODE_CONFIG['MESSAGE_CLIP'])
        add_grid_arguments(parser)
        add_simulation_arguments(parser)
        parser.add_argument('--target-ber', type=float, default=None,
                            help='Also report the SNR gain at this BER')
        parser.add_argument('--output', default=None, help='CSV path (default stdout)')

    def handle(self, *args, **options):
        code = load_code(options['code'], options['d_min'])
        graph = build_tanner(code.pcm)
        trained = load_weights(options['weights'], graph)
        unit = WeightSet.ones(graph, trained.layers)
        grid = grid_from_options(options)
        kwargs = simulation_kwargs(options)
        try:
            trained_stats = sweep(trained, code, grid, layers=trained.layers, clip=options['clip'], **kwargs)
            unit_stats = sweep(unit, code, grid, layers=trained.layers, clip=options['clip'], **kwargs)
        except Exception as e:
            raise report_failure(e) from e

        rows = [
            (t.snr_db, t.fer, u.fer, t.ber, u.ber, int(t.converged), int(u.converged))
            for t, u in zip(trained_stats, unit_stats)
        ]
        with output_stream(options['output'], self.stdout) as out:
            write_csv(out, CSV_COLUMNS, rows)

        if options['target_ber'] is not None:
            gain = snr_gain(unit_stats, trained_stats, options['target_ber'], metric='ber')
            message = 'not reached on this grid' if gain is None else f"{gain:.3f} dB"
            self.stderr.write(f"Gain at BER {options['target_ber']:g}: {message}")

        worse = [t.fer > u.fer for t, u in zip(trained_stats, unit_stats)]
        if all(worse):
            raise runtime_error("Trained decoder has a higher FER than plain BP at every grid point")
        logger.info(f"Trained decoder no worse than plain BP at {worse.count(False)}/{len(worse)} points")
