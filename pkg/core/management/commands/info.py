"""
Code summary
Prints the parameters of a parity-check matrix
"""
from collections import Counter

from django.core.management.base import BaseCommand

from codes.matrix import MAX_ENUMERATION_DIMENSION, rank_gf2
from core.cli import load_code


def degree_profile(degrees) -> str:
    counts = Counter(degrees)
    return ' '.join(f"{d}:{counts[d]}" for d in sorted(counts))


class Command(BaseCommand):
    help = 'Summarize a code: n, m, rank, k, rate, E, degree profiles and d_min'

    def add_arguments(self, parser):
        parser.add_argument('code', help='ALIST path or fixture name')
        parser.add_argument('--d-min', type=int, default=None, help='Known minimum distance')

    def handle(self, *args, **options):
        code = load_code(options['code'], options['d_min'])
        pcm = code.pcm
        d_min = 'unknown' if code.d_min is None else code.d_min
        self.stdout.write(f"n={code.n} k={code.k} rate={code.rate:.3f} d_min={d_min} E={pcm.num_edges}")
        self.stdout.write(f"m={pcm.m} rank={rank_gf2(pcm)}")
        self.stdout.write(f"variable degrees: {degree_profile(pcm.column_degrees)}")
        self.stdout.write(f"check degrees: {degree_profile(pcm.row_degrees)}")
        if code.r_pack is not None:
            self.stdout.write(f"packing radius: {code.r_pack:.6g}")
        if code.d_min is None:
            self.stdout.write(f"note: d_min not computed, k={code.k} exceeds the brute-force "
                              f"limit of {MAX_ENUMERATION_DIMENSION}; pass --d-min to supply it")
