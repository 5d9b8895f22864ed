"""
Command Helpers
Argument types, input loading and exit-code mapping shared by the management commands

Exit codes: 0 success, 1 runtime failure, 2 usage/config/input error.
"""
import logging
import sys
from contextlib import contextmanager
from pathlib import Path
from typing import List, Optional

from django.conf import settings
from django.core.management.base import CommandError

from codes.alist import AlistFormatError, read_alist
from codes.fixtures import FIXTURES, load_fixture
from codes.matrix import CodeSpec
from decoding.channel import snr_grid
from decoding.tanner import TannerGraph
from decoding.weights import WeightSet

logger = logging.getLogger('wbpdecode')

USAGE_ERROR = 2
RUNTIME_ERROR = 1


def usage_error(message: str) -> CommandError:
    return CommandError(message, returncode=USAGE_ERROR)


def runtime_error(message: str) -> CommandError:
    return CommandError(message, returncode=RUNTIME_ERROR)


def load_code(source: str, d_min: Optional[int] = None) -> CodeSpec:
    """
    A shipped fixture by name, or an ALIST file by path.

    Raises:
        CommandError: (exit 2) unreadable or malformed file
    """
    if source in FIXTURES and not Path(source).exists():
        code = load_fixture(source)
        if d_min is not None:
            code = CodeSpec(pcm=code.pcm, k=code.k, d_min=d_min, name=code.name)
        return code
    path = Path(source)
    try:
        pcm = read_alist(path)
    except OSError as e:
        raise usage_error(f"Cannot read {path}: {e.strerror or e}") from e
    except AlistFormatError as e:
        raise usage_error(str(e)) from e
    try:
        return CodeSpec.from_pcm(pcm, d_min=d_min, name=path.stem)
    except ValueError as e:
        raise usage_error(f"{path}: {e}") from e


def load_weights(path: str, graph: TannerGraph, layers: Optional[int] = None) -> WeightSet:
    """
    Read a weight file and check it against the code.

    Raises:
        CommandError: exit 2 on a bad file or a dimension mismatch
    """
    try:
        weights = WeightSet.load(path)
    except OSError as e:
        raise usage_error(f"Cannot read weights {path}: {e.strerror or e}") from e
    except ValueError as e:
        raise usage_error(str(e)) from e
    try:
        weights.check_compatible(graph, weights.layers if layers is None else layers)
    except ValueError as e:
        raise usage_error(f"{path}: {e}") from e
    return weights


def add_code_arguments(parser):
    parser.add_argument('--code', required=True,
                        help=f"ALIST path or fixture name ({', '.join(sorted(FIXTURES))})")
    parser.add_argument('--d-min', type=int, default=None, help='Known minimum distance of an ALIST code')


def add_weight_arguments(parser):
    group = parser.add_mutually_exclusive_group(required=True)
    group.add_argument('--weights', help='Weight file written by train')
    group.add_argument('--unit-weights', action='store_true', help='Plain BP (all weights 1)')
    parser.add_argument('--iterations', type=int, default=None,
                        help='Decoder iterations for --unit-weights (default from settings)')
    parser.add_argument('--clip', type=float, default=settings.WBPDECODE_CONFIG['MESSAGE_CLIP'])


def add_grid_arguments(parser):
    group = parser.add_mutually_exclusive_group(required=True)
    group.add_argument('--snr', type=float, nargs='+', help='Eb/N0 points in dB')
    group.add_argument('--snr-range', type=float, nargs=3, metavar=('START', 'STOP', 'STEP'),
                       help='Inclusive Eb/N0 grid in dB')


def grid_from_options(options) -> List[float]:
    if options.get('snr'):
        return [float(s) for s in options['snr']]
    start, stop, step = options['snr_range']
    try:
        return snr_grid(start, stop, step)
    except ValueError as e:
        raise usage_error(str(e)) from e


def resolve_weights(options, graph: TannerGraph) -> WeightSet:
    """Weights named on the command line, or unit weights with --iterations layers."""
    if options.get('unit_weights'):
        layers = options.get('iterations') or settings.WBPDECODE_CONFIG['ITERATIONS']
        if layers < 1:
            raise usage_error(f"--iterations must be positive, got {layers}")
        return WeightSet.ones(graph, layers)
    return load_weights(options['weights'], graph, options.get('iterations'))


@contextmanager
def output_stream(path: Optional[str], default):
    """Yield an open text stream: the file at ``path`` or ``default`` (usually stdout)."""
    if not path or path == '-':
        yield default
        return
    try:
        handle = open(path, 'w', newline='')
    except OSError as e:
        raise runtime_error(f"Cannot write {path}: {e.strerror or e}") from e
    with handle:
        yield handle


def report_failure(error: BaseException) -> CommandError:
    """Map an unexpected library error to a CommandError with the right exit code."""
    if isinstance(error, CommandError):
        return error
    if isinstance(error, ValueError):
        return usage_error(str(error))
    logger.error(f"Command failed: {error}", exc_info=sys.exc_info()[0] is not None)
    return runtime_error(str(error))


def add_simulation_arguments(parser):
    project = settings.WBPDECODE_CONFIG
    parser.add_argument('--min-block-errors', type=int, default=project['MIN_BLOCK_ERRORS'])
    parser.add_argument('--max-blocks', type=int, default=project['MAX_BLOCKS'])
    parser.add_argument('--chunk-blocks', type=int, default=project['CHUNK_BLOCKS'])
    parser.add_argument('--seed', type=int, default=0)
    parser.add_argument('--workers', type=int, default=None,
                        help='Worker processes (default WBPDECODE_WORKERS or CPU count)')


def simulation_kwargs(options) -> dict:
    if options['min_block_errors'] < 1 or options['max_blocks'] < 0 or options['chunk_blocks'] < 1:
        raise usage_error("Need --min-block-errors >= 1, --max-blocks >= 0 and --chunk-blocks >= 1")
    return {
        'min_block_errors': options['min_block_errors'],
        'max_blocks': options['max_blocks'],
        'seed': options['seed'],
        'chunk_blocks': options['chunk_blocks'],
        'workers': options['workers'],
    }
