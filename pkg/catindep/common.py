# Copyright 2026 The catindep Authors
# Use of this source code is governed by a BSD-style license that can be
# found in the LICENSE file.

"""
Shared plumbing for the catindep library and its command line tools.

Simplifies command line arguments using `argh`, provides common flags (e.g. -v and -vv) for all
sub-commands, configures logging from those flags and defines the error types that the command
line front end translates into exit codes.

Refer to ./tools/catindep for example usage.
"""

import argparse
import contextlib
import logging
import sys
import traceback
from math import ceil
from multiprocessing import Pool
from typing import Any, Callable, Iterable, Iterator, List, Optional, Sequence, TypeVar

import argh  # type: ignore

# Exit codes of the command line tools.
EXIT_SUCCESS = 0
EXIT_FAILURE = 1
EXIT_INPUT_ERROR = 2
EXIT_CONFIG_ERROR = 3


class CatindepError(Exception):
    """Base class of all errors raised on purpose by catindep."""

    exit_code = EXIT_FAILURE


class InputError(CatindepError):
    """The data handed to an operation is invalid (length mismatch, codes out of range, ...)."""

    exit_code = EXIT_INPUT_ERROR


class ConfigError(CatindepError):
    """A flag, grid or column selection is invalid."""

    exit_code = EXIT_CONFIG_ERROR


class StatisticNotComputable(InputError):
    """Raised by APIs that must return a number when X² hits a zero margin."""


T = TypeVar("T")


def batched(source: Iterable[T], max_batch_size: int) -> Iterator[List[T]]:
    """
    Returns an iterator over batches of elements from source_list.

    >>> list(batched([1, 2, 3, 4, 5], 2))
    [[1, 2], [3, 4], [5]]
    >>> list(batched([], 3))
    []
    """
    source_list = list(source)
    if not source_list:
        return
    # Calculate batch size that spreads elements evenly across all batches
    batch_count = ceil(len(source_list) / max_batch_size)
    batch_size = ceil(len(source_list) / batch_count)
    for index in range(0, len(source_list), batch_size):
        yield source_list[index : min(index + batch_size, len(source_list))]


@contextlib.contextmanager
def worker_pool(
    workers: int,
    initializer: Optional[Callable[..., None]] = None,
    initargs: Iterable[Any] = (),
):
    """
    Yields a process pool with `workers` processes, or None if workers <= 1.

    The initializer only runs in pool processes. Callers fall back to a plain loop when they get
    None, which is the serial reference mode used by the determinism tests.
    """
    if workers <= 1:
        yield None
        return
    with Pool(workers, initializer=initializer, initargs=tuple(initargs)) as pool:
        yield pool


def run_commands(
    *functions: Callable[..., Any],
    default_fn: Optional[Callable[..., Any]] = None,
    usage: Optional[str] = None,
    argv: Optional[List[str]] = None,
):
    """
    Allow the user to call the provided functions with command line arguments translated to
    function arguments via argh: https://pythonhosted.org/argh

    Errors raised by catindep are reported and converted to their exit code.
    """
    try:
        parser = argparse.ArgumentParser(usage=usage)
        add_common_args(parser)

        # Add provided commands to parser. Do not use sub-commands if we just got one function.
        if functions:
            argh.add_commands(parser, functions)  # type: ignore
        if default_fn:
            argh.set_default_command(parser, default_fn)  # type: ignore

        parse_common_args(sys.argv[1:] if argv is None else argv)
        configure_logging()
        argh.dispatch(parser, argv=argv)  # type: ignore
    except CatindepError as e:
        if verbose():
            traceback.print_exc()
        print(f"error: {e}", file=sys.stderr)
        sys.exit(e.exit_code)
    except Exception as e:
        if verbose():
            traceback.print_exc()
        else:
            print(e, file=sys.stderr)
        sys.exit(EXIT_FAILURE)


# Common flags of the running command, see parse_common_args.
_common_args: Optional[argparse.Namespace] = None


def parse_common_args(argv: Optional[Sequence[str]] = None) -> argparse.Namespace:
    """
    Parse args common to all scripts

    These args are parsed separately of the run_commands method so we can access verbose/etc
    before the commands arguments are parsed. run_commands parses its own argv here, calls
    without argv return the last result, or parse sys.argv if there is none yet.
    """
    global _common_args
    if argv is not None or _common_args is None:
        parser = argparse.ArgumentParser(add_help=False)
        add_common_args(parser)
        _common_args = parser.parse_known_args(argv)[0]
    return _common_args


def add_common_args(parser: argparse.ArgumentParser):
    "These args are added to all commands."
    parser.add_argument(
        "--verbose",
        "-v",
        action="store_true",
        default=False,
        help="Print progress of every grid point and full tracebacks on errors.",
    )
    parser.add_argument(
        "--very-verbose",
        "-vv",
        action="store_true",
        default=False,
        help="Print more debug output",
    )


def verbose():
    return very_verbose() or parse_common_args().verbose


def very_verbose():
    return parse_common_args().very_verbose


def configure_logging():
    "Routes library logging to stderr at a level chosen by -v / -vv."
    level = logging.WARNING
    if very_verbose():
        level = logging.DEBUG
    elif verbose():
        level = logging.INFO
    logging.basicConfig(
        level=level,
        stream=sys.stderr,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    # basicConfig only configures once per process.
    logging.getLogger().setLevel(level)


if __name__ == "__main__":
    import doctest

    doctest.testmod(optionflags=doctest.ELLIPSIS)
