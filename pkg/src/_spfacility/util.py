"""General utility functions, error types and numeric tolerances."""
from __future__ import annotations

import logging
import multiprocessing.dummy
import threading
import zlib
from pathlib import Path
from typing import (
    Callable,
    Dict,
    Generic,
    Hashable,
    Iterable,
    List,
    Optional,
    Tuple,
    TypeVar,
)

import numpy as np

logger = logging.getLogger(__name__)

ABS_TOL = 1e-9
"""Absolute tolerance for equality checks between coordinates and costs."""
WEIGHT_TOL = 1e-12
"""Tolerance on the total probability mass of an outcome."""


class SpFacilityError(Exception):
    """Base class of all errors raised by this package."""


class InputError(SpFacilityError, ValueError):
    """Raised when an operation receives arguments that violate its preconditions."""


class InstanceFormatError(InputError):
    """Raised when an instance file can not be parsed."""

    def __init__(
        self, source: str, reason: str, lineno: Optional[int] = None
    ) -> None:
        """Instance data read from *source* is malformed because of *reason*.

        :param source: file name or other description of where the data came from
        :param reason: what is wrong, usually naming the offending field
        :param lineno: line number of a JSON syntax error, if known

        """
        self.source = source
        self.reason = reason
        self.lineno = lineno
        location = f" (line {lineno})" if lineno is not None else ""
        super().__init__(f"Could not parse instance '{source}'{location}: {reason}")


class SolverError(SpFacilityError, ArithmeticError):
    """Raised when the minimax solver does not reach the requested tolerance."""

    def __init__(
        self, location: Tuple[float, ...], cost: float, achieved: float, tol: float
    ) -> None:
        """Raise an error carrying the best iterate *location* and its *cost*.

        :param location: best facility location found
        :param cost: maximum cost at *location*
        :param achieved: width of the final search interval
        :param tol: the requested tolerance

        """
        self.location = location
        self.cost = cost
        self.achieved = achieved
        super().__init__(
            f"Minimax search stopped at {location} (cost {cost}) with interval width "
            f"{achieved}, requested tolerance {tol}"
        )


class UnsupportedBoundError(SpFacilityError, KeyError):
    """Raised when a closed-form bound is requested for a mechanism that has none."""

    def __init__(self, mechanism: str, context: str = "") -> None:
        """Mechanism *mechanism* carries no proven approximation bound."""
        message = f"No proven approximation bound for mechanism {mechanism}"
        if context:
            message += f" ({context})"
        self.message = message
        super().__init__(message)

    def __str__(self) -> str:
        return self.message


def read_file(path: Path) -> str:
    """Read the file *path* to memory and return its contents.

    :param path: path of the file
    :raises OSError: There has been an issue opening the file.
    :raises ValueError: There is an encoding issue with the file.
    :returns: The contents of *path*.

    """
    with open(path, encoding="utf-8") as file_handle:
        return file_handle.read()


def make_rng(seed: int, namespace: str, *index: int) -> np.random.Generator:
    """Return a counter-based random generator for one cell of a seeded run.

    The stream depends only on *seed*, the *namespace* (usually the subcommand or
    generator name) and the cell *index*, never on scheduling order.

    :param seed: the run seed, a non-negative 64-bit integer
    :param namespace: name of the consumer of the stream
    :param index: position of the cell inside the consumer, e.g. (eta index, trial)
    :returns: an independent generator

    """
    if seed < 0:
        raise InputError(f"Seed must be non-negative, got {seed}")
    key = (zlib.crc32(namespace.encode("utf-8")),) + tuple(int(i) for i in index)
    sequence = np.random.SeedSequence(seed, spawn_key=key)
    return np.random.Generator(np.random.Philox(sequence))


K = TypeVar("K", bound=Hashable)
"""Generic type variable for a type that supports :class:`typing.Hashable`."""
V = TypeVar("V")
"""Generic type variable for any object."""


class Cache(Generic[K, V]):
    """
    A generic key-value cache for any object type.

    The key must be hashable, as a dictionary is used as the underlying data type.
    Access is guarded by a lock so that worker threads may share one cache.
    """

    _data: Dict[K, V]
    _max_entries: Optional[int]

    def __init__(self, max_entries: Optional[int] = None) -> None:
        """Instantiate the cache.

        :param max_entries: if set, the oldest item is dropped once the cache holds
            more than this many items

        """
        self._data = {}
        self._max_entries = max_entries
        self._lock = threading.Lock()

    def get(self, key: K) -> Optional[V]:
        """Return item with key *key*.

        :param key: key of the desired item
        :returns: the item or ``None`` if there is no item with key *key* in the cache

        """
        with self._lock:
            return self._data.get(key)

    def put(self, key: K, value: V) -> None:
        """Put object *value* to cache with key *key*.

        :param key: the key
        :param value: the value

        """
        with self._lock:
            self._data[key] = value
            if self._max_entries is not None and len(self._data) > self._max_entries:
                del self._data[next(iter(self._data))]

    def clear(self) -> None:
        """Drop all cached items."""
        with self._lock:
            self._data.clear()

    def __len__(self) -> int:
        with self._lock:
            return len(self._data)


T = TypeVar("T")
R = TypeVar("R")


def parallel_map(
    function: Callable[[T], R], items: Iterable[T], threads: int = 0
) -> List[R]:
    """Apply *function* to every item on a thread pool and return results in order.

    :param function: a pure function
    :param items: the arguments
    :param threads: pool size; 0 uses one thread per CPU, 1 runs in the calling thread
    :returns: ``[function(item) for item in items]``

    """
    if threads < 0:
        raise InputError(f"Thread count must be non-negative, got {threads}")
    if threads == 1:
        return [function(item) for item in items]
    with multiprocessing.dummy.Pool(threads or None) as pool:
        return pool.map(function, items)
