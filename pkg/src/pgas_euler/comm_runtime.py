"""In-process SPMD runtime with PGAS-style shared arrays and two-sided channels.

Workers are threads of the calling process.  A :class:`SharedArray2D` is one
numpy array partitioned into contiguous blocks, each with an owning worker
(its affinity).  Remote reads are plain memory copies, so a ``get_block``
completes without the owner executing anything.  Message channels emulate
nonblocking send/receive pairs with per-``(source, dest, tag)`` FIFO queues.

There is no network here.  Timing differences between communication styles
come from synchronization and copy costs only, never from wire latency.
"""

from __future__ import annotations

import threading
from collections import defaultdict, deque
from dataclasses import dataclass, field
from typing import Any, Callable, Sequence

import numpy as np

__all__ = [
    "BLOCKED_PATCHES",
    "BLOCKED_ROWS",
    "Distribution",
    "Endpoint",
    "IncompatibleDistribution",
    "IndexOutOfRange",
    "Network",
    "NotOwner",
    "OrphanMessage",
    "SharedArray2D",
    "SpansOwners",
    "WorkerContext",
    "WorkerGroup",
    "WorkerPanic",
    "alloc_shared",
    "barrier",
    "current_worker",
    "get_block",
    "get_strided",
    "global_read",
    "global_write",
    "local_view",
    "split_extent",
    "spawn_spmd",
    "wait_all",
]

BLOCKED_ROWS = "blocked_rows"
BLOCKED_PATCHES = "blocked_patches"


class WorkerPanic(RuntimeError):
    def __init__(self, worker_id: int, cause: BaseException):
        super().__init__(f"worker {worker_id} failed: {cause!r}")
        self.worker_id = worker_id
        self.cause = cause


class IncompatibleDistribution(ValueError):
    pass


class IndexOutOfRange(IndexError):
    pass


class NotOwner(PermissionError):
    pass


class SpansOwners(ValueError):
    pass


class OrphanMessage(RuntimeError):
    pass


class _GroupAborted(RuntimeError):
    """Raised in surviving workers once another worker has failed."""


_tls = threading.local()


def current_worker() -> int | None:
    """Id of the SPMD worker running this code, or ``None`` outside a group."""
    return getattr(_tls, "worker_id", None)


def split_extent(n: int, parts: int) -> list[tuple[int, int]]:
    """Split ``range(n)`` into ``parts`` contiguous blocks, leading blocks one longer."""
    base, extra = divmod(n, parts)
    bounds = []
    start = 0
    for k in range(parts):
        stop = start + base + (1 if k < extra else 0)
        bounds.append((start, stop))
        start = stop
    return bounds


# -- worker groups ----------------------------------------------------------


class WorkerGroup:
    def __init__(self, n_workers: int):
        if n_workers < 1:
            raise ValueError(f"need at least one worker, got {n_workers}")
        self.n_workers = n_workers
        self._barrier = threading.Barrier(n_workers)
        self.barrier_calls = 0
        self._lock = threading.Lock()

    @property
    def ids(self) -> range:
        return range(self.n_workers)

    def barrier(self) -> None:
        """Block until every worker has arrived.

        Thread barriers imply a memory fence, so shared-array writes made
        before the call are visible to all workers after it.
        """
        try:
            idx = self._barrier.wait()
        except threading.BrokenBarrierError:
            raise _GroupAborted() from None
        if idx == 0:
            with self._lock:
                self.barrier_calls += 1

    def abort(self) -> None:
        self._barrier.abort()


def barrier(group: WorkerGroup) -> None:
    group.barrier()


@dataclass
class WorkerContext:
    """Handles passed to each SPMD kernel instance."""

    rank: int
    group: WorkerGroup
    endpoint: "Endpoint | None" = None
    shared: dict = field(default_factory=dict)

    @property
    def size(self) -> int:
        return self.group.n_workers

    def barrier(self) -> None:
        self.group.barrier()


def spawn_spmd(
    n: int,
    kernel: Callable[[WorkerContext], Any],
    *,
    network: "Network | None" = None,
    shared: dict | None = None,
    group: WorkerGroup | None = None,
) -> list:
    """Run ``kernel`` on ``n`` workers and return their results in id order.

    The first failing worker aborts the group; surviving workers blocked in
    a barrier or a receive are released, and the failure is re-raised as
    :class:`WorkerPanic`.  If a ``network`` is given, it is checked for
    undelivered messages when all workers have finished.
    """
    if n < 1:
        raise ValueError(f"need at least one worker, got {n}")
    group = group or WorkerGroup(n)
    if group.n_workers != n:
        raise ValueError("group size does not match worker count")
    shared = {} if shared is None else shared
    results: list = [None] * n
    errors: list[tuple[int, BaseException]] = []
    err_lock = threading.Lock()

    def run(rank: int):
        _tls.worker_id = rank
        ctx = WorkerContext(rank, group, network.endpoint(rank) if network else None, shared)
        try:
            results[rank] = kernel(ctx)
        except _GroupAborted:
            pass
        except BaseException as exc:  # noqa: BLE001 - surfaced via WorkerPanic
            with err_lock:
                errors.append((rank, exc))
            group.abort()
            if network is not None:
                network.abort()
        finally:
            _tls.worker_id = None

    if n == 1:
        run(0)
    else:
        threads = [threading.Thread(target=run, args=(r,), name=f"spmd-{r}") for r in range(n)]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
    if errors:
        rank, exc = errors[0]
        raise WorkerPanic(rank, exc) from exc
    if network is not None:
        network.close()
    return results


# -- shared arrays ------------------------------------------------------------


@dataclass(frozen=True)
class Distribution:
    """Blocked layout of a ``(ny, nx)`` index space over workers.

    ``row_bounds[r]`` / ``col_bounds[c]`` are half-open extents.  Worker
    ``r * pc + c`` owns rows ``row_bounds[r]`` and columns ``col_bounds[c]``;
    ``blocked_rows`` is the case ``pc == 1``.
    """

    mode: str
    shape: tuple[int, int]
    pr: int
    pc: int
    row_bounds: tuple[tuple[int, int], ...]
    col_bounds: tuple[tuple[int, int], ...]

    @classmethod
    def blocked_rows(cls, shape, n_workers: int) -> "Distribution":
        return cls._make(BLOCKED_ROWS, shape, n_workers, 1)

    @classmethod
    def blocked_patches(cls, shape, pr: int, pc: int) -> "Distribution":
        return cls._make(BLOCKED_PATCHES, shape, pr, pc)

    @classmethod
    def _make(cls, mode, shape, pr, pc):
        ny, nx = shape
        if pr < 1 or pc < 1:
            raise IncompatibleDistribution("worker grid must be at least 1x1")
        if pr > ny or pc > nx:
            raise IncompatibleDistribution(
                f"{pr}x{pc} workers cannot each own part of a {ny}x{nx} array"
            )
        return cls(mode, (ny, nx), pr, pc, tuple(split_extent(ny, pr)), tuple(split_extent(nx, pc)))

    @property
    def n_workers(self) -> int:
        return self.pr * self.pc

    def coords(self, worker: int) -> tuple[int, int]:
        return divmod(worker, self.pc)

    def block(self, worker: int) -> tuple[int, int, int, int]:
        """``(row_start, row_stop, col_start, col_stop)`` owned by ``worker``."""
        r, c = self.coords(worker)
        return self.row_bounds[r] + self.col_bounds[c]

    def block_shape(self, worker: int) -> tuple[int, int]:
        r0, r1, c0, c1 = self.block(worker)
        return (r1 - r0, c1 - c0)

    def owner(self, i: int, j: int) -> int:
        ny, nx = self.shape
        if not (0 <= i < ny and 0 <= j < nx):
            raise IndexOutOfRange(f"({i}, {j}) outside {ny}x{nx}")
        return _locate(self.row_bounds, i) * self.pc + _locate(self.col_bounds, j)


def _locate(bounds, k):
    # closed form for the largest-remainder split
    n = bounds[-1][1]
    parts = len(bounds)
    base, extra = divmod(n, parts)
    cut = extra * (base + 1)
    return k // (base + 1) if k < cut else extra + (k - cut) // base


class SharedArray2D:
    """Globally addressable ``(ny, nx, ncomp)`` array with blocked affinity."""

    def __init__(self, dist: Distribution, ncomp: int = 4, group: WorkerGroup | None = None):
        self.dist = dist
        self.ncomp = ncomp
        self.group = group
        self._data = np.zeros(dist.shape + (ncomp,))

    @property
    def shape(self) -> tuple[int, int]:
        return self.dist.shape

    def affinity_of(self, i: int, j: int = 0) -> int:
        return self.dist.owner(i, j)

    def _linear(self, k: int) -> tuple[int, int]:
        return divmod(k, self.dist.shape[1])

    def snapshot(self) -> np.ndarray:
        """Copy of the whole array (for gathering results outside the group)."""
        return self._data.copy()

    def load(self, values: np.ndarray) -> None:
        """Bulk initialization from outside the worker group."""
        self._data[...] = values


def alloc_shared(shape, dist: Distribution, group: WorkerGroup | None = None, ncomp: int = 4) -> SharedArray2D:
    if tuple(shape) != tuple(dist.shape):
        raise IncompatibleDistribution(f"shape {tuple(shape)} does not match distribution {dist.shape}")
    if group is not None and group.n_workers != dist.n_workers:
        raise IncompatibleDistribution(
            f"distribution has {dist.n_workers} blocks for {group.n_workers} workers"
        )
    return SharedArray2D(dist, ncomp, group)


def global_read(arr: SharedArray2D, i: int, j: int) -> np.ndarray:
    arr.dist.owner(i, j)
    return arr._data[i, j].copy()


def global_write(arr: SharedArray2D, i: int, j: int, cell) -> None:
    arr.dist.owner(i, j)
    arr._data[i, j] = cell


def local_view(arr: SharedArray2D, worker_id: int) -> np.ndarray:
    """Writable view of the block owned by ``worker_id``; caller must be that worker."""
    me = current_worker()
    if me != worker_id:
        raise NotOwner(f"worker {me} asked for the block of worker {worker_id}")
    r0, r1, c0, c1 = arr.dist.block(worker_id)
    return arr._data[r0:r1, c0:c1]


def _check_one_owner(arr: SharedArray2D, cells: Sequence[tuple[int, int]]) -> None:
    owners = {arr.dist.owner(i, j) for i, j in cells}
    if len(owners) > 1:
        raise SpansOwners(f"range touches workers {sorted(owners)}")


def get_block(arr: SharedArray2D, dest: np.ndarray, src_start: tuple[int, int], length: int) -> None:
    """One-sided copy of ``length`` consecutive (row-major) cells into ``dest``."""
    if length == 0:
        return
    ny, nx = arr.shape
    k0 = src_start[0] * nx + src_start[1]
    if length < 0 or k0 < 0 or k0 + length > ny * nx:
        raise IndexOutOfRange(f"{length} cells from {src_start} leave the array")
    # a run is contiguous in one owner iff both ends and every row it
    # crosses belong to that owner; checking the row heads suffices
    ends = [arr._linear(k0), arr._linear(k0 + length - 1)]
    i0, i1 = ends[0][0], ends[1][0]
    ends += [(i, 0) for i in range(i0 + 1, i1 + 1)] + [(i, nx - 1) for i in range(i0, i1)]
    _check_one_owner(arr, ends)
    flat = arr._data.reshape(-1, arr.ncomp)
    dest.reshape(-1, arr.ncomp)[:length] = flat[k0 : k0 + length]


def get_strided(
    arr: SharedArray2D, dest: np.ndarray, src_start: tuple[int, int], count: int, stride: int
) -> None:
    """One-sided gather ``dest[k] = arr[src_start + k * stride]`` in row-major cell units."""
    if count == 0:
        return
    ny, nx = arr.shape
    k0 = src_start[0] * nx + src_start[1]
    last = k0 + (count - 1) * stride
    if count < 0 or stride < 1 or k0 < 0 or last >= ny * nx:
        raise IndexOutOfRange(f"strided range from {src_start} leaves the array")
    _check_one_owner(arr, [arr._linear(k) for k in range(k0, last + 1, stride)])
    flat = arr._data.reshape(-1, arr.ncomp)
    dest.reshape(-1, arr.ncomp)[:count] = flat[k0 : last + 1 : stride]


# -- two-sided channels ---------------------------------------------------------


@dataclass
class _Ticket:
    network: "Network"
    kind: str
    src: int
    dest: int
    tag: Any
    buffer: np.ndarray | None = None
    done: bool = False


class Network:
    """Mailboxes for ``n`` endpoints with per-(src, dest, tag) FIFO order."""

    def __init__(self, n: int):
        self.n = n
        self._queues: dict[tuple, deque] = defaultdict(deque)
        self._cond = threading.Condition()
        self._aborted = False
        self.sends = [0] * n
        self.recvs = [0] * n
        self._endpoints = [Endpoint(self, r) for r in range(n)]

    def endpoint(self, rank: int) -> "Endpoint":
        return self._endpoints[rank]

    def _post(self, src, dest, tag, payload):
        with self._cond:
            self._queues[(src, dest, tag)].append(payload)
            self.sends[src] += 1
            self._cond.notify_all()

    def _take(self, src, dest, tag):
        key = (src, dest, tag)
        with self._cond:
            while not self._queues[key]:
                if self._aborted:
                    raise _GroupAborted()
                self._cond.wait()
            self.recvs[dest] += 1
            return self._queues[key].popleft()

    def abort(self) -> None:
        with self._cond:
            self._aborted = True
            self._cond.notify_all()

    def pending(self) -> int:
        return sum(len(q) for q in self._queues.values())

    def close(self) -> None:
        left = {k: len(q) for k, q in self._queues.items() if q}
        if left:
            raise OrphanMessage(f"undelivered messages (src, dest, tag) -> count: {left}")

    def reset_counters(self) -> None:
        self.sends = [0] * self.n
        self.recvs = [0] * self.n


class Endpoint:
    """One worker's view of the network."""

    def __init__(self, network: Network, rank: int):
        self.network = network
        self.rank = rank

    def send_async(self, dest: int, tag, payload) -> _Ticket:
        # the payload is copied at post time, so the caller may reuse it
        self.network._post(self.rank, dest, tag, np.array(payload, copy=True))
        return _Ticket(self.network, "send", self.rank, dest, tag, done=True)

    def recv_async(self, src: int, tag, buffer: np.ndarray) -> _Ticket:
        return _Ticket(self.network, "recv", src, self.rank, tag, buffer)


def wait_all(tickets: Sequence[_Ticket]) -> None:
    """Complete all tickets; receive buffers hold their payloads afterwards."""
    for t in tickets:
        if t.done:
            continue
        payload = t.network._take(t.src, t.dest, t.tag)
        t.buffer[...] = payload
        t.done = True
