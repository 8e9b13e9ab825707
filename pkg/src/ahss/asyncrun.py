"""Asynchronous alternating runtimes: deterministic simulator and threads.

``simulate_async`` replays the formal two-stage asynchronous model under an
explicit delay schedule, single-threaded and bit-reproducible: with the
delay-free schedule it reproduces the synchronous stationary iteration
exactly.  ``run_async_threaded`` runs one worker thread per block with
wait-free snapshot publication and non-blocking residual reduction, the
in-process counterpart of a distributed execution; it is not reproducible
run to run, only its postconditions are contractual.

Publication protocol of the threaded runtime: each worker publishes a fresh
immutable array per half-step into its own slot of a shared list.  Slot
assignment is atomic in CPython and published arrays are never mutated, so
readers always observe some complete previously published version, never a
torn one.
"""

from __future__ import annotations

import threading
import time
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .sparse import spmv

__all__ = [
    "AsyncReport",
    "Snapshot",
    "simulate_async",
    "reduce_residual_snapshot",
    "run_async_threaded",
]


@dataclass
class AsyncReport:
    """Outcome of an asynchronous run.

    ``k_min`` and ``k_max`` are the extreme per-block local iteration
    counts (there is no shared global iteration number); ``global_tests``
    counts completed residual reductions, including the initial one.
    """

    k_min: int
    k_max: int
    global_tests: int
    final_relres: float
    converged: bool
    wall_time: float
    reason: str = ""
    snapshot_relres: float | None = None

    def to_dict(self):
        return {
            "k_min": self.k_min,
            "k_max": self.k_max,
            "global_tests": self.global_tests,
            "final_relres": self.final_relres,
            "converged": self.converged,
            "wall_time": self.wall_time,
            "reason": self.reason,
            "snapshot_relres": self.snapshot_relres,
        }

    def to_json(self):
        import json
        return json.dumps(self.to_dict())


def simulate_async(A, b, split, part, sched, eps=1e-6, x0=None, record_trace=True):
    """Deterministic single-threaded replay of the asynchronous iteration.

    At every step the first stage is evaluated for all blocks from delayed
    reads of past iterates, then the active blocks apply the second stage
    from delayed reads of first-stage values; inactive blocks carry their
    value forward.  The run stops when the exact global relative residual
    reaches ``eps`` (the simulator is an oracle, so the true residual is
    available) or the schedule is exhausted.

    Parameters
    ----------
    A : csr_matrix
    b : ndarray
    split : DiagonalSplitting
    part : BlockPartition
    sched : DelaySchedule
    eps : float
    x0 : ndarray or None
    record_trace : bool
        Keep a copy of every iterate in the returned trace.

    Returns
    -------
    x : ndarray
    report : AsyncReport
    trace : list of ndarray
        Iterates ``x^0, x^1, ...`` (empty when ``record_trace`` is False).
    """
    if sched.m != part.m:
        raise ValueError("shape: schedule and partition disagree on block count")
    n = A.shape[0]
    if part.n != n or split.n != n:
        raise ValueError("shape: partition or splitting does not match the matrix")
    b = np.asarray(b)
    bnorm = np.linalg.norm(b)
    dtype = np.promote_types(np.promote_types(A.dtype, b.dtype), split.m_diag.dtype)
    x = np.zeros(n, dtype=dtype) if x0 is None else np.array(x0, dtype=dtype)
    slices = part.slices()
    A_rows = [A[sl] for sl in slices]
    depth = sched.max_delay + 1
    x_hist = {0: x.copy()}
    y_hist = {}
    trace = [x.copy()] if record_trace else []
    updates = np.zeros(part.m, dtype=np.int64)
    t0 = time.perf_counter()

    if bnorm == 0.0:
        return x, AsyncReport(0, 0, 0, 0.0, True, time.perf_counter() - t0), trace
    relres = np.linalg.norm(b - spmv(A, x)) / bnorm
    if relres <= eps:
        return x, AsyncReport(0, 0, 1, relres, True, time.perf_counter() - t0), trace

    def gather(history, delays):
        out = np.empty(n, dtype=dtype)
        for q, sl in enumerate(slices):
            out[sl] = history[delays[q]][sl]
        return out

    converged = False
    steps = 0
    for k in range(sched.n_steps):
        y = np.empty(n, dtype=dtype)
        for s, sl in enumerate(slices):
            xs = gather(x_hist, sched.delta_x[k, s])
            r_s = b[sl] - A_rows[s] @ xs
            y[sl] = x_hist[sched.delta_x[k, s, s]][sl] + r_s / split.m_diag[sl]
        y_hist[k] = y
        x_next = x.copy()
        for s, sl in enumerate(slices):
            if not sched.active[k, s]:
                continue
            ys = gather(y_hist, sched.delta_y[k, s])
            r_s = b[sl] - A_rows[s] @ ys
            x_next[sl] = y_hist[sched.delta_y[k, s, s]][sl] + r_s / split.f_diag[sl]
            updates[s] += 1
        x = x_next
        x_hist[k + 1] = x
        steps = k + 1
        for stale in (k + 1 - depth, k - depth):
            x_hist.pop(stale, None)
            y_hist.pop(stale, None)
        if record_trace:
            trace.append(x.copy())
        relres = np.linalg.norm(b - spmv(A, x)) / bnorm
        if not np.isfinite(relres):
            return x, AsyncReport(int(updates.min()), int(updates.max()), steps,
                                  relres, False, time.perf_counter() - t0,
                                  reason="diverged"), trace
        if relres <= eps:
            converged = True
            break
    return x, AsyncReport(int(updates.min()), int(updates.max()), steps, relres,
                          converged, time.perf_counter() - t0,
                          reason="" if converged else "schedule_exhausted"), trace


class Snapshot(NamedTuple):
    """Result of one completed residual reduction."""

    epoch: int
    value: float


def reduce_residual_snapshot(contributions, epoch):
    """Combine per-block squared residual contributions into a global norm.

    ``contributions`` holds per block the latest ``(tag, value)`` pair with
    ``value = ||r_block||^2``; tags may come from different local iterations
    by design.  Returns ``None`` while any block has not contributed yet.
    """
    total = 0.0
    for entry in contributions:
        if entry is None:
            return None
        total += entry[1]
    return Snapshot(epoch, float(np.sqrt(total)))


def run_async_threaded(A, b, split, part, eps=1e-6, kmax_tests=10**9, x0=None,
                       max_resume_rounds=3):
    """Run the alternating iteration with one worker thread per block.

    Every worker loops its block's two half-steps against the latest
    published neighbor versions and participates in a non-blocking global
    residual reduction (worker 0 doubles as coordinator).  Workers stop when
    a reduction snapshot meets ``eps * ||b||`` or the test budget runs out.
    Because an accepted snapshot mixes residual pieces of different ages,
    the exact residual is recomputed after joining; while it exceeds the
    threshold, workers are resumed, up to ``max_resume_rounds`` times.

    Returns
    -------
    x : ndarray
    report : AsyncReport
        ``final_relres`` is the exact post-join value; ``snapshot_relres``
        is the accepted snapshot that stopped the run.
    """
    n = A.shape[0]
    m = part.m
    if part.n != n or split.n != n:
        raise ValueError("shape: partition or splitting does not match the matrix")
    b = np.asarray(b)
    bnorm = np.linalg.norm(b)
    dtype = np.promote_types(np.promote_types(A.dtype, b.dtype), split.m_diag.dtype)
    x = np.zeros(n, dtype=dtype) if x0 is None else np.array(x0, dtype=dtype)
    t0 = time.perf_counter()
    if bnorm == 0.0:
        return x, AsyncReport(0, 0, 0, 0.0, True, time.perf_counter() - t0)

    slices = part.slices()
    b_rows = [np.ascontiguousarray(b[sl]) for sl in slices]
    m_diag = [np.ascontiguousarray(split.m_diag[sl]) for sl in slices]
    f_diag = [np.ascontiguousarray(split.f_diag[sl]) for sl in slices]
    # keep only the column blocks each worker actually couples to
    neighbors = []
    for sl in slices:
        A_s = A[sl]
        cols = []
        for q, (start, stop) in enumerate(part.ranges):
            piece = A_s[:, start:stop]
            if piece.nnz:
                cols.append((q, piece))
        neighbors.append(cols)

    r0 = b - spmv(A, x)
    relres = np.linalg.norm(r0) / bnorm
    global_tests = 1
    if relres <= eps:
        return x, AsyncReport(0, 0, global_tests, relres, True,
                              time.perf_counter() - t0, snapshot_relres=relres)

    published = [np.array(x[sl]) for sl in slices]
    contributions = [None] * m
    snapshot_cell = [None]
    local_iters = np.zeros(m, dtype=np.int64)
    stop = threading.Event()
    abort = threading.Event()
    threshold = eps * bnorm
    state = {"epoch": 0, "tests": 0, "accepted": None}

    def coordinate(last_seen):
        """Complete a reduction once every block contributed since the last one."""
        current = [contributions[q] for q in range(m)]
        if any(c is None or c[0] <= last_seen[q] for q, c in enumerate(current)):
            return last_seen
        snap = reduce_residual_snapshot(current, state["epoch"])
        state["epoch"] += 1
        state["tests"] += 1
        snapshot_cell[0] = snap
        for q, c in enumerate(current):
            last_seen[q] = c[0]
        if snap.value <= threshold:
            state["accepted"] = snap
            stop.set()
        elif state["tests"] >= kmax_tests:
            stop.set()
        return last_seen

    def worker(s):
        x_s = np.array(x[slices[s]])
        r_s = np.array(r0[slices[s]])
        cols = neighbors[s]
        b_s, md_s, fd_s = b_rows[s], m_diag[s], f_diag[s]
        seq = 0
        seen_epoch = -1
        last_seen = [-1] * m if s == 0 else None

        def local_residual():
            r = b_s.copy()
            for q, piece in cols:
                r -= piece @ published[q]
            return r

        while not (stop.is_set() or abort.is_set()):
            x_s = x_s + r_s / md_s
            published[s] = x_s.copy()
            r_s = local_residual()
            x_s = x_s + r_s / fd_s
            published[s] = x_s.copy()
            r_s = local_residual()
            rr = np.vdot(r_s, r_s).real
            if not np.isfinite(rr):
                abort.set()
                break
            seq += 1
            contributions[s] = (seq, rr)
            if s == 0:
                coordinate(last_seen)
            snap = snapshot_cell[0]
            if snap is not None and snap.epoch > seen_epoch:
                seen_epoch = snap.epoch
            local_iters[s] += 1

    rounds = 0
    while True:
        threads = [threading.Thread(target=worker, args=(s,), daemon=True)
                   for s in range(m)]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        x = np.concatenate(published)
        global_tests += state["tests"]
        if abort.is_set():
            relres = np.linalg.norm(b - spmv(A, x)) / bnorm
            return x, AsyncReport(int(local_iters.min()), int(local_iters.max()),
                                  global_tests, relres, False,
                                  time.perf_counter() - t0, reason="diverged")
        relres = np.linalg.norm(b - spmv(A, x)) / bnorm
        accepted = state["accepted"]
        if relres <= eps:
            break
        if accepted is None or rounds >= max_resume_rounds:
            # budget exhausted, or resumes did not push the exact residual under
            break
        rounds += 1
        r0 = b - spmv(A, x)
        stop.clear()
        state["tests"] = 0
        state["accepted"] = None
        contributions[:] = [None] * m
        snapshot_cell[0] = None
    snapshot_value = accepted.value / bnorm if accepted is not None else None
    # an accepted snapshot mixes residual pieces of different ages; the
    # contract bounds the exact post-join value by 1.1x the threshold
    converged = relres <= eps or (accepted is not None and relres <= 1.1 * eps)
    if converged:
        reason = ""
    elif accepted is not None:
        reason = "stale_accept"
    else:
        reason = "kmax_tests"
    return x, AsyncReport(int(local_iters.min()), int(local_iters.max()),
                          global_tests, relres, converged,
                          time.perf_counter() - t0, reason=reason,
                          snapshot_relres=snapshot_value)
