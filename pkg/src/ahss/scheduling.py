"""Delay schedules driving the deterministic asynchronous simulator.

A schedule prescribes, for every global step ``k``, which blocks update
(the active set) and how stale every cross-block read is, separately for
the two half-step stages.  Staleness is bounded by ``max_delay`` and every
block is activated at least once in any window of ``window`` consecutive
steps, the finite stand-ins for the idealized requirements that every block
updates infinitely often with delays that eventually move forward.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

__all__ = ["DelaySchedule", "random_admissible_schedule", "synchronous_schedule"]


@dataclass
class DelaySchedule:
    """Activation sets and per-stage read delays for ``n_steps`` steps.

    ``active[k, s]`` flags block ``s`` updating at step ``k``.
    ``delta_x[k, s, q]`` is the iterate index (in [max(0, k - max_delay), k])
    of block ``q``'s value read by block ``s`` during the first half-step;
    ``delta_y[k, s, q]`` plays the same role for the second half-step's
    reads of first-stage values.
    """

    m: int
    n_steps: int
    max_delay: int
    window: int
    active: np.ndarray
    delta_x: np.ndarray
    delta_y: np.ndarray
    params: dict | None = field(default=None, repr=False)

    def validate(self):
        """Check causality, bounded staleness, and window coverage."""
        shape3 = (self.n_steps, self.m, self.m)
        if self.active.shape != (self.n_steps, self.m):
            raise ValueError("active has wrong shape")
        if self.delta_x.shape != shape3 or self.delta_y.shape != shape3:
            raise ValueError("delay tables have wrong shape")
        steps = np.arange(self.n_steps)[:, None, None]
        for name, delta in (("delta_x", self.delta_x), ("delta_y", self.delta_y)):
            if np.any(delta > steps):
                raise ValueError(f"{name} violates causality")
            if np.any(delta < np.maximum(0, steps - self.max_delay)):
                raise ValueError(f"{name} exceeds the staleness bound")
        for start in range(0, self.n_steps - self.window + 1):
            if not np.all(self.active[start:start + self.window].any(axis=0)):
                raise ValueError("a block misses an activation window")
        return self

    def to_json(self):
        """Compact JSON form: generator parameters when available."""
        if self.params is not None:
            return json.dumps({"kind": "params", **self.params})
        return json.dumps({
            "kind": "tables",
            "m": self.m,
            "n_steps": self.n_steps,
            "max_delay": self.max_delay,
            "window": self.window,
            "active": self.active.astype(int).tolist(),
            "delta_x": self.delta_x.tolist(),
            "delta_y": self.delta_y.tolist(),
        })

    @staticmethod
    def from_json(text):
        doc = json.loads(text)
        if doc.get("kind") == "params":
            if doc.get("generator") == "synchronous":
                return synchronous_schedule(doc["m"], doc["n_steps"])
            return random_admissible_schedule(
                doc["seed"], doc["m"], doc["n_steps"], doc["max_delay"],
                doc["activation_prob"])
        return DelaySchedule(
            m=doc["m"], n_steps=doc["n_steps"], max_delay=doc["max_delay"],
            window=doc["window"],
            active=np.asarray(doc["active"], dtype=bool),
            delta_x=np.asarray(doc["delta_x"], dtype=np.int64),
            delta_y=np.asarray(doc["delta_y"], dtype=np.int64),
        ).validate()


def random_admissible_schedule(seed, m, n_steps, max_delay, activation_prob):
    """Pseudorandom admissible schedule, fully determined by ``seed``.

    Each block activates independently with probability ``activation_prob``
    and is forced in after ``window = ceil(2 / activation_prob)`` inactive
    steps; every read delay is drawn uniformly from the admissible range
    ``[max(0, k - max_delay), k]``.
    """
    if max_delay < 0:
        raise ValueError("max_delay must be >= 0")
    if not 0.0 < activation_prob <= 1.0:
        raise ValueError("activation_prob must be in (0, 1]")
    rng = np.random.default_rng(seed)
    window = int(np.ceil(2.0 / activation_prob))
    active = np.zeros((n_steps, m), dtype=bool)
    delta_x = np.zeros((n_steps, m, m), dtype=np.int64)
    delta_y = np.zeros((n_steps, m, m), dtype=np.int64)
    last_active = np.full(m, -1)
    for k in range(n_steps):
        row = rng.random(m) < activation_prob
        row |= (k - last_active) >= window
        active[k] = row
        last_active[row] = k
        low = max(0, k - max_delay)
        delta_x[k] = rng.integers(low, k + 1, size=(m, m))
        delta_y[k] = rng.integers(low, k + 1, size=(m, m))
    sched = DelaySchedule(m=m, n_steps=n_steps, max_delay=max_delay,
                          window=window, active=active,
                          delta_x=delta_x, delta_y=delta_y,
                          params={"generator": "random", "seed": seed, "m": m,
                                  "n_steps": n_steps, "max_delay": max_delay,
                                  "activation_prob": activation_prob})
    return sched.validate()


def synchronous_schedule(m, n_steps):
    """Delay-free schedule: every block active, every read current."""
    steps = np.arange(n_steps, dtype=np.int64)[:, None, None]
    delta = np.broadcast_to(steps, (n_steps, m, m)).copy()
    sched = DelaySchedule(m=m, n_steps=n_steps, max_delay=0, window=1,
                          active=np.ones((n_steps, m), dtype=bool),
                          delta_x=delta, delta_y=delta.copy(),
                          params={"generator": "synchronous", "m": m,
                                  "n_steps": n_steps})
    return sched.validate()
