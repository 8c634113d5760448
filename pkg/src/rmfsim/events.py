"""Event queue for the agent-based, event-driven simulation core.

Events carry a continuous timestamp and an insertion sequence number; the
queue processes them in nondecreasing time with sequence-number tie-breaking,
which makes every run deterministic for a fixed seed. An optional trace
callback observes each processed event for hashing or debugging dumps.
"""

import heapq


class EventLoop:
    def __init__(self):
        self.now = 0.0
        self._heap = []
        self._seq = 0
        self.processed = 0
        self.trace = None     # callable(time, kind, detail) or None

    def schedule(self, delay, kind, fn, detail=""):
        if delay < 0:
            raise ValueError("cannot schedule into the past")
        self._seq += 1
        heapq.heappush(self._heap, (self.now + delay, self._seq, kind, fn, detail))

    def schedule_at(self, time, kind, fn, detail=""):
        self.schedule(max(0.0, time - self.now), kind, fn, detail)

    def run_until(self, horizon):
        """Process events with time <= horizon; the clock never goes backward."""
        while self._heap and self._heap[0][0] <= horizon:
            time, _, kind, fn, detail = heapq.heappop(self._heap)
            self.now = time
            self.processed += 1
            if self.trace is not None:
                self.trace(time, kind, detail)
            fn()
        self.now = horizon

    def empty(self):
        return not self._heap
