"""Single-robot time-optimal routing and multi-robot collision-free execution.

Routing searches over (cell, heading) states where a move is either an
in-place quarter/half turn or a straight "run" of one or more cells driven
rest-to-rest with the closed-form velocity profile. Robots therefore stop to
turn, and executed times on a free corridor equal the closed forms exactly.

Execution is cooperative: before a run starts, every cell's occupancy
interval (quantized to 0.5 s slices) is checked against and then entered into
a shared reservation table. On conflict the robot waits one slice; after
repeated waits it re-routes around cells other robots are standing on. A
retry budget turns livelock into an error instead of silent stalling.
"""

import heapq
from math import inf

from . import kinematics
from .kinematics import DEFAULT_PARAMS, run_time, run_cell_crossings
from .layout import STORAGE, DWELL, DIRS

SLICE = 0.5            # s, reservation quantization
WINDOW = 20.0          # s, commitment lookahead at run granularity
REROUTE_AFTER = 8      # consecutive waits before trying a detour
WAIT_BUDGET = 2400     # consecutive waits before declaring livelock


class NoPathError(Exception):
    pass


class LivelockError(Exception):
    """A robot exhausted its wait/replan budget without making progress."""


def _transit_ok(graph, cell, carrying, goal):
    if cell == goal:
        return True
    kind = graph.kind[cell]
    if carrying and kind in (STORAGE, DWELL):
        return False
    sid = graph.station_cells.get(cell)
    if sid is not None and graph.station_cells.get(goal) != sid:
        return False
    return True


def _turn_cost(params, h1, h2):
    return params.turn_time(abs(h1 - h2))


def _search(graph, start_states, goal, carrying, params, blocked, heuristic):
    """Dijkstra/A* over (cell, heading); returns (cost, parents, final_state).

    `start_states` maps (cell, heading) -> initial cost. The final heading at
    the goal is free.
    """
    dist = {}
    parents = {}
    pq = []
    for (cell, h), c0 in start_states.items():
        dist[(cell, h)] = c0
        heapq.heappush(pq, (c0 + heuristic(cell), c0, cell, h))
    while pq:
        f, d, cell, h = heapq.heappop(pq)
        if d > dist.get((cell, h), inf):
            continue
        if cell == goal:
            return d, parents, (cell, h)
        # turns
        for h2 in range(4):
            if h2 == h:
                continue
            nd = d + _turn_cost(params, h, h2)
            if nd < dist.get((cell, h2), inf) - 1e-12:
                dist[(cell, h2)] = nd
                parents[(cell, h2)] = ((cell, h), 0)
                heapq.heappush(pq, (nd + heuristic(cell), nd, cell, h2))
        # straight runs of every length along the current heading
        nxt = cell
        k = 0
        while True:
            step = graph.step[nxt][h]
            if step < 0 or step in blocked:
                break
            if not _transit_ok(graph, step, carrying, goal):
                break
            k += 1
            nxt = step
            nd = d + run_time(k, params)
            if nd < dist.get((nxt, h), inf) - 1e-12:
                dist[(nxt, h)] = nd
                parents[(nxt, h)] = ((cell, h), k)
                heapq.heappush(pq, (nd + heuristic(nxt), nd, nxt, h))
            if nxt == goal:
                break       # runs do not pass through the goal
    return inf, parents, None


def _manhattan_heuristic(graph, goal, params):
    gx, gy = graph.xy[goal]

    def h(cell):
        x, y = graph.xy[cell]
        return (abs(x - gx) + abs(y - gy)) * kinematics.CELL_PITCH / params.vmax

    return h


def _start_states(origin, heading, params):
    if heading is None:
        return {(origin, h): 0.0 for h in range(4)}
    return {(origin, h): _turn_cost(params, heading, h) for h in range(4)}


def shortest_time(graph, origin, goal, carrying, params=DEFAULT_PARAMS,
                  blocked=frozenset(), heading=None):
    """Optimal single-robot travel time origin -> goal; inf when unreachable."""
    if origin == goal:
        return 0.0
    cost, _, _ = _search(graph, _start_states(origin, heading, params), goal,
                         carrying, params, blocked,
                         _manhattan_heuristic(graph, goal, params))
    return cost


def route(graph, origin, goal, carrying, params=DEFAULT_PARAMS, blocked=frozenset(),
          heading=None):
    """Cell sequence of a time-optimal route (origin..goal); None if unreachable.

    With `heading` given, the cost of the initial turn away from it is part
    of the optimization, so the route prefers starting in the facing direction.
    """
    if origin == goal:
        return [origin]
    cost, parents, final = _search(graph, _start_states(origin, heading, params),
                                   goal, carrying, params, blocked,
                                   _manhattan_heuristic(graph, goal, params))
    if final is None:
        return None
    cells = [final[0]]
    state = final
    while state in parents:
        prev, k = parents[state]
        if k:
            h = state[1]
            c = prev[0]
            seg = []
            for _ in range(k):
                c = graph.step[c][h]
                seg.append(c)
            cells = seg[:-1] + cells if seg[-1] == cells[0] else seg + cells
        state = prev
    cells.insert(0, state[0])
    # collapse the duplicate origin introduced by turn moves at the start
    out = [cells[0]]
    for c in cells[1:]:
        if c != out[-1]:
            out.append(c)
    return out


class _TimeField:
    """Cached one-to-all / all-to-one optimal-time maps over a graph."""

    def __init__(self, graph, params=DEFAULT_PARAMS):
        self.graph = graph
        self.params = params
        self._fields = {}
        self._rev_step = None

    def _reverse_step(self):
        if self._rev_step is None:
            g = self.graph
            rev = [[-1, -1, -1, -1] for _ in range(g.node_count())]
            for c in range(g.node_count()):
                for d in range(4):
                    j = g.step[c][d]
                    if j >= 0:
                        rev[j][(d + 2) % 4] = c
            self._rev_step = rev
        return self._rev_step

    def to_goal(self, goal, carrying):
        """dict cell -> optimal time from that cell to `goal`."""
        key = (goal, carrying, True)
        if key not in self._fields:
            self._fields[key] = self._dijkstra(goal, carrying, reverse=True)
        return self._fields[key]

    def from_origin(self, origin, carrying):
        """dict cell -> optimal time from `origin` to that cell."""
        key = (origin, carrying, False)
        if key not in self._fields:
            self._fields[key] = self._dijkstra(origin, carrying, reverse=False)
        return self._fields[key]

    def _dijkstra(self, anchor, carrying, reverse):
        g = self.graph
        params = self.params
        step = self._reverse_step() if reverse else g.step
        best = {anchor: 0.0}
        dist = {}
        pq = []
        for h in range(4):
            dist[(anchor, h)] = 0.0
            heapq.heappush(pq, (0.0, anchor, h))
        while pq:
            d, cell, h = heapq.heappop(pq)
            if d > dist.get((cell, h), inf):
                continue
            for h2 in range(4):
                if h2 != h:
                    nd = d + _turn_cost(params, h, h2)
                    if nd < dist.get((cell, h2), inf) - 1e-12:
                        dist[(cell, h2)] = nd
                        heapq.heappush(pq, (nd, cell, h2))
            nxt = cell
            k = 0
            while True:
                j = step[nxt][h]
                if j < 0:
                    break
                k += 1
                nd = d + run_time(k, params)
                if nd < best.get(j, inf):
                    best[j] = nd
                # cells that are illegal to transit (e.g. storage cells for a
                # carrying robot) are still valid query endpoints: record the
                # time but do not expand the search through them.
                if not _transit_ok(g, j, carrying, anchor):
                    break
                if nd < dist.get((j, h), inf) - 1e-12:
                    dist[(j, h)] = nd
                    heapq.heappush(pq, (nd, j, h))
                nxt = j
        return best


def time_field(graph, params=DEFAULT_PARAMS):
    tf = getattr(graph, "_time_field", None)
    if tf is None:
        tf = _TimeField(graph, params)
        graph._time_field = tf
    return tf


def estimate_path_time(graph, origin, goal, carrying, params=DEFAULT_PARAMS):
    """Admissible optimal travel-time estimate between two waypoints.

    Carrying robots may not cut through storage or dwell cells (endpoints
    excluded). Returns inf for unreachable pairs. This is a lower bound on
    any executed path time between the same endpoints because execution uses
    the same move model plus waiting.
    """
    if origin == goal:
        return 0.0
    return time_field(graph, params).to_goal(goal, carrying).get(origin, inf)


class ReservationTable:
    """(waypoint, time-interval) -> robot bookkeeping, quantized to slices."""

    def __init__(self):
        self.timed = {}      # cell -> list of [s0, s1, robot]
        self.standing = {}   # cell -> (robot, s0)

    @staticmethod
    def to_slice(t):
        return int(t / SLICE)

    def is_free(self, cell, s0, s1, robot):
        st = self.standing.get(cell)
        if st is not None and st[0] != robot and st[1] <= s1:
            return False
        for a, b, r in self.timed.get(cell, ()):
            if r != robot and a <= s1 and s0 <= b:
                return False
        return True

    def reserve(self, cell, s0, s1, robot):
        self.timed.setdefault(cell, []).append((s0, s1, robot))

    def set_standing(self, cell, robot, s0):
        self.standing[cell] = (robot, s0)

    def clear_standing(self, cell, robot):
        st = self.standing.get(cell)
        if st is not None and st[0] == robot:
            del self.standing[cell]

    def standing_cells(self, exclude_robot):
        return {c for c, (r, _) in self.standing.items() if r != exclude_robot}

    def prune(self, before_time):
        s = self.to_slice(before_time)
        for cell in list(self.timed):
            keep = [iv for iv in self.timed[cell] if iv[1] >= s]
            if keep:
                self.timed[cell] = keep
            else:
                del self.timed[cell]

    def occupancy_conflicts(self):
        """Pairs of overlapping reservations by different robots (debug sweep)."""
        bad = []
        for cell, ivs in self.timed.items():
            ivs = sorted(ivs)
            for i in range(len(ivs)):
                for j in range(i + 1, len(ivs)):
                    if ivs[j][0] > ivs[i][1]:
                        break
                    if ivs[i][2] != ivs[j][2]:
                        bad.append((cell, ivs[i], ivs[j]))
        return bad


class RobotAgent:
    """Kinematic robot executing drive/lift/set-down legs against reservations.

    The scheduler must expose `.now` and `.schedule(delay, kind, fn)`. Leg
    completion invokes the `done` callback; planner livelock is surfaced via
    `on_fail(robot, exc)`.
    """

    def __init__(self, rid, graph, reservations, scheduler, cell, heading=1,
                 params=DEFAULT_PARAMS, on_fail=None):
        self.id = rid
        self.graph = graph
        self.res = reservations
        self.sched = scheduler
        self.cell = cell
        self.heading = heading
        self.params = params
        self.carrying = None        # pod id or None
        self.distance_traveled = 0.0
        self.on_fail = on_fail
        self.assigned_station = None
        self._route = None
        self._goal = None
        self._done = None
        self._waits = 0
        self._busy = False
        self.res.set_standing(cell, self.id, self.res.to_slice(scheduler.now))

    # ------------------------------------------------------------------ legs

    def drive(self, goal, done):
        """Travel to `goal`; calls done() on arrival."""
        if self._busy:
            raise RuntimeError(f"robot {self.id} already executing a leg")
        self._goal = goal
        self._done = done
        self._waits = 0
        if goal == self.cell:
            done()
            return
        self._busy = True
        self._route = self._find_route(frozenset())
        if self._route is None:
            self._fail(NoPathError(f"robot {self.id}: no route {self.cell}->{goal}"))
            return
        self._advance()

    def lift(self, pod_id, done):
        self._hoist(pod_id, done)

    def set_down(self, done):
        self._hoist(None, done)

    def _hoist(self, carrying, done):
        if self._busy:
            raise RuntimeError(f"robot {self.id} already executing a leg")
        self._busy = True

        def finish():
            self.carrying = carrying
            self._busy = False
            done()

        self.sched.schedule(self.params.lift_set_time, "robot-leg-done", finish)

    # ------------------------------------------------------------- internals

    def _find_route(self, blocked):
        return route(self.graph, self.cell, self._goal, self.carrying is not None,
                     self.params, blocked, heading=self.heading)

    def _advance(self):
        if self.cell == self._goal:
            self._busy = False
            self._route = None
            cb = self._done
            self._done = None
            cb()
            return
        # trim the route to the current cell
        while self._route and self._route[0] != self.cell:
            self._route.pop(0)
        if not self._route or len(self._route) < 2:
            self._route = self._find_route(frozenset())
            if self._route is None:
                self._fail(NoPathError(f"robot {self.id}: lost route to {self._goal}"))
                return
        d = self.graph.direction(self._route[0], self._route[1])
        if d != self.heading:
            dt = _turn_cost(self.params, self.heading, d)

            def turned():
                self.heading = d
                self._advance()

            self.sched.schedule(dt, "robot-leg-done", turned)
            return
        # longest straight stretch of the remaining route
        k = 1
        while (k + 1 < len(self._route)
               and self.graph.direction(self._route[k], self._route[k + 1]) == d):
            k += 1
        self._try_run(self._route[:k + 1])

    def _run_bounds(self, k, now):
        # cell i is occupied from crossing i-1 to crossing i
        crossings = run_cell_crossings(k, self.params)
        total = run_time(k, self.params)
        bounds = [(now, now + crossings[0])]
        for i in range(1, k):
            bounds.append((now + crossings[i - 1], now + crossings[i]))
        bounds.append((now + crossings[k - 1], now + total))
        return bounds, total

    def _try_run(self, cells):
        now = self.sched.now
        to_slice = self.res.to_slice
        lookahead = int(WINDOW / SLICE)
        k = len(cells) - 1
        # shrink on conflict and re-check from scratch: a shorter run has a
        # different speed profile, so all its occupancy intervals change
        while k >= 1:
            bounds, total = self._run_bounds(k, now)
            conflict = 0
            for i in range(1, k + 1):
                s0, s1 = to_slice(bounds[i][0]), to_slice(bounds[i][1])
                # the final cell becomes a standing spot of unknown duration;
                # check a window ahead, later arrivals revalidate at commit
                if not self.res.is_free(cells[i], s0,
                                        s1 if i < k else s1 + lookahead, self.id):
                    conflict = i
                    break
            if conflict == 0:
                break
            k = conflict - 1
        if k < 1:
            self._wait()
            return
        cells = cells[:k + 1]
        # commit: replace the standing reservation, book every cell interval
        self.res.clear_standing(self.cell, self.id)
        for i in range(k):
            self.res.reserve(cells[i], to_slice(bounds[i][0]), to_slice(bounds[i][1]),
                             self.id)
        last_entry = to_slice(bounds[k][0])
        self.res.reserve(cells[k], last_entry, to_slice(bounds[k][1]), self.id)
        self.res.set_standing(cells[k], self.id, last_entry)
        self._waits = 0
        dest = cells[k]
        steps = k

        def arrive():
            self.cell = dest
            self.distance_traveled += steps * kinematics.CELL_PITCH
            self._advance()

        self.sched.schedule(total, "robot-leg-done", arrive)

    def _wait(self):
        self._waits += 1
        if self._waits > WAIT_BUDGET:
            self._fail(LivelockError(
                f"robot {self.id} stuck at {self.cell} heading for {self._goal}"))
            return
        if self._waits % REROUTE_AFTER == 0:
            blocked = self.res.standing_cells(self.id)
            blocked.discard(self._goal)
            alt = self._find_route(frozenset(blocked))
            if alt is not None:
                self._route = alt
        self.sched.schedule(SLICE, "replan", self._advance)

    def _fail(self, exc):
        self._busy = False
        if self.on_fail is not None:
            self.on_fail(self, exc)
        else:
            raise exc
