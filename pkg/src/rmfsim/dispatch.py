"""Task plumbing: robot allocation, station buffer queues, and the request
objects that turn order assignments into robot trips."""

from collections import deque


def pick_share(n_robots):
    """Two-thirds of the fleet works the pick side, rounded half up."""
    return int(2 * n_robots / 3 + 0.5)


def allocate_robots(robots, pick_stations, repl_stations):
    """Assign every robot to one active station.

    Returns {robot: station}. Two-thirds go to pick work when both kinds have
    active stations; a side with no active station donates its robots to the
    other. Within a side, robots round-robin over stations in id order, so
    station loads differ by at most one.
    """
    pick_act = sorted((s for s in pick_stations if s.active), key=lambda s: s.id)
    repl_act = sorted((s for s in repl_stations if s.active), key=lambda s: s.id)
    bots = sorted(robots, key=lambda r: r.id)
    out = {}
    if not pick_act and not repl_act:
        return {r: None for r in bots}
    if not repl_act:
        n_pick = len(bots)
    elif not pick_act:
        n_pick = 0
    else:
        n_pick = pick_share(len(bots))
    for i, r in enumerate(bots[:n_pick]):
        out[r] = pick_act[i % len(pick_act)]
    for i, r in enumerate(bots[n_pick:]):
        out[r] = repl_act[i % len(repl_act)]
    return out


class ExtractionTask:
    """Bring a pod to a pick station; the pod is bound at PPS time."""

    def __init__(self, pod, station, robot):
        self.pod = pod
        self.station = station
        self.robot = robot
        self.reservations = []    # (order, sku_id, PickReservation)

    def cancel_reservations(self, station):
        for order, sku_id, handle in self.reservations:
            units = handle.units
            handle.cancel()
            key = (order.id, sku_id)
            station.inbound_reserved[key] -= units
            if station.inbound_reserved[key] <= 0:
                station.inbound_reserved.pop(key)
        self.reservations = []


class InsertionBatch:
    """Replenishment orders that ride to one station on one pod."""

    PENDING, FETCHING, AT_STATION, CLOSED = "pending", "fetching", "at-station", "closed"

    def __init__(self, pod, station):
        self.pod = pod
        self.station = station
        self.puts = deque()       # (order, SpaceReservation)
        self.state = self.PENDING
        self.robot = None

    def add(self, order, handle):
        self.puts.append((order, handle))

    @property
    def open_for_orders(self):
        return self.state != self.CLOSED


class StoreRequest:
    """Return a pod to storage; always served by the robot already carrying it."""

    def __init__(self, pod, robot, target):
        self.pod = pod
        self.robot = robot
        self.target = target


class StationQueue:
    """FIFO buffer chain with short-cuts over empty cells.

    Robots ask to join at the station's entry cell; each claims the deepest
    unclaimed buffer cell (the access point itself when everything is empty,
    which realizes the short-cut), advances as cells free up, and triggers
    `ready_cb(robot)` on reaching the access point.
    """

    def __init__(self, geometry):
        self.cells = list(geometry.queue)        # tail .. access
        self.access = geometry.queue[-1]
        self.entry = geometry.entry
        self.exit = geometry.exit
        self.claims = {}                         # cell -> robot
        self.member_cbs = {}                     # robot -> ready callback
        self.targets = {}                        # robot -> claimed cell
        self.driving = set()
        self.waiting = deque()                   # robots parked at/near entry

    def _deepest_unclaimed(self):
        for cell in reversed(self.cells):
            if cell not in self.claims:
                return cell
        return None

    def join(self, robot, ready_cb):
        self.member_cbs[robot] = ready_cb
        self.waiting.append(robot)
        self.advance()

    def leave(self, robot):
        cell = self.targets.pop(robot, None)
        if cell is not None:
            del self.claims[cell]
        self.member_cbs.pop(robot, None)
        self.driving.discard(robot)
        self.advance()

    def advance(self):
        # admit waiters first-come-first-served, then roll members forward
        while self.waiting:
            target = self._deepest_unclaimed()
            if target is None:
                break
            robot = self.waiting.popleft()
            self._claim_and_drive(robot, target)
        for cell in reversed(self.cells):        # access-first
            robot = self.claims.get(cell)
            if robot is None or robot in self.driving:
                continue
            deeper = self._deeper_unclaimed(cell)
            if deeper is not None:
                del self.claims[cell]
                self._claim_and_drive(robot, deeper)

    def _deeper_unclaimed(self, cell):
        idx = self.cells.index(cell)
        for j in range(len(self.cells) - 1, idx, -1):
            if self.cells[j] not in self.claims:
                return self.cells[j]
        return None

    def _claim_and_drive(self, robot, target):
        self.claims[target] = robot
        self.targets[robot] = target
        self.driving.add(robot)

        def arrived():
            self.driving.discard(robot)
            if robot.cell == self.access:
                self.member_cbs.pop(robot)(robot)
            else:
                self.advance()

        robot.drive(target, arrived)
