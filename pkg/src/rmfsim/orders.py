"""Order generation under constant-backlog pressure.

Pick orders draw their line count and per-line units from truncated normal
distributions (setting-dependent), replenishment orders restock 4..12 units
of one SKU (or a single unit for returns), and both backlogs are refilled the
moment an order leaves them unless generation is paused by the
storage-utilization thresholds.
"""

from dataclasses import dataclass, field

PRIORITY_SHARE = 0.20
PRIORITY_DUE = 30 * 60.0
NORMAL_DUE = 120 * 60.0

# (mu, sigma, min, max) for line count and units per line
ORDER_SIZE_SETTINGS = {
    "Small": ((1.0, 1.0, 1, 1), (1.0, 0.3, 1, 1)),
    "Mixed": ((1.0, 1.0, 1, 4), (1.0, 0.3, 1, 3)),
    "Large": ((1.0, 1.0, 2, 4), (1.0, 0.3, 2, 3)),
}


class BacklogState:
    BACKLOG = "backlog"
    ASSIGNED = "assigned"
    COMPLETE = "complete"
    STORED = "stored"


@dataclass
class PickOrder:
    id: int
    lines: dict                 # sku id -> required units
    submit_time: float
    priority: bool
    remaining: dict = None      # sku id -> units still unpicked
    station_assign_time: float = None
    completion_time: float = None
    state: str = BacklogState.BACKLOG
    outstanding_handlings: int = 0

    def __post_init__(self):
        if self.remaining is None:
            self.remaining = dict(self.lines)
        self.due_time = self.submit_time + (PRIORITY_DUE if self.priority else NORMAL_DUE)

    @property
    def open_units(self):
        return sum(self.remaining.values())

    def fully_picked(self):
        return all(v == 0 for v in self.remaining.values())


@dataclass
class ReplenishmentOrder:
    id: int
    sku_id: int
    units: int
    sequence_index: int
    state: str = BacklogState.BACKLOG
    station = None
    pod = None


def draw_sku(catalog, rng):
    """Choose a SKU with probability weight / sum(weights)."""
    total = 0.0
    r = rng.random() * sum(s.weight for s in catalog)
    for s in catalog:
        total += s.weight
        if r <= total:
            return s
    return catalog[-1]


class SkuSampler:
    """Cumulative-weight sampler; equivalent to draw_sku but O(log n)."""

    def __init__(self, catalog):
        self.catalog = list(catalog)
        self.cum = []
        acc = 0.0
        for s in self.catalog:
            acc += s.weight
            self.cum.append(acc)
        self.total = acc

    def draw(self, rng):
        import bisect
        r = rng.random() * self.total
        return self.catalog[bisect.bisect_left(self.cum, r)]


def _truncated_normal_int(mu, sigma, lo, hi, rng):
    # rejection against the untruncated normal, rounded to the nearest integer
    if lo == hi:
        return lo
    while True:
        v = round(rng.gauss(mu, sigma))
        if lo <= v <= hi:
            return int(v)


def generate_pick_order(oid, size_setting, sampler, rng, now):
    """Draw one pick order for the given size setting.

    Lines use distinct SKUs (a duplicate would just be a bigger line), so the
    Large setting needs at least two SKUs in the catalog.
    """
    line_cfg, unit_cfg = ORDER_SIZE_SETTINGS[size_setting]
    n_lines = _truncated_normal_int(*line_cfg, rng)
    if n_lines > len(sampler.catalog):
        raise ValueError(f"{size_setting} orders need >= {n_lines} SKUs in the catalog")
    lines = {}
    while len(lines) < n_lines:
        sku = sampler.draw(rng)
        if sku.id not in lines:
            lines[sku.id] = _truncated_normal_int(*unit_cfg, rng)
    priority = rng.random() < PRIORITY_SHARE
    return PickOrder(oid, lines, now, priority)


def generate_replenishment_order(oid, seq_index, return_share, sampler, rng):
    sku = sampler.draw(rng)
    if return_share > 0 and rng.random() < return_share:
        units = 1       # return orders restock a single unit
    else:
        units = rng.randint(4, 12)
    return ReplenishmentOrder(oid, sku.id, units, seq_index)


class GenerationPauses:
    """Hysteresis control of order generation by storage-space utilization."""

    REPL_STOP = 0.85
    REPL_START = 0.65
    PICK_STOP = 0.10
    PICK_START = 0.60

    def __init__(self):
        self.pick_paused = False
        self.repl_paused = False

    def update(self, utilization):
        """Returns (pick_changed, repl_changed)."""
        pick0, repl0 = self.pick_paused, self.repl_paused
        if self.repl_paused:
            if utilization < self.REPL_START:
                self.repl_paused = False
        elif utilization > self.REPL_STOP:
            self.repl_paused = True
        if self.pick_paused:
            if utilization > self.PICK_START:
                self.pick_paused = False
        elif utilization < self.PICK_STOP:
            self.pick_paused = True
        return self.pick_paused != pick0, self.repl_paused != repl0


class Backlog:
    """Constant-size order pools; removal triggers an immediate refill."""

    def __init__(self, size_setting, return_share, sampler, rng, target=200):
        self.sampler = sampler
        self.rng = rng
        self.size_setting = size_setting
        self.return_share = return_share
        self.target = target
        self.pick_orders = []
        self.repl_orders = []       # consumed strictly head-first
        self.pauses = GenerationPauses()
        self._next_id = 0
        self._next_seq = 0
        self.on_generate = None     # callback(kind) for tracing

    def _new_id(self):
        self._next_id += 1
        return self._next_id

    def fill(self, now):
        while len(self.pick_orders) < self.target and not self.pauses.pick_paused:
            self.pick_orders.append(generate_pick_order(
                self._new_id(), self.size_setting, self.sampler, self.rng, now))
            if self.on_generate:
                self.on_generate("pick")
        while len(self.repl_orders) < self.target and not self.pauses.repl_paused:
            self._next_seq += 1
            self.repl_orders.append(generate_replenishment_order(
                self._new_id(), self._next_seq, self.return_share, self.sampler, self.rng))
            if self.on_generate:
                self.on_generate("replenishment")

    def take_pick(self, order, now):
        self.pick_orders.remove(order)
        order.state = BacklogState.ASSIGNED
        order.station_assign_time = now
        self.fill(now)
        return order

    def repl_head(self):
        return self.repl_orders[0] if self.repl_orders else None

    def take_repl_head(self, now):
        order = self.repl_orders.pop(0)
        order.state = BacklogState.ASSIGNED
        self.fill(now)
        return order

    def update_pauses(self, utilization, now):
        changed = self.pauses.update(utilization)
        if not self.pauses.pick_paused or not self.pauses.repl_paused:
            self.fill(now)
        return changed
