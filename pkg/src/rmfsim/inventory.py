"""SKU catalog, pods, and the stock ledger with pick/put reservations.

Every inventory unit on every pod is tracked by per-SKU counts. Reservations
protect units promised to assigned picks (reserved_out) and slot space
promised to incoming replenishment orders (reserved_in) so that concurrent
decisions never promise the same physical unit or slot twice.
"""

from dataclasses import dataclass, field


class ReservationError(ValueError):
    """Requested units or space are not available unreserved."""


@dataclass(frozen=True)
class Sku:
    id: int
    unit_size: int          # slots per unit, drawn from U{2..8}
    weight: float           # popularity, drawn from Exp(lambda=1/2)
    class_idx: int = 0

    def __post_init__(self):
        if self.weight < 0:
            raise ValueError("popularity weight must be nonnegative")
        if self.unit_size < 1:
            raise ValueError("unit size must be positive")


def build_catalog(count, rng, size_bounds=(2, 8), popularity_lambda=0.5, class_cuts=(0.1, 0.3)):
    """Draw a SKU catalog; classes cut the popularity ranking at cumulative
    weight shares (hottest SKUs in class 0)."""
    weights = [rng.expovariate(popularity_lambda) for _ in range(count)]
    sizes = [rng.randint(*size_bounds) for _ in range(count)]
    order = sorted(range(count), key=lambda i: -weights[i])
    total = sum(weights)
    classes = [len(class_cuts)] * count
    acc = 0.0
    for rank, i in enumerate(order):
        acc += weights[i]
        for ci, cut in enumerate(class_cuts):
            if acc <= cut * total + 1e-12:
                classes[i] = ci
                break
    return [Sku(i, sizes[i], weights[i], classes[i]) for i in range(count)]


class Pod:
    """Movable shelf with per-SKU unit counts, capacity in slots."""

    def __init__(self, pid, capacity_slots, catalog, class_idx=0, home=None):
        self.id = pid
        self.capacity_slots = capacity_slots
        self.catalog = catalog            # sku id -> Sku
        self.contents = {}                # sku id -> available units
        self.reserved_out = {}            # sku id -> units promised to picks
        self.reserved_in_slots = 0        # slots promised to replenishments
        self.occupied_slots = 0
        self.location = None              # waypoint id, or None while in transit
        self.class_idx = class_idx
        self.home = home                  # initial storage cell (Fixed rule)
        self.claim = None                 # task currently owning the pod

    def available(self, sku_id):
        return self.contents.get(sku_id, 0) - self.reserved_out.get(sku_id, 0)

    @property
    def free_slots(self):
        return self.capacity_slots - self.occupied_slots - self.reserved_in_slots

    def _check(self):
        assert self.occupied_slots + self.reserved_in_slots <= self.capacity_slots
        assert all(v >= 0 for v in self.contents.values())
        assert all(self.reserved_out.get(k, 0) <= self.contents.get(k, 0)
                   for k in self.reserved_out)


class PickReservation:
    def __init__(self, ledger, pod, sku_id, units):
        self.ledger = ledger
        self.pod = pod
        self.sku_id = sku_id
        self.units = units
        self.open = True

    def commit(self, units=None):
        """Consume reserved units (physical pick). Partial commits allowed."""
        n = self.units if units is None else units
        if not self.open or n > self.units:
            raise ReservationError("commit exceeds reservation")
        self.pod.reserved_out[self.sku_id] -= n
        self.units -= n
        self.ledger._remove_units(self.pod, self.sku_id, n)
        if self.units == 0:
            self.open = False

    def cancel(self):
        if self.open:
            self.pod.reserved_out[self.sku_id] -= self.units
            self.units = 0
            self.open = False


class SpaceReservation:
    def __init__(self, ledger, pod, sku_id, units, slots):
        self.ledger = ledger
        self.pod = pod
        self.sku_id = sku_id
        self.units = units
        self.slots = slots
        self.open = True

    def commit(self):
        """Convert reserved space into stored units (put completed)."""
        if not self.open:
            raise ReservationError("reservation already settled")
        self.pod.reserved_in_slots -= self.slots
        self.open = False
        self.ledger._add_units(self.pod, self.sku_id, self.units, self.slots)

    def cancel(self):
        if self.open:
            self.pod.reserved_in_slots -= self.slots
            self.open = False


class StockLedger:
    """All pods plus aggregate availability and storage-space utilization."""

    def __init__(self, catalog, pods):
        self.catalog = {s.id: s for s in catalog}
        self.pods = {p.id: p for p in pods}
        self.total_slots = sum(p.capacity_slots for p in pods)
        self.occupied_slots = 0
        self.availability = {}            # sku id -> total unreserved-agnostic units
        self.on_change = None             # callback() after every mutation

    @property
    def storage_space_utilization(self):
        if self.total_slots == 0:
            return 0.0
        return self.occupied_slots / self.total_slots

    def reserve_pick(self, pod, sku_id, units):
        if units < 1:
            raise ReservationError("must reserve at least one unit")
        if pod.available(sku_id) < units:
            raise ReservationError(
                f"pod {pod.id}: {pod.available(sku_id)} unreserved units of "
                f"sku {sku_id}, wanted {units}")
        pod.reserved_out[sku_id] = pod.reserved_out.get(sku_id, 0) + units
        return PickReservation(self, pod, sku_id, units)

    def reserve_replenishment_space(self, pod, sku_id, units):
        if units < 1:
            raise ReservationError("replenishment orders must carry units")
        slots = units * self.catalog[sku_id].unit_size
        if pod.free_slots < slots:
            raise ReservationError(
                f"pod {pod.id}: {pod.free_slots} free slots, wanted {slots}")
        pod.reserved_in_slots += slots
        return SpaceReservation(self, pod, sku_id, units, slots)

    def _add_units(self, pod, sku_id, units, slots):
        pod.contents[sku_id] = pod.contents.get(sku_id, 0) + units
        pod.occupied_slots += slots
        self.occupied_slots += slots
        self.availability[sku_id] = self.availability.get(sku_id, 0) + units
        if self.on_change:
            self.on_change()

    def _remove_units(self, pod, sku_id, units):
        if pod.contents.get(sku_id, 0) < units:
            raise ReservationError("pick exceeds pod contents")
        pod.contents[sku_id] -= units
        slots = units * self.catalog[sku_id].unit_size
        pod.occupied_slots -= slots
        self.occupied_slots -= slots
        self.availability[sku_id] -= units
        if self.on_change:
            self.on_change()

    def place_units(self, pod, sku_id, units):
        """Direct insertion bypassing the reservation cycle (initial fill)."""
        slots = units * self.catalog[sku_id].unit_size
        if pod.free_slots < slots:
            raise ReservationError("pod cannot host the units")
        self._add_units(pod, sku_id, units, slots)

    def check_invariants(self):
        occupied = 0
        totals = {}
        for p in self.pods.values():
            p._check()
            occupied += p.occupied_slots
            for k, v in p.contents.items():
                totals[k] = totals.get(k, 0) + v
        assert occupied == self.occupied_slots
        assert totals == {k: v for k, v in self.availability.items() if v}


def generate_initial_inventory(ledger, target_utilization, place_fn, draw_order_fn,
                               max_attempts=10000):
    """Fill empty pods to the target utilization.

    `draw_order_fn()` yields (sku_id, units) from the replenishment-order
    generator; `place_fn(sku_id, units)` applies the active replenishment
    pod-selection rule and returns a pod with sufficient space, or None.
    """
    if target_utilization <= 0:
        return
    attempts = 0
    while ledger.storage_space_utilization < target_utilization:
        sku_id, units = draw_order_fn()
        pod = place_fn(sku_id, units)
        if pod is None:
            attempts += 1
            if attempts > max_attempts:
                raise ReservationError("cannot reach target utilization")
            continue
        ledger.place_units(pod, sku_id, units)
