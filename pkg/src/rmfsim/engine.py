"""The warehouse simulation: agents, request lifecycle, and the run driver.

One `Simulation` owns one seeded run: it builds the layout, fills the initial
inventory, keeps both order backlogs at their constant size, triggers the
five decision rules at their events (order completion, replenishment arrival,
robot task requests, pod departures), moves robots through the reservation
table, and accumulates the performance measures.
"""

import hashlib
import random
from dataclasses import dataclass

from . import dispatch, rules
from .dispatch import ExtractionTask, InsertionBatch, StationQueue, allocate_robots
from .events import EventLoop
from .inventory import Pod, StockLedger, build_catalog, generate_initial_inventory
from .kinematics import DEFAULT_PARAMS, run_time
from .layout import LayoutConfig, build_layout
from .metrics import (MetricsRecord, RunCounters, UpperBoundTimes, compute_metrics,
                      upper_bound)
from .motion import NoPathError, ReservationTable, RobotAgent, time_field
from .orders import Backlog, SkuSampler
from .rules import ReplenishmentPodSelector, RuleConfiguration

T_PICK = 8.0      # robot occupied per picked unit
T_HANDLE = 15.0   # full handling of one unit at a pick station
T_PUT = 20.0      # putting one replenishment order on a pod

PICK_STATION_CAPACITY = 8
POD_CAPACITY = 500
INITIAL_UTILIZATION = 0.70


class SimulationAborted(RuntimeError):
    pass


@dataclass(frozen=True)
class RunConfig:
    """Everything a seeded run depends on."""
    rc: RuleConfiguration
    pick_stations: int = 2
    robots_per_station: int = 4       # fleet size = pick_stations * robots_per_station
    repl_stations: int = 1
    sku_count: int = 100
    return_share: float = 0.0
    order_size: str = "Mixed"
    pod_count: int = 40
    storage_locations: int = 48
    aisles: int = 4
    cross_aisles: int = 5
    band_width: int = 0
    buffer_depth: int = 4
    backlog_size: int = 200
    horizon: float = 2 * 3600.0
    seed: int = 1
    repetition: int = 0
    debug_checks: bool = False
    trace_path: str = None

    @property
    def robot_count(self):
        return self.pick_stations * self.robots_per_station

    def layout_config(self):
        return LayoutConfig(
            blocks=(self.cross_aisles - 1, self.aisles - 1),
            aisles=self.aisles, cross_aisles=self.cross_aisles,
            storage_location_count=self.storage_locations,
            pod_count=self.pod_count,
            pick_station_count=self.pick_stations,
            replenishment_station_count=self.repl_stations,
            buffer_depth=self.buffer_depth,
            band_width=self.band_width,
            min_dwell_points=max(4, self.robot_count))


class PickStation:
    def __init__(self, sim, geom):
        self.sim = sim
        self.geom = geom
        self.id = geom.id
        self.capacity = PICK_STATION_CAPACITY
        self.orders = []                 # normal slots
        self.fast_lane_order = None
        self.inbound = {}                # pod id -> ExtractionTask
        self.inbound_reserved = {}       # (order id, sku id) -> units
        self.queue = StationQueue(geom)
        self.current = None              # (robot, pod, task) while a pod is at access
        self.busy_seconds = 0.0
        self.picker_free_at = 0.0        # handling is serialized per station
        self.pick_retry_pending = False
        self.active = True

    @property
    def normal_capacity(self):
        return self.capacity - 1 if self.sim.cfg.rc.poa == "FastLane" else self.capacity

    def all_orders(self):
        if self.fast_lane_order is not None:
            return self.orders + [self.fast_lane_order]
        return list(self.orders)

    def inbound_pods(self):
        pods = [t.pod for t in self.inbound.values()]
        if self.current is not None and self.current[1] not in pods:
            pods.append(self.current[1])
        return pods

    def net_open_demand(self):
        """sku -> station demand net of units already reserved on inbound pods."""
        out = {}
        for order in self.all_orders():
            for sku, rem in order.remaining.items():
                net = rem - self.inbound_reserved.get((order.id, sku), 0)
                if net > 0:
                    out[sku] = out.get(sku, 0) + net
        return out

    def net_demand_of(self, order):
        return {sku: rem - self.inbound_reserved.get((order.id, sku), 0)
                for sku, rem in order.remaining.items()}


class ReplStation:
    def __init__(self, sim, geom):
        self.sim = sim
        self.geom = geom
        self.id = geom.id
        self.capacity_slots = 2 * POD_CAPACITY
        self.used_slots = 0
        self.batches = {}                # pod id -> open InsertionBatch
        self.pending = []                # batches awaiting a robot
        self.queue = StationQueue(geom)
        self.current = None
        self.active = True

    @property
    def free_capacity_slots(self):
        return self.capacity_slots - self.used_slots


class Simulation:
    def __init__(self, cfg: RunConfig):
        self.cfg = cfg
        self.loop = EventLoop()
        self.loop.trace = self._trace
        self._hash = hashlib.sha256()
        self._trace_file = open(cfg.trace_path, "w") if cfg.trace_path else None
        self.failure = None

        seed = cfg.seed
        self.init_rng = random.Random(f"{seed}:init")
        self.order_rng = random.Random(f"{seed}:orders")
        self.tie_rng = random.Random(f"{seed}:ties")

        self.graph = build_layout(cfg.layout_config())
        self.tf = time_field(self.graph)
        self.reservations = ReservationTable()

        self.catalog = build_catalog(cfg.sku_count, self.init_rng)
        self.cat_map = {s.id: s for s in self.catalog}
        self.sampler = SkuSampler(self.catalog)

        self._build_pods()
        self.ledger = StockLedger(self.catalog, self.pods)
        self.rps = ReplenishmentPodSelector(cfg.rc.rps, self.tie_rng)
        self._fill_initial_inventory()

        self.backlog = Backlog(cfg.order_size, cfg.return_share, self.sampler,
                               self.order_rng, target=cfg.backlog_size)
        self.backlog.fill(0.0)

        self.pick_stations = [PickStation(self, g) for g in self.graph.pick_stations]
        self.repl_stations = [ReplStation(self, g) for g in self.graph.repl_stations]
        self.counters = RunCounters()
        self._station_by_cell = {}
        for st in self.pick_stations + self.repl_stations:
            for c in st.geom.queue:
                self._station_by_cell[c] = st

        self._psa_location_class = None
        self._psa_station_time = None

        self._build_robots()
        self.dwell_claims = {}
        self._pending_repl_scan = False

        # initial decisions: fill pick stations round-robin, bind the
        # replenishment heads, then put every robot to work
        for _ in range(max(s.normal_capacity for s in self.pick_stations)):
            for st in self.pick_stations:
                if len(st.orders) < st.normal_capacity:
                    self._assign_pick_order(st)
        for st in self.pick_stations:
            self._fast_lane_refresh(st)
        self._process_repl_queue()
        self._update_activity(reallocate=False)
        self._reallocate()
        for robot in self.robots:
            self.next_task(robot)
        if cfg.debug_checks:
            self._debug_baseline = dict(self.ledger.availability)
            self._debug_put = {}
            self._debug_picked = {}
            self.loop.schedule(60.0, "utilization-check", self._debug_sweep)

    # ------------------------------------------------------------ construction

    def _build_pods(self):
        cfg = self.cfg
        cells = self.graph.storage_cells
        n = cfg.pod_count
        self.pods = []
        self.loc_state = {}
        for i in range(n):
            home = cells[(i * len(cells)) // n]
            class_idx = 0 if i < 0.1 * n else (1 if i < 0.3 * n else 2)
            pod = Pod(i, POD_CAPACITY, self.cat_map, class_idx=class_idx, home=home)
            pod.location = home
            self.pods.append(pod)
            self.loc_state[home] = pod.id

    def _fill_initial_inventory(self):
        rng = self.init_rng

        def draw():
            from .orders import generate_replenishment_order
            o = generate_replenishment_order(0, 0, self.cfg.return_share,
                                             self.sampler, rng)
            return o.sku_id, o.units

        def place(sku_id, units):
            need = units * self.cat_map[sku_id].unit_size
            cands = [p for p in self.pods if p.free_slots >= need]
            if not cands:
                return None
            return self.rps.select(
                None, cands, needed_slots=need,
                sku_class=self.cat_map[sku_id].class_idx,
                station_time=self._repl_station_time_fn(None),
                total_demand={})

        generate_initial_inventory(self.ledger, INITIAL_UTILIZATION, place, draw)
        self.rps.reset()

    def _build_robots(self):
        def fail(robot, exc):
            self.abort(exc)

        self.robots = []
        dwell = list(self.graph.dwell_cells)
        for i in range(self.cfg.robot_count):
            cell = dwell[i % len(dwell)]
            bot = RobotAgent(i, self.graph, self.reservations, self.loop, cell,
                             heading=1, on_fail=fail)
            bot.parked = True
            bot.wake_pending = False
            bot.assigned_station = None
            self.robots.append(bot)

    # ------------------------------------------------------------------ events

    def _trace(self, time, kind, detail):
        self._hash.update(f"{time!r}|{kind}|{detail}\n".encode())
        if self._trace_file is not None:
            self._trace_file.write(f"{time:.3f} {kind} {detail}\n")

    def abort(self, exc):
        self.failure = exc
        raise SimulationAborted(str(exc)) from exc

    def trace_hash(self):
        return self._hash.hexdigest()

    # ------------------------------------------------------- decision triggers

    def _assign_pick_order(self, st):
        if not self.backlog.pick_orders or len(st.orders) >= st.normal_capacity:
            return None
        order = rules.poa_select(self.cfg.rc.poa, self.backlog.pick_orders,
                                 st.all_orders(), st.inbound_pods(), self.tie_rng)
        if order is None:
            return None
        self.backlog.take_pick(order, self.loop.now)
        st.orders.append(order)
        self.loop.schedule(0.0, "order-arrival", lambda: None,
                           detail=f"pick o{order.id} s{st.id}")
        self._fast_lane_refresh(st)
        self._wake_station_robots(st)
        return order

    def _fast_lane_refresh(self, st):
        if self.cfg.rc.poa != "FastLane" or st.fast_lane_order is not None:
            return
        pod = self._next_pod(st)
        order = rules.fast_lane_select(self.backlog.pick_orders, pod, self.tie_rng)
        if order is None:
            return
        self.backlog.take_pick(order, self.loop.now)
        st.fast_lane_order = order
        self.loop.schedule(0.0, "order-arrival", lambda: None,
                           detail=f"fastlane o{order.id} s{st.id}")
        self._wake_station_robots(st)

    def _next_pod(self, st):
        """The pod the picker will see next: in-process first, then the queue,
        then the inbound task with the shortest remaining path."""
        if st.current is not None:
            return st.current[1]
        for cell in reversed(st.queue.cells):
            robot = st.queue.claims.get(cell)
            if robot is not None and robot.carrying is not None and robot.cell == cell:
                return self.pods[robot.carrying]
        best, best_t = None, None
        fld = self.tf.to_goal(st.geom.access, True)
        for task in st.inbound.values():
            bot = task.robot
            if bot is None:
                continue
            t = fld.get(bot.cell, float("inf"))
            if bot.carrying is None and task.pod.location is not None:
                t = fld.get(task.pod.location, float("inf"))
            if best_t is None or t < best_t:
                best, best_t = task.pod, t
        return best

    def _process_repl_queue(self):
        cfg = self.cfg
        while True:
            order = self.backlog.repl_head()
            if order is None:
                break
            sku = self.cat_map[order.sku_id]
            volume = order.units * sku.unit_size
            active = [s for s in self.repl_stations if s.active]
            if cfg.rc.roa == "Random":
                station = rules.roa_select("Random", volume, active, None, self.tie_rng)
                if station is None:
                    break
                pod = self._rps_pick_pod(order, volume, station)
                if pod is None:
                    break
            else:
                pod = self._rps_pick_pod(order, volume, None)
                if pod is None:
                    break
                bound = None
                if isinstance(pod.claim, InsertionBatch) and pod.claim.open_for_orders:
                    bound = pod.claim.station
                station = rules.roa_select("PodBatch", volume, active, bound, self.tie_rng)
                if station is None:
                    break
            self.backlog.take_repl_head(self.loop.now)
            handle = self.ledger.reserve_replenishment_space(pod, order.sku_id,
                                                             order.units)
            station.used_slots += volume
            order.station = station
            order.pod = pod
            batch = station.batches.get(pod.id)
            if batch is None or not batch.open_for_orders:
                batch = InsertionBatch(pod, station)
                pod.claim = batch
                station.batches[pod.id] = batch
                station.pending.append(batch)
            batch.add(order, handle)
            self.loop.schedule(0.0, "order-arrival", lambda: None,
                               detail=f"repl o{order.id} s{station.id} p{pod.id}")
            self._wake_station_robots(station)
        self._update_activity()

    def _repl_station_time_fn(self, station):
        """station-to-pod path times for the Nearest replenishment rule."""
        if station is not None:
            fld = self.tf.from_origin(station.geom.access, False)
        else:
            fields = [self.tf.from_origin(g.access, False)
                      for g in self.graph.repl_stations]

            def multi(loc):
                if loc is None:
                    return 0.0
                return min(f.get(loc, float("inf")) for f in fields)

            return multi

        def single(loc):
            if loc is None:
                return 0.0      # already heading to the station
            return fld.get(loc, float("inf"))

        return single

    def _rps_pick_pod(self, order, volume, station):
        sku = self.cat_map[order.sku_id]
        cands = []
        for pod in self.pods:
            if pod.free_slots < volume:
                continue
            if pod.claim is None and pod.location is not None:
                cands.append(pod)
            elif isinstance(pod.claim, InsertionBatch) and pod.claim.open_for_orders:
                if station is None or pod.claim.station is station:
                    cands.append(pod)
        if not cands:
            return None
        total_demand = None
        if self.cfg.rc.rps == "LeastDemand":
            total_demand = {}
            for o in self.backlog.pick_orders:
                for sid, rem in o.remaining.items():
                    if rem > 0:
                        total_demand[sid] = total_demand.get(sid, 0) + rem
            for st in self.pick_stations:
                for o in st.all_orders():
                    for sid, rem in o.remaining.items():
                        if rem > 0:
                            total_demand[sid] = total_demand.get(sid, 0) + rem
        return self.rps.select(order, cands, needed_slots=volume,
                               sku_class=sku.class_idx,
                               station_time=self._repl_station_time_fn(station),
                               total_demand=total_demand)

    # --------------------------------------------------------------- dispatch

    def next_task(self, robot):
        if self.failure is not None:
            return
        st = robot.assigned_station
        if isinstance(st, PickStation) and st.active:
            if self._start_extraction(st, robot):
                return
        elif isinstance(st, ReplStation) and st.active:
            if self._start_insertion(st, robot):
                return
        self._park(robot)

    def _start_extraction(self, st, robot):
        demand = st.net_open_demand()
        if not demand:
            return False
        cands = []
        for pod in self.pods:
            if pod.claim is not None or pod.location is None:
                continue
            for sku, net in demand.items():
                if net > 0 and pod.available(sku) > 0:
                    cands.append(pod)
                    break
        if not cands:
            return False
        net_map = {o.id: st.net_demand_of(o) for o in st.all_orders()}
        fld = self.tf.to_goal(st.geom.access, True)
        pod = rules.pps_select(
            self.cfg.rc.pps, cands, st, self.backlog.pick_orders, self.loop.now,
            self.tie_rng, path_time=lambda loc: fld.get(loc, float("inf")),
            demand_of=lambda o: net_map[o.id])
        if pod is None:
            return False
        task = ExtractionTask(pod, st, robot)
        pod.claim = task
        st.inbound[pod.id] = task
        for order in st.all_orders():
            for sku in sorted(order.remaining):
                net = order.remaining[sku] - st.inbound_reserved.get((order.id, sku), 0)
                q = min(pod.available(sku), net)
                if q > 0:
                    handle = self.ledger.reserve_pick(pod, sku, q)
                    task.reservations.append((order, sku, handle))
                    key = (order.id, sku)
                    st.inbound_reserved[key] = st.inbound_reserved.get(key, 0) + q
        assert task.reservations, "PPS candidate offered nothing pickable"
        self._fast_lane_refresh(st)
        self._fetch_and_queue(robot, pod, st, self._pick_pod_ready)
        return True

    def _start_insertion(self, st, robot):
        while st.pending:
            batch = st.pending.pop(0)
            if batch.state == InsertionBatch.PENDING and batch.puts:
                break
        else:
            return False
        batch.state = InsertionBatch.FETCHING
        batch.robot = robot
        self._fetch_and_queue(robot, batch.pod, st, self._repl_pod_ready,
                              batch=batch)
        return True

    def _fetch_and_queue(self, robot, pod, st, ready, batch=None):
        self._release_dwell(robot)
        robot.parked = False

        def at_access(r):
            ready(st, r, pod, batch)

        def queue_up():
            st.queue.join(robot, at_access)

        def lifted():
            # the storage cell frees the moment the pod is off the ground
            if pod.location is not None:
                self.loc_state.pop(pod.location, None)
                pod.location = None
            robot.drive(st.queue.entry, queue_up)

        def at_pod():
            robot.lift(pod.id, lifted)

        robot.drive(pod.location, at_pod)

    # ------------------------------------------------------------ pick station

    def _pick_pod_ready(self, st, robot, pod, batch):
        self.counters.pick_pod_visits += 1
        task = st.inbound.get(pod.id)
        if task is not None:
            task.cancel_reservations(st)
        st.current = (robot, pod, task)
        self._fast_lane_refresh(st)
        self.loop.schedule(0.0, "pick-done", lambda: self._start_next_pick(st),
                           detail=f"visit p{pod.id} s{st.id}")

    def _choose_pick(self, st, pod):
        for order in st.all_orders():
            for sku in sorted(order.remaining):
                if order.remaining[sku] > 0 and pod.available(sku) > 0:
                    return order, sku
        return None

    def _start_next_pick(self, st):
        if st.current is None:
            return
        robot, pod, task = st.current
        pick = self._choose_pick(st, pod)
        if pick is None:
            self._end_pick_visit(st)
            return
        now = self.loop.now
        if now < st.picker_free_at - 1e-9:
            # the picker is still handling a unit from the previous pod
            if not st.pick_retry_pending:
                st.pick_retry_pending = True

                def retry():
                    st.pick_retry_pending = False
                    self._start_next_pick(st)

                self.loop.schedule(st.picker_free_at - now, "pick-done", retry,
                                   detail=f"picker-wait s{st.id}")
            return
        order, sku = pick
        self.ledger.reserve_pick(pod, sku, 1).commit()
        order.remaining[sku] -= 1
        order.outstanding_handlings += 1
        self.counters.units_picked += 1
        if self.cfg.debug_checks:
            self._debug_picked[sku] = self._debug_picked.get(sku, 0) + 1
        st.picker_free_at = self.loop.now + T_HANDLE
        st.busy_seconds += min(T_HANDLE, max(0.0, self.cfg.horizon - self.loop.now))
        self._after_inventory_change()
        self.loop.schedule(T_PICK, "pick-done",
                           lambda: self._release_check(st),
                           detail=f"pick o{order.id} k{sku} s{st.id}")
        self.loop.schedule(T_HANDLE, "pick-done",
                           lambda: self._handling_done(st, order),
                           detail=f"handled o{order.id} s{st.id}")

    def _release_check(self, st):
        if st.current is None:
            return
        _, pod, _ = st.current
        if self._choose_pick(st, pod) is None:
            self._end_pick_visit(st)

    def _handling_done(self, st, order):
        order.outstanding_handlings -= 1
        if order.fully_picked() and order.outstanding_handlings == 0:
            self._complete_order(st, order)
        if st.current is not None:
            self._start_next_pick(st)

    def _complete_order(self, st, order):
        now = self.loop.now
        order.completion_time = now
        order.state = "complete"
        c = self.counters
        c.orders_completed += 1
        c.turnover_sum += now - order.submit_time
        c.offset_sum += now - order.due_time
        if now > order.due_time:
            c.late_orders += 1
        if order is st.fast_lane_order:
            st.fast_lane_order = None
            self._fast_lane_refresh(st)
        else:
            st.orders.remove(order)
            self._assign_pick_order(st)
        self._update_activity()

    def _end_pick_visit(self, st):
        robot, pod, task = st.current
        st.current = None
        st.inbound.pop(pod.id, None)
        pod.claim = None
        st.queue.leave(robot)
        self._fast_lane_refresh(st)
        self._return_pod(robot, pod)

    # ---------------------------------------------------- replenishment station

    def _repl_pod_ready(self, st, robot, pod, batch):
        self.counters.repl_pod_visits += 1
        batch.state = InsertionBatch.AT_STATION
        st.current = (robot, pod, batch)
        self._start_next_put(st, batch)

    def _start_next_put(self, st, batch):
        if not batch.puts:
            self._end_repl_visit(st, batch)
            return
        order, handle = batch.puts[0]
        self.loop.schedule(T_PUT, "put-done",
                           lambda: self._put_done(st, batch, order, handle),
                           detail=f"put o{order.id} p{batch.pod.id} s{st.id}")

    def _put_done(self, st, batch, order, handle):
        batch.puts.popleft()
        handle.commit()
        st.used_slots -= order.units * self.cat_map[order.sku_id].unit_size
        order.state = "stored"
        if self.cfg.debug_checks:
            self._debug_put[order.sku_id] = self._debug_put.get(order.sku_id, 0) \
                + order.units
        self._after_inventory_change()
        self._start_next_put(st, batch)

    def _end_repl_visit(self, st, batch):
        robot, pod, _ = st.current
        st.current = None
        batch.state = InsertionBatch.CLOSED
        st.batches.pop(pod.id, None)
        pod.claim = None
        self.rps.release(pod)
        st.queue.leave(robot)
        self._return_pod(robot, pod)

    # ------------------------------------------------------------- pod returns

    def _return_pod(self, robot, pod):
        target = self._psa_target(robot, pod)
        if target is None:
            self.abort(NoPathError("no free storage location for a returning pod"))
            return
        self.loc_state[target] = ("inbound", pod.id)

        def stored():
            self.loc_state[target] = pod.id
            pod.location = target
            self.loop.schedule(0.0, "robot-leg-done", lambda: None,
                               detail=f"stored p{pod.id} at {target}")
            self._schedule_repl_scan()
            for st in self.pick_stations:
                self._wake_station_robots(st)
            self.next_task(robot)

        def at_target():
            robot.set_down(stored)

        robot.drive(target, at_target)

    def _psa_target(self, robot, pod):
        rule = self.cfg.rc.psa
        if rule == "Fixed":
            return pod.home
        free = [c for c in self.graph.storage_cells if c not in self.loc_state]
        if not free:
            return None
        from_robot = None
        if rule in ("Nearest", "Class"):
            fld = self.tf.from_origin(robot.cell, True)
            from_robot = lambda c: fld.get(c, float("inf"))
        return rules.psa_select(rule, pod, free, self.tie_rng,
                                from_robot=from_robot,
                                to_pick_station=self._psa_station_time_fn(),
                                location_class=self._psa_location_class_fn())

    def _psa_station_time_fn(self):
        if self._psa_station_time is None:
            fields = [self.tf.to_goal(g.access, True) for g in self.graph.pick_stations]
            self._psa_station_time = {
                c: min(f.get(c, float("inf")) for f in fields)
                for c in self.graph.storage_cells}
        return lambda c: self._psa_station_time[c]

    def _psa_location_class_fn(self):
        if self._psa_location_class is None:
            t = self._psa_station_time_fn()
            ranked = sorted(self.graph.storage_cells, key=lambda c: (t(c), c))
            n = len(ranked)
            self._psa_location_class = {}
            for i, c in enumerate(ranked):
                self._psa_location_class[c] = 0 if i < 0.1 * n else (1 if i < 0.3 * n else 2)
        return lambda c: self._psa_location_class[c]

    # ------------------------------------------------------------ idle robots

    def _park(self, robot):
        robot.parked = True
        if robot.cell in self.graph.dwell_cells and \
                self.dwell_claims.get(robot.cell) in (None, robot.id):
            self.dwell_claims[robot.cell] = robot.id
            return
        free = [c for c in self.graph.dwell_cells if c not in self.dwell_claims]
        if not free:
            return      # stay put; reservations keep the spot safe
        x, y = self.graph.xy[robot.cell]
        target = min(free, key=lambda c: (abs(self.graph.xy[c][0] - x)
                                          + abs(self.graph.xy[c][1] - y), c))
        self.dwell_claims[target] = robot.id
        robot.parked = False

        def parked():
            robot.parked = True
            if not robot.wake_pending:
                self.next_task(robot)   # state may have changed while driving

        robot.drive(target, parked)

    def _release_dwell(self, robot):
        for cell, rid in list(self.dwell_claims.items()):
            if rid == robot.id:
                del self.dwell_claims[cell]

    def _wake_station_robots(self, st):
        for robot in self.robots:
            if robot.assigned_station is st and robot.parked and not robot.wake_pending:
                self._schedule_wake(robot)

    def _schedule_wake(self, robot):
        robot.wake_pending = True

        def fire():
            robot.wake_pending = False
            if robot.parked and self.failure is None:
                self.next_task(robot)

        self.loop.schedule(0.0, "replan", fire, detail=f"wake r{robot.id}")

    def _schedule_repl_scan(self):
        if self._pending_repl_scan:
            return
        self._pending_repl_scan = True

        def fire():
            self._pending_repl_scan = False
            self._process_repl_queue()

        self.loop.schedule(0.0, "order-arrival", fire, detail="repl-scan")

    # ------------------------------------------------------- activity/pauses

    def _after_inventory_change(self):
        self._schedule_repl_scan()
        changed = self.backlog.update_pauses(self.ledger.storage_space_utilization,
                                             self.loop.now)
        if any(changed):
            self.loop.schedule(0.0, "utilization-check", lambda: None,
                               detail=f"pauses {self.backlog.pauses.pick_paused}"
                                      f"/{self.backlog.pauses.repl_paused}")
            self._update_activity()

    def _update_activity(self, reallocate=True):
        changed = False
        for st in self.pick_stations:
            active = bool(st.all_orders()) or bool(self.backlog.pick_orders)
            if active != st.active:
                st.active = active
                changed = True
        for st in self.repl_stations:
            active = bool(st.batches) or bool(self.backlog.repl_orders)
            if active != st.active:
                st.active = active
                changed = True
        if changed and reallocate:
            self._reallocate()

    def _reallocate(self):
        alloc = allocate_robots(self.robots, self.pick_stations, self.repl_stations)
        for robot, st in alloc.items():
            if robot.assigned_station is not st:
                robot.assigned_station = st
                if robot.parked and not robot.wake_pending:
                    self._schedule_wake(robot)

    # ------------------------------------------------------------------ debug

    def _debug_sweep(self):
        conflicts = self.reservations.occupancy_conflicts()
        assert not conflicts, f"reservation overlap: {conflicts[:3]}"
        resting = [r.cell for r in self.robots if not r._busy]
        assert len(resting) == len(set(resting)), "two robots share a cell"
        if int(self.loop.now) % 3600 == 0 and self.loop.now > 0:
            self.ledger.check_invariants()
            for sku in self.ledger.availability:
                expected = self._debug_baseline.get(sku, 0) \
                    + self._debug_put.get(sku, 0) - self._debug_picked.get(sku, 0)
                assert self.ledger.availability[sku] == expected, \
                    f"conservation broken for sku {sku}"
        self.reservations.prune(self.loop.now - 120.0)
        self.loop.schedule(60.0, "utilization-check", self._debug_sweep)

    # -------------------------------------------------------------------- run

    def upper_bound_times(self):
        return UpperBoundTimes(
            t_pick=T_PICK, t_handle=T_HANDLE,
            t_drive_in=run_time(1), t_turn_out=DEFAULT_PARAMS.full_turn_time / 4,
            t_drive_out=run_time(1), ipo=1.0,
            pick_station_count=self.cfg.pick_stations)

    def run(self):
        cfg = self.cfg
        status = "ok"
        try:
            self.loop.run_until(cfg.horizon)
        except SimulationAborted as exc:
            status = f"failed: {exc}"
        finally:
            if self._trace_file is not None:
                self._trace_file.close()
        self.counters.robot_distances = tuple(r.distance_traveled for r in self.robots)
        self.counters.station_busy = tuple(
            min(s.busy_seconds, cfg.horizon) for s in self.pick_stations)
        times = self.upper_bound_times()
        bound = upper_bound(times)
        if times.t_pick + times.move_up > times.t_handle:
            measured = (self.counters.units_picked / self.counters.pick_pod_visits
                        if self.counters.pick_pod_visits else 1.0)
            bound = upper_bound(
                UpperBoundTimes(times.t_pick, times.t_handle, times.t_drive_in,
                                times.t_turn_out, times.t_drive_out,
                                max(1.0, measured), times.pick_station_count))
        rec = compute_metrics(self.counters, cfg.horizon, bound)
        rec.poa, rec.roa, rec.pps, rec.rps, rec.psa = cfg.rc.as_tuple()
        rec.pick_stations = cfg.pick_stations
        rec.robots_per_station = cfg.robots_per_station
        rec.sku_count = cfg.sku_count
        rec.return_share = cfg.return_share
        rec.order_size = cfg.order_size
        rec.seed = cfg.seed
        rec.status = status
        rec.trace_hash = self.trace_hash()
        return rec


def run(config: RunConfig) -> MetricsRecord:
    """Simulate one seeded run and return its metrics record."""
    return Simulation(config).run()
