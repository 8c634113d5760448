"""Per-run performance measures, the analytical throughput ceiling, and
cross-run Pearson correlation."""

import math
from dataclasses import dataclass, fields


@dataclass(frozen=True)
class UpperBoundTimes:
    """Times feeding the unit-throughput ceiling (all seconds)."""
    t_pick: float = 8.0        # robot occupied per picked unit
    t_handle: float = 15.0     # full handling of one unit at the station
    t_drive_in: float = 0.0    # queue head advancing to the access point
    t_turn_out: float = 0.0    # turning toward the exit
    t_drive_out: float = 0.0   # clearing the access point
    ipo: float = 1.0           # estimated picks per pod visit
    pick_station_count: int = 1

    @property
    def move_up(self):
        return self.t_drive_in + self.t_turn_out + self.t_drive_out

    def validate(self):
        if min(self.t_pick, self.t_handle, self.t_drive_in, self.t_turn_out,
               self.t_drive_out) < 0:
            raise ValueError("times must be nonnegative")
        if self.ipo < 1:
            raise ValueError("picks per pod visit cannot be below 1")
        if self.pick_station_count < 1:
            raise ValueError("need at least one pick station")


def upper_bound(times: UpperBoundTimes) -> float:
    """Units/hour ceiling for the pick stations.

    When a released robot can be replaced before the picker finishes handling
    (t_pick + move_up <= t_handle) the picker is the bottleneck; otherwise
    every pod visit loses (t_pick + move_up - t_handle) once and the ceiling
    depends on the picks per visit.
    """
    times.validate()
    n = times.pick_station_count
    if times.t_pick + times.move_up <= times.t_handle:
        return n * 3600.0 / times.t_handle
    loss = times.t_pick + times.move_up - times.t_handle
    return n * times.ipo * 3600.0 / (loss + times.ipo * times.t_handle)


MEASURE_FIELDS = (
    "unit_throughput", "order_throughput", "order_turnover_time",
    "distance_traveled", "order_offset", "late_fraction", "pile_on",
    "station_idle_time", "unit_throughput_score",
)

RC_FIELDS = ("poa", "roa", "pps", "rps", "psa")
WS_FIELDS = ("pick_stations", "robots_per_station", "sku_count", "return_share",
             "order_size")
EXTRA_FIELDS = ("upper_bound", "pick_pod_visits", "repl_pod_visits", "status",
                "trace_hash")

CSV_COLUMNS = RC_FIELDS + WS_FIELDS + ("seed",) + MEASURE_FIELDS + EXTRA_FIELDS


@dataclass
class MetricsRecord:
    poa: str = ""
    roa: str = ""
    pps: str = ""
    rps: str = ""
    psa: str = ""
    pick_stations: int = 0
    robots_per_station: int = 0
    sku_count: int = 0
    return_share: float = 0.0
    order_size: str = ""
    seed: int = 0
    unit_throughput: float = 0.0       # units picked per hour
    order_throughput: float = 0.0      # pick orders completed per hour
    order_turnover_time: float = 0.0   # mean submit -> completion, s
    distance_traveled: float = 0.0     # mean meters per robot
    order_offset: float = 0.0          # mean completion - due, s (negative = early)
    late_fraction: float = 0.0
    pile_on: float = None              # units per pod visit; None if no visits
    station_idle_time: float = 0.0     # idle fraction averaged over pick stations
    unit_throughput_score: float = 0.0
    upper_bound: float = 0.0
    pick_pod_visits: int = 0
    repl_pod_visits: int = 0
    status: str = "ok"
    trace_hash: str = ""

    def csv_row(self):
        out = []
        for name in CSV_COLUMNS:
            v = getattr(self, name)
            out.append("" if v is None else repr(v) if isinstance(v, float) else str(v))
        return ",".join(out)

    @staticmethod
    def csv_header():
        return ",".join(CSV_COLUMNS)

    @staticmethod
    def from_csv_row(line):
        parts = line.rstrip("\n").split(",")
        if len(parts) != len(CSV_COLUMNS):
            raise ValueError(f"expected {len(CSV_COLUMNS)} columns, got {len(parts)}")
        kwargs = {}
        types = {f.name: f.type for f in fields(MetricsRecord)}
        for name, raw in zip(CSV_COLUMNS, parts):
            if raw == "":
                kwargs[name] = None
                continue
            t = types[name]
            if t is float or name in MEASURE_FIELDS + ("return_share", "upper_bound"):
                kwargs[name] = float(raw)
            elif t is int or name in ("seed", "pick_stations", "robots_per_station",
                                      "sku_count", "pick_pod_visits", "repl_pod_visits"):
                kwargs[name] = int(raw)
            else:
                kwargs[name] = raw
        return MetricsRecord(**kwargs)


@dataclass
class RunCounters:
    """Raw tallies accumulated over a run, the input to compute_metrics."""
    units_picked: int = 0
    orders_completed: int = 0
    turnover_sum: float = 0.0          # sum of completion - submit
    offset_sum: float = 0.0            # sum of completion - due
    late_orders: int = 0
    pick_pod_visits: int = 0
    repl_pod_visits: int = 0
    robot_distances: tuple = ()        # meters per robot
    station_busy: tuple = ()           # busy seconds per pick station


def compute_metrics(counters: RunCounters, horizon: float, bound: float) -> MetricsRecord:
    """Assemble the per-run measures from raw tallies.

    Pile-on is absent (None) when no pod ever reached a pick station; idle
    time is the fraction of the horizon a pick station had no pick handling
    in progress.
    """
    hours = horizon / 3600.0 if horizon > 0 else 0.0
    rec = MetricsRecord()
    rec.upper_bound = bound
    rec.pick_pod_visits = counters.pick_pod_visits
    rec.repl_pod_visits = counters.repl_pod_visits
    if hours > 0:
        rec.unit_throughput = counters.units_picked / hours
        rec.order_throughput = counters.orders_completed / hours
    if counters.orders_completed:
        rec.order_turnover_time = counters.turnover_sum / counters.orders_completed
        rec.order_offset = counters.offset_sum / counters.orders_completed
        rec.late_fraction = counters.late_orders / counters.orders_completed
    rec.pile_on = (counters.units_picked / counters.pick_pod_visits
                   if counters.pick_pod_visits else None)
    if counters.robot_distances:
        rec.distance_traveled = sum(counters.robot_distances) / len(counters.robot_distances)
    if counters.station_busy and horizon > 0:
        idle = [1.0 - busy / horizon for busy in counters.station_busy]
        rec.station_idle_time = sum(idle) / len(idle)
    if bound > 0:
        rec.unit_throughput_score = rec.unit_throughput / bound
    return rec


def pearson(xs, ys):
    """Pearson correlation coefficient; None when a side has zero variance."""
    n = len(xs)
    if n != len(ys):
        raise ValueError("series lengths differ")
    if n < 2:
        raise ValueError("need at least two points")
    mx = sum(xs) / n
    my = sum(ys) / n
    sxx = sum((x - mx) ** 2 for x in xs)
    syy = sum((y - my) ** 2 for y in ys)
    if sxx == 0 or syy == 0:
        return None
    sxy = sum((x - mx) * (y - my) for x, y in zip(xs, ys))
    r = sxy / math.sqrt(sxx * syy)
    return max(-1.0, min(1.0, r))
