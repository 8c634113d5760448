"""The 24 decision rules behind the five controller interfaces.

Five decision problems are covered: pick order assignment (POA),
replenishment order assignment (ROA), pick pod selection (PPS),
replenishment pod selection (RPS) and pod storage assignment (PSA). Scored
rules return (choice, tie_set); ties are broken by a seeded stream so that an
identical snapshot plus identical stream state always yields the same
decision.

Scoring conventions: pod contents enter the formulas net of outstanding pick
reservations, and pick-order demand may be supplied netted of units already
reserved on inbound pods (the engine does this; plain `remaining` is the
default).
"""

from dataclasses import dataclass

POA_RULES = ("Random", "FCFS", "DueTime", "FastLane", "CommonLines", "PodMatch")
ROA_RULES = ("Random", "PodBatch")
PPS_RULES = ("Random", "Nearest", "PileOn", "Demand", "Lateness", "Age")
RPS_RULES = ("Random", "Emptiest", "Nearest", "LeastDemand", "Class")
PSA_RULES = ("Random", "Fixed", "Nearest", "StationBased", "Class")

_TIE_EPS = 1e-9


class InvalidRuleConfiguration(ValueError):
    pass


@dataclass(frozen=True)
class RuleConfiguration:
    poa: str
    roa: str
    pps: str
    rps: str
    psa: str

    def __post_init__(self):
        for value, pool, name in ((self.poa, POA_RULES, "poa"),
                                  (self.roa, ROA_RULES, "roa"),
                                  (self.pps, PPS_RULES, "pps"),
                                  (self.rps, RPS_RULES, "rps"),
                                  (self.psa, PSA_RULES, "psa")):
            if value not in pool:
                raise InvalidRuleConfiguration(f"unknown {name} rule: {value!r}")
        if self.roa == "PodBatch" and self.rps == "Nearest":
            raise InvalidRuleConfiguration(
                "PodBatch replenishment assignment and Nearest pod selection "
                "each wait for the other; the combination is rejected")

    def as_tuple(self):
        return (self.poa, self.roa, self.pps, self.rps, self.psa)


def argbest(candidates, score, rng, maximize=True):
    """(choice, ties) for the best-scoring candidates; random tie-break.

    Candidates must expose `.id` for the deterministic tie ordering.
    """
    scored = [(score(c), c) for c in candidates]
    if not scored:
        return None, []
    best = max(s for s, _ in scored) if maximize else min(s for s, _ in scored)
    ties = [c for s, c in scored if abs(s - best) <= _TIE_EPS * max(1.0, abs(best))]
    ties.sort(key=lambda c: c.id)
    return ties[0] if len(ties) == 1 else rng.choice(ties), ties


# ------------------------------------------------------------------- POA

def fast_lane_eligible(order, pod):
    """Every line of the order is fully coverable by the pod's raw contents."""
    return all(pod.contents.get(sku, 0) >= units for sku, units in order.lines.items())


def score_common_lines(order, station_orders):
    hits = 0
    for other in station_orders:
        for sku, units in order.lines.items():
            if units > 0 and other.lines.get(sku, 0) > 0:
                hits += 1
    return hits


def score_pod_match(order, inbound_pods, demand=None):
    dem = demand if demand is not None else order.remaining
    total = 0
    for pod in inbound_pods:
        for sku, units in dem.items():
            total += min(pod.available(sku), units) if units > 0 else 0
    return total


def poa_common_lines(backlog, station_orders, rng):
    return argbest(backlog, lambda o: score_common_lines(o, station_orders), rng)


def poa_pod_match(backlog, inbound_pods, rng):
    return argbest(backlog, lambda o: score_pod_match(o, inbound_pods), rng)


def poa_select(rule, backlog, station_orders, inbound_pods, rng):
    """Pick the order for the one open slot at the station.

    The FastLane rule fills normal slots randomly; its reserved fast-lane
    slot is assigned separately via `fast_lane_eligible`.
    """
    if not backlog:
        return None
    if rule in ("Random", "FastLane"):
        return rng.choice(sorted(backlog, key=lambda o: o.id))
    if rule == "FCFS":
        return argbest(backlog, lambda o: o.submit_time, rng, maximize=False)[0]
    if rule == "DueTime":
        return argbest(backlog, lambda o: o.due_time, rng, maximize=False)[0]
    if rule == "CommonLines":
        return poa_common_lines(backlog, station_orders, rng)[0]
    if rule == "PodMatch":
        return poa_pod_match(backlog, inbound_pods, rng)[0]
    raise InvalidRuleConfiguration(rule)


def fast_lane_select(backlog, next_pod, rng):
    """Order for the reserved fast-lane slot, or None if nothing qualifies."""
    if next_pod is None:
        return None
    eligible = sorted((o for o in backlog if fast_lane_eligible(o, next_pod)),
                      key=lambda o: o.id)
    if not eligible:
        return None
    return rng.choice(eligible)


# ------------------------------------------------------------------- ROA

def roa_select(rule, order_volume, stations, pod_station, rng):
    """Station for the head replenishment order, or None to keep it waiting.

    `stations` expose `.free_capacity_slots`; `pod_station` is the station
    already receiving the order's pod under PodBatch, if any.
    """
    feasible = sorted((s for s in stations if s.free_capacity_slots >= order_volume),
                      key=lambda s: s.id)
    if rule == "Random":
        return rng.choice(feasible) if feasible else None
    if rule == "PodBatch":
        if pod_station is not None:
            return pod_station if pod_station.free_capacity_slots >= order_volume else None
        return rng.choice(feasible) if feasible else None
    raise InvalidRuleConfiguration(rule)


# ------------------------------------------------------------------- PPS

def score_pile_on(pod, station_orders, demand_of=None):
    total = 0
    for order in station_orders:
        dem = demand_of(order) if demand_of else order.remaining
        for sku, units in dem.items():
            if units > 0:
                total += min(pod.available(sku), units)
    return total


def completable_orders(pod, station_orders, demand_of=None):
    count = 0
    for order in station_orders:
        dem = demand_of(order) if demand_of else order.remaining
        open_lines = {k: v for k, v in dem.items() if v > 0}
        if open_lines and all(pod.available(k) >= v for k, v in open_lines.items()):
            count += 1
    return count


def score_demand(pod, backlog):
    total = 0
    for order in backlog:
        for sku, units in order.remaining.items():
            if units > 0:
                total += min(pod.available(sku), units)
    return total


def _weighted_urgency(pod, station_orders, urgency, demand_of=None):
    total = 0.0
    for order in station_orders:
        dem = demand_of(order) if demand_of else order.remaining
        open_total = sum(v for v in dem.values() if v > 0)
        if open_total == 0:
            continue
        covered = sum(min(pod.available(k), v) for k, v in dem.items() if v > 0)
        total += covered / open_total * urgency(order)
    return total


def score_lateness(pod, station_orders, now, demand_of=None):
    return _weighted_urgency(pod, station_orders,
                             lambda o: max(now - o.due_time, 0.0), demand_of)


def score_lateness_fallback(pod, station_orders, demand_of=None):
    # no order is late: substitute the due time itself for the lateness term
    return _weighted_urgency(pod, station_orders, lambda o: o.due_time, demand_of)


def score_age(pod, station_orders, now, demand_of=None):
    return _weighted_urgency(pod, station_orders,
                             lambda o: now - o.station_assign_time, demand_of)


def pps_pile_on(pods, station_orders, rng, demand_of=None):
    choice, ties = argbest(pods, lambda p: score_pile_on(p, station_orders, demand_of), rng)
    if len(ties) > 1:
        # favor pods completing more orders, then random
        choice, ties = argbest(ties, lambda p: completable_orders(p, station_orders,
                                                                  demand_of), rng)
    return choice, ties


def pps_lateness(pods, station_orders, now, rng, demand_of=None):
    choice, ties = argbest(pods, lambda p: score_lateness(p, station_orders, now,
                                                          demand_of), rng)
    if choice is not None and score_lateness(choice, station_orders, now, demand_of) <= 0:
        return argbest(pods, lambda p: score_lateness_fallback(p, station_orders,
                                                               demand_of), rng)
    return choice, ties


def pps_select(rule, pods, station, backlog, now, rng, path_time=None, demand_of=None):
    """Pod for the next extraction task at `station`.

    `pods` must already be filtered to candidates offering at least one
    pickable unit; an empty candidate list returns None (the robot idles).
    """
    if not pods:
        return None
    if rule == "Random":
        return rng.choice(sorted(pods, key=lambda p: p.id))
    if rule == "Nearest":
        return argbest(pods, lambda p: path_time(p.location), rng, maximize=False)[0]
    if rule == "PileOn":
        return pps_pile_on(pods, station.orders, rng, demand_of)[0]
    if rule == "Demand":
        return argbest(pods, lambda p: score_demand(p, backlog), rng)[0]
    if rule == "Lateness":
        return pps_lateness(pods, station.orders, now, rng, demand_of)[0]
    if rule == "Age":
        return argbest(pods, lambda p: score_age(p, station.orders, now, demand_of), rng)[0]
    raise InvalidRuleConfiguration(rule)


# ------------------------------------------------------------------- RPS

def score_least_demand(pod, total_demand):
    return sum(min(pod.available(sku), units)
               for sku, units in total_demand.items() if units > 0)


class ReplenishmentPodSelector:
    """RPS with the sticky-pod state of the Emptiest and Class rules."""

    def __init__(self, rule, rng):
        if rule not in RPS_RULES:
            raise InvalidRuleConfiguration(rule)
        self.rule = rule
        self.rng = rng
        self._sticky = {}       # class idx (or None for Emptiest) -> pod

    def _emptiest(self, pods, key=None):
        choice, _ = argbest(pods, lambda p: p.occupied_slots + p.reserved_in_slots,
                            self.rng, maximize=False)
        self._sticky[key] = choice
        return choice

    def _sticky_or_emptiest(self, pods, key, needed_slots):
        pod = self._sticky.get(key)
        if pod is not None and pod in pods and pod.free_slots >= needed_slots:
            return pod
        return self._emptiest(pods, key)

    def release(self, pod):
        """A pod finished its station visit; stop reusing it."""
        for key, sticky in list(self._sticky.items()):
            if sticky is pod:
                del self._sticky[key]

    def reset(self):
        self._sticky.clear()

    def select(self, order, pods, needed_slots, sku_class=None, station_time=None,
               total_demand=None):
        """Pod for the order; `pods` are space-feasible candidates."""
        if not pods:
            return None
        if self.rule == "Random":
            return self.rng.choice(sorted(pods, key=lambda p: p.id))
        if self.rule == "Emptiest":
            return self._sticky_or_emptiest(pods, None, needed_slots)
        if self.rule == "Nearest":
            return argbest(pods, lambda p: station_time(p.location), self.rng,
                           maximize=False)[0]
        if self.rule == "LeastDemand":
            return argbest(pods, lambda p: score_least_demand(p, total_demand),
                           self.rng, maximize=False)[0]
        if self.rule == "Class":
            same = [p for p in pods if p.class_idx == sku_class]
            if not same:
                return None     # wait for a pod of the order's class
            return self._sticky_or_emptiest(same, sku_class, needed_slots)
        raise InvalidRuleConfiguration(self.rule)


# ------------------------------------------------------------------- PSA

@dataclass(frozen=True)
class _Loc:
    id: int


def psa_select(rule, pod, free_locations, rng, from_robot=None, to_pick_station=None,
               location_class=None):
    """Storage waypoint for a pod leaving a station.

    `free_locations` are unoccupied, unreserved storage cells. Fixed returns
    the pod's home (held free for it by construction). Class restricts
    Nearest to the pod's class and falls back to plain Nearest when the class
    has no free cell.
    """
    if rule == "Fixed":
        return pod.home
    if not free_locations:
        return None
    locs = [_Loc(c) for c in free_locations]
    if rule == "Random":
        return rng.choice(sorted(free_locations))
    if rule == "Nearest":
        return argbest(locs, lambda l: from_robot(l.id), rng, maximize=False)[0].id
    if rule == "StationBased":
        return argbest(locs, lambda l: to_pick_station(l.id), rng, maximize=False)[0].id
    if rule == "Class":
        same = [l for l in locs if location_class(l.id) == pod.class_idx]
        pool = same if same else locs
        return argbest(pool, lambda l: from_robot(l.id), rng, maximize=False)[0].id
    raise InvalidRuleConfiguration(rule)
