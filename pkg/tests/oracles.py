"""Independent brute-force evaluators for the decision-rule formulas.

Each evaluator recomputes the rule's score definition from scratch over all
candidates and returns the full argmax/argmin set, so ties can be compared
as sets against the production selectors.
"""

TIE_EPS = 1e-9


def _net(pod, sku):
    return pod.contents.get(sku, 0) - pod.reserved_out.get(sku, 0)


def _arg_set(scores, maximize=True):
    best = max(scores.values()) if maximize else min(scores.values())
    return {k for k, v in scores.items() if abs(v - best) <= TIE_EPS * max(1.0, abs(best))}


def brute_fast_lane_eligible(order, pod):
    for sku, need in order.lines.items():
        if pod.contents.get(sku, 0) < need:
            return False
    return True


def brute_common_lines_set(backlog, station_orders):
    scores = {}
    for o in backlog:
        n = 0
        for other in station_orders:
            for sku in o.lines:
                if o.lines[sku] > 0 and other.lines.get(sku, 0) > 0:
                    n += 1
        scores[o.id] = n
    return _arg_set(scores)


def brute_pod_match_set(backlog, inbound_pods):
    scores = {}
    for o in backlog:
        total = 0
        for p in inbound_pods:
            for sku, d in o.remaining.items():
                if d > 0:
                    total += min(_net(p, sku), d)
        scores[o.id] = total
    return _arg_set(scores)


def brute_pile_on_set(pods, station_orders):
    scores = {}
    for p in pods:
        total = 0
        for o in station_orders:
            for sku, d in o.remaining.items():
                if d > 0:
                    total += min(_net(p, sku), d)
        scores[p.id] = total
    primary = _arg_set(scores)
    if len(primary) == 1:
        return primary
    # tie-break by the number of orders the pod can complete
    compl = {}
    for p in pods:
        if p.id not in primary:
            continue
        n = 0
        for o in station_orders:
            open_lines = {k: v for k, v in o.remaining.items() if v > 0}
            if open_lines and all(_net(p, k) >= v for k, v in open_lines.items()):
                n += 1
        compl[p.id] = n
    return _arg_set(compl)


def brute_demand_set(pods, backlog):
    scores = {}
    for p in pods:
        scores[p.id] = sum(min(_net(p, sku), d)
                           for o in backlog for sku, d in o.remaining.items() if d > 0)
    return _arg_set(scores)


def _brute_weighted(pods, station_orders, urgency):
    scores = {}
    for p in pods:
        total = 0.0
        for o in station_orders:
            open_total = sum(v for v in o.remaining.values() if v > 0)
            if open_total == 0:
                continue
            covered = sum(min(_net(p, sku), d)
                          for sku, d in o.remaining.items() if d > 0)
            total += covered / open_total * urgency(o)
        scores[p.id] = total
    return scores


def brute_lateness_set(pods, station_orders, now):
    scores = _brute_weighted(pods, station_orders, lambda o: max(now - o.due_time, 0.0))
    primary = _arg_set(scores)
    if max(scores.values()) > 0:
        return primary
    fallback = _brute_weighted(pods, station_orders, lambda o: o.due_time)
    return _arg_set(fallback)


def brute_age_set(pods, station_orders, now):
    return _arg_set(_brute_weighted(pods, station_orders,
                                    lambda o: now - o.station_assign_time))
