"""Warehouse topology: directed waypoint grid, stations, storage and dwell cells.

The generated layout follows the standard pod-grid shape: a storage area of
2-cell-tall pod bands separated by one-way cross-aisle rows and one-way
vertical aisle columns, flanked by bidirectional maneuvering columns, with
replenishment stations on the left edge and pick stations on the right. Each
station has an access cell fed by a one-way buffer queue. Cell pitch is fixed
at 1 m.
"""

from dataclasses import dataclass, field

CELL = 1.0  # m, grid pitch

# waypoint kinds
STORAGE = "storage-location"
AISLE = "aisle"
BUFFER = "buffer"
ACCESS = "station-access"
DWELL = "dwell"

# directions: N, E, S, W as (dx, dy)
DIRS = ((0, -1), (1, 0), (0, 1), (-1, 0))
NORTH, EAST, SOUTH, WEST = 0, 1, 2, 3


class LayoutError(ValueError):
    """Raised when a layout configuration cannot be realized."""


@dataclass(frozen=True)
class LayoutConfig:
    blocks: tuple = (2, 4)            # (rows, cols) of storage blocks
    aisles: int = 12                  # vertical one-way aisle columns
    cross_aisles: int = 12            # horizontal one-way cross-aisle rows
    storage_location_count: int = 1352
    pod_count: int = 1149
    pick_station_count: int = 2
    replenishment_station_count: int = 2
    buffer_depth: int = 4             # queue cells per station, excluding access
    band_width: int = 0               # cells between adjacent aisles; 0 = auto
    min_dwell_points: int = 4

    def validate(self):
        if self.aisles < 2 or self.cross_aisles < 2:
            raise LayoutError("need at least 2 aisles and 2 cross-aisles")
        if self.cross_aisles % 2 != 0:
            # the top cross-aisle must run east and the bottom one west so the
            # one-way maneuvering columns can always reach entries and exits
            raise LayoutError("cross-aisle count must be even")
        rows, cols = self.blocks
        if rows < 1 or cols < 1:
            raise LayoutError("block grid dimensions must be positive")
        if cols > self.aisles - 1 or rows > self.cross_aisles - 1:
            raise LayoutError("block grid cannot be coarser than the aisle grid")
        if self.pick_station_count < 1 or self.replenishment_station_count < 1:
            raise LayoutError("need at least one station of each kind")
        if self.pod_count > self.storage_location_count:
            raise LayoutError("pod count exceeds storage locations")
        if self.storage_location_count < 1:
            raise LayoutError("need at least one storage location")
        if self.buffer_depth < 1:
            raise LayoutError("buffer depth must be >= 1")


@dataclass(frozen=True)
class StationGeometry:
    id: int
    kind: str                  # "pick" | "replenishment"
    access: int                # access waypoint id
    queue: tuple               # waypoint ids from buffer tail to access, inclusive
    entry: int                 # maneuvering cell feeding the buffer tail
    exit: int                  # maneuvering cell reached when leaving the access


class WaypointGraph:
    """Immutable directed grid; safe to share across concurrent runs."""

    def __init__(self, width, height):
        self.width = width
        self.height = height
        self.coord_to_id = {}
        self.xy = []            # id -> (x, y)
        self.kind = []          # id -> waypoint kind
        self.outgoing = []      # id -> tuple of neighbor ids
        self.step = []          # id -> 4-tuple, neighbor id per direction or -1
        self.storage_cells = ()
        self.dwell_cells = ()
        self.stations = ()
        self.pick_stations = ()
        self.repl_stations = ()
        self.aisle_segments = ()   # ((cell ids in travel order), ...) for invariant checks
        self.station_cells = {}    # cell id -> station id, for transit exclusion

    def _add(self, x, y, kind):
        wid = len(self.xy)
        self.coord_to_id[(x, y)] = wid
        self.xy.append((x, y))
        self.kind.append(kind)
        return wid

    def position(self, wid):
        x, y = self.xy[wid]
        return (x * CELL, y * CELL)

    def node_count(self):
        return len(self.xy)

    def direction(self, a, b):
        ax, ay = self.xy[a]
        bx, by = self.xy[b]
        return DIRS.index((bx - ax, by - ay))


def build_layout(config: LayoutConfig) -> WaypointGraph:
    """Construct the waypoint graph for `config`.

    Raises LayoutError when the block grid cannot host the requested storage
    locations plus the minimum dwell-point reserve, or when the station edges
    do not fit the storage-area height.
    """
    config.validate()
    n_aisle = config.aisles
    n_cross = config.cross_aisles
    bands_x = n_aisle - 1
    bands_y = n_cross - 1
    cells_needed = config.storage_location_count + max(1, config.min_dwell_points)
    if config.band_width:
        w = config.band_width
    else:
        w = -(-cells_needed // (bands_x * bands_y * 2))  # ceil division
    capacity = bands_x * bands_y * 2 * w
    if capacity < cells_needed:
        raise LayoutError(
            f"block grid holds {capacity} cells, need {cells_needed} "
            f"(locations + dwell reserve)")

    sw = n_aisle + bands_x * w          # storage-area width
    sh = n_cross + bands_y * 2          # storage-area height
    slot = config.buffer_depth + 1
    for count, side in ((config.replenishment_station_count, "replenishment"),
                        (config.pick_station_count, "pick")):
        if count * slot > sh:
            raise LayoutError(f"{count} {side} stations need {count * slot} rows, "
                              f"storage area has {sh}")

    g = WaypointGraph(sw + 4, sh)
    west_man, east_man = 1, sw + 2

    def is_aisle_col(xs):
        return xs % (w + 1) == 0

    def is_cross_row(ys):
        return ys % 3 == 0

    # storage-area cells; storage vs dwell assignment comes after geometry
    band_cells = []
    for ys in range(sh):
        for xs in range(sw):
            x = xs + 2
            if is_cross_row(ys) or is_aisle_col(xs):
                g._add(x, ys, AISLE)
            else:
                g._add(x, ys, STORAGE)
                band_cells.append((x, ys))
    # maneuvering columns
    for y in range(sh):
        g._add(west_man, y, AISLE)
        g._add(east_man, y, AISLE)

    # dwell points: the most central in-band cells beyond the requested count
    cx = (sw - 1) / 2 + 2
    cy = (sh - 1) / 2
    by_center = sorted(band_cells, key=lambda c: (abs(c[0] - cx) + abs(c[1] - cy), c[1], c[0]))
    n_dwell = capacity - config.storage_location_count
    dwell = set(by_center[:n_dwell])
    for (x, y) in dwell:
        g.kind[g.coord_to_id[(x, y)]] = DWELL

    edges = [set() for _ in range(len(g.xy) + 2 * (config.pick_station_count +
                                                   config.replenishment_station_count) * slot)]

    def connect(a, b, both=False):
        edges[a].add(b)
        if both:
            edges[b].add(a)

    def wid(x, y):
        return g.coord_to_id[(x, y)]

    aisle_segments = []
    # one-way vertical aisles, direction alternating by aisle index
    for ai in range(n_aisle):
        xs = ai * (w + 1)
        cells = [wid(xs + 2, ys) for ys in range(sh)]
        if ai % 2 == 0:
            cells.reverse()     # even aisles run north (decreasing y)
        for a, b in zip(cells, cells[1:]):
            connect(a, b)
        aisle_segments.append(tuple(cells))
    # one-way cross-aisle rows, direction alternating by row index
    for ci in range(n_cross):
        ys = ci * 3
        cells = [wid(xs + 2, ys) for xs in range(sw)]
        if ci % 2 == 1:
            cells.reverse()     # odd cross rows run west
        for a, b in zip(cells, cells[1:]):
            connect(a, b)
        aisle_segments.append(tuple(cells))
        # maneuvering connections at the row's ends, following its direction
        west_cell, east_cell = wid(2, ys), wid(sw + 1, ys)
        if ci % 2 == 0:
            connect(wid(west_man, ys), west_cell)
            connect(east_cell, wid(east_man, ys))
        else:
            connect(west_cell, wid(west_man, ys))
            connect(wid(east_man, ys), east_cell)
    # one-way maneuvering columns: the west one runs north toward the top
    # (eastbound) cross-aisle, the east one runs south toward the bottom
    # (westbound) one; carriers can then never meet head-on beside a station
    for y in range(sh - 1):
        connect(wid(west_man, y + 1), wid(west_man, y))
        connect(wid(east_man, y), wid(east_man, y + 1))
    # storage/dwell cells: access to the adjacent cross row plus pass-under links
    for (x, ys) in band_cells:
        me = wid(x, ys)
        if ys % 3 == 1:
            connect(me, wid(x, ys - 1), both=True)   # upper row -> cross above
            connect(me, wid(x, ys + 1), both=True)   # pair link
        else:
            connect(me, wid(x, ys + 1), both=True)   # lower row -> cross below
        for dx in (-1, 1):
            if (x + dx, ys) in g.coord_to_id:
                connect(me, wid(x + dx, ys), both=True)

    # stations: replenishment on the west edge (x=0), pick on the east (x=sw+3)
    stations = []

    def place_stations(kind, count, col, man_col, start_id):
        gap = sh - count * slot
        for i in range(count):
            ya = (gap * (i + 1)) // (count + 1) + i * slot
            access = g._add(col, ya, ACCESS)
            queue = [access]
            for k in range(1, slot):
                queue.append(g._add(col, ya + k, BUFFER))
            queue.reverse()     # tail first, access last
            for a, b in zip(queue, queue[1:]):
                connect(a, b)
            entry = wid(man_col, ya + slot - 1)
            exit_ = wid(man_col, ya)
            connect(entry, queue[0])
            connect(access, exit_)
            st = StationGeometry(start_id + i, kind, access, tuple(queue), entry, exit_)
            stations.append(st)
            for c in queue:
                g.station_cells[c] = st.id
        return start_id + count

    nid = place_stations("pick", config.pick_station_count, sw + 3, east_man, 0)
    place_stations("replenishment", config.replenishment_station_count, 0, west_man, nid)

    g.outgoing = [tuple(sorted(edges[i])) for i in range(len(g.xy))]
    step = []
    for i, (x, y) in enumerate(g.xy):
        row = [-1, -1, -1, -1]
        for j in g.outgoing[i]:
            jx, jy = g.xy[j]
            row[DIRS.index((jx - x, jy - y))] = j
        step.append(tuple(row))
    g.step = step
    g.storage_cells = tuple(i for i, k in enumerate(g.kind) if k == STORAGE)
    g.dwell_cells = tuple(i for i, k in enumerate(g.kind) if k == DWELL)
    g.stations = tuple(stations)
    g.pick_stations = tuple(s for s in stations if s.kind == "pick")
    g.repl_stations = tuple(s for s in stations if s.kind == "replenishment")
    g.aisle_segments = tuple(aisle_segments)
    if len(g.storage_cells) != config.storage_location_count:
        raise LayoutError("internal: storage cell count mismatch")
    return g
