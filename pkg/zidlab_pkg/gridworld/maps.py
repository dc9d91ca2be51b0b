# -*- coding: utf-8 -*-
"""
ZidLab — Map module.

Static grid-world description (MapSpec) and the map-file parser.

Map files are whitespace-separated tokens, one grid row per line:
`.` floor, `@` wall, `X` exit, `G` gem, `S<k>` start of agent k,
`L<c><D>` laser source of colour c facing D (N/E/S/W). Header lines:
`#spawn x y`, `#disable x y move [label]`, `#agents n`. A line starting
with `# ` (hash, space) is a comment.
"""

from dataclasses import dataclass, field, replace
from functools import cached_property
from pathlib import Path

from ..errors import (
    MapError, NonRectangular, NoExit, DuplicateStartId, UnknownToken,
    BeamHitsNothing, MissingStart
)

# ============================================================
# VOCABULARY
# ============================================================

FLOOR = "floor"
WALL = "wall"
EXIT = "exit"
GEM = "gem"
START = "start"
LASER = "laser"

NORTH, EAST, SOUTH, WEST, STAY = "N", "E", "S", "W", "Stay"
MOVES = (NORTH, EAST, SOUTH, WEST, STAY)

DELTAS = {
    NORTH: (0, -1),
    EAST: (1, 0),
    SOUTH: (0, 1),
    WEST: (-1, 0),
    STAY: (0, 0),
}


@dataclass(frozen=True)
class Tile:
    kind: str
    agent: int = -1
    color: int = -1
    direction: str = ""

    @property
    def passable(self):
        return self.kind not in (WALL, LASER)

    def token(self):
        if self.kind == START:
            return f"S{self.agent}"
        if self.kind == LASER:
            return f"L{self.color}{self.direction}"
        return {FLOOR: ".", WALL: "@", EXIT: "X", GEM: "G"}[self.kind]


@dataclass(frozen=True)
class Laser:
    """A laser source and its unobstructed path (agents ignored)."""

    id: int
    color: int
    source: tuple
    direction: str
    path: tuple


def shift(pos, move):
    dx, dy = DELTAS[move]
    return pos[0] + dx, pos[1] + dy


# ============================================================
# MAP SPEC
# ============================================================


@dataclass(frozen=True)
class MapSpec:
    width: int
    height: int
    tiles: tuple
    n_agents: int
    spawn_zone: tuple = ()
    disabled_edges: frozenset = frozenset()
    variant_edges: tuple = ()
    name: str = ""
    # variant index this spec was derived with (0 = base map)
    variant_index: int = field(default=0, compare=False)

    def tile(self, pos):
        x, y = pos
        return self.tiles[y][x]

    def in_bounds(self, pos):
        x, y = pos
        return 0 <= x < self.width and 0 <= y < self.height

    def passable(self, pos):
        return self.in_bounds(pos) and self.tile(pos).passable

    def positions(self):
        for y in range(self.height):
            for x in range(self.width):
                yield x, y

    @cached_property
    def exits(self):
        return frozenset(p for p in self.positions() if self.tile(p).kind == EXIT)

    @cached_property
    def gems(self):
        """Gem tiles in row-major order; bit i of a gem mask is gems[i]."""
        return tuple(p for p in self.positions() if self.tile(p).kind == GEM)

    @cached_property
    def gem_index(self):
        return {p: i for i, p in enumerate(self.gems)}

    @cached_property
    def starts(self):
        found = {}
        for p in self.positions():
            t = self.tile(p)
            if t.kind == START:
                found[t.agent] = p
        return tuple(found.get(i) for i in range(self.n_agents))

    @cached_property
    def lasers(self):
        lasers = []
        for p in self.positions():
            t = self.tile(p)
            if t.kind != LASER:
                continue
            path = []
            cur = shift(p, t.direction)
            while self.in_bounds(cur) and self.tile(cur).passable:
                path.append(cur)
                cur = shift(cur, t.direction)
            lasers.append(Laser(len(lasers), t.color, p, t.direction, tuple(path)))
        return tuple(lasers)

    @cached_property
    def n_variants(self):
        return max((label for label, _, _ in self.variant_edges), default=0)

    def variant(self, n):
        """Return M_n: this map with every variant edge labelled <= n disabled."""
        extra = {(pos, move) for label, pos, move in self.variant_edges if label <= n}
        return replace(self, disabled_edges=self.disabled_edges | extra, variant_index=n)

    def with_agents(self, n):
        """Same map with `n` agents drawn from the spawn zone."""
        if not self.spawn_zone:
            raise MapError("changing the agent count needs a spawn zone")
        if not 1 <= n <= len(self.spawn_zone):
            raise MapError(f"spawn zone has {len(self.spawn_zone)} tiles for {n} agents")
        return replace(self, n_agents=n)

    def render(self, state=None):
        """ASCII dump; agents (when a state is given) are drawn as their id."""
        occupied = {}
        if state is not None:
            for i, pos in enumerate(state.positions):
                if state.alive[i] and not state.exited[i]:
                    occupied[tuple(pos)] = str(i)
        rows = []
        for y in range(self.height):
            cells = []
            for x in range(self.width):
                cells.append(occupied.get((x, y), self.tiles[y][x].token()))
            rows.append(" ".join(f"{c:>3}" for c in cells))
        return "\n".join(rows)


# ============================================================
# PARSER
# ============================================================


def _parse_token(token, lineno):
    if token == ".":
        return Tile(FLOOR)
    if token == "@":
        return Tile(WALL)
    if token == "X":
        return Tile(EXIT)
    if token == "G":
        return Tile(GEM)
    if token.startswith("S") and token[1:].isdigit():
        return Tile(START, agent=int(token[1:]))
    if (len(token) == 3 and token[0] == "L" and token[1].isdigit()
            and token[2] in (NORTH, EAST, SOUTH, WEST)):
        return Tile(LASER, color=int(token[1]), direction=token[2])
    raise UnknownToken(f"unknown token {token!r}", line=lineno)


def _parse_int(value, lineno, what):
    try:
        return int(value)
    except ValueError:
        raise MapError(f"{what} must be an integer, got {value!r}", line=lineno) from None


def parse_map(text, name=""):
    """Parse and validate a map file string into a MapSpec."""
    rows = []
    spawn = []
    disabled = []
    variant_edges = []
    declared_agents = None

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line == "#" or line.startswith("# "):
            continue
        if line.startswith("#"):
            parts = line[1:].split()
            directive, args = parts[0], parts[1:]
            if directive == "spawn" and len(args) == 2:
                spawn.append((_parse_int(args[0], lineno, "x"), _parse_int(args[1], lineno, "y")))
            elif directive == "disable" and len(args) in (3, 4):
                pos = (_parse_int(args[0], lineno, "x"), _parse_int(args[1], lineno, "y"))
                move = args[2]
                if move not in (NORTH, EAST, SOUTH, WEST, STAY):
                    raise UnknownToken(f"unknown move {move!r}", line=lineno)
                if len(args) == 4:
                    label = _parse_int(args[3], lineno, "variant label")
                    if label < 1:
                        raise MapError("variant labels start at 1", line=lineno)
                    variant_edges.append((label, pos, move))
                else:
                    disabled.append((pos, move))
            elif directive == "agents" and len(args) == 1:
                declared_agents = _parse_int(args[0], lineno, "agent count")
            else:
                raise UnknownToken(f"unknown header {line!r}", line=lineno)
            continue
        rows.append(tuple(_parse_token(tok, lineno) for tok in line.split()))

    if not rows:
        raise NonRectangular("map has no grid rows")
    width = len(rows[0])
    for y, row in enumerate(rows):
        if len(row) != width:
            raise NonRectangular(f"row {y} has {len(row)} tiles, expected {width}")
    height = len(rows)

    start_ids = {}
    for y, row in enumerate(rows):
        for x, t in enumerate(row):
            if t.kind == START:
                if t.agent in start_ids:
                    raise DuplicateStartId(f"agent {t.agent} has two start tiles")
                start_ids[t.agent] = (x, y)

    if declared_agents is not None:
        n_agents = declared_agents
    else:
        n_agents = max(start_ids) + 1 if start_ids else 0
    if n_agents < 1:
        raise MissingStart("map declares no agents (add S<k> tiles or an #agents header)")

    spec = MapSpec(
        width=width,
        height=height,
        tiles=tuple(rows),
        n_agents=n_agents,
        spawn_zone=tuple(sorted(set(spawn), key=lambda p: (p[1], p[0]))),
        disabled_edges=frozenset(disabled),
        variant_edges=tuple(sorted(variant_edges)),
        name=name,
    )
    _validate(spec, start_ids)
    return spec


def _validate(spec, start_ids):
    if not spec.exits:
        raise NoExit("map has no exit tile")

    for agent in range(spec.n_agents):
        if agent not in start_ids and not spec.spawn_zone:
            raise MissingStart(f"agent {agent} has no start tile and there is no spawn zone")
    for agent in start_ids:
        if agent >= spec.n_agents:
            raise MissingStart(f"start tile for agent {agent} but the map has {spec.n_agents} agents")

    if spec.spawn_zone and len(spec.spawn_zone) < spec.n_agents:
        raise MapError(f"spawn zone has {len(spec.spawn_zone)} tiles for {spec.n_agents} agents")
    for pos in spec.spawn_zone:
        if not spec.passable(pos):
            raise MapError(f"spawn tile {pos} is out of bounds or not walkable")

    for pos, move in list(spec.disabled_edges) + [(p, m) for _, p, m in spec.variant_edges]:
        if not spec.in_bounds(pos):
            raise MapError(f"disabled edge references out-of-bounds tile {pos}")

    for p in spec.positions():
        t = spec.tile(p)
        if t.kind == LASER and not spec.in_bounds(shift(p, t.direction)):
            raise BeamHitsNothing(f"laser at {p} faces {t.direction} out of the grid")


def load_map(path):
    """Read a map file from disk; the file stem becomes the map name."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise MapError(f"cannot read map {path}: {e.strerror}") from None
    return parse_map(text, name=path.stem)
