"""Directed network model, boundary/source data and scenario files."""

import json
from dataclasses import dataclass, field
from importlib import resources

import numpy as np

from .signals import PiecewisePoly, Poly, profile_from_json, signal_from_json

DIRICHLET = "dirichlet"
FLUX = "flux"


class NetworkError(ValueError):
    pass


@dataclass(frozen=True)
class Vertex:
    id: str
    kind: str


@dataclass(frozen=True, eq=False)
class Edge:
    id: str
    tail: int
    head: int
    length: float
    a: PiecewisePoly
    d: PiecewisePoly

    def __eq__(self, other):
        return (isinstance(other, Edge) and (self.id, self.tail, self.head, self.length)
                == (other.id, other.tail, other.head, other.length) and self.a == other.a and self.d == other.d)


@dataclass(frozen=True, eq=False)
class Network:
    """Validated directed graph with per-edge damping coefficients."""

    vertices: tuple
    edges: tuple
    d_min: float
    d_max: float
    a_max: float

    def __eq__(self, other):
        return isinstance(other, Network) and self.vertices == other.vertices and self.edges == other.edges

    @property
    def dirichlet(self):
        """Vertex indices with prescribed potential, in declaration order."""
        return tuple(i for i, v in enumerate(self.vertices) if v.kind == DIRICHLET)

    @property
    def flux(self):
        return tuple(i for i, v in enumerate(self.vertices) if v.kind == FLUX)

    def vertex_index(self, vid):
        for i, v in enumerate(self.vertices):
            if v.id == vid:
                return i
        raise KeyError(vid)

    def edge_index(self, eid):
        for i, e in enumerate(self.edges):
            if e.id == eid:
                return i
        raise KeyError(eid)

    def incident(self, v):
        """List of (edge index, sign) pairs at vertex index ``v``."""
        out = []
        for k, e in enumerate(self.edges):
            if e.tail == v:
                out.append((k, -1))
            if e.head == v:
                out.append((k, +1))
        return out

    def to_dict(self):
        return {
            "vertices": [{"id": v.id, "kind": v.kind} for v in self.vertices],
            "edges": [{"id": e.id, "tail": self.vertices[e.tail].id, "head": self.vertices[e.head].id,
                       "length": e.length, "a": e.a.to_json(), "d": e.d.to_json()} for e in self.edges],
        }


def incidence_sign(net, e, v):
    """Orientation sign of edge ``e`` at vertex ``v``: -1 at the tail, +1 at the head.

    Both arguments may be given as string ids or integer indices.
    """
    ei = net.edge_index(e) if isinstance(e, str) else int(e)
    vi = net.vertex_index(v) if isinstance(v, str) else int(v)
    edge = net.edges[ei]
    if vi == edge.tail:
        return -1
    if vi == edge.head:
        return +1
    raise NetworkError(f"vertex {net.vertices[vi].id} is not an endpoint of edge {edge.id}")


def build_network(spec):
    """Validate a parsed network description and return a :class:`Network`."""
    verts = []
    ids = {}
    for item in spec["vertices"]:
        vid = str(item["id"])
        kind = item.get("kind", FLUX)
        if kind not in (DIRICHLET, FLUX):
            raise NetworkError(f"vertex {vid}: unknown kind {kind!r}")
        if vid in ids:
            raise NetworkError(f"duplicate vertex id {vid}")
        ids[vid] = len(verts)
        verts.append(Vertex(vid, kind))
    edges = []
    eids = set()
    for item in spec["edges"]:
        eid = str(item["id"])
        if eid in eids:
            raise NetworkError(f"duplicate edge id {eid}")
        eids.add(eid)
        try:
            tail, head = ids[str(item["tail"])], ids[str(item["head"])]
        except KeyError as exc:
            raise NetworkError(f"edge {eid}: unknown vertex {exc.args[0]}") from None
        if tail == head:
            raise NetworkError(f"edge {eid}: loops are not supported")
        length = float(item.get("length", 1.0))
        if not length > 0:
            raise NetworkError(f"edge {eid}: length must be positive")
        a = profile_from_json(item.get("a", 0.0), length)
        d = profile_from_json(item.get("d", 1.0), length)
        for name, prof in (("a", a), ("d", d)):
            if abs(prof.breaks[0]) > 1e-12 or abs(prof.breaks[-1] - length) > 1e-12 * length:
                raise NetworkError(f"edge {eid}: coefficient {name} must be defined on [0, {length}]")
        edges.append(Edge(eid, tail, head, length, a, d))
    d_lo, d_hi, a_lo, a_hi = np.inf, -np.inf, np.inf, -np.inf
    for e in edges:
        lo, hi = e.d.bounds()
        d_lo, d_hi = min(d_lo, lo), max(d_hi, hi)
        lo, hi = e.a.bounds()
        a_lo, a_hi = min(a_lo, lo), max(a_hi, hi)
        if e.d.bounds()[0] <= 0:
            raise NetworkError(f"edge {e.id}: damping d must be positive")
        if e.a.bounds()[0] < 0:
            raise NetworkError(f"edge {e.id}: damping a must be non-negative")
    net = Network(tuple(verts), tuple(edges), float(d_lo), float(d_hi), float(max(a_hi, 0.0)))
    if not net.dirichlet:
        raise NetworkError("at least one dirichlet vertex is required")
    for i, v in enumerate(verts):
        inc = net.incident(i)
        if not inc:
            raise NetworkError(f"vertex {v.id} is isolated")
        if v.kind == DIRICHLET and len({s for _, s in inc}) > 1:
            raise NetworkError(f"mixed orientation at boundary vertex {v.id}")
    return net


@dataclass(frozen=True)
class SourceTerm:
    """One separable term signal(t) * profile(x)."""

    signal: object
    profile: PiecewisePoly


@dataclass
class BoundaryAndSourceData:
    """Right-hand sides: f, g per edge (lists of terms), h per dirichlet vertex, r per flux vertex."""

    f: dict = field(default_factory=dict)
    g: dict = field(default_factory=dict)
    h: dict = field(default_factory=dict)
    r: dict = field(default_factory=dict)

    def to_dict(self, net):
        def terms(d):
            return {net.edges[k].id: [{"time": t.signal.to_json(), "space": t.profile.to_json()} for t in v]
                    for k, v in d.items()}
        return {"f": terms(self.f), "g": terms(self.g),
                "h": {net.vertices[k].id: s.to_json() for k, s in self.h.items()},
                "r": {net.vertices[k].id: s.to_json() for k, s in self.r.items()}}


def _parse_terms(obj, length):
    if isinstance(obj, (int, float)):
        return [SourceTerm(Poly([1.0]), PiecewisePoly.constant(obj, length))]
    if isinstance(obj, dict):
        obj = [obj]
    if isinstance(obj, list) and obj and all(isinstance(x, (int, float)) for x in obj):
        return [SourceTerm(Poly([1.0]), PiecewisePoly.poly(obj, length))]
    return [SourceTerm(signal_from_json(t.get("time", 1.0)), profile_from_json(t.get("space", 1.0), length))
            for t in obj]


def build_data(net, spec):
    """Parse the ``data`` section against a validated network."""
    spec = spec or {}
    data = BoundaryAndSourceData()
    for key in ("f", "g"):
        for eid, val in (spec.get(key) or {}).items():
            k = net.edge_index(eid)
            getattr(data, key)[k] = _parse_terms(val, net.edges[k].length)
    for key, kind in (("h", DIRICHLET), ("r", FLUX)):
        for vid, val in (spec.get(key) or {}).items():
            k = net.vertex_index(vid)
            if net.vertices[k].kind != kind:
                raise NetworkError(f"{key} given at {vid}, which is not a {kind} vertex")
            getattr(data, key)[k] = signal_from_json(val)
    return data


@dataclass
class Scenario:
    """Network, data, initial values and solver settings of one configuration."""

    network: Network
    data: BoundaryAndSourceData
    initial: dict
    solver: dict
    name: str = ""

    def to_dict(self):
        out = self.network.to_dict()
        out["data"] = self.data.to_dict(self.network)
        out["initial"] = self.initial
        out["solver"] = self.solver
        return out


def scenario_from_dict(spec, name=""):
    net = build_network(spec)
    data = build_data(net, spec.get("data"))
    initial = spec.get("initial") or {}
    for eid in (initial.get("p") or {}):
        net.edge_index(eid)
    m = initial.get("m")
    if isinstance(m, dict) and "kind" not in m:
        for eid in m:
            net.edge_index(eid)
    return Scenario(net, data, initial, dict(spec.get("solver") or {}), name or spec.get("name", ""))


BUILTIN = ("fig1-network", "single-pipe")


def load_scenario(path_or_name):
    """Load a built-in scenario by name or a JSON file by path."""
    if path_or_name in BUILTIN:
        text = resources.files("netpdae").joinpath("scenarios", f"{path_or_name}.json").read_text()
        return scenario_from_dict(json.loads(text), path_or_name)
    with open(path_or_name) as fh:
        return scenario_from_dict(json.load(fh), str(path_or_name))


def dump_scenario(scn, path):
    with open(path, "w") as fh:
        json.dump(scn.to_dict(), fh, indent=2)
