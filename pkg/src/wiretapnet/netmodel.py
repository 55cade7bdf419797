"""Networks of wiretap channels and their JSON description format.

Nodes are labelled ``1..m``. An edge ``(tail, head, index)`` is the
index-th channel from ``tail`` to ``head`` and carries either a noisy
:class:`~wiretapnet.channelmath.WiretapChannel` or a noiseless pipe with
exact confidential and public rates.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Iterable, Mapping, NamedTuple, Union

from .channelmath import DEFAULT_TOL, StochasticMatrix, WiretapChannel, blahut_arimoto
from .errors import ParseError, PreconditionError, StructuralError


class EdgeId(NamedTuple):
    tail: int
    head: int
    index: int

    @property
    def ref(self) -> str:
        return f"{self.tail}-{self.head}-{self.index}"

    @classmethod
    def parse(cls, ref: str) -> EdgeId:
        try:
            t, h, k = (int(x) for x in ref.split("-"))
        except ValueError:
            raise ParseError(f"bad edge reference {ref!r}; expected 'tail-head-index'") from None
        return cls(t, h, k)


@dataclass(frozen=True)
class Noisy:
    channel: WiretapChannel


@dataclass(frozen=True)
class Noiseless:
    """Noiseless pipe: ``rc`` bits/use to the head only, ``rp`` bits/use to
    the head and any eavesdropper on the edge."""

    rc: Fraction
    rp: Fraction

    def __post_init__(self):
        rc, rp = Fraction(self.rc), Fraction(self.rp)
        if rc < 0 or rp < 0:
            raise StructuralError(f"rates must be non-negative, got rc={rc}, rp={rp}")
        object.__setattr__(self, "rc", rc)
        object.__setattr__(self, "rp", rp)

    @property
    def total(self) -> Fraction:
        return self.rc + self.rp

    @property
    def is_placeholder(self) -> bool:
        return self.total == 0


EdgeModel = Union[Noisy, Noiseless]


@dataclass(frozen=True)
class Demand:
    source: int
    sinks: frozenset[int]

    def __post_init__(self):
        object.__setattr__(self, "sinks", frozenset(self.sinks))
        if not self.sinks:
            raise StructuralError("a demand needs at least one sink")
        if self.source in self.sinks:
            raise StructuralError(f"source {self.source} cannot be one of its own sinks")

    @property
    def kind(self) -> str:
        return "multicast" if len(self.sinks) > 1 else "unicast"


@dataclass(frozen=True)
class HyperEdge:
    """Noiseless hyperarc delivering the same ``capacity`` bits/use to every head."""

    tail: int
    heads: tuple[int, ...]
    capacity: Fraction
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "heads", tuple(self.heads))
        object.__setattr__(self, "capacity", Fraction(self.capacity))
        if not self.heads:
            raise StructuralError("hyperedge needs at least one head")
        if self.tail in self.heads:
            raise StructuralError(f"hyperedge {self.name!r}: tail {self.tail} is also a head")
        if self.capacity < 0:
            raise StructuralError(f"hyperedge {self.name!r}: negative capacity")


@dataclass(frozen=True)
class Network:
    """Directed multigraph of wiretap channels plus communication demands.

    Treat instances as immutable; rewrites return new networks.
    """

    num_nodes: int
    edges: Mapping[EdgeId, EdgeModel] = field(default_factory=dict)
    demands: tuple[Demand, ...] = ()
    names: Mapping[EdgeId, str] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "edges", dict(sorted(self.edges.items())))
        object.__setattr__(self, "demands", tuple(self.demands))
        object.__setattr__(self, "names", {e: n for e, n in sorted(self.names.items())})
        m = self.num_nodes
        for e in self.edges:
            if not (1 <= e.tail <= m and 1 <= e.head <= m):
                raise StructuralError(f"edge {e.ref}: endpoint outside 1..{m}")
            if e.tail == e.head:
                raise StructuralError(f"edge {e.ref}: self loop")
            if e.index < 1:
                raise StructuralError(f"edge {e.ref}: index must be positive")
        for d in self.demands:
            for v in (d.source, *d.sinks):
                if not 1 <= v <= m:
                    raise StructuralError(f"demand node {v} outside 1..{m}")
        for e in self.names:
            if e not in self.edges:
                raise StructuralError(f"name given for unknown edge {e.ref}")
        if len(set(self.names.values())) != len(self.names):
            raise StructuralError("edge names must be unique")

    @property
    def nodes(self) -> range:
        return range(1, self.num_nodes + 1)

    def label(self, e: EdgeId) -> str:
        return self.names.get(e, e.ref)

    def resolve(self, ref: str | EdgeId) -> EdgeId:
        """Edge by ``EdgeId``, ``'tail-head-index'`` or display name."""
        if isinstance(ref, EdgeId):
            e = ref
        else:
            by_name = {n: e for e, n in self.names.items()}
            e = by_name[ref] if ref in by_name else EdgeId.parse(ref)
        if e not in self.edges:
            raise PreconditionError(f"no edge {ref!r} in network")
        return e

    def out_edges(self, i: int) -> list[EdgeId]:
        return [e for e in self.edges if e.tail == i]

    def in_edges(self, i: int) -> list[EdgeId]:
        return [e for e in self.edges if e.head == i]

    def with_edge(self, e: EdgeId, model: EdgeModel) -> Network:
        edges = dict(self.edges)
        edges[e] = model
        return replace(self, edges=edges)

    @property
    def is_noiseless(self) -> bool:
        return all(isinstance(m, Noiseless) for m in self.edges.values())

    @property
    def noisy_edges(self) -> list[EdgeId]:
        return [e for e, m in self.edges.items() if isinstance(m, Noisy)]

    @property
    def placeholder_edges(self) -> list[EdgeId]:
        """Noiseless edges of total rate 0 (kept in the model, flagged)."""
        return [e for e, m in self.edges.items() if isinstance(m, Noiseless) and m.is_placeholder]

    def topological_order(self) -> list[int]:
        """Kahn's algorithm, smallest ready node first."""
        indeg = {v: 0 for v in self.nodes}
        for e in self.edges:
            indeg[e.head] += 1
        ready = sorted(v for v, d in indeg.items() if d == 0)
        order = []
        while ready:
            v = ready.pop(0)
            order.append(v)
            for e in self.out_edges(v):
                indeg[e.head] -= 1
                if indeg[e.head] == 0:
                    ready.append(e.head)
                    ready.sort()
        if len(order) != self.num_nodes:
            raise PreconditionError("network has a directed cycle")
        return order


@dataclass(frozen=True)
class AdversarySet:
    """Family of edge sets; the eavesdropper taps any one of them."""

    sets: tuple[frozenset[EdgeId], ...] = ()

    def __post_init__(self):
        canon = []
        for s in self.sets:
            s = frozenset(s)
            if not s:
                raise StructuralError("adversary sets must be non-empty")
            if s not in canon:
                canon.append(s)
        canon.sort(key=lambda s: sorted(s))
        object.__setattr__(self, "sets", tuple(canon))

    def __len__(self) -> int:
        return len(self.sets)

    def __iter__(self):
        return iter(self.sets)

    def validate(self, net: Network) -> None:
        for s in self.sets:
            for e in s:
                if e not in net.edges:
                    raise StructuralError(f"adversary set references unknown edge {e.ref}")

    def containing(self, e: EdgeId) -> list[frozenset[EdgeId]]:
        return [s for s in self.sets if e in s]

    def without_edge(self, e: EdgeId) -> AdversarySet:
        """``{E - {e} : E in A}`` with empty sets dropped."""
        return AdversarySet(tuple(s - {e} for s in self.sets if s - {e}))


class Touching(enum.Enum):
    INVULNERABLE = "invulnerable"
    ALONE_ONLY = "alone_only"
    JOINT = "joint"


def adversary_touching(adv: AdversarySet, e: EdgeId) -> Touching:
    sets = adv.containing(e)
    if not sets:
        return Touching.INVULNERABLE
    if all(len(s) == 1 for s in sets):
        return Touching.ALONE_ONLY
    return Touching.JOINT


# ------------------------------------------------------------- capacities


def edge_capacities(model: EdgeModel, tol: float = DEFAULT_TOL) -> tuple[float, float]:
    """``(max I(X;Y), max I(X;Z))`` of a single edge."""
    from .channelmath import compose_degraded

    if isinstance(model, Noiseless):
        return float(model.total), float(model.rp)
    cap_main, _ = blahut_arimoto(model.channel.forward, tol=tol)
    cap_eave, _ = blahut_arimoto(compose_degraded(model.channel), tol=tol)
    return cap_main, cap_eave


def key_capacity(net: Network, i: int, tol: float = DEFAULT_TOL) -> float:
    """Sum of the capacities of the channels leaving node ``i`` (bits/use).

    This is the rate of the node's private randomization key.
    """
    if i not in net.nodes:
        raise PreconditionError(f"node {i} not in network")
    return sum(edge_capacities(net.edges[e], tol)[0] for e in net.out_edges(i))


# ------------------------------------------------------------ parse/dump

_TOP_KEYS = {"nodes", "edges", "adversary", "demands"}
_EDGE_KEYS = {"tail", "head", "index", "model", "name"}
_NOISY_KEYS = {"type", "forward", "degrading"}
_NOISELESS_KEYS = {"type", "rc", "rp"}
_DEMAND_KEYS = {"source", "sinks"}


def parse_rational(s) -> Fraction:
    if isinstance(s, bool) or not isinstance(s, (str, int)):
        raise ValueError(f"rational must be a string 'a/b', got {s!r}")
    return Fraction(s)


def format_rational(r: Fraction) -> str:
    r = Fraction(r)
    return f"{r.numerator}/{r.denominator}"


def _check_keys(obj, allowed: set[str], where: str, required: Iterable[str] = ()):
    if not isinstance(obj, dict):
        raise ParseError(f"{where}: expected an object")
    unknown = set(obj) - allowed
    if unknown:
        raise ParseError(f"{where}: unknown key(s) {sorted(unknown)}")
    missing = [k for k in required if k not in obj]
    if missing:
        raise ParseError(f"{where}: missing key(s) {missing}")


def _int(v, where: str) -> int:
    if isinstance(v, bool) or not isinstance(v, int):
        raise ParseError(f"{where}: expected an integer, got {v!r}")
    return v


def _parse_model(obj, where: str) -> EdgeModel:
    if not isinstance(obj, dict) or "type" not in obj:
        raise ParseError(f"{where}: model needs a 'type'")
    kind = obj["type"]
    if kind == "noisy":
        _check_keys(obj, _NOISY_KEYS, where, ["forward", "degrading"])
        try:
            return Noisy(WiretapChannel(StochasticMatrix(obj["forward"]), StochasticMatrix(obj["degrading"])))
        except (StructuralError, ValueError, TypeError) as exc:
            raise ParseError(f"{where}: {exc}") from None
    if kind == "noiseless":
        _check_keys(obj, _NOISELESS_KEYS, where, ["rc", "rp"])
        try:
            return Noiseless(parse_rational(obj["rc"]), parse_rational(obj["rp"]))
        except (StructuralError, ValueError, ZeroDivisionError) as exc:
            raise ParseError(f"{where}: {exc}") from None
    raise ParseError(f"{where}: unknown model type {kind!r}")


def network_from_dict(doc) -> tuple[Network, AdversarySet]:
    _check_keys(doc, _TOP_KEYS, "document", ["nodes"])
    m = _int(doc["nodes"], "nodes")
    if m < 0:
        raise ParseError("nodes: must be non-negative")
    edges: dict[EdgeId, EdgeModel] = {}
    names: dict[EdgeId, str] = {}
    for pos, ed in enumerate(doc.get("edges", [])):
        _check_keys(ed, _EDGE_KEYS, f"edges[{pos}]", ["tail", "head", "index", "model"])
        e = EdgeId(_int(ed["tail"], "tail"), _int(ed["head"], "head"), _int(ed["index"], "index"))
        where = f"edge {ed.get('name', e.ref)}"
        if not (1 <= e.tail <= m and 1 <= e.head <= m):
            raise ParseError(f"{where}: unknown node (nodes are 1..{m})")
        if e.tail == e.head or e.index < 1:
            raise ParseError(f"{where}: self loop or non-positive index")
        if e in edges:
            raise ParseError(f"{where}: duplicate edge")
        edges[e] = _parse_model(ed["model"], where)
        if "name" in ed:
            if not isinstance(ed["name"], str) or not ed["name"]:
                raise ParseError(f"{where}: name must be a non-empty string")
            if ed["name"] in names.values():
                raise ParseError(f"{where}: duplicate name")
            names[e] = ed["name"]
    demands = []
    for pos, d in enumerate(doc.get("demands", [])):
        _check_keys(d, _DEMAND_KEYS, f"demands[{pos}]", ["source", "sinks"])
        try:
            dem = Demand(_int(d["source"], "source"), frozenset(_int(s, "sink") for s in d["sinks"]))
        except StructuralError as exc:
            raise ParseError(f"demands[{pos}]: {exc}") from None
        for v in (dem.source, *dem.sinks):
            if not 1 <= v <= m:
                raise ParseError(f"demands[{pos}]: unknown node {v}")
        demands.append(dem)
    net = Network(m, edges, tuple(demands), names)
    by_name = {n: e for e, n in names.items()}
    sets = []
    for pos, s in enumerate(doc.get("adversary", [])):
        if not isinstance(s, list) or not s:
            raise ParseError(f"adversary[{pos}]: expected a non-empty list of edge references")
        members = set()
        for ref in s:
            if not isinstance(ref, str):
                raise ParseError(f"adversary[{pos}]: edge references are strings")
            e = by_name.get(ref) or EdgeId.parse(ref)
            if e not in edges:
                raise ParseError(f"adversary[{pos}]: unknown edge {ref!r}")
            members.add(e)
        sets.append(frozenset(members))
    return net, AdversarySet(tuple(sets))


def parse_network(text: str) -> tuple[Network, AdversarySet]:
    """Parse a network description document (JSON)."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, exc.lineno, exc.colno) from None
    return network_from_dict(doc)


def load_network(path) -> tuple[Network, AdversarySet]:
    with open(path, encoding="utf-8") as fh:
        return parse_network(fh.read())


def model_to_dict(model: EdgeModel) -> dict:
    if isinstance(model, Noiseless):
        return {"type": "noiseless", "rc": format_rational(model.rc), "rp": format_rational(model.rp)}
    return {
        "type": "noisy",
        "forward": model.channel.forward.tolist(),
        "degrading": model.channel.degrading.tolist(),
    }


def network_to_dict(net: Network, adv: AdversarySet = AdversarySet()) -> dict:
    edges = []
    for e, model in net.edges.items():
        ed = {"tail": e.tail, "head": e.head, "index": e.index}
        if e in net.names:
            ed["name"] = net.names[e]
        ed["model"] = model_to_dict(model)
        edges.append(ed)
    return {
        "nodes": net.num_nodes,
        "edges": edges,
        "adversary": [sorted(net.label(e) for e in s) for s in adv.sets],
        "demands": [{"source": d.source, "sinks": sorted(d.sinks)} for d in net.demands],
    }


def serialize_network(net: Network, adv: AdversarySet = AdversarySet()) -> str:
    return json.dumps(network_to_dict(net, adv), indent=2)


# ------------------------------------------------------------------ dot


def export_dot(net: Network, adv: AdversarySet = AdversarySet()) -> str:
    """Graphviz rendering. Rate-0 pipes are omitted."""
    lines = ["digraph network {", "  rankdir=LR;"]
    for v in net.nodes:
        lines.append(f"  {v};")
    for e, model in net.edges.items():
        if isinstance(model, Noiseless):
            if model.is_placeholder:
                continue
            label = f"{net.label(e)}: c={model.rc},p={model.rp}"
        else:
            ch = model.channel
            label = f"{net.label(e)}: noisy {ch.forward.n_inputs}->{ch.forward.n_outputs}->{ch.degrading.n_outputs}"
        taps = ["{" + ",".join(sorted(net.label(x) for x in s)) + "}" for s in adv.containing(e)]
        if taps:
            label += " tapped by " + " ".join(taps)
        lines.append(f'  {e.tail} -> {e.head} [label="{label}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"
