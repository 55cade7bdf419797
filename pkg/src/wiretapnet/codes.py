"""Exact evaluation of block codes on noiseless wiretap networks.

A code of blocklength ``n`` over GF(q) sends ``floor(rate * n / log2 q)``
symbols on each confidential or public pipe. Messages ``W`` and keys ``T``
are uniform and independent. For linear codes every observed symbol is a
fixed combination of ``(W, T)``, so

* a node recovers ``W`` iff ``rank([C|D]) - rank(D) = k`` for its view
  ``C W + D T``, and
* an eavesdropper seeing ``A W + B T`` learns
  ``(rank([A|B]) - rank(B)) log2 q`` bits.

:class:`TableCode` evaluates the same quantities by brute-force
enumeration of the joint distribution, and works for non-linear codes.
"""

from __future__ import annotations

import json
import re
import math
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping

import numpy as np

from . import gf
from .errors import BudgetError, PreconditionError, StructuralError
from .netmodel import AdversarySet, Demand, EdgeId, Network, Noiseless, key_capacity
from .transform import EnhancedNetwork

ENUMERATION_BUDGET = 2**24


def symbol_budget(rate, n: int, q: int) -> int:
    """Largest ``s`` with ``q**s <= 2**(rate*n)``."""
    x = Fraction(rate) * n
    if x < 0:
        raise StructuralError("negative rate")
    if q == 2:
        return math.floor(x)
    s = math.floor(float(x) / math.log2(q)) + 1
    while s > 0 and q ** (s * x.denominator) > 2**x.numerator:
        s -= 1
    return s


def conf_link(e: EdgeId) -> str:
    return f"conf:{e.ref}"


def pub_link(e: EdgeId) -> str:
    return f"pub:{e.ref}"


@dataclass(frozen=True)
class SymbolSpace:
    field_size: int
    message_dims: int
    key_dims: Mapping[int, int]
    blocklength: int

    def __post_init__(self):
        gf.check_field(self.field_size)
        if self.message_dims < 0 or self.blocklength < 1:
            raise StructuralError("need message_dims >= 0 and blocklength >= 1")
        object.__setattr__(self, "key_dims", {int(k): int(v) for k, v in sorted(self.key_dims.items()) if v})

    @property
    def num_keys(self) -> int:
        return sum(self.key_dims.values())

    @property
    def num_vars(self) -> int:
        return self.message_dims + self.num_keys


@dataclass(frozen=True)
class Link:
    name: str
    tail: int
    heads: tuple[int, ...]
    size: int


@dataclass(frozen=True)
class CodingProblem:
    """Everything needed to evaluate a linear code, independent of how the
    network was described.

    Variables are ordered messages first, then keys grouped by owning node.
    ``demands`` maps a node to the variable indices it must recover;
    ``views`` maps an eavesdropper label to the links it observes.
    """

    space: SymbolSpace
    message_origin: int
    links: tuple[Link, ...]
    demands: Mapping[int, tuple[int, ...]]
    views: Mapping[str, tuple[str, ...]] = field(default_factory=dict)

    def __post_init__(self):
        names = [lk.name for lk in self.links]
        if len(set(names)) != len(names):
            raise StructuralError("duplicate link names")
        seen = set()
        for lk in self.links:
            # a link may only be emitted once all links into its tail are known
            for other in self.links:
                if lk.tail in other.heads and other.name not in seen:
                    raise StructuralError(f"links are not in causal order at {lk.name}")
            seen.add(lk.name)

    @property
    def q(self) -> int:
        return self.space.field_size

    @property
    def k(self) -> int:
        return self.space.message_dims

    def var_origin(self) -> list[int]:
        origin = [self.message_origin] * self.k
        for node, t in self.space.key_dims.items():
            origin += [node] * t
        return origin

    def own_vars(self, node: int) -> list[int]:
        return [i for i, o in enumerate(self.var_origin()) if o == node]

    def incoming(self, node: int) -> list[Link]:
        return [lk for lk in self.links if node in lk.heads]

    def input_size(self, node: int) -> int:
        return len(self.own_vars(node)) + sum(lk.size for lk in self.incoming(node))

    def link(self, name: str) -> Link:
        for lk in self.links:
            if lk.name == name:
                return lk
        raise KeyError(name)


@dataclass(frozen=True, eq=False)
class LinearNetworkCode:
    """Per-link local encoding matrices over GF(q).

    ``local[name]`` has one row per symbol of the link and one column per
    input of the link's tail: the tail's own variables (messages, then
    keys) followed by the symbols of its incoming links in link order.
    Missing links send zeros.
    """

    space: SymbolSpace
    local: Mapping[str, np.ndarray]

    def __post_init__(self):
        q = self.space.field_size
        object.__setattr__(self, "local", {k: gf.as_matrix(v, q) for k, v in self.local.items()})

    def matrix(self, problem: CodingProblem, lk: Link) -> np.ndarray:
        cols = problem.input_size(lk.tail)
        M = self.local.get(lk.name)
        if M is None:
            return np.zeros((lk.size, cols), dtype=np.int64)
        if M.shape != (lk.size, cols) and not (M.size == 0 and lk.size == 0):
            raise StructuralError(
                f"link {lk.name}: local matrix is {M.shape[0]}x{M.shape[1]}, budget needs {lk.size}x{cols}"
            )
        return M.reshape(lk.size, cols)

    def serialization(self) -> tuple:
        return tuple((k, tuple(map(tuple, v.tolist()))) for k, v in sorted(self.local.items()))


def check_dimensions(problem: CodingProblem, code: LinearNetworkCode) -> None:
    known = {lk.name for lk in problem.links}
    extra = set(code.local) - known
    if extra:
        raise StructuralError(f"code has matrices for unknown links {sorted(extra)}")
    for lk in problem.links:
        code.matrix(problem, lk)


def global_vectors(problem: CodingProblem, code: LinearNetworkCode) -> dict[str, np.ndarray]:
    """Each link's symbols as rows over the variables ``(W, T)``."""
    if code.space != problem.space:
        raise StructuralError("code and problem use different symbol spaces")
    check_dimensions(problem, code)
    q, nv = problem.q, problem.space.num_vars
    eye = np.eye(nv, dtype=np.int64)
    out: dict[str, np.ndarray] = {}
    for lk in problem.links:
        rows = [eye[problem.own_vars(lk.tail)]] + [out[x.name] for x in problem.incoming(lk.tail)]
        inputs = np.vstack(rows) if rows else np.zeros((0, nv), dtype=np.int64)
        out[lk.name] = (code.matrix(problem, lk) @ inputs) % q
    return out


def code_from_global(problem: CodingProblem, vectors: Mapping[str, np.ndarray]) -> LinearNetworkCode:
    """Local matrices realising prescribed global vectors.

    Raises :class:`PreconditionError` if some vector is not a combination of
    what its tail can see.
    """
    q, nv = problem.q, problem.space.num_vars
    eye = np.eye(nv, dtype=np.int64)
    glob: dict[str, np.ndarray] = {}
    local = {}
    for lk in problem.links:
        target = gf.as_matrix(vectors.get(lk.name, np.zeros((lk.size, nv))), q, ncols=nv)
        if target.shape[0] != lk.size:
            raise StructuralError(f"link {lk.name}: {target.shape[0]} vectors for {lk.size} symbols")
        rows = [eye[problem.own_vars(lk.tail)]] + [glob[x.name] for x in problem.incoming(lk.tail)]
        inputs = np.vstack(rows)
        M = np.zeros((lk.size, inputs.shape[0]), dtype=np.int64)
        for r in range(lk.size):
            c = gf.solve_left(inputs, target[r], q)
            if c is None:
                raise PreconditionError(f"link {lk.name}: symbol {r} is not available at node {lk.tail}")
            M[r] = c
        local[lk.name] = M
        glob[lk.name] = target
    return LinearNetworkCode(problem.space, local)


# ---------------------------------------------------------------- oracles


def leakage_rank(A, B, q: int = 2) -> float:
    """Bits about ``W`` revealed by the view ``A W + B T``."""
    A = gf.as_matrix(A, q)
    B = gf.as_matrix(B, q)
    if A.shape[0] != B.shape[0]:
        raise StructuralError(f"A has {A.shape[0]} rows but B has {B.shape[0]}")
    return (gf.rank(np.hstack([A, B]), q) - gf.rank(B, q)) * math.log2(q)


def decodable(C, D, k: int, q: int = 2) -> bool:
    """Whether all ``k`` message symbols follow from the view ``C W + D T``."""
    C = gf.as_matrix(C, q)
    D = gf.as_matrix(D, q)
    if C.shape[0] != D.shape[0]:
        raise StructuralError(f"C has {C.shape[0]} rows but D has {D.shape[0]}")
    return gf.rank(np.hstack([C, D]), q) - gf.rank(D, q) == k


def _recoverable(rows: np.ndarray, wanted, q: int) -> int:
    """Number of independent combinations of the ``wanted`` variables the
    row space pins down."""
    rest = [j for j in range(rows.shape[1]) if j not in set(wanted)]
    return gf.rank(rows, q) - gf.rank(rows[:, rest], q)


@dataclass(frozen=True, eq=False)
class TableCode:
    """A code given by explicit tables.

    Inputs are indexed ``w * key_alphabet + t``; ``symbols[name]`` holds,
    for every input, the tuple of values on that link.
    """

    message_alphabet: int
    key_alphabet: int
    symbols: Mapping[str, np.ndarray]
    budget: int = ENUMERATION_BUDGET

    def __post_init__(self):
        size = self.message_alphabet * self.key_alphabet
        if size > self.budget:
            raise BudgetError(
                f"input space of {size} exceeds enumeration budget {self.budget}; use the rank oracle"
            )
        syms = {}
        for name, arr in self.symbols.items():
            a = np.asarray(arr, dtype=np.int64)
            if a.ndim == 1:
                a = a[:, None]
            if a.shape[0] != size:
                raise StructuralError(f"table {name} has {a.shape[0]} rows, expected {size}")
            syms[name] = a
        object.__setattr__(self, "symbols", syms)

    @classmethod
    def from_matrices(cls, A, B, q: int = 2, name: str = "view", budget: int = ENUMERATION_BUDGET) -> TableCode:
        """Table of the single link ``A W + B T``."""
        A, B = gf.as_matrix(A, q), gf.as_matrix(B, q)
        k, t = A.shape[1], B.shape[1]
        _check_budget(q ** (k + t), budget)
        W = _all_inputs(k, t, q)
        vals = (W @ np.hstack([A, B]).T) % q
        return cls(q**k, q**t, {name: vals}, budget)

    @classmethod
    def from_linear(cls, problem: CodingProblem, code: LinearNetworkCode, budget: int = ENUMERATION_BUDGET) -> TableCode:
        q, k, t = problem.q, problem.k, problem.space.num_keys
        _check_budget(q ** (k + t), budget)
        X = _all_inputs(k, t, q)
        g = global_vectors(problem, code)
        syms = {name: (X @ M.T) % q if M.size else np.zeros((X.shape[0], 0), dtype=np.int64) for name, M in g.items()}
        return cls(q**k, q**t, syms, budget)

    @property
    def size(self) -> int:
        return self.message_alphabet * self.key_alphabet

    def observe(self, links) -> list[tuple]:
        cols = [self.symbols[name] for name in links]
        if not cols:
            return [()] * self.size
        joined = np.hstack(cols)
        return [tuple(r) for r in joined.tolist()]

    def messages(self) -> np.ndarray:
        return np.arange(self.size) // self.key_alphabet

    def map_decoder(self, links) -> dict[tuple, int]:
        """Maximum a-posteriori message for every observed value."""
        counts: dict[tuple, Counter] = defaultdict(Counter)
        for w, v in zip(self.messages().tolist(), self.observe(links)):
            counts[v][w] += 1
        return {v: min(c, key=lambda w: (-c[w], w)) for v, c in counts.items()}


def _check_budget(size: int, budget: int) -> None:
    if size > budget:
        raise BudgetError(f"input space of {size} exceeds enumeration budget {budget}; use the rank oracle")


def _all_inputs(k: int, t: int, q: int) -> np.ndarray:
    n = k + t
    idx = np.arange(q**n)
    digits = [(idx // q ** (n - 1 - j)) % q for j in range(n)]
    return np.stack(digits, axis=1) if n else np.zeros((1, 0), dtype=np.int64)


def leakage_enumeration(code: TableCode, view) -> float:
    """Exact I(W; view) in bits by tabulating the joint distribution."""
    ws = code.messages().tolist()
    vs = code.observe(view)
    N = code.size
    joint = Counter(zip(ws, vs))
    pw = Counter(ws)
    pv = Counter(vs)
    if all(c * N == pw[w] * pv[v] for (w, v), c in joint.items()) and len(joint) == len(pw) * len(pv):
        return 0.0
    total = 0.0
    for (w, v), c in joint.items():
        total += c / N * math.log2(c * N / (pw[w] * pv[v]))
    return max(total, 0.0)


def decoding_error_enumeration(code: TableCode, links) -> Fraction:
    """Exact error probability of the MAP decoder on the given links."""
    dec = code.map_decoder(links)
    wrong = sum(1 for w, v in zip(code.messages().tolist(), code.observe(links)) if dec[v] != w)
    return Fraction(wrong, code.size)


# ------------------------------------------------------- network problems


def network_problem(
    net: Network,
    adv: AdversarySet,
    demand: Demand,
    space: SymbolSpace,
) -> CodingProblem:
    """Coding problem of a noiseless network for one single-source demand."""
    if not net.is_noiseless:
        bad = ", ".join(net.label(e) for e in net.noisy_edges)
        raise PreconditionError(f"exact evaluation needs a noiseless network; noisy edges: {bad}")
    adv.validate(net)
    n, q = space.blocklength, space.field_size
    links = []
    for v in net.topological_order():
        for e in net.out_edges(v):
            model = net.edges[e]
            links.append(Link(conf_link(e), e.tail, (e.head,), symbol_budget(model.rc, n, q)))
            links.append(Link(pub_link(e), e.tail, (e.head,), symbol_budget(model.rp, n, q)))
    demands = {s: tuple(range(space.message_dims)) for s in sorted(demand.sinks)}
    views = {_set_label(net, E): tuple(pub_link(e) for e in sorted(E)) for E in adv.sets}
    return CodingProblem(space, demand.source, tuple(links), demands, views)


def _set_label(net: Network, E) -> str:
    return "{" + ",".join(sorted(net.label(e) for e in E)) + "}"


def default_key_dims(net: Network, n: int, q: int) -> dict[int, int]:
    return {i: symbol_budget(Fraction(key_capacity(net, i)).limit_denominator(1 << 20), n, q) for i in net.nodes}


def eavesdropper_view(net: Network, adv_set, code: LinearNetworkCode, demand: Demand | None = None) -> dict[str, np.ndarray]:
    """Public symbols of the tapped edges, as rows over ``(W, T)``."""
    for e in adv_set:
        if e not in net.edges:
            raise PreconditionError(f"unknown edge {e.ref}")
        if not isinstance(net.edges[e], Noiseless):
            raise PreconditionError(f"edge {net.label(e)} is noisy; exact views need noiseless edges")
    demand = demand or net.demands[0]
    problem = network_problem(net, AdversarySet(), demand, code.space)
    g = global_vectors(problem, code)
    return {pub_link(e): g[pub_link(e)] for e in sorted(adv_set) if g[pub_link(e)].shape[0]}


def node_view(problem: CodingProblem, g: Mapping[str, np.ndarray], node: int) -> np.ndarray:
    nv = problem.space.num_vars
    eye = np.eye(nv, dtype=np.int64)
    rows = [eye[problem.own_vars(node)]] + [g[lk.name] for lk in problem.incoming(node)]
    return np.vstack(rows) if rows else np.zeros((0, nv), dtype=np.int64)


def view_rows(g: Mapping[str, np.ndarray], links, nv: int) -> np.ndarray:
    rows = [g[name] for name in links]
    return np.vstack(rows) if rows else np.zeros((0, nv), dtype=np.int64)


@dataclass(frozen=True)
class SecurityReport:
    rate: float
    decoding_error: Mapping[int, Fraction]
    leakage: Mapping[str, float]
    message_entropy: float

    @property
    def is_secure_and_reliable(self) -> bool:
        return all(v == 0 for v in self.decoding_error.values()) and all(v == 0 for v in self.leakage.values())

    def to_dict(self) -> dict:
        return {
            "rate": self.rate,
            "decoding_error": {str(k): str(v) for k, v in self.decoding_error.items()},
            "leakage_bits": dict(self.leakage),
            "message_entropy_bits": self.message_entropy,
        }


def evaluate_problem(problem: CodingProblem, code: LinearNetworkCode, method: str = "rank") -> SecurityReport:
    """Decoding error of each demand and leakage of each view.

    ``method`` is ``"rank"`` (any size) or ``"enumeration"`` (tables).
    """
    q, k, nv = problem.q, problem.k, problem.space.num_vars
    n = problem.space.blocklength
    g = global_vectors(problem, code)
    errors: dict[int, Fraction] = {}
    leak: dict[str, float] = {}
    if method == "rank":
        for node, wanted in problem.demands.items():
            got = _recoverable(node_view(problem, g, node), wanted, q)
            errors[node] = 1 - Fraction(1, q ** (len(wanted) - got))
        for label, links in problem.views.items():
            rows = view_rows(g, links, nv)
            leak[label] = leakage_rank(rows[:, :k], rows[:, k:], q)
    elif method == "enumeration":
        table = TableCode.from_linear(problem, code)
        for node, wanted in problem.demands.items():
            if list(wanted) != list(range(k)):
                raise PreconditionError("enumeration decodes messages only")
            links = [lk.name for lk in problem.incoming(node)]
            if problem.own_vars(node):
                raise PreconditionError("enumeration ignores a sink's own keys")
            errors[node] = decoding_error_enumeration(table, links)
        for label, links in problem.views.items():
            leak[label] = leakage_enumeration(table, links)
    else:
        raise ValueError(f"unknown method {method!r}")
    return SecurityReport(
        rate=k * math.log2(q) / n,
        decoding_error=errors,
        leakage=leak,
        message_entropy=k * math.log2(q),
    )


def evaluate_code(
    net: Network,
    adv: AdversarySet,
    demand: Demand,
    code: LinearNetworkCode,
    method: str = "rank",
) -> SecurityReport:
    """Exact rate, per-sink decoding error and per-set leakage of ``code``."""
    return evaluate_problem(network_problem(net, adv, demand, code.space), code, method)


# ------------------------------------------------------------ code files


def _matrix_rows(obj, where: str) -> np.ndarray:
    if not isinstance(obj, list) or not all(isinstance(r, list) for r in obj):
        raise StructuralError(f"{where}: expected a list of rows")
    return np.array(obj, dtype=np.int64) if obj and obj[0] else np.zeros((len(obj), 0), dtype=np.int64)


def code_from_dict(doc: dict, net: Network | None = None) -> tuple[LinearNetworkCode, Demand | None]:
    """Read a code document.

    Edge codes list ``edges: {ref: {"conf": rows, "pub": rows}}`` where
    ``ref`` is ``tail-head-index`` or an edge name. Enhanced-network codes
    list ``hyperedges: {name: rows}``.
    """
    allowed = {"field", "blocklength", "message_symbols", "keys", "demand", "edges", "hyperedges"}
    unknown = set(doc) - allowed
    if unknown:
        raise StructuralError(f"code document: unknown key(s) {sorted(unknown)}")
    space = SymbolSpace(
        field_size=int(doc.get("field", 2)),
        message_dims=int(doc["message_symbols"]),
        key_dims={int(k): int(v) for k, v in doc.get("keys", {}).items()},
        blocklength=int(doc["blocklength"]),
    )
    local = {}
    for ref, kinds in doc.get("edges", {}).items():
        e = net.resolve(ref) if net is not None else EdgeId.parse(ref)
        for kind, rows in kinds.items():
            if kind not in ("conf", "pub"):
                raise StructuralError(f"edge {ref}: symbol kind must be 'conf' or 'pub', got {kind!r}")
            local[f"{kind}:{e.ref}"] = _matrix_rows(rows, f"edge {ref} {kind}")
    for name, rows in doc.get("hyperedges", {}).items():
        local[name] = _matrix_rows(rows, f"hyperedge {name}")
    demand = None
    if "demand" in doc:
        demand = Demand(int(doc["demand"]["source"]), frozenset(int(s) for s in doc["demand"]["sinks"]))
    return LinearNetworkCode(space, local), demand


def code_to_dict(code: LinearNetworkCode, demand: Demand | None = None, net: Network | None = None) -> dict:
    doc = {
        "field": code.space.field_size,
        "blocklength": code.space.blocklength,
        "message_symbols": code.space.message_dims,
        "keys": {str(k): v for k, v in code.space.key_dims.items()},
    }
    if demand is not None:
        doc["demand"] = {"source": demand.source, "sinks": sorted(demand.sinks)}
    edges: dict[str, dict] = {}
    hyper: dict[str, list] = {}
    for name, M in sorted(code.local.items()):
        if M.shape[0] == 0:
            continue
        kind, _, ref = name.partition(":")
        rows = M.tolist()
        if kind in ("conf", "pub") and net is not None and EdgeId.parse(ref) in net.edges:
            edges.setdefault(net.label(EdgeId.parse(ref)), {})[kind] = rows
        else:
            hyper[name] = rows
    if edges:
        doc["edges"] = edges
    if hyper:
        doc["hyperedges"] = hyper
    return doc


def dump_code(code: LinearNetworkCode, demand: Demand | None = None, net: Network | None = None) -> str:
    """JSON text with one matrix row per line."""
    text = json.dumps(code_to_dict(code, demand, net), indent=2)
    return re.sub(r"\[\s*(-?\d+(?:,\s*-?\d+)*)\s*\]", lambda m: "[" + ", ".join(x.strip() for x in m.group(1).split(",")) + "]", text)


def load_code(path, net: Network | None = None):
    with open(path, encoding="utf-8") as fh:
        return code_from_dict(json.load(fh), net)


# ------------------------------------------------------ enhanced networks


def enhanced_key_dims(enh: EnhancedNetwork, n: int, q: int) -> dict[int, int]:
    """Key symbols held by each key node: the whole key alphabet of its owner."""
    return {enh.key_node(i): symbol_budget(c, n, q) for i, c in enh.key_capacity.items()}


def enhanced_space(enh: EnhancedNetwork, k: int, n: int, q: int = 2) -> SymbolSpace:
    return SymbolSpace(q, k, enhanced_key_dims(enh, n, q), n)


def enhanced_problem(enh: EnhancedNetwork, space: SymbolSpace, demand: Demand | None = None) -> CodingProblem:
    """Plain (non-secure) multicast problem on the enhanced network.

    Sinks and every eavesdropper node want the messages; eavesdropper nodes
    also want every key.
    """
    import networkx as nx

    demand = demand or enh.original.demands[0]
    g = nx.DiGraph()
    g.add_nodes_from(enh.roles)
    for h in enh.hyperedges:
        g.add_edges_from((h.tail, v) for v in h.heads)
    try:
        order = {v: i for i, v in enumerate(nx.lexicographical_topological_sort(g))}
    except nx.NetworkXUnfeasible:
        raise PreconditionError("enhanced network has a cycle") from None
    n, q = space.blocklength, space.field_size
    hyper = sorted(enumerate(enh.hyperedges), key=lambda ih: (order[ih[1].tail], ih[0]))
    links = tuple(Link(h.name, h.tail, tuple(h.heads), symbol_budget(h.capacity, n, q)) for _, h in hyper)
    k = space.message_dims
    msgs = tuple(range(k))
    everything = tuple(range(space.num_vars))
    demands = {t: msgs for t in sorted(demand.sinks)}
    for E in enh.adversary.sets:
        demands[enh.eavesdropper_node(E)] = everything
    return CodingProblem(space, enh.message_node(demand.source), links, demands)


@dataclass(frozen=True)
class EnhancedReport:
    rate_messages: float
    rate_keys: float
    decodes: Mapping[int, bool]
    report: SecurityReport

    @property
    def all_demands_met(self) -> bool:
        return all(self.decodes.values())

    def to_dict(self) -> dict:
        return {
            "rate_messages": self.rate_messages,
            "rate_keys": self.rate_keys,
            "decodes": {str(k): v for k, v in self.decodes.items()},
        }


def evaluate_enhanced(enh: EnhancedNetwork, code: LinearNetworkCode, demand: Demand | None = None) -> EnhancedReport:
    """Check every demand of the enhanced network under ``code``."""
    problem = enhanced_problem(enh, code.space, demand)
    rep = evaluate_problem(problem, code)
    n, q = code.space.blocklength, code.space.field_size
    return EnhancedReport(
        rate_messages=code.space.message_dims * math.log2(q) / n,
        rate_keys=code.space.num_keys * math.log2(q) / n,
        decodes={v: err == 0 for v, err in rep.decoding_error.items()},
        report=rep,
    )
