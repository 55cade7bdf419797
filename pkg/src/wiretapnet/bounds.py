"""Secure-rate bounds for noiseless wiretap networks.

Upper side: a cut-set bound where the eavesdropper may subtract the public
rates it taps on the cut. Lower side: exhaustive search over linear codes in
a canonical form, plus the two lower-bounding pipelines for noisy networks.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import reduce
from typing import Mapping, Sequence

import numpy as np

from . import gf
from .codes import (
    CodingProblem,
    EnhancedReport,
    LinearNetworkCode,
    SecurityReport,
    SymbolSpace,
    code_from_global,
    enhanced_problem,
    enhanced_space,
    evaluate_enhanced,
    evaluate_problem,
    network_problem,
    pub_link,
    symbol_budget,
)
from .errors import KeyDeliveryError, ModelAssumptionError, PreconditionError, WiretapNetError
from .netmodel import AdversarySet, Demand, EdgeId, Network, Noiseless, Noisy
from .transform import (
    CHECK_TOL,
    QUANTUM,
    EnhancedNetwork,
    TransformRecord,
    build_a_enhanced,
    greedy_model1_order,
    maximizability,
    model1_transform,
    theorem2_transform,
    theorem3_transform,
)

DEFAULT_BUDGET = 2**26

# Published converse for the four-node erasure network. Cited, never computed.
LITERATURE_CONVERSE = {
    "value": 0.875,
    "statement": "multicast secrecy capacity of the four-node erasure network is at most 0.875",
    "source": "paper",
    "computed": False,
}


# -------------------------------------------------------------- cut bound


@dataclass(frozen=True)
class CutBoundResult:
    value: float
    exact: Fraction | None
    sink: int | None
    side: frozenset
    cut: tuple[EdgeId, ...]
    adversary_set: frozenset

    def to_dict(self, net: Network | None = None) -> dict:
        lab = net.label if net is not None else (lambda e: e.ref)
        return {
            "value": self.value,
            "exact": str(self.exact) if self.exact is not None else None,
            "witness": {
                "sink": self.sink,
                "source_side": sorted(self.side),
                "cut": [lab(e) for e in self.cut],
                "adversary_set": sorted(lab(e) for e in self.adversary_set),
            },
        }


def secure_cut_bound(net: Network, adv: AdversarySet, source: int, sinks) -> CutBoundResult:
    """Minimum over sinks, source-side node sets and tapped sets of the
    cut capacity less the public rate the eavesdropper sees on the cut."""
    if not net.is_noiseless:
        raise PreconditionError("cut bound needs a noiseless network")
    net.topological_order()
    adv.validate(net)
    choices = [frozenset()] + list(adv.sets)
    others = [v for v in net.nodes if v != source]
    best = None
    for t in sorted(sinks):
        free = [v for v in others if v != t]
        for r in range(len(free) + 1):
            for extra in itertools.combinations(free, r):
                side = frozenset((source, *extra))
                cut = tuple(e for e in net.edges if e.tail in side and e.head not in side)
                total = sum((net.edges[e].total for e in cut), Fraction(0))
                for E in choices:
                    val = total - sum((net.edges[e].rp for e in cut if e in E), Fraction(0))
                    key = (val, t, len(side), sorted(side), sorted(E))
                    if best is None or key < best[0]:
                        best = (key, CutBoundResult(float(val), val, t, side, cut, E))
    if best is None:
        return CutBoundResult(0.0, Fraction(0), None, frozenset(), (), frozenset())
    return best[1]


# ---------------------------------------------------------- vector helpers


class _GF2:
    """Vectors over GF(2) packed in ints; column 0 is the top bit so that
    integer order is lexicographic order."""

    def __init__(self, nv: int, t: int):
        self.nv = nv
        self.key_mask = (1 << t) - 1

    def unit(self, i: int) -> int:
        return 1 << (self.nv - 1 - i)

    def zero(self) -> int:
        return 0

    def key(self, v: int) -> int:
        return v & self.key_mask

    @staticmethod
    def rank(rows) -> int:
        piv: dict[int, int] = {}
        for x in rows:
            while x:
                h = x.bit_length() - 1
                if h in piv:
                    x ^= piv[h]
                else:
                    piv[h] = x
                    break
        return len(piv)

    def span(self, rows) -> list[int]:
        basis = []
        piv: dict[int, int] = {}
        for x in rows:
            while x:
                h = x.bit_length() - 1
                if h in piv:
                    x ^= piv[h]
                else:
                    piv[h] = x
                    basis.append(x)
                    break
        out = {0}
        for b in basis:
            out |= {v ^ b for v in out}
        return sorted(out)

    def combos(self, first: int, count: int) -> list[int]:
        """All vectors supported on columns ``first .. first+count-1``."""
        shift = self.nv - first - count
        return [c << shift for c in range(1 << count)]

    def add(self, a: int, b: int) -> int:
        return a ^ b

    def to_row(self, v: int) -> list[int]:
        return [(v >> (self.nv - 1 - i)) & 1 for i in range(self.nv)]


class _GFq:
    """Tuple vectors over a general prime field."""

    def __init__(self, nv: int, t: int, q: int):
        self.nv, self.t, self.q = nv, t, q

    def unit(self, i: int):
        return tuple(1 if j == i else 0 for j in range(self.nv))

    def zero(self):
        return (0,) * self.nv

    def key(self, v):
        return v[self.nv - self.t :]

    def rank(self, rows) -> int:
        rows = list(rows)
        if not rows or not rows[0]:
            return 0
        return gf.rank(np.array(rows, dtype=np.int64), self.q)

    def span(self, rows) -> list:
        rows = list(rows)
        if not rows:
            return [self.zero()]
        return gf.span_vectors(np.array(rows, dtype=np.int64), self.q)

    def combos(self, first: int, count: int) -> list:
        out = []
        for c in itertools.product(range(self.q), repeat=count):
            v = [0] * self.nv
            v[first : first + count] = c
            out.append(tuple(v))
        return out

    def add(self, a, b):
        return tuple((x + y) % self.q for x, y in zip(a, b))

    def to_row(self, v) -> list[int]:
        return list(v)


# ------------------------------------------------------------------ search


@dataclass(frozen=True)
class SearchResult:
    best_rate: float
    code: LinearNetworkCode | None
    explored: int
    exhaustive: bool
    message_symbols: int = 0
    report: SecurityReport | EnhancedReport | None = None

    def to_dict(self) -> dict:
        return {
            "best_rate": self.best_rate,
            "message_symbols": self.message_symbols,
            "explored": self.explored,
            "exhaustive": self.exhaustive,
            "code_found": self.code is not None,
        }


class _BudgetExhausted(Exception):
    pass


class _Searcher:
    """Depth-first search over canonical global encoding vectors.

    Every variable lives at the source. Source symbols are kept in reduced
    column echelon form separately on the message block and the key block,
    which loses no codes because independent invertible changes of message
    and key coordinates preserve decodability and leakage. Symbols of other
    nodes range over the span of what the node has received, nondecreasing
    within a link. Once the source is done, a branch is cut when some sink
    could not reach full message rank even if every remaining symbol carried
    all its tail can know.
    """

    def __init__(self, problem: CodingProblem, k: int, t: int, views, key_rank_needed, check_leakage, budget):
        self.problem = problem
        self.k, self.t = k, t
        q = problem.q
        nv = k + t
        self.V = _GF2(nv, t) if q == 2 else _GFq(nv, t, q)
        self.source = problem.message_origin
        self.budget = budget
        self.explored = 0
        self.check_leakage = check_leakage

        pos_link, pos_tail, first = [], [], []
        link_pos: dict[str, list[int]] = {}
        for li, lk in enumerate(problem.links):
            link_pos[lk.name] = []
            for j in range(lk.size):
                link_pos[lk.name].append(len(pos_link))
                first.append(j == 0)
                pos_link.append(li)
                pos_tail.append(lk.tail)
        self.P = len(pos_link)
        self.pos_link, self.pos_tail, self.first = pos_link, pos_tail, first
        self.tail_inputs = [
            [p for lk in problem.incoming(pos_tail[p]) for p in link_pos[lk.name]] for p in range(self.P)
        ]
        sinks = sorted(problem.demands)
        self.sink_pos = {s: [p for lk in problem.incoming(s) for p in link_pos[lk.name]] for s in sinks}
        self.view_pos = {lab: [p for name in links for p in link_pos[name]] for lab, links in views.items()}
        self.key_need = dict(key_rank_needed)
        self.sinks_at = [[s for s in sinks if p in self.sink_pos[s]] for p in range(self.P)]
        self.views_at = [[lab for lab in self.view_pos if p in self.view_pos[lab]] for p in range(self.P)]
        self.src_left = [sum(1 for r in range(p, self.P) if pos_tail[r] == self.source) for p in range(self.P + 1)]
        self.sink_left = {
            s: [sum(1 for r in self.sink_pos[s] if r >= p) for p in range(self.P + 1)] for s in sinks
        }
        self.view_left = {
            lab: [sum(1 for r in ps if r >= p) for p in range(self.P + 1)] for lab, ps in self.view_pos.items()
        }
        self.in_links = {
            u: [(lk.tail, link_pos[lk.name]) for lk in problem.incoming(u)] for u in {lk.tail for lk in problem.links} | set(sinks)
        }
        self.vec = [None] * self.P
        self.opt_idx = [0] * self.P
        self.options = [None] * self.P

    def _w_rank(self, rows) -> int:
        V = self.V
        return V.rank(rows) - V.rank([V.key(r) for r in rows])

    def _ok_after(self, p: int) -> bool:
        V = self.V
        for s in self.sinks_at[p]:
            rows = [self.vec[r] for r in self.sink_pos[s] if r <= p]
            if self._w_rank(rows) + self.sink_left[s][p + 1] < self.k:
                return False
        if self._sources_done(p):
            memo: dict[int, list | None] = {}
            for s in self.sink_pos:
                rows = self._reach(s, p, memo)
                if rows is not None and self._w_rank(rows) < self.k:
                    return False
        for lab in self.views_at[p]:
            rows = [self.vec[r] for r in self.view_pos[lab] if r <= p]
            if self.check_leakage and self._w_rank(rows) > 0:
                return False
            need = self.key_need.get(lab)
            if need is not None and V.rank([V.key(r) for r in rows]) + self.view_left[lab][p + 1] < need:
                return False
        return True

    def _sources_done(self, p: int) -> bool:
        return self.src_left[p + 1] == 0

    def _reach(self, u: int, p: int, memo):
        """Vectors spanning everything node ``u`` can still come to know,
        or None when that is unbounded."""
        if u in memo:
            return memo[u]
        if u == self.source:
            return None
        rows = []
        for tail, ps in self.in_links.get(u, []):
            rows.extend(self.vec[r] for r in ps if r <= p)
            if ps and ps[-1] > p:
                sub = self._reach(tail, p, memo)
                if sub is None:
                    memo[u] = None
                    return None
                rows.extend(sub)
        memo[u] = rows
        return rows

    def run(self):
        if self.P == 0:
            return None if self.k > 0 else []
        try:
            found = self._dfs(0, 0, 0)
        except _BudgetExhausted:
            return "budget"
        return found

    def _dfs(self, p: int, uw: int, ut: int):
        if p == self.P:
            return [self.vec[r] for r in range(self.P)]
        V = self.V
        tail = self.pos_tail[p]
        if tail == self.source:
            if self.k - uw > self.src_left[p]:
                return None
            w_opts = V.combos(0, uw) + ([V.unit(uw)] if uw < self.k else [])
            t_opts = V.combos(self.k, ut) + ([V.unit(self.k + ut)] if ut < self.t else [])
            for wi, w in enumerate(w_opts):
                nw = uw + (1 if wi == len(w_opts) - 1 and uw < self.k else 0)
                for ti, tv in enumerate(t_opts):
                    nt = ut + (1 if ti == len(t_opts) - 1 and ut < self.t else 0)
                    found = self._try(p, V.add(w, tv), nw, nt)
                    if found is not None:
                        return found
            return None
        if self.first[p]:
            self.options[p] = V.span(self.vec[r] for r in self.tail_inputs[p])
            start = 0
        else:
            self.options[p] = self.options[p - 1]
            start = self.opt_idx[p - 1]
        for i in range(start, len(self.options[p])):
            self.opt_idx[p] = i
            found = self._try(p, self.options[p][i], uw, ut)
            if found is not None:
                return found
        return None

    def _try(self, p: int, v, uw: int, ut: int):
        self.explored += 1
        if self.explored > self.budget:
            raise _BudgetExhausted
        self.vec[p] = v
        if not self._ok_after(p):
            return None
        return self._dfs(p + 1, uw, ut)


def _global_arrays(problem: CodingProblem, V, vecs) -> dict[str, np.ndarray]:
    out = {}
    p = 0
    nv = problem.space.num_vars
    for lk in problem.links:
        rows = [V.to_row(vecs[p + j]) for j in range(lk.size)]
        out[lk.name] = np.array(rows, dtype=np.int64).reshape(lk.size, nv)
        p += lk.size
    return out


def _trim_keys(g: dict[str, np.ndarray], k: int) -> tuple[dict[str, np.ndarray], int]:
    """Drop key columns that no symbol uses."""
    cols = np.zeros(0, dtype=bool)
    for M in g.values():
        used = M.any(axis=0) if M.shape[0] else np.zeros(M.shape[1], dtype=bool)
        cols = used if cols.size == 0 else (cols | used)
    keep = [j for j in range(cols.size) if j < k or cols[j]]
    return {name: M[:, keep] for name, M in g.items()}, len(keep) - k


def _max_symbols(bound: Fraction, n: int, q: int) -> int:
    return symbol_budget(bound, n, q)


def search_linear_codes(
    net: Network,
    adv: AdversarySet,
    demand: Demand,
    n: int = 1,
    q: int = 2,
    budget: int = DEFAULT_BUDGET,
    *,
    max_keys: int | None = None,
) -> SearchResult:
    """Largest message size admitting a zero-error, zero-leakage linear code.

    Tries ``k`` from the cut bound downward and returns the first code of
    the canonical enumeration order at the largest feasible ``k``. The
    found code is re-verified by :func:`~wiretapnet.codes.evaluate_code`.
    ``exhaustive`` is false when a larger ``k`` was abandoned on budget.
    """
    gf.check_field(q)
    bound = secure_cut_bound(net, adv, demand.source, demand.sinks)
    k_max = _max_symbols(bound.exact, n, q)
    src_out = sum(
        symbol_budget(net.edges[e].rc, n, q) + symbol_budget(net.edges[e].rp, n, q) for e in net.out_edges(demand.source)
    )
    t = src_out if max_keys is None else min(max_keys, src_out)
    if not adv.sets:
        t = 0  # keys only matter against an eavesdropper
    explored = 0
    exhaustive = True
    for k in range(k_max, 0, -1):
        space = SymbolSpace(q, k, {demand.source: t} if t else {}, n)
        problem = network_problem(net, adv, demand, space)
        s = _Searcher(problem, k, t, problem.views, {}, True, budget - explored)
        found = s.run()
        explored += s.explored
        if found == "budget":
            exhaustive = False
            break
        if found is None:
            continue
        g, used_t = _trim_keys(_global_arrays(problem, s.V, found), k)
        space = SymbolSpace(q, k, {demand.source: used_t} if used_t else {}, n)
        problem = network_problem(net, adv, demand, space)
        code = code_from_global(problem, g)
        rep = evaluate_problem(problem, code)
        if not rep.is_secure_and_reliable:
            raise WiretapNetError("search produced a code that fails re-verification")
        return SearchResult(rep.rate, code, explored, exhaustive, k, rep)
    return SearchResult(0.0, None, explored, exhaustive, 0, None)


# ---------------------------------------------------------------- model-I


@dataclass(frozen=True)
class PipelineResult:
    rate: float
    network: Network
    adversary: AdversarySet
    search: SearchResult | None
    cut: CutBoundResult
    records: tuple[TransformRecord, ...] = ()
    blocklength: int = 1
    enhanced: EnhancedNetwork | None = None
    notes: tuple[str, ...] = field(default=())

    def __iter__(self):
        # unpacks as (rate, network, search)
        return iter((self.rate, self.enhanced or self.network, self.search))


def _lcm_blocklength(rates) -> int:
    dens = [Fraction(r).denominator for r in rates]
    return reduce(math.lcm, dens, 1)


def _require_all_maximizable(net: Network, tol: float) -> None:
    bad = []
    for e in net.noisy_edges:
        rep = maximizability(net.edges[e].channel, tol)
        if not rep.is_simultaneously_maximizable:
            bad.append(net.label(e))
    if bad:
        raise ModelAssumptionError("channels not simultaneously maximizable: " + ", ".join(bad))


def model1_lower_bound(
    net: Network,
    adv: AdversarySet,
    demand: Demand | None = None,
    ordering: Sequence | None = None,
    *,
    n: int | None = None,
    q: int = 2,
    budget: int = DEFAULT_BUDGET,
    search: bool = True,
    tol: float = CHECK_TOL,
    quantum: Fraction = QUANTUM,
    strict: bool = False,
) -> PipelineResult:
    """Zero the public part of edges until no tapped set has two members,
    replace the remaining noisy edges by equivalent pipes and bound the
    result. The certified rate is the searched code rate when a code is
    found, otherwise 0."""
    demand = demand or net.demands[0]
    _require_all_maximizable(net, tol)
    order = [net.resolve(e) for e in ordering] if ordering is not None else greedy_model1_order(net, adv)
    records = []
    for e in order:
        net, adv, rec = model1_transform(net, adv, e, tol=tol, quantum=quantum, strict=strict)
        records.append(rec)
    if any(len(s) > 1 for s in adv):
        raise PreconditionError("ordering leaves a tapped set with more than one edge")
    for e in list(net.noisy_edges):
        net, rec = theorem3_transform(net, adv, e, tol=tol, quantum=quantum)
        records.append(rec)
    return _finish(net, adv, demand, records, n=n, q=q, budget=budget, search=search)


def _finish(net, adv, demand, records, *, n, q, budget, search) -> PipelineResult:
    cut = secure_cut_bound(net, adv, demand.source, demand.sinks)
    if n is None:
        n = _lcm_blocklength([r for m in net.edges.values() for r in (m.rc, m.rp)])
    res = search_linear_codes(net, adv, demand, n, q, budget) if search else None
    rate = res.best_rate if res is not None else 0.0
    return PipelineResult(rate, net, adv, res, cut, tuple(records), n)


def upper_bound(
    net: Network,
    adv: AdversarySet,
    demand: Demand | None = None,
    *,
    tol: float = CHECK_TOL,
    quantum: Fraction = QUANTUM,
    strict: bool = False,
) -> tuple[CutBoundResult, Network, list[TransformRecord]]:
    """Cut bound of the network with every noisy edge replaced by its
    upper-bounding pipe."""
    demand = demand or net.demands[0]
    upper, records = theorem2_transform(net, adv, list(net.noisy_edges), tol=tol, quantum=quantum, strict=strict)
    return secure_cut_bound(upper, adv, demand.source, demand.sinks), upper, records


# --------------------------------------------------------------- model-II


def _base_network(enh: EnhancedNetwork) -> Network:
    net = enh.original
    for e, (rc, rp) in enh.rates.items():
        net = net.with_edge(e, Noiseless(rc, rp))
    return net


def _key_pipe_sizes(enh: EnhancedNetwork, n: int, q: int) -> dict[frozenset, int]:
    return {E: symbol_budget(c, n, q) for E, c in enh.pipe_capacity.items()}


def check_key_delivery(enh: EnhancedNetwork, n: int = 1, q: int = 2) -> None:
    """Every eavesdropper node must be able to receive all keys.

    It hears the public pipes it taps and its key pipe, so their sizes must
    add up to at least the total key size.
    """
    total = sum(enh_key_dims(enh, n, q).values())
    short = []
    for E, size in _key_pipe_sizes(enh, n, q).items():
        pubs = sum(symbol_budget(enh.rates[e][1], n, q) for e in E)
        if pubs + size < total:
            short.append(E)
    if short:
        names = "; ".join("{" + ",".join(sorted(enh.original.label(e) for e in E)) + "}" for E in short)
        raise KeyDeliveryError(f"keys cannot reach the eavesdropper nodes of {names}", sets=short)


def enh_key_dims(enh: EnhancedNetwork, n: int, q: int) -> dict[int, int]:
    return {i: symbol_budget(c, n, q) for i, c in enh.key_capacity.items()}


def relay_flow_bound(enh: EnhancedNetwork, demand: Demand) -> float:
    """Max-flow bound on the message rate of the enhanced network."""
    import networkx as nx

    g = enh.relay_digraph()
    src = enh.message_node(demand.source)
    targets = sorted(demand.sinks) + [enh.eavesdropper_node(E) for E in enh.adversary.sets]
    return min(nx.maximum_flow_value(g, src, t) for t in targets)


def enhanced_code_from_base(
    enh: EnhancedNetwork, demand: Demand, g_base: Mapping[str, np.ndarray], k: int, n: int, q: int
) -> LinearNetworkCode:
    """Lift a base-network code whose key symbols all sit at the source.

    Message nodes forward the messages, key nodes forward their keys, and
    each key pipe carries a completion of the public key combinations its
    eavesdropper node already hears.
    """
    space = enhanced_space(enh, k, n, q)
    problem = enhanced_problem(enh, space, demand)
    nv = space.num_vars
    key_cols = {}
    col = k
    for node, d in space.key_dims.items():
        key_cols[node] = list(range(col, col + d))
        col += d
    src_cols = key_cols.get(enh.key_node(demand.source), [])

    def lift(M: np.ndarray) -> np.ndarray:
        out = np.zeros((M.shape[0], nv), dtype=np.int64)
        out[:, :k] = M[:, :k]
        extra = M.shape[1] - k
        if extra > len(src_cols):
            raise PreconditionError("base code uses more keys than the source owns")
        out[:, src_cols[:extra]] = M[:, k:]
        return out

    vecs: dict[str, np.ndarray] = {}
    for lk in problem.links:
        rows = np.zeros((lk.size, nv), dtype=np.int64)
        if lk.name in g_base:
            rows = lift(g_base[lk.name])
        elif lk.name == f"h{demand.source}":
            if lk.size < k:
                raise PreconditionError("message node pipe is narrower than the message")
            rows[:k, :k] = np.eye(k, dtype=np.int64)
        elif lk.name.startswith("hbar"):
            owner = int(lk.name[4:])
            cols = key_cols.get(enh.key_node(owner), [])
            for r, c in enumerate(cols):
                rows[r, c] = 1
        elif lk.name.startswith("key:E"):
            E = enh.adversary.sets[int(lk.name[5:]) - 1]
            heard = [lift(g_base[pub_link(e)]) for e in sorted(E) if pub_link(e) in g_base]
            heard = np.vstack(heard)[:, k:] if heard else np.zeros((0, nv - k), dtype=np.int64)
            comp = gf.extend_to_basis(heard, nv - k, q)
            if comp.shape[0] > lk.size:
                raise KeyDeliveryError("key pipe too narrow for the keys left unheard", sets=[E])
            rows[: comp.shape[0], k:] = comp
        vecs[lk.name] = rows
    return code_from_global(problem, vecs)


def model2_search(
    enh: EnhancedNetwork,
    demand: Demand,
    n: int = 1,
    q: int = 2,
    budget: int = DEFAULT_BUDGET,
) -> SearchResult:
    """Search codes on the enhanced network through its base network.

    A base-network code with keys at the source lifts to an enhanced code
    meeting every demand iff the sinks decode and each tapped set's public
    symbols leave at most the key pipe's worth of keys unheard.
    """
    base = _base_network(enh)
    cut = secure_cut_bound(base, enh.adversary, demand.source, demand.sinks)
    key_dims = enh_key_dims(enh, n, q)
    t = key_dims.get(demand.source, 0)
    h_src = symbol_budget(enh.key_capacity[demand.source], n, q)
    k_max = min(symbol_budget(cut.exact, n, q), h_src)
    total_keys = sum(key_dims.values())
    pipes = _key_pipe_sizes(enh, n, q)
    explored = 0
    exhaustive = True
    for k in range(k_max, 0, -1):
        space = SymbolSpace(q, k, {demand.source: t} if t else {}, n)
        problem = network_problem(base, enh.adversary, demand, space)
        need = {}
        for E in enh.adversary.sets:
            label = "{" + ",".join(sorted(base.label(e) for e in E)) + "}"
            need[label] = total_keys - pipes[E]
        s = _Searcher(problem, k, t, problem.views, need, False, budget - explored)
        found = s.run()
        explored += s.explored
        if found == "budget":
            exhaustive = False
            break
        if found is None:
            continue
        g = _global_arrays(problem, s.V, found)
        code = enhanced_code_from_base(enh, demand, g, k, n, q)
        rep = evaluate_enhanced(enh, code, demand)
        if not rep.all_demands_met:
            raise WiretapNetError("lifted code fails the enhanced-network demands")
        return SearchResult(rep.rate_messages, code, explored, exhaustive, k, rep)
    return SearchResult(0.0, None, explored, exhaustive, 0, None)


def model2_lower_bound(
    net: Network,
    adv: AdversarySet,
    demand: Demand | None = None,
    code: LinearNetworkCode | None = None,
    *,
    rates: Mapping | None = None,
    n: int | None = None,
    q: int = 2,
    budget: int = DEFAULT_BUDGET,
    search: bool = True,
    strict: bool = False,
    tol: float = CHECK_TOL,
    quantum: Fraction = QUANTUM,
) -> PipelineResult:
    """Secure rate certified through the enhanced network.

    A supplied ``code`` is checked against every demand; otherwise codes
    are searched. Key delivery is checked first and reported per tapped set.
    """
    demand = demand or net.demands[0]
    _require_all_maximizable(net, tol)
    enh = build_a_enhanced(net, adv, rates, strict=strict, tol=tol, quantum=quantum)
    if code is not None:
        n = code.space.blocklength
        q = code.space.field_size
    elif n is None:
        n = _lcm_blocklength(
            [r for pair in enh.rates.values() for r in pair] + list(enh.key_capacity.values())
            + list(enh.pipe_capacity.values())
        )
    check_key_delivery(enh, n, q)
    base = _base_network(enh)
    cut = secure_cut_bound(base, adv, demand.source, demand.sinks)
    notes = (f"relay max-flow bound on the message rate: {relay_flow_bound(enh, demand):g}",)
    if code is not None:
        rep = evaluate_enhanced(enh, code, demand)
        rate = rep.rate_messages if rep.all_demands_met else 0.0
        res = SearchResult(rate, code if rep.all_demands_met else None, 0, False, code.space.message_dims, rep)
    elif search:
        res = model2_search(enh, demand, n, q, budget)
        rate = res.best_rate
    else:
        res, rate = None, 0.0
    return PipelineResult(rate, base, adv, res, cut, (), n, enh, notes)
