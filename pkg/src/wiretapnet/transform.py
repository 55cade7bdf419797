"""Rewrites of wiretap networks into noiseless bit-pipe networks.

Every replacement rate is computed from the two channel capacities
``cap_main = max I(X;Y)`` and ``cap_eave = max I(X;Z)`` and stored as an
exact rational on a grid of step ``quantum`` (default 1/1024).

The bounding rewrites hold under strict inequalities (upper bounds need
rates above the capacities, lower bounds need rates below them). Rate
regions are closed, so by default the rewrites emit the limiting rates
themselves; pass ``strict=True`` to move each rate one quantum in the
direction its inequality requires.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping

from .channelmath import (
    DEFAULT_TOL,
    MaximizabilityReport,
    WiretapChannel,
    check_simultaneously_maximizable,
)
from .errors import (
    EligibilityError,
    HypothesisError,
    KeyDeliveryError,
    ModelAssumptionError,
    PreconditionError,
    StructuralError,
)
from .netmodel import (
    AdversarySet,
    EdgeId,
    EdgeModel,
    HyperEdge,
    Network,
    Noiseless,
    Noisy,
    Touching,
    adversary_touching,
    edge_capacities,
    format_rational,
)

QUANTUM = Fraction(1, 1024)
CHECK_TOL = 1e-6


def rationalize(x: float, mode: str = "nearest", quantum: Fraction = QUANTUM) -> Fraction:
    """Snap ``x`` to the ``quantum`` grid.

    ``"up"`` and ``"down"`` step one quantum past the nearest grid point,
    so the result is strictly above (below) ``x``. ``"down"`` never goes
    below zero.
    """
    quantum = Fraction(quantum)
    nearest = Fraction(round(Fraction(x) / quantum)) * quantum
    if mode == "nearest":
        return nearest
    if mode == "up":
        return nearest + quantum
    if mode == "down":
        return max(nearest - quantum, Fraction(0))
    raise ValueError(f"unknown rounding mode {mode!r}")


@functools.lru_cache(maxsize=256)
def _report(wt: WiretapChannel, tol: float) -> MaximizabilityReport:
    return check_simultaneously_maximizable(wt, tol=tol)


def maximizability(wt: WiretapChannel, tol: float = CHECK_TOL) -> MaximizabilityReport:
    """Cached :func:`check_simultaneously_maximizable`."""
    return _report(wt, tol)


def _require_maximizable(wt: WiretapChannel, tol: float, what: str = "channel") -> MaximizabilityReport:
    rep = maximizability(wt, tol)
    if not rep.is_simultaneously_maximizable:
        raise ModelAssumptionError(
            f"{what} is not simultaneously maximizable "
            f"(cap_main={rep.cap_main:.6g}, cap_eave={rep.cap_eave:.6g}, "
            f"max difference={rep.max_difference:.6g})"
        )
    return rep


@dataclass(frozen=True)
class TransformRecord:
    """One step of a rewrite pipeline.

    ``relation`` is how the replaced pipe relates to the original channel:
    ``"upper"`` (the region can only grow), ``"equivalent"`` or ``"lower"``.
    """

    kind: str
    edge: EdgeId | None
    rates_used: tuple[Fraction, Fraction]
    adversary_after: AdversarySet
    relation: str = "equivalent"
    strict: bool = False

    def __post_init__(self):
        if any(Fraction(r) < 0 for r in self.rates_used):
            raise StructuralError("record rates must be non-negative")

    def to_dict(self, net: Network | None = None) -> dict:
        label = (net.label(self.edge) if net is not None and self.edge in net.names else self.edge.ref) if self.edge else None
        return {
            "kind": self.kind,
            "edge": label,
            "rc": format_rational(self.rates_used[0]),
            "rp": format_rational(self.rates_used[1]),
            "relation": self.relation,
            "strict": self.strict,
            "adversary_after": [sorted(e.ref for e in s) for s in self.adversary_after],
        }


# ------------------------------------------------------------ single edge


def replace_edge(net: Network, e: EdgeId, rc, rp) -> Network:
    """Swap noisy edge ``e`` for a noiseless pipe with rates ``(rc, rp)``.

    A ``(0, 0)`` replacement is kept as a flagged placeholder edge.
    """
    if e not in net.edges:
        raise PreconditionError(f"edge {e.ref} not in network")
    if not isinstance(net.edges[e], Noisy):
        raise PreconditionError(f"edge {net.label(e)} is already noiseless")
    return net.with_edge(e, Noiseless(Fraction(rc), Fraction(rp)))


def upper_bound_rates(
    wt: WiretapChannel, tol: float = CHECK_TOL, quantum: Fraction = QUANTUM, *, strict: bool = False
) -> tuple[Fraction, Fraction]:
    """Rates of the pipe that upper-bounds ``wt``: ``(cap_main - cap_eave, cap_eave)``."""
    rep = _require_maximizable(wt, tol)
    mode = "up" if strict else "nearest"
    return (
        rationalize(rep.cap_main - rep.cap_eave, mode, quantum),
        rationalize(rep.cap_eave, mode, quantum),
    )


def equivalence_rates(wt: WiretapChannel, tol: float = CHECK_TOL, quantum: Fraction = QUANTUM):
    rep = _require_maximizable(wt, tol)
    return (
        rationalize(rep.cap_main - rep.cap_eave, "nearest", quantum),
        rationalize(rep.cap_eave, "nearest", quantum),
    )


def lower_bound_rate(
    wt: WiretapChannel, tol: float = CHECK_TOL, quantum: Fraction = QUANTUM, *, strict: bool = False
) -> Fraction:
    """Confidential rate for the model-I pipe (its public rate is 0)."""
    rep = _require_maximizable(wt, tol)
    return rationalize(rep.cap_main - rep.cap_eave, "down" if strict else "nearest", quantum)


def _noisy_channel(net: Network, e: EdgeId) -> WiretapChannel:
    if e not in net.edges:
        raise PreconditionError(f"edge {e.ref} not in network")
    model = net.edges[e]
    if not isinstance(model, Noisy):
        raise PreconditionError(f"edge {net.label(e)} is already noiseless")
    return model.channel


def theorem2_transform(
    net: Network,
    adv: AdversarySet,
    edges,
    *,
    tol: float = CHECK_TOL,
    quantum: Fraction = QUANTUM,
    strict: bool = False,
) -> tuple[Network, list[TransformRecord]]:
    """Replace each listed noisy edge by its upper-bounding pipe.

    The adversary is unchanged. Failures on individual edges are collected
    and raised together.
    """
    records = []
    problems = []
    assumption_only = True
    out = net
    for ref in edges:
        try:
            e = net.resolve(ref)
            rc, rp = upper_bound_rates(_noisy_channel(net, e), tol, quantum, strict=strict)
        except (PreconditionError, ModelAssumptionError) as exc:
            problems.append(f"{ref}: {exc}")
            assumption_only &= isinstance(exc, ModelAssumptionError)
            continue
        out = replace_edge(out, e, rc, rp)
        records.append(TransformRecord("upper", e, (rc, rp), adv, relation="upper", strict=strict))
    if problems:
        cls = ModelAssumptionError if assumption_only else PreconditionError
        err = cls("upper-bound rewrite failed on " + "; ".join(problems))
        err.problems = problems
        raise err
    return out, records


def theorem3_transform(
    net: Network, adv: AdversarySet, e, *, tol: float = CHECK_TOL, quantum: Fraction = QUANTUM
) -> tuple[Network, TransformRecord]:
    """Equivalent replacement of an edge that is never tapped jointly.

    Rates are ``(cap_main - cap_eave, cap_eave)``; on an edge no adversary
    set contains, the whole capacity becomes confidential.
    """
    e = net.resolve(e)
    wt = _noisy_channel(net, e)
    if adversary_touching(adv, e) is Touching.JOINT:
        bad = next(s for s in adv.containing(e) if len(s) > 1)
        names = ",".join(sorted(net.label(x) for x in bad))
        raise EligibilityError(f"edge {net.label(e)} is tapped jointly in {{{names}}}", offending_set=bad)
    rc, rp = equivalence_rates(wt, tol, quantum)
    if adversary_touching(adv, e) is Touching.INVULNERABLE:
        # Nobody hears an untapped pipe, so its public part is confidential.
        rc, rp = rc + rp, Fraction(0)
    return replace_edge(net, e, rc, rp), TransformRecord("equivalence", e, (rc, rp), adv)


def model1_transform(
    net: Network,
    adv: AdversarySet,
    e,
    *,
    tol: float = CHECK_TOL,
    quantum: Fraction = QUANTUM,
    strict: bool = False,
) -> tuple[Network, AdversarySet, TransformRecord]:
    """Keep only the confidential rate of ``e`` and drop it from every tapped set."""
    e = net.resolve(e)
    rc = lower_bound_rate(_noisy_channel(net, e), tol, quantum, strict=strict)
    new_adv = adv.without_edge(e)
    rec = TransformRecord("model1", e, (rc, Fraction(0)), new_adv, relation="lower", strict=strict)
    return replace_edge(net, e, rc, 0), new_adv, rec


def greedy_model1_order(net: Network, adv: AdversarySet) -> list[EdgeId]:
    """Edges to zero so that every tapped set has at most one member.

    Repeatedly picks the noisy edge lying in the most sets of size >= 2,
    ties going to the smallest edge id.
    """
    order = []
    while True:
        big = [s for s in adv if len(s) > 1]
        if not big:
            return order
        counts: dict[EdgeId, int] = {}
        for s in big:
            for e in s:
                if isinstance(net.edges[e], Noisy) and e not in order:
                    counts[e] = counts.get(e, 0) + 1
        if not counts:
            raise PreconditionError("tapped sets of size >= 2 contain no noisy edge left to zero")
        best = min(counts, key=lambda e: (-counts[e], e))
        order.append(best)
        adv = adv.without_edge(best)


# ------------------------------------------------------- enhanced network


@dataclass(frozen=True)
class EnhancedNetwork:
    """Noiseless network of message, key, eavesdropper and overall-key nodes.

    Node ids: original node ``i`` keeps id ``i``; message node ``m+i``;
    key node ``2m+i``; the eavesdropper node of the j-th tapped set is
    ``3m+j``; the overall key node is ``3m+|A|+1``.
    """

    original: Network
    adversary: AdversarySet
    rates: Mapping[EdgeId, tuple[Fraction, Fraction]]
    key_capacity: Mapping[int, Fraction]
    pipe_capacity: Mapping[frozenset, Fraction]
    hyperedges: tuple[HyperEdge, ...]
    roles: Mapping[int, tuple]
    demands: tuple[dict, ...] = field(default=())

    @property
    def num_nodes(self) -> int:
        return len(self.roles)

    def message_node(self, i: int) -> int:
        return self.original.num_nodes + i

    def key_node(self, i: int) -> int:
        return 2 * self.original.num_nodes + i

    def eavesdropper_node(self, E) -> int:
        return 3 * self.original.num_nodes + 1 + self.adversary.sets.index(frozenset(E))

    @property
    def overall_key_node(self) -> int:
        return 3 * self.original.num_nodes + len(self.adversary) + 1

    def hyperedge(self, name: str) -> HyperEdge:
        for h in self.hyperedges:
            if h.name == name:
                return h
        raise KeyError(name)

    def relay_digraph(self):
        """Point-to-point realisation: each hyperarc becomes a relay node fed
        by one pipe of the hyperarc's capacity and fanning out to its heads."""
        import networkx as nx

        g = nx.DiGraph()
        g.add_nodes_from(self.roles)
        for h in self.hyperedges:
            relay = ("relay", h.name)
            g.add_edge(h.tail, relay, capacity=float(h.capacity))
            for v in h.heads:
                g.add_edge(relay, v, capacity=float(h.capacity))
        return g

    def to_dict(self) -> dict:
        from .netmodel import network_to_dict

        return {
            "kind": "a-enhanced",
            "nodes": self.num_nodes,
            "roles": {str(v): _role_str(r, self.original) for v, r in self.roles.items()},
            "hyperedges": [
                {"name": h.name, "tail": h.tail, "heads": list(h.heads), "capacity": format_rational(h.capacity)}
                for h in self.hyperedges
            ],
            "demands": list(self.demands),
            "rates": {
                e.ref: {"rc": format_rational(rc), "rp": format_rational(rp)} for e, (rc, rp) in self.rates.items()
            },
            "source_network": network_to_dict(self.original, self.adversary),
        }


def _role_str(role, net: Network) -> str:
    if role[0] == "eavesdropper":
        return "eavesdropper {" + ",".join(sorted(net.label(e) for e in role[1])) + "}"
    return " ".join(str(x) for x in role)


def model2_thresholds(
    net: Network, tol: float = CHECK_TOL, quantum: Fraction = QUANTUM
) -> dict[EdgeId, tuple[Fraction, Fraction]]:
    """Per-edge ``(confidential, public)`` rate ceilings of the enhanced construction."""
    out = {}
    for e, model in net.edges.items():
        if isinstance(model, Noiseless):
            out[e] = (model.rc, model.rp)
        else:
            rep = maximizability(model.channel, tol)
            out[e] = (
                rationalize(rep.cap_main - rep.cap_eave, "nearest", quantum),
                rationalize(rep.cap_eave, "nearest", quantum),
            )
    return out


def check_model2_hypotheses(net: Network, rates, tol: float = CHECK_TOL, quantum: Fraction = QUANTUM) -> None:
    """Raise :class:`HypothesisError` unless every rate is strictly below its ceiling."""
    thr = model2_thresholds(net, tol, quantum)
    bad = []
    for e, (tc, tp) in thr.items():
        rc, rp = rates[e]
        if not (Fraction(rc) < tc and Fraction(rp) < tp):
            bad.append(f"{net.label(e)}: rates ({rc}, {rp}) not below ({tc}, {tp})")
    if bad:
        raise HypothesisError("; ".join(bad))


def build_a_enhanced(
    net: Network,
    adv: AdversarySet,
    rates: Mapping | None = None,
    *,
    strict: bool = False,
    tol: float = CHECK_TOL,
    quantum: Fraction = QUANTUM,
) -> EnhancedNetwork:
    """Build the A-enhanced network used by the model-II lower bound.

    ``rates`` maps edges (or references) to ``(rc, rp)``. When omitted the
    ceilings are used (or one quantum below them if ``strict``). Without
    ``strict`` a rate may equal its ceiling, which describes the closure of
    the admissible rates; every ceiling must still be positive so that
    admissible rates exist.
    """
    adv.validate(net)
    thr = model2_thresholds(net, tol, quantum)
    empty = [net.label(e) for e, (tc, tp) in thr.items() if tc <= 0 or tp <= 0]
    if empty:
        raise HypothesisError(
            "no admissible rates: zero confidential or public ceiling on " + ", ".join(empty)
        )
    if rates is None:
        if strict:
            rates = {e: (tc - quantum, tp - quantum) for e, (tc, tp) in thr.items()}
        else:
            rates = dict(thr)
    else:
        rates = {net.resolve(k): (Fraction(v[0]), Fraction(v[1])) for k, v in rates.items()}
        missing = [net.label(e) for e in net.edges if e not in rates]
        if missing:
            raise PreconditionError("rates missing for " + ", ".join(missing))
    if strict:
        check_model2_hypotheses(net, rates, tol, quantum)
    else:
        over = [
            net.label(e)
            for e, (rc, rp) in rates.items()
            if rc < 0 or rp < 0 or rc > thr[e][0] or rp > thr[e][1]
        ]
        if over:
            raise HypothesisError("rates above their ceilings on " + ", ".join(over))

    m = net.num_nodes
    cap = {}
    for i in net.nodes:
        total = Fraction(0)
        for e in net.out_edges(i):
            model = net.edges[e]
            total += model.total if isinstance(model, Noiseless) else rationalize(edge_capacities(model, DEFAULT_TOL)[0], "nearest", quantum)
        cap[i] = total
    total_key = sum(cap.values(), Fraction(0))

    roles: dict[int, tuple] = {}
    for i in net.nodes:
        roles[i] = ("original", i)
    for i in net.nodes:
        roles[m + i] = ("message", i)
    for i in net.nodes:
        roles[2 * m + i] = ("key", i)
    eave = {}
    for j, E in enumerate(adv.sets, start=1):
        roles[3 * m + j] = ("eavesdropper", E)
        eave[E] = 3 * m + j
    v_T = 3 * m + len(adv) + 1
    roles[v_T] = ("overall_key",)

    pipe = {}
    for E in adv.sets:
        c_E = total_key - sum((rates[e][1] for e in E), Fraction(0))
        if c_E < 0:
            names = ",".join(sorted(net.label(e) for e in E))
            raise KeyDeliveryError(f"negative overall-key pipe capacity for {{{names}}}", sets=[E])
        pipe[E] = c_E

    hyper = []
    for i in net.nodes:
        hyper.append(HyperEdge(m + i, (i, *eave.values()), cap[i], name=f"h{i}"))
    for i in net.nodes:
        hyper.append(HyperEdge(2 * m + i, (i, v_T), cap[i], name=f"hbar{i}"))
    for e in net.edges:
        hyper.append(HyperEdge(e.tail, (e.head,), rates[e][0], name=f"conf:{e.ref}"))
    for e in net.edges:
        heads = (e.head, *(eave[E] for E in adv.sets if e in E))
        hyper.append(HyperEdge(e.tail, heads, rates[e][1], name=f"pub:{e.ref}"))
    for j, E in enumerate(adv.sets, start=1):
        hyper.append(HyperEdge(v_T, (eave[E],), pipe[E], name=f"key:E{j}"))

    demands = []
    for d in net.demands:
        demands.append(
            {"kind": "message", "owner": d.source, "from": m + d.source, "to": sorted(d.sinks) + sorted(eave.values())}
        )
    for i in net.nodes:
        if eave:
            demands.append({"kind": "key", "owner": i, "from": 2 * m + i, "to": sorted(eave.values())})

    return EnhancedNetwork(
        original=net,
        adversary=adv,
        rates=rates,
        key_capacity=cap,
        pipe_capacity=pipe,
        hyperedges=tuple(hyper),
        roles=roles,
        demands=tuple(demands),
    )


def enhanced_from_dict(doc: dict) -> EnhancedNetwork:
    """Rebuild an enhanced network from :meth:`EnhancedNetwork.to_dict` output."""
    from .netmodel import network_from_dict, parse_rational

    if doc.get("kind") != "a-enhanced":
        raise StructuralError("not an a-enhanced document")
    net, adv = network_from_dict(doc["source_network"])
    rates = {EdgeId.parse(k): (parse_rational(v["rc"]), parse_rational(v["rp"])) for k, v in doc["rates"].items()}
    enh = build_a_enhanced(net, adv, rates)
    listed = [(h["name"], h["tail"], tuple(h["heads"]), parse_rational(h["capacity"])) for h in doc["hyperedges"]]
    built = [(h.name, h.tail, h.heads, h.capacity) for h in enh.hyperedges]
    if listed != built:
        raise StructuralError("hyperedge list does not match the construction from the source network")
    return enh
