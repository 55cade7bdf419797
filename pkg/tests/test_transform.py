import itertools
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wiretapnet.channelmath import WiretapChannel, bec, identity_channel
from wiretapnet.errors import EligibilityError, HypothesisError, ModelAssumptionError, PreconditionError
from wiretapnet.netmodel import AdversarySet, Demand, EdgeId, Network, Noiseless, Noisy
from wiretapnet import transform as T

HALF = Fraction(1, 2)
Q = T.QUANTUM

# One shared channel object keeps the maximizability cache warm.
ERASURE = WiretapChannel(identity_channel(2), bec(0.5))
MERGING = WiretapChannel(identity_channel(3), [[1, 0], [1, 0], [0, 1]])


def rates(net, name):
    m = net.edges[net.resolve(name)]
    return (m.rc, m.rp)


def test_rationalize_modes():
    assert T.rationalize(0.5) == HALF
    assert T.rationalize(0.5, "up") == HALF + Q
    assert T.rationalize(0.5, "down") == HALF - Q
    assert T.rationalize(0.0, "down") == 0
    assert T.rationalize(1 / 3, quantum=Fraction(1, 3)) == Fraction(1, 3)
    with pytest.raises(ValueError):
        T.rationalize(0.5, "sideways")


def test_equivalence_on_untapped_and_single_edges(four_node):
    net, adv = four_node
    for name in ("e2", "e4", "e5"):
        net, rec = T.theorem3_transform(net, adv, name)
        assert rec.relation == "equivalent"
    assert rates(net, "e2") == (0, HALF)
    assert rates(net, "e4") == (HALF, 0)
    assert rates(net, "e5") == (HALF, 0)


def test_equivalence_refuses_jointly_tapped(four_node):
    net, adv = four_node
    with pytest.raises(EligibilityError) as info:
        T.theorem3_transform(net, adv, "e1")
    assert info.value.offending_set == frozenset({net.resolve("e1"), net.resolve("e3")})


def test_upper_rewrite_keeps_adversary(four_node):
    net, adv = four_node
    out, recs = T.theorem2_transform(net, adv, ["e1", "e3"])
    assert rates(out, "e1") == rates(out, "e3") == (HALF, HALF)
    assert all(r.adversary_after == adv and r.relation == "upper" for r in recs)


def test_upper_rewrite_order_independent(four_node):
    net, adv = four_node
    names = ["e1", "e2", "e3", "e4", "e5"]
    outs = {tuple(T.theorem2_transform(net, adv, list(p))[0].edges.items()) for p in itertools.permutations(names)}
    assert len(outs) == 1


def test_strict_offsets(four_node):
    net, adv = four_node
    strict, _ = T.theorem2_transform(net, adv, ["e2"], strict=True)
    loose, _ = T.theorem3_transform(net, adv, "e2")
    # a singly tapped edge: upper pipe is one quantum above the equivalent one
    assert rates(strict, "e2") == tuple(r + Q for r in rates(loose, "e2"))
    _, _, rec = T.model1_transform(net, adv, "e1", strict=True)
    assert rec.rates_used == (HALF - Q, 0)


def test_upper_rewrite_aggregates_failures():
    e1, e2 = EdgeId(1, 2, 1), EdgeId(1, 2, 2)
    net = Network(2, {e1: Noisy(MERGING), e2: Noisy(MERGING)}, (Demand(1, {2}),))
    with pytest.raises(ModelAssumptionError) as info:
        T.theorem2_transform(net, AdversarySet(), [e1, e2])
    assert len(info.value.problems) == 2


def test_rewrite_of_noiseless_edge_is_precondition_error(four_node_pipes):
    net, adv = four_node_pipes
    with pytest.raises(PreconditionError):
        T.theorem3_transform(net, adv, "e2")


def test_greedy_order(four_node, three_edge):
    net, adv = four_node
    assert T.greedy_model1_order(net, adv) == [net.resolve("e1")]
    net, adv = three_edge
    assert T.greedy_model1_order(net, adv) == [net.resolve("e1"), net.resolve("e2")]


@st.composite
def tapped_networks(draw):
    m = draw(st.integers(2, 5))
    pairs = [(t, h) for t in range(1, m + 1) for h in range(t + 1, m + 1)]
    chosen = draw(st.lists(st.sampled_from(pairs), min_size=1, max_size=6))
    edges = {}
    for t, h in chosen:
        k = 1 + sum(1 for e in edges if (e.tail, e.head) == (t, h))
        edges[EdgeId(t, h, k)] = Noisy(ERASURE)
    ids = sorted(edges)
    sets = draw(st.lists(st.sets(st.sampled_from(ids), min_size=1, max_size=3), max_size=5))
    return Network(m, edges, (Demand(1, {m}),)), AdversarySet(tuple(frozenset(s) for s in sets))


@settings(max_examples=60)
@given(tapped_networks(), st.data())
def test_model1_set_algebra(netadv, data):
    net, adv = netadv
    e = data.draw(st.sampled_from(sorted(net.edges)))
    out, adv2, rec = T.model1_transform(net, adv, e)
    expected = {s - {e} for s in adv.sets if s - {e}}
    assert set(adv2.sets) == expected
    assert all(e not in s for s in adv2.sets)
    assert rec.rates_used == (HALF, 0)
    assert out.edges[e] == Noiseless(HALF, 0)
    assert all(out.edges[x] == net.edges[x] for x in net.edges if x != e)


@settings(max_examples=60)
@given(tapped_networks())
def test_greedy_order_leaves_only_singletons(netadv):
    net, adv = netadv
    for e in T.greedy_model1_order(net, adv):
        adv = adv.without_edge(e)
    assert all(len(s) <= 1 for s in adv)


@st.composite
def noiseless_networks(draw):
    m = draw(st.integers(2, 5))
    pairs = [(t, h) for t in range(1, m + 1) for h in range(t + 1, m + 1)]
    chosen = draw(st.lists(st.sampled_from(pairs), min_size=1, max_size=7))
    edges = {}
    for t, h in chosen:
        k = 1 + sum(1 for e in edges if (e.tail, e.head) == (t, h))
        rc = Fraction(draw(st.integers(1, 4)), 2)
        rp = Fraction(draw(st.integers(1, 4)), 2)
        edges[EdgeId(t, h, k)] = Noiseless(rc, rp)
    ids = sorted(edges)
    sets = draw(st.lists(st.sets(st.sampled_from(ids), min_size=1, max_size=3), max_size=4))
    return Network(m, edges, (Demand(1, {m}),)), AdversarySet(tuple(frozenset(s) for s in sets))


@settings(max_examples=80)
@given(noiseless_networks())
def test_enhanced_structural_counts(netadv):
    net, adv = netadv
    enh = T.build_a_enhanced(net, adv)
    m, a = net.num_nodes, len(adv)
    assert enh.num_nodes == m + 2 * m + a + 1
    assert len(enh.hyperedges) == 2 * m + 2 * len(net.edges) + a
    total = sum(enh.key_capacity.values())
    for E in adv:
        assert enh.pipe_capacity[E] == total - sum(net.edges[e].rp for e in E)
    # every eavesdropper node hears exactly the public pipes of its set
    for E in adv:
        v = enh.eavesdropper_node(E)
        heard = {h.name for h in enh.hyperedges if v in h.heads and h.name.startswith("pub:")}
        assert heard == {f"pub:{e.ref}" for e in E}


def test_three_edge_enhanced(three_edge):
    net, adv = three_edge
    enh = T.build_a_enhanced(net, adv)
    assert enh.num_nodes == 10 and len(enh.hyperedges) == 13
    assert set(enh.pipe_capacity.values()) == {4}
    assert enh.key_capacity == {1: 6, 2: 0}
    assert enh.overall_key_node == 10
    h1 = enh.hyperedge("h1")
    assert h1.heads == (1, 7, 8, 9)
    again = T.enhanced_from_dict(enh.to_dict())
    assert again.hyperedges == enh.hyperedges


def test_enhanced_needs_positive_ceilings(four_node):
    net, adv = four_node
    with pytest.raises(HypothesisError, match="e2"):
        T.build_a_enhanced(net, adv)


def test_enhanced_strict_hypotheses(three_edge):
    net, adv = three_edge
    enh = T.build_a_enhanced(net, adv, strict=True)
    assert all(r == (1 - Q, 1 - Q) for r in enh.rates.values())
    at_ceiling = {e.ref: (1, 1) for e in net.edges}
    with pytest.raises(HypothesisError):
        T.build_a_enhanced(net, adv, at_ceiling, strict=True)
    with pytest.raises(HypothesisError):
        T.build_a_enhanced(net, adv, {e.ref: (2, 1) for e in net.edges})
