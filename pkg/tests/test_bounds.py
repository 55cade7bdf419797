from fractions import Fraction

import networkx as nx
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wiretapnet import bounds as B
from wiretapnet import codes as C
from wiretapnet import data_path
from wiretapnet.errors import KeyDeliveryError
from wiretapnet.netmodel import AdversarySet, Demand, EdgeId, Network, Noiseless


def cut_oracle(net, adv, source, sinks):
    """Secure cut bound through max-flow: for each tapped set, discount its
    public rates and take the smallest min-cut over sinks."""
    best = None
    for E in [frozenset()] + list(adv.sets):
        g = nx.DiGraph()
        g.add_nodes_from(net.nodes)
        for e, m in net.edges.items():
            w = m.total - (m.rp if e in E else 0)
            if g.has_edge(e.tail, e.head):
                g[e.tail][e.head]["capacity"] += w
            else:
                g.add_edge(e.tail, e.head, capacity=w)
        for t in sinks:
            val = nx.minimum_cut_value(g, source, t) if nx.has_path(g, source, t) else Fraction(0)
            best = val if best is None else min(best, val)
    return best


def butterfly():
    links = [(1, 2), (1, 3), (2, 6), (3, 7), (2, 4), (3, 4), (4, 5), (5, 6), (5, 7)]
    edges = {EdgeId(t, h, 1): Noiseless(0, 1) for t, h in links}
    adv = AdversarySet(tuple(frozenset({e}) for e in edges))
    return Network(7, edges, (Demand(1, {6, 7}),)), adv


@st.composite
def dags(draw, rates=(0, 1, 2), max_nodes=5):
    m = draw(st.integers(2, max_nodes))
    pairs = [(t, h) for t in range(1, m + 1) for h in range(t + 1, m + 1)]
    chosen = draw(st.lists(st.sampled_from(pairs), min_size=1, max_size=8))
    edges = {}
    for t, h in chosen:
        k = 1 + sum(1 for e in edges if (e.tail, e.head) == (t, h))
        edges[EdgeId(t, h, k)] = Noiseless(Fraction(draw(st.sampled_from(rates))), Fraction(draw(st.sampled_from(rates))))
    ids = sorted(edges)
    sets = draw(st.lists(st.sets(st.sampled_from(ids), min_size=1, max_size=2), max_size=3))
    sinks = draw(st.sets(st.integers(2, m), min_size=1, max_size=2))
    return Network(m, edges, (Demand(1, sinks),)), AdversarySet(tuple(frozenset(s) for s in sets))


class TestCutBound:
    def test_four_node_pipes(self, four_node_pipes):
        net, adv = four_node_pipes
        res = B.secure_cut_bound(net, adv, 1, {2, 3})
        assert res.exact == 1 == cut_oracle(net, adv, 1, {2, 3})
        assert res.sink in (2, 3) and 1 in res.side and res.sink not in res.side
        assert res.adversary_set in set(adv.sets) | {frozenset()}

    def test_single_confidential_edge(self):
        net = Network(2, {EdgeId(1, 2, 1): Noiseless(1, 0)}, (Demand(1, {2}),))
        assert B.secure_cut_bound(net, AdversarySet(), 1, {2}).value == 1.0

    def test_unreachable_sink(self):
        net = Network(3, {EdgeId(1, 2, 1): Noiseless(1, 0)}, (Demand(1, {3}),))
        res = B.secure_cut_bound(net, AdversarySet(), 1, {3})
        assert res.value == 0.0 and res.cut == ()

    @settings(max_examples=80)
    @given(dags())
    def test_matches_flow_oracle(self, netadv):
        net, adv = netadv
        d = net.demands[0]
        assert B.secure_cut_bound(net, adv, d.source, d.sinks).exact == cut_oracle(net, adv, d.source, d.sinks)

    @settings(max_examples=60)
    @given(dags(), st.data())
    def test_monotone(self, netadv, data):
        net, adv = netadv
        d = net.demands[0]
        base = B.secure_cut_bound(net, adv, d.source, d.sinks).exact
        t, h = sorted(data.draw(st.lists(st.integers(1, net.num_nodes), min_size=2, max_size=2, unique=True)))
        extra = EdgeId(t, h, 9)
        bigger = Network(net.num_nodes, {**net.edges, extra: Noiseless(1, 1)}, net.demands)
        assert B.secure_cut_bound(bigger, adv, d.source, d.sinks).exact >= base
        E = frozenset(data.draw(st.sets(st.sampled_from(sorted(net.edges)), min_size=1, max_size=3)))
        more = AdversarySet(adv.sets + (E,))
        assert B.secure_cut_bound(net, more, d.source, d.sinks).exact <= base


class TestSearch:
    def test_four_node_pipes(self, four_node_pipes):
        net, adv = four_node_pipes
        res = B.search_linear_codes(net, adv, net.demands[0], 2, 2)
        assert res.best_rate == 1.0 and res.exhaustive
        rep = C.evaluate_code(net, adv, net.demands[0], res.code, "enumeration")
        assert rep.is_secure_and_reliable

    def test_butterfly(self):
        net, adv = butterfly()
        assert B.secure_cut_bound(net, adv, 1, {6, 7}).value == 1.0
        # one binary use cannot mask all three symbols around the middle link
        single = B.search_linear_codes(net, adv, net.demands[0], 1, 2)
        assert single.best_rate == 0.0 and single.exhaustive
        res = B.search_linear_codes(net, adv, net.demands[0], 2, 2)
        assert res.best_rate == 1.0 and res.exhaustive
        assert C.evaluate_code(net, adv, net.demands[0], res.code).is_secure_and_reliable

    def test_fully_public_cut_tapped_jointly(self):
        e1, e2 = EdgeId(1, 2, 1), EdgeId(1, 2, 2)
        net = Network(2, {e1: Noiseless(0, 1), e2: Noiseless(0, 1)}, (Demand(1, {2}),))
        adv = AdversarySet((frozenset({e1, e2}),))
        res = B.search_linear_codes(net, adv, net.demands[0], 1, 2)
        assert res.best_rate == 0.0 and res.code is None and res.exhaustive

    def test_budget_exhaustion_is_reported(self, four_node_pipes):
        net, adv = four_node_pipes
        res = B.search_linear_codes(net, adv, net.demands[0], 2, 2, budget=3)
        assert not res.exhaustive and res.code is None

    def test_deterministic(self, four_node_pipes):
        net, adv = four_node_pipes
        a = B.search_linear_codes(net, adv, net.demands[0], 2, 2)
        b = B.search_linear_codes(net, adv, net.demands[0], 2, 2)
        assert a.code.serialization() == b.code.serialization() and a.explored == b.explored

    def test_gf3(self):
        net = Network(2, {EdgeId(1, 2, 1): Noiseless(Fraction(2), 0)}, (Demand(1, {2}),))
        res = B.search_linear_codes(net, AdversarySet(), net.demands[0], 1, 3)
        # one ternary symbol fits in two bits, two do not
        assert res.message_symbols == 1

    @settings(max_examples=40)
    @given(dags(rates=(0, 1), max_nodes=6))
    def test_plain_multicast_reaches_mincut(self, netadv):
        net, _ = netadv
        unit = Network(net.num_nodes, {e: Noiseless(1, 0) for e in net.edges}, net.demands)
        d = unit.demands[0]
        g = nx.MultiDiGraph()
        flow = nx.DiGraph()
        flow.add_nodes_from(unit.nodes)
        for e in unit.edges:
            cap = flow[e.tail][e.head]["capacity"] + 1 if flow.has_edge(e.tail, e.head) else 1
            flow.add_edge(e.tail, e.head, capacity=cap)
        mincut = min(nx.maximum_flow_value(flow, 1, t) for t in d.sinks)
        res = B.search_linear_codes(unit, AdversarySet(), d, 1, 2, budget=200_000)
        assert res.exhaustive
        assert res.message_symbols == mincut

    @settings(max_examples=30)
    @given(dags(rates=(0, 1)))
    def test_sound_against_cut_bound(self, netadv):
        net, adv = netadv
        d = net.demands[0]
        res = B.search_linear_codes(net, adv, d, 1, 2, budget=20_000)
        assert res.best_rate <= B.secure_cut_bound(net, adv, d.source, d.sinks).value
        if res.code is not None:
            assert C.evaluate_code(net, adv, d, res.code).is_secure_and_reliable


class TestPipelines:
    def test_model1_three_edge(self, three_edge):
        net, adv = three_edge
        res = B.model1_lower_bound(net, adv)
        assert res.rate == 3.0 and res.cut.value == 3.0
        assert [r.kind for r in res.records] == ["model1", "model1", "equivalence"]
        assert len(res.adversary) == 1

    def test_model1_four_node_both_orders(self, four_node):
        net, adv = four_node
        rates = [B.model1_lower_bound(net, adv, ordering=[o]).rate for o in ("e1", "e3")]
        assert max(rates) == 0.5
        assert all(r <= 1.0 for r in rates)

    def test_model1_singletons_only_use_equivalence(self, four_node):
        net, _ = four_node
        adv = AdversarySet((frozenset({net.resolve("e2")}),))
        res = B.model1_lower_bound(net, adv)
        assert {r.kind for r in res.records} == {"equivalence"}

    def test_upper_bound_four_node(self, four_node):
        cut, upper, records = B.upper_bound(*four_node)
        assert cut.value == 1.0 and upper.is_noiseless and len(records) == 5

    def test_model2_three_edge_search(self, three_edge):
        net, adv = three_edge
        res = B.model2_lower_bound(net, adv)
        assert res.rate == 4.0
        assert res.search.report.all_demands_met
        rate, enh, search = res
        assert enh.num_nodes == 10

    def test_model2_three_edge_code(self, three_edge):
        net, adv = three_edge
        code, _ = C.load_code(data_path("three_edge_enhanced_code.json"))
        assert B.model2_lower_bound(net, adv, code=code).rate == 4.0

    def test_model2_without_adversary_is_multicast(self, three_edge):
        net, _ = three_edge
        res = B.model2_lower_bound(net, AdversarySet())
        assert res.rate == 6.0 == res.cut.value

    def test_model2_key_delivery(self):
        e = EdgeId(1, 2, 1)
        net = Network(2, {e: Noiseless(Fraction(1, 2), Fraction(1, 2))}, (Demand(1, {2}),))
        adv = AdversarySet((frozenset({e}),))
        with pytest.raises(KeyDeliveryError) as info:
            B.model2_lower_bound(net, adv, n=1)
        assert info.value.sets == (frozenset({e}),)
        assert B.model2_lower_bound(net, adv, n=2).rate == 0.5

    def test_literature_value_is_cited_not_computed(self):
        assert B.LITERATURE_CONVERSE["source"] == "paper"
        assert B.LITERATURE_CONVERSE["computed"] is False
