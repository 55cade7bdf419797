import json
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wiretapnet import codes as C
from wiretapnet import data_path, gf
from wiretapnet.errors import BudgetError, PreconditionError, StructuralError
from wiretapnet.netmodel import load_network
from wiretapnet.transform import build_a_enhanced


HAT = load_network(data_path("four_node_pipes.json"))


def golden(net):
    return C.load_code(data_path("four_node_code.json"), net)


def random_matrix(rng, r, c, q=2):
    return rng.integers(0, q, size=(r, c))


def random_invertible(rng, n, q=2):
    while True:
        M = random_matrix(rng, n, n, q)
        if gf.rank(M, q) == n:
            return M


class TestOracles:
    def test_zero_message_block_leaks_nothing(self):
        assert C.leakage_rank(np.zeros((2, 2)), [[1, 0], [0, 1]]) == 0.0

    def test_keyless_full_rank_leaks_everything(self):
        assert C.leakage_rank([[1, 0, 0], [0, 1, 1]], np.zeros((2, 1))) == 2.0
        assert C.leakage_rank([[1, 2]], np.zeros((1, 0)), q=3) == pytest.approx(np.log2(3))

    def test_dimension_mismatch(self):
        with pytest.raises(StructuralError):
            C.leakage_rank(np.zeros((2, 2)), np.zeros((3, 1)))
        with pytest.raises(StructuralError):
            C.decodable(np.zeros((2, 2)), np.zeros((3, 1)), 2)

    def test_decodable_basics(self):
        assert C.decodable(np.eye(2), np.zeros((2, 1)), 2)
        assert not C.decodable(np.zeros((2, 2)), np.eye(2), 1)

    def test_three_combinations_decode_fourth_message(self):
        # W1..W3 directly, then W4+T5, W4+T6, W4+T5+T6
        Cw = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1], [0, 0, 0, 1], [0, 0, 0, 1]])
        D = np.array([[0, 0], [0, 0], [0, 0], [1, 0], [0, 1], [1, 1]])
        assert C.decodable(Cw, D, 4)
        assert not C.decodable(Cw[:5], D[:5], 4)

    @settings(max_examples=120)
    @given(st.integers(0, 2**32 - 1))
    def test_rank_matches_enumeration(self, seed):
        rng = np.random.default_rng(seed)
        k = int(rng.integers(1, 5))
        t = int(rng.integers(0, 9 - k))
        r = int(rng.integers(1, 5))
        A, B = random_matrix(rng, r, k), random_matrix(rng, r, t)
        table = C.TableCode.from_matrices(A, B)
        assert C.leakage_rank(A, B) == C.leakage_enumeration(table, ["view"])

    @settings(max_examples=30)
    @given(st.integers(0, 2**32 - 1))
    def test_rank_matches_enumeration_over_gf3(self, seed):
        rng = np.random.default_rng(seed)
        A, B = random_matrix(rng, 3, 2, 3), random_matrix(rng, 3, 2, 3)
        table = C.TableCode.from_matrices(A, B, q=3)
        assert C.leakage_rank(A, B, 3) == pytest.approx(C.leakage_enumeration(table, ["view"]), abs=1e-12)

    @settings(max_examples=50)
    @given(st.integers(0, 2**32 - 1))
    def test_leakage_monotone_in_view(self, seed):
        rng = np.random.default_rng(seed)
        size = 16
        tables = {f"s{i}": rng.integers(0, 3, size=size) for i in range(3)}
        code = C.TableCode(4, 4, tables)
        small = C.leakage_enumeration(code, ["s0"])
        mid = C.leakage_enumeration(code, ["s0", "s1"])
        big = C.leakage_enumeration(code, ["s0", "s1", "s2"])
        assert small <= mid + 1e-12 and mid <= big + 1e-12
        assert 0 <= big <= 2 + 1e-12

    @settings(max_examples=50)
    @given(st.integers(0, 2**32 - 1))
    def test_decodable_invariant_under_recombination(self, seed):
        rng = np.random.default_rng(seed)
        k, t, r = 3, 2, 5
        Cw, D = random_matrix(rng, r, k), random_matrix(rng, r, t)
        M = random_invertible(rng, r)
        assert C.decodable(Cw, D, k) == C.decodable(M @ Cw % 2, M @ D % 2, k)

    @settings(max_examples=30)
    @given(st.integers(0, 2**32 - 1))
    def test_key_only_views_leak_nothing(self, seed):
        rng = np.random.default_rng(seed)
        B = random_matrix(rng, 3, 4)
        assert C.leakage_rank(np.zeros((3, 2)), B) == 0.0
        assert C.leakage_enumeration(C.TableCode.from_matrices(np.zeros((3, 2)), B), ["view"]) == 0.0

    def test_enumeration_budget(self):
        with pytest.raises(BudgetError, match="rank oracle"):
            C.TableCode.from_matrices(np.zeros((1, 20)), np.zeros((1, 10)))

    def test_exposed_message_bit(self):
        # W1 in the clear on a public symbol
        table = C.TableCode.from_matrices([[1, 0]], [[0]])
        assert C.leakage_enumeration(table, ["view"]) == 1.0

    def test_map_decoder_error(self):
        table = C.TableCode.from_matrices([[1, 0]], [[0]])
        # only W1 is visible, so W2 is a coin flip
        assert C.decoding_error_enumeration(table, ["view"]) == Fraction(1, 2)


class TestNetworkCodes:
    def test_golden_code_is_secure(self, four_node_pipes):
        net, adv = four_node_pipes
        code, demand = golden(net)
        for method in ("rank", "enumeration"):
            rep = C.evaluate_code(net, adv, demand, code, method)
            assert rep.rate == 1.0
            assert rep.decoding_error == {2: 0, 3: 0}
            assert rep.leakage == {"{e1,e3}": 0.0, "{e2}": 0.0}

    def test_eavesdropper_views(self, four_node_pipes):
        net, adv = four_node_pipes
        code, demand = golden(net)
        v = C.eavesdropper_view(net, {net.resolve("e2")}, code)
        assert list(v) == ["pub:1-4-1"] and v["pub:1-4-1"].tolist() == [[0, 1, 1]]
        v = C.eavesdropper_view(net, {net.resolve("e1"), net.resolve("e3")}, code)
        assert sorted(v) == ["pub:1-2-1", "pub:1-3-1"]
        assert C.eavesdropper_view(net, set(), code) == {}

    def test_view_of_noisy_edge_refused(self, four_node, four_node_pipes):
        code, _ = golden(four_node_pipes[0])
        net, _ = four_node
        with pytest.raises(PreconditionError, match="noisy"):
            C.eavesdropper_view(net, {net.resolve("e1")}, code)

    def test_budget_violation_is_dimension_error(self, four_node_pipes):
        net, adv = four_node_pipes
        doc = json.load(open(data_path("four_node_code.json")))
        doc["edges"]["e2"]["pub"].append([1, 0, 0])
        code, demand = C.code_from_dict(doc, net)
        with pytest.raises(StructuralError, match="budget"):
            C.evaluate_code(net, adv, demand, code)

    def test_exposed_code_leaks(self, four_node_pipes):
        net, adv = four_node_pipes
        doc = json.load(open(data_path("four_node_code.json")))
        doc["edges"]["e2"]["pub"] = [[0, 1, 0]]
        code, demand = C.code_from_dict(doc, net)
        rep = C.evaluate_code(net, adv, demand, code)
        assert rep.leakage["{e2}"] == 1.0
        assert not rep.is_secure_and_reliable

    def test_code_file_round_trip(self, four_node_pipes):
        net, _ = four_node_pipes
        code, demand = golden(net)
        again, d2 = C.code_from_dict(json.loads(C.dump_code(code, demand, net)), net)
        assert again.serialization() == code.serialization() and d2 == demand

    def test_symbol_budget_floors(self):
        assert C.symbol_budget(Fraction(1, 2), 3, 2) == 1
        assert C.symbol_budget(Fraction(3, 2), 2, 3) == 1  # 3 < 2**3 < 9
        assert C.symbol_budget(Fraction(2), 2, 3) == 2  # 9 <= 16

    @settings(max_examples=100)
    @given(st.integers(0, 2**32 - 1))
    def test_random_codes_oracles_agree(self, seed):
        net, adv = HAT
        rng = np.random.default_rng(seed)
        k, t = int(rng.integers(1, 3)), int(rng.integers(0, 3))
        space = C.SymbolSpace(2, k, {1: t} if t else {}, 2)
        problem = C.network_problem(net, adv, net.demands[0], space)
        local = {lk.name: random_matrix(rng, lk.size, problem.input_size(lk.tail)) for lk in problem.links}
        code = C.LinearNetworkCode(space, local)
        a = C.evaluate_code(net, adv, net.demands[0], code, "rank")
        b = C.evaluate_code(net, adv, net.demands[0], code, "enumeration")
        assert a.leakage == b.leakage
        assert a.decoding_error == b.decoding_error

    def test_evaluation_deterministic(self, four_node_pipes):
        net, adv = four_node_pipes
        code, demand = golden(net)
        assert C.evaluate_code(net, adv, demand, code) == C.evaluate_code(net, adv, demand, code)

    def test_code_from_global_rejects_acausal(self, four_node_pipes):
        net, adv = four_node_pipes
        space = C.SymbolSpace(2, 2, {1: 1}, 2)
        problem = C.network_problem(net, adv, net.demands[0], space)
        # node 4 only hears W2+K1, so it cannot emit W1
        with pytest.raises(PreconditionError):
            C.code_from_global(problem, {"pub:1-4-1": [[0, 1, 1]], "conf:4-2-1": [[1, 0, 0]]})


class TestEnhanced:
    def test_three_edge_enhanced_code(self, three_edge):
        net, adv = three_edge
        enh = build_a_enhanced(net, adv)
        code, _ = C.load_code(data_path("three_edge_enhanced_code.json"))
        rep = C.evaluate_enhanced(enh, code)
        assert (rep.rate_messages, rep.rate_keys) == (4.0, 6.0)
        assert rep.decodes == {2: True, 7: True, 8: True, 9: True}

    def test_three_edge_enhanced_code_breaks_without_key_pipe(self, three_edge):
        net, adv = three_edge
        enh = build_a_enhanced(net, adv)
        code, _ = C.load_code(data_path("three_edge_enhanced_code.json"))
        local = dict(code.local)
        local["key:E1"] = np.zeros_like(local["key:E1"])
        rep = C.evaluate_enhanced(enh, C.LinearNetworkCode(code.space, local))
        assert rep.decodes[7] is False and rep.decodes[2] is True
