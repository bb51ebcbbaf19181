import itertools

import numpy as np
import pytest

from gapalign.clustering import PredicateClustering
from gapalign.errors import OracleSizeError
from gapalign.flooding import (
    AlignmentState,
    brute_force_optimal_alignment,
    build_ipg,
    build_pcg,
    flood,
    initial_similarity,
    predicate_induced_candidates,
    propagation_step,
)
from gapalign.graph import Triple, build_graph, canonicalize

from helpers import A5, A6, A7, A8, B3, B4, B5, random_graph, random_sigma0, switch_like_pair, tiny_store


def canon(triples, assignment):
    return canonicalize(build_graph(triples), PredicateClustering(k=max(assignment.values()) + 1, assignment=assignment))


# --- PCG ----------------------------------------------------------------------

def test_pcg_edge_from_shared_label():
    gm = canon([Triple("the switch", "closes", "the circuit")], {"closes": 0})
    gs = canon([Triple("The switch", "closes", "the circuit")], {"closes": 0})
    pcg = build_pcg(gm, gs)
    assert ((0, 0), (1, 1), 0) in pcg.edges


def test_pcg_no_edge_on_label_mismatch():
    gm = canon([Triple("a", "p", "b")], {"p": 0, "q": 1})
    gs = canon([Triple("x", "q", "y")], {"p": 0, "q": 1})
    pcg = build_pcg(gm, gs)
    assert pcg.edges == ()
    assert len(pcg.pairs()) == 4  # isolated pairs retained


def test_pcg_node_set_is_full_product_of_real_nodes():
    gm, gs = switch_like_pair()
    pcg = build_pcg(gm, gs)
    assert len(pcg.pairs()) == 4 * 3
    assert len(pcg.edges) == 8


def test_pcg_excludes_dummy_pairs():
    gm = canon([Triple("a", "p", None), Triple("a", "q", "b")], {"p": 0, "q": 1})
    gs = canon([Triple("x", "p", None)], {"p": 0, "q": 1})
    pcg = build_pcg(gm, gs)
    assert set(pcg.m_nodes) == {0, 2}  # the dummy is node 1
    assert set(pcg.s_nodes) == {0}
    assert pcg.edges == ()  # the only shared-label edge targets dummies


def test_pcg_requires_canonical_graphs():
    gm = build_graph([Triple("a", "p", "b")])
    gs = canon([Triple("x", "p", "y")], {"p": 0})
    with pytest.raises(ValueError):
        build_pcg(gm, gs)


# --- IPG ----------------------------------------------------------------------

def test_ipg_worked_example_weights():
    gm, gs = switch_like_pair()
    ipg = build_ipg(build_pcg(gm, gs))
    weights = {(e.src, e.dst, e.direction): e.weight for e in ipg.edges}
    assert weights[((A5, B3), (A7, B4), "forward")] == 0.25
    assert weights[((A5, B3), (A7, B5), "forward")] == 0.25
    assert weights[((A5, B3), (A6, B4), "forward")] == 0.25
    assert weights[((A5, B3), (A6, B5), "forward")] == 0.25
    assert weights[((A7, B4), (A5, B3), "reverse")] == 0.5
    assert weights[((A7, B4), (A8, B3), "reverse")] == 0.5


def test_ipg_single_edge_weights_one():
    gm = canon([Triple("a", "p", "b")], {"p": 0})
    gs = canon([Triple("x", "p", "y")], {"p": 0})
    ipg = build_ipg(build_pcg(gm, gs))
    weights = {(e.src, e.dst, e.direction): e.weight for e in ipg.edges}
    assert weights[((0, 0), (1, 1), "forward")] == 1.0
    assert weights[((1, 1), (0, 0), "reverse")] == 1.0


def test_ipg_group_weights_sum_to_one():
    rng = np.random.RandomState(0)
    for _ in range(30):
        gm = random_graph(rng, 4, 5, [0, 1])
        gs = random_graph(rng, 4, 5, [0, 1])
        ipg = build_ipg(build_pcg(gm, gs))
        groups = {}
        for e in ipg.edges:
            groups.setdefault((e.src, e.label, e.direction), []).append(e.weight)
        for weights in groups.values():
            assert sum(weights) == pytest.approx(1.0, abs=1e-12)


# --- initial similarity ---------------------------------------------------------

def test_initial_similarity_identical_phrases():
    gm = canon([Triple("the switch", "p", "a switch")], {"p": 0})
    gs = canon([Triple("The switch", "p", "x")], {"p": 0})
    store = tiny_store({"the": [1, 0], "switch": [0, 1], "a": [1, 0], "x": [0.6, 0.8]})
    sim = initial_similarity(gm, gs, store)
    assert sim[(0, 0)] == pytest.approx(1.0, abs=1e-12)


def test_initial_similarity_oov_pair_is_zero():
    store = tiny_store({"known": [1.0, 0.0]})
    gm = canon([Triple("mystery", "p", "known")], {"p": 0})
    gs = canon([Triple("enigma", "p", "known")], {"p": 0})
    sim = initial_similarity(gm, gs, store)
    assert sim[(0, 0)] == 0.0


def test_alignment_state_json_fixture_roundtrip():
    # parse/ingest fixture: published sigma0 for a weak pair is preserved verbatim
    state = AlignmentState.from_pairs([(5, 4, 0.383, 0.0005), (1, 3, 1.0, 1.0)])
    restored = AlignmentState.from_json(state.to_json())
    assert restored.get0(5, 4) == pytest.approx(0.383)
    assert restored.get_c(5, 4) == pytest.approx(0.0005)
    assert restored.get_f(5, 4) == pytest.approx(0.383)
    assert restored.get_f(1, 3) == 1.0


# --- flooding -------------------------------------------------------------------

def test_unnormalized_first_iterate_matches_recurrence():
    gm, gs = switch_like_pair()
    pcg = build_pcg(gm, gs)
    ipg = build_ipg(pcg)
    rng = np.random.RandomState(123)
    sigma0 = random_sigma0(rng, pcg)
    u = propagation_step(ipg, sigma0)
    expected = sigma0[(A7, B4)] + 0.25 * sigma0[(A5, B3)] + 0.25 * sigma0[(A8, B3)]
    assert u[(A7, B4)] == pytest.approx(expected, abs=1e-12)


def test_flood_single_isolated_pair():
    gm = canon([Triple("a", "p", "b")], {"p": 0, "q": 1})
    gs = canon([Triple("x", "q", "y")], {"p": 0, "q": 1})
    pcg = build_pcg(gm, gs)
    ipg = build_ipg(pcg)
    sigma0 = {pair: 0.0 for pair in pcg.pairs()}
    sigma0[(0, 0)] = 0.7
    state = flood(ipg, sigma0, epsilon=1e-9, i_max=100)
    # the sole positive pair normalizes to 1 and stays there
    assert state.get_c(0, 0) == pytest.approx(1.0)
    assert state.converged_naturally


def test_flood_two_isolated_pairs_preserve_ratio():
    gm = canon([Triple("a", "p", "b")], {"p": 0, "q": 1})
    gs = canon([Triple("x", "q", "y")], {"p": 0, "q": 1})
    pcg = build_pcg(gm, gs)
    ipg = build_ipg(pcg)
    sigma0 = {pair: 0.0 for pair in pcg.pairs()}
    sigma0[(0, 0)] = 0.8
    sigma0[(1, 1)] = 0.4
    state = flood(ipg, sigma0, epsilon=1e-9, i_max=100)
    assert state.get_c(0, 0) == pytest.approx(1.0)
    assert state.get_c(1, 1) == pytest.approx(0.5)
    assert state.get_f(0, 0) == pytest.approx(1.0)
    assert state.get_f(1, 1) == pytest.approx(0.5)


def test_flood_all_zero_sigma_is_fixpoint():
    gm = canon([Triple("a", "p", "b")], {"p": 0, "q": 1})
    gs = canon([Triple("x", "q", "y")], {"p": 0, "q": 1})
    pcg = build_pcg(gm, gs)
    ipg = build_ipg(pcg)
    sigma0 = {pair: 0.0 for pair in pcg.pairs()}
    state = flood(ipg, sigma0)
    assert state.converged_naturally
    assert np.all(state.sigma_c == 0.0)


def test_flood_sigma_f_is_pairwise_max():
    gm, gs = switch_like_pair()
    pcg = build_pcg(gm, gs)
    ipg = build_ipg(pcg)
    rng = np.random.RandomState(5)
    state = flood(ipg, random_sigma0(rng, pcg))
    assert np.array_equal(state.sigma_f, np.maximum(state.sigma0, state.sigma_c))


def test_flood_invariants_on_random_pcgs():
    rng = np.random.RandomState(2024)
    for _ in range(200):
        n_m = int(rng.randint(1, 6))
        n_s = int(rng.randint(1, 6))
        gm = random_graph(rng, n_m, int(rng.randint(1, 7)), [0, 1])
        gs = random_graph(rng, n_s, int(rng.randint(1, 7)), [0, 1])
        pcg = build_pcg(gm, gs)
        if len(pcg.pairs()) > 25:
            continue
        ipg = build_ipg(pcg)
        sigma0 = random_sigma0(rng, pcg)
        state = flood(ipg, sigma0, epsilon=1e-6, i_max=500, record_history=True)
        assert state.iterations_used <= 500
        for snapshot in state.history:
            assert snapshot.min() >= -1e-15
            assert snapshot.max() <= 1.0 + 1e-12
            if snapshot.max() > 0:
                assert snapshot.max() == pytest.approx(1.0, abs=1e-12)


def test_flood_terminates_and_flags_forced_convergence():
    gm, gs = switch_like_pair()
    pcg = build_pcg(gm, gs)
    ipg = build_ipg(pcg)
    rng = np.random.RandomState(9)
    state = flood(ipg, random_sigma0(rng, pcg), epsilon=1e-15, i_max=3)
    assert state.iterations_used == 3
    assert not state.converged_naturally


def test_flood_edgeless_preserves_argmax_order():
    rng = np.random.RandomState(77)
    gm = canon([Triple("a", "p", "b"), Triple("b", "p", "c")], {"p": 0, "q": 1})
    gs = canon([Triple("x", "q", "y"), Triple("y", "q", "z")], {"p": 0, "q": 1})
    pcg = build_pcg(gm, gs)
    assert pcg.edges == ()
    for _ in range(20):
        sigma0 = random_sigma0(rng, pcg)
        state = flood(ipg=build_ipg(pcg), sigma0=sigma0)
        flat0 = state.sigma0.ravel()
        flat_c = state.sigma_c.ravel()
        assert np.argmax(flat0) == np.argmax(flat_c)
        # pure rescaling preserves the full ordering
        assert np.array_equal(np.argsort(flat0, kind="stable"), np.argsort(flat_c, kind="stable"))


def test_flood_invariant_under_consistent_relabeling():
    gm, gs = switch_like_pair()
    relabel = {0: 7}
    gm2 = canon(
        [
            Triple("the switch", "closes", "the circuit"),
            Triple("the switch", "closes", "the bulb"),
            Triple("the battery", "closes", "the circuit"),
            Triple("the battery", "closes", "the bulb"),
        ],
        {"closes": 7},
    )
    gs2 = canon(
        [
            Triple("The switch", "closes", "the circuit"),
            Triple("The switch", "closes", "the light"),
        ],
        {"closes": 7},
    )
    rng = np.random.RandomState(4)
    pcg1 = build_pcg(gm, gs)
    pcg2 = build_pcg(gm2, gs2)
    sigma0 = random_sigma0(rng, pcg1)
    state1 = flood(build_ipg(pcg1), sigma0)
    state2 = flood(build_ipg(pcg2), sigma0)
    assert np.array_equal(state1.sigma_c, state2.sigma_c)
    assert {(e.src, e.dst) for e in build_ipg(pcg1).edges} == {
        (e.src, e.dst) for e in build_ipg(pcg2).edges
    }


# --- brute-force optimal alignment ---------------------------------------------

def test_brute_force_singleton_product():
    gm = canon([Triple("a", "p", "b")], {"p": 0})
    gs = canon([Triple("x", "p", "y")], {"p": 0})
    sigma = {(0, 0): 0.6, (1, 1): 0.3, (0, 1): 0.9, (1, 0): 0.9}
    best = brute_force_optimal_alignment(gm, gs, sigma)
    assert len(best.pairings) == 1
    assert best.pairings[0].subject_pair == (0, 0)
    assert best.pairings[0].object_pair == (1, 1)
    assert best.score == pytest.approx(0.9)


def test_brute_force_two_by_two_hand_enumeration():
    # two shared predicates, two candidate pairings each -> four combinations
    gm = canon([Triple("m0", "p", "m1"), Triple("m2", "q", "m3")], {"p": 0, "q": 1})
    gs = canon(
        [
            Triple("s0", "p", "s1"),
            Triple("s2", "p", "s3"),
            Triple("s4", "q", "s5"),
            Triple("s6", "q", "s7"),
        ],
        {"p": 0, "q": 1},
    )
    sigma = {
        (0, 0): 0.9, (1, 1): 0.8,  # p: M edge with S edge0 -> 1.7
        (0, 2): 0.1, (1, 3): 0.1,  # p: M edge with S edge1 -> 0.2
        (2, 4): 0.2, (3, 5): 0.1,  # q: M edge with S edge0 -> 0.3
        (2, 6): 0.7, (3, 7): 0.9,  # q: M edge with S edge1 -> 1.6
    }
    best = brute_force_optimal_alignment(gm, gs, sigma)
    # hand enumeration: 1.7+0.3, 1.7+1.6, 0.2+0.3, 0.2+1.6 -> 3.3 dominates
    assert best.score == pytest.approx(3.3)
    chosen = {(p.subject_pair, p.object_pair) for p in best.pairings}
    assert chosen == {((0, 0), (1, 1)), ((2, 6), (3, 7))}


def test_brute_force_dummy_objects_count_subject_only():
    gm = canon([Triple("a", "p", None)], {"p": 0})
    gs = canon([Triple("x", "p", None)], {"p": 0})
    sigma = {(0, 0): 0.4}
    best = brute_force_optimal_alignment(gm, gs, sigma)
    assert best.pairings[0].object_pair is None
    assert best.score == pytest.approx(0.4)


def test_brute_force_size_bound():
    triples_m = [Triple(f"m{i}", "p", f"m{i+1}") for i in range(4)]
    triples_s = [Triple(f"s{i}", "p", f"s{i+1}") for i in range(4)]
    gm = canon(triples_m, {"p": 0})
    gs = canon(triples_s, {"p": 0})
    with pytest.raises(OracleSizeError):
        brute_force_optimal_alignment(gm, gs, {}, size_bound=10)


def test_brute_force_tie_takes_first_enumeration_order():
    gm = canon([Triple("a", "p", "b")], {"p": 0})
    gs = canon([Triple("x", "p", "y"), Triple("y", "p", "x")], {"p": 0})
    sigma = {(0, 0): 0.5, (1, 1): 0.5, (0, 1): 0.5, (1, 0): 0.5}
    best = brute_force_optimal_alignment(gm, gs, sigma)
    # both pairings score 1.0; the first (edge order) wins
    assert best.pairings[0].subject_pair == (0, 0)


def test_predicate_induced_candidates_shared_labels_only():
    gm = canon([Triple("a", "p", "b"), Triple("a", "q", "c")], {"p": 0, "q": 1})
    gs = canon([Triple("x", "p", "y")], {"p": 0, "q": 1})
    candidates = predicate_induced_candidates(gm, gs)
    assert set(candidates) == {0}
    assert len(candidates[0]) == 1
