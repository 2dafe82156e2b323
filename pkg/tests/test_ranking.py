import math
import random
from fractions import Fraction

import pytest
import scipy.stats

from scgmine.edgelist import EdgeListDocument
from scgmine.errors import StatisticsError
from scgmine.generator import Candidate
from scgmine.graph import LabeledGraph
from scgmine.ranking import (
    RankingMetric,
    SupportIndex,
    ap_at_k,
    average_ranks,
    completion_score,
    map_at_k,
    rank,
    retrieved_count,
    safe_spearman,
    score,
    spearman,
    spearman_pvalue,
)

P, E, F, C = (RankingMetric.PROBABILITY, RankingMetric.EDGES_SCALED, RankingMetric.FACTORIAL,
              RankingMetric.COMPRESSION)


def chain(n, label="Add_port", tail="Add_Port"):
    """Component with ``n`` distinct ports hanging off it."""
    nodes = {0: "Add_Component", **{i: tail for i in range(1, n + 1)}}
    return LabeledGraph(nodes, [(0, i, label) for i in range(1, n + 1)])


def cand(g, logprobs):
    return Candidate(EdgeListDocument.from_graph(g), (), token_logprobs=tuple(logprobs), status="complete")


def distinct(k):
    """``k`` pairwise non-isomorphic single-edge graphs."""
    return [LabeledGraph({0: f"Add_T{i}", 1: "Add_Port"}, [(0, 1, "Add_port")]) for i in range(k)]


# -- scores -----------------------------------------------------------------

def test_certain_single_edge_scores_zero():
    c = cand(chain(1), [0.0] * 7)
    assert score(c, P) == 0 and score(c, E) == 0 and score(c, F) == 0


def test_factorial_value():
    c = cand(chain(3), [math.log(0.01)])
    assert score(c, F) == pytest.approx(math.log(0.01) + math.log(6))
    assert round(score(c, F), 3) == -2.813


def test_edges_scaled_is_per_edge_mean():
    c = cand(chain(4), [math.log(0.5)] * 4)
    assert score(c, E) == pytest.approx(math.log(0.5))
    assert score(c, P) == pytest.approx(4 * math.log(0.5))


def test_compression_support():
    db = [chain(3), chain(2), chain(1, "Add_requirement", "Add_Requirement")]
    two = cand(chain(2), [-1.0])
    # chain(2) embeds in chain(3) and chain(2): support 2, size 3 nodes + 2 edges
    assert score(two, C, db) == (2 - 1) * (3 + 2 - 1)
    absent = cand(LabeledGraph({0: "Add_Package", 1: "Add_Component"}, [(0, 1, "Add_component")]), [-1.0])
    assert score(absent, C, db) == -(2 + 1 - 1)


def test_compression_needs_db():
    with pytest.raises(ValueError):
        score(cand(chain(1), [-1.0]), C)


def test_support_index_multiplicities():
    idx = SupportIndex([chain(2), chain(2), chain(3)])
    assert len(idx) == 3 and len(idx.classes) == 2
    assert idx.support(chain(1)) == (3, True)
    assert idx.support(chain(3)) == (1, True)


def test_metric_parse():
    assert RankingMetric.parse("edgesscaled") is E
    assert RankingMetric.parse("COMPRESSION") is C
    with pytest.raises(ValueError):
        RankingMetric.parse("bleu")


# -- rank ---------------------------------------------------------------------

def test_rank_single_and_ties():
    a = cand(chain(1), [-1.0])
    assert rank([a], P) == [a]
    g1 = LabeledGraph({0: "Add_B", 1: "Add_Port"}, [(0, 1, "Add_port")])
    g2 = LabeledGraph({0: "Add_A", 1: "Add_Port"}, [(0, 1, "Add_port")])
    c1, c2 = cand(g1, [-1.0]), cand(g2, [-1.0])
    assert rank([c1, c2], P) == [c2, c1]


def test_rank_permutation_invariant_1000_shuffles():
    rng = random.Random(17)
    graphs = distinct(6) + [chain(2), chain(3)]
    # repeated scores force the tie-break to do real work
    cands = [cand(g, [rng.choice([-1.0, -2.0, -3.0])]) for g in graphs]
    db = graphs + [chain(3)]
    for metric in RankingMetric:
        reference = [c.text for c in rank(cands, metric, db)]
        shuffled = list(cands)
        for _ in range(1000 if metric is not C else 100):
            rng.shuffle(shuffled)
            assert [c.text for c in rank(shuffled, metric, db)] == reference


def test_scale_invariance_for_equal_edge_counts():
    rng = random.Random(4)
    graphs = distinct(8)
    cands = [cand(g, [math.log(rng.uniform(0.05, 1.0))]) for g in graphs]
    for cst in (1.0, 0.5, 0.01):
        scaled = [cand(c.graph, [c.logprob + math.log(cst)]) for c in cands]
        for metric in (P, E, F):
            assert [c.text for c in rank(scaled, metric)] == [c.text for c in rank(cands, metric)]


# -- AP / MAP -------------------------------------------------------------------

def test_ap_hand_value():
    rel = distinct(3)
    other = [chain(2), chain(3)]
    ranked = [other[0], rel[0], rel[1], other[1], rel[2]]
    assert ap_at_k(ranked, rel, 3) == pytest.approx(7 / 18, abs=1e-15)
    assert Fraction(ap_at_k(ranked, rel, 3)).limit_denominator(100) == Fraction(7, 18)


def test_ap_edge_cases():
    rel = distinct(3)
    assert ap_at_k(rel, rel, 3) == 1.0
    assert ap_at_k(rel + [chain(2)], rel, None) == 1.0
    assert ap_at_k([chain(2), chain(3)], rel, 2) == 0.0
    with pytest.raises(ValueError):
        ap_at_k(rel, [], 3)
    with pytest.raises(ValueError):
        ap_at_k(rel, rel, 0)


def test_ap_duplicates_count_once():
    rel = distinct(2)
    assert ap_at_k([rel[0], rel[0], rel[1]], rel) == pytest.approx((1 + 2 / 3) / 2)


def test_ap_monotone_in_k():
    rng = random.Random(9)
    pool = distinct(10)
    for _ in range(200):
        rel = rng.sample(pool, 3)
        ranked = rng.sample(pool, rng.randint(1, 10))
        values = [ap_at_k(ranked, rel, k) for k in range(1, 11)] + [ap_at_k(ranked, rel, None)]
        assert values == sorted(values)


def test_map_values():
    rel = distinct(3)
    assert map_at_k([(rel, rel)], 3) == ap_at_k(rel, rel, 3)
    assert map_at_k([(rel, rel), ([chain(2)], rel)], 3) == 0.5
    with pytest.raises(ValueError):
        map_at_k([], 3)


def test_map_five_rankings_hand_computed():
    r = distinct(4)
    x = [chain(2), chain(3), chain(4)]
    per = [
        ([r[0], r[1], r[2]], r[:3]),          # 1
        ([x[0], r[0], x[1], r[1]], r[:2]),     # (1/2 + 2/4) / 2 = 1/2
        ([x[0], x[1], r[0]], r[:1]),           # 1/3
        ([r[3], x[0], r[2]], r[2:4]),          # (1 + 2/3) / 2 = 5/6
        ([x[0], x[1]], r[:2]),                 # 0
    ]
    expected = (1 + Fraction(1, 2) + Fraction(1, 3) + Fraction(5, 6) + 0) / 5
    assert map_at_k(per, None) == pytest.approx(float(expected), abs=1e-15)


def test_retrieved_count():
    rel = distinct(3)
    assert retrieved_count([rel[2], chain(2), rel[0]], rel) == 2


# -- completion score --------------------------------------------------------

def test_completion_score_cases():
    truth = chain(2)
    assert completion_score(truth, truth) == 3
    assert completion_score(chain(3), truth) == 2
    assert completion_score(chain(1), truth) == 1
    alien = LabeledGraph({0: "Add_Package", 1: "Add_Package"}, [(0, 1, "Add_subpackage")])
    assert completion_score(alien, truth) == 0
    assert completion_score(LabeledGraph(), truth) == 1


def test_completion_score_swap_symmetry():
    rng = random.Random(1)
    graphs = [chain(n) for n in (1, 2, 3)] + distinct(2)
    swap = {0: 0, 1: 2, 2: 1, 3: 3}
    for _ in range(50):
        a, b = rng.choice(graphs), rng.choice(graphs)
        assert completion_score(b, a) == swap[completion_score(a, b)]


# -- Spearman -------------------------------------------------------------------

def test_spearman_hand_values():
    assert spearman([1, 2, 3], [2, 1, 3]) == pytest.approx(0.5, abs=1e-15)
    xs = [3.0, 1.0, 4.0, 1.5, 9.0]
    assert spearman(xs, xs) == pytest.approx(1.0)
    assert spearman(xs, [-x for x in xs]) == pytest.approx(-1.0)


def test_average_ranks_ties():
    assert list(average_ranks([10, 20, 20, 5])) == [2.0, 3.5, 3.5, 1.0]


def test_spearman_matches_scipy():
    rng = random.Random(5)
    for _ in range(200):
        n = rng.randint(3, 30)
        xs = [rng.randint(0, 6) for _ in range(n)]
        ys = [rng.randint(0, 6) for _ in range(n)]
        if len(set(xs)) < 2 or len(set(ys)) < 2:
            continue
        assert spearman(xs, ys) == pytest.approx(scipy.stats.spearmanr(xs, ys).statistic, abs=1e-12)


def test_spearman_errors():
    with pytest.raises(StatisticsError):
        spearman([1, 1, 1], [1, 2, 3])
    with pytest.raises(StatisticsError):
        spearman([1], [1])
    with pytest.raises(StatisticsError):
        spearman([1, 2], [1, 2, 3])
    assert safe_spearman([1, 1], [1, 2]) is None


def test_pvalue():
    xs = list(range(12))
    assert spearman_pvalue(xs, xs) == pytest.approx(1 / 10001)
    rng = random.Random(2)
    ys = xs[:]
    rng.shuffle(ys)
    p = spearman_pvalue(xs, ys)
    assert spearman_pvalue(xs, ys) == p
    exact = scipy.stats.permutation_test((xs, ys), lambda a, b: scipy.stats.spearmanr(a, b).statistic,
                                         permutation_type="pairings", n_resamples=20000, random_state=0).pvalue
    assert p == pytest.approx(exact, abs=0.03)
