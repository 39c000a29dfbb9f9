import math
import random
from fractions import Fraction

import pytest

from privamp.bits import BitString
from privamp.dist import (Dist, JointDist, OracleError, SourceSpec,
                          avg_cond_min_entropy, check_amentropy_lemma,
                          check_condition_lemma, check_econdition_lemma,
                          check_entropies_lemma, condition, dist_to_capped,
                          enumerate_tiny_joints, fixed_point_free_adversaries,
                          flat_sources, min_entropy, min_selfconsistent_eps,
                          stat_distance, verify_nm_condenser, verify_nm_extractor,
                          verify_strong_extractor)
from privamp.primitives import BlockIpExtractor, ToeplitzExt


def bs(s):
    return BitString.from_str(s)


F = Fraction


def _rand_dist(rnd, n):
    weights = [rnd.randrange(8) for _ in range(1 << n)]
    if sum(weights) == 0:
        weights[0] = 1
    total = sum(weights)
    return Dist({BitString(v, n): F(w, total) for v, w in enumerate(weights) if w},
                n)


class TestStatDistance:
    def test_examples(self):
        assert stat_distance(Dist.uniform(1), Dist.point(bs("0"))) == F(1, 2)
        d = _rand_dist(random.Random(0), 2)
        assert stat_distance(d, d) == 0
        flat01 = Dist.flat([bs("00"), bs("01")], 2)
        assert stat_distance(Dist.uniform(2), flat01) == F(1, 2)

    def test_domain_mismatch(self):
        with pytest.raises(OracleError):
            stat_distance(Dist.uniform(1), Dist.uniform(2))

    def test_metric_properties(self):
        rnd = random.Random(5)
        for _ in range(40):
            n = rnd.randrange(1, 3)
            a, b, c = (_rand_dist(rnd, n) for _ in range(3))
            assert stat_distance(a, b) == stat_distance(b, a)
            assert (stat_distance(a, b) == 0) == (a == b)
            assert stat_distance(a, c) <= stat_distance(a, b) + stat_distance(b, c)
            assert 0 <= stat_distance(a, b) <= 1


class TestEntropy:
    def test_min_entropy_examples(self):
        assert min_entropy(Dist.flat([bs("00"), bs("01"), bs("10"), bs("11")], 2)) == 2.0
        assert min_entropy(Dist.point(bs("101"))) == 0.0
        d = Dist({bs("0"): F(3, 4), bs("1"): F(1, 4)}, 1)
        assert min_entropy(d) == pytest.approx(math.log2(4 / 3))

    def test_avg_cond_examples(self):
        # X uniform 2-bit, W = first bit of X -> 1.0
        j = JointDist.from_function(Dist.uniform(2), lambda v: v.slice(0, 1), 1)
        assert avg_cond_min_entropy(j) == pytest.approx(1.0)
        # X independent of W -> H(X)
        probs = {(x, w): F(1, 8) for x in (bs("00"), bs("01"), bs("10"), bs("11"))
                 for w in (bs("0"), bs("1"))}
        assert avg_cond_min_entropy(JointDist(probs, (2, 1))) == pytest.approx(2.0)
        # X = W uniform -> 0.0
        j3 = JointDist.from_function(Dist.uniform(2), lambda v: v, 2)
        assert avg_cond_min_entropy(j3) == pytest.approx(0.0)

    def test_avg_cond_arity_error(self):
        probs = {(bs("0"), bs("0"), bs("0")): F(1)}
        with pytest.raises(OracleError):
            avg_cond_min_entropy(JointDist(probs, (1, 1, 1)))

    def test_dist_to_capped(self):
        assert dist_to_capped(Dist.point(bs("00")), 1) == F(1, 2)
        assert dist_to_capped(Dist.uniform(2), 2) == 0
        with pytest.raises(OracleError):
            dist_to_capped(Dist.uniform(1), 2)


class TestCondition:
    def test_independent(self):
        probs = {(x, w): F(1, 8) for x in (bs("00"), bs("01"), bs("10"), bs("11"))
                 for w in (bs("0"), bs("1"))}
        j = JointDist(probs, (2, 1))
        assert condition(j, 1, bs("0")) == Dist.uniform(2)

    def test_equal_components(self):
        j = JointDist.from_function(Dist.uniform(2), lambda v: v, 2)
        assert condition(j, 1, bs("10")) == Dist.point(bs("10"))

    def test_zero_probability_error(self):
        j = JointDist.from_function(Dist.point(bs("0")), lambda v: v, 1)
        with pytest.raises(OracleError):
            condition(j, 1, bs("1"))

    def test_condition_lemma_on_random_joints(self):
        for j in enumerate_tiny_joints(60, seed=b"condlemma"):
            assert check_condition_lemma(j) == []


class TestLemmaShadows:
    def test_entropies_lemma(self):
        for j in enumerate_tiny_joints(60, seed=b"entropies"):
            assert check_entropies_lemma(j) == []

    def test_amentropy_lemma(self):
        for j in enumerate_tiny_joints(60, seed=b"amentropy"):
            assert check_amentropy_lemma(j)

    def test_econdition_lemma(self):
        grid = [F(1, 8), F(1, 4), F(1, 2), F(3, 4)]
        for j in enumerate_tiny_joints(40, seed=b"econd"):
            for k in (1, 2):
                if k <= j.lens[0]:
                    assert check_econdition_lemma(j, k, grid) == []


class TestSourceFamilies:
    def test_flat_family_deterministic(self):
        fam1 = flat_sources(4, 2, cap=5, sampled=3, seed=b"x")
        fam2 = flat_sources(4, 2, cap=5, sampled=3, seed=b"x")
        assert [s.subset for s in fam1] == [s.subset for s in fam2]
        assert fam1[0].subset == (0, 1, 2, 3)  # lexicographic first
        for s in fam1:
            assert s.min_entropy() == 2.0

    def test_adversary_enumeration(self):
        advs1 = fixed_point_free_adversaries(1)
        assert advs1 == [(1, 0)]  # the unique fixed-point-free map is negation
        advs2 = fixed_point_free_adversaries(2)
        assert len(advs2) == 81  # (2^d - 1)^(2^d)
        for adv in advs2:
            assert all(adv[y] != y for y in range(4))
        capped = fixed_point_free_adversaries(3, cap=10, sampled=5, seed=b"s")
        assert len(capped) == 15
        assert len(set(capped)) == 15


class TestVerifiers:
    def test_strong_constant_extractor_fails(self):
        class Const:
            n, m, seed_len = 4, 1, 2

            def eval_int(self, x, y):
                return 0

        fam = [SourceSpec("flat", 4, subset=tuple(range(8)))]
        rep = verify_strong_extractor(Const(), 4, 3, 1, fam)
        assert rep.worst_distance >= F(1, 2)  # 1 - 2^-m

    def test_strong_zero_output(self):
        ext = ToeplitzExt(4, 0, 1)
        fam = [SourceSpec("flat", 4, subset=tuple(range(8)))]
        assert verify_strong_extractor(ext, 4, 3, 0, fam).worst_distance == 0

    def test_strong_entropy_precondition(self):
        ext = ToeplitzExt(4, 1, 4)
        with pytest.raises(OracleError, match="min-entropy"):
            verify_strong_extractor(ext, 4, 3, 1, [SourceSpec("flat", 4, subset=(0, 1))])

    def test_strong_hash_leftover_bound_small(self):
        ext = ToeplitzExt(4, 1, 4)
        fam = flat_sources(4, 3, cap=60, sampled=20, seed=b"t")
        rep = verify_strong_extractor(ext, 4, 3, 1, fam)
        assert rep.worst_distance <= F(1, 4)  # 2^((m-k)/2 - 1)

    def test_nm_fixed_point_rejected(self):
        nm = BlockIpExtractor(2, 2, 1, kind="nm_ext")
        with pytest.raises(OracleError, match="fixed-point"):
            verify_nm_extractor(nm, 2, 2, 1, 2, [(0, 0, 1, 2)],
                                [SourceSpec("uniform", 2)])

    def test_nm_d1_unique_adversary(self):
        nm = BlockIpExtractor(1, 1, 1, kind="nm_ext")
        rep = verify_nm_extractor(nm, 1, 1, 1, 1, fixed_point_free_adversaries(1),
                                  [SourceSpec("uniform", 1)])
        assert rep.extra["adversaries"] == 1

    def test_min_selfconsistent_eps(self):
        assert min_selfconsistent_eps([(F(0), F(1))]) == 0
        # all mass at distance 1/2: smallest e with [e >= 1/2] is 1/2
        assert min_selfconsistent_eps([(F(1, 2), F(1))]) == F(1, 2)
        # half the mass at 0, half at 1: need mass(<=e) >= 1-e -> e = 1/2
        assert min_selfconsistent_eps([(F(0), F(1, 2)), (F(1), F(1, 2))]) == F(1, 2)

    def test_nm_condenser_identity_and_constant(self):
        fam = [SourceSpec("flat", 4, subset=tuple(range(8)))]
        advs = fixed_point_free_adversaries(2, cap=10)
        ident = verify_nm_condenser(lambda x, y: x, 4, 2, 4, 3, 0, advs, fam)
        assert (ident.eps_seed, ident.eps_inner) == (0, 0)
        const = verify_nm_condenser(lambda x, y: 0, 4, 2, 2, 3, 1, advs, fam)
        assert const.eps_inner == F(1, 2)  # point mass vs min-entropy 1 cap

    def test_report_serialization(self):
        fam = [SourceSpec("flat", 4, subset=tuple(range(8)))]
        rep = verify_strong_extractor(ToeplitzExt(4, 1, 4), 4, 3, 1, fam)
        rec = rep.to_json()
        assert rec["schema"] == "privamp.verify/1"
        assert "/" in rec["worst_distance"]
