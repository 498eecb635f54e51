import random
from itertools import combinations, product

import pytest

from monoidscheme.errors import NotCancellative, ZeroMonoid
from monoidscheme.monoid import (
    IN_IDEAL,
    IN_MONOID,
    OUTSIDE,
    AffineMonoid,
    cusp_monoid,
    finiteness_state,
    free_monoid,
    group_monoid,
    integral_state,
    is_monoid_iso,
    pushout_closed,
)
from monoidscheme.prime import generic_primes, maximal_prime, mspec, prime_preimage


class TestMembership:
    def test_numerical_semigroup(self):
        a = cusp_monoid()
        assert a.member((1,)) == OUTSIDE
        assert a.member((5,)) == IN_MONOID
        assert a.member((2,)) == IN_MONOID
        assert a.member((7,)) == IN_MONOID

    def test_ideal_membership(self):
        a = AffineMonoid(2, [(1, 0), (0, 1)], ideal=[(1, 1)])
        assert a.member((2, 3)) == IN_IDEAL
        assert a.member((2, 0)) == IN_MONOID
        assert a.member((-1, 0)) == OUTSIDE

    def test_membership_with_units(self):
        a = AffineMonoid(2, [(1, 0), (-1, 0), (0, 1)])
        assert a.member((-5, 3)) == IN_MONOID
        assert a.member((0, -1)) == OUTSIDE

    def test_brute_force_oracle(self):
        rng = random.Random(5)
        for _ in range(15):
            gens = [
                tuple(rng.randint(0, 3) for _ in range(2))
                for _ in range(rng.randint(1, 4))
            ]
            gens = [g for g in gens if g != (0, 0)] or [(1, 0)]
            a = AffineMonoid(2, gens)
            # all sums of at most 4 generators
            reachable = {(0, 0)}
            for _ in range(4):
                reachable |= {
                    (x + g[0], y + g[1]) for (x, y) in reachable for g in gens
                }
            for v in product(range(0, 7), repeat=2):
                if v in reachable:
                    assert a._member_raw(v), (gens, v)

    def test_units(self):
        assert AffineMonoid(1, [(1,), (-1,)]).units() == [(1,)]
        assert free_monoid(2).units() == []
        assert AffineMonoid(2, [(1, 0), (-1, 0), (0, 1)]).units() == [(1, 0)]

    def test_hidden_unit(self):
        # 1 = 3 - 2 is a unit when both 2, -2, 3 present
        a = AffineMonoid(1, [(2,), (-2,), (3,)])
        assert a.units() == [(1,)]
        assert a._member_raw((-1,))


class TestMSpec:
    def test_free_monoid_boolean_lattice(self):
        for n in range(1, 4):
            primes = mspec(free_monoid(n))
            assert len(primes) == 2**n
            # graded like the boolean lattice
            by_codim = {}
            for p in primes:
                by_codim.setdefault(p.face_codim, 0)
                by_codim[p.face_codim] += 1
            from math import comb

            assert by_codim == {k: comb(n, k) for k in range(n + 1)}

    def test_cusp_two_primes(self):
        primes = mspec(cusp_monoid())
        assert len(primes) == 2

    def test_quotient_filters_faces(self):
        a = free_monoid(2).quotient_by_ideal([(1, 0)])
        assert len(mspec(a)) == 2

    def test_quotient_by_product(self):
        a = free_monoid(2).quotient_by_ideal([(1, 1)])
        assert len(mspec(a)) == 3

    def test_divisor_closed_oracle(self):
        rng = random.Random(9)
        for _ in range(10):
            gens = []
            while len(gens) < rng.randint(1, 4):
                g = tuple(rng.randint(0, 3) for _ in range(2))
                if g != (0, 0):
                    gens.append(g)
            a = AffineMonoid(2, gens)
            primes = mspec(a)
            # oracle: divisor-closed submonoids generated by generator subsets
            big = 8
            elements = set()
            frontier = {(0, 0)}
            while frontier:
                nxt = set()
                for v in frontier:
                    for g in gens:
                        w = (v[0] + g[0], v[1] + g[1])
                        if max(map(abs, w)) <= big and w not in elements:
                            elements.add(w)
                            nxt.add(w)
                frontier = nxt
            complements = set()
            for k in range(len(gens) + 1):
                for sub in combinations(range(len(gens)), k):
                    sub_set = set()
                    fr = {(0, 0)}
                    while fr:
                        nx = set()
                        for v in fr:
                            for i in sub:
                                g = gens[i]
                                w = (v[0] + g[0], v[1] + g[1])
                                if max(map(abs, w)) <= big and w not in sub_set:
                                    sub_set.add(w)
                                    nx.add(w)
                        fr = nx
                    # divisor-closed within the window: x+y in S => x,y in S
                    ok = True
                    for x in elements:
                        for y in elements:
                            s = (x[0] + y[0], x[1] + y[1])
                            if max(map(abs, s)) <= big and s in sub_set:
                                if x not in sub_set | {(0, 0)} or y not in sub_set | {(0, 0)}:
                                    ok = False
                                    break
                        if not ok:
                            break
                    if ok:
                        complements.add(frozenset(sub_set))
            assert len(primes) == len(complements)

    def test_maximal_prime(self):
        p = maximal_prime(cusp_monoid())
        assert p.face_codim == 1
        assert not p.face_indices


class TestLocalize:
    def test_free_monoid_at_ray(self):
        a = free_monoid(2)
        primes = mspec(a)
        # the prime whose face is the t1-axis: inverts t1
        p = next(q for q in primes if q.face_indices == frozenset({0}))
        loc = a.localize(p)
        assert loc._member_raw((-1, 0))
        assert not loc._member_raw((0, -1))

    def test_cusp_at_generic_gives_group(self):
        a = cusp_monoid()
        p = next(q for q in mspec(a) if q.face_codim == 0)
        loc = a.localize(p)
        assert loc.same_submonoid(group_monoid(1))

    def test_localize_at_maximal_is_identity(self):
        a = cusp_monoid()
        p = maximal_prime(a)
        assert a.localize(p).same_submonoid(a)

    def test_double_localization(self):
        a = free_monoid(2)
        p = next(q for q in mspec(a) if q.face_indices == frozenset({0}))
        loc = a.localize(p)
        p2 = next(
            q for q in mspec(loc) if q.face_codim == 0
        )
        loc2 = loc.localize(p2)
        generic = next(q for q in mspec(a) if q.face_codim == 0)
        assert loc2.same_submonoid(a.localize(generic))


class TestSmash:
    def test_f1_smash_f1(self):
        a = free_monoid(1).smash(free_monoid(1))
        assert a.same_submonoid(free_monoid(2))

    def test_prime_count_multiplies(self):
        a, b = free_monoid(1), free_monoid(1)
        assert len(mspec(a.smash(b))) == len(mspec(a)) * len(mspec(b))
        c = cusp_monoid()
        assert len(mspec(c.smash(free_monoid(1)))) == 4

    def test_smash_poset_is_product(self):
        a, b = cusp_monoid(), free_monoid(1)
        s = a.smash(b)
        pa, pb, ps = mspec(a), mspec(b), mspec(s)
        pairs = {
            (
                frozenset(i for i in p.face_indices),
                frozenset(j - len(a.gens) for j in p.face_indices if j >= len(a.gens)),
            )
            for p in ps
        }
        assert len(pairs) == len(pa) * len(pb)


class TestQuotientAndPushout:
    def test_quotient_empty_is_identity(self):
        a = free_monoid(2)
        assert a.quotient_by_ideal([]).same_submonoid(a)

    def test_quotient_all_generators(self):
        a = free_monoid(1).quotient_by_ideal([(1,)])
        assert len(mspec(a)) == 1
        assert a.member((1,)) == IN_IDEAL

    def test_pushout_extended_ideal(self):
        base = free_monoid(1)
        target = free_monoid(2)
        f = ((1,), (0,))  # t -> t1
        out = pushout_closed(f, base, target, [(1,)])
        assert out.same_submonoid(free_monoid(2).quotient_by_ideal([(1, 0)]))

    def test_pushout_empty_ideal(self):
        base = free_monoid(1)
        target = free_monoid(2)
        out = pushout_closed(((1,), (0,)), base, target, [])
        assert out.same_submonoid(target)

    def test_pushout_prime_pairing(self):
        rng = random.Random(23)
        for _ in range(10):
            base_rank = rng.randint(1, 2)
            base_gens = []
            while len(base_gens) < rng.randint(1, 3):
                g = tuple(rng.randint(0, 2) for _ in range(base_rank))
                if any(g):
                    base_gens.append(g)
            base = AffineMonoid(base_rank, base_gens)
            tgt_rank = base_rank + rng.randint(0, 1)
            matrix = tuple(
                tuple(rng.randint(0, 1) for _ in range(base_rank))
                for _ in range(tgt_rank)
            )
            from monoidscheme.lattice import mat_vec

            tgt_gens = [mat_vec(matrix, g) for g in base.gens]
            while len(tgt_gens) < len(base.gens) + rng.randint(0, 2):
                g = tuple(rng.randint(0, 2) for _ in range(tgt_rank))
                if any(g):
                    tgt_gens.append(g)
            target = AffineMonoid(tgt_rank, [g for g in tgt_gens if any(g)] or [(1,) * tgt_rank])
            # random ideal of the base
            pool = [g for g in base.gens]
            j_gens = [pool[rng.randrange(len(pool))]] if pool and rng.random() < 0.8 else []
            try:
                out = pushout_closed(matrix, base, target, j_gens)
            except ZeroMonoid:
                continue
            quotient = base.quotient_by_ideal(j_gens)
            # oracle: pairs of primes with a common inverse image in the base
            pairs = 0
            for p1 in mspec(target):
                for p2 in mspec(quotient):
                    pre1 = prime_preimage(matrix, base, target, p1)
                    ident = tuple(
                        tuple(1 if i == j else 0 for j in range(base_rank))
                        for i in range(base_rank)
                    )
                    pre2 = prime_preimage(ident, base, quotient, p2)
                    if pre1.face_indices == pre2.face_indices:
                        pairs += 1
            assert len(mspec(out)) == pairs


class TestNormalization:
    def test_cusp(self):
        nor, emb = cusp_monoid().normalization()
        assert nor.same_submonoid(free_monoid(1))

    def test_already_normal(self):
        a = AffineMonoid(2, [(1, 0), (1, 1), (1, 2)])
        nor, _ = a.normalization()
        assert nor.same_submonoid(a)
        assert a.is_normal()

    def test_free_is_normal(self):
        a = free_monoid(3)
        nor, _ = a.normalization()
        assert nor.same_submonoid(a)

    def test_idempotent(self):
        a = cusp_monoid()
        nor, _ = a.normalization()
        nor2, _ = nor.normalization()
        assert nor2.same_submonoid(nor)

    def test_with_units(self):
        a = AffineMonoid(2, [(0, 1), (0, -1), (2, 0), (3, 0)])
        nor, _ = a.normalization()
        assert nor._member_raw((1, 0))
        assert nor.same_submonoid(
            AffineMonoid(2, [(0, 1), (0, -1), (1, 0)])
        )

    def test_requires_cancellative(self):
        a = free_monoid(1).quotient_by_ideal([(2,)])
        with pytest.raises(NotCancellative):
            a.normalization()

    def test_mspec_preserved(self):
        a = cusp_monoid()
        nor, _ = a.normalization()
        assert len(mspec(a)) == len(mspec(nor))


class TestNilradical:
    def test_nilpotent_generator(self):
        a = AffineMonoid(1, [(1,)], ideal=[(2,)])
        assert a.nilradical() == [(1,)]
        red = a.reduce()
        assert red.member((1,)) == IN_IDEAL

    def test_cancellative_reduced(self):
        assert free_monoid(2).nilradical() == []

    def test_already_radical(self):
        a = free_monoid(2).quotient_by_ideal([(1, 1)])
        assert a.nilradical() == [(1, 1)]
        assert a.is_reduced()

    def test_reduce_idempotent(self):
        a = AffineMonoid(1, [(1,)], ideal=[(3,)])
        r = a.reduce()
        assert r.reduce().same_submonoid(r)
        assert r.is_reduced()


class TestExtensions:
    def test_cusp_normalization_integral_finite(self):
        cusp = cusp_monoid()
        line = free_monoid(1)
        ident = ((1,),)
        assert integral_state(ident, cusp, line) == "Integral"
        assert finiteness_state(ident, cusp, line) == "Finite"

    def test_identity_map(self):
        a = free_monoid(2)
        ident = ((1, 0), (0, 1))
        assert finiteness_state(ident, a, a) == "Finite"

    def test_axis_embedding_not_finite(self):
        f1, f2 = free_monoid(1), free_monoid(2)
        matrix = ((1,), (0,))
        assert integral_state(matrix, f1, f2) == "NotIntegral"
        assert finiteness_state(matrix, f1, f2) == "NotFinite"


class TestDimension:
    def test_dimension_matches_cone(self):
        assert free_monoid(3).dimension() == 3
        assert cusp_monoid().dimension() == 1
        assert group_monoid(2).dimension() == 0

    def test_dimension_of_quotient(self):
        a = free_monoid(2).quotient_by_ideal([(1, 1)])
        assert a.dimension() == 1


class TestIso:
    def test_cusp_not_iso_to_line(self):
        assert not is_monoid_iso(((1,),), cusp_monoid(), free_monoid(1))
        assert not is_monoid_iso(((1,),), free_monoid(1), cusp_monoid())

    def test_skew_automorphism(self):
        a = free_monoid(2)
        b = AffineMonoid(2, [(1, 0), (1, 1)])
        m = ((1, 1), (0, 1))
        assert is_monoid_iso(m, a, b)
