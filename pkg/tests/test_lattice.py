import random
from itertools import product

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from monoidscheme.errors import NotPointed
from monoidscheme.lattice import (
    RationalCone,
    cone_covered,
    dual_cone,
    hermite_basis,
    hilbert_basis,
    int_rank,
    integer_kernel,
    intersect_cones,
    is_face_of,
    is_subdivision,
    lattice_solve,
    mat_mul,
    parallelepiped_points,
    smith_normal_form,
    triangulate,
)


def snf_reconstruct(m):
    diag, left, right = smith_normal_form(m)
    prod_ = mat_mul(mat_mul(left, m), right)
    nr, nc = len(m), len(m[0])
    for i in range(nr):
        for j in range(nc):
            want = diag[i] if i == j and i < len(diag) else 0
            assert prod_[i][j] == want
    for i in range(len(diag) - 1):
        if diag[i]:
            assert diag[i + 1] % diag[i] == 0
        else:
            assert diag[i + 1] == 0
    return diag


class TestSmithNormalForm:
    def test_diag_2_3(self):
        assert snf_reconstruct(((2, 0), (0, 3))) == [1, 6]

    def test_identity(self):
        assert snf_reconstruct(((1, 0, 0), (0, 1, 0), (0, 0, 1))) == [1, 1, 1]

    def test_2_4_6_8(self):
        assert snf_reconstruct(((2, 4), (6, 8))) == [2, 4]

    def test_empty(self):
        diag, left, right = smith_normal_form(())
        assert diag == []

    def test_rectangular(self):
        assert snf_reconstruct(((1, 2, 3), (4, 5, 6))) == [1, 3]

    @given(
        st.lists(
            st.lists(st.integers(-9, 9), min_size=1, max_size=4),
            min_size=1,
            max_size=4,
        ).filter(lambda rows: len({len(r) for r in rows}) == 1)
    )
    @settings(max_examples=120, deadline=None)
    def test_random_reconstruction(self, rows):
        snf_reconstruct(tuple(map(tuple, rows)))


class TestHermite:
    def test_solve_roundtrip(self):
        basis = hermite_basis([(2, 0), (0, 3), (2, 3)])
        assert lattice_solve(basis, (4, 3)) is not None
        assert lattice_solve(basis, (1, 0)) is None

    def test_kernel(self):
        ker = integer_kernel(((1, 1, 1),))
        assert int_rank(ker) == 2
        for k in ker:
            assert sum(k) == 0


class TestCone:
    def test_orthant_self_dual(self):
        c = RationalCone(2, [(1, 0), (0, 1)])
        d = dual_cone(c)
        assert sorted(d.extreme_rays) == [(0, 1), (1, 0)]

    def test_paper_quadric_dual(self):
        c = RationalCone(2, [(0, 1), (1, -2)])
        d = dual_cone(c)
        assert sorted(d.extreme_rays) == [(1, 0), (2, 1)]

    def test_dual_of_origin_is_everything(self):
        c = RationalCone(2, [])
        d = dual_cone(c)
        assert d.dim() == 2
        assert not d.is_strongly_convex()

    def test_strong_convexity(self):
        assert RationalCone(2, [(1, 0), (0, 1)]).is_strongly_convex()
        assert not RationalCone(2, [(1, 0), (-1, 0)]).is_strongly_convex()

    def test_face_counts_orthant2(self):
        c = RationalCone(2, [(1, 0), (0, 1)])
        faces = c.face_lattice()
        assert len(faces) == 4
        assert sorted(f.dim for f in faces) == [0, 1, 1, 2]

    def test_face_counts_orthant3(self):
        c = RationalCone(3, [(1, 0, 0), (0, 1, 0), (0, 0, 1)])
        assert len(c.face_lattice()) == 8

    def test_ray_faces(self):
        c = RationalCone(2, [(1, 1)])
        assert len(c.face_lattice()) == 2

    def test_halfplane_faces(self):
        c = RationalCone(2, [(1, 0), (-1, 0), (0, 1)])
        faces = c.face_lattice()
        # the halfplane and its boundary line; no {0} face
        assert sorted(f.dim for f in faces) == [1, 2]

    def test_dual_involution_on_lattice_points(self):
        rng = random.Random(7)
        for _ in range(20):
            gens = [
                tuple(rng.randint(-4, 4) for _ in range(2)) for _ in range(rng.randint(1, 3))
            ]
            c = RationalCone(2, gens)
            dd = dual_cone(dual_cone(c))
            for pt in product(range(-5, 6), repeat=2):
                assert c.contains(pt) == dd.contains(pt)

    def test_face_count_vs_bruteforce(self):
        rng = random.Random(3)
        for _ in range(10):
            gens = [
                tuple(rng.randint(-3, 3) for _ in range(3))
                for _ in range(rng.randint(1, 4))
            ]
            c = RationalCone(3, gens)
            # brute force: distinct generator subsets obtained by normal subsets
            normals = c.facet_normals
            rays = c.extreme_rays
            seen = set()
            for k in range(len(normals) + 1):
                from itertools import combinations

                for sub in combinations(range(len(normals)), k):
                    key = frozenset(
                        i
                        for i, r in enumerate(rays)
                        if all(normals[j][0] * r[0] + normals[j][1] * r[1] + normals[j][2] * r[2] == 0 for j in sub)
                    )
                    seen.add(key)
            assert len(seen) == len(c.face_lattice())


class TestHilbertBasis:
    def test_quadric_cone(self):
        c = RationalCone(2, [(1, 0), (1, 2)])
        assert hilbert_basis(c) == [(1, 0), (1, 1), (1, 2)]

    def test_smooth_cone(self):
        c = RationalCone(2, [(1, 0), (0, 1)])
        assert hilbert_basis(c) == [(0, 1), (1, 0)]

    def test_rank_one(self):
        c = RationalCone(1, [(1,)])
        assert hilbert_basis(c) == [(1,)]

    def test_sublattice(self):
        # even sublattice of Z: cone(1) cap 2Z is generated by 2
        c = RationalCone(1, [(1,)])
        assert hilbert_basis(c, [(2,)]) == [(2,)]

    def test_not_pointed(self):
        c = RationalCone(2, [(1, 0), (-1, 0)])
        with pytest.raises(NotPointed):
            hilbert_basis(c)

    def test_parallelepiped_counts_index(self):
        rays = [(1, 0), (1, 2)]
        pts = parallelepiped_points(rays, 2)
        assert pts == [(1, 1)]

    def test_box_oracle_small(self):
        # the box oracle from the module contract, on small 2d cones
        rng = random.Random(11)
        for _ in range(25):
            while True:
                u = (rng.randint(0, 4), rng.randint(-4, 4))
                v = (rng.randint(0, 4), rng.randint(-4, 4))
                c = RationalCone(2, [u, v])
                if c.dim() >= 1 and c.is_strongly_convex():
                    break
            got = hilbert_basis(c)
            bound = 10
            pts = [
                p
                for p in product(range(-bound, bound + 1), repeat=2)
                if c.contains(p) and p != (0, 0)
            ]
            irred = [
                p
                for p in pts
                if not any(
                    q != p and c.contains((p[0] - q[0], p[1] - q[1])) and (p[0] - q[0], p[1] - q[1]) != (0, 0)
                    for q in pts
                )
            ]
            assert sorted(got) == sorted(irred)


class TestSubdivision:
    def test_star_subdivision_of_orthant(self):
        coarse = RationalCone(2, [(1, 0), (0, 1)])
        fine = [RationalCone(2, [(1, 0), (1, 1)]), RationalCone(2, [(0, 1), (1, 1)])]
        assert is_subdivision(fine, coarse)

    def test_identity_subdivision(self):
        c = RationalCone(2, [(1, 0), (0, 1)])
        assert is_subdivision([c], c)

    def test_support_deficit(self):
        coarse = RationalCone(2, [(1, 0), (0, 1)])
        assert not is_subdivision([RationalCone(2, [(1, 0), (1, 1)])], coarse)

    def test_overlap_not_face(self):
        coarse = RationalCone(2, [(1, 0), (0, 1)])
        bad = [
            RationalCone(2, [(1, 0), (1, 1)]),
            RationalCone(2, [(0, 1), (2, 1)]),
        ]
        assert not is_subdivision(bad, coarse)

    def test_cover_full_plane(self):
        plane = RationalCone(2, [(1, 0), (-1, 0), (0, 1), (0, -1)])
        quads = [
            RationalCone(2, [(1, 0), (0, 1)]),
            RationalCone(2, [(0, 1), (-1, 0)]),
            RationalCone(2, [(-1, 0), (0, -1)]),
            RationalCone(2, [(0, -1), (1, 0)]),
        ]
        assert cone_covered(plane, quads)
        assert not cone_covered(plane, quads[:3])

    def test_triangulate_square_cone(self):
        c = RationalCone(3, [(1, 0, 1), (0, 1, 1), (-1, 0, 1), (0, -1, 1)])
        simps = triangulate(c)
        assert all(len(s) == 3 for s in simps)
        assert cone_covered(c, [RationalCone(3, s) for s in simps])

    def test_intersection_is_face(self):
        c1 = RationalCone(2, [(1, 0), (1, 1)])
        c2 = RationalCone(2, [(1, 1), (0, 1)])
        i = intersect_cones(c1, c2)
        assert is_face_of(i, c1) and is_face_of(i, c2)
        assert sorted(i.extreme_rays) == [(1, 1)]
