"""Exact integer/rational polyhedral primitives.

Everything here works over Z (python ints, so no overflow) with the
occasional Fraction for solving small linear systems.  Vectors are tuples
of ints, matrices are tuples of row tuples.  Cones are kept in dual
description: generators on one side, facet normals plus span equations on
the other, both computed by an exact double description sweep.
"""

from __future__ import annotations

from fractions import Fraction
from itertools import combinations
from math import gcd

from .errors import NotPointed

Vector = tuple
Matrix = tuple


# ---------------------------------------------------------------------------
# small integer linear algebra


def vec(it):
    return tuple(int(x) for x in it)


def dot(u, v):
    return sum(a * b for a, b in zip(u, v))


def vadd(u, v):
    return tuple(a + b for a, b in zip(u, v))


def vsub(u, v):
    return tuple(a - b for a, b in zip(u, v))


def vneg(u):
    return tuple(-a for a in u)


def vscale(c, u):
    return tuple(c * a for a in u)


def is_zero(u):
    return all(a == 0 for a in u)


def primitive(u):
    """Divide out the gcd of the coordinates; sign is preserved."""
    g = 0
    for a in u:
        g = gcd(g, abs(a))
    if g <= 1:
        return tuple(u)
    return tuple(a // g for a in u)


def mat_vec(m, v):
    return tuple(dot(row, v) for row in m)


def mat_mul(a, b):
    bt = list(zip(*b))
    return tuple(tuple(dot(row, col) for col in bt) for row in a)


def identity_matrix(n):
    return tuple(tuple(1 if i == j else 0 for j in range(n)) for i in range(n))


def transpose(m):
    return tuple(zip(*m))


def int_rank(rows):
    """Rank of an integer matrix, by fraction-free elimination."""
    m = [list(r) for r in rows if not is_zero(r)]
    if not m:
        return 0
    ncols = len(m[0])
    rank = 0
    col = 0
    while rank < len(m) and col < ncols:
        piv = next((i for i in range(rank, len(m)) if m[i][col] != 0), None)
        if piv is None:
            col += 1
            continue
        m[rank], m[piv] = m[piv], m[rank]
        for i in range(rank + 1, len(m)):
            if m[i][col] != 0:
                a, b = m[rank][col], m[i][col]
                m[i] = [a * x - b * y for x, y in zip(m[i], m[rank])]
        rank += 1
        col += 1
    return rank


def solve_rational(rows, rhs):
    """One rational solution x of rows^T... no: solve sum_j x_j*rows[j] = rhs.

    Returns a tuple of Fractions, or None if inconsistent.  `rows` are the
    vectors being combined (so this solves a linear system whose columns
    are the given rows).
    """
    n = len(rows)
    if n == 0:
        return () if is_zero(rhs) else None
    dim = len(rhs)
    # augmented system: columns are the rows, over Fraction
    a = [[Fraction(rows[j][i]) for j in range(n)] + [Fraction(rhs[i])] for i in range(dim)]
    piv_cols = []
    r = 0
    for c in range(n):
        piv = next((i for i in range(r, dim) if a[i][c] != 0), None)
        if piv is None:
            continue
        a[r], a[piv] = a[piv], a[r]
        inv = a[r][c]
        a[r] = [x / inv for x in a[r]]
        for i in range(dim):
            if i != r and a[i][c] != 0:
                f = a[i][c]
                a[i] = [x - f * y for x, y in zip(a[i], a[r])]
        piv_cols.append(c)
        r += 1
        if r == dim:
            break
    for i in range(r, dim):
        if a[i][n] != 0:
            return None
    x = [Fraction(0)] * n
    for i, c in enumerate(piv_cols):
        x[c] = a[i][n]
    return tuple(x)


def smith_normal_form(m):
    """Smith normal form with transforms.

    Returns (diag, left, right) where left*m*right is diagonal with
    d_1 | d_2 | ..., all d_i >= 0, and left, right are unimodular.
    An empty matrix yields an empty diagonal.
    """
    rows = [list(r) for r in m]
    nr = len(rows)
    nc = len(rows[0]) if nr else 0
    left = [list(r) for r in identity_matrix(nr)]
    right = [list(r) for r in identity_matrix(nc)]
    if nr == 0 or nc == 0:
        return [], tuple(map(tuple, left)), tuple(map(tuple, right))

    def row_op(i1, i2, q):  # row i2 -= q * row i1
        rows[i2] = [x - q * y for x, y in zip(rows[i2], rows[i1])]
        left[i2] = [x - q * y for x, y in zip(left[i2], left[i1])]

    def col_op(j1, j2, q):  # col j2 -= q * col j1
        for r in rows:
            r[j2] -= q * r[j1]
        for r in right:
            r[j2] -= q * r[j1]

    def swap_rows(i1, i2):
        rows[i1], rows[i2] = rows[i2], rows[i1]
        left[i1], left[i2] = left[i2], left[i1]

    def swap_cols(j1, j2):
        for r in rows:
            r[j1], r[j2] = r[j2], r[j1]
        for r in right:
            r[j1], r[j2] = r[j2], r[j1]

    def diagonalize():
        t = 0
        while t < min(nr, nc):
            piv = None
            for i in range(t, nr):
                for j in range(t, nc):
                    if rows[i][j] != 0:
                        if piv is None or abs(rows[i][j]) < abs(rows[piv[0]][piv[1]]):
                            piv = (i, j)
            if piv is None:
                break
            swap_rows(t, piv[0])
            swap_cols(t, piv[1])
            while True:
                dirty = False
                for i in range(t + 1, nr):
                    if rows[i][t] != 0:
                        q = rows[i][t] // rows[t][t]
                        row_op(t, i, q)
                        if rows[i][t] != 0:  # remainder is a smaller pivot
                            swap_rows(t, i)
                        dirty = True
                for j in range(t + 1, nc):
                    if rows[t][j] != 0:
                        q = rows[t][j] // rows[t][t]
                        col_op(t, j, q)
                        if rows[t][j] != 0:
                            swap_cols(t, j)
                        dirty = True
                if not dirty:
                    break
            t += 1

    diagonalize()
    # enforce the divisibility chain: fold row i+1 into row i and resweep
    while True:
        bad = None
        for i in range(min(nr, nc) - 1):
            a, b = rows[i][i], rows[i + 1][i + 1]
            if (a == 0 and b != 0) or (a != 0 and b % a != 0):
                bad = i
                break
        if bad is None:
            break
        row_op(bad + 1, bad, -1)  # row bad += row bad+1
        diagonalize()
    # normalize signs
    for i in range(min(nr, nc)):
        if rows[i][i] < 0:
            for j in range(nc):
                rows[i][j] = -rows[i][j]
            for j in range(nr):
                left[i][j] = -left[i][j]
    diag = [rows[i][i] for i in range(min(nr, nc))]
    return diag, tuple(map(tuple, left)), tuple(map(tuple, right))


def hermite_basis(vectors):
    """Row-style Hermite basis of the lattice generated by `vectors`.

    Returns a list of linearly independent rows in echelon form; the empty
    list for the zero lattice.
    """
    m = [list(v) for v in vectors if not is_zero(v)]
    if not m:
        return []
    ncols = len(m[0])
    basis = []
    col = 0
    while m and col < ncols:
        nz = [r for r in m if r[col] != 0]
        rest = [r for r in m if r[col] == 0]
        if not nz:
            m = rest
            col += 1
            continue
        while len(nz) > 1:
            nz.sort(key=lambda r: abs(r[col]))
            p = nz[0]
            out = [p]
            for r in nz[1:]:
                q = r[col] // p[col]
                r2 = [x - q * y for x, y in zip(r, p)]
                if r2[col] != 0:
                    out.append(r2)
                elif any(r2):
                    rest.append(r2)
            nz = out
        p = nz[0]
        if p[col] < 0:
            p = [-x for x in p]
        basis.append(p)
        m = rest
        col += 1
    # reduce entries above pivots for a canonical form
    for i in reversed(range(len(basis))):
        pc = next(j for j, x in enumerate(basis[i]) if x != 0)
        for k in range(i):
            q = basis[k][pc] // basis[i][pc]
            if q:
                basis[k] = [x - q * y for x, y in zip(basis[k], basis[i])]
    return [tuple(r) for r in basis]


def lattice_solve(basis, v):
    """Integer coordinates of v in a Hermite `basis`, or None."""
    if is_zero(v):
        return (0,) * len(basis)
    if not basis:
        return None
    coeffs = []
    rem = list(v)
    rows = [list(b) for b in basis]
    for r in rows:
        pc = next(j for j, x in enumerate(r) if x != 0)
        if rem[pc] % r[pc] != 0:
            return None
        q = rem[pc] // r[pc]
        coeffs.append(q)
        rem = [x - q * y for x, y in zip(rem, r)]
    if any(rem):
        return None
    return tuple(coeffs)


def lattice_contains(basis, v):
    return lattice_solve(basis, v) is not None


def integer_kernel(m):
    """Basis of {x in Z^ncols : m @ x = 0}."""
    nr = len(m)
    nc = len(m[0]) if nr else 0
    if nc == 0:
        return []
    if nr == 0:
        return list(identity_matrix(nc))
    diag, _left, right = smith_normal_form(m)
    r = sum(1 for d in diag if d != 0)
    cols = transpose(right)
    return [tuple(c) for c in cols[r:]]


def saturation_basis(vectors, ambient_rank):
    """Hermite basis of the saturation (Q-span intersect Z^n) of a lattice."""
    basis = hermite_basis(vectors)
    if not basis:
        return []
    # the saturation is the kernel of the projection to the orthogonal
    # complement, i.e. the integer kernel of the normals to the span
    normals = integer_kernel(basis)
    if not normals:
        return list(identity_matrix(ambient_rank))
    return hermite_basis(integer_kernel(normals))


# ---------------------------------------------------------------------------
# double description


def dual_description(gens, rank):
    """Minimal description of {m : <m, g> >= 0 for all g in gens}.

    Returns (rays, lineality): extreme rays modulo the lineality space,
    plus a basis of the lineality space, all primitive integer vectors.
    Incremental double description with a rank-based adjacency test.
    """
    lin = [tuple(r) for r in identity_matrix(rank)]
    rays = []  # list of vectors
    zerosets = []  # parallel list: set of processed constraint indices with <r,g>=0
    processed = []

    for g in gens:
        g = vec(g)
        if is_zero(g):
            continue
        k = len(processed)
        vals = [dot(l, g) for l in lin]
        if any(v != 0 for v in vals):
            i0 = next(i for i, v in enumerate(vals) if v != 0)
            l0, v0 = lin[i0], vals[i0]
            if v0 < 0:
                l0, v0 = vneg(l0), -v0
            new_lin = []
            for i, l in enumerate(lin):
                if i == i0:
                    continue
                new_lin.append(primitive(vsub(vscale(v0, l), vscale(vals[i], l0))))
            new_rays, new_zero = [], []
            for r, zs in zip(rays, zerosets):
                rv = dot(r, g)
                r2 = primitive(vsub(vscale(v0, r), vscale(rv, l0)))
                new_rays.append(r2)
                new_zero.append(zs | {k})
            new_rays.append(l0)
            new_zero.append({i for i in range(k) if dot(l0, processed[i]) == 0})
            lin, rays, zerosets = new_lin, new_rays, new_zero
        else:
            pos = [i for i, r in enumerate(rays) if dot(r, g) > 0]
            neg = [i for i, r in enumerate(rays) if dot(r, g) < 0]
            zero = [i for i, r in enumerate(rays) if dot(r, g) == 0]
            if neg:
                target = rank - len(lin) - 2
                combos = []
                for ip in pos:
                    for im in neg:
                        common = zerosets[ip] & zerosets[im]
                        if int_rank([processed[i] for i in common]) != target:
                            continue
                        p, n = rays[ip], rays[im]
                        w = primitive(
                            vadd(vscale(dot(p, g), n), vscale(-dot(n, g), p))
                        )
                        combos.append((w, common | {k}))
                keep_r = [rays[i] for i in pos] + [rays[i] for i in zero]
                keep_z = [zerosets[i] for i in pos] + [zerosets[i] | {k} for i in zero]
                seen = set(keep_r)
                for w, zs in combos:
                    if w not in seen:
                        seen.add(w)
                        keep_r.append(w)
                        keep_z.append(zs)
                rays, zerosets = keep_r, keep_z
            else:
                zerosets = [
                    zs | {k} if i in zero else zs for i, zs in enumerate(zerosets)
                ]
        processed.append(g)

    rays = sorted(set(rays))
    lin = [tuple(r) for r in hermite_basis(lin)]
    return rays, lin


# ---------------------------------------------------------------------------
# cones


class Face:
    """A face of a RationalCone, keyed by the extreme rays lying on it."""

    __slots__ = ("cone", "ray_indices", "normal_indices", "dim")

    def __init__(self, cone, ray_indices, normal_indices, dim):
        self.cone = cone
        self.ray_indices = frozenset(ray_indices)
        self.normal_indices = frozenset(normal_indices)
        self.dim = dim

    @property
    def generators(self):
        rays = self.cone.extreme_rays
        return [rays[i] for i in sorted(self.ray_indices)] + [
            l for l in self.cone.lineality_basis
        ]

    def contains_face(self, other):
        return other.ray_indices <= self.ray_indices

    def as_cone(self):
        gens = list(self.generators) + [vneg(l) for l in self.cone.lineality_basis]
        return RationalCone(self.cone.rank, gens)

    def __repr__(self):
        return f"Face(dim={self.dim}, rays={sorted(self.ray_indices)})"


class RationalCone:
    """A rational polyhedral cone, generators plus cached dual data."""

    def __init__(self, rank, generators):
        self.rank = int(rank)
        gens = []
        for g in generators:
            g = vec(g)
            if len(g) != self.rank:
                raise ValueError("generator length differs from cone rank")
            if not is_zero(g):
                gens.append(g)
        self.generators = tuple(gens)
        self._dual = None  # (facet_normals, span_equations)
        self._primal = None  # (extreme_rays, lineality_basis)
        self._faces = None

    # -- dual data ----------------------------------------------------

    def _dual_data(self):
        if self._dual is None:
            rays, lin = dual_description(self.generators, self.rank)
            self._dual = (tuple(rays), tuple(lin))
        return self._dual

    @property
    def facet_normals(self):
        return self._dual_data()[0]

    @property
    def span_equations(self):
        """Integer functionals vanishing on the whole cone."""
        return self._dual_data()[1]

    def _primal_data(self):
        if self._primal is None:
            normals, eqs = self._dual_data()
            cons = list(normals)
            for e in eqs:
                cons.append(e)
                cons.append(vneg(e))
            rays, lin = dual_description(cons, self.rank)
            self._primal = (tuple(rays), tuple(lin))
        return self._primal

    @property
    def extreme_rays(self):
        return self._primal_data()[0]

    @property
    def lineality_basis(self):
        return self._primal_data()[1]

    # -- basic predicates ----------------------------------------------

    def dim(self):
        return int_rank(self.generators)

    def is_strongly_convex(self):
        return not self.lineality_basis

    def contains(self, v):
        v = vec(v)
        normals, eqs = self._dual_data()
        return all(dot(n, v) >= 0 for n in normals) and all(
            dot(e, v) == 0 for e in eqs
        )

    def contains_cone(self, other):
        return all(self.contains(g) for g in other.generators)

    def interior_contains(self, v):
        """Relative interior membership."""
        v = vec(v)
        normals, eqs = self._dual_data()
        return all(dot(n, v) > 0 for n in normals) and all(dot(e, v) == 0 for e in eqs)

    def same_cone(self, other):
        return self.contains_cone(other) and other.contains_cone(self)

    # -- faces -----------------------------------------------------------

    def face_lattice(self):
        """All faces, graded by dimension, minimal face first.

        The minimal face is the lineality space ({0} iff the cone is
        strongly convex); the cone itself is the unique top face.
        """
        if self._faces is not None:
            return self._faces
        rays = self.extreme_rays
        normals = self.facet_normals
        lin = self.lineality_basis
        lin_dim = len(lin)

        def close(ray_idx):
            nset = frozenset(
                i
                for i, n in enumerate(normals)
                if all(dot(n, rays[j]) == 0 for j in ray_idx)
            )
            rset = frozenset(
                j
                for j, r in enumerate(rays)
                if all(dot(normals[i], r) == 0 for i in nset)
            )
            return rset, nset

        def face_dim(ray_idx):
            vecs = [rays[j] for j in ray_idx] + list(lin)
            return int_rank(vecs) if vecs else 0

        top_r, top_n = close(frozenset(range(len(rays))))
        seen = {top_r: Face(self, top_r, top_n, face_dim(top_r))}
        queue = [top_r]
        while queue:
            cur = queue.pop()
            cur_face = seen[cur]
            for i, n in enumerate(normals):
                if i in cur_face.normal_indices:
                    continue
                sub = frozenset(j for j in cur if dot(n, rays[j]) == 0)
                rset, nset = close(sub)
                if rset not in seen:
                    seen[rset] = Face(self, rset, nset, face_dim(rset))
                    queue.append(rset)
        # make sure the minimal face (cut by all normals) is present
        rmin, nmin = close(frozenset())
        if rmin not in seen:
            seen[rmin] = Face(self, rmin, nmin, lin_dim)
        faces = sorted(seen.values(), key=lambda f: (f.dim, sorted(f.ray_indices)))
        self._faces = faces
        return faces

    def facets(self):
        d = self.dim()
        return [f for f in self.face_lattice() if f.dim == d - 1]

    def smallest_face_containing(self, v):
        v = vec(v)
        if not self.contains(v):
            raise ValueError("vector not in cone")
        rays = self.extreme_rays
        nset = [n for n in self.facet_normals if dot(n, v) == 0]
        ridx = frozenset(
            j for j, r in enumerate(rays) if all(dot(n, r) == 0 for n in nset)
        )
        for f in self.face_lattice():
            if f.ray_indices == ridx:
                return f
        raise AssertionError("face closure missed a face")

    def __repr__(self):
        return f"RationalCone(rank={self.rank}, gens={list(self.generators)})"


def cone_from_inequalities(rank, normals, equations=()):
    cons = list(normals)
    for e in equations:
        cons.append(vec(e))
        cons.append(vneg(vec(e)))
    rays, lin = dual_description(cons, rank)
    gens = list(rays) + list(lin) + [vneg(l) for l in lin]
    return RationalCone(rank, gens)


def dual_cone(c):
    """The cone of functionals non-negative on c.

    The generators are the facet normals of c extended by (plus/minus)
    the span equations when c is not full-dimensional.
    """
    normals, eqs = c.facet_normals, c.span_equations
    gens = list(normals) + list(eqs) + [vneg(e) for e in eqs]
    return RationalCone(c.rank, gens)


def intersect_cones(c1, c2):
    if c1.rank != c2.rank:
        raise ValueError("cone ranks differ")
    return cone_from_inequalities(
        c1.rank,
        list(c1.facet_normals) + list(c2.facet_normals),
        list(c1.span_equations) + list(c2.span_equations),
    )


def is_face_of(sub, c):
    """True iff `sub` equals a face of `c`."""
    if not c.contains_cone(sub):
        return False
    nset = [
        n
        for n in c.facet_normals
        if all(dot(n, g) == 0 for g in sub.generators)
    ]
    # the face of c cut out by those normals
    face_gens = [r for r in c.extreme_rays if all(dot(n, r) == 0 for n in nset)]
    face_gens += list(c.lineality_basis) + [vneg(l) for l in c.lineality_basis]
    face = RationalCone(c.rank, face_gens)
    return face.same_cone(sub)


# ---------------------------------------------------------------------------
# triangulation and Hilbert bases


def _solve_simplicial_coords(rays, v):
    """Rational lambda with sum(lambda_i * rays[i]) = v (rays independent)."""
    return solve_rational(rays, v)


def triangulate(cone):
    """Split a pointed cone into simplicial subcones on its extreme rays."""
    if not cone.is_strongly_convex():
        raise NotPointed("triangulation requires a pointed cone")

    def rec(rays, dim):
        rays = list(rays)
        if len(rays) <= dim and int_rank(rays) == len(rays):
            return [tuple(rays)]
        sub = RationalCone(cone.rank, rays)
        r0 = sub.extreme_rays[0]
        pieces = []
        for f in sub.facets():
            fg = [sub.extreme_rays[i] for i in sorted(f.ray_indices)]
            fc = RationalCone(cone.rank, fg)
            if fc.contains(r0):
                continue
            for simp in rec(fg, f.dim):
                pieces.append(tuple(list(simp) + [r0]))
        return pieces

    d = cone.dim()
    if d == 0:
        return []
    return rec(list(cone.extreme_rays), d)


def parallelepiped_points(rays, rank):
    """Nonzero lattice points of {sum l_i r_i : 0 <= l_i < 1}.

    `rays` must be linearly independent integer vectors in Z^rank.
    """
    e = len(rays)
    if e == 0:
        return []
    cols = transpose(rays)  # rank x e matrix with rays as columns
    diag, left, _right = smith_normal_form(cols)
    # lattice points of span(rays) cap Z^rank are left^{-1} (Z^e + 0),
    # and the rays generate an index prod(diag) sublattice of it
    n = rank
    linv = _invert_unimodular(left)
    reps = [()]
    for d in diag:
        reps = [r + (k,) for r in reps for k in range(d)]
    out = []
    for r in reps:
        full = tuple(list(r) + [0] * (n - e))
        x = tuple(dot(row, full) for row in linv)  # linv @ full
        lam = _solve_simplicial_coords(rays, x)
        if lam is None:
            continue
        # subtract the integer parts to land in the half-open box
        p = list(x)
        for j in range(e):
            q = lam[j].numerator // lam[j].denominator
            if q:
                for i in range(n):
                    p[i] -= q * rays[j][i]
        p = tuple(p)
        if not is_zero(p):
            out.append(p)
    return sorted(set(out))


def _invert_unimodular(m):
    """Exact inverse of a unimodular integer matrix (as tuple of rows)."""
    n = len(m)
    a = [[Fraction(m[i][j]) for j in range(n)] + [Fraction(1 if k == i else 0) for k in range(n)] for i in range(n)]
    for c in range(n):
        piv = next(i for i in range(c, n) if a[i][c] != 0)
        a[c], a[piv] = a[piv], a[c]
        inv = a[c][c]
        a[c] = [x / inv for x in a[c]]
        for i in range(n):
            if i != c and a[i][c] != 0:
                f = a[i][c]
                a[i] = [x - f * y for x, y in zip(a[i], a[c])]
    out = []
    for i in range(n):
        row = a[i][n:]
        assert all(x.denominator == 1 for x in row)
        out.append(tuple(int(x) for x in row))
    return tuple(out)


def hilbert_basis(cone, sublattice=None):
    """Minimal generating set of (cone intersect sublattice).

    The cone must be strongly convex.  `sublattice` is given by generating
    integer vectors (defaults to the full ambient lattice).  Project-and-
    lift: restrict to sublattice coordinates, triangulate, collect the ray
    generators with the parallelepiped points of each simplicial piece,
    then filter to the irreducible elements.
    """
    if not cone.is_strongly_convex():
        raise NotPointed("hilbert_basis requires a strongly convex cone")
    n = cone.rank
    if sublattice is None:
        basis = [tuple(r) for r in identity_matrix(n)]
    else:
        basis = hermite_basis(sublattice)
        if not basis:
            return []
    r = len(basis)
    # cone in sublattice coordinates: {y : y.B in cone}
    cons = [mat_vec(basis, nrm) for nrm in cone.facet_normals]
    eqs = [mat_vec(basis, e) for e in cone.span_equations]
    sub = cone_from_inequalities(r, cons, eqs)
    if sub.dim() == 0:
        return []

    def member(y):
        return all(dot(c, y) >= 0 for c in cons) and all(dot(e, y) == 0 for e in eqs)

    cands = set()
    for simp in triangulate(sub):
        simp = [primitive(s) for s in simp]
        cands.update(simp)
        cands.update(parallelepiped_points(simp, r))
    cands.discard((0,) * r)
    cands = sorted(cands)
    basis_out = []
    for x in cands:
        reducible = False
        for y in cands:
            if y == x:
                continue
            d = vsub(x, y)
            if not is_zero(d) and member(d) and member(y):
                reducible = True
                break
        if not reducible:
            basis_out.append(x)
    # lift back to ambient coordinates
    lifted = sorted(mat_vec(transpose(basis), y) for y in basis_out)
    return [tuple(v) for v in lifted]


# ---------------------------------------------------------------------------
# subdivision and covering tests


def cone_covered(big, pieces):
    """Exact test that the union of `pieces` equals the convex cone `big`.

    Each piece must be contained in `big` and the pieces must pairwise
    intersect along faces (a fan): then the union covers iff every facet
    of every top-dimensional piece either lies on the boundary of `big`
    or is shared with another top-dimensional piece.
    """
    d = big.dim()
    if d == 0:
        return True
    top = [p for p in pieces if p.dim() == d]
    if not top:
        return False
    for p in top:
        if not big.contains_cone(p):
            return False
    for p in top:
        for f in p.facets():
            fgens = f.generators
            on_boundary = any(
                all(dot(nrm, g) == 0 for g in fgens) for nrm in big.facet_normals
            )
            if on_boundary:
                continue
            matched = False
            for q in top:
                if q is p:
                    continue
                if all(q.contains(g) for g in fgens):
                    matched = True
                    break
            if not matched:
                return False
    return True


def is_subdivision(fine, coarse):
    """True iff `fine` subdivides `coarse`: contained cones, pairwise
    intersections along common faces, union equal to `coarse`."""
    fine = list(fine)
    for c in fine:
        if not coarse.contains_cone(c):
            return False
    for c1, c2 in combinations(fine, 2):
        i = intersect_cones(c1, c2)
        if not (is_face_of(i, c1) and is_face_of(i, c2)):
            return False
    return cone_covered(coarse, fine)
