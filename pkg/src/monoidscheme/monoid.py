"""Finitely generated pointed monoids as lattice semigroups mod monomial ideals.

An AffineMonoid is the data B/I where B = <G> is the subsemigroup of Z^n
generated by integer vectors G (inverse pairs encode units) and I is a
monomial ideal given by generators inside B.  Everything the package does
with monoids (primes, localization, smash products, pushouts along ideal
quotients, normalization, nilradicals, integral/finite extension tests)
reduces to exact lattice geometry on this presentation.
"""

from __future__ import annotations

from .errors import (
    NotCancellative,
    NotPointed,
    SearchBoundExceeded,
    UnsupportedPushout,
    ZeroMonoid,
)
from .lattice import (
    RationalCone,
    dot,
    dual_cone,
    dual_description,
    hermite_basis,
    hilbert_basis,
    identity_matrix,
    int_rank,
    integer_kernel,
    is_zero,
    lattice_contains,
    mat_vec,
    saturation_basis,
    transpose,
    vadd,
    vneg,
    vsub,
    vec,
)

#: default node budget for semigroup-membership search
DEFAULT_NODE_BUDGET = 1_000_000

#: multiplier applied to the natural degree bound when enumerating minimal
#: elements of ideal intersections; raise it if a verification step reports
#: an undersized enumeration region
IDEAL_ENUM_SLACK = 2

# membership outcomes
IN_MONOID = "InMonoid"
IN_IDEAL = "InIdeal"
OUTSIDE = "Outside"


class AffineMonoid:
    """A pctf monoid presented as <G> mod a monomial ideal."""

    def __init__(self, rank, generators, ideal=(), node_budget=DEFAULT_NODE_BUDGET,
                 validate=True):
        self.rank = int(rank)
        gens = []
        seen = set()
        for g in generators:
            g = vec(g)
            if len(g) != self.rank:
                raise ValueError("generator length differs from declared rank")
            if is_zero(g) or g in seen:
                continue
            seen.add(g)
            gens.append(g)
        self.gens = tuple(gens)
        self.node_budget = node_budget
        self._cache = {}
        ideal_vecs = []
        for w in ideal:
            w = vec(w)
            if len(w) != self.rank:
                raise ValueError("ideal generator length differs from rank")
            if is_zero(w):
                raise ZeroMonoid("the identity generates the unit ideal")
            ideal_vecs.append(w)
        if validate:
            for w in ideal_vecs:
                if not self._member_raw(w):
                    raise ValueError(f"ideal generator {w} is not in the semigroup")
        self.ideal_gens = tuple(self._minimalize_ideal(ideal_vecs))

    # -- cached lattice data -------------------------------------------

    def cone(self):
        if "cone" not in self._cache:
            self._cache["cone"] = RationalCone(self.rank, self.gens)
        return self._cache["cone"]

    def group_basis(self):
        """Hermite basis of the group generated by the generators."""
        if "group" not in self._cache:
            self._cache["group"] = hermite_basis(self.gens)
        return self._cache["group"]

    def group_rank(self):
        return len(self.group_basis())

    def unit_gen_indices(self):
        """Indices of generators g with -g in the semigroup.

        A generator is a unit iff it occurs with positive coefficient in
        some non-negative integer relation among the generators, iff the
        rational relation cone has a point with that coordinate positive.
        """
        if "unit_idx" not in self._cache:
            m = len(self.gens)
            if m == 0:
                self._cache["unit_idx"] = ()
            else:
                cons = list(identity_matrix(m))
                for coord_row in transpose(self.gens):
                    cons.append(vec(coord_row))
                    cons.append(vneg(vec(coord_row)))
                rays, lin = dual_description(cons, m)
                assert not lin
                idx = tuple(
                    i for i in range(m) if any(r[i] > 0 for r in rays)
                )
                self._cache["unit_idx"] = idx
        return self._cache["unit_idx"]

    def unit_basis(self):
        """Hermite basis of the unit lattice U(A)."""
        if "unit_basis" not in self._cache:
            self._cache["unit_basis"] = hermite_basis(
                [self.gens[i] for i in self.unit_gen_indices()]
            )
        return self._cache["unit_basis"]

    def pointed_gen_indices(self):
        units = set(self.unit_gen_indices())
        return tuple(i for i in range(len(self.gens)) if i not in units)

    def _quotient_data(self):
        """Projection q killing the saturated unit lattice, with a section.

        Returns (q_rows, section_cols_matrix, quotient_rank).  q is given
        by rows so that q(v) = q_rows @ v; the section s satisfies
        q(s(y)) = y.
        """
        if "qdata" not in self._cache:
            usat = saturation_basis(self.unit_basis(), self.rank)
            l = len(usat)
            n = self.rank
            if l == 0:
                q = identity_matrix(n)
                s = identity_matrix(n)
                self._cache["qdata"] = (q, s, n)
            else:
                from .lattice import smith_normal_form, _invert_unimodular

                _diag, _left, right = smith_normal_form(usat)
                rinv = _invert_unimodular(right)
                # rows of rinv form a unimodular basis whose first l rows
                # span the saturated unit lattice
                basis_rows = rinv
                # q(v) = coordinates l..n-1 of v in that basis = (v @ right)[l:]
                q = tuple(tuple(right[i][j] for i in range(n)) for j in range(l, n))
                s = tuple(
                    tuple(basis_rows[j][i] for j in range(l, n)) for i in range(n)
                )
                self._cache["qdata"] = (q, s, n - l)
        return self._cache["qdata"]

    def quotient_map(self, v):
        q, _s, _r = self._quotient_data()
        return mat_vec(q, v)

    def quotient_section(self, y):
        _q, s, _r = self._quotient_data()
        return mat_vec(s, y)

    def positive_functional(self):
        """Integer functional >= 0 on cone(G), zero exactly on the units.

        Pulled back from the relative interior of the dual of the pointed
        quotient cone, so it is strictly positive on every non-unit
        generator.
        """
        if "phi" not in self._cache:
            q, _s, qr = self._quotient_data()
            imgs = [mat_vec(q, g) for g in self.gens]
            rays, _lin = dual_description(imgs, qr)
            if rays:
                phi_bar = tuple(sum(c) for c in zip(*rays))
            else:
                phi_bar = (0,) * qr
            phi = tuple(
                sum(phi_bar[k] * q[k][j] for k in range(qr)) for j in range(self.rank)
            )
            self._cache["phi"] = phi
        return self._cache["phi"]

    def phi(self, v):
        return dot(self.positive_functional(), v)

    def _suffix_data(self):
        """Per-suffix cones and lattices used to prune membership search."""
        if "suffix" not in self._cache:
            pointed = [self.gens[i] for i in self.pointed_gen_indices()]
            units = [self.gens[i] for i in self.unit_gen_indices()]
            out = []
            for i in range(len(pointed) + 1):
                sub = pointed[i:] + units
                cone = RationalCone(self.rank, sub)
                lat = hermite_basis(sub)
                out.append((cone, lat))
            self._cache["suffix"] = (tuple(pointed), tuple(out))
        return self._cache["suffix"]

    # -- membership -----------------------------------------------------

    def _member_raw(self, v):
        """Decide v in <G>, branch and bound over generator multiplicities."""
        v = vec(v)
        if is_zero(v):
            return True
        if not self.cone().contains(v) or not lattice_contains(self.group_basis(), v):
            return False
        pointed, suffix = self._suffix_data()
        ubasis = self.unit_basis()
        budget = [self.node_budget]
        seen_fail = set()

        def in_units(w):
            return lattice_contains(ubasis, w) if ubasis else is_zero(w)

        def solve(i, w):
            budget[0] -= 1
            if budget[0] < 0:
                raise SearchBoundExceeded(
                    f"membership search exceeded {self.node_budget} nodes"
                )
            if in_units(w):
                return True
            if i == len(pointed):
                return False
            key = (i, w)
            if key in seen_fail:
                return False
            cone_i, lat_i = suffix[i]
            if not cone_i.contains(w) or not lattice_contains(lat_i, w):
                seen_fail.add(key)
                return False
            g = pointed[i]
            phig = self.phi(g)
            cmax = self.phi(w) // phig if phig > 0 else 0
            cur = w
            for c in range(0, cmax + 1):
                if solve(i + 1, cur):
                    return True
                cur = vsub(cur, g)
                if not suffix[i][0].contains(cur):
                    break
            seen_fail.add(key)
            return False

        return solve(0, v)

    def in_ideal(self, v):
        v = vec(v)
        return any(self._member_raw(vsub(v, a)) for a in self.ideal_gens)

    def member(self, v):
        """Classify v as InMonoid, InIdeal, or Outside."""
        v = vec(v)
        if len(v) != self.rank:
            raise ValueError("vector length differs from rank")
        if self.in_ideal(v):
            return IN_IDEAL
        if self._member_raw(v):
            return IN_MONOID
        return OUTSIDE

    def contains(self, v):
        return self.member(v) == IN_MONOID or is_zero(vec(v))

    def is_unit(self, v):
        v = vec(v)
        return self._member_raw(v) and self._member_raw(vneg(v)) and not self.in_ideal(v)

    def _minimalize_ideal(self, vecs):
        """Drop generators divisible by another; keep one of each unit orbit."""
        out = []
        vecs = sorted(set(vecs), key=lambda w: (self.phi(w), w))
        for i, w in enumerate(vecs):
            redundant = False
            for j, u in enumerate(vecs):
                if i == j:
                    continue
                d = vsub(w, u)
                if self._member_raw(d):
                    if not self._member_raw(vneg(d)) or j < i:
                        redundant = True
                        break
            if not redundant:
                out.append(w)
        return out

    # -- structure ------------------------------------------------------

    def is_cancellative(self):
        return not self.ideal_gens

    def is_trivial(self):
        """True for S^0-like monoids: no nonzero elements besides 1."""
        return not self.gens

    def units(self):
        """Generators of the unit sublattice."""
        return list(self.unit_basis())

    def nonzero_elements_up_to(self, phi_bound):
        """Vectors of <G> with phi <= bound, one per unit orbit, lifted.

        Enumerates the pointed quotient by breadth-first search and lifts
        through the section; membership facts about ideals are invariant
        under the unit action, so representatives suffice.
        """
        pointed = [self.gens[i] for i in self.pointed_gen_indices()]
        qimgs = [self.quotient_map(g) for g in pointed]
        start = self.quotient_map((0,) * self.rank)
        frontier = {start}
        seen = {start: (0,) * self.rank}
        while frontier:
            nxt = set()
            for y in frontier:
                lift = seen[y]
                for g, qg in zip(pointed, qimgs):
                    cand = vadd(lift, g)
                    if self.phi(cand) > phi_bound:
                        continue
                    y2 = vadd(y, qg)
                    if y2 not in seen:
                        seen[y2] = cand
                        nxt.add(y2)
            frontier = nxt
        return [w for w in seen.values() if not is_zero(w)]

    def mspec(self):
        from .prime import mspec as _mspec

        return _mspec(self)

    def dimension(self):
        from .prime import mspec as _mspec

        primes = _mspec(self)
        # longest chain in the inclusion order
        order = {p.key(): p for p in primes}
        depth = {}

        def rec(p):
            if p.key() in depth:
                return depth[p.key()]
            best = 0
            for q in primes:
                if q.key() != p.key() and q.is_contained_in(p):
                    best = max(best, rec(q) + 1)
            depth[p.key()] = best
            return best

        return max((rec(p) for p in primes), default=0)

    # -- constructions ---------------------------------------------------

    def localize(self, prime):
        """Invert the generators on the face of `prime`."""
        face_gens = [self.gens[i] for i in sorted(prime.face_indices)]
        gens = list(self.gens) + [vneg(g) for g in face_gens]
        out = AffineMonoid(self.rank, gens, self.ideal_gens,
                           node_budget=self.node_budget, validate=False)
        for a in self.ideal_gens:
            if out.is_unit(a) or out._member_raw(vneg(a)):
                raise ZeroMonoid("an ideal generator became a unit under localization")
        return out

    def smash(self, other):
        """Coproduct: block-embedded generators, union of embedded ideals."""
        n1, n2 = self.rank, other.rank
        gens = [g + (0,) * n2 for g in self.gens] + [
            (0,) * n1 + g for g in other.gens
        ]
        ideal = [w + (0,) * n2 for w in self.ideal_gens] + [
            (0,) * n1 + w for w in other.ideal_gens
        ]
        return AffineMonoid(n1 + n2, gens, ideal, node_budget=self.node_budget,
                            validate=False)

    def quotient_by_ideal(self, extra_ideal_gens):
        gens_ok = []
        for w in extra_ideal_gens:
            w = vec(w)
            if not self._member_raw(w):
                raise ValueError("ideal generator outside the semigroup")
            gens_ok.append(w)
        return AffineMonoid(
            self.rank,
            self.gens,
            list(self.ideal_gens) + gens_ok,
            node_budget=self.node_budget,
            validate=False,
        )

    def normalization(self):
        """Saturate inside the group completion.

        Returns (monoid, embedding) where the embedding is the identity
        matrix of the shared ambient lattice.  Requires a cancellative
        monoid.  The generators are a Hilbert basis of the pointed part
        joined with a basis of the unit lattice of the saturation.
        """
        if self.ideal_gens:
            raise NotCancellative("normalization requires an empty ideal")
        group = self.group_basis()
        if not group:
            return AffineMonoid(self.rank, [], []), identity_matrix(self.rank)
        cone = self.cone()
        lin = cone.lineality_basis
        if not lin:
            gens = hilbert_basis(cone, group)
        else:
            # units of the saturation: group cap lineality span
            lin_normals = integer_kernel(lin)
            if lin_normals:
                coeff_kernel = integer_kernel(
                    [mat_vec(group, n) for n in lin_normals]
                )
                unit_part = [mat_vec(transpose(group), c) for c in coeff_kernel]
            else:
                unit_part = list(group)
            unit_part = hermite_basis(unit_part)
            q, s, qr = self._quotient_data()
            qgens = [self.quotient_map(g) for g in self.gens]
            qgroup = hermite_basis(qgens)
            qcone = RationalCone(qr, qgens)
            if not qcone.is_strongly_convex():
                raise NotPointed("quotient by units left lineality behind")
            hb = hilbert_basis(qcone, qgroup)
            lifted = [self.quotient_section(h) for h in hb]
            gens = (
                list(unit_part)
                + [vneg(u) for u in unit_part]
                + lifted
            )
        nor = AffineMonoid(self.rank, gens, [], node_budget=self.node_budget)
        return nor, identity_matrix(self.rank)

    def is_normal(self):
        if self.ideal_gens:
            return False
        nor, _ = self.normalization()
        return all(self._member_raw(g) for g in nor.gens)

    def nilradical(self):
        """Generators of {v : n*v in ideal(I) for some n >= 1}.

        Computed as the intersection of the minimal primes over the ideal.
        """
        from .prime import mspec as _mspec

        if not self.ideal_gens:
            return []
        primes = _mspec(self)
        minimal = [
            p
            for p in primes
            if not any(q is not p and q.is_contained_in(p) for q in primes)
        ]
        current = None
        for p in minimal:
            gens_p = p.ideal_generators()
            if current is None:
                current = gens_p
            else:
                current = self.intersect_ideals(current, gens_p)
        return self._minimalize_ideal(current or [])

    def reduce(self):
        nil = self.nilradical()
        if not nil:
            return self
        return AffineMonoid(self.rank, self.gens, nil,
                            node_budget=self.node_budget, validate=False)

    def is_reduced(self):
        nil = self.nilradical()
        return all(self.in_ideal(w) for w in nil)

    def intersect_ideals(self, gens1, gens2):
        """Minimal generators of ideal(gens1) cap ideal(gens2).

        Enumerates candidates v = a + x with phi(v) bounded by
        IDEAL_ENUM_SLACK * (phi(a) + phi(b)), then verifies that every
        enumerated common element is divisible by a found generator.
        """
        if not gens1 or not gens2:
            return []
        found = []
        bound = IDEAL_ENUM_SLACK * max(
            self.phi(a) + self.phi(b) for a in gens1 for b in gens2
        )
        in1 = lambda v: any(self._member_raw(vsub(v, a)) for a in gens1)
        in2 = lambda v: any(self._member_raw(vsub(v, b)) for b in gens2)
        candidates = [
            v for v in self.nonzero_elements_up_to(bound) if in1(v) and in2(v)
        ]
        candidates.sort(key=lambda v: (self.phi(v), v))
        for v in candidates:
            if not any(self._member_raw(vsub(v, f)) for f in found):
                found.append(v)
        # verification inside the enumeration region
        for v in candidates:
            assert any(self._member_raw(vsub(v, f)) for f in found), (
                "ideal intersection enumeration bound too small; raise IDEAL_ENUM_SLACK"
            )
        return found

    # -- comparisons ------------------------------------------------------

    def same_submonoid(self, other):
        """Equality as presented submonoid-with-ideal of a common Z^n."""
        if self.rank != other.rank:
            return False
        for g in self.gens:
            if not other._member_raw(g):
                return False
        for g in other.gens:
            if not self._member_raw(g):
                return False
        for w in self.ideal_gens:
            if not other.in_ideal(w):
                return False
        for w in other.ideal_gens:
            if not self.in_ideal(w):
                return False
        return True

    def atoms(self):
        """An irredundant generating list (units first, then pointed gens)."""
        gens = list(self.gens)
        keep = list(gens)
        for g in list(keep):
            rest = [h for h in keep if h != g]
            probe = AffineMonoid(self.rank, rest, node_budget=self.node_budget,
                                 validate=False)
            if probe._member_raw(g):
                keep = rest
        return keep

    def __repr__(self):
        return (
            f"AffineMonoid(rank={self.rank}, gens={list(self.gens)}, "
            f"ideal={list(self.ideal_gens)})"
        )


# ---------------------------------------------------------------------------
# maps between monoids


def is_monoid_map(matrix, source, target):
    """Check that v -> matrix@v sends the source monoid into the target."""
    for g in source.gens:
        img = mat_vec(matrix, g)
        if not target._member_raw(img):
            return False
    for w in source.ideal_gens:
        if not target.in_ideal(mat_vec(matrix, w)):
            return False
    return True


def is_local_map(matrix, source, target):
    """Non-units must map to non-units."""
    for g in source.gens:
        if not source.is_unit(g) and target.is_unit(mat_vec(matrix, g)):
            return False
    return True


def is_monoid_iso(matrix, source, target):
    """Does v -> matrix@v carry source isomorphically onto target?"""
    if not is_monoid_map(matrix, source, target):
        return False
    src_group = source.group_basis()
    tgt_group = target.group_basis()
    if len(src_group) != len(tgt_group):
        return False
    imgs = [mat_vec(matrix, b) for b in src_group]
    img_basis = hermite_basis(imgs)
    if len(img_basis) != len(src_group):
        return False  # not injective on the group
    for b in tgt_group:
        if not lattice_contains(img_basis, b):
            return False  # not onto the group
    # image monoid covers the target monoid
    from .lattice import solve_rational

    for h in target.gens:
        lam = solve_rational(imgs, h)
        if lam is None or any(l.denominator != 1 for l in lam):
            return False
        pre = vec(
            sum(int(lam[k]) * src_group[k][j] for k in range(len(src_group)))
            for j in range(source.rank)
        )
        if not source._member_raw(pre):
            return False
        if source.in_ideal(pre) != target.in_ideal(h):
            return False
    for w in target.ideal_gens:
        lam = solve_rational(imgs, w)
        if lam is None or any(l.denominator != 1 for l in lam):
            return False
        pre = vec(
            sum(int(lam[k]) * src_group[k][j] for k in range(len(src_group)))
            for j in range(source.rank)
        )
        if not source.in_ideal(pre):
            return False
    return True


def pushout_closed(f_matrix, base, target, ideal_gens_of_base):
    """Pushout of target <- base -> base/J when one leg kills an ideal.

    Returns target/(J*target).  Raises UnsupportedPushout when the data
    does not describe such a leg (callers wanting general pushouts are out
    of luck by design).
    """
    for w in ideal_gens_of_base:
        if not base._member_raw(vec(w)):
            raise UnsupportedPushout("quotient leg is not an ideal of the base")
    extended = []
    for w in ideal_gens_of_base:
        img = mat_vec(f_matrix, vec(w))
        if is_zero(img) or target.is_unit(img):
            raise ZeroMonoid("ideal extends to the unit ideal")
        if not target.in_ideal(img):
            extended.append(img)
    return target.quotient_by_ideal(extended)


def integral_state(matrix, source, target):
    """Tri-state integrality of source -> target along `matrix`.

    For a cancellative target the test is exact: integral iff every target
    generator lies in the rational cone of the image generators.  With an
    ideal present we search small powers and report Unknown past the
    bound.
    """
    imgs = [mat_vec(matrix, g) for g in source.gens]
    img_cone = RationalCone(target.rank, imgs)
    if target.is_cancellative():
        ok = all(img_cone.contains(h) for h in target.gens)
        return "Integral" if ok else "NotIntegral"
    image_monoid = AffineMonoid(target.rank, [v for v in imgs if not is_zero(v)],
                                validate=False)
    for h in target.gens:
        found = False
        for n in range(1, 17):
            nh = tuple(n * c for c in h)
            if target.in_ideal(nh) or image_monoid._member_raw(nh):
                found = True
                break
        if not found:
            return "Unknown"
    return "Integral"


def finiteness_state(matrix, source, target):
    """Finite / NotFinite / Unknown per the integral-finite dichotomy."""
    state = integral_state(matrix, source, target)
    if state == "Integral":
        return "Finite"
    if state == "NotIntegral" and target.is_cancellative():
        return "NotFinite"
    return "Unknown"


# convenience constructors -------------------------------------------------


def free_monoid(n):
    """F_n: free pointed monoid on n generators."""
    return AffineMonoid(n, identity_matrix(n))


def cusp_monoid():
    """The numerical semigroup <2, 3>."""
    return AffineMonoid(1, [(2,), (3,)])


def group_monoid(n):
    """Z^n with basepoint adjoined."""
    gens = list(identity_matrix(n)) + [vneg(r) for r in identity_matrix(n)]
    return AffineMonoid(n, gens)


def pointed_monoid(*gens):
    rank = len(gens[0])
    return AffineMonoid(rank, gens)
