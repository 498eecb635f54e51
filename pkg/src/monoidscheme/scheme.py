"""Monoid schemes of finite type as scheme-like monoid posets.

A scheme is a finite poset of points (maximal = closed, minimal = generic)
with an affine-monoid stalk at each point and, for every comparable pair
y <= x, an integer matrix realizing A(y) as a localization of A(x).  Stalk
presentations are kept "tight": the ambient lattice is the saturation of
the stalk's group completion, which makes every transition matrix square
and unimodular.
"""

from __future__ import annotations

from .errors import (
    BadGluing,
    KernelError,
    NotCancellative,
    NotSeparated,
    UnsupportedImage,
    UnsupportedPullback,
    ZeroMonoid,
)
from .lattice import (
    identity_matrix,
    is_zero,
    mat_mul,
    mat_vec,
    smith_normal_form,
    saturation_basis,
    vec,
    vneg,
    _invert_unimodular,
)
from .monoid import AffineMonoid, is_monoid_iso
from .morphism import SchemeMorphism, _mat_compose
from .prime import mspec


def tighten(monoid):
    """Re-coordinatize so the ambient lattice is the saturated group.

    Returns (tight_monoid, to_tight, from_tight) where the matrices
    restrict to mutually inverse maps between the saturation of the old
    group and the new ambient Z^r.
    """
    n = monoid.rank
    sat = saturation_basis(monoid.gens, n)
    r = len(sat)
    if r == 0:
        return AffineMonoid(0, [], []), tuple(() for _ in range(0)), tuple(() for _ in range(n))
    _diag, _left, right = smith_normal_form(sat)
    rinv = _invert_unimodular(right)
    to_tight = tuple(tuple(right[i][j] for i in range(n)) for j in range(r))
    from_tight = tuple(tuple(rinv[k][i] for k in range(r)) for i in range(n))
    gens = [mat_vec(to_tight, g) for g in monoid.gens]
    ideal = [mat_vec(to_tight, w) for w in monoid.ideal_gens]
    tight = AffineMonoid(r, gens, ideal, node_budget=monoid.node_budget,
                         validate=False)
    return tight, to_tight, from_tight


class MonoidScheme:
    """Finite poset with affine-monoid stalks and localization transitions."""

    def __init__(self, points, leq_pairs, stalks, transitions, keys=None,
                 tags=None, validate=True):
        self.points = tuple(points)
        pset = set(self.points)
        rel = set()
        for a, b in leq_pairs:
            rel.add((a, b))
        for p in self.points:
            rel.add((p, p))
        # transitive closure
        changed = True
        while changed:
            changed = False
            for a, b in list(rel):
                for c in self.points:
                    if (b, c) in rel and (a, c) not in rel:
                        rel.add((a, c))
                        changed = True
        self._leq = frozenset(rel)
        for a, b in rel:
            if a != b and (b, a) in rel:
                raise KernelError("leq relation is not antisymmetric")
            if a not in pset or b not in pset:
                raise KernelError("leq relation mentions unknown points")
        self.stalks = dict(stalks)
        self.trans = {k: tuple(map(tuple, m)) for k, m in transitions.items()}
        self.keys = dict(keys or {p: (p,) for p in self.points})
        self.tags = dict(tags or {})
        if validate:
            self.validate()

    # -- poset ------------------------------------------------------------

    def leq(self, a, b):
        return (a, b) in self._leq

    def down_set(self, x):
        return [y for y in self.points if self.leq(y, x)]

    def up_set(self, x):
        return [y for y in self.points if self.leq(x, y)]

    def maximal_points(self):
        return [
            p
            for p in self.points
            if not any(q != p and self.leq(p, q) for q in self.points)
        ]

    def minimal_points(self):
        return [
            p
            for p in self.points
            if not any(q != p and self.leq(q, p) for q in self.points)
        ]

    def covers(self):
        """Pairs (x, y) with y < x and nothing strictly between."""
        out = []
        for x in self.points:
            for y in self.points:
                if y != x and self.leq(y, x):
                    if not any(
                        z != x and z != y and self.leq(y, z) and self.leq(z, x)
                        for z in self.points
                    ):
                        out.append((x, y))
        return out

    def glb(self, x1, x2):
        """(has_lower_bound, greatest lower bound or None)."""
        lower = [y for y in self.points if self.leq(y, x1) and self.leq(y, x2)]
        if not lower:
            return False, None
        tops = [
            y
            for y in lower
            if not any(z != y and self.leq(y, z) for z in lower)
        ]
        return True, (tops[0] if len(tops) == 1 else None)

    def height(self, x):
        memo = {}

        def rec(p):
            if p in memo:
                return memo[p]
            best = 0
            for q in self.points:
                if q != p and self.leq(q, p):
                    best = max(best, rec(q) + 1)
            memo[p] = best
            return best

        return rec(x)

    def dimension(self):
        return max((self.height(p) for p in self.points), default=0)

    def is_connected(self):
        if not self.points:
            return True
        seen = {self.points[0]}
        frontier = [self.points[0]]
        while frontier:
            p = frontier.pop()
            for q in self.points:
                if q not in seen and (self.leq(p, q) or self.leq(q, p)):
                    seen.add(q)
                    frontier.append(q)
        return len(seen) == len(self.points)

    # -- stalks -----------------------------------------------------------

    def stalk(self, p):
        return self.stalks[p]

    def transition(self, x, y):
        """Matrix A(x) -> A(y) for y <= x."""
        if x == y:
            return identity_matrix(self.stalks[x].rank)
        if not self.leq(y, x):
            raise KernelError("transition requested against the order")
        return self.trans[(x, y)]

    def is_cancellative(self):
        return all(a.is_cancellative() for a in self.stalks.values())

    def is_reduced(self):
        return all(self.stalks[x].is_reduced() for x in self.maximal_points())

    def is_normal(self):
        return all(a.is_normal() for a in self.stalks.values())

    # -- validation ---------------------------------------------------------

    def point_for_prime(self, x, prime):
        """The point y <= x matching a prime of A(x)."""
        a_x = self.stalks[x]
        for y in self.down_set(x):
            t = self.transition(x, y)
            stalk_y = self.stalks[y]
            face = frozenset(
                i
                for i, g in enumerate(a_x.gens)
                if stalk_y.is_unit(mat_vec(t, g))
            )
            if face == prime.face_indices:
                return y
        raise KernelError("no point matches the prime; scheme-like fails")

    def validate(self):
        for x in self.points:
            a_x = self.stalks[x]
            primes = mspec(a_x)
            down = self.down_set(x)
            if len(primes) != len(down):
                raise KernelError(
                    f"down-set of {x} has {len(down)} points but the stalk has "
                    f"{len(primes)} primes"
                )
            match = {}
            for p in primes:
                y = self.point_for_prime(x, p)
                if y in match.values():
                    raise KernelError("two primes matched one point")
                match[p.key()] = (p, y)
            # order compatibility and stalk isomorphism
            for k1, (p1, y1) in match.items():
                for k2, (p2, y2) in match.items():
                    if p1.is_contained_in(p2) != self.leq(y1, y2):
                        raise KernelError("prime order differs from point order")
            for _k, (p, y) in match.items():
                t = self.transition(x, y)
                if not is_monoid_iso(t, a_x.localize(p), self.stalks[y]):
                    raise KernelError(
                        f"transition {x}->{y} is not the localization at its prime"
                    )
        # transitions compose
        for x in self.points:
            for y in self.down_set(x):
                if y == x:
                    continue
                for z in self.down_set(y):
                    if z == y:
                        continue
                    lhs = mat_mul(self.transition(y, z), self.transition(x, y))
                    rhs = self.transition(x, z)
                    for b in self.stalks[x].group_basis():
                        if mat_vec(lhs, b) != mat_vec(rhs, b):
                            raise KernelError("transitions do not compose")

    # -- open restriction --------------------------------------------------

    def open_subscheme(self, point_subset):
        pts = [p for p in self.points if p in set(point_subset)]
        for p in pts:
            for q in self.points:
                if self.leq(q, p) and q not in set(pts):
                    raise KernelError("open subscheme needs a down-closed set")
        sub = MonoidScheme(
            pts,
            [(a, b) for (a, b) in self._leq if a in set(pts) and b in set(pts)],
            {p: self.stalks[p] for p in pts},
            {
                (x, y): m
                for (x, y), m in self.trans.items()
                if x in set(pts) and y in set(pts)
            },
            keys={p: self.keys[p] for p in pts},
            validate=False,
        )
        incl = SchemeMorphism(
            sub,
            self,
            {p: p for p in pts},
            {p: identity_matrix(self.stalks[p].rank) for p in pts},
            tags={"open_immersion": True},
            validate=False,
        )
        return sub, incl

    def __repr__(self):
        return (
            f"MonoidScheme({len(self.points)} points, "
            f"{len(self.maximal_points())} maximal)"
        )


# ---------------------------------------------------------------------------
# constructors


def from_affine(monoid):
    """MSpec of an affine monoid, tightened."""
    tight, _to, _from = tighten(monoid)
    primes = mspec(tight)
    ids = list(range(len(primes)))
    stalks = {}
    keys = {}
    leq = []
    for i, p in enumerate(primes):
        stalks[i] = tight.localize(p)
        keys[i] = tuple(sorted(p.face_indices))
        for j, q in enumerate(primes):
            if q.is_contained_in(p):
                leq.append((j, i))
    trans = {}
    for i in ids:
        for j in ids:
            if i != j and (j, i) in set(leq):
                trans[(i, j)] = identity_matrix(tight.rank)
    return MonoidScheme(ids, leq, stalks, trans, keys=keys, validate=False)


def glue(charts, identifications, validate=True):
    """Glue affine charts along localizations.

    `identifications` is a list of (i, prime_i, j, prime_j, iso) where the
    iso is an integer matrix from chart i's ambient lattice to chart j's
    carrying localize(charts[i], prime_i) isomorphically onto
    localize(charts[j], prime_j).  Primes may be given as PrimeIdeal
    objects of the chart monoids or as frozensets of face indices.
    """
    tights = []
    to_maps = []
    from_maps = []
    for a in charts:
        t, to, frm = tighten(a)
        tights.append(t)
        to_maps.append(to)
        from_maps.append(frm)
    chart_primes = [mspec(t) for t in tights]
    # local points: (chart, prime_key)
    local_points = []
    for ci, primes in enumerate(chart_primes):
        for p in primes:
            local_points.append((ci, p.key()))
    parent = {lp: lp for lp in local_points}

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    def union(a, b):
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[ra] = rb

    def prime_by_key(ci, key):
        for p in chart_primes[ci]:
            if p.key() == key:
                return p
        raise BadGluing(f"chart {ci} has no prime with face {sorted(key)}")

    # conversion matrices between chart ambients, recorded per identification
    conv = {}  # (ci, cj) edges discovered, with matrices in tight coordinates

    def record_conversion(ci, cj, m):
        conv.setdefault((ci, cj), []).append(m)

    for (ci, pi, cj, pj, iso) in identifications:
        key_i = pi.key() if hasattr(pi, "key") else frozenset(pi)
        key_j = pj.key() if hasattr(pj, "key") else frozenset(pj)
        p_i = prime_by_key(ci, key_i)
        p_j = prime_by_key(cj, key_j)
        iso_t = mat_mul(to_maps[cj], mat_mul(tuple(map(tuple, iso)), from_maps[ci]))
        loc_i = tights[ci].localize(p_i)
        loc_j = tights[cj].localize(p_j)
        if not is_monoid_iso(iso_t, loc_i, loc_j):
            raise BadGluing(
                "identification is not an isomorphism of the localizations"
            )
        record_conversion(ci, cj, iso_t)
        record_conversion(cj, ci, _invert_unimodular(iso_t))
        # match every prime in the down-set of p_i to one under p_j
        for q in chart_primes[ci]:
            if not q.is_contained_in(p_i):
                continue
            match = _match_prime_across(
                tights[ci], q, iso_t, tights[cj], chart_primes[cj], p_j
            )
            union((ci, q.key()), (cj, match.key()))

    classes = {}
    for lp in local_points:
        classes.setdefault(find(lp), []).append(lp)
    # reject identifications of two distinct points in one chart
    for members in classes.values():
        per_chart = {}
        for (ci, key) in members:
            if ci in per_chart and per_chart[ci] != key:
                raise BadGluing("two points of one chart were identified")
            per_chart[ci] = key

    reps = sorted(classes.keys(), key=lambda lp: (lp[0], tuple(sorted(lp[1]))))
    ids = {rep: i for i, rep in enumerate(reps)}
    of_local = {lp: ids[find(lp)] for lp in local_points}

    # order: generated by within-chart inclusion
    leq = set()
    for ci, primes in enumerate(chart_primes):
        for p in primes:
            for q in primes:
                if q.is_contained_in(p):
                    leq.add((of_local[(ci, q.key())], of_local[(ci, p.key())]))

    # stalks at canonical representatives
    stalks = {}
    keys = {}
    rep_of = {}
    for rep, i in ids.items():
        ci, key = rep
        p = prime_by_key(ci, key)
        stalks[i] = tights[ci].localize(p)
        keys[i] = (ci, tuple(sorted(key)))
        rep_of[i] = rep

    # conversion matrices between charts: BFS over identification edges
    chart_graph = {}
    for (ci, cj), mats in conv.items():
        chart_graph.setdefault(ci, {})[cj] = mats[0]
        # consistency of parallel identifications is checked via validate()

    def chart_path_matrix(ci, cj):
        if ci == cj:
            return identity_matrix(tights[ci].rank)
        frontier = {ci: identity_matrix(tights[ci].rank)}
        seen = {ci}
        while frontier:
            nxt = {}
            for c, m in frontier.items():
                for c2, m2 in chart_graph.get(c, {}).items():
                    if c2 in seen:
                        continue
                    acc = mat_mul(m2, m)
                    if c2 == cj:
                        return acc
                    seen.add(c2)
                    nxt[c2] = acc
            frontier = nxt
        raise BadGluing("identified charts are not connected by conversions")

    trans = {}
    order = list(leq)
    # close the order transitively before building matrices
    scheme_points = list(range(len(reps)))
    closed = set(order)
    changed = True
    while changed:
        changed = False
        for a, b in list(closed):
            for c in scheme_points:
                if (b, c) in closed and (a, c) not in closed:
                    closed.add((a, c))
                    changed = True
    for (a, b) in closed:
        if a == b:
            continue
        # matrix from stalk at b (bigger point) to stalk at a? orientation:
        # (a, b) in leq means a <= b, so we need A(b) -> A(a)
        cb, _ = rep_of[b]
        ca, _ = rep_of[a]
        trans[(b, a)] = chart_path_matrix(cb, ca)

    scheme = MonoidScheme(
        scheme_points,
        closed,
        stalks,
        trans,
        keys=keys,
        validate=False,
    )
    if validate:
        try:
            scheme.validate()
        except KernelError as e:
            raise BadGluing(f"glued data is not scheme-like: {e}") from e
    return scheme


def _match_prime_across(tight_i, q, iso_t, tight_j, primes_j, p_j):
    """Find the prime of chart j identified with q <= p_i.

    The localization of chart i at q must map onto the localization of
    chart j at the matching prime; comparison as submonoids of chart j's
    ambient lattice pins the partner down uniquely.
    """
    loc_q = tight_i.localize(q)
    mapped = AffineMonoid(
        tight_j.rank,
        [mat_vec(iso_t, g) for g in loc_q.gens],
        [mat_vec(iso_t, w) for w in loc_q.ideal_gens],
        validate=False,
    )
    hits = []
    for cand in primes_j:
        if not cand.is_contained_in(p_j):
            continue
        if tight_j.localize(cand).same_submonoid(mapped):
            hits.append(cand)
    if len(hits) != 1:
        raise BadGluing("identification does not match the prime posets")
    return hits[0]


# ---------------------------------------------------------------------------
# separatedness


class SeparatednessResult:
    def __init__(self, separated, violation=None):
        self.separated = separated
        self.violation = violation  # (x1, x2) pair of points

    def __bool__(self):
        return self.separated

    def __repr__(self):
        if self.separated:
            return "SeparatednessResult(separated)"
        return f"SeparatednessResult(violating pair {self.violation})"


def is_separated(scheme):
    """Greatest lower bounds exist and smash maps onto them are surjective."""
    pts = scheme.points
    for i, x1 in enumerate(pts):
        for x2 in pts[i + 1 :]:
            has_lb, x0 = scheme.glb(x1, x2)
            if not has_lb:
                continue
            if x0 is None:
                return SeparatednessResult(False, (x1, x2))
            a0 = scheme.stalk(x0)
            t1 = scheme.transition(x1, x0)
            t2 = scheme.transition(x2, x0)
            imgs = [mat_vec(t1, g) for g in scheme.stalk(x1).gens] + [
                mat_vec(t2, g) for g in scheme.stalk(x2).gens
            ]
            probe = AffineMonoid(
                a0.rank, [v for v in imgs if not is_zero(v)], validate=False
            )
            for h in a0.gens:
                if not probe._member_raw(h) and not a0.in_ideal(h):
                    return SeparatednessResult(False, (x1, x2))
    return SeparatednessResult(True)


# ---------------------------------------------------------------------------
# ideal sheaves and closed subschemes


class IdealSheaf:
    """Chartwise monomial ideals at the maximal points, quasi-coherent.

    A chart mapped to None carries the unit ideal (the subscheme misses
    that chart entirely); monomial generators can never reach 1, so the
    marker is needed to express empty intersections.
    """

    def __init__(self, scheme, chart_gens, validate=True):
        self.scheme = scheme
        self.chart_gens = {
            x: (None if gens is None else tuple(vec(w) for w in gens))
            for x, gens in chart_gens.items()
        }
        for x in scheme.maximal_points():
            if x not in self.chart_gens:
                raise KernelError("ideal sheaf must cover every maximal point")
        if validate:
            self.validate()

    def gens_at(self, x):
        return self.chart_gens[x]

    def gens_at_point(self, y):
        """Transported generators at y, or None for the unit ideal there.

        Survival of y must not depend on the covering chart chosen; the
        quasi-coherence check guards that, so any chart above y serves.
        """
        sch = self.scheme
        for x in sch.maximal_points():
            if sch.leq(y, x):
                gens = self.chart_gens[x]
                if gens is None:
                    return None
                t = sch.transition(x, y)
                return [mat_vec(t, w) for w in gens]
        raise KernelError("point below no maximal chart")

    def vanishes_at(self, y):
        """True iff y lies in the closed subscheme V of this sheaf."""
        sch = self.scheme
        verdicts = []
        for x in sch.maximal_points():
            if not sch.leq(y, x):
                continue
            gens = self.chart_gens[x]
            if gens is None:
                verdicts.append(False)
                continue
            t = sch.transition(x, y)
            stalk_y = sch.stalk(y)
            verdicts.append(
                not any(stalk_y.is_unit(mat_vec(t, w)) for w in gens)
            )
        if not verdicts:
            raise KernelError("point below no maximal chart")
        if len(set(verdicts)) > 1:
            raise KernelError("ideal sheaf charts disagree at a point")
        return verdicts[0]

    def validate(self):
        sch = self.scheme
        for x, gens in self.chart_gens.items():
            if gens is None:
                continue
            a = sch.stalk(x)
            for w in gens:
                if not a._member_raw(w):
                    raise KernelError("ideal sheaf generator outside its stalk")
        # quasi-coherence on overlaps
        maxes = sch.maximal_points()
        for i, x1 in enumerate(maxes):
            for x2 in maxes[i + 1 :]:
                has, w0 = sch.glb(x1, x2)
                if not has or w0 is None:
                    continue
                a0 = sch.stalk(w0)
                gens1, gens2 = self.chart_gens[x1], self.chart_gens[x2]
                if gens1 is None or gens2 is None:
                    # the unit ideal restricts to the unit ideal: the other
                    # chart's restriction must contain a unit of the overlap
                    for side, other in ((gens1, gens2), (gens2, gens1)):
                        if side is None and other is not None:
                            imgs = [
                                mat_vec(sch.transition(x2 if side is gens1 else x1, w0), w)
                                for w in other
                            ]
                            if not any(a0.is_unit(v) for v in imgs):
                                raise KernelError("ideal sheaf is not quasi-coherent")
                    continue
                g1 = [mat_vec(sch.transition(x1, w0), w) for w in gens1]
                g2 = [mat_vec(sch.transition(x2, w0), w) for w in gens2]
                if any(a0.is_unit(v) for v in g1) != any(a0.is_unit(v) for v in g2):
                    raise KernelError("ideal sheaf is not quasi-coherent")
                if any(a0.is_unit(v) for v in g1):
                    continue
                for v in g1:
                    if not _ideal_contains(a0, g2, v):
                        raise KernelError("ideal sheaf is not quasi-coherent")
                for v in g2:
                    if not _ideal_contains(a0, g1, v):
                        raise KernelError("ideal sheaf is not quasi-coherent")


def _ideal_contains(monoid, gens, v):
    from .lattice import vsub

    if monoid.in_ideal(v):
        return True
    return any(monoid._member_raw(vsub(v, w)) for w in gens)


def closed_subscheme(scheme, sheaf):
    """Chartwise quotient by an ideal sheaf; returns (Z, closed immersion)."""
    pts = [y for y in scheme.points if sheaf.vanishes_at(y)]
    stalks = {}
    for y in pts:
        gens = [
            w
            for w in sheaf.gens_at_point(y)
            if not scheme.stalk(y).in_ideal(w) and not is_zero(w)
        ]
        stalks[y] = scheme.stalk(y).quotient_by_ideal(gens)
    leq = [(a, b) for (a, b) in scheme._leq if a in set(pts) and b in set(pts)]
    trans = {
        (x, y): m
        for (x, y), m in scheme.trans.items()
        if x in set(pts) and y in set(pts)
    }
    sub = MonoidScheme(
        pts,
        leq,
        stalks,
        trans,
        keys={p: scheme.keys[p] for p in pts},
        validate=False,
    )
    incl = SchemeMorphism(
        sub,
        scheme,
        {p: p for p in pts},
        {p: identity_matrix(scheme.stalk(p).rank) for p in pts},
        tags={"closed_immersion": True, "equivariant": True, "proper": True,
              "ideal_sheaf": sheaf},
        validate=False,
    )
    return sub, incl


def equivariant_closure(scheme, point_set):
    """Smallest equivariant closed subscheme containing the points.

    Chartwise the ideal is the intersection of the primes matching the
    points, which is radical, so the closure is reduced.
    Returns (subscheme, ideal sheaf).
    """
    point_set = set(point_set)
    chart_gens = {}
    for x in scheme.maximal_points():
        a_x = scheme.stalk(x)
        hit = [y for y in scheme.down_set(x) if y in point_set]
        if not hit:
            # empty intersection with the chart: the unit ideal; encode as
            # the maximal ideal of an empty support via all generators plus
            # a marker handled in closed_subscheme (unit => excluded)
            chart_gens[x] = tuple()
            continue
        primes = mspec(a_x)
        ideal = None
        for y in hit:
            p = next(
                p
                for p in primes
                if scheme.point_for_prime(x, p) == y
            )
            gens_p = p.ideal_generators()
            ideal = gens_p if ideal is None else a_x.intersect_ideals(ideal, gens_p)
        chart_gens[x] = tuple(ideal)
    # charts with empty hit get the whole maximal ideal? no: the closure is
    # empty there, which an ideal sheaf models as the unit ideal; we encode
    # it by the stalk's generator set plus its units, i.e. the element 1 is
    # not available, so use every generator and mark the chart empty via a
    # unit when the stalk has units. Simpler: extend with all generators.
    for x, gens in chart_gens.items():
        if gens == tuple() and not any(
            y in point_set for y in scheme.down_set(x)
        ):
            a_x = scheme.stalk(x)
            if a_x.unit_basis():
                chart_gens[x] = (a_x.unit_basis()[0],)
            elif a_x.gens:
                chart_gens[x] = tuple(a_x.gens)
            else:
                raise KernelError(
                    "cannot express the empty subscheme on a trivial chart"
                )
    sheaf = IdealSheaf(scheme, chart_gens, validate=False)
    sub, _incl = closed_subscheme(scheme, sheaf)
    return sub, sheaf


def components(scheme):
    """Clopen decomposition of a cancellative scheme by its generic points."""
    if not scheme.is_cancellative():
        raise NotCancellative("components need cancellative stalks")
    out = []
    for eta in scheme.minimal_points():
        pts = scheme.up_set(eta)
        leq = [(a, b) for (a, b) in scheme._leq if a in set(pts) and b in set(pts)]
        trans = {
            (x, y): m
            for (x, y), m in scheme.trans.items()
            if x in set(pts) and y in set(pts)
        }
        out.append(
            MonoidScheme(
                pts,
                leq,
                {p: scheme.stalks[p] for p in pts},
                trans,
                keys={p: scheme.keys[p] for p in pts},
                validate=False,
            )
        )
    return out


# ---------------------------------------------------------------------------
# smoothness


def is_smooth(scheme, require_separated=True):
    """Per-point smoothness: stalk = units x free monoid.

    Returns (all_smooth, {point: bool}).  Requires cancellative stalks;
    separatedness is checked unless disabled.
    """
    if not scheme.is_cancellative():
        raise NotCancellative("smoothness test needs cancellative stalks")
    if require_separated and not is_separated(scheme):
        raise NotSeparated("smoothness test needs a separated scheme")
    verdicts = {}
    for p in scheme.points:
        verdicts[p] = _stalk_is_smooth(scheme.stalk(p))
    return all(verdicts.values()), verdicts


def _stalk_is_smooth(a):
    from .lattice import hermite_basis, int_rank, lattice_contains

    units = a.unit_basis()
    group = a.group_basis()
    # units must be saturated inside the group
    sat_units = saturation_basis(units, a.rank) if units else []
    for b in sat_units:
        if lattice_contains(group, b) and not lattice_contains(units, b):
            return False
    # pointed quotient must be free on its atoms
    q, _s, qr = a._quotient_data()
    qimgs = [mat_vec(q, g) for g in a.gens]
    qimgs = [v for v in qimgs if not is_zero(v)]
    if not qimgs:
        return True
    probeall = AffineMonoid(qr, qimgs, validate=False)
    atoms = probeall.atoms()
    if int_rank(atoms) != len(atoms):
        return False
    diag, _l, _r = smith_normal_form(atoms)
    return all(d == 1 for d in diag)


# ---------------------------------------------------------------------------
# fiber products


def fiber_product(f, g):
    """Pullback of f: Y -> X and g: Z -> X; one leg must be open or
    equivariant closed.  Returns (P, to_Y, to_Z)."""
    if g.tags.get("open_immersion"):
        image = set(g.point_map.values())
        pts = [y for y in f.source.points if f.point_map[y] in image]
        sub, incl = f.source.open_subscheme(pts)
        inv_g = {g.point_map[z]: z for z in g.source.points}
        to_z = SchemeMorphism(
            sub,
            g.source,
            {p: inv_g[f.point_map[p]] for p in pts},
            {
                p: _mat_compose(
                    f.stalk_maps[p],
                    _invert_unimodular(g.stalk_maps[inv_g[f.point_map[p]]]),
                )
                for p in pts
            },
            validate=False,
        )
        return sub, incl, to_z
    if g.tags.get("equivariant") and g.tags.get("ideal_sheaf") is not None:
        sheaf = g.tags["ideal_sheaf"]
        pulled = pull_back_sheaf(sheaf, f)
        d, incl = closed_subscheme(f.source, pulled)
        # map to Z: point y of D lies over f(y), which is in Z's image
        to_z_points = {}
        to_z_maps = {}
        for y in d.points:
            x = f.point_map[y]
            z = next(z for z in g.source.points if g.point_map[z] == x)
            to_z_points[y] = z
            to_z_maps[y] = _mat_compose(
                f.stalk_maps[y], _invert_unimodular(g.stalk_maps[z])
            )
        to_z = SchemeMorphism(d, g.source, to_z_points, to_z_maps, validate=False)
        return d, incl, to_z
    if f.tags.get("open_immersion") or (
        f.tags.get("equivariant") and f.tags.get("ideal_sheaf") is not None
    ):
        p, to_z, to_y = fiber_product(g, f)
        return p, to_y, to_z
    raise UnsupportedPullback(
        "fiber products need an open or equivariant closed leg"
    )


def pull_back_sheaf(sheaf, f):
    """Ideal sheaf on f's source extending f^* of the given sheaf."""
    src, tgt = f.source, f.target
    chart_gens = {}
    for y in src.maximal_points():
        x_img = f.point_map[y]
        x = next(x for x in tgt.maximal_points() if tgt.leq(x_img, x))
        t = tgt.transition(x, x_img)
        m = _mat_compose(f.stalk_maps[y], t)
        gens = [mat_vec(m, w) for w in sheaf.gens_at(x)]
        stalk_y = src.stalk(y)
        gens = [w for w in gens if not is_zero(w) and not stalk_y.in_ideal(w)]
        chart_gens[y] = tuple(gens)
    return IdealSheaf(src, chart_gens, validate=False)


# ---------------------------------------------------------------------------
# scheme-theoretic image


def scheme_theoretic_image(f):
    """Minimal closed subscheme of the target through which f factors.

    Supported shapes: open immersions (kernel-ideal quotients chartwise)
    and morphisms whose chart preimages have a unique maximal point (plain
    image submonoids).  Returns (Z, closed immersion into the target).
    """
    src, tgt = f.source, f.target
    if f.tags.get("open_immersion"):
        chart_gens = {}
        for x in tgt.maximal_points():
            pre = [y for y in src.points if tgt.leq(f.point_map[y], x)]
            a_x = tgt.stalk(x)
            if not pre:
                if a_x.unit_basis():
                    chart_gens[x] = (a_x.unit_basis()[0],)
                else:
                    chart_gens[x] = tuple(a_x.gens)
                continue
            tops = [y for y in pre if not any(z != y and src.leq(y, z) for z in pre)]
            kernel = None
            for y in tops:
                x_y = f.point_map[y]
                loc = tgt.stalk(x_y)
                t = tgt.transition(x, x_y)
                bound = 2 * max(
                    [a_x.phi(w) for w in a_x.ideal_gens], default=0
                )
                cand = [
                    v
                    for v in a_x.nonzero_elements_up_to(bound)
                    if loc.in_ideal(mat_vec(t, v))
                ]
                cand.sort(key=lambda v: (a_x.phi(v), v))
                k_i = []
                for v in cand:
                    if not _ideal_contains(a_x, k_i, v):
                        k_i.append(v)
                kernel = k_i if kernel is None else a_x.intersect_ideals(kernel, k_i)
            chart_gens[x] = tuple(kernel or ())
        sheaf = IdealSheaf(tgt, chart_gens, validate=False)
        z, incl = closed_subscheme(tgt, sheaf)
        _verify_factorization(f, z)
        return z, incl
    # unique-maximal-preimage case: build the image submonoid chartwise
    maxes = tgt.maximal_points()
    if len(maxes) != 1:
        raise UnsupportedImage(
            "image of a non-open morphism needs an affine target"
        )
    x = maxes[0]
    pre = list(src.points)
    tops = [y for y in pre if not any(z != y and src.leq(y, z) for z in pre)]
    if len(tops) != 1:
        raise UnsupportedImage("image needs a unique maximal preimage point")
    y0 = tops[0]
    a_x, a_y = tgt.stalk(x), src.stalk(y0)
    m = f.stalk_maps[y0]
    imgs = [mat_vec(m, g) for g in a_x.gens]
    live = [v for v in imgs if not is_zero(v) and not a_y.in_ideal(v)]
    probe = AffineMonoid(a_y.rank, live, validate=False)
    # ideal of the image: elements of the image monoid lying in the stalk ideal
    bound = 2 * max([a_y.phi(w) for w in a_y.ideal_gens], default=0)
    ideal = []
    for v in probe.nonzero_elements_up_to(bound):
        if a_y.in_ideal(v) and not _ideal_contains(probe, ideal, v):
            ideal.append(v)
    image_monoid = AffineMonoid(a_y.rank, live, ideal, validate=False)
    z = from_affine(image_monoid)
    # embed z's points into the target chart via preimage primes
    from .prime import prime_preimage, mspec as _mspec

    tight_img, to_t, _from_t = tighten(image_monoid)
    point_map = {}
    stalk_maps = {}
    for zp in z.points:
        prime_face = z.keys[zp]
        p = next(
            p for p in _mspec(tight_img) if tuple(sorted(p.face_indices)) == prime_face
        )
        # contraction along A(x) -> image
        q = prime_preimage(mat_mul(to_t, m), a_x, tight_img, p)
        xq = tgt.point_for_prime(x, q)
        point_map[zp] = xq
        stalk_maps[zp] = mat_mul(to_t, _mat_compose(m, tgt.transition(x, xq)))
    incl = SchemeMorphism(
        z, tgt, point_map, stalk_maps,
        tags={"closed_immersion": True}, validate=False
    )
    _verify_factorization(f, z, point_map_into_target=incl)
    return z, incl


def _verify_factorization(f, z, point_map_into_target=None):
    """Every source point must land in the image subscheme's support."""
    if point_map_into_target is None:
        support = set(z.points)
        for y in f.source.points:
            if f.point_map[y] not in support:
                raise KernelError("image does not contain the morphism's image")
    else:
        support = set(point_map_into_target.point_map.values())
        for y in f.source.points:
            if f.point_map[y] not in support:
                raise KernelError("image does not contain the morphism's image")


# ---------------------------------------------------------------------------
# isomorphism testing


def schemes_isomorphic(x_scheme, y_scheme):
    """Isomorphism search for connected cancellative schemes.

    Matches a pointed maximal stalk of X against the candidates in Y by
    atom bijections; a successful match induces a global lattice map that
    must carry every stalk onto its partner.  Adequate at desk scale.
    """
    xs, ys = x_scheme, y_scheme
    if len(xs.points) != len(ys.points):
        return False
    if sorted(xs.height(p) for p in xs.points) != sorted(
        ys.height(p) for p in ys.points
    ):
        return False
    if not (xs.is_cancellative() and ys.is_cancellative()):
        # fall back to exact comparison
        return _schemes_equal(xs, ys)
    x0 = max(xs.maximal_points(), key=lambda p: xs.height(p))
    a_x0 = xs.stalk(x0)
    if a_x0.unit_basis():
        return _schemes_equal(xs, ys)
    ax_atoms = a_x0.atoms()
    from itertools import permutations

    from .lattice import solve_rational

    for y0 in ys.maximal_points():
        a_y0 = ys.stalk(y0)
        if a_y0.unit_basis() or len(a_y0.atoms()) != len(ax_atoms):
            continue
        ay_atoms = a_y0.atoms()
        for perm in permutations(range(len(ax_atoms))):
            targets = [ax_atoms[i] for i in perm]
            phi = _lattice_map_from_pairs(ay_atoms, targets, a_y0.rank, a_x0.rank)
            if phi is None:
                continue
            if _global_match(ys, y0, xs, x0, phi):
                return True
    return False


def _lattice_map_from_pairs(sources, targets, rank_src, rank_tgt):
    """Integer matrix with matrix@s_i = t_i on a spanning set, or None."""
    from .lattice import solve_rational

    rows = []
    for coord in range(rank_tgt):
        rhs = tuple(t[coord] for t in targets)
        # solve row . s_i = t_i[coord] for all i
        sol = solve_rational([tuple(s[j] for s in sources) for j in range(rank_src)], rhs)
        if sol is None or any(x.denominator != 1 for x in sol):
            return None
        rows.append(tuple(int(x) for x in sol))
    return tuple(rows)


def _global_match(ys, y0, xs, x0, phi):
    """Try to extend the stalk map at the top into a scheme isomorphism."""
    pairing = {}
    for y in ys.points:
        stalk_y = ys.stalk(y)
        mapped_gens = [mat_vec(phi, g) for g in stalk_y.gens]
        cand = AffineMonoid(xs.stalk(x0).rank, mapped_gens, validate=False)
        match = None
        for x in xs.points:
            if xs.stalk(x).same_submonoid(cand):
                match = x
                break
        if match is None:
            return False
        pairing[y] = match
    if len(set(pairing.values())) != len(ys.points):
        return False
    for y1 in ys.points:
        for y2 in ys.points:
            if ys.leq(y1, y2) != xs.leq(pairing[y1], pairing[y2]):
                return False
    return True


def _schemes_equal(xs, ys):
    """Exact equality up to point matching by stalk presentation."""
    if len(xs.points) != len(ys.points):
        return False
    used = set()
    pairing = {}
    for y in ys.points:
        match = None
        for x in xs.points:
            if x in used:
                continue
            if (
                xs.stalk(x).rank == ys.stalk(y).rank
                and xs.stalk(x).same_submonoid(ys.stalk(y))
            ):
                match = x
                break
        if match is None:
            return False
        used.add(match)
        pairing[y] = match
    for y1 in ys.points:
        for y2 in ys.points:
            if ys.leq(y1, y2) != xs.leq(pairing[y1], pairing[y2]):
                return False
    return True


def is_isomorphism_along(f):
    """Check a given morphism is an isomorphism of schemes."""
    if len(set(f.point_map.values())) != len(f.target.points):
        return False
    if len(f.source.points) != len(f.target.points):
        return False
    from .morphism import is_order_embedding

    if not is_order_embedding(f):
        return False
    for y in f.source.points:
        if not is_monoid_iso(
            f.stalk_maps[y], f.target.stalk(f.point_map[y]), f.source.stalk(y)
        ):
            return False
    return True
