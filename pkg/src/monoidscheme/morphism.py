"""Morphisms of monoid schemes and the predicate suite.

A SchemeMorphism is a monotone map on the point posets together with, for
every source point y, an integer matrix carrying the target stalk at f(y)
into the source stalk at y (contravariant on sections, like ring maps).
Matrices act on ambient lattices; stalk presentations are tight, so the
matrices are honest on the whole ambient space.
"""

from __future__ import annotations

from .errors import KernelError, PreconditionError
from .lattice import is_zero, mat_vec, vec, vsub
from .monoid import is_monoid_iso


class SchemeMorphism:
    """f: source -> target with per-point stalk matrices A(f(y)) -> A(y)."""

    def __init__(self, source, target, point_map, stalk_maps, tags=None,
                 validate=True):
        self.source = source
        self.target = target
        self.point_map = dict(point_map)
        self.stalk_maps = {y: tuple(map(tuple, m)) for y, m in stalk_maps.items()}
        self.tags = dict(tags or {})
        if validate:
            self.validate()

    def stalk_map(self, y):
        return self.stalk_maps[y]

    def validate(self):
        src, tgt = self.source, self.target
        if set(self.point_map) != set(src.points):
            raise KernelError("point map must cover every source point")
        for y in src.points:
            if self.point_map[y] not in set(tgt.points):
                raise KernelError("point map leaves the target")
        for y1 in src.points:
            for y2 in src.points:
                if src.leq(y1, y2) and not tgt.leq(
                    self.point_map[y1], self.point_map[y2]
                ):
                    raise KernelError("point map is not monotone")
        for y in src.points:
            x = self.point_map[y]
            m = self.stalk_maps[y]
            a_x, a_y = tgt.stalk(x), src.stalk(y)
            for g in a_x.gens:
                img = mat_vec(m, g)
                if not a_y._member_raw(img) and not a_y.in_ideal(img):
                    raise KernelError(
                        f"stalk map at {y} does not land in the stalk"
                    )
                if not a_x.is_unit(g) and a_y.is_unit(img):
                    raise KernelError(f"stalk map at {y} is not local")
            for w in a_x.ideal_gens:
                if not a_y.in_ideal(mat_vec(m, w)):
                    raise KernelError(f"stalk map at {y} does not kill the ideal")
        # compatibility with transitions
        for y1 in src.points:
            for y2 in src.points:
                if y2 == y1 or not src.leq(y2, y1):
                    continue
                x1, x2 = self.point_map[y1], self.point_map[y2]
                lhs = _mat_compose(src.transition(y1, y2), self.stalk_maps[y1])
                rhs = _mat_compose(self.stalk_maps[y2], tgt.transition(x1, x2))
                basis = tgt.stalk(x1).group_basis()
                for b in basis:
                    if mat_vec(lhs, b) != mat_vec(rhs, b):
                        raise KernelError(
                            f"stalk maps at {y1}>{y2} do not commute with transitions"
                        )

    def compose(self, other):
        """self after other: other: W -> source, result W -> target."""
        if other.target is not self.source:
            raise KernelError("composition mismatch")
        pm = {w: self.point_map[other.point_map[w]] for w in other.source.points}
        sm = {
            w: _mat_compose(other.stalk_maps[w], self.stalk_maps[other.point_map[w]])
            for w in other.source.points
        }
        tags = {}
        if self.tags.get("proper") and other.tags.get("proper"):
            tags["proper"] = True
        parts = []
        for t in (self.tags, other.tags):
            parts.extend(t.get("composition", [t]) if t else [])
        return SchemeMorphism(other.source, self.target, pm, sm,
                              tags={**tags, "composition": parts}, validate=False)

    def __repr__(self):
        return f"SchemeMorphism({len(self.source.points)} -> {len(self.target.points)} points, tags={sorted(self.tags)})"


def _mat_compose(second, first):
    """Matrix of v -> second @ (first @ v)."""
    from .lattice import mat_mul

    return mat_mul(second, first)


def identity_morphism(x_scheme):
    from .lattice import identity_matrix

    return SchemeMorphism(
        x_scheme,
        x_scheme,
        {p: p for p in x_scheme.points},
        {p: identity_matrix(x_scheme.stalk(p).rank) for p in x_scheme.points},
        tags={"open_immersion": True, "closed_immersion": True, "proper": True},
        validate=False,
    )


# ---------------------------------------------------------------------------
# structural predicates


def is_order_embedding(f):
    src, tgt = f.source, f.target
    pm = f.point_map
    if len(set(pm.values())) != len(src.points):
        return False
    for y1 in src.points:
        for y2 in src.points:
            if src.leq(y1, y2) != tgt.leq(pm[y1], pm[y2]):
                return False
    return True


def is_open_immersion(f):
    """Injective order-embedding onto a down-closed set, stalkwise iso."""
    if not is_order_embedding(f):
        return False
    image = set(f.point_map.values())
    for x in image:
        for z in f.target.points:
            if f.target.leq(z, x) and z not in image:
                return False
    for y in f.source.points:
        if not is_monoid_iso(
            f.stalk_maps[y], f.target.stalk(f.point_map[y]), f.source.stalk(y)
        ):
            return False
    return True


def is_closed_immersion(f):
    """Order-embedding with affine preimages and surjective section maps."""
    if not is_order_embedding(f):
        return False
    src, tgt = f.source, f.target
    for x in tgt.maximal_points():
        pre = [y for y in src.points if tgt.leq(f.point_map[y], x)]
        if not pre:
            continue
        tops = [
            y
            for y in pre
            if not any(z != y and src.leq(y, z) for z in pre)
        ]
        if len(tops) != 1:
            return False
        y0 = tops[0]
        a_x = tgt.stalk(x)
        a_y = src.stalk(y0)
        m = _mat_compose(f.stalk_maps[y0], tgt.transition(x, f.point_map[y0]))
        images = [mat_vec(m, g) for g in a_x.gens]
        probe_gens = [v for v in images if not is_zero(v) and not a_y.in_ideal(v)]
        from .monoid import AffineMonoid

        probe = AffineMonoid(a_y.rank, probe_gens, validate=False)
        for h in a_y.gens:
            if not probe._member_raw(h):
                return False
    return True


def is_equivariant(f, ideal_sheaf=None):
    """Closed immersion whose section maps are quotients by ideals.

    With the defining ideal sheaf in hand (morphisms built by
    closed_subscheme carry one) the check is exact; otherwise the kernel
    ideal is reconstructed chartwise by bounded enumeration.
    """
    if not is_closed_immersion(f):
        return False
    sheaf = ideal_sheaf or f.tags.get("ideal_sheaf")
    src, tgt = f.source, f.target
    for x in tgt.maximal_points():
        pre = [y for y in src.points if tgt.leq(f.point_map[y], x)]
        if not pre:
            continue
        y0 = max(pre, key=lambda y: len([z for z in pre if src.leq(z, y)]))
        a_x, a_y = tgt.stalk(x), src.stalk(y0)
        m = _mat_compose(f.stalk_maps[y0], tgt.transition(x, f.point_map[y0]))
        if sheaf is not None:
            gens = sheaf.gens_at(x)
        else:
            bound_src = [a_x.phi(g) for g in a_x.gens]
            bound = 2 * (max(bound_src) if bound_src else 0) + max(
                [a_x.phi(w) for w in a_x.ideal_gens], default=0
            )
            gens = [
                v
                for v in a_x.nonzero_elements_up_to(bound)
                if a_y.in_ideal(mat_vec(m, v)) or is_zero(mat_vec(m, v))
            ]
        quotient = a_x.quotient_by_ideal(list(gens))
        if not is_monoid_iso(m, quotient, a_y):
            return False
    return True


def is_birational(f):
    """Generic points biject, genericity reflects, generic stalks iso."""
    src, tgt = f.source, f.target
    gen_src = src.minimal_points()
    gen_tgt = tgt.minimal_points()
    images = [f.point_map[y] for y in gen_src]
    if sorted(images) != sorted(gen_tgt):
        return False
    if len(set(images)) != len(gen_src):
        return False
    for y in src.points:
        if (y in gen_src) != (f.point_map[y] in gen_tgt):
            return False
    for y in gen_src:
        if not is_monoid_iso(
            f.stalk_maps[y], tgt.stalk(f.point_map[y]), src.stalk(y)
        ):
            return False
    return True


def check_height_monotone(f):
    """ht(y) <= ht(f(y)) at every source point."""
    for y in f.source.points:
        if f.source.height(y) > f.target.height(f.point_map[y]):
            return False
    return True


def is_finite_morphism(f):
    """Affine with chartwise finite stalk extensions."""
    from .monoid import finiteness_state

    src, tgt = f.source, f.target
    for x in tgt.maximal_points():
        pre = [y for y in src.points if tgt.leq(f.point_map[y], x)]
        if not pre:
            continue
        tops = [y for y in pre if not any(z != y and src.leq(y, z) for z in pre)]
        if len(tops) != 1:
            return False
        y0 = tops[0]
        m = _mat_compose(f.stalk_maps[y0], tgt.transition(x, f.point_map[y0]))
        if finiteness_state(m, tgt.stalk(x), src.stalk(y0)) != "Finite":
            return False
    return True


# ---------------------------------------------------------------------------
# properness


class ProperResult:
    def __init__(self, verdict, certificate):
        self.verdict = verdict  # "Proper" | "NotProper" | "Unknown"
        self.certificate = certificate

    def __bool__(self):
        return self.verdict == "Proper"

    def __repr__(self):
        return f"ProperResult({self.verdict}, {self.certificate})"


def is_proper(f):
    """Certified partial decision: recognized-proper, fan-refuted, or Unknown.

    Proper when f is an equivariant closed immersion, a finite morphism, a
    tagged projective construction, a toric morphism passing the fan
    support criterion, or a composition of such.  For toric morphisms the
    fan criterion is an iff, so failure refutes.
    """
    if f.tags.get("projective"):
        return ProperResult("Proper", "tagged projective construction")
    if f.tags.get("composition"):
        parts = f.tags["composition"]
        if parts and all(t.get("projective") or t.get("proper") for t in parts):
            return ProperResult("Proper", "composition of proper morphisms")
    # toric: the fan criterion decides
    from .fan import fan_map_from_morphism, is_proper_fan_map
    from .errors import NotToric, NotGenericPreserving

    try:
        phi = fan_map_from_morphism(f)
    except (NotToric, NotGenericPreserving, PreconditionError):
        phi = None
    if phi is not None:
        if is_proper_fan_map(phi):
            return ProperResult("Proper", "fan support criterion")
        return ProperResult("NotProper", "fan support criterion fails")
    if is_equivariant(f):
        return ProperResult("Proper", "equivariant closed immersion")
    if is_closed_immersion(f):
        return ProperResult("Proper", "closed immersion")
    if is_finite_morphism(f):
        return ProperResult("Proper", "finite morphism")
    return ProperResult("Unknown", "no decision rule applies")


# ---------------------------------------------------------------------------
# discrete valuation monoids


class DVM:
    """Z^u of units smashed with one free generator; V+ is all of Z^(u+1)."""

    def __init__(self, unit_rank):
        self.unit_rank = int(unit_rank)
        self.rank = self.unit_rank + 1

    def contains(self, v):
        return v[-1] >= 0

    def is_unit(self, v):
        return v[-1] == 0

    def is_local_into(self, m, stalk):
        """Would stalk -> V via matrix m be a local monoid map into V?"""
        for g in stalk.gens:
            img = mat_vec(m, g)
            if img[-1] < 0:
                return False
            if not stalk.is_unit(g) and img[-1] == 0:
                return False
        return not stalk.ideal_gens  # V is cancellative; ideals cannot map in
    # note: stalks with nonempty ideals admit no map to a DVM unless the
    # ideal dies, which cannot happen since V has no zero divisors


class DVMSquare:
    """A lifting problem: generic data into Y, closed data into X."""

    def __init__(self, dvm, y_point, alpha, x_point, beta):
        self.dvm = dvm
        self.y_point = y_point  # point of Y hit by MSpec(V+)
        self.alpha = tuple(map(tuple, alpha))  # A_Y(y_point) -> V+
        self.x_point = x_point  # point of X hit by the closed point of MSpec(V)
        self.beta = tuple(map(tuple, beta))  # A_X(x_point) -> V


def dvm_lift_check(f, square):
    """Classify lifts MSpec(V) -> Y of a DVM square.

    A lift is a point y_l >= y_point with f(y_l) = x_point whose induced
    map (alpha composed with the transition) lands in V and is local, and
    which commutes with beta.  Returns 'UniqueLift', 'NoLift' or
    'MultipleLifts'.
    """
    src = f.source
    dvm = square.dvm
    lifts = []
    for y_l in src.points:
        if not src.leq(square.y_point, y_l):
            continue
        if f.point_map[y_l] != square.x_point:
            continue
        # A(y_l) sits inside the localization A(y_point); restrict alpha
        gamma = _mat_compose(square.alpha, src.transition(y_l, square.y_point))
        stalk = src.stalk(y_l)
        if not dvm.is_local_into(gamma, stalk):
            continue
        # commutation with beta through f's stalk map at y_l
        lhs = _mat_compose(gamma, f.stalk_maps[y_l])
        basis = f.target.stalk(square.x_point).group_basis()
        if any(mat_vec(lhs, b) != mat_vec(square.beta, b) for b in basis):
            continue
        lifts.append(y_l)
    if not lifts:
        return "NoLift"
    if len(lifts) == 1:
        return "UniqueLift"
    return "MultipleLifts"


def random_dvm_squares(f, seed, count, unit_rank_max=2, coeff_bound=4):
    """Seeded battery of DVM squares for f, built at minimal source points.

    Only squares whose beta genuinely lands in V (last coordinate
    non-negative, locality satisfied) are emitted, so every yield is a
    well-posed lifting problem.
    """
    import random as _random

    rng = _random.Random(seed)
    src, tgt = f.source, f.target
    minimals = src.minimal_points()
    squares = []
    attempts = 0
    while len(squares) < count and attempts < 200 * count:
        attempts += 1
        u = rng.randint(0, unit_rank_max)
        dvm = DVM(u)
        y0 = minimals[rng.randrange(len(minimals))]
        stalk_y0 = src.stalk(y0)
        alpha = tuple(
            tuple(rng.randint(-coeff_bound, coeff_bound) for _ in range(stalk_y0.rank))
            for _ in range(u + 1)
        )
        x0 = f.point_map[y0]
        ups = [x for x in tgt.points if tgt.leq(x0, x)]
        x_b = ups[rng.randrange(len(ups))]
        beta = _mat_compose(
            _mat_compose(alpha, f.stalk_maps[y0]), tgt.transition(x_b, x0)
        )
        stalk_xb = tgt.stalk(x_b)
        if not dvm.is_local_into(beta, stalk_xb):
            continue
        squares.append(DVMSquare(dvm, y0, alpha, x_b, beta))
    return squares
