"""Prime ideals of affine monoids via the face correspondence.

Primes of B = <G> are the complements of the divisor-closed submonoids
B cap F, F a face of cone(G); primes of B/I are the ones whose face
carries no ideal generator.  The 2^m subset search is kept in the test
suite as an oracle.
"""

from __future__ import annotations

from .lattice import dot, vec


class PrimeIdeal:
    """A prime of an AffineMonoid, keyed by the generators on its face."""

    __slots__ = ("monoid", "face_indices", "face_codim")

    def __init__(self, monoid, face_indices, face_codim):
        self.monoid = monoid
        self.face_indices = frozenset(face_indices)
        self.face_codim = face_codim

    def key(self):
        return self.face_indices

    @property
    def height(self):
        """Codimension of the face inside cone(G)."""
        return self.face_codim

    def face_generators(self):
        return [self.monoid.gens[i] for i in sorted(self.face_indices)]

    def off_face_generators(self):
        return [
            g
            for i, g in enumerate(self.monoid.gens)
            if i not in self.face_indices
        ]

    def ideal_generators(self):
        """Generators of this prime as an ideal of the ambient semigroup."""
        return self.off_face_generators()

    def is_contained_in(self, other):
        """Inclusion of primes is reverse inclusion of faces."""
        return other.face_indices <= self.face_indices

    def is_maximal_ideal(self):
        units = set(self.monoid.unit_gen_indices())
        return self.face_indices <= units

    def contains_vector(self, v):
        """Membership of a semigroup element in the prime."""
        v = vec(v)
        face = _face_tester(self.monoid, self.face_indices)
        return not face(v)

    def __eq__(self, other):
        return (
            isinstance(other, PrimeIdeal)
            and self.monoid is other.monoid
            and self.face_indices == other.face_indices
        )

    def __hash__(self):
        return hash((id(self.monoid), self.face_indices))

    def __repr__(self):
        return f"PrimeIdeal(face={sorted(self.face_indices)}, ht={self.face_codim})"


def _face_tester(monoid, face_indices):
    """Linear test for membership in the cone face spanned by the indices."""
    cone = monoid.cone()
    normals = [
        n
        for n in cone.facet_normals
        if all(dot(n, monoid.gens[i]) == 0 for i in face_indices)
    ]

    def inside(v):
        return cone.contains(v) and all(dot(n, v) == 0 for n in normals)

    return inside


def mspec(monoid):
    """All primes, as a list sorted by (codim, face key).

    The poset order is inclusion, i.e. reverse inclusion of faces.
    """
    cone = monoid.cone()
    gens = monoid.gens
    cone_dim = cone.dim()
    out = []
    seen = set()
    for face in cone.face_lattice():
        normals = [cone.facet_normals[i] for i in sorted(face.normal_indices)]
        on_face = frozenset(
            i
            for i, g in enumerate(gens)
            if all(dot(n, g) == 0 for n in normals)
        )
        if on_face in seen:
            continue
        seen.add(on_face)
        # a prime of B/I must contain I: no ideal generator on the face
        bad = any(
            all(dot(n, w) == 0 for n in normals) for w in monoid.ideal_gens
        )
        if bad:
            continue
        out.append(PrimeIdeal(monoid, on_face, cone_dim - face.dim))
    out.sort(key=lambda p: (p.face_codim, tuple(sorted(p.face_indices))))
    return out


def generic_primes(monoid):
    """Minimal primes (the generic points of MSpec)."""
    primes = mspec(monoid)
    return [
        p
        for p in primes
        if not any(q is not p and q.is_contained_in(p) for q in primes)
    ]


def maximal_prime(monoid):
    """The unique maximal ideal."""
    primes = mspec(monoid)
    tops = [
        p
        for p in primes
        if not any(q is not p and p.is_contained_in(q) for q in primes)
    ]
    assert len(tops) == 1, "a nonzero pointed monoid has a unique maximal ideal"
    return tops[0]


def prime_preimage(matrix, source, target, prime_of_target):
    """The prime of `source` obtained by pulling back along v -> matrix@v."""
    from .lattice import mat_vec

    face = _face_tester(target, prime_of_target.face_indices)
    on_face = frozenset(
        i
        for i, g in enumerate(source.gens)
        if face(mat_vec(matrix, g)) and not target.in_ideal(mat_vec(matrix, g))
    )
    for p in mspec(source):
        if p.face_indices == on_face:
            return p
    raise ValueError("preimage of a prime is not a prime; map is not a monoid map")
