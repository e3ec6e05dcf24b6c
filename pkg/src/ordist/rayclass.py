"""Ray class groups with Artin maps, inertia and Frobenius data.

G_n is presented on the invariant-factor generators of (O_K/n)^x
together with a greedy set of small prime ideals generating the class
group.  Relations come from three sources: the unit-group invariant
orders, the image of the roots of unity (the map (O/n)^x -> G_n kills
exactly mu_K), and one row per generator of the kernel of
Z^{class primes} -> Cl, where the corresponding principal product ideal
has its actual generator recovered and its residue discrete-logged.
The extension 1 -> (O/n)^x / mu -> G_n -> Cl -> 1 is therefore glued
from real principal generators and is never assumed split.

Artin images of coprime ideals are computed by the same mechanism:
divide the ideal by a product of class primes to reach a principal
ideal, recover the generator, and read off its residue.

The tau-frame decomposes Gamma = ker(G_m -> G_(1)) into the prime-to-l
part and the l-Sylow G_l, writes G_l as an internal direct product of
the inertia l-Sylows for all primes but the last, and solves for a last
frame element whose order drops by the l-part of w_K.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

from .quadfield import (
    Modulus,
    OIdeal,
    QuadField,
    _is_prime,
    _residue_reduce,
    residue_units,
)
from .zlinalg import (
    AbGroup,
    AbHom,
    IntMatrix,
    OrdistError,
    ab_discover,
    hnf,
    rational_kernel,
    snf,
    solve_left,
)


class NotDivisor(OrdistError):
    pass


class NotCoprime(OrdistError):
    pass


class PrimeNotInModulus(OrdistError):
    pass


class FrameUnavailable(OrdistError):
    pass


# ---------------------------------------------------------------------------
# subgroups of a finite abelian group, carried as explicit element sets

@dataclass(frozen=True)
class Subgroup:
    ambient: AbGroup
    elements: tuple[tuple[int, ...], ...]

    @staticmethod
    def generated(ambient: AbGroup, gens) -> "Subgroup":
        zero = ambient.zero()
        closure = {zero}
        frontier = [zero]
        gens = [ambient.reduce(g) for g in gens]
        while frontier:
            nxt = []
            for e in frontier:
                for g in gens:
                    f = ambient.add(e, g)
                    if f not in closure:
                        closure.add(f)
                        nxt.append(f)
            frontier = nxt
        return Subgroup(ambient, tuple(sorted(closure)))

    @staticmethod
    def whole(ambient: AbGroup) -> "Subgroup":
        return Subgroup(ambient, tuple(sorted(ambient.elements())))

    @property
    def order(self) -> int:
        return len(self.elements)

    def contains(self, x) -> bool:
        return self.ambient.reduce(x) in self._element_set()

    def _element_set(self):
        return _subgroup_set(self)

    def scaled(self, k: int) -> "Subgroup":
        return Subgroup(self.ambient,
                        tuple(sorted({self.ambient.scale(x, k)
                                      for x in self.elements})))

    def sylow(self, ell: int) -> "Subgroup":
        n = self.order
        while n % ell == 0:
            n //= ell
        return self.scaled(n)  # multiplication by the prime-to-ell part

    def prime_to(self, ell: int) -> "Subgroup":
        n = self.order
        la = 1
        while n % ell == 0:
            n //= ell
            la *= ell
        return self.scaled(la)

    def product(self, other: "Subgroup") -> "Subgroup":
        els = {self.ambient.add(x, y)
               for x in self.elements for y in other.elements}
        return Subgroup(self.ambient, tuple(sorted(els)))

    def intersection(self, other: "Subgroup") -> "Subgroup":
        els = self._element_set() & other._element_set()
        return Subgroup(self.ambient, tuple(sorted(els)))

    def as_group(self):
        """(AbGroup, to_sub, reps): abstract structure, a dict mapping
        every element to its coordinates, and representatives of the
        abstract invariant basis."""
        return _subgroup_structure(self)

    def invariant_factors(self) -> tuple[int, ...]:
        return self.as_group()[0].invariant_factors


@lru_cache(maxsize=None)
def _subgroup_set(sub: Subgroup):
    return frozenset(sub.elements)


@lru_cache(maxsize=None)
def _subgroup_structure(sub: Subgroup):
    amb = sub.ambient
    zero = amb.zero()
    # greedy generator harvest before ab_discover, to keep BFS cheap
    gens = []
    closure = {zero}
    for x in sub.elements:
        if x in closure:
            continue
        gens.append(x)
        closure = {zero}
        frontier = [zero]
        while frontier:
            nxt = []
            for e in frontier:
                for g in gens:
                    f = amb.add(e, g)
                    if f not in closure:
                        closure.add(f)
                        nxt.append(f)
            frontier = nxt
        if len(closure) == sub.order:
            break
    group, dlog = ab_discover(sub.order, amb.add, gens, identity=zero)
    reps = []
    k = len(group.invariant_factors)
    want = {tuple(1 if i == j else 0 for j in range(k)): None for i in range(k)}
    for el, co in dlog.items():
        if co in want and want[co] is None:
            want[co] = el
    reps = [want[tuple(1 if i == j else 0 for j in range(k))] for i in range(k)]
    return group, dlog, reps


# ---------------------------------------------------------------------------
# the ray class group

class RayClassGroup:
    """G_n presented on unit-group and class-prime generators."""

    def __init__(self, K: QuadField, n: Modulus):
        if n.field != K:
            raise OrdistError("modulus belongs to a different field")
        self.field = K
        self.modulus = n
        self.unit_group, self.unit_dlog, self.mu_images = residue_units(K, n)
        self._n_ideal = n.ideal()
        self.class_primes = self._pick_class_primes()
        t = len(self.unit_group.invariant_factors)
        s = len(self.class_primes)
        self._t, self._s = t, s
        rows, ext = self._relation_rows()
        self.ext_data = ext
        diag, _, R = snf(IntMatrix.from_rows(rows, t + s)
                         if rows else IntMatrix.zeros(0, t + s))
        if len(diag) != t + s:
            raise OrdistError("ray class presentation is not finite")
        self._diag = diag
        self._R = R.entries
        Hinv, U = hnf(R)
        assert Hinv == IntMatrix.identity(t + s)
        self._R_inv = U.entries
        kept = [i for i, d in enumerate(diag) if d > 1]
        self._kept = kept
        self.group = AbGroup(tuple(diag[i] for i in kept))
        expected = (K.h if n.is_one()
                    else K.h * n.phi() // len(set(self.mu_images)))
        if self.group.order != expected:
            raise OrdistError(
                f"order {self.group.order} != exact-sequence value {expected}")
        self._unit_reps = self._unit_basis_reps()
        self._artin_cache: dict = {}
        self._transition_cache: dict = {}
        self._inertia_cache: dict = {}
        self.artin_table: dict = {}

    # -- presentation plumbing --

    def _pick_class_primes(self):
        K = self.field
        cl = K.class_group
        if cl.is_trivial:
            return ()
        chosen = []
        sub = Subgroup.generated(cl, [])
        p = 1
        while sub.order != cl.order:
            p += 1
            while not _is_prime(p):
                p += 1
            kind, ids = K.splitting_type(p)
            if kind == "inert":
                continue
            for P in ids:
                if not P.is_coprime(self._n_ideal):
                    continue
                c = K.ideal_class(P)
                if not sub.contains(c):
                    chosen.append(P)
                    sub = Subgroup.generated(cl, [K.ideal_class(q)
                                                  for q in chosen])
                if sub.order == cl.order:
                    break
        return tuple(chosen)

    def _principal_word(self, exps):
        """dlog of the residue of a generator of prod q_j^exps (exps >= 0,
        the product must be principal)."""
        K = self.field
        I = K.unit_ideal()
        for q, e in zip(self.class_primes, exps):
            I = I.multiply(q.pow(e))
        g = I.is_principal_generator()
        assert g is not None
        return self._residue_word(g)

    def _residue_word(self, half_coords):
        """Unit-group dlog of an element given in (x + y sqrt D)/2 form."""
        K = self.field
        x, y = half_coords
        v = K.disc & 1
        assert (x - v * y) % 2 == 0
        u = ((x - v * y) // 2, y)
        return self._unit_dlog_of(u)

    def _unit_dlog_of(self, u):
        r = _residue_reduce(self._n_ideal, u)
        if r not in self.unit_dlog:
            raise NotCoprime("element is not a unit modulo n")
        return self.unit_dlog[r]

    def _relation_rows(self):
        t, s = self._t, self._s
        rows = []
        for i, d in enumerate(self.unit_group.invariant_factors):
            rows.append([d if j == i else 0 for j in range(t + s)])
        if self.field.w_K > 1 and len(self.mu_images) > 1:
            z = self.mu_images[1]
            if any(z):
                rows.append(list(z) + [0] * s)
        ext = {}
        if s:
            cl = self.field.class_group
            inv = cl.invariant_factors
            C = [self.field.ideal_class(q) for q in self.class_primes]
            orders = [cl.element_order(c) for c in C]
            # kernel of Z^s -> Cl: basis rows shifted into the nonnegative
            # fundamental box, plus the per-generator order rows; together
            # these generate the full kernel lattice
            stacked = [list(c) for c in C] + \
                [[m if j == i else 0 for j in range(len(inv))]
                 for i, m in enumerate(inv)]
            ker = rational_kernel(IntMatrix.from_rows(
                [[row[i] for row in stacked] for i in range(len(inv))],
                len(stacked)))
            vrows = {tuple(x % o for x, o in zip(v[:s], orders)) for v in ker}
            vrows.discard(tuple([0] * s))
            for v in sorted(vrows):
                w = self._principal_word(v)
                rows.append([-x for x in w] + list(v))
            for i, o in enumerate(orders):
                use = [o if j == i else 0 for j in range(s)]
                w = self._principal_word(use)
                ext[i] = w
                rows.append([-x for x in w] + use)
        return rows, ext

    def _unit_basis_reps(self):
        t = self._t
        want = {tuple(1 if i == j else 0 for j in range(t)): None
                for i in range(t)}
        for res, co in self.unit_dlog.items():
            if co in want and want[co] is None:
                want[co] = res
        return [want[tuple(1 if i == j else 0 for j in range(t))]
                for i in range(t)]

    # -- coordinates --

    def word_to_coords(self, word) -> tuple[int, ...]:
        k = self._t + self._s
        full = [sum(word[i] * self._R[i][j] for i in range(k) if word[i])
                for j in range(k)]
        return tuple(full[i] % self._diag[i] for i in self._kept)

    def coords_to_word(self, coords) -> list[int]:
        k = self._t + self._s
        full = [0] * k
        for pos, i in enumerate(self._kept):
            full[i] = coords[pos]
        return [sum(full[i] * self._R_inv[i][j] for i in range(k))
                for j in range(k)]

    # -- the Artin map --

    def artin(self, a: OIdeal) -> tuple[int, ...]:
        key = (a.content, a.a, a.b)
        if key in self._artin_cache:
            return self._artin_cache[key]
        K = self.field
        if a.field != K:
            raise OrdistError("ideal from a different field")
        if not a.is_coprime(self._n_ideal):
            raise NotCoprime(f"{a} is not coprime to the modulus")
        s = self._s
        if s == 0:
            g = a.is_principal_generator()
            assert g is not None
            word = list(self._residue_word(g))
        else:
            cl = K.class_group
            C = [K.ideal_class(q) for q in self.class_primes]
            orders = [cl.element_order(c) for c in C]
            target = K.ideal_class(a)
            inv = cl.invariant_factors
            stacked = [list(c) for c in C] + \
                [[m if j == i else 0 for j in range(len(inv))]
                 for i, m in enumerate(inv)]
            sol = solve_left(IntMatrix.from_rows(stacked, len(inv)),
                             list(target))
            assert sol is not None
            x = [sol[i] % orders[i] for i in range(s)]
            z = [(-xi) % o for xi, o in zip(x, orders)]
            # a*B and J*B are principal for J = prod q^x, B = prod q^z
            B = K.unit_ideal()
            for q, e in zip(self.class_primes, z):
                B = B.multiply(q.pow(e))
            g1 = a.multiply(B).is_principal_generator()
            assert g1 is not None
            w1 = self._residue_word(g1)
            JB = K.unit_ideal()
            for q, e1, e2 in zip(self.class_primes, x, z):
                JB = JB.multiply(q.pow(e1 + e2))
            g2 = JB.is_principal_generator()
            assert g2 is not None
            w2 = self._residue_word(g2)
            word = [u - v for u, v in zip(w1, w2)] + x
        out = self.word_to_coords(word)
        self._artin_cache[key] = out
        if a.is_prime() and a.norm() < 100:
            self.artin_table[key] = out
        return out

    # -- transitions, inertia, Frobenius --

    def transition(self, n2: Modulus) -> AbHom:
        key = n2.primes
        if key in self._transition_cache:
            return self._transition_cache[key]
        if not n2.divides(self.modulus):
            raise NotDivisor("target modulus does not divide the source")
        target = ray_class_group(self.field, n2)
        imgs = []
        for rep in self._unit_reps:
            w = list(target._unit_dlog_of(rep)) + [0] * target._s
            imgs.append(target.word_to_coords(w))
        for q in self.class_primes:
            imgs.append(target.artin(q))
        rows = []
        k = self._t + self._s
        for irow in range(len(self._kept)):
            word = self.coords_to_word(
                tuple(1 if pos == irow else 0
                      for pos in range(len(self._kept))))
            acc = [0] * len(target.group.invariant_factors)
            for i in range(k):
                if word[i]:
                    for jj, val in enumerate(imgs[i]):
                        acc[jj] += word[i] * val
            rows.append(target.group.reduce(tuple(acc)))
        hom = AbHom(self.group, target.group, tuple(rows))
        img = Subgroup.generated(target.group, rows)
        assert img.order == target.group.order, "transition must be onto"
        self._transition_cache[key] = hom
        return hom

    def level_kernel(self, u: Modulus) -> Subgroup:
        """ker(G_n -> G_u) for a divisor modulus u."""
        key = u.primes
        if key in self._inertia_cache:
            return self._inertia_cache[key]
        hom = self.transition(u)
        zero = hom.codomain.zero()
        els = [x for x in self.group.elements() if hom.apply(x) == zero]
        sub = Subgroup(self.group, tuple(sorted(els)))
        assert sub.order * hom.codomain.order == self.group.order
        self._inertia_cache[key] = sub
        return sub

    def inertia(self, p: OIdeal) -> Subgroup:
        if self.modulus.v_p(p) == 0:
            raise PrimeNotInModulus(f"{p} does not divide the modulus")
        return self.level_kernel(self.modulus.without(p))

    def frobenius(self, p: OIdeal) -> tuple[tuple[int, ...], bool]:
        """(representative, exact): exact Artin image for p coprime to n,
        else a lift of the Frobenius of G_{n/p^v}, well defined mod T_p."""
        if self.modulus.v_p(p) == 0:
            return self.artin(p), True
        n2 = self.modulus.without(p)
        target = ray_class_group(self.field, n2)
        hom = self.transition(n2)
        lam = target.artin(p)
        rows = [list(r) for r in hom.matrix] + \
            [[m if j == i else 0
              for j in range(len(target.group.invariant_factors))]
             for i, m in enumerate(target.group.invariant_factors)]
        sol = solve_left(IntMatrix.from_rows(
            rows, len(target.group.invariant_factors)), list(lam))
        assert sol is not None
        lift = self.group.reduce(tuple(sol[:len(self.group.invariant_factors)]))
        assert hom.apply(lift) == lam
        return lift, False

    def gamma(self) -> Subgroup:
        """ker(G_m -> G_(1)) as a subgroup."""
        return self.level_kernel(Modulus.one(self.field))


_RAY_CACHE: dict = {}


def ray_class_group(K: QuadField, n: Modulus) -> RayClassGroup:
    key = (K.d, tuple((p.content, p.a, p.b, e) for p, e in n.primes))
    if key not in _RAY_CACHE:
        _RAY_CACHE[key] = RayClassGroup(K, n)
    return _RAY_CACHE[key]


# ---------------------------------------------------------------------------
# the tau-frame over the Hilbert class field

@dataclass(frozen=True)
class GaloisOverH:
    ray: RayClassGroup
    ell: int
    r: int
    primes: tuple[OIdeal, ...]
    gamma: Subgroup
    g_prime: Subgroup
    g_ell: Subgroup
    inertia_ell: tuple[Subgroup, ...]
    g: tuple[int, ...]
    taus: tuple[tuple[int, ...], ...]
    j: tuple[int, ...]


def galois_over_h(G_m: RayClassGroup, ell: int) -> GaloisOverH:
    if not _is_prime(ell):
        raise OrdistError(f"{ell} is not prime")
    K = G_m.field
    gamma = G_m.gamma()
    g_ell = gamma.sylow(ell)
    g_prime = gamma.prime_to(ell)
    r = 0
    w = K.w_K
    while w % ell == 0:
        w //= ell
        r += 1
    mod_primes = [p for p, _ in G_m.modulus.primes]
    syls = {}
    gs = {}
    for p in mod_primes:
        t = G_m.inertia(p).sylow(ell)
        syls[p] = t
        gs[p] = t.order
    # put one prime of minimal l-inertia order last (latest such index)
    order = list(mod_primes)
    gmin = min(gs[p] for p in order) if order else 1
    last = max(i for i, p in enumerate(order) if gs[p] == gmin) if order else None
    if order:
        order.append(order.pop(last))
    m = len(order)
    taus = []
    amb = G_m.group
    span = Subgroup.generated(amb, [])
    for p in order[:-1] if m else []:
        grp, _, reps = syls[p].as_group()
        if len(grp.invariant_factors) > 1:
            raise FrameUnavailable(f"inertia l-Sylow at {p} is not cyclic")
        tau = reps[0] if reps else amb.zero()
        taus.append(tau)
        new = span.product(Subgroup.generated(amb, [tau]))
        if new.order != span.order * gs[p]:
            raise FrameUnavailable(
                "inertia l-Sylows are not independent below the last prime")
        span = new
    if m:
        p_last = order[-1]
        g_last = gs[p_last]
        if r and g_last % ell ** r:
            raise FrameUnavailable(
                f"l^r = {ell ** r} does not divide g_m = {g_last}")
        q = g_last // ell ** r
        tau_m = None
        for x in g_ell.elements:
            if amb.element_order(x) != q:
                continue
            cyc = Subgroup.generated(amb, [x])
            if cyc.intersection(span).order == 1 and \
                    span.product(cyc).order == g_ell.order:
                tau_m = x
                break
        if tau_m is None:
            raise FrameUnavailable("no complement generator for the last prime")
        taus.append(tau_m)
        jj = amb.zero()
        for tau, p in zip(taus, order):
            jj = amb.add(jj, amb.scale(tau, gs[p] // g_last))
        j = jj
        if m >= 2:
            # with at least two primes the ramification-compensating
            # element recovers the full inertia l-Sylow at the last prime
            assert amb.element_order(j) == g_last
            assert Subgroup.generated(amb, [j])._element_set() == \
                syls[p_last]._element_set()
    else:
        j = amb.zero()
    return GaloisOverH(
        ray=G_m, ell=ell, r=r, primes=tuple(order), gamma=gamma,
        g_prime=g_prime, g_ell=g_ell,
        inertia_ell=tuple(syls[p] for p in order),
        g=tuple(gs[p] for p in order), taus=tuple(taus), j=j)
