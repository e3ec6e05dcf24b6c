"""Level subgroups of the universal ordinary distribution.

A level modulus m over an imaginary quadratic field determines a finite
presentation: one generator for each pair (n, sigma) with n | m and
sigma in the ray class group G_n, and one relation for every
symbol-elimination step between a divisor level and a higher one.  This
module builds that presentation, the integral transform that kills all
relations, the torsion of the level quotient (computed two independent
ways), the annihilation and order bounds for that torsion, the parity
functional on three-prime levels, and the explicit certificate element
whose odd parity value exhibits nonzero 2-torsion for suitable prime
triples.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .groupring import NotCoprimeToW, alpha, trace_ideal_quotient
from .quadfield import Modulus, OIdeal, QuadField, _is_prime
from .rayclass import (
    FrameUnavailable,
    RayClassGroup,
    Subgroup,
    galois_over_h,
    ray_class_group,
)
from .zlinalg import (
    AbGroup,
    IntMatrix,
    LinalgError,
    OrdistError,
    _RANK_PRIMES,
    cokernel,
    modular_rank,
    rational_kernel,
    row_saturation,
    subquotient_torsion,
)


class WrongShape(OrdistError):
    pass


class OracleMismatch(OrdistError):
    pass


class HypothesisFailed(OrdistError):
    pass


# cell count of the transform above which the kernel is taken from the
# certified saturation identity instead of a direct integer echelon
_DIRECT_KERNEL_CELLS = 50_000


class DeltaPresentation:
    """Presentation of the level-m subgroup of the ordinary distribution.

    Generators are the pairs (n, sigma) with n | m and sigma in G_n,
    grouped in blocks, one block per divisor in graded order.  For every
    divisor pair u | u p^e | m and every sigma in G_u there is one
    relation row: +1 at (u, sigma), a -1 Frobenius twist at
    (u, sigma - artin(p)) when p does not divide u, and -1 at every
    preimage of sigma at the upper level.  Summing all preimages makes
    the rows independent of any lift choice.
    """

    def __init__(self, K: QuadField, m: Modulus):
        if m.field != K:
            raise OrdistError("modulus belongs to a different field")
        self.field = K
        self.modulus = m
        self.levels: tuple[Modulus, ...] = tuple(m.divisors())
        self.rays = {u.primes: ray_class_group(K, u) for u in self.levels}
        self._offset = {}
        self._pos = {}
        total = 0
        for u in self.levels:
            els = self.rays[u.primes].group.elements()
            self._offset[u.primes] = total
            self._pos[u.primes] = {e: i for i, e in enumerate(els)}
            total += len(els)
        self.n_gens = total
        self.gen_index = tuple(
            (u, e) for u in self.levels
            for e in self.rays[u.primes].group.elements())
        self.relations = self._relation_matrix()
        self._torsion = None
        self._transform = None
        self.transform_scale = None

    @property
    def m(self) -> Modulus:
        return self.modulus

    def ray(self, u: Modulus) -> RayClassGroup:
        return self.rays[u.primes]

    def offset(self, u: Modulus) -> int:
        """First generator index of the block for the divisor u."""
        return self._offset[u.primes]

    def column_of(self, u: Modulus, sigma) -> int:
        return self._offset[u.primes] + self._pos[u.primes][tuple(sigma)]

    def _relation_matrix(self) -> IntMatrix:
        rows = []
        for u in self.levels:
            Gu = self.ray(u)
            u_els = Gu.group.elements()
            for p, e_top in self.modulus.primes:
                vu = u.v_p(p)
                for e in range(1, e_top - vu + 1):
                    t = u.with_exponent(p, vu + e)
                    Gt = self.ray(t)
                    down = Gt.transition(u)
                    pre = {}
                    for tau in Gt.group.elements():
                        pre.setdefault(down.apply(tau), []).append(tau)
                    lam = Gu.artin(p) if vu == 0 else None
                    for sigma in u_els:
                        row = [0] * self.n_gens
                        row[self.column_of(u, sigma)] += 1
                        if lam is not None:
                            tw = Gu.group.add(sigma, Gu.group.neg(lam))
                            row[self.column_of(u, tw)] -= 1
                        for tau in pre[sigma]:
                            row[self.column_of(t, tau)] -= 1
                        rows.append(row)
        return IntMatrix.from_rows(rows, self.n_gens)


def build_presentation(K: QuadField, m: Modulus) -> DeltaPresentation:
    return DeltaPresentation(K, m)


def iwasawa_matrix(P: DeltaPresentation) -> IntMatrix:
    """Integral transform of the presentation, one column per generator.

    The column for (n, sigma) holds the coefficients of lift(sigma)
    times the level element a(n, m) inside Q[G_m]; rows follow the
    enumeration of G_m.  The sum-over-kernel factor of a(n, m) makes the
    column independent of the chosen lift.  Entries are stored times
    P.transform_scale, the least common denominator of the whole matrix;
    kernels, ranks and annihilation checks do not see the scaling.
    """
    if P._transform is not None:
        return P._transform
    G = P.ray(P.modulus)
    amb = G.group
    order = amb.order
    cols: list[list[Fraction]] = []
    for u in P.levels:
        au = alpha(u, P.modulus, G)
        down = G.transition(u)
        lift = {}
        for g in amb.elements():
            lift.setdefault(down.apply(g), g)
        for sigma in P.ray(u).group.elements():
            s = lift[sigma]
            col = [Fraction(0)] * order
            for el, cf in au.coeffs:
                col[amb.index_of(amb.add(el, s))] = cf
            cols.append(col)
    scale = 1
    for col in cols:
        for x in col:
            scale = math.lcm(scale, x.denominator)
    rows = [[int(cols[j][i] * scale) for j in range(P.n_gens)]
            for i in range(order)]
    P.transform_scale = scale
    P._transform = IntMatrix.from_rows(rows, P.n_gens)
    return P._transform


def _int64_or_object(mat: IntMatrix) -> np.ndarray:
    arr = np.empty((mat.rows, mat.cols), dtype=object)
    for i, r in enumerate(mat.entries):
        arr[i, :] = r
    try:
        small = arr.astype(np.int64)
    except OverflowError:
        return arr
    return small


def _annihilation_product(F: IntMatrix, rel: IntMatrix) -> bool:
    """Exact check F . r = 0 for every relation row r."""
    A = _int64_or_object(F)
    R = _int64_or_object(rel)
    if A.dtype == np.int64 and R.dtype == np.int64:
        bound = int(np.abs(A).max(initial=0)) * \
            int(np.abs(R).sum(axis=1).max(initial=0))
        if bound >= 1 << 62:
            A = A.astype(object)
            R = R.astype(object)
    prod = A @ R.T
    return not prod.any()


def _certified_kernel(P: DeltaPresentation, F: IntMatrix):
    """Kernel lattice of the transform without a large exact echelon.

    Three exact facts pin the kernel down: the transform annihilates
    every relation row; the relation rank equals columns minus the
    row count of the transform (from the cokernel rank identity checked
    by the caller); and a modular rank certificate shows the transform
    has full row rank, so its kernel dimension equals that relation
    rank.  Together these force ker(F) = saturation(relations), which
    is computed by exact Smith elimination on the sparse relation
    matrix.  If the modular certificate fails at every prime, fall back
    to the direct echelon.
    """
    if not _annihilation_product(F, P.relations):
        raise OracleMismatch("transform fails to annihilate a relation row")
    if all(modular_rank(F, p) < F.rows for p in _RANK_PRIMES):
        return rational_kernel(F)
    return row_saturation(P.relations)


def level_torsion(P: DeltaPresentation) -> AbGroup:
    """Torsion of the level quotient, computed two independent ways.

    Oracle (a) reads the invariant factors of the relation matrix off
    its cokernel.  Oracle (b) computes the kernel lattice of the
    transform and the subquotient by the relation lattice.  Any
    disagreement, rank defect, or annihilation failure raises
    OracleMismatch: the two paths share no linear algebra beyond the
    elimination core, so agreement is a real cross-check.
    """
    if P._torsion is not None:
        return P._torsion
    quot = cokernel(P.relations, P.n_gens)
    n_top = P.ray(P.modulus).group.order
    if quot.rank != n_top:
        raise OracleMismatch(
            f"presentation rank {quot.rank} != #G_m = {n_top}")
    F = iwasawa_matrix(P)
    if F.rows * F.cols <= _DIRECT_KERNEL_CELLS:
        if not _annihilation_product(F, P.relations):
            raise OracleMismatch(
                "transform fails to annihilate a relation row")
        kern = rational_kernel(F)
    else:
        kern = _certified_kernel(P, F)
    if len(kern) != P.n_gens - n_top:
        raise OracleMismatch(
            f"kernel rank {len(kern)} != {P.n_gens - n_top}")
    rel_rows = [list(r) for r in P.relations.entries if any(r)]
    try:
        sub = subquotient_torsion(kern, rel_rows)
    except LinalgError as exc:
        raise OracleMismatch(
            f"relation lattice escapes the transform kernel: {exc}")
    if sub.rank != 0 or sub.torsion != quot.torsion:
        raise OracleMismatch(
            f"oracle (a) torsion {quot.torsion} != oracle (b) "
            f"{sub.invariant_factors}")
    P._torsion = AbGroup(quot.torsion)
    return P._torsion


def torsion_bound(P: DeltaPresentation) -> tuple[int, int]:
    """(annihilation bound, order bound) for the level torsion.

    The annihilation bound is the product over all divisors u | m of
    the exponent z_u of the torsion of Z[G_u]/S(u); the exponent of the
    level torsion divides it.  The order bound is w^(a h) with
    a = 2^(k-1) - k for k the number of distinct primes of m (a = 0
    when k <= 1, covering torsion-free levels); the order of the level
    torsion divides it.  Both divisibilities are asserted against the
    computed torsion.  The modulus norm must be coprime to w.
    """
    m = P.modulus
    K = P.field
    if math.gcd(m.norm(), K.w_K) != 1:
        raise NotCoprimeToW(
            f"modulus norm {m.norm()} shares a factor with w = {K.w_K}")
    product_bound = 1
    for u in P.levels:
        _, z = trace_ideal_quotient(P.ray(u))
        product_bound *= z
    k = m.n_primes
    a = (1 << (k - 1)) - k if k else 0
    borne = K.w_K ** (a * K.h)
    tor = level_torsion(P)
    assert product_bound % tor.exponent == 0
    assert borne % tor.order == 0
    return product_bound, borne


def nu(P: DeltaPresentation, v) -> int:
    """Parity functional: coordinate sum over the full-support levels.

    Defined when m has exactly three distinct primes; a level counts
    exactly when all three divide it.  Every relation row has even
    value, while the certificate element has odd value; together these
    prevent the element from falling into the relation lattice.
    """
    m = P.modulus
    if m.n_primes != 3:
        raise WrongShape("the parity functional needs exactly three primes")
    v = list(v)
    if len(v) != P.n_gens:
        raise WrongShape(
            f"vector has {len(v)} coordinates, presentation has {P.n_gens}")
    total = 0
    for u in P.levels:
        if all(u.v_p(p) >= 1 for p, _ in m.primes):
            off = P.offset(u)
            total += sum(v[off:off + P.ray(u).group.order])
    return total


@dataclass(frozen=True)
class TorsionCertificate:
    """Evidence that the level torsion is nonzero.

    R is the certificate element in generator coordinates; in_kernel
    records that the transform annihilates it exactly; nu_R is the
    parity functional value (odd when the construction goes through);
    nu_parity_of_U is the verdict that the functional is even on every
    relation template, combining the numeric check on all presentation
    rows with the symbolic case analysis over arbitrary levels; the
    conclusion holds when all three parts do.
    """

    R: tuple[int, ...]
    in_kernel: bool
    nu_R: int
    nu_parity_of_U: bool
    conclusion: bool


def torsex_certificate(K: QuadField, p1: OIdeal, p2: OIdeal,
                       p3: OIdeal) -> TorsionCertificate:
    """Build and verify the explicit 2-torsion witness for m = p1 p2 p3.

    Hypotheses: w = 2 and the three primes are distinct, principal,
    with norms congruent to 3 mod 4 (so each inertia group has cyclic
    2-part of order exactly 2).  Writing t_i for the honest order-2
    inertia generators at the reordered primes (the last one is the
    ramification-compensating product of the first two), the identity

        2 s(G') a(m, m) = ((1 + t_1) + (1 + t_2) - t_1 (1 + t_3))
                          s(G') a(m, m)

    holds in the group ring, with G' the odd part of G_m.  Each bracket
    term lives over the level m/q_i and is divisible by 2 there: it is
    zero when the Artin image of q_i lands inside the image Phi_i of
    G', and otherwise equals s(G_{m/q_i}) - 2 lam^-1 s(Phi_i) whenever
    Phi_i has index 2, where the full trace dies under the transform.
    The halves assemble into x_i supported on the m/q_i blocks and
    R = s(G') + x_1 + x_2 + x_3 is annihilated by the transform, while
    nu(R) = #G' is odd.  An index above 2 (even class number) stops the
    halving step and raises HypothesisFailed.
    """
    primes = (p1, p2, p3)
    if K.w_K != 2:
        raise HypothesisFailed(f"w = {K.w_K} is not 2")
    for p in primes:
        if p.field != K:
            raise HypothesisFailed("prime belongs to a different field")
        if not p.is_prime():
            raise HypothesisFailed(f"ideal of norm {p.norm()} is not prime")
        if p.is_principal_generator() is None:
            raise HypothesisFailed(
                f"prime of norm {p.norm()} is not principal")
        if p.norm() % 4 != 3:
            raise HypothesisFailed(
                f"norm {p.norm()} is not 3 mod 4")
    if len({(p.content, p.a, p.b) for p in primes}) != 3:
        raise HypothesisFailed("the three primes must be distinct")
    m = Modulus(K, tuple((p, 1) for p in primes))
    P = build_presentation(K, m)
    G = P.ray(m)
    amb = G.group
    try:
        fr = galois_over_h(G, 2)
    except FrameUnavailable as exc:
        raise HypothesisFailed(f"no inertia frame at 2: {exc}")
    if fr.g != (2, 2, 2):
        raise HypothesisFailed(
            f"inertia 2-parts have orders {fr.g}, expected (2, 2, 2)")
    gens = list(fr.taus[:-1]) + [fr.j]
    assert all(amb.element_order(t) == 2 for t in gens)
    assert fr.j == amb.add(fr.taus[0], fr.taus[1])
    odd = Subgroup.whole(amb).prime_to(2)
    vec = [0] * P.n_gens
    for s in odd.elements:
        vec[P.column_of(m, s)] += 1
    # one halved bracket term per prime: (prime, generator, sign, twist)
    terms = ((fr.primes[0], gens[0], 1, None),
             (fr.primes[1], gens[1], 1, None),
             (fr.primes[2], gens[2], -1, gens[0]))
    for q, _t, sign, extra in terms:
        u = m.without(q)
        Gu = P.ray(u)
        push = G.transition(u)
        phi = {push.apply(x) for x in odd.elements}
        lam = Gu.artin(q)
        if tuple(lam) in phi:
            continue  # s(Phi)(1 - lam^-1) = 0, the whole term vanishes
        if Gu.group.order != 2 * len(phi):
            raise HypothesisFailed(
                f"odd-part image has index {Gu.group.order // len(phi)} "
                f"at level {u.label()}, halving needs index 2")
        shift = Gu.group.neg(lam)
        if extra is not None:
            shift = Gu.group.add(shift, push.apply(extra))
        for el in phi:
            vec[P.column_of(u, Gu.group.add(el, shift))] += sign
    F = iwasawa_matrix(P)
    A = _int64_or_object(F)
    r = A @ np.array(vec, dtype=A.dtype)
    in_kernel = not r.any()
    nu_R = nu(P, vec)
    assert nu_R == odd.order
    rows_even = all(nu(P, row) % 2 == 0 for row in P.relations.entries)
    norms = [q.norm() for q, _ in m.primes]
    # symbolic half of the parity lemma, instantiated with the concrete
    # numbers: at a full-support level a relation subtracts N(q)^e
    # preimages (odd, since every q dividing such a level is one of the
    # three and has odd norm) from a single marked generator, or
    # N(q)^(e-1) (N(q) - 1) preimages (even) when q completes the
    # support, the unit-image count being 2 on both sides because both
    # norms exceed 2; a twist pair (1 - lam^-1) sits inside one level
    # and cancels; levels whose support is not exactly the triple never
    # meet the functional.
    symbolic = (K.w_K == 2
                and all(n % 2 == 1 for n in norms)
                and all(x * y > 2 for x, y in
                        itertools.combinations(norms, 2)))
    nu_parity = rows_even and symbolic
    conclusion = bool(in_kernel and nu_R % 2 == 1 and nu_parity)
    return TorsionCertificate(tuple(vec), bool(in_kernel), nu_R,
                              nu_parity, conclusion)


def search_torsex(K: QuadField, norm_bound: int):
    """All certificate-admissible prime triples with norms up to a bound.

    Keeps the prime ideals that are principal with norm congruent to
    3 mod 4 (inert primes never qualify: square norms are 0 or 1 mod 4)
    and returns every 3-subset with pairwise distinct residue
    characteristics, in enumeration order.
    """
    if K.w_K != 2:
        raise HypothesisFailed(f"w = {K.w_K} is not 2")
    found = []
    for q in range(2, norm_bound + 1):
        if not _is_prime(q):
            continue
        kind, ids = K.splitting_type(q)
        if kind == "inert":
            continue
        for pid in ids:
            if pid.norm() <= norm_bound and pid.norm() % 4 == 3 \
                    and pid.is_principal_generator() is not None:
                found.append(pid)
    triples = []
    for trio in itertools.combinations(found, 3):
        if len({p.rational_prime() for p in trio}) == 3:
            triples.append(trio)
    return triples
