"""Multilinear algebra over a coefficient algebra.

Exterior and tensor powers of a based free module, wedge products, the
normalized shuffle splitting W_{p,q}, translation operators, left/right
contractions, the census of sign conventions that make twisted contraction
a module action, the two duality isomorphisms, and Koszul complexes.

Basis conventions: Lambda^p has basis e_K for strictly increasing index
tuples K, ordered lexicographically; all signs are relative to this order.
Dual bases pair by det: <f_K, e_L> = delta_{KL}.  Contractions of higher
degree into lower degree return zero.

Of the four sign conventions admitted by the census, the trivial one
(chi = 1) is the convention used by every other module of this package;
the other three are exposed for inspection only.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations, permutations, product
from math import factorial

from .chain_core import CochainComplex, ComplexMap, hom_complex, single_module_complex, tensor_module
from .coeff import CoeffAlgebra, Poly
from .modules import BasedModule, LinMap, StructuralError
from . import rational as ql


def perm_sign(seq):
    """Sign of the permutation sorting seq; None if entries repeat."""
    seq = list(seq)
    if len(set(seq)) != len(seq):
        return None
    sign = 1
    for i in range(len(seq)):
        for j in range(i + 1, len(seq)):
            if seq[i] > seq[j]:
                sign = -sign
    return sign


def merge_wedge(K, L):
    """(sign, sorted tuple) with e_K ^ e_L = sign * e_{K u L}; None if they meet."""
    s = perm_sign(tuple(K) + tuple(L))
    if s is None:
        return None
    return s, tuple(sorted(tuple(K) + tuple(L)))


def split_sign(J, K):
    """Sign with e_J ^ e_K = sign * e_{sorted(J u K)} for disjoint J, K."""
    m = merge_wedge(J, K)
    return None if m is None else m[0]


class ExteriorContext:
    """Exterior and tensor powers of a rank-s free module E and its dual."""

    def __init__(self, algebra, rank, name="E"):
        self.algebra = algebra
        self.rank = rank
        self.name = name
        self._ext = {}
        self._tens = {}

    def ext(self, p, dual=False):
        """Lambda^p of E (or of E*)."""
        key = (p, dual)
        if key not in self._ext:
            nm = f"L^{p}({self.name}{'*' if dual else ''})"
            labels = tuple(combinations(range(self.rank), p)) if 0 <= p <= self.rank else ()
            self._ext[key] = BasedModule(self.algebra, labels, nm, tuple(p for _ in labels))
        return self._ext[key]

    def tens(self, p, dual=False):
        key = (p, dual)
        if key not in self._tens:
            nm = f"T^{p}({self.name}{'*' if dual else ''})"
            labels = tuple(product(range(self.rank), repeat=p))
            self._tens[key] = BasedModule(self.algebra, labels, nm, tuple(p for _ in labels))
        return self._tens[key]

    def degree_of(self, vec):
        if vec.module.labels:
            return len(vec.module.labels[0])
        return vec.module.grades[0] if vec.module.grades else 0

    def _side(self, vec):
        return vec.module.name.endswith("*)")

    def wedge(self, x, y):
        """x ^ y; bilinear, alternating, graded commutative."""
        if x.module.algebra != y.module.algebra:
            raise StructuralError("wedge over different coefficient algebras")
        dual = self._side(x)
        if dual != self._side(y):
            raise StructuralError("wedge of elements from different home modules")
        p = len(x.module.labels[0]) if x.module.labels else 0
        q = len(y.module.labels[0]) if y.module.labels else 0
        out = self.ext(p + q, dual).zero()
        if p + q > self.rank:
            return out  # Lambda^{p+q} = 0 beyond the rank
        for K, a in x.data.items():
            for L, b in y.data.items():
                m = merge_wedge(K, L)
                if m is None:
                    continue
                s, KL = m
                out = out + self.ext(p + q, dual).basis_vec(KL, a * b * s)
        return out

    def wedge_many(self, vecs, dual=False):
        out = self.ext(0, dual).basis_vec(())
        for v in vecs:
            out = self.wedge(out, v)
        return out

    # -- (anti)symmetrization and shuffles -----------------------------

    def antisymmetrize(self, t):
        """a_n: v_1 x ... x v_n  |->  v_1 ^ ... ^ v_n, extended linearly."""
        n = len(t.module.labels[0]) if t.module.labels else 0
        dual = self._side(t)
        out = self.ext(n, dual).zero()
        for T, c in t.data.items():
            s = perm_sign(T)
            if s is None:
                continue
            out = out + self.ext(n, dual).basis_vec(tuple(sorted(T)), c * s)
        return out

    def symmetrize(self, x):
        """s_n: the (1/n!)-weighted signed sum over all permutations."""
        n = len(x.module.labels[0]) if x.module.labels else 0
        dual = self._side(x)
        w = Fraction(1, factorial(n))
        out = self.tens(n, dual).zero()
        for K, c in x.data.items():
            for sigma in permutations(range(n)):
                s = perm_sign(sigma)
                T = tuple(K[sigma[i]] for i in range(n))
                out = out + self.tens(n, dual).basis_vec(T, c * s * w)
        return out

    def ext_pair_module(self, p, q, dual=False):
        return tensor_module(self.ext(p, dual), self.ext(q, dual))

    def shuffle_W(self, p, q, x):
        """W_{p,q}: the normalized shuffle splitting of Lambda^{p+q}."""
        dual = self._side(x)
        tgt = self.ext_pair_module(p, q, dual)
        w = Fraction(factorial(p) * factorial(q), factorial(p + q))
        out = tgt.zero()
        for S, c in x.data.items():
            if len(S) != p + q:
                raise StructuralError("shuffle degree mismatch")
            for K in combinations(S, p):
                L = tuple(i for i in S if i not in K)
                s = perm_sign(K + L)
                out = out + tgt.basis_vec((K, L), c * s * w)
        return out

    def translate(self, k, p, m, phi):
        """t^m_{k,p}(phi) = wedge o (phi x id) o W_{p,m}."""
        if phi.source != self.ext(p) or phi.target != self.ext(k):
            raise StructuralError("translate: phi must map Lambda^p E -> Lambda^k E")
        if self.rank < max(p + m, k + m):
            raise StructuralError("translate: rank too small")
        src = self.ext(p + m)
        tgt = self.ext(k + m)

        def fn(v):
            w = self.shuffle_W(p, m, v)
            out = tgt.zero()
            for (K, L), c in w.data.items():
                img = phi.apply(self.ext(p).basis_vec(K, c))
                out = out + self.wedge(img, self.ext(m).basis_vec(L))
            return out

        return LinMap.from_function(src, tgt, fn)

    # -- contractions ---------------------------------------------------

    def contract_left(self, v, phi):
        """(v -| phi)(x) = phi(x ^ v); left module action of Lambda E on Lambda E*."""
        if self._side(v) or not self._side(phi):
            raise StructuralError("contract_left takes (element of Lambda E, element of Lambda E*)")
        p = self.degree_of(v)
        q = self.degree_of(phi)
        if p > q:
            return self.ext(0, dual=True).zero()
        tgt = self.ext(q - p, dual=True)
        out = tgt.zero()
        for K, a in v.data.items():
            for M, b in phi.data.items():
                if not set(K) <= set(M):
                    continue
                J = tuple(i for i in M if i not in K)
                s = split_sign(J, K)
                out = out + tgt.basis_vec(J, a * b * s)
        return out

    def contract_right(self, phi, v):
        """(phi |- v)(x) = phi(v ^ x); right module action."""
        if self._side(v) or not self._side(phi):
            raise StructuralError("contract_right takes (element of Lambda E*, element of Lambda E)")
        p = self.degree_of(v)
        q = self.degree_of(phi)
        if p > q:
            return self.ext(0, dual=True).zero()
        tgt = self.ext(q - p, dual=True)
        out = tgt.zero()
        for K, a in v.data.items():
            for M, b in phi.data.items():
                if not set(K) <= set(M):
                    continue
                J = tuple(i for i in M if i not in K)
                s = split_sign(K, J)
                out = out + tgt.basis_vec(J, a * b * s)
        return out

    # -- dualities ------------------------------------------------------

    def duality_left(self, p):
        """D^l: Lambda^p E (x) det E* -> Lambda^{r-p} E*, v (x) xi |-> v -| xi."""
        src = tensor_module(self.ext(p), self.ext(self.rank, dual=True))
        tgt = self.ext(self.rank - p, dual=True)

        def fn(w):
            out = tgt.zero()
            for (K, M), c in w.data.items():
                img = self.contract_left(
                    self.ext(p).basis_vec(K, c), self.ext(self.rank, dual=True).basis_vec(M)
                )
                out = out + img
            return out

        return LinMap.from_function(src, tgt, fn)

    def duality_right(self, p):
        """D^r: Lambda^p E (x) det E* -> Lambda^{r-p} E*, v (x) xi |-> xi |- v."""
        src = tensor_module(self.ext(p), self.ext(self.rank, dual=True))
        tgt = self.ext(self.rank - p, dual=True)

        def fn(w):
            out = tgt.zero()
            for (K, M), c in w.data.items():
                img = self.contract_right(
                    self.ext(self.rank, dual=True).basis_vec(M), self.ext(p).basis_vec(K, c)
                )
                out = out + img
            return out

        return LinMap.from_function(src, tgt, fn)


# -- sign function census -------------------------------------------------


@dataclass(frozen=True)
class SignFunction:
    """Total map Delta_r = {(i, j): i + j <= r} -> {+1, -1}."""

    r: int
    values: tuple

    @classmethod
    def from_callable(cls, r, fn):
        domain = domain_pairs(r)
        return cls(r, tuple(fn(i, j) for (i, j) in domain))

    def __call__(self, i, j):
        return self.values[_pair_index(self.r, i, j)]


def domain_pairs(r):
    return [(i, j) for i in range(r + 1) for j in range(r + 1 - i)]


def _pair_index(r, i, j):
    # row lengths r+1, r, ..., 1
    if i < 0 or j < 0 or i + j > r:
        raise IndexError(f"({i},{j}) outside Delta_{r}")
    return sum(r + 1 - t for t in range(i)) + j


def four_standard_sign_functions(r):
    """The four conventions under which twisted contraction is an action."""
    return [
        SignFunction.from_callable(r, lambda p, q: 1),
        SignFunction.from_callable(r, lambda p, q: (-1) ** p),
        SignFunction.from_callable(r, lambda p, q: (-1) ** (p * (p + 1) // 2 + p * q)),
        SignFunction.from_callable(r, lambda p, q: (-1) ** (p * (p + 1) // 2 + p * q + p)),
    ]


def _action_constraints(r, side):
    """Constraints from evaluating the twisted action on all basis triples.

    Returns unit constraints [(i, j)] (value forced to +1) and triple
    constraints [((a), (b), (c))] meaning chi(a) = chi(b) * chi(c), computed
    from the nonvanishing untwisted contractions of basis triples.
    """
    ctx = ExteriorContext(CoeffAlgebra.rationals(), r)
    units = [(0, t) for t in range(r + 1)]
    triples = set()
    for pv in range(r + 1):
        for pw in range(r + 1):
            if pv + pw > r:
                continue
            for q in range(r + 1):
                for K in combinations(range(r), pv):
                    v = ctx.ext(pv).basis_vec(K)
                    for L in combinations(range(r), pw):
                        w = ctx.ext(pw).basis_vec(L)
                        vw = ctx.wedge(v, w)
                        if vw.is_zero():
                            continue
                        for M in combinations(range(r), q):
                            phi = ctx.ext(q, dual=True).basis_vec(M)
                            if side == "left":
                                if ctx.contract_left(vw, phi).is_zero():
                                    continue
                                # chi(pv+pw, r-q) = chi(pw, r-q) chi(pv, r-q+pw)
                                triples.add(((pv + pw, r - q), (pw, r - q), (pv, r - q + pw)))
                            else:
                                if ctx.contract_right(phi, vw).is_zero():
                                    continue
                                # chi(pv+pw, r-q) = chi(pv, r-q) chi(pw, r-q+pv)
                                triples.add(((pv + pw, r - q), (pv, r - q), (pw, r - q + pv)))
    return units, sorted(triples)


_CONSTRAINT_CACHE = {}


def check_sign_action(chi, r, side, require_stability=True):
    """Does chi-twisted contraction define a module action on Lambda E*?

    Checks the unit axiom and associativity on all basis triples of the
    rank-r exterior algebra (exhaustive; r <= 4).

    With require_stability the table must in addition depend on the
    complementary degree only through its parity, i.e. define the *same*
    action along corank-two coordinate inclusions E'' < E (untwisted
    contraction restricts identically along these, so a convention -- as
    opposed to an ad-hoc table on one rank -- has no room to differ).
    On a single rank the associativity constraints alone underdetermine
    the table: at rank 3 they admit eight tables, of which exactly four
    are stable.
    """
    if r > 4:
        raise ValueError("exhaustive check capped at rank 4")
    if side not in ("left", "right"):
        raise ValueError("side must be 'left' or 'right'")
    key = (r, side)
    if key not in _CONSTRAINT_CACHE:
        _CONSTRAINT_CACHE[key] = _action_constraints(r, side)
    units, triples = _CONSTRAINT_CACHE[key]
    for u in units:
        if chi(*u) != 1:
            return False
    for a, b, c in triples:
        if chi(*a) != chi(*b) * chi(*c):
            return False
    if require_stability:
        for i in range(1, r + 1):
            for j in range(r + 1):
                if i + j + 2 <= r and chi(i, j) != chi(i, j + 2):
                    return False
    return True


def sign_census(r, side):
    """All sign functions on Delta_r passing check_sign_action for one side."""
    domain = domain_pairs(r)
    passing = []
    for bits in range(1 << len(domain)):
        values = tuple(1 if (bits >> k) & 1 == 0 else -1 for k in range(len(domain)))
        chi = SignFunction(r, values)
        if check_sign_action(chi, r, side):
            passing.append(chi)
    return passing


# -- Koszul complexes ------------------------------------------------------


def koszul_complex(ctx, phi_values):
    """Koszul complex L(M, phi): Lambda^p M in degree -p, differential

    delta_p(m_1 ^ ... ^ m_p) = sum_i (-1)^{i-1} phi(m_i) m_1 ^ ... ^ m_p
    (the i-th factor removed); equivalently right contraction by phi.
    """
    s = ctx.rank
    algebra = ctx.algebra
    phi_values = [v if isinstance(v, Poly) else algebra.const(v) for v in phi_values]
    if len(phi_values) != s:
        raise StructuralError("phi must assign a value to each basis vector")
    modules = {-p: ctx.ext(p) for p in range(s + 1)}
    diffs = {}
    for p in range(1, s + 1):
        d = LinMap(ctx.ext(p), ctx.ext(p - 1))
        for K in ctx.ext(p).labels:
            out = ctx.ext(p - 1).zero()
            for i, ki in enumerate(K):
                rest = K[:i] + K[i + 1 :]
                sgn = -1 if i % 2 else 1
                out = out + ctx.ext(p - 1).basis_vec(rest, phi_values[ki] * sgn)
            d.set_column(K, out)
        diffs[-p] = d
    return CochainComplex(algebra, modules, diffs)


def koszul_dual_form(ctx, phi_values):
    """phi as an element of Lambda^1 M* (for the dual-side wedge)."""
    m = ctx.ext(1, dual=True)
    out = m.zero()
    for k, v in enumerate(phi_values):
        out = out + m.basis_vec((k,), v)
    return out


def koszul_dual_check(ctx, phi_values):
    """Verify the right-duality isomorphism (L*, d*) = (L, -delta) (x) det M* [-r].

    Builds Hom(L, A) with the standard Hom sign convention, the complex with
    terms Lambda^{r-n} M (x) det M* and differential (-delta) (x) id, and the
    degreewise map (-1)^{(r+1)n} (v (x) xi |-> xi |- v); checks it is a chain
    map with invertible components.  Returns (ok, details).

    The per-degree sign is the canonical bookkeeping for commuting the
    [-r] shift past the tensor factor; it is trivial for odd r.  Together
    with d* = -( . ^ phi) on the Hom side (itself a consequence of the
    Hom-complex convention, see tests) this pins all sign conventions of
    this package against each other.
    """
    r = ctx.rank
    algebra = ctx.algebra
    L = koszul_complex(ctx, phi_values)
    A_cplx = single_module_complex(algebra, BasedModule(algebra, ((),), "A"), 0)
    Lstar = hom_complex(L, A_cplx)
    det_dual = ctx.ext(r, dual=True)
    modules = {}
    diffs = {}
    for n in range(r + 1):
        modules[n] = tensor_module(ctx.ext(r - n), det_dual)
    for n in range(r):
        src, tgt = modules[n], modules[n + 1]
        delta = L.diff(-(r - n))

        def fn(v, delta=delta, tgt=tgt):
            out = tgt.zero()
            for (K, M), c in v.data.items():
                img = delta.apply(delta.source.basis_vec(K, c))
                for K2, c2 in img.data.items():
                    out = out + tgt.basis_vec((K2, M), -c2)
            return out

        diffs[n] = LinMap.from_function(src, tgt, fn)
    rhs = CochainComplex(algebra, modules, diffs)

    def dual_fn(n):
        tgt = Lstar.module(n)
        shift_sign = (-1) ** ((r + 1) * n)

        def fn(v):
            out = tgt.zero()
            for (K, M), c in v.data.items():
                img = ctx.contract_right(ctx.ext(r, dual=True).basis_vec(M), ctx.ext(r - n).basis_vec(K, c))
                for J, c2 in img.data.items():
                    out = out + tgt.basis_vec((-n, (J, ())), c2 * shift_sign)
            return out

        return fn

    dr = ComplexMap.from_functions(rhs, Lstar, {n: dual_fn(n) for n in range(r + 1)})
    chain_ok = dr.is_chain_map()
    invertible = all(
        ql.rank(dr.qmap(n)) == Lstar.flat(n).dim == rhs.flat(n).dim for n in range(r + 1)
    )
    return chain_ok and invertible, {"chain_map": chain_ok, "invertible": invertible, "map": dr}
