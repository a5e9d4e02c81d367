"""The trivial square-zero extension B = I + A and its exterior dg-algebra.

B carries the product (i,a).(i',a') = (ia' + ai', aa').  The exterior
algebra of B over A is stored in split form throughout: Lambda^k B is the
based module with labels ('i', K) for K an increasing k-tuple (the pure
part Lambda^k I) and ('j', L) for L an increasing (k-1)-tuple (the part
1_B ^ Lambda^{k-1} I).  The Koszul differential of the projection onto A
is d_k('j', L) = ('i', L), d_k('i', K) = 0.

The shifted module puts Lambda^{k+1} B in degree k; its product is

    (i1, j1) * (i2, j2) = (i1 ^ j2 + (-1)^k j1 ^ i2, j1 ^ j2)

and its differential is k d_{k+1}.  All identities (associativity,
Leibniz, module axioms) are exact in the truncated coefficient algebra
because truncation is an algebra quotient.
"""

from __future__ import annotations

from itertools import combinations

from .chain_core import CochainComplex
from .coeff import Poly
from .exterior_core import merge_wedge
from .modules import BasedModule, LinMap, StructuralError


class TrivialExtension:
    """B = I + A with I free of rank r over A, in split coordinates."""

    def __init__(self, algebra, rank, name="B"):
        if rank < 1:
            raise ValueError("extension by a rank-0 module is degenerate")
        self.algebra = algebra
        self.rank = rank
        self.name = name
        self._lam_b = {}
        self._lam_i = {}
        self._unsplit = {}

    # -- modules ---------------------------------------------------------

    def lam_i(self, p):
        """Lambda^p I with labels = increasing tuples."""
        if p not in self._lam_i:
            labels = tuple(combinations(range(self.rank), p)) if 0 <= p <= self.rank else ()
            self._lam_i[p] = BasedModule(self.algebra, labels, f"L^{p}I", tuple(p for _ in labels))
        return self._lam_i[p]

    def lam_b(self, k):
        """Lambda^k B in split form: ('i', K) for |K| = k, ('j', L) for |L| = k-1."""
        if k not in self._lam_b:
            labels = []
            grades = []
            if 0 <= k <= self.rank:
                for K in combinations(range(self.rank), k):
                    labels.append(("i", K))
                    grades.append(k)
            if 1 <= k <= self.rank + 1:
                for L in combinations(range(self.rank), k - 1):
                    labels.append(("j", L))
                    grades.append(k - 1)
            self._lam_b[k] = BasedModule(self.algebra, tuple(labels), f"L^{k}{self.name}", tuple(grades))
        return self._lam_b[k]

    @property
    def B(self):
        return self.lam_b(1)

    def b_elem(self, i_coeffs, a):
        """Element (i, a) of B from I coordinates and an algebra element."""
        out = self.B.zero()
        for k, c in enumerate(i_coeffs):
            out = out + self.B.basis_vec(("i", (k,)), c)
        if not isinstance(a, Poly):
            a = self.algebra.const(a)
        return out + self.B.basis_vec(("j", ()), a)

    def unit(self):
        return self.b_elem([0] * self.rank, 1)

    def split(self, x):
        """Split a Lambda^k B element into its (Lambda^k I, Lambda^{k-1} I) parts."""
        k = self.degree_of(x.module)
        i_part = self.lam_i(k).zero()
        j_part = self.lam_i(k - 1).zero() if k >= 1 else None
        for (tag, K), c in x.data.items():
            if tag == "i":
                i_part = i_part + self.lam_i(k).basis_vec(K, c)
            else:
                j_part = j_part + self.lam_i(k - 1).basis_vec(K, c)
        return i_part, j_part

    def join(self, k, i_part, j_part):
        out = self.lam_b(k).zero()
        if i_part is not None:
            for K, c in i_part.data.items():
                out = out + self.lam_b(k).basis_vec(("i", K), c)
        if j_part is not None:
            for L, c in j_part.data.items():
                out = out + self.lam_b(k).basis_vec(("j", L), c)
        return out

    def degree_of(self, module):
        name = module.name
        if not name.startswith("L^") or not name.endswith(self.name):
            raise StructuralError(f"{name!r} is not an exterior power of {self.name}")
        return int(name[2 : -len(self.name)])

    # -- products --------------------------------------------------------

    def b_mul(self, x, y):
        """Product in B: (i,a)(i',a') = (ia' + ai', aa')."""
        i1, a1 = self.split(x)
        i2, a2 = self.split(y)
        a1 = a1.coeff(())
        a2 = a2.coeff(())
        i_out = i1.scale(a2) + i2.scale(a1)
        return self.join(1, i_out, self.lam_i(0).basis_vec((), a1 * a2))

    def wedge_i(self, x, y):
        """Wedge in Lambda I."""
        p = int(x.module.name[2:-1])
        q = int(y.module.name[2:-1])
        tgt = self.lam_i(p + q)
        out = tgt.zero()
        if p + q > self.rank:
            return out
        for K, a in x.data.items():
            for L, b in y.data.items():
                m = merge_wedge(K, L)
                if m is not None:
                    out = out + tgt.basis_vec(m[1], a * b * m[0])
        return out

    def wedge_b(self, x, y):
        """Wedge in Lambda B, computed on split labels.

        ('i', K) is the pure wedge of I vectors, ('j', L) is 1_B ^ (I part);
        two j-labels wedge to zero since 1_B ^ 1_B = 0.
        """
        k = self.degree_of(x.module)
        l = self.degree_of(y.module)
        tgt = self.lam_b(k + l)
        out = tgt.zero()
        for (t1, K), a in x.data.items():
            for (t2, L), b in y.data.items():
                if t1 == "j" and t2 == "j":
                    continue
                m = merge_wedge(K, L)
                if m is None:
                    continue
                sgn, KL = m
                if t1 == "i" and t2 == "i":
                    lab = ("i", KL)
                elif t1 == "j":
                    lab = ("j", KL)  # (1 ^ K) ^ L = 1 ^ (K ^ L)
                else:
                    # K ^ (1 ^ L) = (-1)^{|K|} 1 ^ (K ^ L)
                    sgn *= (-1) ** len(K)
                    lab = ("j", KL)
                if lab in tgt.label_index:
                    out = out + tgt.basis_vec(lab, a * b * sgn)
        return out

    # -- differentials and the shifted product ----------------------------

    def d(self, k):
        """Koszul differential Lambda^k B -> Lambda^{k-1} B of pr_2."""
        src, tgt = self.lam_b(k), self.lam_b(k - 1)
        m = LinMap(src, tgt)
        for lab in src.labels:
            tag, K = lab
            if tag == "j" and ("i", K) in tgt.label_index:
                m.set_column(lab, tgt.basis_vec(("i", K)))
        return m

    def hat_d(self, k):
        """Differential of the shifted module: k d_{k+1} on degree k."""
        return self.d(k + 1).scale(k)

    def star(self, k, l, x, y):
        """Shifted product on degree-k and degree-l pieces (Eq. split form)."""
        if x.module != self.lam_b(k + 1) or y.module != self.lam_b(l + 1):
            raise StructuralError("star: operands in wrong graded pieces")
        i1, j1 = self.split(x)
        i2, j2 = self.split(y)
        i_out = self.wedge_i(i1, j2) + self.wedge_i(j1, i2).scale((-1) ** k)
        j_out = self.wedge_i(j1, j2)
        return self.join(k + l + 1, i_out, j_out)

    def star_abstract(self, k, l, x, y):
        """The defining formula a*a' = a.da' + (-1)^{|a|+1} da.a' + (-1)^{|a|} da.1_B.da'.

        Here |a| is the degree in the unshifted exterior algebra (k+1 for an
        element of the degree-k shifted piece) and the products are wedges in
        Lambda B.  Used to cross-validate the split form of star().
        """
        da = self.d(k + 1).apply(x)
        db = self.d(l + 1).apply(y)
        one = self.join(1, None, self.lam_i(0).basis_vec(()))
        term1 = self.wedge_b(x, db)
        term2 = self.wedge_b(da, y).scale((-1) ** k)
        term3 = self.wedge_b(self.wedge_b(da, one), db).scale((-1) ** (k + 1))
        return term1 + term2 + term3

    def b_action(self, k, b, x):
        """Module action of B on Lambda^k B: (i,a)*(i1,j1) = (a i1 + i^j1, a j1)."""
        return self.star(0, k - 1, b, x)

    def pi(self, k, x):
        """The algebra map to A: projection of the degree-0 piece.

        On degree 0 (= B) this is pr_2; higher degrees map to zero.
        """
        if k != 0:
            return self.algebra.zero()
        _, a = self.split(x)
        return a.coeff(())

    # -- the unsplit view and the splitting isomorphism -------------------

    def lam_b_unsplit(self, k):
        """Lambda^k B on the wedge basis of (1_B, y_1, ..., y_r).

        Labels are increasing tuples from {-1, 0, .., r-1} where -1 stands
        for the unit 1_B; used only to certify the split form.
        """
        if k not in self._unsplit:
            labels = tuple(combinations(range(-1, self.rank), k))
            self._unsplit[k] = BasedModule(
                self.algebra, labels, f"U^{k}{self.name}", tuple(k for _ in labels)
            )
        return self._unsplit[k]

    def eq_split_iso(self, k):
        """The based isomorphism (i, j) |-> i + 1_B ^ j onto the unsplit view."""
        src, tgt = self.lam_b(k), self.lam_b_unsplit(k)
        m = LinMap(src, tgt)
        for lab in src.labels:
            tag, K = lab
            if tag == "i":
                m.set_column(lab, tgt.basis_vec(K))
            else:
                m.set_column(lab, tgt.basis_vec((-1,) + K))
        return m

    def d_unsplit(self, k):
        """Koszul differential of pr_2 on the unsplit wedge basis."""
        src, tgt = self.lam_b_unsplit(k), self.lam_b_unsplit(k - 1)
        m = LinMap(src, tgt)
        for K in src.labels:
            out = tgt.zero()
            for i, ki in enumerate(K):
                if ki == -1:  # pr_2(1_B) = 1, pr_2(y) = 0
                    rest = K[:i] + K[i + 1 :]
                    out = out + tgt.basis_vec(rest, (-1) ** i)
            m.set_column(K, out)
        return m


def build_extension(algebra, rank):
    """The trivial square-zero extension of the algebra by a free rank-r module."""
    return TrivialExtension(algebra, rank)


def shifted_complex(ext):
    """The complex with Lambda^{k+1} B in degree -k and differential k d_{k+1}.

    This is the underlying complex of the shifted dg-module; degree -0 has
    no outgoing differential.  (Exactness in negative degrees is witnessed
    by the wedge-with-unit homotopy, see tests.)
    """
    r = ext.rank
    modules = {-k: ext.lam_b(k + 1) for k in range(r + 1)}
    diffs = {-k: ext.hat_d(k) for k in range(1, r + 1)}
    return CochainComplex(ext.algebra, modules, diffs)
