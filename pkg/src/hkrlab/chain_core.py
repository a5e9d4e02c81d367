"""Bounded cochain complexes, maps, homology, Hom/tensor complexes.

Conventions, fixed once for the whole package:

* cohomological grading; every differential has degree +1;
* Hom complexes: (df) = d o f - (-1)^{|f|} f o d;
* shifts C[k] reindex only (C[k]^n = C^{n+k}, same differential); where a
  sign-twisted differential is wanted it is written out explicitly;
* totalization of a bicomplex with commuting squares: on the (i, j) spot
  the total differential is d_h + (-1)^i d_v.

All rank computations happen on flattened rational matrices.  A complex
may carry a grade window w: its flattened space is the quotient spanned
by basis vectors of total grade <= w (label grade plus monomial degree).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction


from .modules import BasedModule, LinMap, QBasis, StructuralError, flatten_map
from . import rational as ql


def zero_module(algebra):
    return BasedModule(algebra, (), name="0")


class CochainComplex:
    """Finite collection of based modules with degree +1 differentials."""

    def __init__(self, algebra, modules, diffs, window=None, check=True):
        self.algebra = algebra
        self.modules = dict(modules)
        self.diffs = {}
        self.window = window
        self._flat = {}
        self._qdiff = {}
        for n, d in diffs.items():
            if d is None or d.is_zero():
                continue
            if d.source != self.modules.get(n) or d.target != self.modules.get(n + 1):
                raise StructuralError(f"differential at degree {n} has wrong source/target")
            self.diffs[n] = d
        if check:
            for n, d in self.diffs.items():
                nxt = self.diffs.get(n + 1)
                if nxt is not None and not nxt.compose(d).is_zero():
                    raise ValueError(f"d o d != 0 at degree {n}")

    def degrees(self):
        return sorted(self.modules)

    def module(self, n):
        return self.modules.get(n) or zero_module(self.algebra)

    def diff(self, n):
        d = self.diffs.get(n)
        if d is not None:
            return d
        return LinMap.zero(self.module(n), self.module(n + 1))

    def flat(self, n):
        if n not in self._flat:
            self._flat[n] = QBasis(self.module(n), self.window)
        return self._flat[n]

    def qdiff(self, n):
        if n not in self._qdiff:
            self._qdiff[n] = flatten_map(self.diff(n), self.flat(n), self.flat(n + 1))
        return self._qdiff[n]

    def shift(self, k):
        """Reindex-only shift: C[k]^n = C^{n+k} with the same differential."""
        return CochainComplex(
            self.algebra,
            {n - k: M for n, M in self.modules.items()},
            {n - k: d for n, d in self.diffs.items()},
            window=self.window,
            check=False,
        )

    def with_window(self, window):
        return CochainComplex(self.algebra, self.modules, self.diffs, window=window, check=False)

    def scale_diff(self, c):
        return CochainComplex(
            self.algebra,
            self.modules,
            {n: d.scale(c) for n, d in self.diffs.items()},
            window=self.window,
            check=False,
        )

    def is_homogeneous(self):
        """Do all differentials preserve total grade?"""
        for n in self.degrees():
            fb, tb = self.flat(n), self.flat(n + 1)
            M = self.qdiff(n)
            for j, (slab, smono) in enumerate(fb.pairs):
                g = fb.module.grade_of(slab) + sum(smono)
                for i, (tlab, tmono) in enumerate(tb.pairs):
                    if M[i][j] and tb.module.grade_of(tlab) + sum(tmono) != g:
                        return False
        return True

    def to_json(self):
        return {
            str(n): {
                "rank": self.module(n).rank,
                "labels": [str(l) for l in self.module(n).labels],
                "diff": self.diff(n).to_json(),
            }
            for n in self.degrees()
        }


def single_module_complex(algebra, module, degree=0):
    return CochainComplex(algebra, {degree: module}, {}, check=False)


class ComplexMap:
    """Degree-preserving map of complexes, stored as flattened matrices.

    The per-degree components may be handed in as LinMaps (algebra linear)
    or as raw rational matrices relative to the flattened bases (for maps
    that are only rational-linear, or that change coefficient algebras).
    """

    def __init__(self, source, target, components):
        self.source = source
        self.target = target
        self.maps = {}
        for n, comp in components.items():
            if isinstance(comp, LinMap):
                comp = flatten_map(comp, source.flat(n), target.flat(n))
            self.maps[n] = comp

    @classmethod
    def from_functions(cls, source, target, fns):
        comps = {}
        for n, fn in fns.items():
            sb, tb = source.flat(n), target.flat(n)
            cols = []
            algebra = sb.module.algebra
            for lab, mono in sb.pairs:
                v = sb.module.basis_vec(lab, algebra.monomial(mono))
                cols.append(tb.flatten_vec(fn(v)))
            comps[n] = ql.transpose(cols) if cols else [[] for _ in range(tb.dim)]
        return cls(source, target, comps)

    def qmap(self, n):
        m = self.maps.get(n)
        if m is None:
            return ql.zeros(self.target.flat(n).dim, self.source.flat(n).dim)
        return m

    def apply(self, n, vec):
        col = self.source.flat(n).flatten_vec(vec)
        M = self.qmap(n)
        out = [sum((row[j] * col[j] for j in range(len(col)) if col[j]), Fraction(0)) for row in M]
        return self.target.flat(n).unflatten(out)

    def chain_defect(self, n):
        lhs = ql.mat_mul(self.target.qdiff(n), self.qmap(n))
        rhs = ql.mat_mul(self.qmap(n + 1), self.source.qdiff(n))
        return ql.mat_sub(lhs, rhs)

    def is_chain_map(self, anti=False):
        degs = set(self.source.degrees()) | set(self.target.degrees())
        for n in degs:
            lhs = ql.mat_mul(self.target.qdiff(n), self.qmap(n))
            rhs = ql.mat_mul(self.qmap(n + 1), self.source.qdiff(n))
            if anti:
                rhs = ql.mat_scale(rhs, -1)
            if not ql.mat_eq(lhs, rhs):
                return False
        return True

    def compose(self, other):
        degs = set(self.maps) | set(other.maps)
        for n in degs:
            if self.source.flat(n).pairs != other.target.flat(n).pairs:
                raise StructuralError("composition of non-matching complex maps")
        return ComplexMap(
            other.source,
            self.target,
            {n: ql.mat_mul(self.qmap(n), other.qmap(n)) for n in degs},
        )

    def __sub__(self, other):
        degs = set(self.maps) | set(other.maps)
        return ComplexMap(
            self.source, self.target, {n: ql.mat_sub(self.qmap(n), other.qmap(n)) for n in degs}
        )

    def is_zero(self):
        return all(ql.is_zero_matrix(m) for m in self.maps.values())


def identity_map(C):
    return ComplexMap(C, C, {n: ql.identity(C.flat(n).dim) for n in C.degrees()})


# -- Hom and tensor complexes -------------------------------------------


def tensor_module(M, N, name=None):
    if M.algebra != N.algebra:
        raise StructuralError("tensor of modules over different algebras")
    labels = [(a, b) for a in M.labels for b in N.labels]
    grades = [M.grade_of(a) + N.grade_of(b) for a, b in labels]
    return BasedModule(M.algebra, labels, name or f"{M.name}(x){N.name}", grades)


def hom_module(M, N, name=None):
    labels = [(a, b) for a in M.labels for b in N.labels]
    grades = [N.grade_of(b) - M.grade_of(a) for a, b in labels]
    return BasedModule(M.algebra, labels, name or f"Hom({M.name},{N.name})", grades)


def hom_complex(C, D):
    """Hom complex with differential d o f - (-1)^{|f|} f o d."""
    algebra = C.algebra
    cdegs, ddegs = C.degrees(), D.degrees()
    modules = {}
    for m in cdegs:
        for n in ddegs:
            deg = n - m
            pairs = modules.setdefault(deg, [])
            pairs.append((m, n))
    hom_modules = {}
    for deg, pairs in modules.items():
        labels, grades = [], []
        for m, n in pairs:
            hm = hom_module(C.module(m), D.module(n))
            for lab, g in zip(hm.labels, hm.grades):
                labels.append((m, lab))
                grades.append(g)
        hom_modules[deg] = BasedModule(algebra, labels, f"Hom(C,D)^{deg}", grades)
    diffs = {}
    for deg in sorted(hom_modules):
        src = hom_modules[deg]
        tgt = hom_modules.get(deg + 1)
        if tgt is None:
            continue
        dmap = LinMap(src, tgt)
        for m, (a, b) in src.labels:
            # elementary map sending basis vector a of C^m to b of D^{m+deg}
            out = tgt.zero()
            # post-compose with d_D
            dD = D.diff(m + deg)
            img = dD.apply(D.module(m + deg).basis_vec(b))
            for b2, c in img.data.items():
                out = out + tgt.basis_vec((m, (a, b2)), c)
            # pre-compose with d_C, Koszul sign -(-1)^deg
            dC = C.diff(m - 1)
            if not dC.is_zero():
                sgn = -1 if deg % 2 == 0 else 1
                for a2 in C.module(m - 1).labels:
                    colv = dC.cols.get(a2)
                    if colv is None:
                        continue
                    c = colv.coeff(a)
                    if not c.is_zero():
                        out = out + tgt.basis_vec((m - 1, (a2, b)), c * sgn)
            dmap.set_column((m, (a, b)), out)
        diffs[deg] = dmap
    return CochainComplex(algebra, hom_modules, diffs, check=True)


def tensor_complex(C, D):
    """Tensor product complex with d(x tensor y) = dx tensor y + (-1)^{|x|} x tensor dy."""
    algebra = C.algebra
    modules = {}
    for m in C.degrees():
        for n in D.degrees():
            modules.setdefault(m + n, []).append((m, n))
    t_modules = {}
    for deg, pairs in modules.items():
        labels, grades = [], []
        for m, n in pairs:
            tm = tensor_module(C.module(m), D.module(n))
            for lab, g in zip(tm.labels, tm.grades):
                labels.append((m, lab))
                grades.append(g)
        t_modules[deg] = BasedModule(algebra, labels, f"(C(x)D)^{deg}", grades)
    diffs = {}
    for deg in sorted(t_modules):
        src = t_modules[deg]
        tgt = t_modules.get(deg + 1)
        if tgt is None:
            continue
        dmap = LinMap(src, tgt)
        for m, (a, b) in src.labels:
            n = deg - m
            out = tgt.zero()
            img = C.diff(m).apply(C.module(m).basis_vec(a))
            for a2, c in img.data.items():
                out = out + tgt.basis_vec((m + 1, (a2, b)), c)
            sgn = -1 if m % 2 else 1
            img = D.diff(n).apply(D.module(n).basis_vec(b))
            for b2, c in img.data.items():
                out = out + tgt.basis_vec((m, (a, b2)), c * sgn)
            dmap.set_column((m, (a, b)), out)
        diffs[deg] = dmap
    return CochainComplex(algebra, t_modules, diffs, check=True)


# -- bicomplexes ---------------------------------------------------------


class Bicomplex:
    """Modules indexed by (i, j) with commuting horizontal/vertical differentials."""

    def __init__(self, algebra, modules, horiz, vert, check=True):
        self.algebra = algebra
        self.modules = dict(modules)
        self.horiz = {k: v for k, v in horiz.items() if v is not None and not v.is_zero()}
        self.vert = {k: v for k, v in vert.items() if v is not None and not v.is_zero()}
        if check:
            self.validate()

    def module(self, ij):
        return self.modules.get(ij) or zero_module(self.algebra)

    def h(self, ij):
        d = self.horiz.get(ij)
        if d is None:
            i, j = ij
            return LinMap.zero(self.module(ij), self.module((i + 1, j)))
        return d

    def v(self, ij):
        d = self.vert.get(ij)
        if d is None:
            i, j = ij
            return LinMap.zero(self.module(ij), self.module((i, j + 1)))
        return d

    def validate(self):
        for (i, j) in self.modules:
            if not self.h((i + 1, j)).compose(self.h((i, j))).is_zero():
                raise ValueError(f"horizontal d^2 != 0 at {(i, j)}")
            if not self.v((i, j + 1)).compose(self.v((i, j))).is_zero():
                raise ValueError(f"vertical d^2 != 0 at {(i, j)}")
            lhs = self.v((i + 1, j)).compose(self.h((i, j)))
            rhs = self.h((i, j + 1)).compose(self.v((i, j)))
            if not (lhs - rhs).is_zero():
                raise ValueError(f"square at {(i, j)} does not commute")


def totalize(bic):
    """Total complex; the vertical differential picks up the sign (-1)^i."""
    spots = {}
    for (i, j) in bic.modules:
        spots.setdefault(i + j, []).append((i, j))
    t_modules = {}
    for n, ijs in spots.items():
        labels, grades = [], []
        for ij in sorted(ijs):
            M = bic.module(ij)
            for lab, g in zip(M.labels, M.grades):
                labels.append((ij, lab))
                grades.append(g)
        t_modules[n] = BasedModule(bic.algebra, labels, f"Tot^{n}", grades)
    diffs = {}
    for n in sorted(t_modules):
        src = t_modules[n]
        tgt = t_modules.get(n + 1)
        if tgt is None:
            continue
        dmap = LinMap(src, tgt)
        for (i, j), lab in src.labels:
            out = tgt.zero()
            img = bic.h((i, j)).apply(bic.module((i, j)).basis_vec(lab))
            for lab2, c in img.data.items():
                out = out + tgt.basis_vec(((i + 1, j), lab2), c)
            sgn = -1 if i % 2 else 1
            img = bic.v((i, j)).apply(bic.module((i, j)).basis_vec(lab))
            for lab2, c in img.data.items():
                out = out + tgt.basis_vec(((i, j + 1), lab2), c * sgn)
            dmap.set_column(((i, j), lab), out)
        diffs[n] = dmap
    total = CochainComplex(bic.algebra, t_modules, diffs, check=False)
    for n in total.degrees():
        nxt = total.diffs.get(n + 1)
        if nxt is not None and n in total.diffs and not nxt.compose(total.diffs[n]).is_zero():
            raise ValueError(f"total differential does not square to zero at degree {n}")
    return total


# -- homology ------------------------------------------------------------


@dataclass
class HomologyResult:
    degree: int
    grade: "int | None"
    dim: int
    representatives: list
    _cycle_cols: list = field(repr=False, default_factory=list)
    _boundary_cols: list = field(repr=False, default_factory=list)
    _flat: QBasis = field(repr=False, default=None)
    _indices: list = field(repr=False, default=None)

    def project_flat(self, col):
        """Coordinates of a cycle in the representative basis (boundaries die)."""
        if self._indices is not None:
            col = [col[i] for i in self._indices]
        basis = [list(c) for c in self._cycle_cols] + [list(c) for c in self._boundary_cols]
        if not basis:
            if any(col):
                raise ValueError("vector is not a cycle")
            return []
        coords = ql.coords_in_basis(basis, col)
        if coords is None:
            raise ValueError("vector is not a cycle")
        return coords[: self.dim]

    def project(self, vec):
        return self.project_flat(self._flat.flatten_vec(vec))


def homology(C, degree, grade=None):
    """Exact homology at one degree (optionally one internal grade slice)."""
    fb = C.flat(degree)
    d_in = C.qdiff(degree - 1)
    d_out = C.qdiff(degree)
    indices = None
    if grade is not None:
        if not C.is_homogeneous():
            raise ValueError("grade slicing requires a homogeneous complex")
        indices = fb.grade_indices(grade)
        in_idx = C.flat(degree - 1).grade_indices(grade)
        out_idx = C.flat(degree + 1).grade_indices(grade)
        d_in = [[d_in[i][j] for j in in_idx] for i in indices]
        d_out = [[d_out[i][j] for j in indices] for i in out_idx]
    n_cols = len(indices) if indices is not None else fb.dim
    if n_cols == 0:
        kernel = []
    elif not d_out:
        kernel = list(ql.identity(n_cols))
    else:
        kernel = ql.nullspace(d_out)
    boundaries = []
    if d_in and d_in[0]:
        cols = ql.transpose(d_in)
        _, piv = ql.rref(d_in)
        boundaries = [cols[p] for p in piv]
    # choose representatives: kernel vectors completing the boundary span
    reps = []
    if kernel:
        stacked = ql.transpose([list(b) for b in boundaries] + [list(k) for k in kernel])
        _, piv = ql.rref(stacked)
        nb = len(boundaries)
        reps = [kernel[p - nb] for p in piv if p >= nb]
    dim = len(reps)
    rep_vecs = []
    for r in reps:
        if indices is not None:
            full = [Fraction(0)] * fb.dim
            for pos, i in enumerate(indices):
                full[i] = r[pos]
            rep_vecs.append(fb.unflatten(full))
        else:
            rep_vecs.append(fb.unflatten(r))
    return HomologyResult(degree, grade, dim, rep_vecs, reps, boundaries, fb, indices)


def homology_dims(C, grade=None):
    return {n: homology(C, n, grade).dim for n in C.degrees()}


def is_quasi_iso(f, grades=(None,), degrees=None):
    """True iff the induced maps on homology are isomorphisms.

    grades is an iterable of grade slices (None = the whole flattened
    space); degrees optionally restricts the cohomological degrees checked
    (used when a source complex is a brutal truncation of an unbounded
    resolution, whose homology is only computed faithfully away from the
    cut).
    """
    degs = degrees if degrees is not None else sorted(
        set(f.source.degrees()) | set(f.target.degrees())
    )
    for grade in grades:
        for n in degs:
            hs = homology(f.source, n, grade)
            ht = homology(f.target, n, grade)
            if hs.dim != ht.dim:
                return False
            if hs.dim == 0:
                continue
            cols = []
            for rep in hs.representatives:
                img = f.apply(n, rep)
                cols.append(ht.project(img))
            if ql.rank(ql.transpose(cols)) != ht.dim:
                return False
    return True


def null_homotopy(f):
    """Solve f = d h + h d for a degree -1 map h; None when no solution."""
    C, D = f.source, f.target
    degs = sorted(set(C.degrees()) | set(D.degrees()))
    var_index = {}
    nvars = 0
    for n in degs:
        sdim = C.flat(n).dim
        tdim = D.flat(n - 1).dim
        for i in range(tdim):
            for j in range(sdim):
                var_index[(n, i, j)] = nvars
                nvars += 1
    rows, rhs = [], []
    for n in degs:
        F = f.qmap(n)
        dD = D.qdiff(n - 1)  # D^{n-1} -> D^n
        dC = C.qdiff(n)  # C^n -> C^{n+1}
        sdim = C.flat(n).dim
        tdim = D.flat(n).dim
        hdim = D.flat(n - 1).dim
        nxt = C.flat(n + 1).dim
        for i in range(tdim):
            for j in range(sdim):
                row = [Fraction(0)] * nvars
                # (dD h^n)_{ij} = sum_k dD[i][k] h^n[k][j]
                for k in range(hdim):
                    if dD[i][k]:
                        row[var_index[(n, k, j)]] += dD[i][k]
                # (h^{n+1} dC)_{ij} = sum_k h^{n+1}[i][k] dC[k][j]
                for k in range(nxt):
                    if dC[k][j]:
                        row[var_index[(n + 1, i, k)]] += dC[k][j]
                rows.append(row)
                rhs.append(F[i][j])
    sol = ql.solve_vec(rows, rhs) if rows else []
    if sol is None:
        return None
    out = {}
    for n in degs:
        tdim = D.flat(n - 1).dim
        sdim = C.flat(n).dim
        out[n] = [[sol[var_index[(n, i, j)]] for j in range(sdim)] for i in range(tdim)]
    return out


@dataclass
class Decomposition:
    ok: bool
    reason: str = ""
    h_complex: CochainComplex = None
    inclusion: ComplexMap = None
    projection: ComplexMap = None
    homotopy: dict = None


def split_off_homology(C):
    """Try to split C as (free homology complex) + (null-homotopic complex).

    The splitting maps are required to be linear over the coefficient
    algebra; failure to find one is reported, not raised.
    """
    algebra = C.algebra
    adim = algebra.dimension()
    h_reps = {}
    for n in C.degrees():
        H = homology(C, n)
        if H.dim % adim:
            return Decomposition(False, f"homology at degree {n} is not free")
        # greedily pick representatives whose algebra multiples span H
        chosen = []
        span_rows = []
        for rep in H.representatives:
            cand_rows = []
            for b in algebra.basis():
                scaled = C.flat(n).flatten_vec(rep.scale(b))
                cand_rows.append(H.project_flat(scaled))
            old = ql.rank(span_rows) if span_rows else 0
            if ql.rank(span_rows + cand_rows) > old:
                chosen.append(rep)
                span_rows = span_rows + cand_rows
        if (ql.rank(span_rows) if span_rows else 0) != H.dim:
            return Decomposition(False, f"no free generating system at degree {n}")
        h_reps[n] = chosen
    h_modules = {
        n: BasedModule(algebra, tuple(("h", n, t) for t in range(len(reps))), f"H^{n}")
        for n, reps in h_reps.items()
        if reps
    }
    Hc = CochainComplex(algebra, h_modules, {}, check=False)
    fns = {}
    for n in h_modules:
        reps = h_reps[n]

        def make(n=n, reps=reps):
            def fn(v):
                out = C.module(n).zero()
                for lab, c in v.data.items():
                    out = out + reps[lab[2]].scale(c)
                return out

            return fn

        fns[n] = make()
    incl = ComplexMap.from_functions(Hc, C, fns)
    if not incl.is_chain_map():
        return Decomposition(False, "chosen representatives are not closed under d")
    proj = _solve_retraction(C, Hc, incl)
    if proj is None:
        return Decomposition(False, "no algebra-linear retraction")
    defect = identity_map(C) - incl.compose(proj)
    h = null_homotopy(defect)
    if h is None:
        return Decomposition(False, "complement is not null-homotopic")
    return Decomposition(True, "", Hc, incl, proj, h)


def _algebra_linear_matrix(algebra, sb, tb, coeffs):
    """Flattened matrix of the algebra-linear map with given entry coefficients.

    coeffs maps (src_label, tgt_label, monomial) -> Fraction.
    """
    M = ql.zeros(tb.dim, sb.dim)
    D = algebra.degree_bound
    for (sl, tl, mono), c in coeffs.items():
        if not c:
            continue
        for j, (sl2, mu) in enumerate(sb.pairs):
            if sl2 != sl:
                continue
            prod = tuple(a + b for a, b in zip(mono, mu))
            if sum(prod) > D:
                continue
            idx = tb.index.get((tl, prod))
            if idx is not None:
                M[idx][j] += c
    return M


def _solve_retraction(C, Hc, incl):
    """Algebra-linear rho with rho o incl = id and rho o d = 0 per degree."""
    algebra = C.algebra
    comps = {}
    for n in C.degrees():
        src = C.module(n)
        tgt = Hc.module(n)
        sb, tb = C.flat(n), Hc.flat(n)
        if tgt.rank == 0:
            comps[n] = ql.zeros(tb.dim, sb.dim)
            continue
        variables = [
            (sl, tl, mono) for sl in src.labels for tl in tgt.labels for mono in algebra.monomials
        ]
        var_index = {v: i for i, v in enumerate(variables)}
        # flattened matrix as a linear function of the variables:
        # entry_contrib[(i, j)] is a list of (var, coeff)
        contrib = {}
        D = algebra.degree_bound
        for (sl, tl, mono) in variables:
            for j, (sl2, mu) in enumerate(sb.pairs):
                if sl2 != sl:
                    continue
                prod = tuple(a + b for a, b in zip(mono, mu))
                if sum(prod) > D:
                    continue
                i = tb.index[(tl, prod)]
                contrib.setdefault((i, j), []).append(var_index[(sl, tl, mono)])
        rows, rhs = [], []
        inc = incl.qmap(n)
        d_in = C.qdiff(n - 1)
        prev_dim = C.flat(n - 1).dim
        for i in range(tb.dim):
            for col in range(tb.dim):
                row = [Fraction(0)] * len(variables)
                for j in range(sb.dim):
                    if inc[j][col]:
                        for v in contrib.get((i, j), ()):
                            row[v] += inc[j][col]
                rows.append(row)
                rhs.append(Fraction(1) if i == col else Fraction(0))
            for col in range(prev_dim):
                row = [Fraction(0)] * len(variables)
                for j in range(sb.dim):
                    if d_in[j][col]:
                        for v in contrib.get((i, j), ()):
                            row[v] += d_in[j][col]
                rows.append(row)
                rhs.append(Fraction(0))
        sol = ql.solve_vec(rows, rhs)
        if sol is None:
            return None
        coeffs = {v: sol[k] for v, k in var_index.items()}
        comps[n] = _algebra_linear_matrix(algebra, sb, tb, coeffs)
    return ComplexMap(C, Hc, comps)
