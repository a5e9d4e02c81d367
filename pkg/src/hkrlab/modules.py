"""Based modules over a coefficient algebra, their elements, and linear maps.

A BasedModule is a free module with a finite ordered basis of hashable
labels.  Labels may carry an internal grade (exterior degree, Cech degree,
...); the total grade of a flattened basis vector is the label grade plus
the degree of its monomial.  Flattening turns any module into a finite
dimensional rational vector space, optionally restricted to total grade
<= window (the quotient by the span of higher-grade basis vectors).
"""

from __future__ import annotations

from fractions import Fraction

from .coeff import Poly
from . import rational as ql


class StructuralError(ValueError):
    """Mismatched modules or coefficient algebras."""


class BasedModule:
    """Free module with a finite labelled basis."""

    __slots__ = ("algebra", "labels", "name", "grades", "label_index")

    def __init__(self, algebra, labels, name="", grades=None):
        self.algebra = algebra
        self.labels = tuple(labels)
        self.name = name
        if grades is None:
            grades = (0,) * len(self.labels)
        self.grades = tuple(grades)
        if len(self.grades) != len(self.labels):
            raise ValueError("grades length mismatch")
        self.label_index = {lab: i for i, lab in enumerate(self.labels)}
        if len(self.label_index) != len(self.labels):
            raise ValueError("duplicate basis labels")

    @property
    def rank(self):
        return len(self.labels)

    def grade_of(self, label):
        return self.grades[self.label_index[label]]

    def zero(self):
        return Vec(self, {})

    def basis_vec(self, label, coeff=1):
        if label not in self.label_index:
            raise StructuralError(f"label {label!r} not in module {self.name!r}")
        c = coeff if isinstance(coeff, Poly) else self.algebra.const(coeff)
        return Vec(self, {label: c})

    def basis(self):
        return [self.basis_vec(lab) for lab in self.labels]

    def __eq__(self, other):
        # the name participates: two exterior powers with identical label
        # sets but different underlying modules must not be confused
        return (
            isinstance(other, BasedModule)
            and self.algebra == other.algebra
            and self.labels == other.labels
            and self.grades == other.grades
            and self.name == other.name
        )

    def __hash__(self):
        return hash((self.algebra, self.labels, self.grades, self.name))

    def __repr__(self):
        return f"BasedModule({self.name or self.labels}, rank={self.rank})"


class Vec:
    """Sparse module element: {label: Poly}."""

    __slots__ = ("module", "data")

    def __init__(self, module, data):
        self.module = module
        clean = {}
        for lab, c in data.items():
            if isinstance(c, (int, Fraction)):
                c = module.algebra.const(c)
            if not c.is_zero():
                clean[lab] = c
        self.data = clean

    def is_zero(self):
        return not self.data

    def coeff(self, label):
        return self.data.get(label, self.module.algebra.zero())

    def __add__(self, other):
        self._check(other)
        out = dict(self.data)
        for lab, c in other.data.items():
            s = out.get(lab)
            out[lab] = c if s is None else s + c
        return Vec(self.module, out)

    def __neg__(self):
        return Vec(self.module, {lab: -c for lab, c in self.data.items()})

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c):
        if isinstance(c, (int, Fraction)):
            c = self.module.algebra.const(c)
        return Vec(self.module, {lab: c * v for lab, v in self.data.items()})

    def _check(self, other):
        if not isinstance(other, Vec) or other.module != self.module:
            raise StructuralError("elements live in different modules")

    def __eq__(self, other):
        return isinstance(other, Vec) and self.module == other.module and self.data == other.data

    def __repr__(self):
        if not self.data:
            return "0"
        return " + ".join(f"({c})*{lab}" for lab, c in sorted(self.data.items(), key=lambda t: str(t[0])))


class LinMap:
    """Algebra-linear map between based modules, stored column-wise."""

    __slots__ = ("source", "target", "cols")

    def __init__(self, source, target, cols=None):
        if source.algebra != target.algebra:
            raise StructuralError("source/target over different algebras")
        self.source = source
        self.target = target
        self.cols = {}
        if cols:
            for lab, vec in cols.items():
                self.set_column(lab, vec)

    @classmethod
    def from_function(cls, source, target, fn):
        m = cls(source, target)
        for lab in source.labels:
            m.set_column(lab, fn(source.basis_vec(lab)))
        return m

    @classmethod
    def identity(cls, module):
        return cls.from_function(module, module, lambda v: v)

    @classmethod
    def zero(cls, source, target):
        return cls(source, target)

    def set_column(self, label, vec):
        if label not in self.source.label_index:
            raise StructuralError(f"no source label {label!r}")
        if not isinstance(vec, Vec) or vec.module != self.target:
            raise StructuralError("column vector not in target module")
        if vec.is_zero():
            self.cols.pop(label, None)
        else:
            self.cols[label] = vec

    def apply(self, vec):
        if vec.module != self.source:
            raise StructuralError(
                f"map {self.source.name!r}->{self.target.name!r} applied to {vec.module.name!r}"
            )
        out = self.target.zero()
        for lab, c in vec.data.items():
            col = self.cols.get(lab)
            if col is not None:
                out = out + col.scale(c)
        return out

    def compose(self, other):
        """self o other."""
        if other.target != self.source:
            raise StructuralError("composition of non-matching maps")
        return LinMap.from_function(other.source, self.target, lambda v: self.apply(other.apply(v)))

    def __add__(self, other):
        if other.source != self.source or other.target != self.target:
            raise StructuralError("sum of maps with different source/target")
        return LinMap.from_function(self.source, self.target, lambda v: self.apply(v) + other.apply(v))

    def __sub__(self, other):
        return self + other.scale(-1)

    def scale(self, c):
        return LinMap.from_function(self.source, self.target, lambda v: self.apply(v).scale(c))

    def is_zero(self):
        return all(v.is_zero() for v in self.cols.values())

    def __eq__(self, other):
        if not isinstance(other, LinMap):
            return False
        if other.source != self.source or other.target != self.target:
            return False
        return (self - other).is_zero()

    def dense(self):
        """Dense matrix of Poly entries, rows indexed by target labels."""
        rows = []
        for tlab in self.target.labels:
            row = []
            for slab in self.source.labels:
                col = self.cols.get(slab)
                row.append(col.coeff(tlab) if col is not None else self.target.algebra.zero())
            rows.append(row)
        return rows

    def to_json(self):
        from .coeff import poly_to_string

        return [[poly_to_string(e) for e in row] for row in self.dense()]


# -- flattening to rational vector spaces -------------------------------


class QBasis:
    """Flattened rational basis of a module: pairs (label, monomial)."""

    __slots__ = ("module", "window", "pairs", "index")

    def __init__(self, module, window=None):
        self.module = module
        self.window = window
        pairs = []
        for lab, g in zip(module.labels, module.grades):
            for mono in module.algebra.monomials:
                if window is not None and g + sum(mono) > window:
                    continue
                pairs.append((lab, mono))
        self.pairs = pairs
        self.index = {p: i for i, p in enumerate(pairs)}

    @property
    def dim(self):
        return len(self.pairs)

    def flatten_vec(self, vec):
        out = [Fraction(0)] * self.dim
        for lab, poly in vec.data.items():
            for mono, c in poly.terms.items():
                i = self.index.get((lab, mono))
                if i is not None:
                    out[i] = c
        return out

    def unflatten(self, column):
        data = {}
        for (lab, mono), c in zip(self.pairs, column):
            if c:
                cur = data.setdefault(lab, {})
                cur[mono] = cur.get(mono, Fraction(0)) + c
        return Vec(self.module, {lab: Poly(self.module.algebra, t) for lab, t in data.items()})

    def grade_indices(self, grade):
        gr = self.module.grades
        idx = self.module.label_index
        return [i for i, (lab, mono) in enumerate(self.pairs) if gr[idx[lab]] + sum(mono) == grade]


def flatten_map(linmap, src_basis, tgt_basis):
    """Rational matrix of an algebra-linear map on flattened bases.

    Column for (label, mono) is the flattening of map(basis_vec(label)) * mono;
    entries outside the target window are dropped (quotient semantics).
    """
    cols = []
    algebra = linmap.source.algebra
    for lab, mono in src_basis.pairs:
        mono_poly = algebra.monomial(mono)
        image = linmap.apply(linmap.source.basis_vec(lab, mono_poly))
        cols.append(tgt_basis.flatten_vec(image))
    return ql.transpose(cols) if cols else [[] for _ in range(tgt_basis.dim)]


class QLinMap:
    """Rational-linear map between flattened modules.

    Used for maps that are only k-linear (exterior derivative, derivations)
    or that relate modules over different coefficient algebras.
    """

    __slots__ = ("src_basis", "tgt_basis", "matrix")

    def __init__(self, src_basis, tgt_basis, matrix):
        self.src_basis = src_basis
        self.tgt_basis = tgt_basis
        self.matrix = matrix

    @classmethod
    def from_function(cls, src_basis, tgt_basis, fn):
        algebra = src_basis.module.algebra
        cols = []
        for lab, mono in src_basis.pairs:
            v = src_basis.module.basis_vec(lab, algebra.monomial(mono))
            cols.append(tgt_basis.flatten_vec(fn(v)))
        matrix = ql.transpose(cols) if cols else [[] for _ in range(tgt_basis.dim)]
        return cls(src_basis, tgt_basis, matrix)

    @classmethod
    def from_linmap(cls, linmap, window_src=None, window_tgt=None):
        sb = QBasis(linmap.source, window_src)
        tb = QBasis(linmap.target, window_tgt)
        return cls(sb, tb, flatten_map(linmap, sb, tb))

    @classmethod
    def identity(cls, basis):
        return cls(basis, basis, ql.identity(basis.dim))

    def apply(self, vec):
        col = self.src_basis.flatten_vec(vec)
        out = [sum((row[j] * col[j] for j in range(len(col)) if col[j]), Fraction(0)) for row in self.matrix]
        return self.tgt_basis.unflatten(out)

    def compose(self, other):
        if other.tgt_basis.pairs != self.src_basis.pairs:
            raise StructuralError("QLinMap composition mismatch")
        return QLinMap(other.src_basis, self.tgt_basis, ql.mat_mul(self.matrix, other.matrix))

    def __add__(self, other):
        return QLinMap(self.src_basis, self.tgt_basis, ql.mat_add(self.matrix, other.matrix))

    def __sub__(self, other):
        return QLinMap(self.src_basis, self.tgt_basis, ql.mat_sub(self.matrix, other.matrix))

    def scale(self, c):
        return QLinMap(self.src_basis, self.tgt_basis, ql.mat_scale(self.matrix, c))

    def is_zero(self):
        return ql.is_zero_matrix(self.matrix)

    def rank(self):
        return ql.rank(self.matrix)

    def is_invertible(self):
        return self.src_basis.dim == self.tgt_basis.dim and self.rank() == self.src_basis.dim
