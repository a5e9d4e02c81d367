"""Coefficient algebras: the rationals and truncated graded polynomial rings.

A truncated polynomial algebra Q[x_1..x_m] with degree bound D is the
quotient of the polynomial ring by the span of all monomials of total
degree > D.  Multiplication silently drops overflowing monomials; since
this is an algebra quotient, every ring identity (associativity,
distributivity) holds exactly on what is kept.  The rationals are the
m = 0, D = 0 case, so a single element type covers both.
"""

from __future__ import annotations

import re
from fractions import Fraction
from itertools import combinations_with_replacement


def _monomials_up_to(num_vars, degree_bound):
    out = []
    for d in range(degree_bound + 1):
        for combo in combinations_with_replacement(range(num_vars), d):
            exps = [0] * num_vars
            for i in combo:
                exps[i] += 1
            out.append(tuple(exps))
    # canonical order: by degree, then lexicographically
    out = sorted(set(out), key=lambda e: (sum(e), e))
    if not out:
        out = [()]
    return out


class CoeffAlgebra:
    """A commutative coefficient algebra with a finite monomial basis."""

    def __init__(self, num_vars, degree_bound, var_names=None):
        if num_vars < 0 or degree_bound < 0:
            raise ValueError("need num_vars >= 0 and degree_bound >= 0")
        self.num_vars = num_vars
        self.degree_bound = degree_bound
        if var_names is None:
            var_names = tuple(f"x{i+1}" for i in range(num_vars))
        if len(var_names) != num_vars:
            raise ValueError("var_names length mismatch")
        self.var_names = tuple(var_names)
        self.monomials = _monomials_up_to(num_vars, degree_bound)
        self.monomial_index = {m: i for i, m in enumerate(self.monomials)}

    @classmethod
    def rationals(cls):
        return cls(0, 0)

    @classmethod
    def polynomial(cls, num_vars, degree_bound, var_names=None):
        return cls(num_vars, degree_bound, var_names)

    @property
    def is_rational(self):
        return self.num_vars == 0

    def dimension(self):
        return len(self.monomials)

    def __eq__(self, other):
        return (
            isinstance(other, CoeffAlgebra)
            and self.num_vars == other.num_vars
            and self.degree_bound == other.degree_bound
            and self.var_names == other.var_names
        )

    def __hash__(self):
        return hash((self.num_vars, self.degree_bound, self.var_names))

    def __repr__(self):
        if self.is_rational:
            return "Q"
        return f"Q[{','.join(self.var_names)}]<={self.degree_bound}"

    # -- element constructors ------------------------------------------

    def zero(self):
        return Poly(self, {})

    def one(self):
        return Poly(self, {(0,) * self.num_vars: Fraction(1)})

    def const(self, c):
        c = Fraction(c)
        if not c:
            return self.zero()
        return Poly(self, {(0,) * self.num_vars: c})

    def gen(self, i):
        if not 0 <= i < self.num_vars:
            raise IndexError("no such variable")
        if self.degree_bound < 1:
            return self.zero()
        e = [0] * self.num_vars
        e[i] = 1
        return Poly(self, {tuple(e): Fraction(1)})

    def monomial(self, exps, c=1):
        exps = tuple(exps)
        if sum(exps) > self.degree_bound:
            return self.zero()
        c = Fraction(c)
        return Poly(self, {exps: c}) if c else self.zero()

    def basis(self):
        return [Poly(self, {m: Fraction(1)}) for m in self.monomials]

    def parse(self, text):
        return _parse_poly(self, text)


class Poly:
    """Sparse element of a CoeffAlgebra: {exponent tuple: Fraction}."""

    __slots__ = ("algebra", "terms")

    def __init__(self, algebra, terms):
        self.algebra = algebra
        self.terms = {e: c for e, c in terms.items() if c}

    def is_zero(self):
        return not self.terms

    def degree(self):
        """Total degree; -1 for the zero element."""
        if not self.terms:
            return -1
        return max(sum(e) for e in self.terms)

    def constant_term(self):
        return self.terms.get((0,) * self.algebra.num_vars, Fraction(0))

    def is_unit(self):
        # the truncated ring is local: units have nonzero constant term
        return bool(self.constant_term())

    def __add__(self, other):
        other = self._coerce(other)
        out = dict(self.terms)
        for e, c in other.terms.items():
            s = out.get(e, Fraction(0)) + c
            if s:
                out[e] = s
            else:
                out.pop(e, None)
        return Poly(self.algebra, out)

    def __neg__(self):
        return Poly(self.algebra, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            c = Fraction(other)
            if not c:
                return self.algebra.zero()
            return Poly(self.algebra, {e: c * v for e, v in self.terms.items()})
        other = self._coerce(other)
        D = self.algebra.degree_bound
        out = {}
        for e1, c1 in self.terms.items():
            d1 = sum(e1)
            for e2, c2 in other.terms.items():
                if d1 + sum(e2) > D:
                    continue
                e = tuple(a + b for a, b in zip(e1, e2))
                s = out.get(e, Fraction(0)) + c1 * c2
                if s:
                    out[e] = s
                else:
                    del out[e]
        return Poly(self.algebra, out)

    __rmul__ = __mul__

    def _coerce(self, other):
        if isinstance(other, Poly):
            if other.algebra != self.algebra:
                raise ValueError("mixed coefficient algebras")
            return other
        if isinstance(other, (int, Fraction)):
            return self.algebra.const(other)
        raise TypeError(f"cannot coerce {other!r}")

    def inverse(self):
        """Inverse of a unit, by the finite geometric series of the local ring."""
        c0 = self.constant_term()
        if not c0:
            raise ZeroDivisionError("not a unit in the truncated algebra")
        n = self.algebra.one() - self * (1 / c0)  # nilpotent part
        acc = self.algebra.one()
        power = self.algebra.one()
        for _ in range(self.algebra.degree_bound):
            power = power * n
            if power.is_zero():
                break
            acc = acc + power
        return acc * (1 / c0)

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = self.algebra.const(other)
        return isinstance(other, Poly) and self.algebra == other.algebra and self.terms == other.terms

    def __hash__(self):
        return hash((self.algebra, tuple(sorted(self.terms.items()))))

    def __repr__(self):
        return poly_to_string(self)


def poly_to_string(p):
    if not p.terms:
        return "0"
    names = p.algebra.var_names
    parts = []
    for e in sorted(p.terms, key=lambda t: (sum(t), t)):
        c = p.terms[e]
        factors = []
        for name, k in zip(names, e):
            if k == 1:
                factors.append(name)
            elif k > 1:
                factors.append(f"{name}^{k}")
        if not factors:
            parts.append(str(c))
        elif c == 1:
            parts.append("*".join(factors))
        elif c == -1:
            parts.append("-" + "*".join(factors))
        else:
            parts.append(f"{c}*" + "*".join(factors))
    out = parts[0]
    for t in parts[1:]:
        out += ("+" + t) if not t.startswith("-") else t
    return out


_TERM_RE = re.compile(r"^(\d+(?:/\d+)?)?\*?((?:[A-Za-z]\w*(?:\^\d+)?\*?)*)$")


def _parse_poly(algebra, text):
    """Parse strings like '1 + 2*x1^2*x2 - 3/4*x2' into a Poly."""
    text = text.replace(" ", "")
    if not text:
        raise ValueError("empty polynomial string")
    chunks = re.findall(r"[+-]?[^+-]+", text)
    if "".join(chunks) != text:
        raise ValueError(f"cannot parse polynomial {text!r}")
    result = algebra.zero()
    name_to_idx = {n: i for i, n in enumerate(algebra.var_names)}
    for chunk in chunks:
        sign = Fraction(1)
        body = chunk
        if body and body[0] in "+-":
            if body[0] == "-":
                sign = Fraction(-1)
            body = body[1:]
        m = _TERM_RE.match(body)
        if not m or not body:
            raise ValueError(f"cannot parse term {chunk!r}")
        coeff_s, vars_s = m.groups()
        if coeff_s:
            sign *= Fraction(coeff_s)
        elif not vars_s:
            raise ValueError(f"cannot parse term {chunk!r}")
        exps = [0] * algebra.num_vars
        if vars_s:
            for factor in filter(None, vars_s.split("*")):
                if "^" in factor:
                    name, k = factor.split("^")
                    k = int(k)
                else:
                    name, k = factor, 1
                if name not in name_to_idx:
                    raise ValueError(f"unknown variable {name!r}")
                exps[name_to_idx[name]] += k
        result = result + algebra.monomial(exps, sign)
    return result
