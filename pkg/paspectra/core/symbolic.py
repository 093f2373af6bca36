"""Finite sums Σ c · y^{a/2} · ln(y)^b and their exact antiderivatives.

Each basis term y^{a/2} ln^b y is integrated once by sympy over exact rationals and
cached; a SymbolicFn only keeps the float coefficients of its terms.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field
from typing import Iterator

import sympy as sp

Key = tuple[int, int]  # (half-power a, log-power b)

Y = sp.Symbol("y", positive=True)
_LOG_Y = sp.log(Y)


def basis(a: int, b: int = 0) -> sp.Expr:
    return Y ** sp.Rational(a, 2) * _LOG_Y**b


def _split_terms(expr: sp.Expr) -> dict[Key, sp.Rational]:
    """Read an expanded sum of c·y^{a/2}·ln^b y back into (a, b) -> c."""
    out: dict[Key, sp.Rational] = {}
    for term in sp.Add.make_args(sp.expand(expr)):
        coeff, rest = term.as_coeff_Mul()
        powers = {} if rest == 1 else dict(rest.as_powers_dict())
        half = powers.pop(Y, 0) * 2
        b = powers.pop(_LOG_Y, 0)
        if powers or not sp.Integer(half) == half or not sp.Integer(b) == b:
            raise ValueError(f"term {term} is not of the form c·y^(a/2)·ln(y)^b")
        key = (int(half), int(b))
        out[key] = out.get(key, sp.Integer(0)) + sp.Rational(coeff)
    return out


@functools.lru_cache(maxsize=None)
def basis_antiderivative(a: int, b: int) -> tuple[tuple[Key, float], ...]:
    """Terms of ∫ y^{a/2} ln^b y dy, constant of integration dropped."""
    result = sp.integrate(basis(a, b), Y, manual=True)
    if result.has(sp.Integral):
        raise ValueError(f"sympy left ∫ y^({a}/2) ln(y)^{b} dy unevaluated")
    return tuple((key, float(c)) for key, c in sorted(_split_terms(result).items()) if c != 0)


@dataclass
class SymbolicFn:
    """Linear combination of y^{a/2} ln^b y; keys are canonical (a, b) pairs."""

    terms: dict[Key, float] = field(default_factory=dict)

    @classmethod
    def constant(cls, c: float) -> "SymbolicFn":
        return cls({(0, 0): float(c)} if c else {})

    @classmethod
    def monomial(cls, a: int, b: int = 0, c: float = 1.0) -> "SymbolicFn":
        if b < 0:
            raise ValueError(f"log power must be >= 0, got {b}")
        return cls({(a, b): float(c)} if c else {})

    def __iter__(self) -> Iterator[tuple[float, int, int]]:
        for (a, b), c in sorted(self.terms.items()):
            yield c, a, b

    def __len__(self) -> int:
        return len(self.terms)

    def _accumulate(self, key: Key, c: float) -> None:
        total = self.terms.get(key, 0.0) + c
        if total == 0.0:
            self.terms.pop(key, None)
        else:
            self.terms[key] = total

    def __add__(self, other: "SymbolicFn") -> "SymbolicFn":
        out = SymbolicFn(dict(self.terms))
        for key, c in other.terms.items():
            out._accumulate(key, c)
        return out

    def __sub__(self, other: "SymbolicFn") -> "SymbolicFn":
        return self + other.scale(-1.0)

    def scale(self, c: float) -> "SymbolicFn":
        return SymbolicFn({key: v * c for key, v in self.terms.items() if v * c != 0.0})

    def mul_power(self, a: int) -> "SymbolicFn":
        """Multiply by y^{a/2}."""
        return SymbolicFn({(k + a, b): c for (k, b), c in self.terms.items()})

    def antiderivative(self) -> "SymbolicFn":
        """F with F' = f and no constant term added."""
        out = SymbolicFn()
        for (a, b), c in self.terms.items():
            for key, coeff in basis_antiderivative(a, b):
                out._accumulate(key, c * coeff)
        return out

    def to_sympy(self) -> sp.Expr:
        return sp.Add(*(sp.Float(c) * basis(a, b) for (a, b), c in self.terms.items()))

    def evaluate(self, y: float) -> float:
        if y <= 0.0:
            raise ValueError(f"SymbolicFn is only defined on y > 0, got {y}")
        ln = math.log(y)
        return math.fsum(c * y ** (a / 2.0) * ln**b for (a, b), c in self.terms.items())

    def integrate_from(self, lower: float) -> "SymbolicFn":
        """y -> ∫_lower^y f, as a new SymbolicFn."""
        anti = self.antiderivative()
        return anti - SymbolicFn.constant(anti.evaluate(lower))

    def definite(self, lower: float, upper: float) -> float:
        anti = self.antiderivative()
        return anti.evaluate(upper) - anti.evaluate(lower)
