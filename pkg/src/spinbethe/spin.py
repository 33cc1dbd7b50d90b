"""Exact spin labels, harmonic numbers and the Hamiltonian's Q-polynomial."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import total_ordering
from typing import Union

__all__ = ["HalfInt", "QPolynomial", "harmonic", "q_polynomial", "half_int_roundtrip"]


@total_ordering
@dataclass(frozen=True)
class HalfInt:
    """Half-integer stored as twice its value.

    ``HalfInt(3)`` is 3/2.  Arithmetic between half-integers is exact; use
    :meth:`from_str` to parse labels such as ``"1"`` or ``"3/2"``.
    """

    twice: int

    def __post_init__(self):
        if not isinstance(self.twice, int):
            raise TypeError(f"twice must be int, got {type(self.twice).__name__}")

    @classmethod
    def from_value(cls, value: Union[int, Fraction, "HalfInt", str]) -> "HalfInt":
        if isinstance(value, HalfInt):
            return value
        if isinstance(value, str):
            return cls.from_str(value)
        twice = Fraction(value) * 2
        if twice.denominator != 1:
            raise ValueError(f"{value} is not a half-integer")
        return cls(int(twice))

    @classmethod
    def from_str(cls, text: str) -> "HalfInt":
        return cls.from_value(Fraction(text.strip()))

    @property
    def value(self) -> Fraction:
        return Fraction(self.twice, 2)

    @property
    def is_integer(self) -> bool:
        return self.twice % 2 == 0

    def __float__(self) -> float:
        return self.twice / 2

    def __add__(self, other):
        other = HalfInt.from_value(other)
        return HalfInt(self.twice + other.twice)

    __radd__ = __add__

    def __sub__(self, other):
        other = HalfInt.from_value(other)
        return HalfInt(self.twice - other.twice)

    def __rsub__(self, other):
        return HalfInt.from_value(other) - self

    def __neg__(self):
        return HalfInt(-self.twice)

    def __mul__(self, n: int) -> "HalfInt":
        if not isinstance(n, int):
            return NotImplemented
        return HalfInt(self.twice * n)

    __rmul__ = __mul__

    def __eq__(self, other):
        try:
            other = HalfInt.from_value(other)
        except (TypeError, ValueError):
            return NotImplemented
        return self.twice == other.twice

    def __lt__(self, other):
        other = HalfInt.from_value(other)
        return self.twice < other.twice

    def __hash__(self):
        return hash(("HalfInt", self.twice))

    def __int__(self) -> int:
        if not self.is_integer:
            raise ValueError(f"{self} is not an integer")
        return self.twice // 2

    def __str__(self) -> str:
        return str(self.twice // 2) if self.is_integer else f"{self.twice}/2"

    def __repr__(self) -> str:
        return f"HalfInt({self})"


def half_int_roundtrip(t: int) -> HalfInt:
    """Spin label with ``twice == t``; rejects t <= 0."""
    if t <= 0:
        raise ValueError(f"spin label needs twice >= 1, got {t}")
    return HalfInt(t)


def harmonic(j: int) -> Fraction:
    """Exact harmonic number h(j) = 1 + 1/2 + ... + 1/j, with h(0) = 0."""
    if j < 0:
        raise ValueError("harmonic number needs j >= 0")
    return sum((Fraction(1, k) for k in range(1, j + 1)), Fraction(0))


@dataclass(frozen=True)
class QPolynomial:
    """Polynomial with exact rational coefficients in ascending degree."""

    coeffs: tuple[Fraction, ...]

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def __call__(self, x):
        # Horner; works for Fraction, float and complex scalars (elementwise on arrays)
        acc = 0
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def as_floats(self) -> list[float]:
        return [float(c) for c in self.coeffs]


def _interpolation_nodes(s: HalfInt) -> list[Fraction]:
    ss = s.value * (s.value + 1)
    return [Fraction(l * (l + 1), 2) - ss for l in range(s.twice + 1)]


def q_polynomial(s: HalfInt) -> QPolynomial:
    """Lagrange interpolant through (x_l, h(l)), l = 0..2s.

    The nodes x_l = l(l+1)/2 - s(s+1) are the eigenvalues of the two-site
    operator s_n . s_{n+1} in the channel of total spin l.
    """
    s = HalfInt.from_value(s)
    if s.twice < 1:
        raise ValueError("spin must be >= 1/2")
    nodes = _interpolation_nodes(s)
    n = len(nodes)
    coeffs = [Fraction(0)] * n
    for j in range(1, n):  # h(0) = 0 drops the j = 0 term
        # basis polynomial prod_{l != j} (x - x_l)/(x_j - x_l), expanded
        basis = [Fraction(1)]
        denom = Fraction(1)
        for l in range(n):
            if l == j:
                continue
            basis = [Fraction(0)] + basis
            for i in range(len(basis) - 1):
                basis[i] -= nodes[l] * basis[i + 1]
            denom *= nodes[j] - nodes[l]
        weight = harmonic(j) / denom
        for i, b in enumerate(basis):
            coeffs[i] += weight * b
    return QPolynomial(tuple(coeffs))
