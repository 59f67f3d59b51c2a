"""
Exact arithmetic over Z_p and polynomials with coefficients in Z_p.

Polynomials are immutable and store canonical integer coefficients in
ascending degree order. The zero polynomial has an empty coefficient tuple
and degree -1.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import ConfigurationError, ModulusMismatchError

# Deterministic Miller-Rabin witnesses, valid for every n < 3.3e24.
_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    for q in _MR_BASES:
        if n % q == 0:
            return n == q
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in _MR_BASES:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


@dataclass(frozen=True)
class Modulus:
    p: int
    is_prime: bool = False

    def __post_init__(self):
        if not isinstance(self.p, int) or self.p < 2:
            raise ConfigurationError(f"modulus must be an integer >= 2, got {self.p!r}")
        if self.p >= 2**64:
            raise ConfigurationError("moduli >= 2**64 are not supported")
        if self.is_prime and not is_prime(self.p):
            raise ConfigurationError(f"{self.p} is not prime")

    @classmethod
    def of(cls, p: int) -> Modulus:
        """Build a modulus, detecting primality."""
        return cls(p, is_prime(p))

    @property
    def width(self) -> int:
        """Bits needed for one element, ceil(log2 p)."""
        return (self.p - 1).bit_length()

    def element(self, value: int) -> ZpElement:
        return ZpElement(value % self.p, self)

    def require_prime(self, what: str = "this operation"):
        if not self.is_prime:
            raise ConfigurationError(f"{what} requires a prime modulus, got p={self.p}")


@dataclass(frozen=True)
class ZpElement:
    value: int
    modulus: Modulus

    def __post_init__(self):
        if not 0 <= self.value < self.modulus.p:
            raise ValueError(f"{self.value} is not a canonical residue mod {self.modulus.p}")

    def _other(self, other) -> int:
        if isinstance(other, ZpElement):
            if other.modulus.p != self.modulus.p:
                raise ModulusMismatchError(f"mod {self.modulus.p} vs mod {other.modulus.p}")
            return other.value
        if isinstance(other, int):
            return other
        return NotImplemented

    def __add__(self, other):
        v = self._other(other)
        if v is NotImplemented:
            return v
        return self.modulus.element(self.value + v)

    __radd__ = __add__

    def __sub__(self, other):
        v = self._other(other)
        if v is NotImplemented:
            return v
        return self.modulus.element(self.value - v)

    def __rsub__(self, other):
        v = self._other(other)
        if v is NotImplemented:
            return v
        return self.modulus.element(v - self.value)

    def __mul__(self, other):
        v = self._other(other)
        if v is NotImplemented:
            return v
        return self.modulus.element(self.value * v)

    __rmul__ = __mul__

    def __neg__(self):
        return self.modulus.element(-self.value)

    def inverse(self) -> ZpElement:
        return self.modulus.element(pow(self.value, -1, self.modulus.p))

    def __int__(self):
        return self.value

    def __repr__(self):
        return f"{self.value} (mod {self.modulus.p})"


@dataclass(frozen=True)
class EvalPoint:
    x: ZpElement
    y: ZpElement

    def __post_init__(self):
        if self.x.modulus.p != self.y.modulus.p:
            raise ModulusMismatchError("point coordinates in different rings")


def _trim(coeffs: Iterable[int], p: int) -> tuple[int, ...]:
    c = [v % p for v in coeffs]
    while c and c[-1] == 0:
        c.pop()
    return tuple(c)


@dataclass(frozen=True)
class Polynomial:
    """Polynomial over Z_p; ``coeffs[i]`` is the coefficient of x**i."""

    coeffs: tuple[int, ...]
    modulus: Modulus

    def __post_init__(self):
        object.__setattr__(self, "coeffs", _trim(self.coeffs, self.modulus.p))

    @classmethod
    def zero(cls, m: Modulus) -> Polynomial:
        return cls((), m)

    @classmethod
    def constant(cls, c: int, m: Modulus) -> Polynomial:
        return cls((c,), m)

    @classmethod
    def linear(cls, slope: int, intercept: int, m: Modulus) -> Polynomial:
        return cls((intercept, slope), m)

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def coeff(self, i: int) -> int:
        return self.coeffs[i] if i < len(self.coeffs) else 0

    def is_zero(self) -> bool:
        return not self.coeffs

    def __call__(self, x) -> ZpElement:
        return poly_eval(self, x)

    def __add__(self, other: Polynomial) -> Polynomial:
        return poly_add(self, other)

    def __sub__(self, other: Polynomial) -> Polynomial:
        return poly_sub(self, other)

    def __mul__(self, other: Polynomial) -> Polynomial:
        return poly_mul(self, other)

    def __repr__(self):
        if not self.coeffs:
            return f"Polynomial(0 mod {self.modulus.p})"
        terms = []
        for i in range(len(self.coeffs) - 1, -1, -1):
            c = self.coeffs[i]
            if c == 0:
                continue
            mono = "" if i == 0 else ("x" if i == 1 else f"x^{i}")
            terms.append(f"{c}{mono}" if c != 1 or i == 0 else mono)
        return f"Polynomial({' + '.join(terms)} mod {self.modulus.p})"


def _check(a: Polynomial, b: Polynomial):
    if a.modulus.p != b.modulus.p:
        raise ModulusMismatchError(f"mod {a.modulus.p} vs mod {b.modulus.p}")


def _as_int(x, m: Modulus) -> int:
    if isinstance(x, ZpElement):
        if x.modulus.p != m.p:
            raise ModulusMismatchError(f"mod {x.modulus.p} vs mod {m.p}")
        return x.value
    return x % m.p


def poly_add(a: Polynomial, b: Polynomial) -> Polynomial:
    _check(a, b)
    n = max(len(a.coeffs), len(b.coeffs))
    return Polynomial(tuple(a.coeff(i) + b.coeff(i) for i in range(n)), a.modulus)


def poly_sub(a: Polynomial, b: Polynomial) -> Polynomial:
    _check(a, b)
    n = max(len(a.coeffs), len(b.coeffs))
    return Polynomial(tuple(a.coeff(i) - b.coeff(i) for i in range(n)), a.modulus)


def poly_mul(a: Polynomial, b: Polynomial) -> Polynomial:
    _check(a, b)
    if a.is_zero() or b.is_zero():
        return Polynomial.zero(a.modulus)
    p = a.modulus.p
    out = [0] * (len(a.coeffs) + len(b.coeffs) - 1)
    for i, ca in enumerate(a.coeffs):
        for j, cb in enumerate(b.coeffs):
            out[i + j] = (out[i + j] + ca * cb) % p
    return Polynomial(tuple(out), a.modulus)


def poly_scale(a: Polynomial, c) -> Polynomial:
    c = _as_int(c, a.modulus)
    return Polynomial(tuple(v * c for v in a.coeffs), a.modulus)


def poly_shift(a: Polynomial, c) -> Polynomial:
    """Return the polynomial x -> a(x + c)."""
    c = _as_int(c, a.modulus)
    m = a.modulus
    shifted = Polynomial.linear(1, c, m)
    out = Polynomial.zero(m)
    # Horner in the polynomial ring
    for coef in reversed(a.coeffs):
        out = poly_add(poly_mul(out, shifted), Polynomial.constant(coef, m))
    return out


def poly_eval(a: Polynomial, x) -> ZpElement:
    """Horner evaluation mod p."""
    m = a.modulus
    xv = _as_int(x, m)
    p = m.p
    acc = 0
    for c in reversed(a.coeffs):
        acc = (acc * xv + c) % p
    return ZpElement(acc, m)


def poly_from_roots(roots: Iterable, m: Modulus) -> Polynomial:
    """Monic polynomial prod(x - r) over the given (distinct) roots."""
    values = [_as_int(r, m) for r in roots]
    if len(set(values)) != len(values):
        raise ValueError("roots must be distinct")
    p = m.p
    coeffs = [1]
    for r in values:
        # multiply by (x - r)
        nxt = [0] * (len(coeffs) + 1)
        for i, c in enumerate(coeffs):
            nxt[i + 1] = (nxt[i + 1] + c) % p
            nxt[i] = (nxt[i] - r * c) % p
        coeffs = nxt
    return Polynomial(tuple(coeffs), m)


def poly_interpolate(points: Sequence[EvalPoint]) -> Polynomial:
    """Lagrange interpolation through distinct points; degree < len(points)."""
    if not points:
        raise ValueError("need at least one point")
    m = points[0].x.modulus
    for pt in points:
        if pt.x.modulus.p != m.p or pt.y.modulus.p != m.p:
            raise ModulusMismatchError("points in different rings")
    m = Modulus(m.p, is_prime(m.p))
    m.require_prime("interpolation")
    p = m.p
    xs = [pt.x.value for pt in points]
    if len(set(xs)) != len(xs):
        raise ValueError("interpolation points must have distinct x-coordinates")

    master = poly_from_roots(xs, m).coeffs
    result = [0] * len(xs)
    for xi, pt in zip(xs, points):
        if pt.y.value == 0:
            continue
        # synthetic division of master by (x - xi)
        k = len(master) - 1
        quot = [0] * k
        carry = 0
        for i in range(k, 0, -1):
            carry = (master[i] + carry * xi) % p
            quot[i - 1] = carry
        denom = 1
        for xj in xs:
            if xj != xi:
                denom = denom * (xi - xj) % p
        w = pt.y.value * pow(denom, -1, p) % p
        for i, q in enumerate(quot):
            result[i] = (result[i] + w * q) % p
    return Polynomial(tuple(result), points[0].x.modulus)


def is_quadratic_residue(a: int, p: int) -> bool:
    """Euler's criterion; p an odd prime, a != 0 mod p."""
    return pow(a % p, (p - 1) // 2, p) == 1


def sample_rootfree_poly(max_degree: int, m: Modulus, rng) -> Polynomial:
    """Random polynomial with no root anywhere in Z_p.

    Built as a nonzero constant times floor(max_degree / 2) monic irreducible
    quadratics x^2 + bx + c, each accepted when b^2 - 4c is a non-residue.
    """
    m.require_prime("root-free sampling")
    if m.p == 2:
        raise ConfigurationError("root-free sampling needs an odd prime")
    if max_degree < 0:
        raise ValueError("max_degree must be >= 0")
    p = m.p
    out = Polynomial.constant(1 + rng.randrange(p - 1), m)
    for _ in range(max_degree // 2):
        while True:
            b = rng.randrange(p)
            c = rng.randrange(p)
            disc = (b * b - 4 * c) % p
            if disc != 0 and not is_quadratic_residue(disc, p):
                break
        out = poly_mul(out, Polynomial((c, b, 1), m))
    return out


def random_poly(max_degree: int, m: Modulus, rng) -> Polynomial:
    """Uniform polynomial of degree <= max_degree."""
    return Polynomial(tuple(rng.randrange(m.p) for _ in range(max_degree + 1)), m)
