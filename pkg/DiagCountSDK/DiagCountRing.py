import logging
from dataclasses import dataclass
from math import gcd
from typing import List, Optional, Union

from sympy import isprime, perfect_power

from DiagCountSDK.DiagCountErrors import (
    InvalidModulusError,
    NegativeCountError,
    NotInvertibleError,
    UnsupportedOperationError,
)

logger = logging.getLogger('DiagCountRing')


class _Infinity:
    """Valuation of zero. Compares above every integer and equals only itself."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "INFINITY"

    def __eq__(self, other):
        return other is self

    def __hash__(self):
        return hash("INFINITY")

    def __lt__(self, other):
        return False

    def __le__(self, other):
        return other is self

    def __gt__(self, other):
        return other is not self

    def __ge__(self, other):
        return True


INFINITY = _Infinity()

Weight = Union[int, _Infinity]


# ----------------------- Modulus -----------------------

@dataclass(frozen=True)
class Modulus:
    """
    The ring Z_m. For a prime power m = p^k the fields p and k are set and
    is_prime_power is true; a general m keeps p and k as None.
    """

    m: int
    p: Optional[int] = None
    k: Optional[int] = None

    def __post_init__(self):
        if self.m < 2:
            raise InvalidModulusError(f"Modulus must be at least 2, got {self.m}")
        if self.p is not None:
            if self.k is None or self.k < 1:
                raise InvalidModulusError(f"Exponent must be at least 1, got {self.k}", self.p, self.k)
            if not isprime(self.p):
                raise InvalidModulusError(f"p must be prime, got {self.p}", self.p, self.k)
            if self.p ** self.k != self.m:
                raise InvalidModulusError(f"{self.p}^{self.k} != {self.m}", self.p, self.k)

    @classmethod
    def prime_power(cls, p: int, k: int) -> "Modulus":
        if not isinstance(p, int) or p < 2 or not isprime(p):
            raise InvalidModulusError(f"p must be prime, got {p}", p, k)
        if not isinstance(k, int) or k < 1:
            raise InvalidModulusError(f"k must be a positive integer, got {k}", p, k)
        return cls(m=p ** k, p=p, k=k)

    @classmethod
    def general(cls, m: int) -> "Modulus":
        """Any modulus; prime powers are still recognised."""
        return cls.parse(m)

    @classmethod
    def parse(cls, m: int) -> "Modulus":
        if m < 2:
            raise InvalidModulusError(f"Modulus must be at least 2, got {m}")
        if isprime(m):
            return cls(m=int(m), p=int(m), k=1)
        power = perfect_power(m)
        if power:
            # largest exponent first, so the base is never itself a power
            base, exponent = power
            if isprime(base):
                return cls(m=int(m), p=int(base), k=int(exponent))
        return cls(m=int(m))

    @property
    def is_prime_power(self) -> bool:
        return self.p is not None

    def require_prime_power(self, operation: str) -> None:
        if not self.is_prime_power:
            raise UnsupportedOperationError(operation, self.m)

    def __call__(self, value: int) -> "Residue":
        return Residue(value % self.m, self)

    def __str__(self):
        if self.is_prime_power:
            return f"Z_{self.m} ({self.p}^{self.k})"
        return f"Z_{self.m}"


# ----------------------- Residue -----------------------

@dataclass(frozen=True)
class Residue:
    value: int
    modulus: Modulus

    def __post_init__(self):
        if not 0 <= self.value < self.modulus.m:
            raise ValueError(f"Residue {self.value} out of range for {self.modulus}")

    def _coerce(self, other) -> int:
        if isinstance(other, Residue):
            if other.modulus != self.modulus:
                raise ValueError(f"Cannot combine residues of {self.modulus} and {other.modulus}")
            return other.value
        return other

    def __add__(self, other):
        return self.modulus(self.value + self._coerce(other))

    def __sub__(self, other):
        return self.modulus(self.value - self._coerce(other))

    def __mul__(self, other):
        return self.modulus(self.value * self._coerce(other))

    __radd__ = __add__
    __rmul__ = __mul__

    def __neg__(self):
        return self.modulus(-self.value)

    def __int__(self):
        return self.value

    def is_unit(self) -> bool:
        return gcd(self.value, self.modulus.m) == 1


# ----------------------- Valuations and inverses -----------------------

def val_int(x: int, p: int) -> Weight:
    """p-adic valuation of a plain integer; INFINITY for zero."""
    if x == 0:
        return INFINITY
    x = abs(x)
    count = 0
    while x % p == 0:
        x //= p
        count += 1
    return count


def val_p(x: Residue) -> Weight:
    """Largest l with p^l dividing x in Z_{p^k}; INFINITY for zero."""
    x.modulus.require_prime_power("val_p")
    return val_int(x.value, x.modulus.p)


def inv(x: Residue) -> Residue:
    try:
        return x.modulus(pow(x.value, -1, x.modulus.m))
    except ValueError:
        valuation = val_p(x) if x.modulus.is_prime_power else None
        raise NotInvertibleError(x.value, x.modulus.m, valuation) from None


def units(modulus: Modulus) -> List[int]:
    return [u for u in range(1, modulus.m) if gcd(u, modulus.m) == 1]


# ----------------------- Euler phi family -----------------------

def phi_pow(p: int, l: int) -> int:
    """phi(p^l); phi(p^0) = 1."""
    if l < 0:
        raise ValueError(f"Exponent must be non-negative, got {l}")
    if l == 0:
        return 1
    return p ** (l - 1) * (p - 1)


def phi_i(p: int, j: int, i: int) -> int:
    """p^j - i*p^(j-1): admissible values for the i-th edge of a linked cell."""
    if j < 1 or i < 1:
        raise ValueError(f"phi_i needs j >= 1 and i >= 1, got j={j}, i={i}")
    if i > p:
        raise NegativeCountError(p, j, i)
    return p ** j - i * p ** (j - 1)
