"""Hadamard matrix construction and fast transforms.

Three construction routes are supported:

* ``sylvester`` -- the doubling recursion, orders ``2**k``;
* ``paley`` -- the quadratic-residue construction, order ``p + 1`` for a
  prime ``p`` with ``p % 4 == 3``;
* ``kronecker`` -- products of the two, which reach composite orders such
  as 1536 = 12 * 128 that neither base construction covers alone.

Entries are stored as int8 arrays of +-1 so the defining identity
``H @ H.T == order * I`` holds in exact integer arithmetic.  Matrices are
treated as immutable after construction (the entry buffer is marked
read-only) and can be shared freely across threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional

import numpy as np

from .errors import ArgumentError, ConstructionError, ShapeError, UnsupportedOrderError

# Largest order the constructors will materialize (dense int8 storage).
MAX_ORDER = 1 << 14


def is_prime(n: int) -> bool:
    """Trial-division primality test, adequate for the orders handled here."""
    if n < 2:
        return False
    if n < 4:
        return True
    if n % 2 == 0:
        return False
    f = 3
    while f * f <= n:
        if n % f == 0:
            return False
        f += 2
    return True


@dataclass(frozen=True)
class ConstructionRecipe:
    """Describes how to (re)build a Hadamard matrix.

    Exactly one parameter set is populated depending on ``kind``:
    ``k`` for sylvester, ``p`` for paley, ``left``/``right`` for kronecker.
    """

    kind: str
    k: Optional[int] = None
    p: Optional[int] = None
    left: Optional["ConstructionRecipe"] = None
    right: Optional["ConstructionRecipe"] = None

    def __post_init__(self):
        if self.kind == "sylvester":
            if self.k is None or self.k < 0:
                raise ArgumentError("sylvester recipe needs k >= 0")
        elif self.kind == "paley":
            if self.p is None or not is_prime(self.p) or self.p % 4 != 3:
                raise ArgumentError(
                    f"paley recipe needs a prime p with p % 4 == 3, got {self.p}"
                )
        elif self.kind == "kronecker":
            if self.left is None or self.right is None:
                raise ArgumentError("kronecker recipe needs left and right children")
        else:
            raise ArgumentError(f"unknown recipe kind {self.kind!r}")

    @property
    def order(self) -> int:
        if self.kind == "sylvester":
            return 1 << self.k
        if self.kind == "paley":
            return self.p + 1
        return self.left.order * self.right.order

    def leaf_count(self) -> int:
        if self.kind == "kronecker":
            return self.left.leaf_count() + self.right.leaf_count()
        return 1

    def to_dict(self) -> dict:
        if self.kind == "sylvester":
            return {"kind": "sylvester", "k": self.k}
        if self.kind == "paley":
            return {"kind": "paley", "p": self.p}
        return {
            "kind": "kronecker",
            "left": self.left.to_dict(),
            "right": self.right.to_dict(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ConstructionRecipe":
        kind = d.get("kind")
        if kind == "sylvester":
            return cls(kind="sylvester", k=int(d["k"]))
        if kind == "paley":
            return cls(kind="paley", p=int(d["p"]))
        if kind == "kronecker":
            return cls(
                kind="kronecker",
                left=cls.from_dict(d["left"]),
                right=cls.from_dict(d["right"]),
            )
        raise ArgumentError(f"unknown recipe kind {kind!r}")

    def describe(self) -> str:
        if self.kind == "sylvester":
            return f"sylvester(k={self.k})"
        if self.kind == "paley":
            return f"paley(p={self.p})"
        return f"({self.left.describe()} x {self.right.describe()})"


@dataclass(frozen=True, eq=False)
class HadamardMatrix:
    """Integer +-1 matrix with ``H @ H.T == order * I``."""

    order: int
    entries: np.ndarray
    recipe: ConstructionRecipe

    def __post_init__(self):
        self.entries.setflags(write=False)

    def normalized(self) -> np.ndarray:
        """Float copy scaled by 1/sqrt(order), orthonormal rows/columns."""
        return self.entries.astype(np.float64) / math.sqrt(self.order)

    def apply(self, x: np.ndarray, normalized: bool = False) -> np.ndarray:
        """Dense H @ x along the last axis of ``x``."""
        x = np.asarray(x, dtype=np.float64)
        if x.shape[-1] != self.order:
            raise ShapeError(
                f"last axis has length {x.shape[-1]}, matrix order is {self.order}"
            )
        y = x @ self.entries.astype(np.float64).T
        if normalized:
            y = y / math.sqrt(self.order)
        return y


def gram(entries: np.ndarray) -> np.ndarray:
    """Integer Gram matrix ``H @ H.T``.

    Computed through float64 BLAS for speed: every partial sum is an
    integer bounded by the order, far below 2**53, so no rounding can
    occur and the result is exact.
    """
    f = entries.astype(np.float64)
    return (f @ f.T).astype(np.int64)


def is_hadamard(entries: np.ndarray) -> bool:
    n = entries.shape[0]
    if entries.shape != (n, n):
        return False
    if not np.all(np.abs(entries) == 1):
        return False
    g = gram(entries)
    return bool(np.array_equal(g, n * np.eye(n, dtype=np.int64)))


def _check_order_limit(order: int):
    if order > MAX_ORDER:
        raise ArgumentError(f"order {order} exceeds the supported maximum {MAX_ORDER}")


def sylvester(k: int) -> HadamardMatrix:
    """Order ``2**k`` matrix from the doubling recursion [[H, H], [H, -H]]."""
    if k < 0:
        raise ArgumentError(f"k must be >= 0, got {k}")
    _check_order_limit(1 << k)
    h = np.array([[1]], dtype=np.int8)
    for _ in range(k):
        h = np.block([[h, h], [h, -h]]).astype(np.int8)
    return HadamardMatrix(order=1 << k, entries=h, recipe=ConstructionRecipe("sylvester", k=k))


def legendre_symbol(a: int, p: int) -> int:
    """Quadratic-residue indicator of ``a`` modulo an odd prime ``p``.

    Returns 0 when p divides a, +1 when a is a nonzero square mod p and
    -1 otherwise, evaluated by modular exponentiation a**((p-1)/2) mod p.
    """
    if p == 2 or not is_prime(p):
        raise ArgumentError(f"p must be an odd prime, got {p}")
    a %= p
    if a == 0:
        return 0
    r = pow(a, (p - 1) // 2, p)
    return 1 if r == 1 else -1


@lru_cache(maxsize=64)
def _legendre_table(p: int) -> np.ndarray:
    """Residue indicators for 0..p-1, built once per prime and cached."""
    return np.array([legendre_symbol(a, p) for a in range(p)], dtype=np.int8)


def paley(p: int) -> HadamardMatrix:
    """Order ``p + 1`` matrix from quadratic residues modulo ``p``.

    Layout: all-ones corner row/column flipped to -1 off the corner, -1 on
    the core diagonal, and the residue indicator of the index difference
    elsewhere.  The result is validated against the Gram identity before
    it is returned; a failure raises instead of handing back a bad matrix.
    """
    if not is_prime(p):
        raise ArgumentError(f"p must be prime, got {p}")
    if p % 4 != 3:
        raise UnsupportedOrderError(
            f"quadratic-residue construction needs p % 4 == 3, got p={p}"
        )
    n = p + 1
    _check_order_limit(n)
    chi = _legendre_table(p)
    idx = np.subtract.outer(np.arange(p), np.arange(p)) % p
    core = chi[idx]
    np.fill_diagonal(core, -1)
    h = np.empty((n, n), dtype=np.int8)
    h[0, 0] = 1
    h[0, 1:] = -1
    h[1:, 0] = -1
    h[1:, 1:] = core
    if not is_hadamard(h):
        raise ConstructionError(f"order-{n} quadratic-residue matrix failed validation")
    return HadamardMatrix(order=n, entries=h, recipe=ConstructionRecipe("paley", p=p))


def kronecker(a: HadamardMatrix, b: HadamardMatrix) -> HadamardMatrix:
    """Kronecker product; the Hadamard property is closed under it."""
    order = a.order * b.order
    _check_order_limit(order)
    entries = np.kron(a.entries, b.entries).astype(np.int8)
    recipe = ConstructionRecipe("kronecker", left=a.recipe, right=b.recipe)
    return HadamardMatrix(order=order, entries=entries, recipe=recipe)


def build_matrix(recipe: ConstructionRecipe) -> HadamardMatrix:
    """Materialize a matrix from its recipe."""
    if recipe.kind == "sylvester":
        return sylvester(recipe.k)
    if recipe.kind == "paley":
        return paley(recipe.p)
    return kronecker(build_matrix(recipe.left), build_matrix(recipe.right))


def _atom_recipe(m: int) -> Optional[ConstructionRecipe]:
    # Power of two first: ties between 2**k and p+1 (e.g. 8) prefer sylvester.
    if m >= 1 and m & (m - 1) == 0:
        return ConstructionRecipe("sylvester", k=m.bit_length() - 1)
    if m >= 4 and is_prime(m - 1) and (m - 1) % 4 == 3:
        return ConstructionRecipe("paley", p=m - 1)
    return None


@lru_cache(maxsize=None)
def _best_recipe(m: int) -> Optional[ConstructionRecipe]:
    """Recipe for order ``m`` with the fewest factors, or None.

    Deterministic: single-construction orders win outright, composites
    take the smallest atom divisor among the decompositions that minimize
    the factor count.
    """
    if m < 1:
        return None
    atom = _atom_recipe(m)
    if atom is not None:
        return atom
    if m % 2:
        return None  # every constructible order except 1 is even
    best = None
    best_leaves = 0
    for d in range(2, m // 2 + 1):
        if m % d:
            continue
        left = _atom_recipe(d)
        if left is None:
            continue
        rest = _best_recipe(m // d)
        if rest is None:
            continue
        leaves = 1 + rest.leaf_count()
        if best is None or leaves < best_leaves:
            best = ConstructionRecipe("kronecker", left=left, right=rest)
            best_leaves = leaves
    return best


def find_constructible_order(n: int) -> ConstructionRecipe:
    """Recipe for the smallest constructible order ``>= n``.

    Always terminates: the next power of two is at most 2n away.
    """
    if n < 1:
        raise ArgumentError(f"n must be >= 1, got {n}")
    m = n
    while True:
        recipe = _best_recipe(m)
        if recipe is not None:
            return recipe
        m += 1


def is_constructible(n: int) -> bool:
    return _best_recipe(n) is not None


def fht(x: np.ndarray, normalized: bool = False) -> np.ndarray:
    """Fast transform: H @ x along the last axis, for power-of-two lengths.

    Equivalent to the dense sylvester matrix product but O(n log n).  With
    ``normalized`` the output is divided by sqrt(n), making the transform
    orthonormal (length preserving).
    """
    x = np.asarray(x, dtype=np.float64)
    n = x.shape[-1]
    if n == 0 or n & (n - 1):
        raise ShapeError(f"transform length must be a power of two, got {n}")
    shape = x.shape
    y = x.reshape(-1, n).copy()
    h = 1
    while h < n:
        v = y.reshape(y.shape[0], n // (2 * h), 2, h)
        y = np.stack(
            (v[:, :, 0, :] + v[:, :, 1, :], v[:, :, 0, :] - v[:, :, 1, :]), axis=2
        ).reshape(y.shape[0], n)
        h *= 2
    if normalized:
        y = y / math.sqrt(n)
    return y.reshape(shape)


def grouped_rotate(
    x: np.ndarray, block: HadamardMatrix, normalized: bool = False
) -> np.ndarray:
    """Apply ``block`` to consecutive chunks of the last axis.

    Each length-``block.order`` chunk ``c`` becomes ``block @ c``; the fast
    path is used when the block order is a power of two.
    """
    x = np.asarray(x, dtype=np.float64)
    n = x.shape[-1]
    g = block.order
    if n == 0 or n % g:
        raise ShapeError(f"length {n} is not divisible by block order {g}")
    chunks = x.reshape(x.shape[:-1] + (n // g, g))
    if g & (g - 1) == 0:
        out = fht(chunks, normalized=normalized)
    else:
        out = chunks @ block.entries.astype(np.float64).T
        if normalized:
            out = out / math.sqrt(g)
    return out.reshape(x.shape)
