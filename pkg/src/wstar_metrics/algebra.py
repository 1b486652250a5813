"""Finite-dimensional W*-algebras realized as direct sums of matrix algebras.

An algebra with signature ``(n_1, ..., n_k)`` is ``M_{n_1}(C) + ... + M_{n_k}(C)``.
Elements are stored block by block, so the commutative algebra of functions
on ``n`` points is the signature ``(1,) * n`` and its elements are plain
vectors packed as 1x1 blocks.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import ShapeMismatch, SignatureMismatch, WStarError

DEFAULT_TOL = 1e-10


@dataclass(frozen=True)
class AlgebraSignature:
    block_dims: tuple[int, ...]

    def __post_init__(self):
        dims = tuple(int(n) for n in self.block_dims)
        if not dims:
            raise WStarError("signature needs at least one block")
        if any(n < 1 for n in dims):
            raise WStarError(f"block dimensions must be >= 1, got {dims}")
        object.__setattr__(self, "block_dims", dims)

    @classmethod
    def parse(cls, text: str | Sequence[int] | "AlgebraSignature") -> "AlgebraSignature":
        """Build a signature from ``"1,2"``, ``[1, 2]`` or an existing signature."""
        if isinstance(text, AlgebraSignature):
            return text
        if isinstance(text, str):
            parts = [p.strip() for p in text.split(",") if p.strip()]
            try:
                return cls(tuple(int(p) for p in parts))
            except ValueError as exc:
                raise WStarError(f"cannot parse signature {text!r}") from exc
        return cls(tuple(text))

    @property
    def num_blocks(self) -> int:
        return len(self.block_dims)

    @property
    def matrix_size(self) -> int:
        """Size of the block-diagonal matrix the algebra embeds into."""
        return sum(self.block_dims)

    @property
    def total_dim(self) -> int:
        return sum(n * n for n in self.block_dims)

    @property
    def tangent_dim(self) -> int:
        return self.total_dim - 1

    @property
    def is_commutative(self) -> bool:
        return all(n == 1 for n in self.block_dims)

    def __str__(self) -> str:
        return ",".join(str(n) for n in self.block_dims)


def _as_blocks(signature: AlgebraSignature, blocks: Iterable) -> tuple[np.ndarray, ...]:
    out = []
    for n, b in zip(signature.block_dims, blocks, strict=False):
        arr = np.array(b, dtype=complex)
        if arr.ndim == 0:
            arr = arr.reshape(1, 1)
        if arr.shape != (n, n):
            raise ShapeMismatch(f"block of shape {arr.shape} does not match dimension {n}")
        if not np.all(np.isfinite(arr)):
            raise WStarError("algebra element contains NaN or Inf entries")
        arr.setflags(write=False)
        out.append(arr)
    return tuple(out)


class AlgebraElement:
    """An element of a direct-sum matrix algebra, stored as per-block matrices."""

    __slots__ = ("signature", "blocks")

    def __init__(self, signature, blocks):
        signature = AlgebraSignature.parse(signature)
        blocks = list(blocks)
        if len(blocks) != signature.num_blocks:
            raise ShapeMismatch(
                f"expected {signature.num_blocks} blocks for signature {signature}, got {len(blocks)}"
            )
        self.signature = signature
        self.blocks = _as_blocks(signature, blocks)

    def __repr__(self) -> str:
        return f"{type(self).__name__}(signature=[{self.signature}], blocks={[b.tolist() for b in self.blocks]})"

    def __add__(self, other: "AlgebraElement") -> "AlgebraElement":
        _check_same(self, other)
        return AlgebraElement(self.signature, [a + b for a, b in zip(self.blocks, other.blocks)])

    def __sub__(self, other: "AlgebraElement") -> "AlgebraElement":
        _check_same(self, other)
        return AlgebraElement(self.signature, [a - b for a, b in zip(self.blocks, other.blocks)])

    def __mul__(self, scalar) -> "AlgebraElement":
        return AlgebraElement(self.signature, [scalar * b for b in self.blocks])

    __rmul__ = __mul__

    def __neg__(self) -> "AlgebraElement":
        return self * -1.0

    def to_dense(self) -> np.ndarray:
        """Embed as a block-diagonal matrix (used for diagnostics and oracles)."""
        size = self.signature.matrix_size
        out = np.zeros((size, size), dtype=complex)
        start = 0
        for b in self.blocks:
            n = b.shape[0]
            out[start:start + n, start:start + n] = b
            start += n
        return out

    def allclose(self, other: "AlgebraElement", atol: float = 1e-12) -> bool:
        if self.signature != other.signature:
            return False
        return all(np.allclose(a, b, rtol=0.0, atol=atol) for a, b in zip(self.blocks, other.blocks))


def _signature_of(x) -> AlgebraSignature:
    return x.signature


def _check_same(*elements) -> AlgebraSignature:
    sig = _signature_of(elements[0])
    for e in elements[1:]:
        if _signature_of(e) != sig:
            raise SignatureMismatch(f"signatures differ: [{sig}] vs [{_signature_of(e)}]")
    return sig


def as_element(x) -> AlgebraElement:
    """View a state or tangent vector as a plain algebra element."""
    if type(x) is AlgebraElement:
        return x
    return AlgebraElement(x.signature, x.blocks)


def identity(sig) -> AlgebraElement:
    sig = AlgebraSignature.parse(sig)
    return AlgebraElement(sig, [np.eye(n) for n in sig.block_dims])


def zeros(sig) -> AlgebraElement:
    sig = AlgebraSignature.parse(sig)
    return AlgebraElement(sig, [np.zeros((n, n)) for n in sig.block_dims])


def adjoint(x) -> AlgebraElement:
    return AlgebraElement(x.signature, [b.conj().T for b in x.blocks])


def multiply(x, y) -> AlgebraElement:
    sig = _check_same(x, y)
    return AlgebraElement(sig, [a @ b for a, b in zip(x.blocks, y.blocks)])


def is_hermitian(x, tol: float = DEFAULT_TOL) -> bool:
    return all(np.max(np.abs(b - b.conj().T)) <= tol for b in x.blocks)


def is_positive(x, tol: float = DEFAULT_TOL) -> bool:
    """True iff every block is Hermitian within ``tol`` with spectrum >= -tol."""
    if tol < 0:
        raise WStarError("tolerance must be non-negative")
    if not is_hermitian(x, tol):
        return False
    for b in x.blocks:
        h = 0.5 * (b + b.conj().T)
        if np.linalg.eigvalsh(h)[0] < -tol:
            return False
    return True


def trace_pair(x, rho) -> complex:
    """Trace duality between the algebra and its pre-dual: sum of Tr(x_i rho_i)."""
    _check_same(x, rho)
    # Tr(AB) = sum_ij A_ij B_ji
    return complex(sum(np.sum(a * b.T) for a, b in zip(x.blocks, rho.blocks)))


def hs_inner(x, y) -> complex:
    """Hilbert-Schmidt pairing sum of Tr(x_i^dagger y_i)."""
    _check_same(x, y)
    return complex(sum(np.vdot(a, b) for a, b in zip(x.blocks, y.blocks)))


def gns_inner(rho, x, y) -> complex:
    """GNS scalar product <x|y>_rho = rho(x^dagger y)."""
    _check_same(rho, x, y)
    return trace_pair(multiply(adjoint(x), y), rho)


def operator_norm(x) -> float:
    """C*-norm of a direct sum: the largest operator norm over the blocks."""
    return max(float(np.linalg.norm(b, 2)) for b in x.blocks)


def frobenius_norm(x) -> float:
    return float(np.sqrt(sum(np.sum(np.abs(b) ** 2) for b in x.blocks)))
