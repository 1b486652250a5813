"""Faithful normal states, tangent vectors and the anticommutator coordinates."""

from __future__ import annotations

import json
from typing import Sequence

import numpy as np

from .algebra import AlgebraElement, AlgebraSignature, _as_blocks, _check_same
from .errors import (
    NotFaithful,
    NotHermitian,
    NotNormalized,
    NotTangent,
    ShapeMismatch,
    WStarError,
)

DEFAULT_FLOOR = 1e-9
HERMITIAN_TOL = 1e-10
NORMALIZATION_TOL = 1e-9
TANGENT_TRACE_TOL = 1e-12


def _hermitian_blocks(signature, blocks, tol):
    raw = _as_blocks(signature, blocks)
    out = []
    for b in raw:
        dev = float(np.max(np.abs(b - b.conj().T)))
        if dev > tol:
            raise NotHermitian(f"block deviates from its adjoint by {dev:.3e} (tol {tol:g})")
        h = 0.5 * (b + b.conj().T)
        h.setflags(write=False)
        out.append(h)
    return tuple(out)


class FaithfulState:
    """Strictly positive block density tuple with unit total trace.

    Per-block eigenvalues (descending) and eigenvectors are computed once at
    construction; all spectral calculus downstream reuses them.
    """

    __slots__ = ("signature", "blocks", "eigvals", "eigvecs")

    def __init__(self, signature, blocks, floor: float = DEFAULT_FLOOR):
        signature = AlgebraSignature.parse(signature)
        blocks = list(blocks)
        if len(blocks) != signature.num_blocks:
            raise ShapeMismatch(f"expected {signature.num_blocks} blocks, got {len(blocks)}")
        self.signature = signature
        self.blocks = _hermitian_blocks(signature, blocks, HERMITIAN_TOL)
        total = sum(float(np.trace(b).real) for b in self.blocks)
        if abs(total - 1.0) > NORMALIZATION_TOL:
            raise NotNormalized(f"total trace is {total!r}, expected 1")
        eigvals, eigvecs = [], []
        for b in self.blocks:
            w, u = np.linalg.eigh(b)
            w, u = w[::-1].copy(), u[:, ::-1].copy()
            w.setflags(write=False)
            u.setflags(write=False)
            eigvals.append(w)
            eigvecs.append(u)
        lam_min = min(float(w[-1]) for w in eigvals)
        if lam_min <= floor:
            raise NotFaithful(f"minimum eigenvalue {lam_min:.3e} is not above the faithfulness floor {floor:g}")
        self.eigvals = tuple(eigvals)
        self.eigvecs = tuple(eigvecs)

    def __repr__(self) -> str:
        return f"FaithfulState(signature=[{self.signature}], eigvals={[w.tolist() for w in self.eigvals]})"

    @property
    def min_eigenvalue(self) -> float:
        return min(float(w[-1]) for w in self.eigvals)

    def to_eigenbasis(self, x) -> list[np.ndarray]:
        """Blocks of ``x`` expressed in this state's eigenbasis, U^dagger x U."""
        _check_same(self, x)
        return [u.conj().T @ b @ u for u, b in zip(self.eigvecs, x.blocks)]

    def from_eigenbasis(self, blocks) -> list[np.ndarray]:
        return [u @ b @ u.conj().T for u, b in zip(self.eigvecs, blocks)]

    def to_json(self) -> dict:
        return state_to_json(self)


class TangentVector:
    """Self-adjoint block tuple with zero total trace."""

    __slots__ = ("signature", "blocks")

    def __init__(self, signature, blocks, tol: float = TANGENT_TRACE_TOL):
        signature = AlgebraSignature.parse(signature)
        blocks = list(blocks)
        if len(blocks) != signature.num_blocks:
            raise ShapeMismatch(f"expected {signature.num_blocks} blocks, got {len(blocks)}")
        self.signature = signature
        self.blocks = _hermitian_blocks(signature, blocks, HERMITIAN_TOL * max(1.0, _max_abs(blocks)))
        total = sum(np.trace(b).real for b in self.blocks)
        scale = max(1.0, float(np.sqrt(sum(np.sum(np.abs(b) ** 2) for b in self.blocks))))
        if abs(total) > tol * scale:
            raise NotTangent(f"total trace {total:.3e} is not zero")

    def __repr__(self) -> str:
        return f"TangentVector(signature=[{self.signature}], blocks={[b.tolist() for b in self.blocks]})"

    def __add__(self, other):
        _check_same(self, other)
        return TangentVector(self.signature, [a + b for a, b in zip(self.blocks, other.blocks)])

    def __mul__(self, scalar: float):
        return TangentVector(self.signature, [float(scalar) * b for b in self.blocks])

    __rmul__ = __mul__


def _max_abs(blocks) -> float:
    return max(float(np.max(np.abs(np.asarray(b, dtype=complex)))) for b in blocks)


def make_state(sig, blocks, floor: float = DEFAULT_FLOOR) -> FaithfulState:
    return FaithfulState(sig, blocks, floor=floor)


def from_probability_vector(p: Sequence[float], floor: float = DEFAULT_FLOOR) -> FaithfulState:
    """Interior point of the probability simplex as a state on a commutative algebra."""
    p = np.asarray(p, dtype=float).ravel()
    if p.size == 0:
        raise WStarError("probability vector is empty")
    if np.any(p <= 0):
        raise NotFaithful(f"probability vector has non-positive entries: {p.tolist()}")
    return FaithfulState((1,) * p.size, [[[x]] for x in p], floor=floor)


def maximally_mixed(sig) -> FaithfulState:
    sig = AlgebraSignature.parse(sig)
    size = sig.matrix_size
    return FaithfulState(sig, [np.eye(n) / size for n in sig.block_dims])


def _rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def random_faithful_state(sig, seed=None, floor: float = DEFAULT_FLOOR) -> FaithfulState:
    """Sample G G^dagger per block, normalize, then mix in the identity just enough
    that the smallest eigenvalue is at least ``floor``."""
    sig = AlgebraSignature.parse(sig)
    size = sig.matrix_size
    if not 0 < floor < 1.0 / size:
        raise WStarError(f"floor must lie in (0, 1/{size})")
    rng = _rng(seed)
    blocks = []
    for n in sig.block_dims:
        g = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        blocks.append(g @ g.conj().T)
    total = sum(np.trace(b).real for b in blocks)
    blocks = [b / total for b in blocks]
    mu = min(np.linalg.eigvalsh(b)[0] for b in blocks)
    # smallest weight s with (1-s)*mu + s/size >= floor; a hair of margin
    # keeps the strict floor comparison in FaithfulState satisfied
    target = floor * (1 + 1e-6)
    s = 0.0 if mu >= target else (target - mu) / (1.0 / size - mu)
    blocks = [(1 - s) * b + s * np.eye(n) / size for b, n in zip(blocks, sig.block_dims)]
    total = sum(np.trace(b).real for b in blocks)
    return FaithfulState(sig, [b / total for b in blocks], floor=floor)


def _gell_mann(n: int) -> list[np.ndarray]:
    """Traceless Hermitian basis of M_n, orthonormal under Tr(uw)."""
    out = []
    r2 = np.sqrt(2.0)
    for j in range(n):
        for k in range(j + 1, n):
            s = np.zeros((n, n), dtype=complex)
            s[j, k] = s[k, j] = 1 / r2
            a = np.zeros((n, n), dtype=complex)
            a[j, k] = -1j / r2
            a[k, j] = 1j / r2
            out.extend([s, a])
    for l in range(1, n):
        d = np.zeros((n, n), dtype=complex)
        d[np.arange(l), np.arange(l)] = 1.0
        d[l, l] = -l
        out.append(d / np.sqrt(l * (l + 1)))
    return out


def tangent_basis(sig) -> list[TangentVector]:
    """Orthonormal basis of the traceless self-adjoint part of the algebra.

    Generalized Gell-Mann matrices block by block come first, followed by
    ``k - 1`` block-scalar directions that move weight between blocks.
    """
    sig = AlgebraSignature.parse(sig)
    dims = sig.block_dims
    zero = [np.zeros((n, n), dtype=complex) for n in dims]
    basis = []
    for i, n in enumerate(dims):
        for g in _gell_mann(n):
            blocks = list(zero)
            blocks[i] = g
            basis.append(TangentVector(sig, blocks))
    s = np.sqrt(np.asarray(dims, dtype=float))
    for m in range(1, len(dims)):
        d = np.zeros(len(dims))
        d[:m] = s[:m] * s[m]
        d[m] = -np.sum(s[:m] ** 2)
        d /= np.linalg.norm(d)
        blocks = [d[i] * np.eye(n) / s[i] for i, n in enumerate(dims)]
        basis.append(TangentVector(sig, blocks))
    return basis


def anticommutator_solve(rho: FaithfulState, a) -> AlgebraElement:
    """The self-adjoint v with (rho v + v rho)/2 = a."""
    _check_same(rho, a)
    out = []
    for w, b in zip(rho.eigvals, rho.to_eigenbasis(a)):
        out.append(2.0 * b / (w[:, None] + w[None, :]))
    return AlgebraElement(rho.signature, rho.from_eigenbasis(out))


def anticommutator(rho: FaithfulState, v) -> AlgebraElement:
    """Jordan product {rho, v} = (rho v + v rho)/2."""
    _check_same(rho, v)
    return AlgebraElement(rho.signature, [0.5 * (r @ b + b @ r) for r, b in zip(rho.blocks, v.blocks)])


def random_tangent(sig, seed=None) -> TangentVector:
    """Gaussian combination of the orthonormal tangent basis."""
    rng = _rng(seed)
    basis = tangent_basis(sig)
    coeffs = rng.standard_normal(len(basis))
    sig = AlgebraSignature.parse(sig)
    blocks = [np.zeros((n, n), dtype=complex) for n in sig.block_dims]
    for c, t in zip(coeffs, basis):
        for i, b in enumerate(t.blocks):
            blocks[i] = blocks[i] + c * b
    return TangentVector(sig, blocks)


def _encode_blocks(blocks) -> list:
    return [[[[float(z.real), float(z.imag)] for z in row] for row in b] for b in blocks]


def _decode_blocks(raw) -> list[np.ndarray]:
    out = []
    for b in raw:
        arr = np.asarray(b, dtype=float)
        if arr.ndim != 3 or arr.shape[-1] != 2:
            raise WStarError("matrix entries must be [re, im] pairs")
        out.append(arr[..., 0] + 1j * arr[..., 1])
    return out


def state_to_json(rho: FaithfulState) -> dict:
    return {"signature": list(rho.signature.block_dims), "blocks": _encode_blocks(rho.blocks)}


def state_from_json(doc, floor: float = DEFAULT_FLOOR) -> FaithfulState:
    if isinstance(doc, (str, bytes)):
        doc = json.loads(doc)
    if isinstance(doc, dict) and "probabilities" in doc:
        return from_probability_vector(doc["probabilities"], floor=floor)
    try:
        sig, blocks = doc["signature"], doc["blocks"]
    except (KeyError, TypeError) as exc:
        raise WStarError("state document needs 'signature' and 'blocks'") from exc
    return FaithfulState(sig, _decode_blocks(blocks), floor=floor)
