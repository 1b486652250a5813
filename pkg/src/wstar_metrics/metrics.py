"""Monotone metrics in trace form and GNS form, Fisher-Rao, and Gram matrices."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .algebra import AlgebraSignature, _check_same, gns_inner, is_hermitian, trace_pair
from .errors import NotFaithful, NotTangent, NotTangentCoordinate, UnvalidatedFunction
from .funcalc import MonotoneFunction, apply_F, morozova_chentsov
from .states import FaithfulState, tangent_basis

PAIRING_TOL = 1e-8


def _require_validated(f: MonotoneFunction, allow_unvalidated: bool):
    if not (f.validated or allow_unvalidated):
        raise UnvalidatedFunction(f"{f.name} has not passed the symmetry and monotonicity gates")


def metric_trace_form(f: MonotoneFunction, rho: FaithfulState, a, b, allow_unvalidated: bool = False) -> float:
    """Tr(a K^-1(b)) with K = f(L R^-1) R, evaluated in the eigenbasis of rho."""
    _require_validated(f, allow_unvalidated)
    _check_same(rho, a, b)
    total = 0.0
    for lam, at, bt in zip(rho.eigvals, rho.to_eigenbasis(a), rho.to_eigenbasis(b)):
        # Tr(A X) = sum_ij A_ji X_ij
        total += np.sum(at.T * morozova_chentsov(f, lam) * bt)
    return float(np.real(total))


def gns_pairing(f: MonotoneFunction, rho: FaithfulState, v, w, allow_unvalidated: bool = False) -> complex:
    """<v | F(Delta) w>_rho, imaginary part included."""
    _require_validated(f, allow_unvalidated)
    return gns_inner(rho, v, apply_F(f, rho, w))


def metric_gns_form(f: MonotoneFunction, rho: FaithfulState, v, w, allow_unvalidated: bool = False) -> float:
    """Metric in anticommutator coordinates v, w through the GNS product.

    Equals ``Tr(rho {v, F(Delta) w}) / 2``, i.e. half the real part of
    ``<v | F(Delta) w>_rho``; with this normalization it agrees with
    :func:`metric_trace_form` at ``a = {rho, v}``, ``b = {rho, w}``.
    """
    _check_same(rho, v, w)
    for name, x in (("v", v), ("w", w)):
        if not is_hermitian(x, 1e-10 * max(1.0, max(float(np.max(np.abs(b))) for b in x.blocks))):
            raise NotTangentCoordinate(f"{name} is not self-adjoint")
        pairing = abs(trace_pair(x, rho))
        if pairing > PAIRING_TOL:
            raise NotTangentCoordinate(f"rho({name}) = {pairing:.3e}, expected 0")
    return 0.5 * float(np.real(gns_pairing(f, rho, v, w, allow_unvalidated)))


def fisher_rao(p, u, w) -> float:
    """sum_j u_j w_j / p_j on the open simplex."""
    p = np.asarray(p, dtype=float)
    u = np.asarray(u, dtype=float)
    w = np.asarray(w, dtype=float)
    if np.any(p <= 0):
        raise NotFaithful("p must lie in the open simplex")
    if abs(u.sum()) > 1e-10 or abs(w.sum()) > 1e-10:
        raise NotTangent("tangent vectors of the simplex must sum to zero")
    return float(np.sum(u * w / p))


def fisher_rao_gram(p, vectors) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    v = np.asarray(vectors, dtype=float)
    return (v / p) @ v.T


@dataclass
class GramReport:
    signature: AlgebraSignature
    function: str
    gram: np.ndarray
    value_at_one: float = 1.0
    state_seed: int | None = None
    min_eig: float = field(init=False)

    def __post_init__(self):
        self.gram = np.asarray(self.gram, dtype=float)
        if self.gram.size:
            sym = 0.5 * (self.gram + self.gram.T)
            self.min_eig = float(np.linalg.eigvalsh(sym)[0])
        else:
            self.min_eig = float("nan")

    @property
    def basis_size(self) -> int:
        return int(self.gram.shape[0])

    def to_json(self) -> dict:
        doc = {
            "signature": list(self.signature.block_dims),
            "f": self.function,
            "f_at_one": self.value_at_one,
            "basis_size": self.basis_size,
            "gram": self.gram.ravel().tolist(),
            "min_eig": None if np.isnan(self.min_eig) else self.min_eig,
        }
        if self.state_seed is not None:
            doc["state_seed"] = self.state_seed
        return doc


def gram_matrix(f: MonotoneFunction, rho: FaithfulState, vectors: Sequence, allow_unvalidated: bool = False) -> np.ndarray:
    """Matrix of metric_trace_form over all pairs of ``vectors``.

    Vectorized over pairs; each entry is an independent contraction, so the
    result does not depend on evaluation order.
    """
    _require_validated(f, allow_unvalidated)
    m = len(vectors)
    if m == 0:
        return np.zeros((0, 0))
    rows = []
    weights = []
    for k, lam in enumerate(rho.eigvals):
        u = rho.eigvecs[k]
        stacked = np.stack([np.asarray(vec.blocks[k]) for vec in vectors])
        rows.append((u.conj().T @ stacked @ u).reshape(m, -1))
        weights.append(morozova_chentsov(f, lam).ravel())
    a = np.concatenate(rows, axis=1)
    c = np.concatenate(weights)
    # vectors are Hermitian, so A_ji = conj(A_ij)
    return np.real(a.conj() @ (c * a).T)


def gram(f: MonotoneFunction, rho: FaithfulState, basis=None, state_seed=None, allow_unvalidated: bool = False) -> GramReport:
    if basis is None:
        basis = tangent_basis(rho.signature)
    g = gram_matrix(f, rho, basis, allow_unvalidated)
    return GramReport(rho.signature, f.name, g, f.value_at_one, state_seed)
