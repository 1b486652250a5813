"""Completely positive trace-preserving maps between direct-sum algebras.

A channel is stored in the Schroedinger picture. The component for the pair
(source block k, target block l) is a list of Kraus matrices of shape
``(n_l, n_k)``; the image of a state is
``sigma_l = sum_k sum_a K_kla rho_k K_kla^dagger``. The Heisenberg dual is the
unital CP map that the metric monotonicity problem is phrased in terms of.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .algebra import AlgebraElement, AlgebraSignature
from .errors import (
    DegenerateDraw,
    InvalidPartition,
    InvalidWeights,
    NotFaithful,
    NotFaithfulImage,
    NotStochastic,
    NotTracePreserving,
    NotUnitary,
    ShapeMismatch,
    SignatureMismatch,
    WStarError,
)
from .states import DEFAULT_FLOOR, FaithfulState, TangentVector, _decode_blocks, _encode_blocks, maximally_mixed

TP_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class Channel:
    source: AlgebraSignature
    target: AlgebraSignature
    components: Mapping[tuple[int, int], tuple[np.ndarray, ...]]
    label: str = ""

    def kraus(self, k: int, l: int) -> tuple[np.ndarray, ...]:
        return self.components.get((k, l), ())

    def tp_deviation(self) -> float:
        worst = 0.0
        for k, n in enumerate(self.source.block_dims):
            m = np.zeros((n, n), dtype=complex)
            for l in range(self.target.num_blocks):
                for K in self.kraus(k, l):
                    m += K.conj().T @ K
            worst = max(worst, float(np.max(np.abs(m - np.eye(n)))))
        return worst

    def describe(self) -> str:
        counts = {kl: len(ks) for kl, ks in self.components.items() if ks}
        name = f"{self.label} " if self.label else ""
        return f"{name}[{self.source}]->[{self.target}] kraus={sorted(counts.items())}"

    def to_json(self) -> dict:
        return channel_to_json(self)


def make_channel(source, target, components, label: str = "", tol: float = TP_TOL) -> Channel:
    """Validate shapes and trace preservation and freeze the Kraus data."""
    source = AlgebraSignature.parse(source)
    target = AlgebraSignature.parse(target)
    frozen = {}
    for (k, l), kraus in dict(components).items():
        k, l = int(k), int(l)
        if not (0 <= k < source.num_blocks and 0 <= l < target.num_blocks):
            raise ShapeMismatch(f"component ({k}, {l}) outside block ranges")
        mats = []
        for K in kraus:
            K = np.array(K, dtype=complex)
            if K.ndim == 0:
                K = K.reshape(1, 1)
            shape = (target.block_dims[l], source.block_dims[k])
            if K.shape != shape:
                raise ShapeMismatch(f"Kraus matrix for ({k}, {l}) has shape {K.shape}, expected {shape}")
            if not np.all(np.isfinite(K)):
                raise WStarError("Kraus matrix contains NaN or Inf")
            K.setflags(write=False)
            mats.append(K)
        if mats:
            frozen[(k, l)] = tuple(mats)
    ch = Channel(source, target, frozen, label)
    dev = ch.tp_deviation()
    if dev > tol:
        raise NotTracePreserving(f"sum of K^dagger K deviates from identity by {dev:.3e}", dev)
    return ch


def _push_blocks(ch: Channel, blocks) -> list[np.ndarray]:
    out = [np.zeros((n, n), dtype=complex) for n in ch.target.block_dims]
    for (k, l), kraus in ch.components.items():
        x = blocks[k]
        for K in kraus:
            out[l] += K @ x @ K.conj().T
    return out


def apply(ch: Channel, x):
    """Push a state, tangent vector or algebra element forward through ``ch``.

    States come back as plain algebra elements; use :func:`push_state` to get
    a validated faithful state.
    """
    if x.signature != ch.source:
        raise SignatureMismatch(f"channel source [{ch.source}] does not match [{x.signature}]")
    blocks = _push_blocks(ch, x.blocks)
    if isinstance(x, TangentVector):
        blocks = [0.5 * (b + b.conj().T) for b in blocks]
        return TangentVector(ch.target, blocks)
    return AlgebraElement(ch.target, blocks)


def push_state(ch: Channel, rho: FaithfulState, floor: float = DEFAULT_FLOOR) -> FaithfulState:
    image = apply(ch, rho)
    blocks = [0.5 * (b + b.conj().T) for b in image.blocks]
    total = sum(np.trace(b).real for b in blocks)
    try:
        return FaithfulState(ch.target, [b / total for b in blocks], floor=floor)
    except NotFaithful as exc:
        raise NotFaithfulImage(f"{ch.describe()} is not faithful at this state: {exc}") from None


def heisenberg_dual(ch: Channel, x) -> AlgebraElement:
    """Unital CP map on the target algebra dual to ``ch``."""
    if x.signature != ch.target:
        raise SignatureMismatch(f"channel target [{ch.target}] does not match [{x.signature}]")
    out = [np.zeros((n, n), dtype=complex) for n in ch.source.block_dims]
    for (k, l), kraus in ch.components.items():
        for K in kraus:
            out[k] += K.conj().T @ x.blocks[l] @ K
    return AlgebraElement(ch.source, out)


def is_faithful(ch: Channel, floor: float = DEFAULT_FLOOR) -> bool:
    """Faithfulness decided at the maximally mixed state.

    Any faithful sigma dominates a multiple of the maximally mixed state, so
    a faithful image there implies a faithful image everywhere.
    """
    image = apply(ch, maximally_mixed(ch.source))
    lam = min(np.linalg.eigvalsh(0.5 * (b + b.conj().T))[0] for b in image.blocks)
    return bool(lam > floor)


def compose(second: Channel, first: Channel) -> Channel:
    """The channel ``second o first``."""
    if first.target != second.source:
        raise SignatureMismatch("composition needs matching middle signature")
    comps: dict[tuple[int, int], list] = {}
    for (k, m), k1 in first.components.items():
        for (m2, l), k2 in second.components.items():
            if m2 != m:
                continue
            comps.setdefault((k, l), []).extend(B @ A for A in k1 for B in k2)
    return make_channel(first.source, second.target, comps, label="composite")


def identity_channel(sig) -> Channel:
    sig = AlgebraSignature.parse(sig)
    return make_channel(sig, sig, {(i, i): [np.eye(n)] for i, n in enumerate(sig.block_dims)}, label="identity")


def unitary_channel(U) -> Channel:
    U = np.asarray(U, dtype=complex)
    _check_unitary(U)
    n = U.shape[0]
    return make_channel((n,), (n,), {(0, 0): [U]}, label="unitary")


def depolarizing_channel(n: int, p: float) -> Channel:
    """rho -> (1 - p) rho + p Tr(rho) I / n on a single block."""
    if not 0 <= p <= 1:
        raise WStarError("depolarizing weight must lie in [0, 1]")
    kraus = [np.sqrt(1 - p) * np.eye(n)]
    for i in range(n):
        for j in range(n):
            E = np.zeros((n, n))
            E[i, j] = np.sqrt(p / n)
            kraus.append(E)
    return make_channel((n,), (n,), {(0, 0): kraus}, label=f"depolarizing(p={p:g})")


def markov_channel(S) -> Channel:
    """Classical channel p -> S p for a column-stochastic matrix S."""
    S = np.asarray(S, dtype=float)
    if S.ndim != 2:
        raise NotStochastic("stochastic matrix must be two-dimensional")
    if np.any(S < 0):
        raise NotStochastic("stochastic matrix has negative entries")
    dev = float(np.max(np.abs(S.sum(axis=0) - 1.0)))
    if dev > 1e-12:
        raise NotStochastic(f"columns do not sum to one (deviation {dev:.3e})")
    m, n = S.shape
    comps = {(k, j): [np.array([[np.sqrt(S[j, k])]])] for k in range(n) for j in range(m) if S[j, k] > 0}
    return make_channel((1,) * n, (1,) * m, comps, label="markov")


def congruent_embedding_classical(groups: Sequence[Sequence[int]], weights) -> tuple[Channel, Channel]:
    """Classical congruent embedding and its left inverse.

    ``groups[i]`` lists the output coordinates fed by input coordinate ``i``;
    the cells must partition ``range(m)``. Output ``j`` in cell ``i`` receives
    ``weights[j] * p_i``. The left inverse sums each cell.
    """
    groups = [list(map(int, g)) for g in groups]
    flat = sorted(j for g in groups for j in g)
    m = len(flat)
    if any(len(g) == 0 for g in groups) or flat != list(range(m)):
        raise InvalidPartition(f"cells {groups} do not partition range({m})")
    q = np.asarray(weights, dtype=float)
    if q.shape != (m,):
        raise InvalidWeights(f"expected {m} weights, got shape {q.shape}")
    if np.any(q <= 0):
        raise InvalidWeights("weights must be strictly positive")
    n = len(groups)
    S = np.zeros((m, n))
    N = np.zeros((n, m))
    for i, g in enumerate(groups):
        total = q[g].sum()
        if abs(total - 1.0) > 1e-12:
            raise InvalidWeights(f"weights in cell {i} sum to {total!r}")
        S[g, i] = q[g]
        N[i, g] = 1.0
    S = S / S.sum(axis=0)
    embed, left = markov_channel(S), markov_channel(N)
    return (
        Channel(embed.source, embed.target, embed.components, "classical-embedding"),
        Channel(left.source, left.target, left.components, "cell-sum"),
    )


def _check_unitary(U, tol: float = 1e-10):
    if U.ndim != 2 or U.shape[0] != U.shape[1]:
        raise NotUnitary(f"expected a square matrix, got shape {U.shape}")
    dev = float(np.max(np.abs(U.conj().T @ U - np.eye(U.shape[0]))))
    if dev > tol:
        raise NotUnitary(f"U^dagger U deviates from identity by {dev:.3e}")


def congruent_embedding_quantum(U, sigma: FaithfulState) -> tuple[Channel, Channel]:
    """rho -> U (rho x sigma) U^dagger and its left inverse Tr_anc(U^dagger . U)."""
    if sigma.signature.num_blocks != 1:
        raise NotFaithful("ancilla state must live on a single full matrix block")
    U = np.asarray(U, dtype=complex)
    _check_unitary(U)
    d = sigma.signature.block_dims[0]
    if U.shape[0] % d:
        raise ShapeMismatch(f"unitary size {U.shape[0]} is not a multiple of ancilla dimension {d}")
    n = U.shape[0] // d
    mu, vecs = sigma.eigvals[0], sigma.eigvecs[0]
    eye = np.eye(n)
    embed_kraus = []
    for a in range(d):
        ket = vecs[:, a].reshape(d, 1)
        embed_kraus.append(np.sqrt(mu[a]) * U @ np.kron(eye, ket))
    embed = make_channel((n,), (n * d,), {(0, 0): embed_kraus}, label="quantum-embedding")
    return embed, partial_trace_channel(n, d, U)


def partial_trace_channel(n: int, d: int, U=None) -> Channel:
    """rho' -> Tr over the second factor of C^n x C^d of U^dagger rho' U."""
    U = np.eye(n * d) if U is None else np.asarray(U, dtype=complex)
    eye = np.eye(n)
    kraus = []
    for b in range(d):
        bra = np.zeros((1, d))
        bra[0, b] = 1.0
        kraus.append(np.kron(eye, bra) @ U.conj().T)
    return make_channel((n * d,), (n,), {(0, 0): kraus}, label="partial-trace")


def min_kraus_count(source, target) -> int:
    """Fewest Kraus operators per block pair for which a trace-preserving
    channel between the signatures exists (sum K^dagger K needs full rank)."""
    source = AlgebraSignature.parse(source)
    target = AlgebraSignature.parse(target)
    need = 1
    for n in source.block_dims:
        reach = sum(min(n, m) for m in target.block_dims)
        need = max(need, -(-n // reach))
    return need


def random_channel(source, target, kraus_count: int, seed=None, max_redraws: int = 100) -> Channel:
    """Gaussian block Kraus draw, right-normalized to be trace preserving.

    Every (source block, target block) pair gets ``kraus_count`` candidates
    ``K``; each source block's candidates are multiplied on the right by
    ``M_k^{-1/2}`` where ``M_k = sum K^dagger K``.
    """
    source = AlgebraSignature.parse(source)
    target = AlgebraSignature.parse(target)
    if kraus_count < 1:
        raise WStarError("kraus_count must be >= 1")
    if kraus_count < min_kraus_count(source, target):
        raise DegenerateDraw(
            f"[{source}]->[{target}] needs at least {min_kraus_count(source, target)} Kraus operators per block pair"
        )
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    comps = {}
    for k, n in enumerate(source.block_dims):
        for _ in range(max_redraws):
            draws = {}
            M = np.zeros((n, n), dtype=complex)
            for l, m in enumerate(target.block_dims):
                ks = [rng.standard_normal((m, n)) + 1j * rng.standard_normal((m, n)) for _ in range(kraus_count)]
                draws[l] = ks
                for K in ks:
                    M += K.conj().T @ K
            w, u = np.linalg.eigh(0.5 * (M + M.conj().T))
            if w[0] > 1e-12:
                break
        else:
            raise DegenerateDraw(f"could not draw a normalizable Kraus family for source block {k}")
        inv_sqrt = (u / np.sqrt(w)) @ u.conj().T
        for l, ks in draws.items():
            comps[(k, l)] = [K @ inv_sqrt for K in ks]
    return make_channel(source, target, comps, label="random")


def kraus_to_superop(kraus, n_in: int, n_out: int) -> np.ndarray:
    """Row-major vectorized superoperator: vec(K X K^dagger) = (K kron conj K) vec(X)."""
    S = np.zeros((n_out * n_out, n_in * n_in), dtype=complex)
    for K in kraus:
        S += np.kron(K, K.conj())
    return S


def superop_to_choi(S: np.ndarray, n_in: int, n_out: int) -> np.ndarray:
    """Choi matrix sum_ij |i><j| x Phi(|i><j|)."""
    choi = np.zeros((n_in * n_out, n_in * n_out), dtype=complex)
    for i in range(n_in):
        for j in range(n_in):
            E = np.zeros((n_in, n_in))
            E[i, j] = 1.0
            out = (S @ E.ravel()).reshape(n_out, n_out)
            choi[i * n_out:(i + 1) * n_out, j * n_out:(j + 1) * n_out] = out
    return choi


def is_completely_positive(S: np.ndarray, n_in: int, n_out: int, tol: float = 1e-9) -> bool:
    """Choi certificate for a map given as a row-major superoperator matrix."""
    choi = superop_to_choi(np.asarray(S, dtype=complex), n_in, n_out)
    if np.max(np.abs(choi - choi.conj().T)) > tol:
        return False
    return bool(np.linalg.eigvalsh(0.5 * (choi + choi.conj().T))[0] >= -tol)


def component_superops(ch: Channel) -> dict[tuple[int, int], np.ndarray]:
    return {
        (k, l): kraus_to_superop(ks, ch.source.block_dims[k], ch.target.block_dims[l])
        for (k, l), ks in ch.components.items()
    }


def channel_to_json(ch: Channel) -> dict:
    return {
        "source": list(ch.source.block_dims),
        "target": list(ch.target.block_dims),
        "components": [
            {"k": k, "l": l, "kraus": _encode_blocks(ks)} for (k, l), ks in sorted(ch.components.items())
        ],
    }


def channel_from_json(doc) -> Channel:
    if isinstance(doc, (str, bytes)):
        doc = json.loads(doc)
    try:
        comps = {(int(c["k"]), int(c["l"])): _decode_blocks(c["kraus"]) for c in doc["components"]}
        return make_channel(doc["source"], doc["target"], comps)
    except (KeyError, TypeError) as exc:
        raise WStarError("channel document needs source, target and components") from exc

