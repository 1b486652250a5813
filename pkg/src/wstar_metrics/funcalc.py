"""Operator monotone functions and spectral calculus of the modular operator.

Every superoperator here is diagonal in the product eigenbasis of a faithful
state: writing ``b`` in the eigenbasis of ``rho`` with eigenvalues ``lam``,
the modular operator ``Delta(b) = rho b rho^-1`` multiplies entry ``(i, j)``
by ``lam_i / lam_j``. Functions of it multiply by ``g(lam_i / lam_j)``.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable

import numpy as np

from .algebra import AlgebraElement, _check_same
from .errors import SingularFunction, UnvalidatedFunction, WStarError

ONE_SWITCH = 1e-12
KMB_SERIES_SWITCH = 1e-6

SYMMETRY_GATE = 1e-10
MONOTONE_GATE = -1e-8
DEFAULT_GRID = np.logspace(-3, 3, 61)


@dataclass(frozen=True)
class MonotoneFunction:
    """A candidate parameter function for the monotone metric family.

    ``value_at_one`` is substituted whenever ``|t - 1| < 1e-12`` so removable
    singularities at ``t = 1`` are harmless. ``validated`` is set only by
    :func:`admit` or for shipped catalog entries.
    """

    name: str
    eval: Callable[[np.ndarray], np.ndarray]
    value_at_one: float
    formula: str = ""
    validated: bool = False

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        out = np.asarray(self.eval(t), dtype=float)
        return np.where(np.abs(t - 1.0) < ONE_SWITCH, self.value_at_one, out)


def _sld(t):
    return (1.0 + t) / 2.0


def _rld(t):
    return 2.0 * t / (1.0 + t)


def _kmb(t):
    t = np.asarray(t, dtype=float)
    d = t - 1.0
    near = np.abs(d) < KMB_SERIES_SWITCH
    safe = np.where(near, 2.0, t)
    with np.errstate(divide="ignore", invalid="ignore"):
        exact = (safe - 1.0) / np.log(safe)
    return np.where(near, 1.0 + d / 2.0, exact)


def _wigner_yanase(t):
    return ((1.0 + np.sqrt(t)) / 2.0) ** 2


def _geometric(t):
    return np.sqrt(t)


def _square(t):
    return np.asarray(t, dtype=float) ** 2


def _identity(t):
    return np.asarray(t, dtype=float)


def _one(t):
    return np.ones_like(np.asarray(t, dtype=float))


SLD = MonotoneFunction("sld", _sld, 1.0, "(1+t)/2", validated=True)
RLD = MonotoneFunction("rld", _rld, 1.0, "2t/(1+t)", validated=True)
KMB = MonotoneFunction("kmb", _kmb, 1.0, "(t-1)/ln t", validated=True)
WIGNER_YANASE = MonotoneFunction("wy", _wigner_yanase, 1.0, "((1+sqrt t)/2)^2", validated=True)
GEOMETRIC = MonotoneFunction("geometric", _geometric, 1.0, "sqrt t", validated=True)

CATALOG: dict[str, MonotoneFunction] = {f.name: f for f in (SLD, RLD, KMB, WIGNER_YANASE, GEOMETRIC)}

# helpers and negative controls, never admitted into the catalog
IDENTITY_FN = MonotoneFunction("identity", _identity, 1.0, "t")
CONSTANT_ONE = MonotoneFunction("one", _one, 1.0, "1")
SQUARE_PROBE = MonotoneFunction("square", _square, 1.0, "t^2")


def get_function(name: str) -> MonotoneFunction:
    try:
        return CATALOG[name.lower()]
    except KeyError:
        raise WStarError(f"unknown monotone function {name!r}; choose from {sorted(CATALOG)}") from None


def resolve_functions(spec: str) -> list[MonotoneFunction]:
    """Parse ``"all"`` or a comma-separated list of catalog names."""
    if spec.strip().lower() == "all":
        return list(CATALOG.values())
    return [get_function(p.strip()) for p in spec.split(",") if p.strip()]


def catalog_listing() -> list[dict]:
    return [{"name": f.name, "formula": f.formula, "f(1)": f.value_at_one} for f in CATALOG.values()]


def ratio_matrix(lam: np.ndarray) -> np.ndarray:
    """Entry (i, j) is lam_i / lam_j."""
    return lam[:, None] / lam[None, :]


def _scale(rho, b, weight) -> AlgebraElement:
    _check_same(rho, b)
    out = []
    for lam, blk in zip(rho.eigvals, rho.to_eigenbasis(b)):
        out.append(weight(lam) * blk)
    return AlgebraElement(rho.signature, rho.from_eigenbasis(out))


def apply_left(rho, b) -> AlgebraElement:
    _check_same(rho, b)
    return AlgebraElement(rho.signature, [r @ x for r, x in zip(rho.blocks, b.blocks)])


def apply_right(rho, b) -> AlgebraElement:
    _check_same(rho, b)
    return AlgebraElement(rho.signature, [x @ r for r, x in zip(rho.blocks, b.blocks)])


def apply_modular(rho, b) -> AlgebraElement:
    """rho b rho^-1, computed in the eigenbasis of rho."""
    return _scale(rho, b, ratio_matrix)


def apply_modular_inverse(rho, b) -> AlgebraElement:
    return _scale(rho, b, lambda lam: ratio_matrix(lam).T)


def apply_f_of_modular(f: MonotoneFunction, rho, b) -> AlgebraElement:
    return _scale(rho, b, lambda lam: f(ratio_matrix(lam)))


def F_weights(f: MonotoneFunction, lam: np.ndarray) -> np.ndarray:
    """Eigenbasis weights (t + 1) / f(t) of F(Delta) at t = lam_i / lam_j."""
    t = ratio_matrix(lam)
    ft = f(t)
    if np.any(~np.isfinite(ft)) or np.any(ft <= 0):
        raise SingularFunction(f"{f.name} is not strictly positive on the modular spectrum")
    return (t + 1.0) / ft


def apply_F(f: MonotoneFunction, rho, w) -> AlgebraElement:
    """F(Delta) = f(Delta)^-1 (Delta + 1)."""
    return _scale(rho, w, lambda lam: F_weights(f, lam))


def morozova_chentsov(f: MonotoneFunction, lam: np.ndarray) -> np.ndarray:
    """Eigenbasis weights 1 / (lam_j f(lam_i / lam_j)) of the inverse of f(L R^-1) R."""
    ft = f(ratio_matrix(lam))
    if np.any(~np.isfinite(ft)) or np.any(ft <= 0):
        raise SingularFunction(f"{f.name} is not strictly positive on the modular spectrum")
    return 1.0 / (lam[None, :] * ft)


def check_symmetry(f: MonotoneFunction, grid=DEFAULT_GRID) -> float:
    """Largest |f(t) - t f(1/t)| over the grid."""
    t = np.asarray(grid, dtype=float)
    if np.any(t <= 0):
        raise WStarError("symmetry grid must lie in (0, inf)")
    return float(np.max(np.abs(f(t) - t * f(1.0 / t))))


def matrix_function(f: MonotoneFunction, a: np.ndarray) -> np.ndarray:
    """f applied to a Hermitian positive matrix via its eigendecomposition."""
    w, u = np.linalg.eigh(a)
    return (u * f(w)) @ u.conj().T


def _random_positive(rng, dim):
    g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    return g @ g.conj().T + 1e-3 * np.eye(dim)


def check_operator_monotone_sample(f: MonotoneFunction, dim: int = 4, trials: int = 200, seed=0) -> float:
    """Smallest eigenvalue of f(B) - f(A) over random pairs 0 < A <= B.

    A negative return value is a certificate that ``f`` is not operator
    monotone; a non-negative one is only evidence.
    """
    if dim > 6:
        raise WStarError("sampler supports dim <= 6")
    rng = np.random.default_rng(seed)
    worst = np.inf
    for _ in range(trials):
        a = _random_positive(rng, dim)
        # wide spread in the increment's scale exercises both regimes
        b = a + _random_positive(rng, dim) * 10.0 ** rng.uniform(-2, 1)
        diff = matrix_function(f, b) - matrix_function(f, a)
        worst = min(worst, float(np.linalg.eigvalsh(0.5 * (diff + diff.conj().T))[0]))
    return worst


def admit(f: MonotoneFunction, grid=DEFAULT_GRID, seed=0) -> MonotoneFunction:
    """Gate a user-supplied function and return a validated copy."""
    defect = check_symmetry(f, grid)
    if not defect <= SYMMETRY_GATE:
        raise UnvalidatedFunction(f"{f.name} fails f(t) = t f(1/t): defect {defect:.3e}")
    worst = check_operator_monotone_sample(f, dim=4, trials=200, seed=seed)
    if not worst >= MONOTONE_GATE:
        raise UnvalidatedFunction(f"{f.name} is not operator monotone: min eigenvalue {worst:.3e}")
    return replace(f, validated=True)
