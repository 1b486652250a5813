"""Independent reference computations used only by the tests.

None of these reuse the eigenbasis weights of the library: they materialize
superoperators as dense matrices or call scipy solvers directly.
"""

import numpy as np
import scipy.linalg as sla


def vec(x):
    return np.asarray(x).reshape(-1)


def left_mult(rho):
    # row-major: vec(rho b) = (rho kron I) vec(b)
    return np.kron(rho, np.eye(rho.shape[0]))


def right_mult(rho):
    # row-major: vec(b rho) = (I kron rho^T) vec(b)
    return np.kron(np.eye(rho.shape[0]), rho.T)


def dense_K(f, rho):
    """f(L R^-1) R as an n^2 x n^2 matrix."""
    rho = np.asarray(rho, dtype=complex)
    modular = left_mult(rho) @ np.linalg.inv(right_mult(rho))
    modular = 0.5 * (modular + modular.conj().T)
    w, u = np.linalg.eigh(modular)
    return (u * f(w)) @ u.conj().T @ right_mult(rho)


def dense_trace_form(f, rho_blocks, a_blocks, b_blocks):
    """sum over blocks of Tr(a K^-1 b) via dense inversion of K."""
    total = 0.0
    for rho, a, b in zip(rho_blocks, a_blocks, b_blocks):
        n = rho.shape[0]
        x = np.linalg.solve(dense_K(f, rho), vec(b)).reshape(n, n)
        total += np.trace(np.asarray(a) @ x)
    return float(np.real(total))


def dense_modular(rho, b):
    return np.asarray(rho) @ np.asarray(b) @ np.linalg.inv(rho)


def sld_metric_sylvester(rho, a, b):
    """Tr(a L_b) where rho L_b + L_b rho = 2 b (scipy Sylvester solver)."""
    L = sla.solve_sylvester(rho, rho, 2 * np.asarray(b))
    return float(np.real(np.trace(np.asarray(a) @ L)))


def qubit_sld_closed_form(rho, a):
    """sum_ij 2 |a_ij|^2 / (lam_i + lam_j) in the eigenbasis of rho."""
    lam, u = np.linalg.eigh(rho)
    at = u.conj().T @ a @ u
    return float(np.sum(2 * np.abs(at) ** 2 / (lam[:, None] + lam[None, :])))


def fisher_rao_brute(p, u, w):
    return sum(ui * wi / pi for pi, ui, wi in zip(p, u, w))
