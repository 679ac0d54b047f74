"""Transverse-field Ising chains and the microcanonical-to-canonical
typicality experiment.

H = -J sum_i sz_i sz_{i+1} - g sum_i sx_i  on an open chain, with the single
bond that crosses the A|B cut scaled by `ab_coupling` so the subsystem is
weakly coupled to the bath.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DiagonalizationBudget, WindowEmpty

MAX_SPINS = 12

_SX = np.array([[0.0, 1.0], [1.0, 0.0]])
_SZ = np.array([[1.0, 0.0], [0.0, -1.0]])


def _site_op(op, site, n):
    out = np.array([[1.0]])
    for i in range(n):
        out = np.kron(out, op if i == site else np.eye(2))
    return out


def tfim_hamiltonian(n: int, j_coupling: float = 1.0, g_field: float = 1.0,
                     ab_coupling: float = 1.0, n_a: int = 1) -> np.ndarray:
    """Dense TFIM chain Hamiltonian; the bond between sites n_a-1 and n_a is
    scaled by ab_coupling."""
    if n > MAX_SPINS:
        raise DiagonalizationBudget(f"{n} spins exceeds the dense budget ({MAX_SPINS})")
    dim = 2**n
    h = np.zeros((dim, dim))
    for i in range(n - 1):
        scale = ab_coupling if i == n_a - 1 else 1.0
        h -= scale * j_coupling * _site_op(_SZ, i, n) @ _site_op(_SZ, i + 1, n)
    for i in range(n):
        h -= g_field * _site_op(_SX, i, n)
    return h


def subsystem_hamiltonian(n_a: int, j_coupling: float = 1.0,
                          g_field: float = 1.0) -> np.ndarray:
    """Terms of the chain acting purely on the first n_a sites."""
    dim = 2**n_a
    h = np.zeros((dim, dim))
    for i in range(n_a - 1):
        h -= j_coupling * _site_op(_SZ, i, n_a) @ _site_op(_SZ, i + 1, n_a)
    for i in range(n_a):
        h -= g_field * _site_op(_SX, i, n_a)
    return h


@dataclass
class ChainSpectrum:
    n: int
    energies: np.ndarray
    vectors: np.ndarray   # columns are eigenvectors
    n_a: int


def diagonalize_chain(n: int, j_coupling: float = 1.0, g_field: float = 1.0,
                      ab_coupling: float = 1.0, n_a: int = 1) -> ChainSpectrum:
    h = tfim_hamiltonian(n, j_coupling, g_field, ab_coupling, n_a)
    vals, vecs = np.linalg.eigh(h)
    return ChainSpectrum(n, vals, vecs, n_a)


def window_indices(energies: np.ndarray, center: float, width: float) -> np.ndarray:
    lo, hi = center - 0.5 * width, center + 0.5 * width
    idx = np.nonzero((energies >= lo) & (energies <= hi))[0]
    return idx


def entropy_beta(energies: np.ndarray, center: float, width: float,
                 delta_e: float, k: float = 1.0) -> float:
    """beta = (1/k) d ln dim / dE via a centered difference of the log window
    dimension over windows shifted by +-delta_e."""
    d_plus = len(window_indices(energies, center + delta_e, width))
    d_minus = len(window_indices(energies, center - delta_e, width))
    if d_plus == 0 or d_minus == 0:
        raise WindowEmpty("shifted window holds no levels")
    return float((np.log(d_plus) - np.log(d_minus)) / (2 * delta_e * k))


def reduced_density_matrix_spins(psi: np.ndarray, n: int, n_a: int) -> np.ndarray:
    x = psi.reshape(2**n_a, 2**(n - n_a))
    return x @ x.conj().T


def trace_distance(a: np.ndarray, b: np.ndarray) -> float:
    vals = np.linalg.eigvalsh(a - b)
    return float(0.5 * np.sum(np.abs(vals)))


def canonical_state(h_a: np.ndarray, beta: float) -> np.ndarray:
    vals, vecs = np.linalg.eigh(h_a)
    w = np.exp(-beta * (vals - vals[0]))
    w /= w.sum()
    return (vecs * w) @ vecs.conj().T


def fit_beta(rho_a: np.ndarray, h_a: np.ndarray,
             beta_grid=None) -> tuple:
    """Beta minimizing the trace distance to the canonical state (grid scan
    refined once); returns (beta, distance)."""
    if beta_grid is None:
        beta_grid = np.linspace(0.01, 3.0, 60)
    d = [trace_distance(rho_a, canonical_state(h_a, b)) for b in beta_grid]
    i = int(np.argmin(d))
    lo = beta_grid[max(i - 1, 0)]
    hi = beta_grid[min(i + 1, len(beta_grid) - 1)]
    fine = np.linspace(lo, hi, 40)
    df = [trace_distance(rho_a, canonical_state(h_a, b)) for b in fine]
    i = int(np.argmin(df))
    return float(fine[i]), float(df[i])


def canonical_typicality(n: int, n_a: int = 1, j_coupling: float = 1.0,
                         g_field: float = 1.0, ab_coupling: float = 0.2,
                         center_quantile: float = 0.2, min_levels: int = 30,
                         trials: int = 20, seed: int = 0, k: float = 1.0) -> dict:
    """Random microcanonical pure states vs the canonical subsystem state.

    The window is centered at the given quantile of the spectrum and widened
    until it holds at least `min_levels` levels.  Per trial: a Haar-random
    unit vector in the window span (normalized Gaussian coefficients), the
    A-subsystem reduced density matrix, and its trace distance to
    exp(-beta H_A)/Z with beta both fitted and taken from the entropy
    derivative.
    """
    spec = diagonalize_chain(n, j_coupling, g_field, ab_coupling, n_a)
    energies = spec.energies
    center = float(np.quantile(energies, center_quantile))
    span = energies[-1] - energies[0]
    width = span / 50
    idx = window_indices(energies, center, width)
    while len(idx) < min_levels and width < span:
        width *= 1.3
        idx = window_indices(energies, center, width)
    if len(idx) == 0:
        raise WindowEmpty(f"no levels in window around {center}")
    h_a = subsystem_hamiltonian(n_a, j_coupling, g_field)
    beta_entropy = entropy_beta(energies, center, width, delta_e=width, k=k)
    rho_beta_entropy = canonical_state(h_a, beta_entropy)
    rng = np.random.default_rng(seed)
    basis = spec.vectors[:, idx]
    d_fit, d_ent, betas_fit = [], [], []
    for _ in range(trials):
        c = rng.standard_normal(len(idx)) + 1j * rng.standard_normal(len(idx))
        c /= np.linalg.norm(c)
        psi = basis @ c
        rho_a = reduced_density_matrix_spins(psi, n, n_a)
        b_fit, dist_fit = fit_beta(rho_a, h_a)
        d_fit.append(dist_fit)
        betas_fit.append(b_fit)
        d_ent.append(trace_distance(rho_a, rho_beta_entropy))
    return {
        "n": n,
        "n_a": n_a,
        "window_center": center,
        "window_width": float(width),
        "window_dim": int(len(idx)),
        "beta_entropy": float(beta_entropy),
        "beta_fit_median": float(np.median(betas_fit)),
        "median_distance_fit": float(np.median(d_fit)),
        "median_distance_entropy_beta": float(np.median(d_ent)),
        "distances_fit": [float(v) for v in d_fit],
        "distances_entropy_beta": [float(v) for v in d_ent],
    }
