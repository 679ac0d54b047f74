"""Entropy definitions and canonical-ensemble thermodynamics.

k_B = 1 internally; every entropy accepts an optional `k` rescale.

Entropies:
* von Neumann      -k Tr rho ln rho
* quantum Boltzmann k ln dim(H_M) with a semiclassical cell count for dim
* Gibbs             -k sum p_c ln(p_c dz / vol_c)   (histogram plug-in)
* coarse-grained    -k sum P_M ln(P_M / W_M)
* classical Boltzmann k ln(volume / dz)
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (EmptyRegion, GridTooCoarse, NotADensityMatrix,
                     OutsideAllCells, TruncationInsufficient)

PSD_TOL = 1e-10


# ---------------------------------------------------------------------------
# entropies

def _probabilities(arg):
    from .subsystem import ReducedDensityMatrix

    if isinstance(arg, ReducedDensityMatrix):
        p = arg.eigenvalues()
    else:
        p = np.asarray(arg)
        if p.ndim == 2:
            if np.max(np.abs(p - p.T.conj())) > 1e-10:
                raise NotADensityMatrix("matrix is not Hermitian")
            p = np.linalg.eigvalsh(p)
        else:
            p = p.astype(float)
    if np.any(p < -PSD_TOL):
        raise NotADensityMatrix(f"negative eigenvalue {p.min()}")
    p = np.clip(p, 0.0, None)
    if abs(p.sum() - 1.0) > 1e-8:
        raise NotADensityMatrix(f"trace {p.sum()} != 1")
    return p


def von_neumann_entropy(rho_or_p, k: float = 1.0) -> float:
    """-k sum lambda ln lambda with 0 ln 0 = 0.

    Accepts a probability vector, a density matrix, or a
    ReducedDensityMatrix."""
    p = _probabilities(rho_or_p)
    nz = p[p > 0]
    return float(-k * np.sum(nz * np.log(nz)))


def quantum_boltzmann_entropy(dim: int, k: float = 1.0) -> float:
    if dim < 1:
        raise ValueError("dim must be >= 1")
    return float(k * np.log(dim))


def macrostate_dim(lengths, p_cutoff: float) -> int:
    """Semiclassical state count: per interval floor(L * 2 p_cutoff / 2 pi),
    at least 1, product over intervals (hbar = 1)."""
    if p_cutoff <= 0:
        raise ValueError("p_cutoff must be positive")
    if np.isscalar(lengths):
        lengths = [lengths]
    dim = 1
    for length in lengths:
        dim *= max(1, int(np.floor(length * 2 * p_cutoff / (2 * np.pi))))
    return dim


@dataclass
class MacrostateDecomposition:
    """Disjoint covering cells; each cell is a list of (lo, hi) intervals,
    one per coordinate, with a Hilbert-space dimension per cell."""

    cells: list            # [[(lo, hi), ...], ...]
    dims: list             # per-cell dimension

    def __post_init__(self):
        if len(self.cells) != len(self.dims):
            raise ValueError("one dim per cell required")
        if any(d < 1 for d in self.dims):
            raise ValueError("cell dims must be >= 1")

    @classmethod
    def from_intervals_1d(cls, edges, p_cutoff: float):
        cells = [[(edges[i], edges[i + 1])] for i in range(len(edges) - 1)]
        dims = [macrostate_dim(e[0][1] - e[0][0], p_cutoff) for e in cells]
        return cls(cells, dims)

    def cell_volumes(self):
        return [float(np.prod([hi - lo for lo, hi in cell])) for cell in self.cells]


def macrostate_of(x, decomp: MacrostateDecomposition) -> int:
    """Index of the cell containing x; boundary ties go to the lower index."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    for idx, cell in enumerate(decomp.cells):
        inside = True
        for d, (lo, hi) in enumerate(cell):
            # closed cells; a shared boundary point matches the first
            # (lower-index) cell that contains it
            if not (lo <= x[d] <= hi):
                inside = False
                break
        if inside:
            return idx
    raise OutsideAllCells(f"{x} is outside every cell")


def macrostate_entropy_series(paths: np.ndarray,
                              decomp: MacrostateDecomposition,
                              k: float = 1.0) -> np.ndarray:
    """S_qB(x(t)) = k ln dim of the occupied cell, per sample and time.

    paths: (nsamples, ntimes, D) -> entropies (nsamples, ntimes)."""
    out = np.empty(paths.shape[:2])
    for s in range(paths.shape[0]):
        for t in range(paths.shape[1]):
            out[s, t] = quantum_boltzmann_entropy(
                decomp.dims[macrostate_of(paths[s, t], decomp)], k)
    return out


def gibbs_entropy(samples: np.ndarray, delta_z: float, edges,
                  k: float = 1.0) -> float:
    """Histogram plug-in estimator -k sum p_c ln(p_c dz / vol_c).

    The choice of delta_z shifts the result by an additive constant only:
    gibbs_entropy(., c*dz) = gibbs_entropy(., dz) - k ln c exactly.
    """
    if delta_z <= 0:
        raise ValueError("delta_z must be positive")
    samples = np.atleast_2d(np.asarray(samples, dtype=float))
    if samples.shape[0] == 1 and samples.shape[1] > 1 and len(edges) == 1:
        samples = samples.T
    counts, used_edges = np.histogramdd(samples, bins=edges)
    p = counts / counts.sum()
    widths = [np.diff(e) for e in used_edges]
    vol = widths[0]
    for wd in widths[1:]:
        vol = np.multiply.outer(vol, wd)
    mask = p > 0
    return float(-k * np.sum(p[mask] * np.log(p[mask] * delta_z / vol[mask])))


def coarse_grained_gibbs(cell_masses, cell_weights=None, k: float = 1.0) -> float:
    """-k sum_M P_M ln(P_M / W_M); W_M defaults to 1 (equal elementary cells)."""
    p = np.asarray(cell_masses, dtype=float)
    p = p / p.sum()
    w = np.ones_like(p) if cell_weights is None else np.asarray(cell_weights, float)
    mask = p > 0
    return float(-k * np.sum(p[mask] * np.log(p[mask] / w[mask])))


def boltzmann_entropy(volume: float, delta_z: float, k: float = 1.0) -> float:
    """k ln(phase volume / dz)."""
    if volume <= 0:
        raise EmptyRegion(f"region volume {volume} is not positive")
    return float(k * np.log(volume / delta_z))


def one_particle_boltzmann(x: np.ndarray, p: np.ndarray, delta_z1: float,
                           x_edges, p_edges, k: float = 1.0) -> float:
    """N times the Gibbs entropy of the pooled single-particle (x, p) marginal."""
    x = np.atleast_2d(x)
    p = np.atleast_2d(p)
    n_part = x.shape[1]
    pooled = np.column_stack([x.ravel(), p.ravel()])
    s1 = gibbs_entropy(pooled, delta_z1, [x_edges, p_edges], k=k)
    return n_part * s1


# ---------------------------------------------------------------------------
# spectra and canonical thermodynamics

@dataclass
class Spectrum:
    """Ascending energy levels plus the volume parameter used by P = dF/dV."""

    levels: np.ndarray
    volume: float = 1.0
    truncated: bool = False
    source: str = "numeric"

    def __post_init__(self):
        self.levels = np.asarray(self.levels, dtype=float)
        if np.any(np.diff(self.levels) < -1e-12):
            raise ValueError("levels must be ascending")


def box_spectrum(length: float, mass: float = 1.0, count: int = 200) -> Spectrum:
    """1D box: E_n = n^2 pi^2 / (2 m L^2), n = 1.. ; V == L by convention."""
    n = np.arange(1, count + 1)
    return Spectrum(n**2 * np.pi**2 / (2 * mass * length**2), volume=length,
                    truncated=True, source="box")


def harmonic_spectrum(omega: float, count: int = 200) -> Spectrum:
    return Spectrum(omega * (np.arange(count) + 0.5), truncated=True,
                    source="harmonic")


def partition_function(spec: Spectrum, beta: float, tail_tol: float = 1e-12):
    """Z and occupation weights p_n, evaluated with an E_0 shift for stability.

    For truncated spectra the tail bound exp(-beta (E_max - E_0)) must be
    below tail_tol, otherwise TruncationInsufficient.
    """
    if beta <= 0:
        raise ValueError("beta must be positive")
    e = spec.levels
    e0 = e[0]
    w = np.exp(-beta * (e - e0))
    if spec.truncated and w[-1] > tail_tol:
        raise TruncationInsufficient(
            f"tail weight {w[-1]:.3g} exceeds {tail_tol}; add levels"
        )
    z_shifted = w.sum()
    p = w / z_shifted
    log_z = np.log(z_shifted) - beta * e0
    return float(np.exp(log_z)), p, float(log_z)


def direct_energy_entropy(spec: Spectrum, beta: float, k: float = 1.0):
    """E = sum E_n p_n and S = -k sum p_n ln p_n (the dual route)."""
    _, p, log_z = partition_function(spec, beta)
    e = float(np.sum(spec.levels * p))
    mask = p > 0
    s = float(-k * np.sum(p[mask] * np.log(p[mask])))
    return e, s


@dataclass
class ThermoTable:
    """Per-(V, T) canonical quantities; derivative columns are central
    differences of kT ln Z and are NaN on the boundary rows/columns."""

    v_grid: np.ndarray
    t_grid: np.ndarray
    log_z: np.ndarray          # (nV, nT)
    free_energy: np.ndarray    # F = -kT ln Z
    energy: np.ndarray         # differenced
    entropy: np.ndarray        # differenced
    pressure: np.ndarray       # differenced
    energy_direct: np.ndarray
    entropy_direct: np.ndarray
    k: float = 1.0


def thermo_table(spectrum_of_volume, v_grid, t_grid, k: float = 1.0) -> ThermoTable:
    """Build the (V, T) table; `spectrum_of_volume(V) -> Spectrum`."""
    v_grid = np.asarray(v_grid, dtype=float)
    t_grid = np.asarray(t_grid, dtype=float)
    if len(v_grid) < 5 or len(t_grid) < 5:
        raise GridTooCoarse("need >= 5 points per axis for central differences")
    n_v, n_t = len(v_grid), len(t_grid)
    log_z = np.empty((n_v, n_t))
    e_dir = np.empty((n_v, n_t))
    s_dir = np.empty((n_v, n_t))
    for i, v in enumerate(v_grid):
        spec = spectrum_of_volume(v)
        for j, t in enumerate(t_grid):
            beta = 1.0 / (k * t)
            _, _, lz = partition_function(spec, beta)
            log_z[i, j] = lz
            e_dir[i, j], s_dir[i, j] = direct_energy_entropy(spec, beta, k=k)
    kt_log_z = k * t_grid[None, :] * log_z
    energy = np.full_like(log_z, np.nan)
    entropy = np.full_like(log_z, np.nan)
    pressure = np.full_like(log_z, np.nan)
    dt = np.diff(t_grid)
    dv = np.diff(v_grid)
    if not (np.allclose(dt, dt[0]) and np.allclose(dv, dv[0])):
        raise GridTooCoarse("grids must be uniform for the central stencil")
    ht, hv = dt[0], dv[0]
    # S = d(kT ln Z)/dT, E = kT^2 d(ln Z)/dT, P = d(kT ln Z)/dV
    entropy[:, 1:-1] = (kt_log_z[:, 2:] - kt_log_z[:, :-2]) / (2 * ht)
    dlogz_dt = (log_z[:, 2:] - log_z[:, :-2]) / (2 * ht)
    energy[:, 1:-1] = k * t_grid[None, 1:-1] ** 2 * dlogz_dt
    pressure[1:-1, :] = (kt_log_z[2:, :] - kt_log_z[:-2, :]) / (2 * hv)
    return ThermoTable(v_grid, t_grid, log_z, -kt_log_z, energy, entropy,
                       pressure, e_dir, s_dir, k)


def first_law_residual(table: ThermoTable):
    """Residual |dE - T dS + P dV| / (|dE| + tiny) on every interior grid
    edge, with midpoint T-bar and P-bar.  Returns (per-edge array, stats dict)
    where stats holds max, median and the isochoric-subset median."""
    tiny = 1e-300
    residuals = []
    iso = []
    e, s, p = table.energy, table.entropy, table.pressure
    tg, vg = table.t_grid, table.v_grid
    n_v, n_t = e.shape
    for i in range(1, n_v - 1):            # isochoric edges (T direction)
        for j in range(1, n_t - 2):
            de = e[i, j + 1] - e[i, j]
            ds = s[i, j + 1] - s[i, j]
            tbar = 0.5 * (tg[j] + tg[j + 1])
            r = abs(de - tbar * ds) / (abs(de) + tiny)
            residuals.append(r)
            iso.append(r)
    for j in range(1, n_t - 1):            # isothermal edges (V direction)
        for i in range(1, n_v - 2):
            de = e[i + 1, j] - e[i, j]
            ds = s[i + 1, j] - s[i, j]
            dv = vg[i + 1] - vg[i]
            tbar = tg[j]
            pbar = 0.5 * (p[i, j] + p[i + 1, j])
            r = abs(de - tbar * ds + pbar * dv) / (abs(de) + tiny)
            residuals.append(r)
    residuals = np.array(residuals)
    stats = {
        "max": float(residuals.max()),
        "median": float(np.median(residuals)),
        "median_isochoric": float(np.median(iso)),
        "n_edges": len(residuals),
    }
    return residuals, stats


def bohmian_volume_check(length: float, temperature: float, mass: float = 1.0,
                         levels: int = 16, grid_n: int = 256,
                         samples: int = 10_000, seed: int = 0,
                         k: float = 1.0) -> dict:
    """Occupation of a 1D thermal box by static Bohmian samples.

    The thermal density is rho(x) = sum_n p_n |psi_n(x)|^2 on a dirichlet
    grid.  Because the box eigenfunctions are real, the thermal current
    vanishes identically, so sampled positions are stationary; the report
    records the max |j|, whether every sample sits inside [0, L], and the
    fraction of L covered by the sample spread.
    """
    from .bohmian import sample_initial
    from .currents import current
    from .lattice import GridSpec, ScalarField, WaveField, make_grid
    from .schrodinger import HamiltonianSpec, eigenstates

    grid = make_grid(GridSpec(1, 1, grid_n, (0.0, length), boundary="dirichlet"))
    h = HamiltonianSpec((mass,), [{"kind": "box"}], stepper="crank_nicolson")
    energies, states = eigenstates(grid, h, levels)
    beta = 1.0 / (k * temperature)
    _, p, _ = partition_function(
        Spectrum(energies, volume=length, truncated=True, source="box"), beta)
    rho = np.zeros(grid.pos_shape)
    j_max = 0.0
    for pn, psi in zip(p, states):
        rho += pn * np.abs(psi.amplitudes) ** 2
        j_max = max(j_max, float(np.max(np.abs(current(psi, h).components))))
    pos = sample_initial(ScalarField(grid, rho), samples, seed)[:, 0]
    spread = float((pos.max() - pos.min()) / length)
    return {
        "length": length,
        "temperature": temperature,
        "levels": levels,
        "max_abs_current": j_max,
        "all_inside": bool(np.all((pos >= 0.0) & (pos <= length))),
        "spread_fraction": spread,
        "samples": samples,
    }


def harmonic_thermal_entropy(omega: float, beta: float, k: float = 1.0) -> float:
    """Closed-form oscillator entropy used as an oracle in tests."""
    x = beta * omega
    return float(k * (x / (np.exp(x) - 1.0) - np.log(1.0 - np.exp(-x))))


def harmonic_thermal_energy(omega: float, beta: float) -> float:
    return float(0.5 * omega / np.tanh(0.5 * beta * omega))
