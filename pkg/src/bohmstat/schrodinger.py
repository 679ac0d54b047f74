"""Hamiltonian construction and unitary time evolution.

H = sum_a -laplacian_a / (2 m_a) + V(x), hbar = 1.

Two steppers:
* split_step_spectral (periodic grids): Strang splitting with exact kinetic
  phases in k-space; unitary to round-off.
* crank_nicolson (dirichlet grids): Cayley form per position axis (the kinetic
  axis factors commute exactly) plus a Cayley factor for the diagonal
  potential, in Strang order.  Every factor is exactly unitary, the splitting
  error is O(dt^2).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import eigh, eigh_tridiagonal, solve_banded

from .errors import ConvergenceFailure, DenseBudgetExceeded, StepperBoundaryMismatch
from .lattice import Grid, WaveField, integrate, laplacian_axis

DENSE_EIG_BUDGET = 4096


@dataclass
class HamiltonianSpec:
    """Masses plus a list of named analytic potential terms.

    Supported terms (params in natural units):
      {"kind": "free"}
      {"kind": "harmonic", "omega": w or [w_a]}            (1/2) m w^2 x^2 per axis
      {"kind": "gaussian_barrier", "height": h, "width": w, "center": c}
      {"kind": "pair_coupling", "lam": l}                  l * (x_1 - x_2)^2
      {"kind": "spin_coupling", "mu": m, "particle": a}    m * sigma_z * x  (spin-1/2)
    """

    masses: tuple
    potential: list = field(default_factory=lambda: [{"kind": "free"}])
    time_step: float = 1e-3
    stepper: str = "split_step_spectral"

    def __post_init__(self):
        self.masses = tuple(float(m) for m in self.masses)
        if any(m <= 0 for m in self.masses):
            raise ValueError("masses must be positive")
        if self.stepper not in ("split_step_spectral", "crank_nicolson"):
            raise ValueError(f"unknown stepper {self.stepper!r}")
        if isinstance(self.potential, dict):
            self.potential = [self.potential]

    def mass_of_axis(self, grid: Grid, pos_axis: int) -> float:
        return self.masses[pos_axis // grid.spec.dims_per_particle]


def potential_grid(grid: Grid, h: HamiltonianSpec) -> np.ndarray:
    """Total potential on the grid, shape spin_shape + pos_shape."""
    coords = grid.meshgrid()
    v_pos = np.zeros(grid.pos_shape)
    v_full = None
    for term in h.potential:
        kind = term["kind"]
        if kind in ("free", "box"):
            continue
        elif kind == "harmonic":
            om = term["omega"]
            omegas = [om] * grid.spec.particle_count if np.isscalar(om) else list(om)
            for a in range(grid.spec.particle_count):
                for ax in grid.particle_axes(a):
                    v_pos = v_pos + 0.5 * h.masses[a] * omegas[a] ** 2 * coords[ax] ** 2
        elif kind == "gaussian_barrier":
            hgt, wid, cen = term["height"], term["width"], term["center"]
            for ax in range(grid.n_pos_axes):
                v_pos = v_pos + hgt * np.exp(-((coords[ax] - cen) ** 2) / (2 * wid**2))
        elif kind == "pair_coupling":
            lam = term["lam"]
            ax1 = grid.particle_axes(0)[0]
            ax2 = grid.particle_axes(1)[0]
            v_pos = v_pos + lam * (coords[ax1] - coords[ax2]) ** 2
        elif kind == "spin_coupling":
            mu, a = term["mu"], term.get("particle", 0)
            if grid.spec.spin_dims[a] != 2:
                raise ValueError("spin_coupling needs a spin-1/2 particle")
            if v_full is None:
                v_full = np.zeros(grid.full_shape)
            spin_axis = sum(1 for s in grid.spec.spin_dims[:a] if s > 1)
            sz = np.array([1.0, -1.0])
            shape = [1] * len(grid.full_shape)
            shape[spin_axis] = 2
            x = coords[grid.particle_axes(a)[0]]
            v_full = v_full + sz.reshape(shape) * mu * x
        else:
            raise ValueError(f"unknown potential term {kind!r}")
    if v_full is None:
        return np.broadcast_to(v_pos, grid.full_shape).copy()
    return v_full + v_pos


def _check_stepper(grid: Grid, h: HamiltonianSpec):
    want = "periodic" if h.stepper == "split_step_spectral" else "dirichlet"
    if grid.spec.boundary != want:
        raise StepperBoundaryMismatch(
            f"{h.stepper} requires {want} boundary, grid is {grid.spec.boundary}"
        )
    if h.time_step > grid.dx**2 * min(h.masses) / np.pi:
        warnings.warn(
            "time_step exceeds dx^2 * m_min / pi; accuracy may degrade",
            stacklevel=3,
        )


class _SplitStepper:
    def __init__(self, grid: Grid, h: HamiltonianSpec):
        dt = h.time_step
        v = potential_grid(grid, h)
        self.half_v = np.exp(-0.5j * dt * v)
        k2_total = np.zeros(grid.pos_shape)
        for ax in range(grid.n_pos_axes):
            shape = [1] * grid.n_pos_axes
            shape[ax] = len(grid.wavenumbers)
            k2_total = k2_total + grid.wavenumbers.reshape(shape) ** 2 / (
                2.0 * h.mass_of_axis(grid, ax)
            )
        self.kin_phase = np.exp(-1j * dt * k2_total)
        self.pos_axes = tuple(grid.pos_axis(i) for i in range(grid.n_pos_axes))

    def step(self, amp):
        amp = amp * self.half_v
        amp = np.fft.fftn(amp, axes=self.pos_axes)
        amp *= self.kin_phase
        amp = np.fft.ifftn(amp, axes=self.pos_axes)
        amp *= self.half_v
        return amp


class _CrankNicolsonStepper:
    """Cayley factors: exp(-iV dt/2) ~ (1-iVdt/4)/(1+iVdt/4), and per-axis
    tridiagonal (1+i dt T_ax/2)^-1 (1-i dt T_ax/2)."""

    def __init__(self, grid: Grid, h: HamiltonianSpec):
        dt = h.time_step
        v = potential_grid(grid, h)
        self.half_v = (1.0 - 0.25j * dt * v) / (1.0 + 0.25j * dt * v)
        self.grid = grid
        n = grid.spec.points_per_axis
        self.bands = []
        for ax in range(grid.n_pos_axes):
            m = h.mass_of_axis(grid, ax)
            # T = -(1/2m) D2, D2 tridiagonal (1,-2,1)/dx^2 with zero boundary
            off = -1.0 / (2 * m * grid.dx**2)
            diag = 1.0 / (m * grid.dx**2)
            z = 0.5j * dt
            ab = np.zeros((3, n), dtype=np.complex128)
            ab[0, 1:] = z * off
            ab[1, :] = 1.0 + z * diag
            ab[2, :-1] = z * off
            self.bands.append((ab, off, diag, z))

    def _axis_solve(self, amp, pos_axis):
        ab, off, diag, z = self.bands[pos_axis]
        ax = self.grid.pos_axis(pos_axis)
        moved = np.moveaxis(amp, ax, 0)
        shp = moved.shape
        flat = moved.reshape(shp[0], -1)
        # rhs = (1 - i dt T/2) psi
        rhs = (1.0 - z * diag) * flat
        rhs[:-1] -= z * off * flat[1:]
        rhs[1:] -= z * off * flat[:-1]
        sol = solve_banded((1, 1), ab, rhs)
        return np.moveaxis(sol.reshape(shp), 0, ax)

    def step(self, amp):
        amp = amp * self.half_v
        for ax in range(self.grid.n_pos_axes):
            amp = self._axis_solve(amp, ax)
        amp = amp * self.half_v
        return amp


def make_stepper(grid: Grid, h: HamiltonianSpec):
    _check_stepper(grid, h)
    if h.stepper == "split_step_spectral":
        return _SplitStepper(grid, h)
    return _CrankNicolsonStepper(grid, h)


def evolve(psi: WaveField, h: HamiltonianSpec, t_final: float, frame_stride: int = 1):
    """Evolve to t_final, returning frames every `frame_stride` steps.

    The initial state is frame 0.  Steps are fixed at h.time_step; t_final is
    rounded to the nearest whole number of steps.
    """
    stepper = make_stepper(psi.grid, h)
    dt = h.time_step
    n_steps = int(round((t_final - psi.time) / dt))
    frames = [WaveField(psi.grid, psi.amplitudes.copy(), psi.time)]
    amp = psi.amplitudes.copy()
    t = psi.time
    for i in range(1, n_steps + 1):
        amp = stepper.step(amp)
        t = psi.time + i * dt
        if i % frame_stride == 0 or i == n_steps:
            frames.append(WaveField(psi.grid, amp.copy(), t))
    return frames


def apply_hamiltonian(amp, grid: Grid, h: HamiltonianSpec, v=None):
    if v is None:
        v = potential_grid(grid, h)
    out = v * amp
    for ax in range(grid.n_pos_axes):
        out = out - laplacian_axis(amp, grid, ax) / (2.0 * h.mass_of_axis(grid, ax))
    return out


def energy(psi: WaveField, h: HamiltonianSpec) -> float:
    """<psi|H|psi>; raises if the imaginary residue exceeds 1e-10."""
    grid = psi.grid
    hpsi = apply_hamiltonian(psi.amplitudes, grid, h)
    val = np.sum(np.conj(psi.amplitudes) * hpsi) * grid.weight
    if abs(val.imag) > 1e-10 * max(1.0, abs(val.real)):
        raise ValueError(f"energy has imaginary residue {val.imag}")
    return float(val.real)


def eigenstates(grid: Grid, h: HamiltonianSpec, count: int,
                dense_budget: int = DENSE_EIG_BUDGET):
    """Lowest `count` eigenpairs, energies ascending, quadrature-orthonormal.

    Dense diagonalization when the total grid size fits the budget; otherwise
    imaginary-time propagation with Gram-Schmidt deflation.
    """
    total = grid.spec.total_points
    if total <= dense_budget:
        return _eigenstates_dense(grid, h, count)
    return _eigenstates_imaginary_time(grid, h, count)


def _eigenstates_dense(grid: Grid, h: HamiltonianSpec, count: int):
    total = grid.spec.total_points
    v = potential_grid(grid, h)
    if (grid.n_pos_axes == 1 and not grid.spin_shape
            and grid.spec.boundary == "dirichlet"):
        m = h.masses[0]
        n = grid.spec.points_per_axis
        diag = 1.0 / (m * grid.dx**2) + v
        off = np.full(n - 1, -1.0 / (2 * m * grid.dx**2))
        vals, vecs = eigh_tridiagonal(diag, off, select="i",
                                      select_range=(0, count - 1))
        fields = []
        for i in range(count):
            amp = vecs[:, i].astype(np.complex128) / np.sqrt(grid.dx)
            fields.append(WaveField(grid, amp))
        return list(vals[:count]), fields
    # generic dense: build H column by column through the shared operators
    eye = np.eye(total, dtype=np.complex128)
    cols = np.empty((total, total), dtype=np.complex128)
    for j in range(total):
        cols[:, j] = apply_hamiltonian(
            eye[:, j].reshape(grid.full_shape), grid, h, v=v
        ).ravel()
    hmat = 0.5 * (cols + cols.conj().T)
    vals, vecs = eigh(hmat)
    fields = []
    for i in range(count):
        amp = vecs[:, i].reshape(grid.full_shape) / np.sqrt(grid.weight)
        fields.append(WaveField(grid, amp))
    return list(vals[:count]), fields


def _eigenstates_imaginary_time(grid: Grid, h: HamiltonianSpec, count: int,
                                tau: float = None, tol: float = 1e-8,
                                max_iter: int = 20000):
    if grid.spec.boundary != "periodic":
        raise DenseBudgetExceeded(
            "imaginary-time path needs a periodic grid; shrink the grid for dense"
        )
    rng = np.random.default_rng(7)
    v = potential_grid(grid, h)
    if tau is None:
        tau = 0.1 * grid.dx**2 * min(h.masses)
    k2_total = np.zeros(grid.pos_shape)
    for ax in range(grid.n_pos_axes):
        shape = [1] * grid.n_pos_axes
        shape[ax] = len(grid.wavenumbers)
        k2_total = k2_total + grid.wavenumbers.reshape(shape) ** 2 / (
            2.0 * h.mass_of_axis(grid, ax)
        )
    kin = np.exp(-tau * k2_total)
    pot_half = np.exp(-0.5 * tau * v)
    pos_axes = tuple(grid.pos_axis(i) for i in range(grid.n_pos_axes))
    states = [
        (rng.standard_normal(grid.full_shape) + 1j * rng.standard_normal(grid.full_shape))
        for _ in range(count)
    ]
    energies = np.full(count, np.inf)
    w = grid.weight
    for it in range(max_iter):
        new_states = []
        for i, amp in enumerate(states):
            amp = pot_half * amp
            amp = np.fft.ifftn(kin * np.fft.fftn(amp, axes=pos_axes), axes=pos_axes)
            amp = pot_half * amp
            for prev in new_states:  # Gram-Schmidt deflation
                amp = amp - prev * (np.vdot(prev, amp) * w)
            amp = amp / np.sqrt(np.sum(np.abs(amp) ** 2) * w)
            new_states.append(amp)
        states = new_states
        if it % 50 == 49:
            e_new = np.array([
                np.real(np.vdot(s, apply_hamiltonian(s, grid, h, v=v)) * w)
                for s in states
            ])
            if np.all(np.abs(e_new - energies) < tol):
                energies = e_new
                break
            energies = e_new
    else:
        raise ConvergenceFailure("imaginary-time eigensolver did not stall")
    order = np.argsort(energies)
    fields = [WaveField(grid, states[i]) for i in order]
    return [float(energies[i]) for i in order], fields
