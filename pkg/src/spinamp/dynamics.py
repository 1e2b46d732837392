"""Fixed-step RK4 integration of the Lindblad master equation.

The integrator tracks, alongside the density matrix, the running integral
of the first observable with the same RK4 stage weights. For the collective
number operator and a sqrt(gamma)*A collapse channel this makes the quanta
bookkeeping

    <s+s->(t) + <A†A>(t) + gamma * int_0^t <A†A> dt'

exactly conserved along the *numerical* trajectory (the Lindblad trace
identity holds per stage), so the subradiant accounting is not limited by
any quadrature on the recording grid.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import cumulative_trapezoid

from .hilbert import DensityMatrix, Operator

STABILITY_LIMIT = 0.25   # hard guard on dt * omega_max
DT_FACTOR = 0.015        # default accuracy target for production curves
DT_FACTOR_COARSE = 0.08  # companion convergence-check runs (1e-3 tolerances)
TRACE_TOL = 1e-7
POSITIVITY_TOL = 1e-6


class StabilityError(ValueError):
    """Grid too coarse for the stability guard; carries the passing n_steps."""

    def __init__(self, msg: str, required_n_steps: int):
        super().__init__(msg)
        self.required_n_steps = required_n_steps


class IntegrationError(RuntimeError):
    pass


@dataclass(frozen=True)
class TimeGrid:
    """Integration grid [t_start, t_end] with n_steps RK4 steps; observables
    are recorded every record_every-th step (plus the initial point)."""

    t_start: float
    t_end: float
    n_steps: int
    record_every: int = 1

    def __post_init__(self):
        if self.t_end <= self.t_start:
            raise ValueError("t_end must exceed t_start")
        if self.n_steps < 1:
            raise ValueError("n_steps must be >= 1")
        if self.record_every < 1 or self.n_steps % self.record_every:
            raise ValueError(
                f"record_every ({self.record_every}) must divide n_steps ({self.n_steps})"
            )

    @property
    def dt(self) -> float:
        return (self.t_end - self.t_start) / self.n_steps

    @property
    def n_record(self) -> int:
        return self.n_steps // self.record_every

    @property
    def times(self) -> np.ndarray:
        """Recorded times, including t_start."""
        idx = np.arange(self.n_record + 1) * self.record_every
        return self.t_start + idx * self.dt

    @classmethod
    def auto(cls, h: Operator, t_start: float, t_end: float, n_record: int = 500,
             collapse: list[Operator] | None = None,
             dt_factor: float = DT_FACTOR) -> "TimeGrid":
        """Grid with dt chosen so dt * omega_max <= dt_factor, rounded up to a
        multiple of n_record."""
        wmax = omega_max(h, collapse or [])
        n = max(n_record, int(np.ceil((t_end - t_start) * wmax / dt_factor)))
        n = ((n + n_record - 1) // n_record) * n_record
        return cls(t_start, t_end, n, record_every=n // n_record)


@dataclass(frozen=True)
class Trajectory:
    """Recorded expectation values and per-point diagnostics.

    total_n = collective_n + subradiant_n by construction; subradiant_n is
    gamma times the stage-accumulated integral of collective_n.
    """

    times: np.ndarray
    collective_n: np.ndarray
    qubit_excited: np.ndarray
    subradiant_n: np.ndarray
    trace_err: np.ndarray
    min_eig: np.ndarray
    herm_err: np.ndarray
    extra: np.ndarray | None = None

    @property
    def total_n(self) -> np.ndarray:
        return self.collective_n + self.subradiant_n


def omega_max(h: Operator, collapse: list[Operator] | None = None) -> float:
    """Row-sum estimate of the fastest angular frequency, including the
    dissipative drift scale of the collapse channels."""
    w = float(np.max(np.sum(np.abs(h.mat), axis=1)))
    for ell in collapse or []:
        ldl = ell.mat.conj().T @ ell.mat
        w += float(np.max(np.sum(np.abs(ldl), axis=1)))
    return w


def evolve(h: Operator, collapse: list[Operator], rho0: DensityMatrix,
           grid: TimeGrid, observables: list[Operator],
           gamma: float = 0.0) -> Trajectory:
    """Integrate drho/dt = -i[H,rho] + sum_k (L rho L† - {L†L, rho}/2).

    Parameters
    ----------
    h : Operator
        Hamiltonian (Hermitian-flagged).
    collapse : list of Operator
        Collapse channels L_k (rates folded into the operators).
    rho0 : DensityMatrix
        Initial state.
    grid : TimeGrid
        Fixed-step grid; rejected if dt * omega_max > 0.25.
    observables : list of Operator
        observables[0] must be the collective number operator (it feeds the
        subradiant accumulator); observables[1], when present, the qubit
        excitation projector. Further entries land in Trajectory.extra.
    gamma : float
        Bookkeeping rate for the subradiant accounting,
        subradiant_n(t) = gamma * int_0^t <observables[0]> dt'.
    """
    if not observables:
        raise ValueError("need at least the collective number observable")
    for op in [h, *collapse, *observables]:
        if op.dims != rho0.dims:
            raise ValueError(
                f"dimension mismatch: {op.dims.factors} vs state {rho0.dims.factors}"
            )

    wmax = omega_max(h, collapse)
    if grid.dt * wmax > STABILITY_LIMIT:
        need = int(np.ceil((grid.t_end - grid.t_start) * wmax / STABILITY_LIMIT))
        k = grid.record_every
        need = ((need + k - 1) // k) * k
        raise StabilityError(
            f"dt*omega_max = {grid.dt * wmax:.3g} exceeds {STABILITY_LIMIT}; "
            f"n_steps >= {need} required", required_n_steps=need)

    heff = -1j * h.mat.astype(complex)
    jumps = [(ell.mat, ell.mat.conj().T) for ell in collapse]
    for lmat, ldag in jumps:
        heff -= 0.5 * (ldag @ lmat)

    def rhs(y):
        m = heff @ y
        out = m + m.conj().T
        for lmat, ldag in jumps:
            out += (lmat @ y) @ ldag
        return out

    num = observables[0].mat
    num_diag = None
    if np.count_nonzero(num - np.diag(np.diagonal(num))) == 0:
        num_diag = np.real(np.diagonal(num)).copy()

    def tr_num(y):
        if num_diag is not None:
            return float(np.real(np.dot(num_diag, np.diagonal(y))))
        return float(np.einsum("ij,ji->", num, y).real)

    def tr_obs(op, y):
        return float(np.einsum("ij,ji->", op.mat, y).real)

    dt = grid.dt
    n_rec = grid.n_record
    rho = rho0.mat.astype(complex).copy()
    acc = 0.0

    n_extra = max(0, len(observables) - 2)
    rec = {
        "collective_n": np.empty(n_rec + 1),
        "qubit_excited": np.zeros(n_rec + 1),
        "subradiant_n": np.empty(n_rec + 1),
        "trace_err": np.empty(n_rec + 1),
        "min_eig": np.empty(n_rec + 1),
        "herm_err": np.empty(n_rec + 1),
    }
    extra = np.empty((n_rec + 1, n_extra)) if n_extra else None

    def record(i, y, integral):
        rec["collective_n"][i] = tr_num(y)
        if len(observables) > 1:
            rec["qubit_excited"][i] = tr_obs(observables[1], y)
        rec["subradiant_n"][i] = gamma * integral
        tr = np.trace(y)
        rec["trace_err"][i] = abs(tr - 1.0)
        rec["herm_err"][i] = float(np.max(np.abs(y - y.conj().T)))
        w = np.linalg.eigvalsh(0.5 * (y + y.conj().T))
        rec["min_eig"][i] = float(w[0])
        if extra is not None:
            for j, op in enumerate(observables[2:]):
                extra[i, j] = tr_obs(op, y)
        if rec["min_eig"][i] < -POSITIVITY_TOL:
            raise IntegrationError(
                f"positivity violated at t={grid.times[i]:.6g}: "
                f"min eig {rec['min_eig'][i]:.3g}, trace err {rec['trace_err'][i]:.3g}")

    record(0, rho, acc)
    for step in range(grid.n_steps):
        k1 = rhs(rho); q1 = tr_num(rho)
        y2 = rho + (0.5 * dt) * k1
        k2 = rhs(y2); q2 = tr_num(y2)
        y3 = rho + (0.5 * dt) * k2
        k3 = rhs(y3); q3 = tr_num(y3)
        y4 = rho + dt * k3
        k4 = rhs(y4); q4 = tr_num(y4)
        rho += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        acc += (dt / 6.0) * (q1 + 2.0 * q2 + 2.0 * q3 + q4)
        if (step + 1) % grid.record_every == 0:
            record((step + 1) // grid.record_every, rho, acc)

    if rec["trace_err"][-1] > TRACE_TOL:
        raise IntegrationError(f"final trace error {rec['trace_err'][-1]:.3g} > {TRACE_TOL}")

    return Trajectory(times=grid.times, extra=extra, **rec)


def total_excitations(collective_n: np.ndarray, gamma: float,
                      times: np.ndarray) -> np.ndarray:
    """Total ensemble excitation from a recorded <A†A> series:
    <A†A>(t) + gamma * cumulative trapezoid of <A†A> on the recording grid."""
    collective_n = np.asarray(collective_n, dtype=float)
    times = np.asarray(times, dtype=float)
    if collective_n.shape != times.shape:
        raise ValueError("series and time grid must have matching shapes")
    integral = cumulative_trapezoid(collective_n, times, initial=0.0)
    return collective_n + gamma * integral


def readout_gain(traj_e: Trajectory, traj_g: Trajectory) -> np.ndarray:
    """Excited-minus-ground difference of total ensemble excitation."""
    if not np.array_equal(traj_e.times, traj_g.times):
        raise ValueError("trajectories recorded on different grids")
    return traj_e.total_n - traj_g.total_n
