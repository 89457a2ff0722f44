"""Quantum-jump trajectories and a dense master-equation reference integrator.

Trajectories use the waiting-time construction: the unnormalized state is
propagated under H_eff = H - i kappa a^dag a - i gamma sigma^dag sigma until its
squared norm falls to a uniform threshold drawn at the previous jump.

The default propagator is exact: H_eff is time independent, so a ladder of
propagators exp(-i H_eff h 2^k) for a tick h <= jump_tol is built once and
the crossing is found by a binary search over ticks.  ``method="rk"``
instead integrates the Schroedinger equation matrix-free with an adaptive
Runge-Kutta pair and locates the crossing by root finding on the dense
output; it is slower and kept as a cross-check.
"""

from __future__ import annotations

import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.integrate import solve_ivp
from scipy.linalg import expm

from .model import (
    PureState,
    SystemParams,
    TruncationError,
    TRUNCATION_LIMIT,
    apply_effective_hamiltonian,
    batch_expectations,
    effective_hamiltonian_matrix,
    lower_mode,
    lower_qubit,
)

__all__ = [
    "TrajectoryRecord",
    "EnsembleError",
    "StiffnessError",
    "DensityMatrix",
    "MasterEquationResult",
    "evolve_trajectory",
    "run_ensemble",
    "master_equation_evolve",
    "master_equation_rhs",
    "make_rng",
    "MODE_DECAY",
    "QUBIT_DECAY",
]

log = logging.getLogger(__name__)

MODE_DECAY = 0
QUBIT_DECAY = 1
CHANNEL_NAMES = {MODE_DECAY: "mode_decay", QUBIT_DECAY: "qubit_decay"}


class StiffnessError(RuntimeError):
    def __init__(self, message: str, t: float):
        super().__init__(f"{message} (t={t:g})")
        self.t = t


def make_rng(seed: int) -> np.random.Generator:
    """Counter-based generator keyed directly by the trajectory seed."""
    return np.random.Generator(np.random.Philox(key=int(seed) % (1 << 64)))


@dataclass
class TrajectoryRecord:
    """Columnar record of one trajectory.

    ``norm_sq`` is the squared norm of the unnormalized waiting-time state at
    each sample; all observables are evaluated on the renormalized state.
    """

    seed: int
    params: SystemParams
    n_max: int
    t: np.ndarray
    n_mean: np.ndarray
    a_mean: np.ndarray
    sigma_mean: np.ndarray
    sigma_z_mean: np.ndarray
    photon_variance: np.ndarray
    norm_sq: np.ndarray
    jump_times: np.ndarray
    jump_channels: np.ndarray
    states: np.ndarray | None = None
    state_stride: int = 0
    settings: dict = field(default_factory=dict)

    @property
    def dt(self) -> float:
        return float(self.t[1] - self.t[0]) if self.t.size > 1 else 0.0

    @property
    def pseudospin(self) -> np.ndarray:
        return 4 * np.abs(self.sigma_mean) ** 2 + self.sigma_z_mean**2

    @property
    def jumps(self) -> list[tuple[float, str]]:
        return [(float(t), CHANNEL_NAMES[int(c)]) for t, c in zip(self.jump_times, self.jump_channels)]

    def state_at(self, i: int) -> PureState:
        if self.states is None or not self.state_stride:
            raise ValueError("record holds no state snapshots")
        if i % self.state_stride:
            raise ValueError(f"sample {i} has no snapshot (stride {self.state_stride})")
        return PureState(self.states[i // self.state_stride])

    def columns(self) -> dict[str, np.ndarray]:
        return {
            "t": self.t,
            "n_mean": self.n_mean,
            "a_re": self.a_mean.real,
            "a_im": self.a_mean.imag,
            "sigma_re": self.sigma_mean.real,
            "sigma_im": self.sigma_mean.imag,
            "sigma_z": self.sigma_z_mean,
            "photon_variance": self.photon_variance,
            "norm_sq": self.norm_sq,
        }

    def same_as(self, other: TrajectoryRecord) -> bool:
        """Bitwise equality of every stored column."""
        if (self.seed, self.params, self.n_max) != (other.seed, other.params, other.n_max):
            return False
        pairs = list(zip(self.columns().values(), other.columns().values()))
        pairs += [(self.jump_times, other.jump_times), (self.jump_channels, other.jump_channels)]
        return all(a.shape == b.shape and a.tobytes() == b.tobytes() for a, b in pairs)


def _jump(psi: np.ndarray, params: SystemParams, rng: np.random.Generator) -> tuple[np.ndarray, int]:
    """Apply one collapse chosen with probability proportional to its rate; renormalize."""
    p = np.abs(psi) ** 2
    w_mode = 2 * params.kappa * float(p.sum(axis=0) @ np.arange(psi.shape[-1]))
    w_qubit = 2 * params.gamma * float(p[1].sum())
    u = rng.uniform()
    if u * (w_mode + w_qubit) < w_mode:
        out, channel = lower_mode(psi), MODE_DECAY
    else:
        out, channel = lower_qubit(psi), QUBIT_DECAY
    norm = math.sqrt(float(np.vdot(out, out).real))
    if norm == 0:
        raise RuntimeError("collapse annihilated the state")
    return out / norm, channel


class _Ladder:
    """exp(-i H_eff h 2^k) for k = 0..levels, with 2^levels ticks per output step."""

    def __init__(self, params: SystemParams, n_max: int, dt_out: float, jump_tol: float):
        self.levels = max(0, math.ceil(math.log2(dt_out / jump_tol)))
        self.ticks = 1 << self.levels
        self.h = dt_out / self.ticks
        H = effective_hamiltonian_matrix(params, n_max)
        U = expm(-1j * self.h * H)
        self.U = [U]
        for _ in range(self.levels):
            U = U @ U
            self.U.append(U)

    def advance(self, v: np.ndarray, ticks: int) -> np.ndarray:
        k = 0
        while ticks:
            if ticks & 1:
                v = self.U[k] @ v
            ticks >>= 1
            k += 1
        return v


def _check_guard(v: np.ndarray, n_max: int, t: float) -> None:
    amps = v.reshape(2, n_max + 1)
    pop = float(np.sum(np.abs(amps[:, -2:]) ** 2) / np.vdot(v, v).real)
    if pop >= TRUNCATION_LIMIT:
        raise TruncationError(
            f"top two Fock levels hold population {pop:.3g} at t={t:g} (n_max={n_max}); raise n_max"
        )


def _evolve_ladder(v, params, n_max, n_steps, dt_out, rng, jump_tol):
    ladder = _Ladder(params, n_max, dt_out, jump_tol)
    shape = (2, n_max + 1)
    states = np.empty((n_steps + 1, v.size), dtype=complex)
    norms = np.empty(n_steps + 1)
    jump_t, jump_c = [], []
    states[0], norms[0] = v, 1.0
    r = rng.uniform()
    for k in range(1, n_steps + 1):
        t0 = (k - 1) * dt_out
        done = 0  # ticks already covered within this output step
        while True:
            remaining = ladder.ticks - done
            trial = ladder.advance(v, remaining)
            nrm = float(np.vdot(trial, trial).real)
            if nrm > r:
                v = trial
                break
            # largest j < remaining with norm still above threshold
            j = 0
            cur = v
            for lev in range(ladder.levels, -1, -1):
                step = 1 << lev
                if j + step >= remaining:
                    continue
                cand = ladder.U[lev] @ cur
                if np.vdot(cand, cand).real > r:
                    cur, j = cand, j + step
            at = ladder.U[0] @ cur
            done += j + 1
            psi, channel = _jump(at.reshape(shape), params, rng)
            v = psi.reshape(-1)
            jump_t.append(t0 + done * ladder.h)
            jump_c.append(channel)
            r = rng.uniform()
            if done == ladder.ticks:
                nrm = 1.0
                break
        norms[k] = nrm
        states[k] = v / math.sqrt(nrm)
        _check_guard(v, n_max, k * dt_out)
    return states, norms, jump_t, jump_c


def _evolve_rk(v, params, n_max, n_steps, dt_out, rng, rtol, atol):
    shape = (2, n_max + 1)

    def rhs(_t, y):
        return -1j * apply_effective_hamiltonian(y.reshape(shape), params).reshape(-1)

    t_samples = np.arange(n_steps + 1) * dt_out
    states = np.empty((n_steps + 1, v.size), dtype=complex)
    norms = np.empty(n_steps + 1)
    states[0], norms[0] = v, 1.0
    jump_t, jump_c = [], []
    t = 0.0
    next_k = 1
    r = rng.uniform()
    while next_k <= n_steps:

        def crossing(_t, y):
            return float(np.vdot(y, y).real) - r

        crossing.terminal = True
        crossing.direction = -1
        sol = solve_ivp(
            rhs, (t, t_samples[-1]), v, method="RK45", t_eval=t_samples[next_k:],
            events=crossing, rtol=rtol, atol=atol,
        )
        if sol.status == -1:
            raise StiffnessError(f"trajectory integration failed: {sol.message}", float(sol.t[-1]) if sol.t.size else t)
        ts = np.atleast_1d(np.asarray(sol.t, dtype=float))
        for j in range(ts.size):
            y = sol.y[:, j]
            nrm = float(np.vdot(y, y).real)
            norms[next_k] = nrm
            states[next_k] = y / math.sqrt(nrm)
            _check_guard(y, n_max, ts[j])
            next_k += 1
        if sol.status == 1:
            t = float(sol.t_events[0][0])
            psi, channel = _jump(sol.y_events[0][0].reshape(shape), params, rng)
            v = psi.reshape(-1)
            jump_t.append(t)
            jump_c.append(channel)
            r = rng.uniform()
            if next_k <= n_steps and math.isclose(t, t_samples[next_k], rel_tol=0, abs_tol=1e-12):
                norms[next_k], states[next_k] = 1.0, v
                next_k += 1
    return states, norms, jump_t, jump_c


def evolve_trajectory(
    initial: PureState,
    params: SystemParams,
    t_final: float,
    dt_out: float,
    seed: int,
    *,
    method: str = "expm",
    jump_tol: float = 1e-3,
    rtol: float = 1e-8,
    atol: float = 1e-10,
    snapshot_every: int = 0,
) -> TrajectoryRecord:
    """Run one quantum-jump trajectory from ``initial`` and record it every ``dt_out``.

    Parameters
    ----------
    method : {"expm", "rk"}
        Exact ladder propagation or adaptive Runge-Kutta integration.
    jump_tol : float
        Resolution of the jump-time search (ladder method).
    snapshot_every : int
        Keep the normalized state every this many samples (0 keeps none).
    """
    if params.gamma_c != 0:
        raise ValueError("trajectories do not support qubit dephasing (gamma_c must be 0)")
    if abs(initial.norm_sq - 1.0) > 1e-9:
        raise ValueError("initial state must be normalized")
    if t_final <= 0 or dt_out <= 0:
        raise ValueError("t_final and dt_out must be > 0")
    n_steps = int(round(t_final / dt_out))
    if not math.isclose(n_steps * dt_out, t_final, rel_tol=1e-9):
        raise ValueError("t_final must be a multiple of dt_out")
    n_max = initial.n_max
    rng = make_rng(seed)
    v = initial.vector.copy()
    if method == "expm":
        states, norms, jt, jc = _evolve_ladder(v, params, n_max, n_steps, dt_out, rng, jump_tol)
    elif method == "rk":
        states, norms, jt, jc = _evolve_rk(v, params, n_max, n_steps, dt_out, rng, rtol, atol)
    else:
        raise ValueError(f"unknown method {method!r}")
    amps = states.reshape(n_steps + 1, 2, n_max + 1)
    ev = batch_expectations(amps)
    kept = amps[::snapshot_every].copy() if snapshot_every else None
    return TrajectoryRecord(
        seed=int(seed),
        params=params,
        n_max=n_max,
        t=np.arange(n_steps + 1) * dt_out,
        n_mean=ev["n_mean"],
        a_mean=ev["a_mean"],
        sigma_mean=ev["sigma_mean"],
        sigma_z_mean=ev["sigma_z_mean"],
        photon_variance=ev["photon_variance"],
        norm_sq=norms,
        jump_times=np.array(jt, dtype=float),
        jump_channels=np.array(jc, dtype=np.int8),
        states=kept,
        state_stride=snapshot_every,
        settings={"method": method, "jump_tol": jump_tol, "rtol": rtol, "atol": atol},
    )


# ---------------------------------------------------------------------------
# ensembles


class EnsembleError(RuntimeError):
    """Some trajectories failed; ``records`` keeps the successful ones by index."""

    def __init__(self, failures: dict[int, BaseException], records: list[TrajectoryRecord | None]):
        lines = ", ".join(f"#{i}: {e}" for i, e in sorted(failures.items()))
        super().__init__(f"{len(failures)} trajectories failed: {lines}")
        self.failures = failures
        self.records = records


def _ensemble_task(args):
    index, initial, params, t_final, dt_out, seed, kwargs = args
    try:
        return index, evolve_trajectory(initial, params, t_final, dt_out, seed, **kwargs), None
    except (TruncationError, StiffnessError, RuntimeError, ValueError) as exc:
        return index, None, exc


def default_threads() -> int:
    env = os.environ.get("PBBSIM_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def run_ensemble(
    params: SystemParams,
    n_trajectories: int,
    t_final: float,
    dt_out: float,
    base_seed: int = 0,
    threads: int | None = None,
    *,
    n_max: int,
    initial: PureState | None = None,
    **kwargs,
) -> list[TrajectoryRecord]:
    """Run trajectories with seeds ``base_seed + i``, in worker processes.

    Results are ordered by index and do not depend on ``threads``.
    """
    if n_trajectories < 1:
        raise ValueError("n_trajectories must be >= 1")
    if initial is None:
        initial = PureState.ground(n_max)
    threads = default_threads() if threads is None else max(1, int(threads))
    tasks = [(i, initial, params, t_final, dt_out, base_seed + i, kwargs) for i in range(n_trajectories)]
    records: list[TrajectoryRecord | None] = [None] * n_trajectories
    failures: dict[int, BaseException] = {}
    if threads == 1:
        results = map(_ensemble_task, tasks)
        for i, rec, exc in results:
            records[i] = rec
            if exc is not None:
                failures[i] = exc
    else:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            for i, rec, exc in pool.map(_ensemble_task, tasks):
                records[i] = rec
                if exc is not None:
                    failures[i] = exc
    if failures:
        raise EnsembleError(failures, records)
    return records


# ---------------------------------------------------------------------------
# master equation reference


def _dense_operators(n_max: int):
    """Sparse a, sigma on the qubit (x) mode space, built by Kronecker products."""
    N = n_max + 1
    a_mode = sp.diags(np.sqrt(np.arange(1, N)), 1, shape=(N, N), format="csr")
    sigma_q = sp.csr_matrix(np.array([[0.0, 1.0], [0.0, 0.0]]))  # |g><e| with rows (g, e)
    a = sp.kron(sp.identity(2), a_mode, format="csr")
    sigma = sp.kron(sigma_q, sp.identity(N), format="csr")
    return a, sigma


@dataclass
class DensityMatrix:
    n_max: int
    matrix: np.ndarray

    def __post_init__(self):
        dim = 2 * (self.n_max + 1)
        self.matrix = np.asarray(self.matrix, dtype=complex)
        if self.matrix.shape != (dim, dim):
            raise ValueError(f"density matrix must be {dim}x{dim}")

    @classmethod
    def from_pure(cls, state: PureState) -> DensityMatrix:
        v = state.vector / math.sqrt(state.norm_sq)
        return cls(state.n_max, np.outer(v, v.conj()))

    @property
    def trace(self) -> float:
        return float(np.trace(self.matrix).real)

    def observables(self) -> dict[str, float | complex]:
        return _rho_observables(self.matrix, self.n_max)


def _rho_observables(rho: np.ndarray, n_max: int) -> dict:
    N = n_max + 1
    m = np.arange(N)
    diag = np.diag(rho).real.reshape(2, N)
    pm = diag.sum(axis=0)
    n_mean = float(pm @ m)
    blocks = rho.reshape(2, N, 2, N)
    a_mean = complex(sum(np.sum(np.diagonal(blocks[q, 1:, q, :-1]) * np.sqrt(m[1:])) for q in (0, 1)))
    sigma_mean = complex(np.trace(blocks[1, :, 0, :]))
    return {
        "n_mean": n_mean,
        "a_mean": a_mean,
        "sigma_mean": sigma_mean,
        "sigma_z_mean": float(diag[1].sum() - diag[0].sum()),
        "photon_variance": float(pm @ (m * m) - n_mean**2),
    }


@dataclass
class MasterEquationResult:
    t: np.ndarray
    n_mean: np.ndarray
    a_mean: np.ndarray
    sigma_mean: np.ndarray
    sigma_z_mean: np.ndarray
    photon_variance: np.ndarray
    trace: np.ndarray
    final: DensityMatrix


MAX_ME_DIM = 162


def _liouvillian_parts(params: SystemParams, n_max: int):
    a, sigma = _dense_operators(n_max)
    N = n_max + 1
    ad, sd = a.T.tocsr(), sigma.T.tocsr()
    num = ad @ a
    H = (
        -params.delta * (num + sd @ sigma)
        + 1j * params.g * (ad @ sigma - a @ sd)
        + 1j * params.eta * (ad - a)
    )
    H_eff = (H - 1j * params.kappa * num - 1j * params.gamma * (sd @ sigma)).tocsr()
    return H_eff, a, sigma, N


def master_equation_rhs(rho: np.ndarray, params: SystemParams, n_max: int) -> np.ndarray:
    H_eff, a, sigma, _ = _liouvillian_parts(params, n_max)
    return _me_rhs(rho, H_eff, a, sigma, params)


def _me_rhs(rho, H_eff, a, sigma, params):
    Hr = H_eff @ rho
    out = -1j * (Hr - (H_eff @ rho.conj().T).conj().T)
    ar = a @ rho
    out += 2 * params.kappa * (a @ ar.conj().T).conj().T
    if params.gamma:
        sr = sigma @ rho
        out += 2 * params.gamma * (sigma @ sr.conj().T).conj().T
    return out


def master_equation_evolve(
    initial: DensityMatrix,
    params: SystemParams,
    t_final: float,
    dt_out: float,
    rtol: float = 1e-8,
    atol: float = 1e-10,
) -> MasterEquationResult:
    """Integrate the Lindblad master equation for small truncations.

    Operators are assembled independently of the trajectory stencils
    (sparse Kronecker products).  Each output density matrix is
    Hermitian-symmetrized before observables are taken.
    """
    if params.gamma_c != 0:
        raise ValueError("master equation has no dephasing channel (gamma_c must be 0)")
    n_max = initial.n_max
    dim = 2 * (n_max + 1)
    if dim > MAX_ME_DIM:
        raise ValueError(f"dimension {dim} exceeds the dense integrator limit {MAX_ME_DIM}")
    H_eff, a, sigma, N = _liouvillian_parts(params, n_max)

    def rhs(_t, y):
        return _me_rhs(y.reshape(dim, dim), H_eff, a, sigma, params).reshape(-1)

    n_steps = int(round(t_final / dt_out))
    t_eval = np.arange(n_steps + 1) * dt_out
    sol = solve_ivp(
        rhs, (0.0, t_eval[-1]), initial.matrix.reshape(-1), method="DOP853",
        t_eval=t_eval, rtol=rtol, atol=atol,
    )
    if sol.status != 0:
        raise StiffnessError(f"master equation integration failed: {sol.message}", float(sol.t[-1]) if sol.t.size else 0.0)
    cols = {k: [] for k in ("n_mean", "a_mean", "sigma_mean", "sigma_z_mean", "photon_variance")}
    traces = []
    rho = initial.matrix
    for j in range(sol.t.size):
        rho = sol.y[:, j].reshape(dim, dim)
        rho = 0.5 * (rho + rho.conj().T)
        traces.append(float(np.trace(rho).real))
        for k, v in _rho_observables(rho, n_max).items():
            cols[k].append(v)
    return MasterEquationResult(
        t=sol.t,
        **{k: np.array(v) for k, v in cols.items()},
        trace=np.array(traces),
        final=DensityMatrix(n_max, rho),
    )
