"""Driven-dissipative Jaynes-Cummings model on a truncated qubit x Fock space.

Rates are dimensionless multiples of the mode decay rate (kappa = 1 by
convention). Basis ordering is ``index = q * (n_max + 1) + m`` with
``q = 0`` for the ground level and ``q = 1`` for the excited level, so the
amplitude vector reshapes to a ``(2, n_max + 1)`` array.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "SystemParams",
    "PureState",
    "Observables",
    "TruncationError",
    "apply_hamiltonian",
    "apply_effective_hamiltonian",
    "effective_hamiltonian_matrix",
    "expectations",
    "batch_expectations",
    "qubit_density_matrix",
    "default_n_max",
    "lower_mode",
    "raise_mode",
    "lower_qubit",
    "raise_qubit",
]

TRUNCATION_LIMIT = 1e-4
NORM_TOL = 1e-9


class TruncationError(RuntimeError):
    """Raised when amplitude piles up at the top of the Fock truncation."""


@dataclass(frozen=True)
class SystemParams:
    """Physical parameters, all in units of the mode decay rate.

    ``gamma_c`` is a pure-dephasing rate used only by the mean-field
    theories; the trajectory engine refuses it.
    """

    g: float
    kappa: float = 1.0
    gamma: float = 0.0
    gamma_c: float = 0.0
    delta: float = 0.0
    eta: float = 0.0

    def __post_init__(self):
        for name in ("g", "kappa", "gamma", "gamma_c", "delta", "eta"):
            value = getattr(self, name)
            if not isinstance(value, (int, float)) or not math.isfinite(value):
                raise ValueError(f"{name} must be a finite number, got {value!r}")
            object.__setattr__(self, name, float(value))
        if self.kappa <= 0:
            raise ValueError(f"kappa must be > 0, got {self.kappa}")
        for name in ("g", "gamma", "gamma_c", "eta"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0, got {getattr(self, name)}")

    @property
    def gamma_perp(self) -> float:
        return self.gamma + self.gamma_c

    @property
    def empty_cavity_photons(self) -> float:
        """Photon number of the detuned, uncoupled driven mode."""
        return self.eta**2 / (self.kappa**2 + self.delta**2)

    def replace(self, **changes) -> SystemParams:
        return dataclasses.replace(self, **changes)


def default_n_max(params: SystemParams) -> int:
    return math.ceil(3 * params.eta**2 / (params.delta**2 + params.kappa**2)) + 30


# Matrix-free stencils.  All act on arrays whose last two axes are (qubit, m).


def lower_mode(psi: np.ndarray) -> np.ndarray:
    out = np.zeros_like(psi)
    m = np.sqrt(np.arange(1, psi.shape[-1]))
    out[..., :-1] = m * psi[..., 1:]
    return out


def raise_mode(psi: np.ndarray) -> np.ndarray:
    # amplitude pushed above n_max is dropped (truncation)
    out = np.zeros_like(psi)
    m = np.sqrt(np.arange(1, psi.shape[-1]))
    out[..., 1:] = m * psi[..., :-1]
    return out


def lower_qubit(psi: np.ndarray) -> np.ndarray:
    out = np.zeros_like(psi)
    out[..., 0, :] = psi[..., 1, :]
    return out


def raise_qubit(psi: np.ndarray) -> np.ndarray:
    out = np.zeros_like(psi)
    out[..., 1, :] = psi[..., 0, :]
    return out


class PureState:
    """Amplitude vector on the truncated qubit x Fock basis.

    Single-owner mutable: ``normalize`` and ``assign`` work in place.
    """

    def __init__(self, amplitudes, n_max: int | None = None):
        amps = np.array(amplitudes, dtype=complex)
        if amps.ndim == 1:
            if n_max is None:
                if amps.size % 2:
                    raise ValueError("flat amplitude vector must have even length")
                n_max = amps.size // 2 - 1
            if amps.size != 2 * (n_max + 1):
                raise ValueError(
                    f"expected {2 * (n_max + 1)} amplitudes for n_max={n_max}, got {amps.size}"
                )
            amps = amps.reshape(2, n_max + 1)
        elif amps.ndim == 2 and amps.shape[0] == 2:
            if n_max is not None and amps.shape[1] != n_max + 1:
                raise ValueError("amplitude shape does not match n_max")
        else:
            raise ValueError(f"bad amplitude shape {amps.shape}")
        self.amplitudes = amps
        self.norm_sq = float(np.vdot(amps, amps).real)

    @property
    def n_max(self) -> int:
        return self.amplitudes.shape[1] - 1

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    @property
    def vector(self) -> np.ndarray:
        """Flat view in the documented basis ordering."""
        return self.amplitudes.reshape(-1)

    @classmethod
    def basis(cls, qubit: int, m: int, n_max: int) -> PureState:
        if qubit not in (0, 1) or not 0 <= m <= n_max:
            raise ValueError(f"|{qubit},{m}> is outside the basis with n_max={n_max}")
        amps = np.zeros((2, n_max + 1), dtype=complex)
        amps[qubit, m] = 1.0
        return cls(amps)

    @classmethod
    def ground(cls, n_max: int) -> PureState:
        return cls.basis(0, 0, n_max)

    @classmethod
    def coherent(cls, alpha: complex, n_max: int, qubit: int = 0) -> PureState:
        """Truncated coherent state |alpha> times a qubit basis state (not renormalized)."""
        m = np.arange(n_max + 1)
        # log-space to keep large alpha finite
        log_mag = -abs(alpha) ** 2 / 2 + m * np.log(abs(alpha) or 1.0) - 0.5 * _log_factorial(m)
        if alpha == 0:
            coeffs = (m == 0).astype(complex)
        else:
            coeffs = np.exp(log_mag) * np.exp(1j * m * np.angle(alpha))
        amps = np.zeros((2, n_max + 1), dtype=complex)
        amps[qubit] = coeffs
        return cls(amps)

    def copy(self) -> PureState:
        return PureState(self.amplitudes.copy())

    def assign(self, amplitudes: np.ndarray) -> None:
        self.amplitudes[...] = amplitudes
        self.norm_sq = float(np.vdot(self.amplitudes, self.amplitudes).real)

    def normalize(self) -> PureState:
        if self.norm_sq == 0:
            raise ValueError("cannot normalize the zero vector")
        self.amplitudes /= math.sqrt(self.norm_sq)
        self.norm_sq = float(np.vdot(self.amplitudes, self.amplitudes).real)
        return self

    def top_population(self, levels: int = 2) -> float:
        """Population of the highest ``levels`` Fock levels, relative to the norm."""
        top = np.sum(np.abs(self.amplitudes[:, -levels:]) ** 2)
        return float(top / self.norm_sq)

    def check_truncation(self, limit: float = TRUNCATION_LIMIT) -> None:
        pop = self.top_population()
        if pop >= limit:
            raise TruncationError(
                f"top two Fock levels hold population {pop:.3g} >= {limit:g} (n_max={self.n_max})"
            )

    def __add__(self, other: PureState) -> PureState:
        return PureState(self.amplitudes + other.amplitudes)

    def __sub__(self, other: PureState) -> PureState:
        return PureState(self.amplitudes - other.amplitudes)

    def __rmul__(self, c: complex) -> PureState:
        return PureState(c * self.amplitudes)

    def __repr__(self):
        return f"PureState(n_max={self.n_max}, norm_sq={self.norm_sq:.12g})"


def _log_factorial(m: np.ndarray) -> np.ndarray:
    from scipy.special import gammaln

    return gammaln(np.asarray(m, dtype=float) + 1)


def _hamiltonian_action(psi: np.ndarray, params: SystemParams) -> np.ndarray:
    n = np.arange(psi.shape[-1])
    excitations = n + np.array([[0.0], [1.0]])
    a_psi = lower_mode(psi)
    ad_psi = raise_mode(psi)
    out = -params.delta * excitations * psi
    out += 1j * params.g * (raise_mode(lower_qubit(psi)) - lower_mode(raise_qubit(psi)))
    out += 1j * params.eta * (ad_psi - a_psi)
    return out


def apply_hamiltonian(state: PureState, params: SystemParams) -> PureState:
    """Return H|psi> for the rotating-frame driven Jaynes-Cummings Hamiltonian.

    H = -delta (a^dag a + sigma^dag sigma) + i g (a^dag sigma - a sigma^dag)
        + i eta (a^dag - a)

    The result is not normalized.
    """
    return PureState(_hamiltonian_action(state.amplitudes, params))


def apply_effective_hamiltonian(psi: np.ndarray, params: SystemParams) -> np.ndarray:
    """H_eff psi with H_eff = H - i kappa a^dag a - i gamma sigma^dag sigma (array in, array out)."""
    n = np.arange(psi.shape[-1])
    damping = params.kappa * n + params.gamma * np.array([[0.0], [1.0]])
    return _hamiltonian_action(psi, params) - 1j * damping * psi


def effective_hamiltonian_matrix(params: SystemParams, n_max: int) -> np.ndarray:
    """Dense H_eff, materialized column by column from the stencil."""
    dim = 2 * (n_max + 1)
    basis = np.eye(dim, dtype=complex).reshape(dim, 2, n_max + 1)
    cols = apply_effective_hamiltonian(basis, params).reshape(dim, dim)
    return cols.T.copy()


@dataclass(frozen=True)
class Observables:
    n_mean: float
    a_mean: complex
    sigma_mean: complex
    sigma_z_mean: float
    photon_variance: float


def batch_expectations(amps: np.ndarray) -> dict[str, np.ndarray]:
    """Expectation values for a stack of normalized states of shape (..., 2, N)."""
    p = np.abs(amps) ** 2
    m = np.arange(amps.shape[-1])
    pm = p.sum(axis=-2)
    n_mean = pm @ m
    n2 = pm @ (m * m)
    a_mean = np.sum(np.conj(amps[..., :, :-1]) * amps[..., :, 1:] * np.sqrt(m[1:]), axis=(-2, -1))
    sigma_mean = np.sum(np.conj(amps[..., 0, :]) * amps[..., 1, :], axis=-1)
    sigma_z = p[..., 1, :].sum(axis=-1) - p[..., 0, :].sum(axis=-1)
    return {
        "n_mean": n_mean,
        "a_mean": a_mean,
        "sigma_mean": sigma_mean,
        "sigma_z_mean": sigma_z,
        "photon_variance": np.maximum(n2 - n_mean**2, 0.0),
    }


def expectations(state: PureState) -> Observables:
    if abs(state.norm_sq - 1.0) > NORM_TOL:
        raise ValueError(f"state is not normalized (norm_sq={state.norm_sq!r})")
    ev = batch_expectations(state.amplitudes)
    return Observables(
        n_mean=float(ev["n_mean"]),
        a_mean=complex(ev["a_mean"]),
        sigma_mean=complex(ev["sigma_mean"]),
        sigma_z_mean=float(ev["sigma_z_mean"]),
        photon_variance=float(ev["photon_variance"]),
    )


def qubit_density_matrix(state: PureState) -> np.ndarray:
    """Reduced qubit state, rows/columns ordered (g, e)."""
    amps = state.amplitudes / math.sqrt(state.norm_sq)
    return amps @ amps.conj().T
