"""Mean-field (semiclassical and neoclassical) descriptions of the driven JC model.

Both theories reduce the steady state to a self-consistent equation
``n = eta**2 / denom(n)``.  Writing ``F(n) = n * denom(n)`` the drive
amplitude is ``eta = sqrt(F(n))``, so the folds of ``F`` are the edges of
the bistable window and the sign of ``F'`` at a root is the sign of
``dn/deta`` along its branch.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import Polynomial
from scipy.integrate import solve_ivp

from .model import SystemParams

__all__ = [
    "Root",
    "RootSet",
    "BoundaryPoint",
    "BoundaryCurve",
    "MeanFieldState",
    "MeanFieldTrajectory",
    "IntegrationError",
    "semiclassical_roots",
    "neoclassical_roots",
    "intuitive_photon_number",
    "intuitive_critical_eta",
    "semiclassical_shift",
    "semiclassical_denominator",
    "neoclassical_denominator",
    "intuitive_denominator",
    "fold_drives",
    "trace_boundary",
    "semiclassical_pseudospin",
    "semiclassical_fixed_point",
    "mean_field_rhs",
    "maxwell_bloch_integrate",
]

log = logging.getLogger(__name__)

STABLE_DIM = "stable_dim"
STABLE_BRIGHT = "stable_bright"
UNSTABLE = "unstable"
NONPHYSICAL = "nonphysical"

THEORIES = ("semiclassical", "neoclassical", "intuitive")


@dataclass(frozen=True)
class Root:
    n: float
    kind: str
    residual: float

    @property
    def physical(self) -> bool:
        return self.kind != NONPHYSICAL


@dataclass(frozen=True)
class RootSet:
    theory: str
    params: SystemParams
    roots: tuple[Root, ...]
    degenerate: bool = False

    @property
    def physical(self) -> tuple[Root, ...]:
        return tuple(r for r in self.roots if r.physical)

    def of_kind(self, kind: str) -> tuple[Root, ...]:
        return tuple(r for r in self.roots if r.kind == kind)

    @property
    def bright(self) -> Root | None:
        found = self.of_kind(STABLE_BRIGHT)
        return found[-1] if found else None

    @property
    def dim(self) -> Root | None:
        found = self.of_kind(STABLE_DIM)
        return found[0] if found else None

    @property
    def bistable(self) -> bool:
        return len(self.physical) >= 2


# ---------------------------------------------------------------------------
# self-consistent denominators


def _shift_coefficients(p: SystemParams) -> tuple[float, float]:
    """(w, r) with dispersive-shift strength A(n) = w / (n + r).

    The shift is S(n) = g<sigma>/<a> = -A(n) (gamma_perp + i delta).  With no
    dephasing the common factor gamma is cancelled so that gamma -> 0 can be
    taken after the steady state.  Returns (0, inf) when the shift vanishes.
    """
    g2 = p.g**2
    gp = p.gamma_perp
    if g2 == 0 or (p.gamma_c > 0 and p.gamma == 0):
        return 0.0, math.inf
    if p.gamma_c == 0:
        return 0.5, (p.delta**2 + p.gamma**2) / (2 * g2)
    return p.gamma / (2 * gp), p.gamma * (p.delta**2 + gp**2) / (2 * g2 * gp)


def _semiclassical_shift_vanishes(p: SystemParams) -> bool:
    w, r = _shift_coefficients(p)
    # delta = gamma_perp = 0 leaves -A(n)(gamma_perp + i delta) = 0 for n > 0
    return w == 0 or not math.isfinite(r) or (p.delta == 0 and p.gamma_perp == 0)


def _shift_strength(n, p: SystemParams):
    w, r = _shift_coefficients(p)
    den = n + r
    if np.ndim(den) == 0 and den == 0:
        return math.inf
    return w / den


def semiclassical_shift(n, p: SystemParams):
    """Dispersive shift g<sigma>/<a> = -A(n) (gamma_perp + i delta) at photon number n."""
    if _semiclassical_shift_vanishes(p):
        return 0j * n
    return -_shift_strength(n, p) * (p.gamma_perp + 1j * p.delta)


def semiclassical_denominator(n, p: SystemParams):
    """|kappa - i delta - S(n)|**2 from the steady state of the Maxwell-Bloch equations."""
    if _semiclassical_shift_vanishes(p):
        return p.kappa**2 + p.delta**2 + 0 * n
    w, r = _shift_coefficients(p)
    den = n + r
    if np.ndim(den) == 0 and den == 0:
        return math.inf  # n = 0 with r = 0: the absorptive shift diverges
    # products before division so that a huge A(n) meets a tiny rate gracefully
    return (p.kappa + (w * p.gamma_perp) / den) ** 2 + (p.delta - (p.delta * w) / den) ** 2


def _sgn(delta: float) -> float:
    return 1.0 if delta >= 0 else -1.0


def neoclassical_denominator(n, p: SystemParams, branch: float = 1.0):
    """kappa**2 + (delta - sgn(delta) g**2 / sqrt(4 g**2 n + delta**2))**2.

    ``branch=-1`` flips the sign of the shift, the equation obeyed by the
    spurious lowest root of the quartic.
    """
    s = branch * _sgn(p.delta)
    u = np.sqrt(4 * p.g**2 * n + p.delta**2)
    return p.kappa**2 + (p.delta - s * p.g**2 / u) ** 2


def intuitive_denominator(x, p: SystemParams):
    """Denominator as a function of the signed amplitude x = sqrt(n')."""
    return p.kappa**2 + (p.delta - p.g / (2 * x)) ** 2


def _residual(n: float, denom: float, eta: float) -> float:
    return abs(n - eta**2 / denom)


def _residual_tol(eta: float) -> float:
    return 1e-9 * max(1.0, eta**2)


def _newton_polish(F, n0: float, target: float, steps: int = 4) -> float:
    """Newton on F(n) = target with complex-step derivatives; keeps the best iterate."""
    best, best_err = n0, abs(F(n0) - target)
    n = n0
    for _ in range(steps):
        h = 1e-20 * max(1.0, abs(n))
        val = F(complex(n, h))
        deriv = val.imag / h
        if deriv == 0 or not math.isfinite(deriv):
            break
        n = n - (val.real - target) / deriv
        if n < 0:
            break
        err = abs(F(n) - target)
        if err < best_err:
            best, best_err = n, err
    return best


def _slope_sign(F, n: float) -> float:
    # d n / d eta = 2 eta / F'(n): central difference on F
    h = 1e-6 * max(n, 1e-8)
    return np.sign(F(n + h) - F(n - h))


def _real_roots(poly: Polynomial, rel_imag: float = 1e-7) -> np.ndarray:
    roots = poly.roots()
    keep = np.abs(roots.imag) <= rel_imag * np.maximum(1.0, np.abs(roots.real))
    return np.sort(roots[keep].real)


def _dedupe(values, rtol: float = 1e-9):
    out = []
    for v in sorted(values):
        if out and abs(v - out[-1]) <= rtol * max(1.0, abs(v)):
            continue
        out.append(v)
    return out


def _classify(ns, F, folds, p: SystemParams) -> list[str]:
    """Label physical roots: negative-slope branch unstable, extremes dim/bright."""
    kinds = []
    slopes = [_slope_sign(F, n) for n in ns]
    stable = [n for n, s in zip(ns, slopes) if s > 0]
    for n, s in zip(ns, slopes):
        if s <= 0 and len(ns) > 1:
            kinds.append(UNSTABLE)
        elif len(stable) >= 2:
            kinds.append(STABLE_DIM if n == stable[0] else STABLE_BRIGHT)
        elif len(folds) >= 2:
            # single stable root: which branch of the S-curve it sits on
            kinds.append(STABLE_DIM if n <= folds[0] else STABLE_BRIGHT)
        else:
            kinds.append(STABLE_BRIGHT if n >= 0.5 * p.empty_cavity_photons else STABLE_DIM)
    return kinds


# ---------------------------------------------------------------------------
# semiclassical


def _semiclassical_polys(p: SystemParams) -> tuple[Polynomial, Polynomial]:
    """Numerator N(n) (cubic) and D(n) (linear) with F(n) = N / D**2."""
    w, r = _shift_coefficients(p)
    n = Polynomial([0.0, 1.0])
    D = Polynomial([r, 1.0])
    N = n * ((p.kappa * D + w * p.gamma_perp) ** 2 + p.delta**2 * (D - w) ** 2)
    return N, D


def _semiclassical_folds(p: SystemParams) -> list[float]:
    if _semiclassical_shift_vanishes(p):
        return []
    N, D = _semiclassical_polys(p)
    crit = N.deriv() * D - 2 * N * D.deriv()
    return [n for n in _dedupe(_real_roots(crit)) if n > 0]


def semiclassical_roots(params: SystemParams) -> RootSet:
    """Steady-state photon numbers of the Maxwell-Bloch equations.

    Uses the general form with qubit decay ``gamma`` and dephasing
    ``gamma_c``; the familiar gamma -> 0 equation is the ``gamma_c = 0``
    limit.  Clearing the denominator gives a cubic in ``n`` whose real
    non-negative roots are polished by Newton and checked against the
    fixed-point residual.
    """
    p = params
    F = lambda n: n * semiclassical_denominator(n, p)  # noqa: E731
    if p.eta == 0:
        return RootSet("semiclassical", p, (Root(0.0, STABLE_DIM, 0.0),))
    if _semiclassical_shift_vanishes(p):
        n = p.empty_cavity_photons
        res = _residual(n, semiclassical_denominator(n, p), p.eta)
        return RootSet("semiclassical", p, (Root(n, STABLE_BRIGHT, res),))

    N, D = _semiclassical_polys(p)
    poly = N - p.eta**2 * D**2
    candidates = [_newton_polish(F, n, p.eta**2) for n in _real_roots(poly) if n > -1e-12]
    good = []
    for n in _dedupe(max(n, 0.0) for n in candidates):
        res = _residual(n, semiclassical_denominator(n, p), p.eta)
        if res < _residual_tol(p.eta):
            good.append((n, res))
        else:
            log.debug("dropping semiclassical candidate n=%g residual=%g", n, res)
    folds = _semiclassical_folds(p)
    kinds = _classify([n for n, _ in good], F, folds, p)
    roots = tuple(Root(n, k, r) for (n, r), k in zip(good, kinds))
    return RootSet("semiclassical", p, roots)


# ---------------------------------------------------------------------------
# neoclassical


def _neoclassical_quartic(p: SystemParams) -> Polynomial:
    """Quartic in u = sqrt(4 g^2 n + delta^2) (sign of u left free)."""
    s = _sgn(p.delta)
    u = Polynomial([0.0, 1.0])
    shift = (p.kappa**2 + p.delta**2) * u**2 - 2 * s * p.delta * p.g**2 * u + p.g**4
    return (u**2 - p.delta**2) * shift - 4 * p.g**2 * p.eta**2 * u**2


def _neoclassical_folds(p: SystemParams) -> list[float]:
    """Folds of F(n) on the physical branch, found as critical points in u."""
    if p.g == 0 or p.delta == 0:
        return []
    s = _sgn(p.delta)
    u = Polynomial([0.0, 1.0])
    B = (p.kappa**2 + p.delta**2) * u**2 - 2 * s * p.delta * p.g**2 * u + p.g**4
    crit = 2 * p.delta**2 * B + u * (u**2 - p.delta**2) * B.deriv()
    us = [x for x in _dedupe(_real_roots(crit)) if x > abs(p.delta)]
    return [(x * x - p.delta**2) / (4 * p.g**2) for x in us]


def neoclassical_roots(params: SystemParams) -> RootSet:
    """Roots of the pure-qubit (pseudospin-conserving) mean-field theory.

    The quartic in ``u`` has up to four real roots with ``|u| >= |delta|``.
    Those with ``u > 0`` solve the self-consistent equation; the single
    root with ``u < 0`` belongs to the opposite-sign shift, lies below all
    others and is reported as nonphysical.  ``gamma`` is ignored.

    ``delta = 0`` uses sgn(0) = +1 as a limit convention: the dim root sits
    at ``n = 0`` for ``eta < g/2``, the bright root at
    ``n = (eta**2 - g**2/4) / kappa**2`` above it, and ``eta == g/2`` is
    reported as the degenerate critical point.
    """
    p = params
    F = lambda n: n * neoclassical_denominator(n, p)  # noqa: E731
    if p.eta == 0:
        return RootSet("neoclassical", p, (Root(0.0, STABLE_DIM, 0.0),))
    if p.g == 0:
        n = p.empty_cavity_photons
        return RootSet(
            "neoclassical", p, (Root(n, STABLE_BRIGHT, _residual(n, p.kappa**2 + p.delta**2, p.eta)),)
        )
    if p.delta == 0:
        return _neoclassical_resonant(p)

    F_opp = lambda n: n * neoclassical_denominator(n, p, branch=-1.0)  # noqa: E731
    physical, spurious = [], []
    for u in _real_roots(_neoclassical_quartic(p)):
        if abs(u) < abs(p.delta) * (1 - 1e-12):
            continue
        n = max((u * u - p.delta**2) / (4 * p.g**2), 0.0)
        if u > 0:
            physical.append(_newton_polish(F, n, p.eta**2))
        else:
            spurious.append(_newton_polish(F_opp, n, p.eta**2))

    good = []
    for n in _dedupe(physical):
        res = _residual(n, neoclassical_denominator(n, p), p.eta)
        if res < _residual_tol(p.eta):
            good.append((n, res))
    folds = _neoclassical_folds(p)
    kinds = _classify([n for n, _ in good], F, folds, p)
    roots = [Root(n, k, r) for (n, r), k in zip(good, kinds)]
    for n in _dedupe(spurious):
        res = _residual(n, neoclassical_denominator(n, p, branch=-1.0), p.eta)
        if res < _residual_tol(p.eta):
            roots.append(Root(n, NONPHYSICAL, res))
    roots.sort(key=lambda r: r.n)
    return RootSet("neoclassical", p, tuple(roots))


def _neoclassical_resonant(p: SystemParams) -> RootSet:
    half_g = p.g / 2
    bright = (p.eta**2 - half_g**2) / p.kappa**2
    if math.isclose(p.eta, half_g, rel_tol=1e-12, abs_tol=0.0):
        return RootSet("neoclassical", p, (Root(0.0, STABLE_DIM, 0.0),), degenerate=True)
    if p.eta < half_g:
        return RootSet("neoclassical", p, (Root(0.0, STABLE_DIM, 0.0),))
    res = _residual(bright, neoclassical_denominator(bright, p), p.eta)
    return RootSet("neoclassical", p, (Root(bright, STABLE_BRIGHT, res),))


# ---------------------------------------------------------------------------
# dressed-ladder estimate


def intuitive_critical_eta(params: SystemParams) -> float:
    """Drive amplitude above which the ladder estimate has real roots."""
    p = params
    return p.kappa * p.g / (2 * math.sqrt(p.kappa**2 + p.delta**2))


def intuitive_photon_number(params: SystemParams) -> RootSet:
    """Photon number of a coherent state resonant with the '+' dressed ladder.

    Quadratic in x = sqrt(n'): (kappa^2 + delta^2) x^2 - delta g x + g^2/4 - eta^2 = 0.
    Returns no roots below the critical drive, two above; a root with
    x < 0 is nonphysical.  ``n`` of each root is x**2.
    """
    p = params
    if p.delta <= 0:
        raise ValueError(f"the ladder estimate needs delta > 0, got {p.delta}")
    a = p.kappa**2 + p.delta**2
    b = -p.delta * p.g
    c = p.g**2 / 4 - p.eta**2
    disc = b * b - 4 * a * c
    if disc < 0:
        return RootSet("intuitive", p, ())
    sq = math.sqrt(disc)
    x_hi = (-b + sq) / (2 * a)
    x_lo = c / (a * x_hi) if x_hi != 0 else (-b - sq) / (2 * a)
    roots = []
    for x, kind in ((x_lo, UNSTABLE), (x_hi, STABLE_BRIGHT)):
        if x < 0:
            kind = NONPHYSICAL
        n = x * x
        res = 0.0 if x == 0 else _residual(n, intuitive_denominator(x, p), p.eta)
        roots.append(Root(n, kind, res))
    roots.sort(key=lambda r: r.n)
    return RootSet("intuitive", p, tuple(roots), degenerate=disc == 0)


# ---------------------------------------------------------------------------
# bistability boundaries


def _roots_for(theory: str):
    return {"semiclassical": semiclassical_roots, "neoclassical": neoclassical_roots}[theory]


def fold_drives(theory: str, params: SystemParams) -> list[float]:
    """Drive amplitudes at the folds of the S-curve (``params.eta`` unused), sorted."""
    if theory == "semiclassical":
        folds = _semiclassical_folds(params)
        F = lambda n: n * semiclassical_denominator(n, params)  # noqa: E731
    elif theory == "neoclassical":
        folds = _neoclassical_folds(params)
        F = lambda n: n * neoclassical_denominator(n, params)  # noqa: E731
    else:
        raise ValueError(f"no fold structure for theory {theory!r}")
    return sorted(math.sqrt(F(n)) for n in folds)


@dataclass(frozen=True)
class BoundaryPoint:
    delta: float
    eta_lower: float
    eta_upper: float


@dataclass
class BoundaryCurve:
    theory: str
    gamma: float
    gamma_c: float
    g: float
    points: list[BoundaryPoint] = field(default_factory=list)


def _physical_count(theory: str, p: SystemParams) -> int:
    return len(_roots_for(theory)(p).physical)


def _bisect(pred, lo: float, hi: float, tol: float, max_iter: int) -> float:
    """pred(lo) is False, pred(hi) is True; returns the midpoint of the final bracket."""
    for _ in range(max_iter):
        if hi - lo <= tol:
            break
        mid = 0.5 * (lo + hi)
        if pred(mid):
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def trace_boundary(
    theory: str,
    gamma: float,
    gamma_c: float,
    delta_grid,
    g: float = 100.0,
    kappa: float = 1.0,
    tol: float = 1e-3,
    max_iter: int = 60,
) -> BoundaryCurve:
    """Edges of the bistable window in eta for each detuning.

    The fold amplitudes give a point inside the window; each edge is then
    bisected on the switch between one and at least two physical roots.
    Detunings without a window are omitted.
    """
    if theory not in ("semiclassical", "neoclassical"):
        raise ValueError(f"unknown theory {theory!r}")
    deltas = list(delta_grid)
    if any(b < a for a, b in zip(deltas, deltas[1:])):
        raise ValueError("delta_grid must be sorted")
    curve = BoundaryCurve(theory, gamma, gamma_c, g)
    for delta in deltas:
        base = SystemParams(g=g, kappa=kappa, gamma=gamma, gamma_c=gamma_c, delta=delta, eta=0.0)
        folds = fold_drives(theory, base)
        if len(folds) < 2:
            continue
        lo_fold, hi_fold = folds[0], folds[-1]
        inside = 0.5 * (lo_fold + hi_fold)

        def multi(eta):
            return _physical_count(theory, base.replace(eta=eta)) >= 2

        if not multi(inside):
            continue
        lo_out = 0.5 * lo_fold
        hi_out = 2.0 * hi_fold + kappa
        if multi(lo_out) or multi(hi_out):
            log.warning("bracket check failed at delta=%g; skipping", delta)
            continue
        eta_lower = _bisect(multi, lo_out, inside, tol, max_iter)
        eta_upper = _bisect(lambda e: not multi(e), inside, hi_out, tol, max_iter)
        curve.points.append(BoundaryPoint(delta, eta_lower, eta_upper))
    return curve


# ---------------------------------------------------------------------------
# Maxwell-Bloch dynamics


def semiclassical_pseudospin(n_mean: float, params: SystemParams) -> float:
    if n_mean < 0:
        raise ValueError("n_mean must be >= 0")
    x = 2 * params.g**2 * n_mean
    if x == 0:
        return 1.0
    return 1.0 - (x / (x + params.delta**2)) ** 2


@dataclass(frozen=True)
class MeanFieldState:
    a_mean: complex
    sigma_mean: complex
    sigma_z_mean: float

    @property
    def pseudospin(self) -> float:
        return 4 * abs(self.sigma_mean) ** 2 + self.sigma_z_mean**2

    def to_array(self) -> np.ndarray:
        a, s = self.a_mean, self.sigma_mean
        return np.array([a.real, a.imag, s.real, s.imag, self.sigma_z_mean])

    @classmethod
    def from_array(cls, y) -> MeanFieldState:
        return cls(complex(y[0], y[1]), complex(y[2], y[3]), float(y[4]))


def semiclassical_fixed_point(n_mean: float, params: SystemParams) -> MeanFieldState:
    """Mean-field state whose photon number is a semiclassical root ``n_mean``."""
    p = params
    if _semiclassical_shift_vanishes(p):
        a = p.eta / (p.kappa - 1j * p.delta)
        if p.gamma == 0 and p.g > 0:
            # no population relaxation: the polarization dies or decouples at sigma_z = 0
            return MeanFieldState(a, 0j, 0.0)
        return MeanFieldState(a, 0j, -1.0)
    A = _shift_strength(n_mean, p)
    a = p.eta / (p.kappa + A * p.gamma_perp - 1j * p.delta * (1 - A))
    if p.gamma_c == 0:
        sz = -(p.delta**2 + p.gamma**2) / (2 * p.g**2 * n_mean + p.delta**2 + p.gamma**2)
    else:
        w = p.gamma * (p.delta**2 + p.gamma_perp**2)
        sz = -w / (2 * p.g**2 * n_mean * p.gamma_perp + w)
    sigma = p.g * a * sz / (p.gamma_perp - 1j * p.delta)
    return MeanFieldState(complex(a), complex(sigma), float(sz))


def mean_field_rhs(state: MeanFieldState, params: SystemParams) -> MeanFieldState:
    """Time derivatives of (<a>, <sigma>, <sigma_z>) in the factorized theory.

    The population equation carries 4g and 2gamma, the rates that follow
    from H and the jump operator sqrt(2 gamma) sigma; with gamma = 0 these
    conserve 4|<sigma>|^2 + <sigma_z>^2.  Halving both terms would leave
    the steady states unchanged but break that conservation.
    """
    p = params
    a, s, z = state.a_mean, state.sigma_mean, state.sigma_z_mean
    da = (1j * p.delta - p.kappa) * a + p.g * s + p.eta
    ds = (1j * p.delta - p.gamma_perp) * s + p.g * a * z
    dz = -4 * p.g * (a.conjugate() * s).real - 2 * p.gamma * (z + 1)
    return MeanFieldState(complex(da), complex(ds), float(dz))


class IntegrationError(RuntimeError):
    def __init__(self, message: str, t: float):
        super().__init__(f"{message} (t={t:g})")
        self.t = t


@dataclass
class MeanFieldTrajectory:
    t: np.ndarray
    a_mean: np.ndarray
    sigma_mean: np.ndarray
    sigma_z_mean: np.ndarray

    @property
    def pseudospin(self) -> np.ndarray:
        return 4 * np.abs(self.sigma_mean) ** 2 + self.sigma_z_mean**2

    @property
    def n_mean(self) -> np.ndarray:
        return np.abs(self.a_mean) ** 2

    def state(self, i: int) -> MeanFieldState:
        return MeanFieldState(complex(self.a_mean[i]), complex(self.sigma_mean[i]), float(self.sigma_z_mean[i]))

    @property
    def final(self) -> MeanFieldState:
        return self.state(-1)


def maxwell_bloch_integrate(
    initial: MeanFieldState,
    params: SystemParams,
    t_final: float,
    dt_out: float,
    rtol: float = 1e-10,
    atol: float = 1e-12,
) -> MeanFieldTrajectory:
    """Integrate the factorized equations with an adaptive 8(5,3) Runge-Kutta pair.

    Samples are emitted at multiples of ``dt_out`` (plus ``t_final``).
    """
    if t_final <= 0 or dt_out <= 0:
        raise ValueError("t_final and dt_out must be > 0")
    p = params
    gp = p.gamma_perp

    def rhs(_t, y):
        ar, ai, sr, si, z = y
        return [
            -p.kappa * ar - p.delta * ai + p.g * sr + p.eta,
            p.delta * ar - p.kappa * ai + p.g * si,
            -gp * sr - p.delta * si + p.g * ar * z,
            p.delta * sr - gp * si + p.g * ai * z,
            -4 * p.g * (ar * sr + ai * si) - 2 * p.gamma * (z + 1),
        ]

    t_eval = np.arange(0.0, t_final, dt_out)
    if t_eval[-1] < t_final:
        t_eval = np.append(t_eval, t_final)
    sol = solve_ivp(rhs, (0.0, t_final), initial.to_array(), method="DOP853", t_eval=t_eval, rtol=rtol, atol=atol)
    if sol.status != 0:
        t_fail = float(sol.t[-1]) if sol.t.size else 0.0
        raise IntegrationError(f"Maxwell-Bloch integration failed: {sol.message}", t_fail)
    y = sol.y
    return MeanFieldTrajectory(sol.t, y[0] + 1j * y[1], y[2] + 1j * y[3], y[4].copy())
