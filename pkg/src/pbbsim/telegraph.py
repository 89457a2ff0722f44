"""Bright/dim segmentation of photon-number telegraph signals and conditional statistics."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.ndimage import uniform_filter1d

from .model import PureState, SystemParams
from .mcwf import TrajectoryRecord

__all__ = [
    "SegmentationSettings",
    "Dwell",
    "Segmentation",
    "TelegraphSummary",
    "segment",
    "pseudospin",
    "pseudospin_from_density_matrix",
    "qubit_density_from_expectations",
    "entropy_bits",
    "mutual_information",
    "mandel_q",
    "summarize",
    "classical_reference_levels",
    "quantile_reference_levels",
]

DIM, BRIGHT, TRANSIENT = 0, 1, -1
MIN_SIGNAL_TIME = 20.0


@dataclass(frozen=True)
class SegmentationSettings:
    """Segmentation constants (times in 1/kappa, levels as fractions of the dim-bright gap)."""

    enter_bright: float = 0.75
    enter_dim: float = 0.25
    smoothing: float = 1.0
    min_dwell: float = 5.0

    def __post_init__(self):
        if not 0 <= self.enter_dim < self.enter_bright <= 1:
            raise ValueError("need 0 <= enter_dim < enter_bright <= 1")
        if self.smoothing < 0 or self.min_dwell < 0:
            raise ValueError("smoothing and min_dwell must be >= 0")


@dataclass(frozen=True)
class Dwell:
    start: float
    end: float
    label: int

    @property
    def duration(self) -> float:
        return self.end - self.start


@dataclass
class Segmentation:
    t: np.ndarray
    labels: np.ndarray  # TRANSIENT, DIM or BRIGHT per sample
    dwells: list[Dwell]
    transient_cut: float

    @property
    def analyzed(self) -> np.ndarray:
        return self.labels != TRANSIENT

    @property
    def filling_factor(self) -> float:
        n = int(self.analyzed.sum())
        return float((self.labels == BRIGHT).sum() / n) if n else math.nan


def _runs(labels: np.ndarray) -> list[list[int]]:
    """[start, stop, label] runs of equal labels."""
    if labels.size == 0:
        return []
    edges = np.flatnonzero(np.diff(labels)) + 1
    starts = np.concatenate(([0], edges))
    stops = np.concatenate((edges, [labels.size]))
    return [[int(a), int(b), int(labels[a])] for a, b in zip(starts, stops)]


def _merge_short(labels: np.ndarray, min_samples: int) -> np.ndarray:
    """Absorb runs shorter than ``min_samples`` into their neighbours, shortest first."""
    labels = labels.copy()
    while True:
        runs = _runs(labels)
        if len(runs) < 2:
            return labels
        lengths = [b - a for a, b, _ in runs]
        i = int(np.argmin(lengths))
        if lengths[i] >= min_samples:
            return labels
        a, b, lab = runs[i]
        labels[a:b] = runs[i + 1][2] if i == 0 else runs[i - 1][2]


def segment(
    t,
    signal,
    n_dim_ref: float,
    n_bright_ref: float,
    settings: SegmentationSettings = SegmentationSettings(),
) -> Segmentation:
    """Label each sample of a photon-number signal dim or bright.

    A centred moving average is thresholded with hysteresis: a switch to
    bright is committed above ``enter_bright`` of the gap, to dim below
    ``enter_dim``.  Each committed switch is dated to the preceding
    crossing of the gap midpoint, so clean steps keep their exact edges.
    Dwells shorter than ``min_dwell`` are merged into their neighbours and
    samples before the first commitment are discarded as transient.
    """
    t = np.asarray(t, dtype=float)
    x = np.asarray(signal, dtype=float)
    if t.shape != x.shape or t.ndim != 1:
        raise ValueError("t and signal must be 1-d arrays of equal length")
    if n_bright_ref <= n_dim_ref:
        raise ValueError("n_bright_ref must exceed n_dim_ref")
    if t.size < 2 or t[-1] - t[0] < MIN_SIGNAL_TIME:
        raise ValueError(f"signal spans less than {MIN_SIGNAL_TIME:g}/kappa")
    dt = float(t[1] - t[0])
    if not np.allclose(np.diff(t), dt, rtol=1e-6, atol=1e-12):
        raise ValueError("signal must be uniformly sampled")

    half = int(round(settings.smoothing / (2 * dt)))
    s = uniform_filter1d(x, size=2 * half + 1, mode="nearest") if half else x
    gap = n_bright_ref - n_dim_ref
    hi = n_dim_ref + settings.enter_bright * gap
    lo = n_dim_ref + settings.enter_dim * gap
    mid = n_dim_ref + 0.5 * gap

    events = np.where(s > hi, BRIGHT, np.where(s < lo, DIM, TRANSIENT))
    idx = np.arange(x.size)
    last = np.maximum.accumulate(np.where(events != TRANSIENT, idx, -1))
    committed = np.where(last >= 0, events[np.maximum(last, 0)], TRANSIENT)
    if not (committed != TRANSIENT).any():
        return Segmentation(t, committed, [], float(t[-1] - t[0]))
    first = int(np.argmax(committed != TRANSIENT))

    labels = committed.copy()
    # date every switch to the last midpoint crossing before it
    below = np.maximum.accumulate(np.where(s <= mid, idx, -1))
    above = np.maximum.accumulate(np.where(s >= mid, idx, -1))
    for c in np.flatnonzero(np.diff(committed[first:])) + first + 1:
        ref = below if committed[c] == BRIGHT else above
        start = max(int(ref[c]) + 1, first + 1)
        labels[start:c] = committed[c]

    body = _merge_short(labels[first:], max(1, int(math.ceil(settings.min_dwell / dt - 1e-9))))
    labels[first:] = body
    dwells = [
        Dwell(float(t[first + a]), float(t[first + b - 1] + dt), lab)
        for a, b, lab in _runs(body)
    ]
    return Segmentation(t, labels, dwells, float(t[first] - t[0]))


# ---------------------------------------------------------------------------
# qubit measures


def pseudospin(sigma_mean, sigma_z_mean):
    """Pseudospin length 4|<sigma>|^2 + <sigma_z>^2 (works elementwise)."""
    return 4 * np.abs(sigma_mean) ** 2 + np.asarray(sigma_z_mean) ** 2


def pseudospin_from_density_matrix(rho_q: np.ndarray) -> float:
    """2 Tr(rho^2) - 1 for a 2x2 qubit density matrix."""
    return float(2 * np.trace(rho_q @ rho_q).real - 1)


def qubit_density_from_expectations(sigma_mean: complex, sigma_z_mean: float) -> np.ndarray:
    """Qubit state in (g, e) ordering with the given <sigma> = rho_eg and <sigma_z>."""
    return np.array(
        [[(1 - sigma_z_mean) / 2, np.conj(sigma_mean)], [sigma_mean, (1 + sigma_z_mean) / 2]],
        dtype=complex,
    )


def entropy_bits(eigenvalues) -> float:
    lam = np.clip(np.asarray(eigenvalues, dtype=float), 0.0, 1.0)
    lam = lam[lam > 0]
    return float(-np.sum(lam * np.log2(lam))) + 0.0  # no negative zero


def mutual_information(state: PureState) -> float:
    """Qubit-mode mutual information of a pure state, 2 S(rho_qubit) in bits."""
    if abs(state.norm_sq - 1.0) > 1e-9:
        raise ValueError(f"state is not normalized (norm_sq={state.norm_sq!r})")
    amps = state.amplitudes
    rho_q = amps @ amps.conj().T
    return 2 * entropy_bits(np.linalg.eigvalsh(rho_q))


def mandel_q(n_mean: float, photon_variance: float) -> float:
    if not n_mean > 0:
        raise ValueError("Mandel Q is undefined for a vanishing mean photon number")
    return photon_variance / n_mean - 1.0


# ---------------------------------------------------------------------------
# ensemble summary


def classical_reference_levels(params: SystemParams) -> tuple[float, float]:
    """Dim and bright levels from the neoclassical roots at these parameters."""
    from .classical import neoclassical_roots

    roots = neoclassical_roots(params)
    if roots.bright is None:
        raise ValueError("no neoclassical bright root at these parameters")
    dim = roots.dim.n if roots.dim is not None else 0.0
    return dim, roots.bright.n


def quantile_reference_levels(records, low: float = 0.05, high: float = 0.95) -> tuple[float, float]:
    """Dim and bright levels as quantiles of the pooled photon-number signal."""
    pooled = np.concatenate([r.n_mean for r in records])
    return float(np.quantile(pooled, low)), float(np.quantile(pooled, high))


@dataclass
class TelegraphSummary:
    filling_factor: float
    n_bright: float
    n_dim: float
    pseudospin_bright: float
    pseudospin_dim: float
    pseudospin_bright_samplewise: float
    pseudospin_dim_samplewise: float
    mandel_q_bright: float
    mutual_info_bright: float | None
    mean_dwell_bright: float
    mean_dwell_dim: float
    count_bright: int
    count_dim: int
    analyzed_time: float
    transient_cut: float
    n_trajectories: int
    n_dim_ref: float
    n_bright_ref: float
    settings: SegmentationSettings = field(default_factory=SegmentationSettings)

    def row(self) -> dict:
        out = asdict(self)
        out.update({f"seg_{k}": v for k, v in out.pop("settings").items()})
        return out


def _conditional(records, segs, label):
    pick = [(r, s.labels == label) for r, s in zip(records, segs)]
    count = sum(int(m.sum()) for _, m in pick)
    if count == 0:
        return None
    total = lambda arr: sum(getattr(r, arr)[m].sum() for r, m in pick)  # noqa: E731
    n = total("n_mean") / count
    n2 = sum((r.photon_variance[m] + r.n_mean[m] ** 2).sum() for r, m in pick) / count
    sig = total("sigma_mean") / count
    sz = total("sigma_z_mean") / count
    per_sample = sum(r.pseudospin[m].sum() for r, m in pick) / count
    return {
        "n": float(n),
        "var": float(n2 - n * n),
        "pseudospin": float(pseudospin(sig, sz)),
        "pseudospin_samplewise": float(per_sample),
        "pick": pick,
    }


def summarize(
    records: list[TrajectoryRecord],
    n_dim_ref: float,
    n_bright_ref: float,
    settings: SegmentationSettings = SegmentationSettings(),
    with_mutual_information: bool = False,
) -> TelegraphSummary:
    """Pool dwell-conditioned statistics over trajectories.

    Conditional means weight every retained sample equally, i.e. by dwell
    time.  The default conditional pseudospin averages <sigma> and
    <sigma_z> first and then takes their length; the sample-wise mean of
    the instantaneous length is reported alongside.  Mutual information
    is averaged over bright samples that carry state snapshots.
    """
    if not records:
        raise ValueError("need at least one trajectory record")
    segs = [segment(r.t, r.n_mean, n_dim_ref, n_bright_ref, settings) for r in records]
    analyzed = sum(float(s.analyzed.sum()) * r.dt for r, s in zip(records, segs))
    if analyzed < MIN_SIGNAL_TIME:
        raise ValueError("less than 20/kappa of post-transient signal")
    bright_time = sum(float((s.labels == BRIGHT).sum()) * r.dt for r, s in zip(records, segs))

    b = _conditional(records, segs, BRIGHT)
    d = _conditional(records, segs, DIM)
    nan = math.nan

    mi = None
    if with_mutual_information:
        if any(r.states is None for r in records):
            raise ValueError("mutual information needs trajectory state snapshots")
        values = []
        if b is not None:
            for r, mask in b["pick"]:
                for i in np.flatnonzero(mask[:: r.state_stride]) * r.state_stride:
                    values.append(mutual_information(r.state_at(int(i))))
        mi = float(np.mean(values)) if values else nan

    def dwell_stats(label):
        durations = [w.duration for s in segs for w in s.dwells if w.label == label]
        return (float(np.mean(durations)) if durations else nan), len(durations)

    mean_b, count_b = dwell_stats(BRIGHT)
    mean_d, count_d = dwell_stats(DIM)
    return TelegraphSummary(
        filling_factor=bright_time / analyzed,
        n_bright=b["n"] if b else nan,
        n_dim=d["n"] if d else nan,
        pseudospin_bright=b["pseudospin"] if b else nan,
        pseudospin_dim=d["pseudospin"] if d else nan,
        pseudospin_bright_samplewise=b["pseudospin_samplewise"] if b else nan,
        pseudospin_dim_samplewise=d["pseudospin_samplewise"] if d else nan,
        mandel_q_bright=mandel_q(b["n"], b["var"]) if b and b["n"] > 0 else nan,
        mutual_info_bright=mi,
        mean_dwell_bright=mean_b,
        mean_dwell_dim=mean_d,
        count_bright=count_b,
        count_dim=count_d,
        analyzed_time=analyzed,
        transient_cut=sum(s.transient_cut for s in segs),
        n_trajectories=len(records),
        n_dim_ref=n_dim_ref,
        n_bright_ref=n_bright_ref,
        settings=settings,
    )
