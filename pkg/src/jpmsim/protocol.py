"""Monte Carlo model of counter-based qubit measurement.

One measurement shot prepares a cavity pointer state with a windowed
drive, lets the pointer propagate to the capture cavity, and asks a
threshold detector whether it switched.  The shot model is
phenomenological: qubit relaxation during preparation, imperfect bright
detection, and dark counts are independent Bernoulli events with
configurable rates.  On top of single shots the module builds fidelity
budgets, detector-read Ramsey and Rabi datasets, photon-number
calibration via the qubit frequency shift, post-measurement depletion
recovery, and IQ-plane discrimination of the detector's classical
output.

Randomness contract: every shot consumes exactly 3 + 2 n uniform draws
(n = IqModel.n_samples) in a pinned order -- relaxation, capture, dark
count, then interleaved x/y quadrature noise.  Normal deviates come
from the inverse CDF of the uniforms, so the draw count never depends
on outcomes and a batch of shots is bit-identical to the same shots
simulated one at a time from the same generator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import erfc, ndtri


def calibrate_depletion_rate(recovery_time: float, residual_fraction: float) -> float:
    """Depletion rate that leaves the given photon fraction after recovery_time."""
    if not (recovery_time > 0.0 and 0.0 < residual_fraction < 1.0):
        raise ValueError("need recovery_time > 0 and residual_fraction in (0, 1)")
    return math.log(1.0 / residual_fraction) / recovery_time


def calibrate_dephasing_per_photon(
    depletion_rate: float,
    recovery_time: float = 40e-9,
    target_contrast: float = 0.95,
    initial_photons: float = 100.0,
) -> float:
    """Dephasing coefficient giving target_contrast after recovery_time."""
    residual = initial_photons * math.exp(-depletion_rate * recovery_time)
    return -math.log(target_contrast) / residual


SPURIOUS_PHOTONS = 100.0
"""Spurious capture-cavity photon number released by one detector switch."""

DEFAULT_DEPLETION_RATE = calibrate_depletion_rate(40e-9, 0.05)
"""Depletion rate leaving 5% of the spurious photons after 40 ns."""

DEFAULT_DEPHASING_PER_PHOTON = calibrate_dephasing_per_photon(DEFAULT_DEPLETION_RATE)
"""Ramsey-contrast suppression per residual photon, giving 0.95 at 40 ns."""


@dataclass(frozen=True)
class ProtocolConfig:
    """Parameters of the full measurement cycle.

    Parameters
    ----------
    t_prep:
        Pointer preparation pulse length in seconds.
    window:
        Preparation pulse envelope, "hamming" or "rectangular".
    t1:
        Qubit energy relaxation time in seconds.
    dark_prob:
        Per-shot probability of a switch with no bright pointer.
    bright_detect_prob:
        Probability that a surviving bright pointer causes a switch;
        folds transfer efficiency and the capture threshold into one
        number.
    stark_shift_per_photon:
        Qubit angular-frequency shift per cavity photon (2 chi) in
        radians/second.
    n_bar_qubit_cavity:
        Mean qubit-cavity photon number at full calibration power.
    depletion_rate:
        Photon depletion rate during the reset interval in 1/second.
    depletion_time:
        Default depletion interval in seconds.
    cycle_time:
        Full measurement repetition period in seconds.
    rng_seed:
        Seed for every stochastic operation that owns its generator.
    relaxation_override:
        If not None, use this preparation relaxation probability
        instead of the windowed-decay model; the default pins the
        nominal 5% budget entry while relaxation_error stays an honest
        model.
    """

    t_prep: float = 780e-9
    window: str = "hamming"
    t1: float = 6.6e-6
    dark_prob: float = 0.02
    bright_detect_prob: float = 0.99
    stark_shift_per_photon: float = -2.0 * math.pi * 2e6
    n_bar_qubit_cavity: float = 10.0
    depletion_rate: float = DEFAULT_DEPLETION_RATE
    depletion_time: float = 40e-9
    cycle_time: float = 2.8e-6
    rng_seed: int = 12345
    relaxation_override: float | None = 0.05

    def __post_init__(self) -> None:
        for name in ("t_prep", "t1", "depletion_rate", "depletion_time", "cycle_time"):
            value = getattr(self, name)
            if not (value > 0.0 and math.isfinite(value)):
                raise ValueError(f"{name} must be finite and positive, got {value!r}")
        for name in ("dark_prob", "bright_detect_prob"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {value!r}")
        if self.relaxation_override is not None and not 0.0 <= self.relaxation_override <= 1.0:
            raise ValueError("relaxation_override must lie in [0, 1] or be None")
        if self.window not in ("hamming", "rectangular"):
            raise ValueError('window must be "hamming" or "rectangular"')
        if self.n_bar_qubit_cavity < 0.0:
            raise ValueError("n_bar_qubit_cavity must be non-negative")
        if self.cycle_time < self.t_prep:
            raise ValueError("cycle_time must be at least t_prep")

    @property
    def relaxation_prob(self) -> float:
        """Preparation relaxation probability the shot model actually uses."""
        if self.relaxation_override is not None:
            return self.relaxation_override
        return relaxation_error(self.t_prep, self.t1)


@dataclass(frozen=True)
class IqModel:
    """Gaussian model of the two detector-output clouds in the IQ plane.

    sigma is the per-axis standard deviation of a single quadrature
    sample; a shot records the mean of n_samples samples, so the
    effective cloud width per shot is sigma / sqrt(n_samples).
    """

    centroid_0: tuple[float, float] = (0.0, 0.0)
    centroid_1: tuple[float, float] = (1.0, 0.0)
    sigma: float = 1.0 / 7.07
    n_samples: int = 1

    def __post_init__(self) -> None:
        if not (self.sigma > 0.0 and math.isfinite(self.sigma)):
            raise ValueError("sigma must be finite and positive")
        if self.centroid_0 == self.centroid_1:
            raise ValueError("centroids must be distinct")
        if self.n_samples < 1:
            raise ValueError("n_samples must be at least 1")

    @property
    def effective_sigma(self) -> float:
        """Cloud width of the per-shot averaged IQ point."""
        return self.sigma / math.sqrt(self.n_samples)

    @property
    def separation(self) -> float:
        """Centroid distance d."""
        return math.hypot(
            self.centroid_1[0] - self.centroid_0[0],
            self.centroid_1[1] - self.centroid_0[1],
        )


DEFAULT_IQ_MODEL = IqModel()


@dataclass(frozen=True)
class ShotResult:
    """Outcome of one measurement shot."""

    switch_bit: int
    cause: str
    iq_point: tuple[float, float]

    def __post_init__(self) -> None:
        if self.switch_bit not in (0, 1):
            raise ValueError("switch_bit must be 0 or 1")
        if self.cause not in ("bright_capture", "dark_count", "none"):
            raise ValueError(f"unknown cause {self.cause!r}")
        if (self.switch_bit == 1) != (self.cause != "none"):
            raise ValueError("switch_bit must be 1 exactly when cause is not none")


def hamming_envelope(duration: float, n: int) -> np.ndarray:
    """Raised-cosine pulse envelope w[k] = 0.54 - 0.46 cos(2 pi k/(n-1)).

    The analytic peak at the window center is exactly 1; endpoints are
    0.08.  duration fixes the time axis the samples are meant to span
    (the sample times are k * duration/(n-1)) and must be positive.
    """
    if n < 2:
        raise ValueError("n must be at least 2")
    if not (duration > 0.0 and math.isfinite(duration)):
        raise ValueError("duration must be finite and positive")
    k = np.arange(n)
    return 0.54 - 0.46 * np.cos(2.0 * math.pi * k / (n - 1))


def relaxation_error(t_prep: float, t1: float) -> float:
    """Probability an excitation decays during the preparation window.

    Averages the survival probability e^{-t/T1} uniformly over the
    window, giving 1 - (T1/t_prep)(1 - e^{-t_prep/T1}); for short
    windows this is t_prep/(2 T1).
    """
    if not (t_prep > 0.0 and t1 > 0.0):
        raise ValueError("t_prep and t1 must be positive")
    return 1.0 + (t1 / t_prep) * math.expm1(-t_prep / t1)


def _simulate_batch(
    qubit_excited: bool,
    n_shots: int,
    cfg: ProtocolConfig,
    iq_model: IqModel,
    rng: np.random.Generator,
) -> dict:
    """Vectorized shot batch with the pinned per-shot draw layout.

    Column layout of the uniform matrix: [0] relaxation, [1] capture,
    [2] dark count, [3:] interleaved x/y IQ noise.  Every column is
    drawn for every shot so the stream position is outcome independent.
    """
    k = iq_model.n_samples
    u = rng.random((n_shots, 3 + 2 * k))

    if qubit_excited:
        relaxed = u[:, 0] < cfg.relaxation_prob
        captured = ~relaxed & (u[:, 1] < cfg.bright_detect_prob)
    else:
        relaxed = np.zeros(n_shots, dtype=bool)
        captured = np.zeros(n_shots, dtype=bool)
    dark = ~captured & (u[:, 2] < cfg.dark_prob)
    switch = captured | dark

    noise = ndtri(u[:, 3:])
    base_0 = np.asarray(iq_model.centroid_0)
    base_1 = np.asarray(iq_model.centroid_1)
    centroid = np.where(switch[:, None], base_1, base_0)
    iq_x = centroid[:, 0] + iq_model.sigma * noise[:, 0::2].mean(axis=1)
    iq_y = centroid[:, 1] + iq_model.sigma * noise[:, 1::2].mean(axis=1)

    return {
        "switch": switch,
        "captured": captured,
        "relaxed": relaxed,
        "dark": dark,
        "iq_x": iq_x,
        "iq_y": iq_y,
    }


def _batch_to_results(batch: dict) -> list[ShotResult]:
    results = []
    for sw, cap, x, y in zip(batch["switch"], batch["captured"], batch["iq_x"], batch["iq_y"]):
        if cap:
            cause = "bright_capture"
        elif sw:
            cause = "dark_count"
        else:
            cause = "none"
        results.append(ShotResult(int(sw), cause, (float(x), float(y))))
    return results


def simulate_shot(
    qubit_excited: bool,
    cfg: ProtocolConfig,
    rng: np.random.Generator,
    iq_model: IqModel = DEFAULT_IQ_MODEL,
) -> ShotResult:
    """Simulate one measurement shot.

    Bright capture requires the excitation to survive preparation and
    the detector to fire on it; a dark count can fire the detector on
    any shot a bright pointer did not already switch.
    """
    batch = _simulate_batch(qubit_excited, 1, cfg, iq_model, rng)
    return _batch_to_results(batch)[0]


def fidelity_budget(cfg: ProtocolConfig, n_shots: int, iq_model: IqModel = DEFAULT_IQ_MODEL) -> dict:
    """Monte Carlo raw-fidelity budget over n_shots per prepared state.

    Runs an excited-state batch then a ground-state batch from one
    generator seeded with cfg.rng_seed and partitions every error shot
    by its cause, so the returned terms satisfy
    F_raw + epsilon_relax + epsilon_dark + epsilon_other = 1 exactly:

    - epsilon_relax: excited shots lost to preparation relaxation (and
      not rescued by a dark count),
    - epsilon_other: excited shots whose surviving pointer the detector
      missed (again without a dark-count rescue),
    - epsilon_dark: ground shots that switched anyway.
    """
    if n_shots < 10_000:
        raise ValueError("n_shots must be at least 10^4 for a stable budget")
    rng = np.random.default_rng(cfg.rng_seed)
    excited = _simulate_batch(True, n_shots, cfg, iq_model, rng)
    ground = _simulate_batch(False, n_shots, cfg, iq_model, rng)

    miss_excited = ~excited["switch"]
    eps_relax = float(np.mean(miss_excited & excited["relaxed"]))
    eps_other = float(np.mean(miss_excited & ~excited["relaxed"]))
    eps_dark = float(np.mean(ground["switch"]))
    f_raw = 1.0 - float(np.mean(miss_excited)) - eps_dark
    return {
        "F_raw": f_raw,
        "epsilon_relax": eps_relax,
        "epsilon_dark": eps_dark,
        "epsilon_other": eps_other,
    }


def _channel_visibility(cfg: ProtocolConfig) -> float:
    # Expected switch-probability contrast between excited and ground
    # preparation: (1 - eps_relax) p_bright (1 - eps_dark).
    return (1.0 - cfg.relaxation_prob) * cfg.bright_detect_prob * (1.0 - cfg.dark_prob)


def measured_probability(p_ideal, cfg: ProtocolConfig):
    """Map an ideal excitation probability through the measurement channel.

    P_measured = dark_prob + visibility * P_ideal, with the visibility
    equal to the analytic raw fidelity of the shot model.
    """
    return cfg.dark_prob + _channel_visibility(cfg) * np.asarray(p_ideal)


def ramsey_fringe(
    detunings,
    delays,
    cfg: ProtocolConfig,
    *,
    t2: float | None = None,
    amplitude: float = 1.0,
    phase_offset: float = 0.0,
    n_shots: int | None = None,
) -> np.ndarray:
    """Detector-read Ramsey fringes versus drive detuning and delay.

    The ideal two-pulse excitation probability
    A e^{-tau/T2} cos^2(Delta tau/2 + phi_0) is mapped through the
    measurement channel.  Returns a matrix of shape
    (len(detunings), len(delays)); with n_shots set, each cell is a
    binomial estimate from a generator seeded with cfg.rng_seed.
    """
    if t2 is None:
        t2 = cfg.t1
    if not 0.0 < t2 <= 2.0 * cfg.t1:
        raise ValueError("t2 must be positive and at most 2 T1")
    if not 0.0 <= amplitude <= 1.0:
        raise ValueError("amplitude must lie in [0, 1]")
    detunings = np.asarray(detunings, dtype=float)
    delays = np.asarray(delays, dtype=float)
    if np.any(delays < 0.0):
        raise ValueError("delays must be non-negative")
    phase = 0.5 * np.outer(detunings, delays) + phase_offset
    ideal = amplitude * np.exp(-delays / t2) * np.cos(phase) ** 2
    return _finish_sweep(ideal, cfg, n_shots)


def rabi_chevron(
    detunings,
    durations,
    cfg: ProtocolConfig,
    *,
    rabi_rate: float = 2.0 * math.pi * 5e6,
    n_shots: int | None = None,
) -> np.ndarray:
    """Detector-read Rabi chevron versus drive detuning and pulse length.

    Ideal excitation probability
    (Omega^2/(Omega^2 + Delta^2)) sin^2(sqrt(Omega^2 + Delta^2) t / 2)
    mapped through the measurement channel.  Returns a matrix of shape
    (len(detunings), len(durations)).
    """
    if not rabi_rate > 0.0:
        raise ValueError("rabi_rate must be positive")
    detunings = np.asarray(detunings, dtype=float)
    durations = np.asarray(durations, dtype=float)
    if np.any(durations < 0.0):
        raise ValueError("durations must be non-negative")
    generalized = np.hypot(rabi_rate, detunings)[:, None]
    weight = (rabi_rate / generalized) ** 2
    ideal = weight * np.sin(0.5 * generalized * durations) ** 2
    return _finish_sweep(ideal, cfg, n_shots)


def _finish_sweep(ideal: np.ndarray, cfg: ProtocolConfig, n_shots: int | None) -> np.ndarray:
    measured = measured_probability(ideal, cfg)
    if n_shots is None:
        return measured
    if n_shots < 1:
        raise ValueError("n_shots must be positive")
    rng = np.random.default_rng(cfg.rng_seed)
    return rng.binomial(n_shots, measured) / n_shots


def stark_calibration(drive_powers, cfg: ProtocolConfig) -> list[tuple[float, float]]:
    """Map drive powers to (photon number, qubit shift) pairs.

    Photon number is linear in power and anchored to
    cfg.n_bar_qubit_cavity at the largest power in the sweep; the shift
    is stark_shift_per_photon times the photon number, so the inverse
    map shift -> photon number is exact.
    """
    if cfg.stark_shift_per_photon == 0.0:
        raise ValueError("stark_shift_per_photon must be nonzero for calibration")
    powers = np.asarray(drive_powers, dtype=float)
    if powers.size == 0:
        raise ValueError("drive_powers must be non-empty")
    if np.any(powers < 0.0):
        raise ValueError("drive_powers must be non-negative")
    p_max = float(powers.max())
    if p_max == 0.0:
        raise ValueError("at least one drive power must be positive")
    n_bar = cfg.n_bar_qubit_cavity * powers / p_max
    shifts = cfg.stark_shift_per_photon * n_bar
    return [(float(n), float(s)) for n, s in zip(n_bar, shifts)]


def depletion_recovery(
    t_dep: float,
    cfg: ProtocolConfig,
    *,
    initial_photons: float = SPURIOUS_PHOTONS,
    dephasing_per_photon: float = DEFAULT_DEPHASING_PER_PHOTON,
) -> dict:
    """Residual backaction after a depletion interval of length t_dep.

    The spurious photons released by a switch decay at
    cfg.depletion_rate; the residual population suppresses Ramsey
    contrast as e^{-c n} and shifts the qubit by
    stark_shift_per_photon * n.
    """
    if t_dep < 0.0:
        raise ValueError("t_dep must be non-negative")
    residual = initial_photons * math.exp(-cfg.depletion_rate * t_dep)
    return {
        "residual_photons": residual,
        "ramsey_contrast": math.exp(-dephasing_per_photon * residual),
        "frequency_shift": cfg.stark_shift_per_photon * residual,
    }


def separation_fidelity(model: IqModel) -> float:
    """Discrimination fidelity from Gaussian overlap alone.

    1 - erfc(d / (2 sqrt(2) sigma_eff)) / 2 for centroid distance d and
    per-shot cloud width sigma_eff.
    """
    return 1.0 - 0.5 * float(erfc(model.separation / (2.0 * math.sqrt(2.0) * model.effective_sigma)))


def iq_discriminate(model: IqModel, shots, rng: np.random.Generator | None = None) -> dict:
    """Classify IQ points by projection onto the centroid line.

    shots may be ShotResult records (their stored iq_points and
    switch_bits are used) or an integer label array, in which case
    fresh per-shot averaged Gaussian points are drawn from the model
    using rng (2 n_samples uniforms per shot, shot-major, x/y
    interleaved).  The threshold is the projection of the centroid
    midpoint; single_shot_fidelity is the empirical correct-label rate
    and separation_fidelity the Gaussian-overlap bound.
    """
    c0 = np.asarray(model.centroid_0, dtype=float)
    c1 = np.asarray(model.centroid_1, dtype=float)

    if len(shots) == 0:
        raise ValueError("shots must be non-empty")
    if isinstance(shots[0], ShotResult):
        labels = np.array([s.switch_bit for s in shots])
        points = np.array([s.iq_point for s in shots], dtype=float)
    else:
        labels = np.asarray(shots, dtype=int)
        if np.any((labels != 0) & (labels != 1)):
            raise ValueError("labels must be 0 or 1")
        if rng is None:
            raise ValueError("an rng is required to draw points for label input")
        noise = ndtri(rng.random((labels.size, 2 * model.n_samples)))
        centroid = np.where(labels[:, None] == 1, c1, c0)
        points = centroid + model.sigma * np.stack(
            [noise[:, 0::2].mean(axis=1), noise[:, 1::2].mean(axis=1)], axis=1
        )

    axis = (c1 - c0) / np.linalg.norm(c1 - c0)
    threshold = float(0.5 * (c0 + c1) @ axis)
    projections = points @ axis
    predicted = (projections > threshold).astype(int)
    return {
        "single_shot_fidelity": 1.0 - float(np.mean(predicted != labels)),
        "separation_fidelity": separation_fidelity(model),
        "threshold": threshold,
    }
