"""Single-photon bomb test on a balanced two-arm interferometer.

A photon enters the first 50/50 splitter; the reflected part travels the
"upper" arm, the transmitted part the "lower" arm.  Mirrors fold both arms
onto a second 50/50 splitter whose two output ports feed the light detector
(the bright port) and the dark detector.  With empty arms every photon exits
at the light detector.  An opaque object in either arm breaks the
interference: the photon is absorbed with probability 1/2, and otherwise
reaches each detector with probability 1/4 - so a dark-detector click reveals
the object without any photon having touched it.

The 25% light-detector rate with the object present is not independent data:
it follows from 50% absorption plus 25% dark detection.

The repeated-interrogation variant (:func:`zeno_ifm_distribution`) implements
the standard N-cycle scheme: per cycle the photon polarization is rotated by
pi/(2N) and, when the object is present, the rotated component is absorbed.
The object-present success probability cos^(2N)(pi/(2N)) approaches 1 for
large N.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import (
    Absorber,
    ModeState,
    apply_absorber,
    apply_element,
    beam_splitter,
    detection_probabilities,
    mirror,
    phase_plate,
    rotation,
    sample_outcomes,
)

ARM_UPPER = "upper"
ARM_LOWER = "lower"
ARMS = (ARM_UPPER, ARM_LOWER)

# Output-port naming: with zero arm phase and both splitters balanced, all
# amplitude exits on the upper-rail port, so that port is the light detector.
OUTCOME_LIGHT = "light"
OUTCOME_DARK = "dark"
OUTCOME_ABSORBED = "absorbed"
_PORT_OUTCOME = {ARM_UPPER: OUTCOME_LIGHT, ARM_LOWER: OUTCOME_DARK}


@dataclass(frozen=True)
class EvSetup:
    """Interferometer configuration for a bomb-test run.

    ``object_arm`` selects which internal arm holds the opaque object;
    ``arm_phase`` is an extra relative phase applied to the upper arm
    (a phase plate), useful for calibration-style sweeps.
    """

    object_present: bool = False
    object_arm: str = ARM_UPPER
    arm_phase: float = 0.0

    def __post_init__(self) -> None:
        if self.object_arm not in ARMS:
            raise ValueError(f"object_arm must be one of {ARMS}, got {self.object_arm!r}")


@dataclass(frozen=True)
class EvDistribution:
    """Exact outcome distribution of a single bomb-test trial."""

    p_light_detector: float
    p_dark_detector: float
    p_absorbed: float

    def __post_init__(self) -> None:
        parts = (self.p_light_detector, self.p_dark_detector, self.p_absorbed)
        if any(p < -1e-12 or p > 1.0 + 1e-12 for p in parts):
            raise ValueError(f"probabilities out of range: {parts}")
        if abs(sum(parts) - 1.0) > 1e-12:
            raise ValueError(f"probabilities sum to {sum(parts)}, expected 1")


@dataclass(frozen=True)
class ZenoDistribution:
    """Outcome distribution of an N-cycle repeated-interrogation run.

    ``p_success_detect`` is the probability of detecting the object without
    absorption; ``p_inconclusive`` collects the fully rotated photon seen when
    no object blocks the rotation.
    """

    p_success_detect: float
    p_absorbed: float
    p_inconclusive: float

    def __post_init__(self) -> None:
        parts = (self.p_success_detect, self.p_absorbed, self.p_inconclusive)
        if any(p < -1e-12 or p > 1.0 + 1e-12 for p in parts):
            raise ValueError(f"probabilities out of range: {parts}")
        if abs(sum(parts) - 1.0) > 1e-12:
            raise ValueError(f"probabilities sum to {sum(parts)}, expected 1")


def _final_state(setup: EvSetup) -> tuple[ModeState, float]:
    """Chain the optical elements and return (post-splitter state, p_absorbed)."""
    state = ModeState({ARM_UPPER: 0.0 + 0.0j, ARM_LOWER: 1.0 + 0.0j})
    state = apply_element(state, beam_splitter(0.5, ARMS))
    p_abs = 0.0
    if setup.object_present:
        state, p_abs = apply_absorber(state, Absorber(setup.object_arm))
    state = apply_element(state, mirror(ARM_UPPER))
    state = apply_element(state, mirror(ARM_LOWER))
    if setup.arm_phase != 0.0:
        state = apply_element(state, phase_plate(ARM_UPPER, setup.arm_phase))
    state = apply_element(state, beam_splitter(0.5, ARMS))
    return state, p_abs


def ev_outcome_distribution(setup: EvSetup) -> EvDistribution:
    """Exact analytic per-trial outcome distribution for the given setup."""
    state, p_abs = _final_state(setup)
    probs = detection_probabilities(state)
    return EvDistribution(
        p_light_detector=probs[ARM_UPPER],
        p_dark_detector=probs[ARM_LOWER],
        p_absorbed=p_abs,
    )


def run_ev_trials(setup: EvSetup, n_trials: int, rng: np.random.Generator) -> dict[str, int]:
    """Sample ``n_trials`` independent single-photon runs.

    Returns counts per outcome label ("light", "dark", "absorbed"); counts sum
    to ``n_trials`` and are reproducible for a fixed generator state.
    """
    if n_trials < 1:
        raise ValueError("n_trials must be at least 1")
    state, _ = _final_state(setup)
    raw = sample_outcomes(state, n_trials, rng)
    counts = {OUTCOME_LIGHT: 0, OUTCOME_DARK: 0, OUTCOME_ABSORBED: 0}
    for label, c in raw.items():
        counts[_PORT_OUTCOME.get(label, OUTCOME_ABSORBED)] += c
    return counts


def zeno_ifm_distribution(n_cycles: int, object_present: bool) -> ZenoDistribution:
    """N-cycle rotate-and-test interrogation of a possibly blocked path.

    The photon starts in polarization mode "h".  Each cycle rotates the
    polarization by pi/(2*n_cycles); with the object present the rotated "v"
    component is absorbed every cycle.  After N cycles an "h" photon signals
    the object interaction-free, with probability cos^(2N)(pi/(2N)); without
    the object the photon ends fully rotated into "v" (inconclusive).
    """
    if n_cycles < 1:
        raise ValueError("n_cycles must be at least 1")
    modes = ("h", "v")
    rot = rotation(np.pi / (2.0 * n_cycles), modes)
    state = ModeState({"h": 1.0 + 0.0j, "v": 0.0 + 0.0j})
    p_abs = 0.0
    for _ in range(n_cycles):
        state = apply_element(state, rot)
        if object_present:
            state, p = apply_absorber(state, Absorber("v"))
            p_abs += p
    probs = detection_probabilities(state)
    return ZenoDistribution(
        p_success_detect=probs["h"] if object_present else 0.0,
        p_absorbed=p_abs,
        p_inconclusive=probs["v"] + (0.0 if object_present else probs["h"]),
    )
