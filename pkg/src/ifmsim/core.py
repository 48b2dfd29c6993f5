"""Minimal complex-amplitude engine over labeled spatial modes.

States are dictionaries mapping a mode label (a photon arm, a diffraction-order
path, a polarization component) to a complex probability amplitude.  Optical
elements are small unitary matrices acting on an ordered subset of modes, and
absorbers model opaque objects: they zero a mode's amplitude without
renormalizing, so the lost norm IS the interaction probability.

Conventions:

- Beam-splitter reflection carries the phase factor ``i`` (symmetric
  convention), so a balanced two-splitter interferometer has one dark output
  port with no extra phase plates.
- All randomness enters through an explicit ``numpy.random.Generator``; the
  module never owns global RNG state.

Everything here is an immutable value; operations return new states.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# Tolerance for algebraic identities (unitarity, norm conservation).
# Matrices are at most a few modes wide, so there is no error accumulation.
UNITARITY_TOL = 1e-12
# Slack allowed on total probability before a state is considered corrupt.
NORM_SLACK = 1e-9

# Outcome label returned by sampling when the norm deficit fires.
ABSORBED = "absorbed"


@dataclass(frozen=True)
class ModeState:
    """Complex amplitudes over uniquely labeled modes.

    The total probability sum(|amplitude|^2) must lie in [0, 1]: exactly 1 for
    a closed system, below 1 only after an absorber has acted (the deficit
    equals the accumulated absorption probability).
    """

    amplitudes: dict[str, complex]

    def __post_init__(self) -> None:
        total = self.norm()
        if total > 1.0 + NORM_SLACK:
            raise ValueError(f"total probability {total} exceeds 1")

    def norm(self) -> float:
        """Total probability carried by the state."""
        return float(sum(abs(a) ** 2 for a in self.amplitudes.values()))

    def amplitude(self, mode: str) -> complex:
        if mode not in self.amplitudes:
            raise KeyError(f"unknown mode {mode!r}")
        return self.amplitudes[mode]

    @property
    def modes(self) -> tuple[str, ...]:
        return tuple(self.amplitudes)


@dataclass(frozen=True)
class ElementUnitary:
    """Unitary matrix acting on an ordered subset of modes.

    The matrix must satisfy max|U^H U - I| < 1e-12; construction fails
    otherwise.  Row/column order follows ``modes``.
    """

    modes: tuple[str, ...]
    matrix: np.ndarray

    def __post_init__(self) -> None:
        mat = np.asarray(self.matrix, dtype=np.complex128)
        object.__setattr__(self, "matrix", mat)
        object.__setattr__(self, "modes", tuple(self.modes))
        n = len(self.modes)
        if len(set(self.modes)) != n:
            raise ValueError("element modes must be unique")
        if mat.shape != (n, n):
            raise ValueError(f"matrix shape {mat.shape} does not match {n} modes")
        defect = np.max(np.abs(mat.conj().T @ mat - np.eye(n)))
        if defect >= UNITARITY_TOL:
            raise ValueError(f"matrix is not unitary (defect {defect:.3e})")


@dataclass(frozen=True)
class Absorber:
    """Perfectly opaque object sitting in one mode."""

    mode: str


def beam_splitter(transmission: float, modes: tuple[str, str] = ("a", "b")) -> ElementUnitary:
    """Two-mode splitter with transmission amplitude sqrt(t) and reflection i*sqrt(1-t).

    ``transmission`` is the intensity transmission coefficient in [0, 1];
    t=1 is the identity and t=0 a mirror-like full reflection.
    """
    if not 0.0 <= transmission <= 1.0:
        raise ValueError(f"transmission {transmission} outside [0, 1]")
    t = np.sqrt(transmission)
    r = 1j * np.sqrt(1.0 - transmission)
    return ElementUnitary(modes, np.array([[t, r], [r, t]]))


def mirror(mode: str) -> ElementUnitary:
    """Fold of a single beam back into its own arm label: amplitude picks up i.

    This is the t=0 splitter restricted to one persistent arm label (incoming
    and outgoing directions of the same arm share the label).
    """
    return ElementUnitary((mode,), np.array([[1j]]))


def phase_plate(mode: str, phase: float) -> ElementUnitary:
    """Single-mode element multiplying the amplitude by exp(i*phase)."""
    return ElementUnitary((mode,), np.array([[np.exp(1j * phase)]]))


def rotation(angle: float, modes: tuple[str, str]) -> ElementUnitary:
    """Real rotation by ``angle`` between two modes (polarization rotator)."""
    c, s = np.cos(angle), np.sin(angle)
    return ElementUnitary(modes, np.array([[c, -s], [s, c]], dtype=np.complex128))


def apply_element(state: ModeState, element: ElementUnitary) -> ModeState:
    """Transform the element's modes by its matrix; all other modes unchanged."""
    for m in element.modes:
        if m not in state.amplitudes:
            raise KeyError(f"element mode {m!r} not present in state")
    vec = np.array([state.amplitudes[m] for m in element.modes], dtype=np.complex128)
    out = element.matrix @ vec
    new_amps = dict(state.amplitudes)
    for m, a in zip(element.modes, out):
        new_amps[m] = complex(a)
    return ModeState(new_amps)


def apply_absorber(state: ModeState, absorber: Absorber) -> tuple[ModeState, float]:
    """Zero the absorber's mode without renormalizing.

    Returns the new state and the absorption probability |old amplitude|^2,
    so norm(before) = norm(after) + probability exactly.
    """
    if absorber.mode not in state.amplitudes:
        raise KeyError(f"absorber mode {absorber.mode!r} not present in state")
    p = abs(state.amplitudes[absorber.mode]) ** 2
    new_amps = dict(state.amplitudes)
    new_amps[absorber.mode] = 0.0 + 0.0j
    return ModeState(new_amps), float(p)


def detection_probabilities(state: ModeState) -> dict[str, float]:
    """Per-mode detection probability |amplitude|^2 (sums to at most 1)."""
    return {m: float(abs(a) ** 2) for m, a in state.amplitudes.items()}


def sample_outcome(state: ModeState, rng: np.random.Generator) -> str:
    """Draw one projective outcome: a mode label, or ``ABSORBED`` for the norm deficit.

    Deterministic for a fixed generator state.  Mode order follows the
    state's insertion order, so identical states sample identically.
    """
    probs = detection_probabilities(state)
    total = sum(probs.values())
    if total > 1.0 + NORM_SLACK:
        raise ValueError(f"state norm {total} exceeds 1; cannot sample")
    u = rng.random()
    acc = 0.0
    for mode, p in probs.items():
        acc += p
        if u < acc:
            return mode
    return ABSORBED


def sample_outcomes(state: ModeState, n: int, rng: np.random.Generator) -> dict[str, int]:
    """Vectorized batch of ``n`` independent outcome draws, counted per label.

    Equivalent to ``n`` calls of :func:`sample_outcome` in distribution (not
    draw-for-draw), and much faster for Monte Carlo runs.
    """
    if n < 1:
        raise ValueError("need at least one sample")
    probs = detection_probabilities(state)
    total = sum(probs.values())
    if total > 1.0 + NORM_SLACK:
        raise ValueError(f"state norm {total} exceeds 1; cannot sample")
    labels = list(probs) + [ABSORBED]
    p = np.array(list(probs.values()) + [max(0.0, 1.0 - total)])
    p /= p.sum()
    draws = rng.choice(len(labels), size=n, p=p)
    counts = np.bincount(draws, minlength=len(labels))
    return {label: int(c) for label, c in zip(labels, counts)}
