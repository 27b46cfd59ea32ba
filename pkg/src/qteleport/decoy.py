"""Decoy-photon channel-setup check against an intercept-resend adversary.

Single flying qudits are prepared uniformly in one of the 2d eigenstates
of the computational (Z) and X bases.  An eavesdropper without quantum
memory may measure-and-resend in a fixed or randomly guessed basis; the
checker re-measures in the preparation basis and flags any mismatch.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .state import StateVector, make_state, measure_in_basis
from .primitives import x_basis_matrix, x_basis_vector

EVE_ACTIONS = ("none", "measure_Z_resend", "measure_X_resend", "random_basis_resend")


@dataclass(frozen=True)
class DecoyRound:
    prep_basis: str  # "Z" or "X"
    prep_value: int
    eve_action: str
    detected: bool


@dataclass(frozen=True)
class DetectionReport:
    d: int
    eve_action: str
    rounds: int
    detections: int
    rate: float
    expected_rate: float
    z_score: float


def _z_state(d: int, k: int) -> StateVector:
    amps = np.zeros(d, dtype=complex)
    amps[k] = 1.0
    return make_state((d,), amps)


def prepare_decoy(
    d: int,
    rng: np.random.Generator | None = None,
    forced: tuple[str, int] | None = None,
) -> tuple[str, int, StateVector]:
    """Uniformly random (or forced) decoy: basis in {Z, X}, value in 0..d-1."""
    if forced is not None:
        basis, value = forced
    else:
        if rng is None:
            raise ValueError("either rng or forced is required")
        basis = "Z" if rng.integers(2) == 0 else "X"
        value = int(rng.integers(d))
    if basis not in ("Z", "X"):
        raise ValueError(f"unknown basis {basis!r}")
    if not 0 <= value < d:
        raise ValueError(f"value {value} out of range for d = {d}")
    state = _z_state(d, value) if basis == "Z" else x_basis_vector(d, value)
    return basis, value, state


def _measure_resend(state: StateVector, basis: str, rng: np.random.Generator):
    d = state.dims[0]
    bmat = np.eye(d) if basis == "Z" else x_basis_matrix(d)
    out = measure_in_basis(state, [0], bmat, rng)
    return _z_state(d, out.value) if basis == "Z" else x_basis_vector(d, out.value)


def eavesdrop(
    state: StateVector, eve_action: str, rng: np.random.Generator
) -> StateVector:
    """Apply the adversary's action to a flying decoy qudit."""
    if eve_action == "none":
        return state
    if eve_action == "measure_Z_resend":
        return _measure_resend(state, "Z", rng)
    if eve_action == "measure_X_resend":
        return _measure_resend(state, "X", rng)
    if eve_action == "random_basis_resend":
        basis = "Z" if rng.integers(2) == 0 else "X"
        return _measure_resend(state, basis, rng)
    raise ValueError(f"unknown eve action {eve_action!r} (expected one of {EVE_ACTIONS})")


def check_decoy(
    prep_basis: str, prep_value: int, state: StateVector, rng: np.random.Generator
) -> bool:
    """Re-measure in the preparation basis; True means the round passes."""
    d = state.dims[0]
    bmat = np.eye(d) if prep_basis == "Z" else x_basis_matrix(d)
    out = measure_in_basis(state, [0], bmat, rng)
    return out.value == prep_value


def analytic_detection_rate(d: int, eve_action: str) -> float:
    """Exact detection probability per checked decoy.

    A wrong-basis measure-resend survives the check with probability 1/d
    (two successive projections between unbiased bases); the adversary
    picks the wrong basis with probability 1/2 for every listed attack
    except doing nothing.
    """
    if eve_action == "none":
        return 0.0
    if eve_action in ("measure_Z_resend", "measure_X_resend", "random_basis_resend"):
        return 0.5 * (1.0 - 1.0 / d)
    raise ValueError(f"unknown eve action {eve_action!r}")


def _sample(probs: np.ndarray, rng: np.random.Generator) -> int:
    cumulative = np.cumsum(probs)
    return min(
        int(np.searchsorted(cumulative, rng.random() * cumulative[-1], "right")),
        probs.size - 1,
    )


def _flat_round(
    d: int, x_mat: np.ndarray, eve_action: str, rng: np.random.Generator
) -> DecoyRound:
    """One decoy round on plain length-d vectors (same physics as the
    StateVector path above, without the per-round object overhead)."""
    prep_basis = "Z" if rng.integers(2) == 0 else "X"
    prep_value = int(rng.integers(d))
    vec = (
        np.eye(d, dtype=complex)[prep_value]
        if prep_basis == "Z"
        else x_mat[prep_value]
    )
    if eve_action != "none":
        eve_basis = eve_action[8]  # "Z" or "X" from measure_?_resend
        if eve_action == "random_basis_resend":
            eve_basis = "Z" if rng.integers(2) == 0 else "X"
        if eve_basis == "Z":
            got = _sample(np.abs(vec) ** 2, rng)
            vec = np.eye(d, dtype=complex)[got]
        else:
            got = _sample(np.abs(x_mat.conj() @ vec) ** 2, rng)
            vec = x_mat[got]
    if prep_basis == "Z":
        check = _sample(np.abs(vec) ** 2, rng)
    else:
        check = _sample(np.abs(x_mat.conj() @ vec) ** 2, rng)
    return DecoyRound(prep_basis, prep_value, eve_action, check != prep_value)


def detection_campaign(
    d: int, eve_action: str, rounds: int, seed: int
) -> tuple[DetectionReport, list[DecoyRound]]:
    """Run independent decoy rounds and compare against the analytic rate."""
    if rounds < 1:
        raise ValueError("rounds must be >= 1")
    expected = analytic_detection_rate(d, eve_action)
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))
    x_mat = x_basis_matrix(d)
    records: list[DecoyRound] = []
    detections = 0
    for _ in range(rounds):
        round_record = _flat_round(d, x_mat, eve_action, rng)
        if round_record.detected:
            detections += 1
        records.append(round_record)
    rate = detections / rounds
    if 0.0 < expected < 1.0:
        z = (rate - expected) / np.sqrt(expected * (1.0 - expected) / rounds)
    else:
        z = 0.0 if rate == expected else float("inf")
    report = DetectionReport(
        d=d,
        eve_action=eve_action,
        rounds=rounds,
        detections=detections,
        rate=rate,
        expected_rate=expected,
        z_score=float(z),
    )
    return report, records
