"""Named states, bases and unitaries of the teleportation protocol.

Conventions:
  * omega = exp(2*pi*i/d); all index arithmetic is mod d.
  * Generalized Bell states |psi_rs> = (1/sqrt(d)) sum_j omega^(jr) |j>|j+s>.
  * The qudit Pauli family U_uv = sum_j omega^(uj) |j+v><j| doubles as the
    receiver's correction operator.
  * X-basis kets |r>_x = (1/sqrt(d)) sum_j omega^(jr) |j> are the columns
    of the d-dimensional Hadamard.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache, reduce

import numpy as np

from .state import StateVector, make_state

COEFF_NORM_TOL = 1e-10


def _omega_powers(d: int, k: int) -> np.ndarray:
    """[omega^(j*k) for j in 0..d-1]."""
    return np.exp(2j * np.pi * k * np.arange(d) / d)


@dataclass(frozen=True)
class ChannelSpec:
    """Pure entangled channel: dimension d, n controllers, m copies.

    coeffs c_0..c_{d-1} obey (1/d) * sum |c_j|^2 = 1 and are all nonzero;
    the index of the smallest |c_j|^2 (ties to the smallest index) sets
    the success probability (min |c_j|^2)^m.
    """

    d: int
    n: int
    m: int
    coeffs: tuple[complex, ...]

    def __post_init__(self):
        if self.d < 2:
            raise ValueError(f"d must be >= 2, got {self.d}")
        if self.n < 0:
            raise ValueError(f"n must be >= 0, got {self.n}")
        if self.m < 1:
            raise ValueError(f"m must be >= 1, got {self.m}")
        coeffs = tuple(complex(c) for c in self.coeffs)
        object.__setattr__(self, "coeffs", coeffs)
        if len(coeffs) != self.d:
            raise ValueError(f"need {self.d} coefficients, got {len(coeffs)}")
        mods2 = np.abs(np.asarray(coeffs)) ** 2
        if np.any(mods2 < 1e-12):
            raise ValueError(
                "zero channel coefficient: the receiver's extraction unitary "
                "does not exist and the success probability would be 0"
            )
        total = float(mods2.sum()) / self.d
        if abs(total - 1.0) > COEFF_NORM_TOL:
            raise ValueError(
                f"coefficients violate (1/d)*sum|c_j|^2 = 1: got {total!r}"
            )

    @property
    def k_min(self) -> int:
        """Index of the smallest |c_j|^2, ties broken by smallest index."""
        mods2 = np.abs(np.asarray(self.coeffs)) ** 2
        return int(np.argmin(mods2))

    @property
    def min_weight(self) -> float:
        """min_j |c_j|^2."""
        return float(np.min(np.abs(np.asarray(self.coeffs)) ** 2))


def gbs_vector(d: int, r: int, s: int) -> StateVector:
    """Generalized Bell state |psi_rs> on a qudit pair."""
    if not (0 <= r < d and 0 <= s < d):
        raise ValueError(f"(r, s) = ({r}, {s}) out of range for d = {d}")
    amps = np.zeros(d * d, dtype=complex)
    phases = _omega_powers(d, r)
    for j in range(d):
        amps[j * d + (j + s) % d] = phases[j]
    return make_state((d, d), amps / np.sqrt(d))


def gbs_basis(d: int) -> list[StateVector]:
    """All d^2 generalized Bell states, ordered (r, s) lexicographically."""
    return [gbs_vector(d, r, s) for r in range(d) for s in range(d)]


@lru_cache(maxsize=None)
def gbs_basis_matrix(d: int) -> np.ndarray:
    """GBS basis stacked into rows, for measurement calls."""
    return np.vstack([v.amps for v in gbs_basis(d)])


def u_uv(d: int, u: int, v: int) -> np.ndarray:
    """Qudit Pauli U_uv = sum_j omega^(uj) |j+v><j| (phase u, shift v)."""
    if not (0 <= u < d and 0 <= v < d):
        raise ValueError(f"(u, v) = ({u}, {v}) out of range for d = {d}")
    op = np.zeros((d, d), dtype=complex)
    phases = _omega_powers(d, u)
    for j in range(d):
        op[(j + v) % d, j] = phases[j]
    return op


def x_basis_vector(d: int, r: int) -> StateVector:
    """X-basis ket |r>_x, mutually unbiased with the computational basis."""
    if not 0 <= r < d:
        raise ValueError(f"r = {r} out of range for d = {d}")
    return make_state((d,), _omega_powers(d, r) / np.sqrt(d))


@lru_cache(maxsize=None)
def x_basis_matrix(d: int) -> np.ndarray:
    """X-basis kets stacked into rows (outcome r on row r)."""
    return np.vstack([x_basis_vector(d, r).amps for r in range(d)])


def hadamard_d(d: int) -> np.ndarray:
    """d-dimensional Hadamard: H[j, k] = omega^(jk) / sqrt(d)."""
    if d < 2:
        raise ValueError(f"d must be >= 2, got {d}")
    j = np.arange(d)
    return np.exp(2j * np.pi * np.outer(j, j) / d) / np.sqrt(d)


@lru_cache(maxsize=None)
def channel_state(spec: ChannelSpec, labels=None) -> StateVector:
    """One copy of the channel: (1/sqrt(d)) sum_j c_j |j>^(n+2).

    The explicit 1/sqrt(d) prefactor makes the state unit-norm under the
    coefficient constraint (1/d) sum |c_j|^2 = 1.
    """
    parties = spec.n + 2
    dims = (spec.d,) * parties
    amps = np.zeros(spec.d**parties, dtype=complex)
    stride = (spec.d**parties - 1) // (spec.d - 1)  # index of |j,j,...,j> is j*stride
    for j, c in enumerate(spec.coeffs):
        amps[j * stride] = c / np.sqrt(spec.d)
    if labels is None:
        labels = tuple(f"a_{k}" for k in range(parties))
    return make_state(dims, amps, labels)


def _gamma_table(spec: ChannelSpec) -> np.ndarray:
    """Extraction ratios Gamma_J = |c_k|^m / prod_l |c_(J_l)| over d^m indices."""
    mods = np.abs(np.asarray(spec.coeffs))
    ck = mods[spec.k_min]
    per_index = ck / mods  # length d, each <= 1
    table = reduce(np.multiply.outer, [per_index] * spec.m).reshape(-1)
    return np.minimum(table, 1.0)  # clamp float overshoot at ties


@lru_cache(maxsize=None)
def u_max_m(spec: ChannelSpec) -> np.ndarray:
    """Receiver's collective extraction unitary on m qudits + one aux qubit.

    Basis ordering: all |j_1..j_m>|0>_aux first, then |j_1..j_m>|1>_aux.
    Built from coefficient moduli; phases of complex c_j are compensated
    separately during the correction step.
    """
    gamma = _gamma_table(spec)
    gamma_plus = np.sqrt(1.0 - gamma**2)
    dm = gamma.size
    op = np.zeros((2 * dm, 2 * dm), dtype=complex)
    idx = np.arange(dm)
    op[idx, idx] = gamma
    op[idx, idx + dm] = gamma_plus
    op[idx + dm, idx] = gamma_plus
    # The lower-right sign flip is required for unitarity only where the
    # off-diagonal entry is nonzero; keeping +1 on saturated indices makes
    # the operator reduce to the exact identity for a maximally entangled
    # channel (the aux |1> sector there is unreachable either way).
    op[idx + dm, idx + dm] = np.where(gamma_plus == 0.0, gamma, -gamma)
    return op


def u_max(spec: ChannelSpec) -> np.ndarray:
    """Single-copy extraction unitary (2d x 2d); the m = 1 special case."""
    if spec.m != 1:
        spec = ChannelSpec(spec.d, spec.n, 1, spec.coeffs)
    return u_max_m(spec)


def correction_unitary(d: int, rho: int, sigma: int) -> np.ndarray:
    """Receiver's phase-and-shift correction; indices reduced mod d."""
    return u_uv(d, rho % d, sigma % d)


def multi_correction_unitary(d: int, phase_indices, shifts) -> np.ndarray:
    """Direct multi-copy correction on d^m: sum over (j_1..j_m) of
    omega^(sum_l j_l * rho_l) |j_1..j_m><j_1+s_1 .. j_m+s_m|.

    Equals the tensor product of per-copy correction_unitary(d, rho_l,
    d-s_l) factors up to a global phase (verified in tests).
    """
    phase_indices = list(phase_indices)
    shifts = list(shifts)
    m = len(phase_indices)
    if len(shifts) != m:
        raise ValueError("phase_indices and shifts must have equal length")
    dm = d**m
    op = np.zeros((dm, dm), dtype=complex)
    for row in range(dm):
        digits = np.unravel_index(row, (d,) * m)
        col = 0
        phase = 0
        for j, rho, s in zip(digits, phase_indices, shifts):
            col = col * d + (j + s) % d
            phase += j * rho
        op[row, col] = np.exp(2j * np.pi * phase / d)
    return op
