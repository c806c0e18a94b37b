"""Factories for the concrete states and Hamiltonians used by the experiments.

Each construction is paired with its closed-form overlap or orthogonality
time, so the full-matrix dynamics always has an independent analytic oracle
to check against.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import reduce
from typing import Optional

import numpy as np

from .dynamics import (
    DEFAULT_SCAN_FRACTION,
    HORIZON_MULTIPLIER,
    OrthogonalityResult,
    scan_first_zero,
)
from .qcore import (
    DENSE_CAP,
    DensityMatrix,
    Hamiltonian,
    InvariantViolation,
    PureState,
    SeparableEnsemble,
    SubsystemLayout,
    embed_local,
    noninteracting_hamiltonian,
)

#: i^n for n mod 4, evaluated exactly rather than through complex powers.
_I_POWERS = (1 + 0j, 1j, -1 + 0j, -1j)

_SIGMA_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)


# ---------------------------------------------------------------------------
# entangled chain of identical equally-spaced subsystems
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class EntangledChainSpec:
    """Equal superposition (1/sqrt(N)) sum_n |n>^(x M) of ladder eigenstates.

    Each of the ``subsystems`` carries an equally spaced local spectrum
    0, omega0, ..., (levels-1)*omega0.
    """

    levels: int
    subsystems: int
    omega0: float = 1.0

    def __post_init__(self) -> None:
        if self.levels < 2:
            raise InvariantViolation(f"levels must be >= 2, got {self.levels}")
        if self.subsystems < 1:
            raise InvariantViolation(f"subsystems must be >= 1, got {self.subsystems}")
        if not (self.omega0 > 0.0):
            raise InvariantViolation(f"omega0 must be positive, got {self.omega0}")

    @property
    def total_dim(self) -> int:
        return self.levels ** self.subsystems


def make_psi_ent(spec: EntangledChainSpec,
                 cap: int = DENSE_CAP) -> tuple[PureState, Hamiltonian, float]:
    """Entangled chain state, its free Hamiltonian, and its exact t_perp.

    The state's overlap with its evolved self is a pure geometric sum whose
    first zero is at 2*pi / (levels * subsystems * omega0): entanglement makes
    the orthogonalization a factor ~sqrt(M) faster than any product state
    with the same (homogeneous) energy budget.
    """
    n, m, w0 = spec.levels, spec.subsystems, spec.omega0
    if spec.total_dim > cap:
        raise InvariantViolation(
            f"dimension {spec.total_dim} exceeds the dense cap {cap}"
        )
    local_layout = SubsystemLayout((n,))
    local = Hamiltonian(local_layout, np.diag(w0 * np.arange(n)).astype(complex))
    hamiltonian = noninteracting_hamiltonian([local] * m, cap=cap)

    amplitudes = np.zeros(spec.total_dim, dtype=complex)
    stride = (spec.total_dim - 1) // (n - 1)  # flat index of |n n ... n>
    amplitudes[np.arange(n) * stride] = 1.0 / math.sqrt(n)
    state = PureState(hamiltonian.layout, amplitudes)
    return state, hamiltonian, 2.0 * math.pi / (n * m * w0)


def psi_ent_survival_amplitude(spec: EntangledChainSpec, t):
    """Closed-form overlap (1/N) sum_n exp(-i n M omega0 t).

    The factor M in the exponent is the signature of the energy entanglement:
    the collective phase winds M times faster than any single subsystem's.
    Accepts a scalar or array ``t``.
    """
    ts = np.asarray(t, dtype=float)
    n = np.arange(spec.levels)
    phases = np.exp(
        -1j * np.multiply.outer(ts, n * (spec.subsystems * spec.omega0))
    )
    amp = phases.sum(axis=-1) / spec.levels
    if ts.ndim == 0:
        return complex(amp)
    return amp


# ---------------------------------------------------------------------------
# collectively coupled qubits
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CollectiveSpec:
    """M qubits rotated individually at omega0 and collectively at omega.

    H = omega0 * sum_k (1 - sx_k) + omega * (1 - prod_k sx_k), acting on the
    product basis state |bits>.  ``bits`` defaults to all zeros; the overlap
    formula below is independent of it.  The dense cap is only enforced when
    the matrix is actually assembled (the scalar formulas have no cap).
    """

    qubits: int
    omega0: float = 1.0
    omega: float = 0.0
    bits: Optional[tuple[int, ...]] = None

    def __post_init__(self) -> None:
        if self.qubits < 1:
            raise InvariantViolation(f"qubits must be >= 1, got {self.qubits}")
        if self.omega0 < 0.0 or self.omega < 0.0:
            raise InvariantViolation("omega0 and omega must be nonnegative")
        if self.omega0 <= 0.0 and self.omega <= 0.0:
            raise InvariantViolation("omega0 and omega cannot both be zero")
        if self.bits is not None:
            bits = tuple(int(b) for b in self.bits)
            if len(bits) != self.qubits or any(b not in (0, 1) for b in bits):
                raise InvariantViolation(
                    f"bits must be a 0/1 vector of length {self.qubits}, got {self.bits}"
                )
            object.__setattr__(self, "bits", bits)

    @property
    def bit_vector(self) -> tuple[int, ...]:
        return self.bits if self.bits is not None else (0,) * self.qubits

    @property
    def energy(self) -> float:
        """Mean energy omega + M*omega0 of the initial basis state."""
        return self.omega + self.qubits * self.omega0

    @property
    def spread(self) -> float:
        """Energy spread sqrt(omega^2 + M*omega0^2) (exact for M >= 2)."""
        return math.sqrt(self.omega ** 2 + self.qubits * self.omega0 ** 2)

    @property
    def t_qsl(self) -> float:
        """Speed limit time pi / (2 sqrt(omega^2 + M*omega0^2))."""
        return math.pi / (2.0 * self.spread)


def _collective_matrix(qubits: int, omega0: float, omega: float) -> np.ndarray:
    dim = 2 ** qubits
    layout = SubsystemLayout((2,) * qubits, cap=dim)
    mat = np.zeros((dim, dim), dtype=complex)
    eye = np.eye(dim, dtype=complex)
    for k in range(qubits):
        mat += omega0 * (eye - embed_local(_SIGMA_X, k, layout))
    collective = reduce(np.kron, [_SIGMA_X] * qubits)
    mat += omega * (eye - collective)
    return mat


def make_collective(spec: CollectiveSpec,
                    cap: int = DENSE_CAP) -> tuple[PureState, Hamiltonian]:
    """Assemble the collective model as a dense 2^M system.

    The Hamiltonian's ground energy is exactly zero (both terms are PSD and
    share the all-plus eigenstate).  For M >= 2 the initial state's energy
    statistics are (omega + M*omega0, sqrt(omega^2 + M*omega0^2)); at M = 1
    the two couplings act through the same operator and simply add.
    """
    dim = 2 ** spec.qubits
    if dim > cap:
        raise InvariantViolation(f"dimension {dim} exceeds the dense cap {cap}")
    layout = SubsystemLayout((2,) * spec.qubits, cap=cap)
    hamiltonian = Hamiltonian(layout, _collective_matrix(spec.qubits, spec.omega0, spec.omega))
    bits = spec.bit_vector
    index = 0
    for b in bits:
        index = index * 2 + b
    amplitudes = np.zeros(dim, dtype=complex)
    amplitudes[index] = 1.0
    return PureState(layout, amplitudes), hamiltonian


def collective_overlap_fn(spec: CollectiveSpec, t):
    """Closed-form overlap of the collective model, global phase stripped.

    cos(omega t) cos^M(omega0 t) + i^(M+1) sin(omega t) sin^M(omega0 t);
    its squared magnitude equals the full-matrix survival for any initial bit
    pattern.  Accepts a scalar or array ``t``.
    """
    ts = np.asarray(t, dtype=float)
    m = spec.qubits
    phase = _I_POWERS[(m + 1) % 4]
    value = (
        np.cos(spec.omega * ts) * np.cos(spec.omega0 * ts) ** m
        + phase * np.sin(spec.omega * ts) * np.sin(spec.omega0 * ts) ** m
    )
    if ts.ndim == 0:
        return complex(value)
    return value.astype(complex)


def collective_t_perp(spec: CollectiveSpec,
                      horizon: Optional[float] = None,
                      amplitude_tol: float = 1e-10,
                      scan_fraction: float = DEFAULT_SCAN_FRACTION) -> OrthogonalityResult:
    """First zero of the collective overlap, from the scalar formula.

    Uses the same scan-and-refine contract as the full-matrix solver, applied
    to |overlap|^2 with acceptance threshold ``amplitude_tol`` on the
    amplitude.  The scalar path is exact and free of eigensolver noise, so it
    scales to any qubit count.
    """
    if horizon is None:
        horizon = HORIZON_MULTIPLIER * spec.t_qsl
    bandwidth = 2.0 * (spec.omega + spec.qubits * spec.omega0)

    def squared(ts: np.ndarray) -> np.ndarray:
        return np.abs(collective_overlap_fn(spec, ts)) ** 2

    return scan_first_zero(
        squared,
        horizon,
        bandwidth,
        accept_tol=amplitude_tol ** 2,
        scan_fraction=scan_fraction,
        scale=1.0,
    )


def grouped_t_perp(groups: int, per_group: int, omega0: float, omega: float,
                   horizon: Optional[float] = None,
                   amplitude_tol: float = 1e-10) -> OrthogonalityResult:
    """First orthogonality time of the grouped model, solved per group.

    The group Hamiltonians commute and the initial state is a product, so the
    total survival factorizes exactly into the per-group survivals and the
    first zero of the product is the first zero of one (identical) group,
    which is the collective model on its own qubits.  Using the group's
    scalar overlap keeps flat product zeros sharp; locating them on the full
    2^(G*Q) matrix is limited by the eigensolver noise floor.
    """
    if groups < 1 or per_group < 1:
        raise InvariantViolation("groups and per_group must both be >= 1")
    if horizon is None:
        aggregate_spread = math.sqrt(groups * (omega ** 2 + per_group * omega0 ** 2))
        horizon = HORIZON_MULTIPLIER * math.pi / (2.0 * aggregate_spread)
    return collective_t_perp(
        CollectiveSpec(per_group, omega0, omega),
        horizon=horizon,
        amplitude_tol=amplitude_tol,
    )


def make_grouped(groups: int, per_group: int, omega0: float, omega: float,
                 cap: int = DENSE_CAP) -> tuple[PureState, Hamiltonian]:
    """Collective model split into non-interacting groups of qubits.

    The register of ``groups * per_group`` qubits carries one collective term
    per group; entanglement cannot build up across groups, so the total
    survival is the product of the per-group survivals and the
    orthogonalization time is at least sqrt(M/Q) times the speed limit time.
    The initial state is all zeros.
    """
    if groups < 1 or per_group < 1:
        raise InvariantViolation("groups and per_group must both be >= 1")
    CollectiveSpec(per_group, omega0, omega)  # validate couplings once
    total_qubits = groups * per_group
    dim = 2 ** total_qubits
    if dim > cap:
        raise InvariantViolation(f"dimension {dim} exceeds the dense cap {cap}")
    layout = SubsystemLayout((2,) * total_qubits, cap=cap)
    block = _collective_matrix(per_group, omega0, omega)
    block_dim = 2 ** per_group
    mat = np.zeros((dim, dim), dtype=complex)
    for g in range(groups):
        left = np.eye(block_dim ** g, dtype=complex)
        right = np.eye(block_dim ** (groups - g - 1), dtype=complex)
        mat += np.kron(np.kron(left, block), right)
    hamiltonian = Hamiltonian(layout, mat)
    amplitudes = np.zeros(dim, dtype=complex)
    amplitudes[0] = 1.0
    return PureState(layout, amplitudes), hamiltonian


# ---------------------------------------------------------------------------
# classically correlated mixture that saturates the bound
# ---------------------------------------------------------------------------


def make_mixture_demo(omega: float) -> tuple[SeparableEnsemble, tuple[Hamiltonian, Hamiltonian]]:
    """Two-subsystem classical mixture that reaches the speed limit.

    Two three-level subsystems with local spectrum (0, omega, 2*omega).  Half
    of the time the first subsystem carries the excited superposition
    (|1> + |2>)/sqrt(2) (stats (1.5*omega, 0.5*omega), saturating its own
    bound pi/omega) while the second sits in the ground state, and half the
    time the roles are swapped.  The excited state has no ground-level
    support, so the cross overlaps Tr[rho_a(t) rho_b] vanish identically and
    the assembled mixture orthogonalizes exactly at its speed limit time
    pi/omega, even though on average both subsystems share the energy.

    Three levels are the smallest local dimension for which a zero-energy
    partner and a bound-saturating excited state can coexist with disjoint
    energy support.
    """
    if not (omega > 0.0):
        raise InvariantViolation(f"omega must be positive, got {omega}")
    layout = SubsystemLayout((3,))
    local = Hamiltonian(layout, np.diag([0.0, omega, 2.0 * omega]).astype(complex))
    ground = np.zeros((3, 3), dtype=complex)
    ground[0, 0] = 1.0
    rho_b = DensityMatrix(layout, ground)
    vec = np.zeros(3, dtype=complex)
    vec[1] = vec[2] = 1.0 / math.sqrt(2.0)
    rho_a = DensityMatrix(layout, np.outer(vec, vec.conj()))
    ensemble = SeparableEnsemble(
        (0.5, 0.5),
        ((rho_a, rho_b), (rho_b, rho_a)),
    )
    return ensemble, (local, local)
