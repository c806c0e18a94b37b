"""Value types and dense linear-algebra primitives for composite quantum systems.

Conventions: hbar = 1, so energies and frequencies are dimensionless reals in
reciprocal time units.  All operators are dense complex matrices.  Subsystem 0
occupies the leftmost (slowest-varying) slot of the Kronecker ordering, so the
flat index of the product basis state |i_0 i_1 ... i_{M-1}> is
i_0 * d_1 * ... * d_{M-1} + ... + i_{M-1}.

All types are immutable after construction and all operations are pure
functions, so everything here is safe for concurrent use.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import reduce
from typing import Sequence, Union

import numpy as np

#: Default ceiling on the total Hilbert-space dimension.  Dense exact methods
#: only; nine qubits (512) fit comfortably, 4096 is the point where a laptop
#: stops being a reasonable tool.
DENSE_CAP = 4096

NORM_TOL = 1e-12
HERM_TOL = 1e-12
TRACE_TOL = 1e-12
PSD_TOL = 1e-10
GROUND_TOL = 1e-10
WEIGHT_TOL = 1e-12
EIGENVALUE_DROP = 1e-12


class InvariantViolation(ValueError):
    """A state, operator, or option failed one of its construction invariants."""


class SchemaError(ValueError):
    """A JSON document does not match the state/Hamiltonian wire schema."""


class NumericalFailure(RuntimeError):
    """A dense linear-algebra routine failed or produced inconsistent output."""


# ---------------------------------------------------------------------------
# array helpers
# ---------------------------------------------------------------------------


def _freeze(arr: np.ndarray) -> np.ndarray:
    out = np.array(arr, dtype=complex, copy=True)
    out.flags.writeable = False
    return out


def _as_vector(raw, dim: int, name: str) -> np.ndarray:
    vec = np.asarray(raw, dtype=complex)
    if vec.ndim != 1 or vec.shape[0] != dim:
        raise InvariantViolation(
            f"{name}: expected a complex vector of length {dim}, got shape {vec.shape}"
        )
    return vec


def _as_square(raw, dim: int, name: str) -> np.ndarray:
    mat = np.asarray(raw, dtype=complex)
    if mat.ndim != 2 or mat.shape != (dim, dim):
        raise InvariantViolation(
            f"{name}: expected a {dim}x{dim} complex matrix, got shape {mat.shape}"
        )
    return mat


def _require_hermitian(mat: np.ndarray, name: str, tol: float = HERM_TOL) -> None:
    dev = float(np.abs(mat - mat.conj().T).max()) if mat.size else 0.0
    if dev > tol:
        raise InvariantViolation(f"{name} is not Hermitian (max deviation {dev:.3e})")


def _eigh(mat: np.ndarray, name: str):
    try:
        return np.linalg.eigh(mat)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailure(f"eigendecomposition of {name} failed: {exc}") from exc


# ---------------------------------------------------------------------------
# domain types
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SubsystemLayout:
    """Ordered local Hilbert-space dimensions of a composite system.

    The product of the local dimensions is capped (default ``DENSE_CAP``) to
    keep exact dense methods feasible; pass ``cap`` to override.
    """

    dims: tuple[int, ...]
    cap: int = field(default=DENSE_CAP, compare=False, repr=False)

    def __post_init__(self) -> None:
        try:
            dims = tuple(int(d) for d in self.dims)
        except TypeError as exc:
            raise InvariantViolation(f"dims must be a sequence of integers: {exc}") from exc
        if not dims:
            raise InvariantViolation("a layout needs at least one subsystem")
        if any(d < 1 for d in dims):
            raise InvariantViolation(f"local dimensions must be >= 1, got {dims}")
        total = math.prod(dims)
        if total > self.cap:
            raise InvariantViolation(
                f"total dimension {total} exceeds the dense cap {self.cap}"
            )
        object.__setattr__(self, "dims", dims)

    @property
    def total_dim(self) -> int:
        return math.prod(self.dims)

    @property
    def num_subsystems(self) -> int:
        return len(self.dims)


@dataclass(frozen=True, eq=False)
class PureState:
    """Normalized complex amplitude vector over a composite product basis."""

    layout: SubsystemLayout
    amplitudes: np.ndarray

    def __post_init__(self) -> None:
        vec = _as_vector(self.amplitudes, self.layout.total_dim, "amplitudes")
        norm = float(np.linalg.norm(vec))
        if abs(norm - 1.0) > NORM_TOL:
            raise InvariantViolation(f"state norm is {norm!r}, expected 1 within {NORM_TOL}")
        object.__setattr__(self, "amplitudes", _freeze(vec))


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Hermitian, positive-semidefinite, unit-trace complex matrix."""

    layout: SubsystemLayout
    matrix: np.ndarray

    def __post_init__(self) -> None:
        mat = _as_square(self.matrix, self.layout.total_dim, "density matrix")
        _require_hermitian(mat, "density matrix")
        tr = complex(np.trace(mat))
        if abs(tr - 1.0) > TRACE_TOL:
            raise InvariantViolation(f"density matrix trace is {tr!r}, expected 1")
        try:
            lowest = float(np.linalg.eigvalsh(mat)[0])
        except np.linalg.LinAlgError as exc:
            raise NumericalFailure(f"eigenvalue check failed: {exc}") from exc
        if lowest < -PSD_TOL:
            raise InvariantViolation(
                f"density matrix has eigenvalue {lowest:.3e} below the PSD slack -{PSD_TOL}"
            )
        object.__setattr__(self, "matrix", _freeze(mat))


State = Union[PureState, DensityMatrix]


@dataclass(frozen=True, eq=False)
class Hamiltonian:
    """Hermitian operator, diagonalized once at construction.

    ``ground_energy`` caches the minimum eigenvalue; the eigensystem is reused
    by every evolution and bound computation.  Operations that assume a zero
    ground state check ``is_ground_shifted`` and reject other inputs rather
    than shifting silently.
    """

    layout: SubsystemLayout
    matrix: np.ndarray
    ground_energy: float = field(init=False)

    def __post_init__(self) -> None:
        mat = _as_square(self.matrix, self.layout.total_dim, "hamiltonian")
        _require_hermitian(mat, "hamiltonian")
        evals, evecs = _eigh(mat, "hamiltonian")
        object.__setattr__(self, "matrix", _freeze(mat))
        object.__setattr__(self, "ground_energy", float(evals[0]))
        object.__setattr__(self, "_evals", evals)
        object.__setattr__(self, "_evecs", evecs)

    @classmethod
    def _from_eigensystem(
        cls,
        layout: SubsystemLayout,
        matrix: np.ndarray,
        evals: np.ndarray,
        evecs: np.ndarray,
    ) -> "Hamiltonian":
        # Internal fast path for matrices whose decomposition is already known
        # (e.g. a ground shift, which only slides the spectrum).
        obj = object.__new__(cls)
        object.__setattr__(obj, "layout", layout)
        object.__setattr__(obj, "matrix", _freeze(matrix))
        object.__setattr__(obj, "ground_energy", float(evals[0]))
        object.__setattr__(obj, "_evals", evals)
        object.__setattr__(obj, "_evecs", evecs)
        return obj

    def eigensystem(self) -> tuple[np.ndarray, np.ndarray]:
        """Ascending eigenvalues and the matching orthonormal eigenvector columns."""
        return self._evals, self._evecs  # type: ignore[attr-defined]

    @property
    def is_ground_shifted(self) -> bool:
        return abs(self.ground_energy) <= GROUND_TOL


@dataclass(frozen=True)
class EnergyStats:
    """Mean energy and energy spread of a state, measured from a zero ground state."""

    energy: float
    spread: float

    def __post_init__(self) -> None:
        for name, value in (("energy", self.energy), ("spread", self.spread)):
            if not math.isfinite(value):
                raise InvariantViolation(f"{name} must be finite, got {value!r}")
            if value < 0.0:
                raise InvariantViolation(f"{name} must be nonnegative, got {value!r}")


@dataclass(frozen=True, eq=False)
class SeparableEnsemble:
    """Probabilistic mixture of per-subsystem product density matrices.

    ``terms[n]`` is the ordered list of local factors of realization n, drawn
    with probability ``weights[n]``.  Every term must have one factor per
    subsystem, with matching local dimensions.
    """

    weights: tuple[float, ...]
    terms: tuple[tuple[DensityMatrix, ...], ...]

    def __post_init__(self) -> None:
        weights = tuple(float(w) for w in self.weights)
        terms = tuple(tuple(term) for term in self.terms)
        if not weights or len(weights) != len(terms):
            raise InvariantViolation("need one weight per ensemble term")
        if any(w <= 0.0 for w in weights):
            raise InvariantViolation(f"weights must be positive, got {weights}")
        total = math.fsum(weights)
        if abs(total - 1.0) > WEIGHT_TOL:
            raise InvariantViolation(f"weights sum to {total!r}, expected 1")
        first = terms[0]
        if not first:
            raise InvariantViolation("ensemble terms must contain at least one factor")
        dims = tuple(f.layout.total_dim for f in first)
        for n, term in enumerate(terms):
            if len(term) != len(dims):
                raise InvariantViolation(
                    f"term {n} has {len(term)} factors, expected {len(dims)}"
                )
            for k, factor in enumerate(term):
                if not isinstance(factor, DensityMatrix):
                    raise InvariantViolation(f"term {n} factor {k} is not a DensityMatrix")
                if factor.layout.dims != (dims[k],):
                    raise InvariantViolation(
                        f"term {n} factor {k} has dims {factor.layout.dims}, "
                        f"expected ({dims[k]},)"
                    )
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "terms", terms)

    @property
    def layout(self) -> SubsystemLayout:
        return SubsystemLayout(tuple(f.layout.total_dim for f in self.terms[0]))

    def assemble(self) -> DensityMatrix:
        """Global density matrix: the weighted sum of the Kronecker products."""
        layout = self.layout
        total = np.zeros((layout.total_dim, layout.total_dim), dtype=complex)
        for weight, term in zip(self.weights, self.terms):
            total += weight * reduce(np.kron, (f.matrix for f in term))
        return DensityMatrix(layout, total)


# ---------------------------------------------------------------------------
# operations
# ---------------------------------------------------------------------------


def _require_same_layout(a, b) -> None:
    if a.layout.dims != b.layout.dims:
        raise InvariantViolation(
            f"layout mismatch: {a.layout.dims} vs {b.layout.dims}"
        )


def tensor_product(factors: Sequence[Sequence[complex]],
                   layout: SubsystemLayout | None = None) -> PureState:
    """Kronecker product of normalized local state vectors.

    The amplitude at multi-index (i_0, ..., i_{M-1}) is the product of the
    factor amplitudes.  When ``layout`` is given the factor lengths must match
    its local dimensions.
    """
    if len(factors) == 0:
        raise InvariantViolation("tensor_product needs at least one factor")
    vecs = []
    for k, factor in enumerate(factors):
        vec = np.asarray(factor, dtype=complex)
        if vec.ndim != 1 or vec.size == 0:
            raise InvariantViolation(f"factor {k} is not a nonempty vector")
        norm = float(np.linalg.norm(vec))
        if abs(norm - 1.0) > NORM_TOL:
            raise InvariantViolation(f"factor {k} has norm {norm!r}, expected 1")
        vecs.append(vec)
    dims = tuple(v.size for v in vecs)
    if layout is not None and layout.dims != dims:
        raise InvariantViolation(
            f"factor dimensions {dims} do not match the declared layout {layout.dims}"
        )
    lay = layout if layout is not None else SubsystemLayout(dims)
    return PureState(lay, reduce(np.kron, vecs))


def embed_local(op, site: int, layout: SubsystemLayout) -> np.ndarray:
    """Embed a Hermitian single-subsystem operator as identity-elsewhere.

    Embeddings at different sites commute, and the embedding is linear in
    ``op``.  Returns a plain dense matrix on the full space.
    """
    if not 0 <= site < layout.num_subsystems:
        raise InvariantViolation(
            f"site {site} out of range for {layout.num_subsystems} subsystems"
        )
    local_dim = layout.dims[site]
    mat = _as_square(op, local_dim, f"local operator at site {site}")
    _require_hermitian(mat, f"local operator at site {site}")
    left = math.prod(layout.dims[:site])
    right = math.prod(layout.dims[site + 1:])
    return np.kron(np.kron(np.eye(left, dtype=complex), mat),
                   np.eye(right, dtype=complex))


def noninteracting_hamiltonian(local_hamiltonians: Sequence[Hamiltonian],
                               cap: int = DENSE_CAP) -> Hamiltonian:
    """Sum of single-subsystem Hamiltonians embedded on the full space.

    A sum of ground-shifted commuting local terms is itself ground-shifted.
    """
    if len(local_hamiltonians) == 0:
        raise InvariantViolation("need at least one local hamiltonian")
    layout = SubsystemLayout(tuple(h.layout.total_dim for h in local_hamiltonians), cap=cap)
    total = np.zeros((layout.total_dim, layout.total_dim), dtype=complex)
    for k, local in enumerate(local_hamiltonians):
        total += embed_local(local.matrix, k, layout)
    return Hamiltonian(layout, total)


def ground_shift(hamiltonian: Hamiltonian) -> Hamiltonian:
    """Subtract the minimum eigenvalue so the ground-state energy is zero.

    The dynamics are unchanged up to a global phase; only the energy
    bookkeeping moves.
    """
    evals, evecs = hamiltonian.eigensystem()
    lam0 = hamiltonian.ground_energy
    shifted = hamiltonian.matrix - lam0 * np.eye(hamiltonian.layout.total_dim)
    return Hamiltonian._from_eigensystem(hamiltonian.layout, shifted, evals - lam0, evecs)


def energy_stats(state: State, hamiltonian: Hamiltonian) -> EnergyStats:
    """Mean energy and spread of a state under a ground-shifted Hamiltonian.

    Rejects Hamiltonians whose ground energy is not zero: shifting changes the
    mean energy, so it has to be an explicit step (see ``ground_shift``).
    """
    _require_same_layout(state, hamiltonian)
    if not hamiltonian.is_ground_shifted:
        raise InvariantViolation(
            f"hamiltonian has ground energy {hamiltonian.ground_energy!r}; "
            "apply ground_shift before computing energy statistics"
        )
    h = hamiltonian.matrix
    if isinstance(state, PureState):
        hv = h @ state.amplitudes
        mean = float(np.real(np.vdot(state.amplitudes, hv)))
        second = float(np.real(np.vdot(hv, hv)))
    else:
        hr = h @ state.matrix
        mean = float(np.real(np.trace(hr)))
        second = float(np.real(np.trace(h @ hr)))
    if mean < -1e-8:
        raise NumericalFailure(f"negative mean energy {mean!r} under a shifted hamiltonian")
    variance = second - mean * mean
    return EnergyStats(max(mean, 0.0), math.sqrt(max(variance, 0.0)))


def state_overlap(a: State, b: State) -> float:
    """Trace overlap Tr[rho_a rho_b]; |<a|b>|^2 when both inputs are pure.

    Symmetric, and (up to round-off, which is clipped) in [0, 1].  Zero means
    the two states are orthogonal.
    """
    _require_same_layout(a, b)
    if isinstance(a, PureState) and isinstance(b, PureState):
        value = abs(np.vdot(a.amplitudes, b.amplitudes)) ** 2
    elif isinstance(a, PureState):
        value = float(np.real(np.vdot(a.amplitudes, b.matrix @ a.amplitudes)))
    elif isinstance(b, PureState):
        value = float(np.real(np.vdot(b.amplitudes, a.matrix @ b.amplitudes)))
    else:
        value = float(np.real(np.einsum("ij,ji->", a.matrix, b.matrix)))
    return float(min(max(value, 0.0), 1.0))


def spectral_decompose(rho: DensityMatrix) -> list[tuple[float, np.ndarray]]:
    """Eigenvalue/eigenvector pairs of a density matrix, largest first.

    Eigenvalues below ``EIGENVALUE_DROP`` are dropped: zero-weight eigenvectors
    carry no population and their numerical noise would poison downstream
    minima.  For degenerate eigenvalues the eigensolver's basis is returned
    as-is; any orthonormal choice is equally valid downstream.
    """
    evals, evecs = _eigh(rho.matrix, "density matrix")
    pairs = [
        (float(evals[i]), np.array(evecs[:, i], copy=True))
        for i in range(evals.size - 1, -1, -1)
        if evals[i] >= EIGENVALUE_DROP
    ]
    if not pairs:
        raise NumericalFailure("no eigenvalue of the density matrix survived the cutoff")
    return pairs


# ---------------------------------------------------------------------------
# JSON wire format
# ---------------------------------------------------------------------------
#
# One object per system:
#   dims         array of positive ints
#   amplitudes   array of [re, im] pairs (pure state), length prod(dims), OR
#   matrix       row-major array of [re, im] pairs (density matrix)
#   hamiltonian  row-major array of [re, im] pairs
# Numbers are IEEE-754 doubles serialized as JSON numbers.


def _pairs_to_array(raw, count: int, name: str) -> np.ndarray:
    if not isinstance(raw, list):
        raise SchemaError(f"{name}: expected an array of [re, im] pairs")
    if len(raw) != count:
        raise SchemaError(f"{name}: expected {count} pairs, got {len(raw)}")
    out = np.empty(count, dtype=complex)
    for i, entry in enumerate(raw):
        if (
            not isinstance(entry, (list, tuple))
            or len(entry) != 2
            or not all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in entry)
        ):
            raise SchemaError(f"{name}[{i}]: expected a [re, im] pair of numbers")
        out[i] = complex(entry[0], entry[1])
    return out


def _array_to_pairs(arr: np.ndarray) -> list[list[float]]:
    flat = np.asarray(arr, dtype=complex).reshape(-1)
    return [[float(z.real), float(z.imag)] for z in flat]


def system_to_json(state: State, hamiltonian: Hamiltonian) -> dict:
    """Serialize a state/Hamiltonian pair into the wire-format dict."""
    obj: dict = {"dims": list(state.layout.dims)}
    if isinstance(state, PureState):
        obj["amplitudes"] = _array_to_pairs(state.amplitudes)
    else:
        obj["matrix"] = _array_to_pairs(state.matrix)
    obj["hamiltonian"] = _array_to_pairs(hamiltonian.matrix)
    return obj


def system_from_json(obj, cap: int = DENSE_CAP) -> tuple[State, Hamiltonian]:
    """Parse the wire-format dict; schema problems name the failing field."""
    if not isinstance(obj, dict):
        raise SchemaError("top level: expected a JSON object")
    raw_dims = obj.get("dims")
    if (
        not isinstance(raw_dims, list)
        or not raw_dims
        or not all(isinstance(d, int) and not isinstance(d, bool) and d >= 1 for d in raw_dims)
    ):
        raise SchemaError("dims: expected a nonempty array of positive integers")
    dims = tuple(raw_dims)
    total = math.prod(dims)
    if total > cap:
        raise SchemaError(f"dims: total dimension {total} exceeds the cap {cap}")
    layout = SubsystemLayout(dims, cap=cap)

    has_amp = "amplitudes" in obj
    has_mat = "matrix" in obj
    if has_amp == has_mat:
        raise SchemaError("amplitudes/matrix: exactly one of the two is required")
    if "hamiltonian" not in obj:
        raise SchemaError("hamiltonian: missing")

    if has_amp:
        amp = _pairs_to_array(obj["amplitudes"], total, "amplitudes")
        state: State = PureState(layout, amp)
    else:
        mat = _pairs_to_array(obj["matrix"], total * total, "matrix").reshape(total, total)
        state = DensityMatrix(layout, mat)
    hmat = _pairs_to_array(obj["hamiltonian"], total * total, "hamiltonian")
    hamiltonian = Hamiltonian(layout, hmat.reshape(total, total))
    return state, hamiltonian


def load_system(path, cap: int = DENSE_CAP) -> tuple[State, Hamiltonian]:
    """Read and parse a wire-format JSON file."""
    with open(path, "r", encoding="utf-8") as fh:
        try:
            obj = json.load(fh)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"top level: not valid JSON ({exc})") from exc
    return system_from_json(obj, cap=cap)


def dump_system(state: State, hamiltonian: Hamiltonian, path) -> None:
    """Write a state/Hamiltonian pair as wire-format JSON."""
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(system_to_json(state, hamiltonian), fh)
        fh.write("\n")
