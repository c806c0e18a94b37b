"""Speed-limit bounds on the first orthogonalization time.

The quantum speed limit time is T(E, dE) = max(pi/(2E), pi/(2 dE)): the
Margolus-Levitin bound pi/(2E) limits evolution speed by the mean energy
above the ground state, the time-energy uncertainty bound pi/(2 dE) by the
energy spread.  This module evaluates that bound, its refinements for
product states and classical mixtures, and the structural analysis of
separable ensembles that reach it.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .qcore import (
    DensityMatrix,
    EnergyStats,
    Hamiltonian,
    InvariantViolation,
    NumericalFailure,
    PureState,
    SeparableEnsemble,
    energy_stats,
    spectral_decompose,
)

ZERO_TOL = 1e-12
DEGENERACY_TOL = 1e-10
CHI_NEGATIVITY_SLACK = 1e-10


class Branch(enum.Enum):
    """Which argument of the two-sided bound governed the result."""

    MARGOLUS_LEVITIN = "MargolusLevitin"
    TIME_ENERGY = "TimeEnergyUncertainty"
    EQUAL = "Equal"


@dataclass(frozen=True)
class BoundResult:
    """A lower bound on the orthogonalization time.

    ``time`` is ``math.inf`` when the governing energy or spread vanishes
    (a stationary state never reaches an orthogonal one).  ``degenerate``
    flags a degenerate density-matrix spectrum in ``mixed_state_bound``,
    where the value depends on the eigenbasis the solver happened to return.
    """

    time: float
    branch: Branch
    degenerate: bool = False

    @property
    def unbounded(self) -> bool:
        return math.isinf(self.time)


def _max_bound(energy: float, spread: float, degenerate: bool = False) -> BoundResult:
    e_zero = energy <= ZERO_TOL
    s_zero = spread <= ZERO_TOL
    if e_zero or s_zero:
        if e_zero and s_zero:
            branch = Branch.EQUAL
        elif e_zero:
            branch = Branch.MARGOLUS_LEVITIN
        else:
            branch = Branch.TIME_ENERGY
        return BoundResult(math.inf, branch, degenerate)
    t_ml = math.pi / (2.0 * energy)
    t_unc = math.pi / (2.0 * spread)
    if abs(t_ml - t_unc) <= 1e-12 * max(t_ml, t_unc):
        return BoundResult(max(t_ml, t_unc), Branch.EQUAL, degenerate)
    if t_ml > t_unc:
        return BoundResult(t_ml, Branch.MARGOLUS_LEVITIN, degenerate)
    return BoundResult(t_unc, Branch.TIME_ENERGY, degenerate)


def qsl_time(stats: EnergyStats) -> BoundResult:
    """Quantum speed limit time max(pi/(2E), pi/(2 dE)) for the given stats."""
    return _max_bound(stats.energy, stats.spread)


def separable_pure_bound(per_subsystem: Sequence[EnergyStats]) -> float:
    """Orthogonalization-time bound for a product pure state.

    A product state becomes orthogonal only when at least one factor does, so
    the bound is max(pi/(2 E_max), pi/(2 dE_max)) over the per-subsystem
    maxima.  Always at least the speed limit time of the aggregated stats,
    with equality only when one subsystem carries all the energy or all the
    spread.
    """
    if len(per_subsystem) == 0:
        raise InvariantViolation("separable_pure_bound needs at least one subsystem")
    e_max = max(s.energy for s in per_subsystem)
    s_max = max(s.spread for s in per_subsystem)
    return _max_bound(e_max, s_max).time


def homogeneous_gap_factor(subsystems: int, aggregate: EnergyStats) -> float:
    """Lower-bound multiplier on the speed limit time for homogeneous products.

    For a product pure state of M subsystems sharing the total energy and
    spread evenly (E_k = E/M, dE_k = dE/sqrt(M)), the per-subsystem-maxima
    bound exceeds the aggregate speed limit time by this factor:

    * dE >= E: exactly M;
    * E >= dE: sqrt(M) for M <= M*, and M/sqrt(M*) for M >= M*, where
      M* = (E/dE)^2.

    This is the ratio of ``separable_pure_bound`` for the homogeneous split to
    ``qsl_time`` of the aggregate, so it is a valid lower-bound multiplier
    (not a supremum), and it is never below sqrt(M).
    """
    if subsystems < 1:
        raise InvariantViolation(f"subsystem count must be >= 1, got {subsystems}")
    e, s = aggregate.energy, aggregate.spread
    if e <= ZERO_TOL or s <= ZERO_TOL:
        raise InvariantViolation("homogeneous gap factor needs E > 0 and dE > 0")
    m = float(subsystems)
    if s >= e:
        return m
    m_star = (e / s) ** 2
    if m <= m_star:
        return math.sqrt(m)
    return m / math.sqrt(m_star)


def _check_locals(ensemble: SeparableEnsemble,
                  local_hamiltonians: Sequence[Hamiltonian]) -> None:
    layout = ensemble.layout
    if len(local_hamiltonians) != layout.num_subsystems:
        raise InvariantViolation(
            f"expected {layout.num_subsystems} local hamiltonians "
            f"(one per subsystem, no interaction term), got {len(local_hamiltonians)}"
        )
    for k, local in enumerate(local_hamiltonians):
        if local.layout.total_dim != layout.dims[k]:
            raise InvariantViolation(
                f"local hamiltonian {k} has dimension {local.layout.total_dim}, "
                f"expected {layout.dims[k]}"
            )
        if not local.is_ground_shifted:
            raise InvariantViolation(f"local hamiltonian {k} is not ground-shifted")


def mixture_stats(ensemble: SeparableEnsemble,
                  local_hamiltonians: Sequence[Hamiltonian]) -> EnergyStats:
    """Energy statistics of a separable ensemble under non-interacting locals.

    E is the weighted mean of the per-term total energies; the variance is the
    weighted mean of the per-term quantum variances plus the classical
    variance of the per-term totals around E.  Agrees with ``energy_stats`` on
    the assembled global density matrix.
    """
    _check_locals(ensemble, local_hamiltonians)
    per_term_energy = []
    per_term_var = []
    for term in ensemble.terms:
        stats = [energy_stats(factor, local)
                 for factor, local in zip(term, local_hamiltonians)]
        per_term_energy.append(math.fsum(s.energy for s in stats))
        per_term_var.append(math.fsum(s.spread ** 2 for s in stats))
    mean = math.fsum(p * e for p, e in zip(ensemble.weights, per_term_energy))
    variance = math.fsum(
        p * (v + (e - mean) ** 2)
        for p, v, e in zip(ensemble.weights, per_term_var, per_term_energy)
    )
    return EnergyStats(mean, math.sqrt(max(variance, 0.0)))


def mixed_state_bound(rho: DensityMatrix, hamiltonian: Hamiltonian) -> BoundResult:
    """Speed-limit bound for a mixed state via its spectral decomposition.

    Every retained eigenvector of rho must itself reach an orthogonal state at
    the orthogonalization time, so the bound is max(pi/(2 E_min), pi/(2 dE_min))
    over the per-eigenvector statistics.  Unbounded when any retained
    eigenvector is stationary (E or dE zero): the overlap then never vanishes.
    Always at least ``qsl_time`` of the state's own statistics.
    """
    if not hamiltonian.is_ground_shifted:
        raise InvariantViolation("mixed_state_bound requires a ground-shifted hamiltonian")
    if rho.layout.dims != hamiltonian.layout.dims:
        raise InvariantViolation(
            f"layout mismatch: {rho.layout.dims} vs {hamiltonian.layout.dims}"
        )
    pairs = spectral_decompose(rho)
    degenerate = any(
        abs(pairs[i][0] - pairs[i + 1][0]) <= DEGENERACY_TOL
        for i in range(len(pairs) - 1)
    )
    stats = [
        energy_stats(PureState(rho.layout, vec), hamiltonian)
        for _, vec in pairs
    ]
    e_min = min(s.energy for s in stats)
    s_min = min(s.spread for s in stats)
    return _max_bound(e_min, s_min, degenerate)


# ---------------------------------------------------------------------------
# structure of bound-reaching separable ensembles
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TermReport:
    """Per-realization record: which factor orthogonalizes, which stand still."""

    evolving: Optional[int]
    stationary: tuple[int, ...]
    bound_time: Optional[float]


@dataclass(frozen=True)
class EnsembleAnalysis:
    """Outcome of checking the saturating-structure property of an ensemble.

    ``saturating`` is True only when the ensemble is orthogonal to its evolved
    self at the speed limit time and every realization has exactly one factor
    reaching orthogonality, at its own speed limit (equal to the global one),
    with every other factor an eigenstate of its local Hamiltonian.
    """

    bound: BoundResult
    survival_at_bound: float
    terms: tuple[TermReport, ...]
    saturating: bool
    reason: Optional[str]

    @property
    def verdict(self) -> str:
        if self.saturating:
            return "SaturatingStructure"
        return f"Violation({self.reason})"


def analyze_ensemble_at_qsl(ensemble: SeparableEnsemble,
                            local_hamiltonians: Sequence[Hamiltonian],
                            tol: float = 1e-9) -> EnsembleAnalysis:
    """Check whether a separable ensemble reaches the speed limit, and how.

    Evaluates every cross-term overlap chi_k^{(n,m)}(t) = Tr[rho_k^(n)(t)
    rho_k^(m)] at the bound time t = T(E, dE) of the mixture statistics.  The
    global survival is the weighted sum of the per-term overlap products; all
    chi are nonnegative reals, so the survival vanishes only if every summand
    does.  A single tolerance governs the orthogonality, stationarity
    (commutator with the local Hamiltonian), and bound-equality checks.
    """
    if tol <= 0.0:
        raise InvariantViolation(f"tolerance must be positive, got {tol}")
    _check_locals(ensemble, local_hamiltonians)
    from .dynamics import evolve  # deferred: dynamics imports this module

    stats = mixture_stats(ensemble, local_hamiltonians)
    bound = qsl_time(stats)
    if bound.unbounded:
        return EnsembleAnalysis(
            bound, 1.0, (), False, "quantum speed limit time is unbounded"
        )
    t = bound.time

    weights = ensemble.weights
    terms = ensemble.terms
    n_terms = len(terms)
    n_sites = len(terms[0])
    evolved = [
        [evolve(factor, local, t) for factor, local in zip(term, local_hamiltonians)]
        for term in terms
    ]

    # chi[n][m][k] = Tr[rho_k^(n)(t) rho_k^(m)], computed raw so that the
    # nonnegativity of every term is actually observable.
    chi = np.empty((n_terms, n_terms, n_sites))
    for n in range(n_terms):
        for m in range(n_terms):
            for k in range(n_sites):
                value = float(np.real(np.einsum(
                    "ij,ji->", evolved[n][k].matrix, terms[m][k].matrix
                )))
                if value < -CHI_NEGATIVITY_SLACK:
                    raise NumericalFailure(
                        f"overlap chi[{n},{m},{k}] = {value!r} is negative "
                        "beyond numerical slack"
                    )
                chi[n, m, k] = value

    products = chi.prod(axis=2)
    survival = float(np.einsum("n,m,nm->", weights, weights, products))

    reports = []
    for n, term in enumerate(terms):
        orthogonal = [k for k in range(n_sites) if chi[n, n, k] <= tol]
        stationary = tuple(
            k for k in range(n_sites)
            if float(np.abs(
                term[k].matrix @ local_hamiltonians[k].matrix
                - local_hamiltonians[k].matrix @ term[k].matrix
            ).max()) <= tol
        )
        evolving = orthogonal[0] if len(orthogonal) == 1 else None
        bound_time = None
        if evolving is not None:
            own = qsl_time(energy_stats(term[evolving], local_hamiltonians[evolving]))
            bound_time = own.time
        reports.append((TermReport(evolving, stationary, bound_time), orthogonal))

    reason = None
    if survival > tol:
        reason = "not saturating"
    else:
        for n, (report, orthogonal) in enumerate(reports):
            if len(orthogonal) == 0:
                reason = f"term {n}: no subsystem reaches orthogonality at the bound"
                break
            if len(orthogonal) > 1:
                reason = f"term {n}: {len(orthogonal)} subsystems reach orthogonality"
                break
            others = [k for k in range(n_sites) if k != report.evolving]
            bad = [k for k in others if k not in report.stationary]
            if bad:
                reason = (
                    f"term {n}: subsystem {bad[0]} neither reaches orthogonality "
                    "nor is stationary"
                )
                break
            assert report.bound_time is not None
            if abs(report.bound_time - t) > tol * max(1.0, t):
                reason = (
                    f"term {n}: evolving subsystem bound {report.bound_time!r} "
                    f"differs from the global bound {t!r}"
                )
                break

    return EnsembleAnalysis(
        bound,
        survival,
        tuple(report for report, _ in reports),
        reason is None,
        reason,
    )
