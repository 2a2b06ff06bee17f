"""Parallel amplitude estimation over candidate itemsets.

The Grover operator G = (2|X_N><X_N| - I)O^(k) rotates each candidate's
(infrequent, frequent) plane by 2*theta with sin^2(theta) = support, so
its eigenphases are +-theta/pi.  Running phase estimation with a T-point
estimation register against a uniform superposition of candidates
estimates every candidate support at once; measuring y yields the grid
value sin^2(pi*y/T).

For an eigenphase omega the estimation register ends in
|E_T(omega)> with |<y|E_T(omega)>|^2 = sin^2(pi(T*omega - y)) /
(T^2 sin^2(pi(T*omega - y)/T)), a point mass when T*omega is an integer.
Each branch omega in {theta/pi, 1 - theta/pi} carries weight 1/2.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .data import Itemset, TransactionDB
from .oracle import (
    EST,
    IDX,
    TXN,
    QueryCounter,
    build_layout,
    item_registers,
    phase_oracle_sign_table,
)
from .qsim import (
    Statevector,
    apply_controlled_power,
    inject_state,
    inverse_qft,
    prepare_uniform,
)

__all__ = [
    "GroverSpectrum",
    "PhaseDistribution",
    "SupportEstimate",
    "decode_support",
    "grid_steps_between",
    "apply_grover_operator",
    "load_candidates",
    "parallel_amplitude_estimation",
    "analytic_phase_distribution",
]


@dataclass(frozen=True)
class GroverSpectrum:
    """Eigenstructure of G restricted to one candidate's rotation plane."""

    support: float
    theta: float
    degenerate: bool

    @classmethod
    def from_support(cls, support) -> "GroverSpectrum":
        s = float(support)
        if not 0.0 <= s <= 1.0:
            raise ValueError(f"support {s} outside [0, 1]")
        theta = math.asin(math.sqrt(s))
        return cls(support=s, theta=theta, degenerate=s in (0.0, 1.0))

    @property
    def eigenvalues(self) -> tuple[complex, complex]:
        return (np.exp(2j * self.theta), np.exp(-2j * self.theta))


@dataclass(frozen=True)
class SupportEstimate:
    """Decoded measurement: grid point y* of T and its sin^2 value."""

    y: int
    big_t: int
    value: float
    epsilon_scale: float


def decode_support(y: int, big_t: int) -> SupportEstimate:
    """Fold y to y* = min(y, T-y) and decode s_hat = sin^2(pi*y*/T)."""
    if not 0 <= y < big_t:
        raise ValueError(f"y={y} outside [0, {big_t})")
    y_star = min(y, big_t - y)
    value = math.sin(math.pi * y_star / big_t) ** 2
    eps = 2 * math.pi * math.sqrt(value * (1 - value)) / big_t + math.pi ** 2 / big_t ** 2
    return SupportEstimate(y=y_star, big_t=big_t, value=value, epsilon_scale=eps)


def grid_steps_between(support, threshold, big_t: int) -> float:
    """Distance between two support values measured in estimation grid steps.

    The grid is y = T*theta/pi, so the step count is |dtheta| * T / pi.
    """
    a = math.asin(math.sqrt(float(support)))
    b = math.asin(math.sqrt(float(threshold)))
    return abs(a - b) * big_t / math.pi


@dataclass(frozen=True)
class PhaseDistribution:
    """Distribution over estimation-register outcomes y in 0..T-1."""

    big_t: int
    probs: np.ndarray = field(repr=False)

    def __post_init__(self):
        probs = np.asarray(self.probs, dtype=np.float64)
        object.__setattr__(self, "probs", probs)
        if probs.shape != (self.big_t,):
            raise ValueError("probs must have length T")
        if probs.min() < -1e-12:
            raise ValueError(f"negative probability {probs.min()}")
        if abs(probs.sum() - 1.0) > 1e-12:
            raise ValueError(f"probabilities sum to {probs.sum()!r}")

    def prob(self, y: int) -> float:
        return float(self.probs[y])

    def as_dict(self, floor: float = 1e-15) -> dict[int, float]:
        return {int(y): float(p) for y, p in enumerate(self.probs) if p > floor}

    def total_variation(self, other: "PhaseDistribution") -> float:
        if other.big_t != self.big_t:
            raise ValueError("distributions live on different grids")
        return 0.5 * float(np.sum(np.abs(self.probs - other.probs)))


def _branch_probs(t_omega: float, big_t: int) -> np.ndarray:
    """|<y|E_T(omega)>|^2 for all y; exact point mass at integer T*omega."""
    y = np.arange(big_t, dtype=np.float64)
    delta = t_omega - y
    num = np.sin(np.pi * delta) ** 2
    den = (big_t * np.sin(np.pi * delta / big_t)) ** 2
    safe = np.where(delta == 0.0, 1.0, den)
    return np.where(delta == 0.0, 1.0, num / safe)


def analytic_phase_distribution(support, big_t: int) -> PhaseDistribution:
    """Closed-form outcome distribution for a single candidate of the
    given support: the equal mixture of the two eigenphase branches."""
    if big_t < 2 or big_t & (big_t - 1):
        raise ValueError(f"T must be a power of two >= 2, got {big_t}")
    s = float(support)
    if not 0.0 <= s <= 1.0:
        raise ValueError(f"support {s} outside [0, 1]")
    probs = np.zeros(big_t)
    if s == 0.0:
        probs[0] = 1.0
    elif s == 1.0:
        probs[big_t // 2] = 1.0
    else:
        theta = math.asin(math.sqrt(s))
        omega = theta / math.pi
        probs = 0.5 * (_branch_probs(big_t * omega, big_t)
                       + _branch_probs(big_t * (1.0 - omega), big_t))
    return PhaseDistribution(big_t=big_t, probs=probs)


def _grover_kernel(block: np.ndarray, sign_table: np.ndarray, txn_axis: int,
                   n_rows: int, trailing_after_txn: int,
                   k: int, counter: QueryCounter | None):
    """One Grover application on a view whose trailing axes are the
    layout's registers from the transaction register onward."""
    block *= sign_table
    head = (Ellipsis, slice(0, n_rows)) + (slice(None),) * trailing_after_txn
    overlap = block[head].sum(axis=txn_axis, keepdims=True) * (2.0 / n_rows)
    block *= -1.0
    block[head] += overlap
    if counter is not None:
        counter.charge_grover(k)


def apply_grover_operator(state: Statevector, db: TransactionDB,
                          counter: QueryCounter | None = None,
                          sign_table: np.ndarray | None = None) -> Statevector:
    """Apply G = (2|X_N><X_N| - I) O^(k) to the whole state."""
    layout = state.layout
    k = len(item_registers(layout))
    table = sign_table if sign_table is not None else phase_oracle_sign_table(db, layout)
    trailing = len(layout.names) - layout.axis(TXN) - 1
    _grover_kernel(state.view(), table, layout.axis(TXN) - len(layout.names),
                   db.n_transactions, trailing, k, counter)
    state.check_norm()
    return state


def load_candidates(state: Statevector, candidates: list[Itemset], k: int) -> Statevector:
    """Uniform superposition over candidates: item ids directly for k=1,
    (index, pattern) pairs through the index register for k > 1."""
    layout = state.layout
    items = item_registers(layout)
    m_dim = layout.dim(items[0])
    amp = 1.0 / math.sqrt(len(candidates))
    if k == 1:
        vec = np.zeros(m_dim, dtype=np.complex128)
        for cand in candidates:
            vec[cand.items[0]] = amp
        return inject_state(state, items[0], vec)
    idx_dim = layout.dim(IDX)
    vec = np.zeros(idx_dim * m_dim ** k, dtype=np.complex128)
    for j, cand in enumerate(candidates):
        pos = j
        for item in cand.items:
            pos = pos * m_dim + item
        vec[pos] = amp
    return inject_state(state, [IDX] + items, vec)


def parallel_amplitude_estimation(db: TransactionDB, candidates: list[Itemset],
                                  k: int, big_t: int,
                                  counter: QueryCounter | None = None,
                                  qubit_cap: int | None = None) -> Statevector:
    """Run steps 1-3: prepare, estimate in parallel, inverse QFT.

    Returns |Psi3>; exactly T-1 Grover applications (2k(T-1) basic-oracle
    calls) are charged, plus one state preparation.
    """
    if not candidates:
        raise ValueError("need at least one candidate")
    seen = set()
    for cand in candidates:
        if cand.size != k:
            raise ValueError(f"candidate {cand} is not a {k}-itemset")
        if cand.items[-1] >= db.n_items:
            raise ValueError(f"candidate {cand} outside the item range")
        if cand in seen:
            raise ValueError(f"duplicate candidate {cand}")
        seen.add(cand)
    layout = build_layout(db, k, big_t=big_t, n_candidates=len(candidates),
                          qubit_cap=qubit_cap)
    state = Statevector.zero(layout)
    prepare_uniform(state, EST, big_t)
    prepare_uniform(state, TXN, db.n_transactions)
    load_candidates(state, candidates, k)
    if counter is not None:
        counter.state_preparations += 1
    table = phase_oracle_sign_table(db, layout)
    trailing = len(layout.names) - layout.axis(TXN) - 1
    txn_axis = layout.axis(TXN) - len(layout.names)

    def step(block: np.ndarray):
        _grover_kernel(block, table, txn_axis, db.n_transactions, trailing,
                       k, counter)

    for p in range(layout.width(EST)):
        apply_controlled_power(state, (EST, p), step, 1 << p)
    inverse_qft(state, EST)
    return state
