"""The multi-sender guessing game and exact evaluation of its average score.

n senders each receive uniform inputs (x_k, y_k) in {0..d-1}^2, apply a
local CPTP map taking their share of rho into a d-dimensional system, and
forward it to a referee who measures a joint POVM with outcomes
b = (b_0, ..., b_{n-1}).  The round is won when

    b_0 = sum_k x_k  (mod d)   and   b_k = y_k - y_0 (mod d) for k >= 1.

The average score over uniform inputs is the figure of merit; a
biseparable shared state caps it at 1/d, and a measurement with at least
k fully separable outcome operators caps it at (d^n - k + k/d) / d^n,
which is what the certification layer exploits.

Party 0 is the most significant tensor factor throughout.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass, field

import numpy as np

from .errors import DistributionError, StrategyError
from .linalg import ATOL, dag, embed_local

__all__ = [
    "GameParams",
    "ChannelFamily",
    "Strategy",
    "ScoreReport",
    "win_target",
    "win_index",
    "score",
    "score_from_distribution",
    "transformed_states",
    "outcome_weights",
]


@dataclass(frozen=True)
class GameParams:
    """Number of sending parties ``n`` and local dimension ``d``."""

    n: int
    d: int

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 2:
            raise ValueError(f"n must be an integer >= 2, got {self.n}")
        if int(self.d) != self.d or self.d < 2:
            raise ValueError(f"d must be an integer >= 2, got {self.d}")

    @property
    def num_outcomes(self) -> int:
        return self.d ** self.n

    @property
    def num_inputs(self) -> int:
        return self.d ** (2 * self.n)

    def outcome_index(self, b) -> int:
        """Flat index of outcome string b, party 0 most significant."""
        idx = 0
        for digit in b:
            idx = idx * self.d + int(digit)
        return idx

    def outcome_tuple(self, idx: int) -> tuple:
        digits = []
        for _ in range(self.n):
            digits.append(idx % self.d)
            idx //= self.d
        return tuple(reversed(digits))


def win_target(x, y, params: GameParams) -> tuple:
    """Winning outcome string for inputs x, y (all arithmetic mod d)."""
    n, d = params.n, params.d
    x = [int(v) for v in x]
    y = [int(v) for v in y]
    if len(x) != n or len(y) != n:
        raise ValueError(f"inputs must have length n={n}")
    if any(not 0 <= v < d for v in x + y):
        raise ValueError(f"input entries must lie in 0..{d - 1}")
    b = [sum(x) % d]
    for k in range(1, n):
        b.append((y[k] - y[0]) % d)
    return tuple(b)


def win_index(x, y, params: GameParams) -> int:
    return params.outcome_index(win_target(x, y, params))


@functools.lru_cache(maxsize=None)
def _input_table(n: int, d: int):
    """All d^(2n) input tuples: X[t,k], Y[t,k], flat winning index WIN[t].

    Also returns, per party, the tuple-index groups sharing each local
    input pair (x_k, y_k); channel applications and seesaw block updates
    batch over these groups.
    """
    params = GameParams(n, d)
    total = params.num_inputs
    X = np.zeros((total, n), dtype=np.int64)
    Y = np.zeros((total, n), dtype=np.int64)
    rem = np.arange(total)
    # Tuple order: x_0 most significant, ..., then y_0, ..., y_{n-1}.
    for k in range(2 * n):
        digits = (rem // d ** (2 * n - 1 - k)) % d
        if k < n:
            X[:, k] = digits
        else:
            Y[:, k - n] = digits
    win = (X.sum(axis=1) % d) * d ** (n - 1)
    for k in range(1, n):
        win += ((Y[:, k] - Y[:, 0]) % d) * d ** (n - 1 - k)
    groups = []
    for k in range(n):
        by_pair = {}
        for a in range(d):
            for b in range(d):
                by_pair[(a, b)] = np.flatnonzero((X[:, k] == a) & (Y[:, k] == b))
        groups.append(by_pair)
    X.setflags(write=False)
    Y.setflags(write=False)
    win.setflags(write=False)
    return X, Y, win, groups


def input_table(params: GameParams):
    """(X, Y, WIN) arrays over all d^(2n) input tuples."""
    X, Y, win, _ = _input_table(params.n, params.d)
    return X, Y, win


@dataclass(frozen=True)
class ChannelFamily:
    """One party's d^2-indexed family of CPTP maps in Kraus form.

    ``kraus[x][y]`` is a stacked array of shape (r, dim_out, dim_in); the
    output dimension is the game dimension d for every input pair.
    """

    party: int
    dim_in: int
    dim_out: int
    kraus: tuple

    @staticmethod
    def from_kraus(party: int, kraus_table) -> "ChannelFamily":
        table = tuple(
            tuple(np.ascontiguousarray(np.asarray(ks, dtype=complex)) for ks in row)
            for row in kraus_table
        )
        first = table[0][0]
        return ChannelFamily(party=party, dim_in=first.shape[2], dim_out=first.shape[1], kraus=table)

    @staticmethod
    def from_unitaries(party: int, unitaries) -> "ChannelFamily":
        """Single-Kraus unitary family from a d x d table of unitaries."""
        table = [[np.asarray(u, dtype=complex)[None, :, :] for u in row] for row in unitaries]
        return ChannelFamily.from_kraus(party, table)

    def validate(self, d: int, atol: float = ATOL) -> None:
        if len(self.kraus) != d or any(len(row) != d for row in self.kraus):
            raise StrategyError(
                f"channel family for party {self.party} must be indexed by {d}x{d} input pairs"
            )
        for x, row in enumerate(self.kraus):
            for y, ks in enumerate(row):
                if ks.ndim != 3 or ks.shape[1] != self.dim_out or ks.shape[2] != self.dim_in:
                    raise StrategyError(
                        f"party {self.party} channel ({x},{y}): Kraus shape {ks.shape} "
                        f"does not match (r, {self.dim_out}, {self.dim_in})"
                    )
                if self.dim_out != d:
                    raise StrategyError(
                        f"party {self.party} channel output dimension {self.dim_out} != d={d}"
                    )
                tp = np.einsum("aij,aik->jk", ks.conj(), ks)
                dev = np.max(np.abs(tp - np.eye(self.dim_in)))
                if dev > atol:
                    raise StrategyError(
                        f"party {self.party} channel ({x},{y}) is not trace preserving: "
                        f"|sum K^dag K - I| = {dev:.3e}"
                    )


@dataclass(frozen=True)
class Strategy:
    """Shared state, per-party channel families and the referee's POVM."""

    params: GameParams
    state: np.ndarray
    channels: tuple
    povm: tuple

    @staticmethod
    def make(params: GameParams, state, channels, povm) -> "Strategy":
        return Strategy(
            params=params,
            state=np.ascontiguousarray(np.asarray(state, dtype=complex)),
            channels=tuple(channels),
            povm=tuple(np.ascontiguousarray(np.asarray(m, dtype=complex)) for m in povm),
        )

    @property
    def in_dims(self) -> list:
        return [fam.dim_in for fam in self.channels]

    def validate(self, atol: float = ATOL, check_psd: bool = True) -> None:
        n, d = self.params.n, self.params.d
        if len(self.channels) != n:
            raise StrategyError(f"expected {n} channel families, got {len(self.channels)}")
        for k, fam in enumerate(self.channels):
            if fam.party != k:
                raise StrategyError(f"channel family at slot {k} is labeled party {fam.party}")
            fam.validate(d, atol)
        dim_state = int(np.prod(self.in_dims))
        if self.state.shape != (dim_state, dim_state):
            raise StrategyError(
                f"state shape {self.state.shape} incompatible with channel input dims {self.in_dims}"
            )
        herm = np.max(np.abs(self.state - dag(self.state)))
        if herm > atol:
            raise StrategyError(f"state is not Hermitian: max |rho - rho^dag| = {herm:.3e}")
        tr = np.trace(self.state).real
        if abs(tr - 1.0) > atol:
            raise StrategyError(f"state trace {tr!r} differs from 1 by {abs(tr - 1.0):.3e}")
        if check_psd:
            lam = float(np.linalg.eigvalsh((self.state + dag(self.state)) / 2)[0])
            if lam < -atol:
                raise StrategyError(f"state has negative eigenvalue {lam:.3e}")
        if len(self.povm) != self.params.num_outcomes:
            raise StrategyError(
                f"POVM must have {self.params.num_outcomes} elements, got {len(self.povm)}"
            )
        dim_out = d ** n
        total = np.zeros((dim_out, dim_out), dtype=complex)
        for i, m in enumerate(self.povm):
            if m.shape != (dim_out, dim_out):
                raise StrategyError(f"POVM element {i} has shape {m.shape}, expected {dim_out}")
            if check_psd:
                lam = float(np.linalg.eigvalsh((m + dag(m)) / 2)[0])
                if lam < -atol:
                    raise StrategyError(f"POVM element {i} has negative eigenvalue {lam:.3e}")
            total += m
        dev = np.max(np.abs(total - np.eye(dim_out)))
        if dev > atol:
            raise StrategyError(f"POVM completeness violated: |sum M - I| = {dev:.3e}")


@dataclass(frozen=True)
class ScoreReport:
    """Average score plus the per-input winning probabilities."""

    score: float
    per_input: dict = field(repr=False)
    params: GameParams = None


def _apply_family_batch(states, dims, fam: ChannelFamily, groups):
    """Apply one party's channels to the stacked tuple states in place.

    ``states`` has shape (T, D, D); each tuple group shares the same
    local input pair and hence the same map.
    """
    k = fam.party
    d_new_total = int(np.prod(dims[:k])) * fam.dim_out * int(np.prod(dims[k + 1:]))
    out = np.empty((states.shape[0], d_new_total, d_new_total), dtype=complex)
    for (a, b), idx in groups[k].items():
        if idx.size == 0:
            continue
        full = [embed_local(K, dims, k) for K in fam.kraus[a][b]]
        block = states[idx]
        acc = full[0] @ block @ dag(full[0])
        for K in full[1:]:
            acc += K @ block @ dag(K)
        out[idx] = acc
    new_dims = list(dims)
    new_dims[k] = fam.dim_out
    return out, new_dims


def transformed_states(params: GameParams, state, channels, skip_party: int | None = None):
    """Stacked post-channel states sigma_xy for all d^(2n) input tuples.

    With ``skip_party`` set, that party's channel is left unapplied (its
    subsystem keeps its input dimension); used for blockwise updates.
    Returns ``(states, dims)``.
    """
    _, _, _, groups = _input_table(params.n, params.d)
    total = params.num_inputs
    state = np.asarray(state, dtype=complex)
    dims = [fam.dim_in for fam in channels]
    states = np.broadcast_to(state, (total,) + state.shape).copy()
    for fam in channels:
        if fam.party == skip_party:
            continue
        states, dims = _apply_family_batch(states, dims, fam, groups)
    return states, dims


def _per_input_probs(states, povm, win) -> np.ndarray:
    m_win = np.stack([povm[i] for i in win])
    return np.einsum("tij,tji->t", states, m_win).real


def score(strategy: Strategy, validate: bool = True) -> ScoreReport:
    """Exact average score by summation over all d^(2n) input tuples."""
    if validate:
        strategy.validate()
    params = strategy.params
    X, Y, win = input_table(params)
    states, _ = transformed_states(params, strategy.state, strategy.channels)
    probs = _per_input_probs(states, strategy.povm, win)
    low, high = probs.min(), probs.max()
    if low < -ATOL or high > 1 + ATOL:
        raise StrategyError(f"computed winning probability outside [0,1]: [{low}, {high}]")
    per_input = {
        (tuple(X[t]), tuple(Y[t])): float(probs[t]) for t in range(params.num_inputs)
    }
    return ScoreReport(score=float(probs.mean()), per_input=per_input, params=params)


def outcome_weights(params: GameParams, state, channels):
    """Effective operators W_b = (1/d^(2n)) sum_{C(x,y)=b} sigma_xy.

    The score of any POVM {M_b} against the fixed state and channels is
    sum_b Tr[W_b M_b]; these are the weights the measurement step of the
    seesaw maximizes over.
    """
    _, _, win = input_table(params)
    states, _ = transformed_states(params, state, channels)
    dim = params.d ** params.n
    w = np.zeros((params.num_outcomes, dim, dim), dtype=complex)
    np.add.at(w, win, states)
    return w / params.num_inputs


def score_from_distribution(dist, params: GameParams, atol_norm: float = 1e-6) -> ScoreReport:
    """Score externally supplied correlations P(b|x,y).

    ``dist`` maps ``(b, x, y)`` tuples (each a tuple of digits) to
    probabilities.  Every conditional distribution must be normalized to
    within ``atol_norm`` and free of negative entries beyond -1e-9;
    anything else is rejected rather than renormalized.
    """
    n, d = params.n, params.d
    X, Y, win = input_table(params)
    sums = {}
    for (b, x, y), p in dist.items():
        if len(b) != n or len(x) != n or len(y) != n:
            raise DistributionError(f"entry ({b}, {x}, {y}) has wrong tuple lengths")
        if any(not 0 <= int(v) < d for v in tuple(b) + tuple(x) + tuple(y)):
            raise DistributionError(f"entry ({b}, {x}, {y}) has digits outside 0..{d - 1}")
        if p < -1e-9:
            raise DistributionError(f"negative probability {p} at ({b}, {x}, {y})")
        key = (tuple(int(v) for v in x), tuple(int(v) for v in y))
        sums[key] = sums.get(key, 0.0) + float(p)
    per_input = {}
    for t in range(params.num_inputs):
        x, y = tuple(X[t]), tuple(Y[t])
        total = sums.get((x, y), 0.0)
        if abs(total - 1.0) > atol_norm:
            raise DistributionError(
                f"conditional distribution at x={x}, y={y} sums to {total!r}, not 1"
            )
        target = params.outcome_tuple(int(win[t]))
        per_input[(x, y)] = float(dist.get((target, x, y), 0.0))
    mean = sum(per_input.values()) / params.num_inputs
    return ScoreReport(score=float(mean), per_input=per_input, params=params)
