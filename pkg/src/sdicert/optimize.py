"""Strategy optimization: alternating (seesaw) ascent over channels and
the referee's POVM, plus the brute-force classical oracle for the
message-compression subtask.

The measurement step solves a weighted discrimination problem with the
classic fixed-point iteration; the channel steps linearize each party's
block and project with the orthogonal-Procrustes update.  Every block
objective is a positive-semidefinite quadratic form in the block
variable, so both kinds of step are monotone; explicit safeguards keep
the full objective trace nondecreasing even under round-off.
"""

from __future__ import annotations

import itertools
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from . import catalog
from .certify import _egf_opt
from .errors import SizeLimitError
from .game import (
    ChannelFamily,
    GameParams,
    Strategy,
    _input_table,
    outcome_weights,
    transformed_states,
)
from .linalg import dag, haar_isometry, haar_unitary, polar_project, proj, random_ket

__all__ = [
    "SeesawConfig",
    "SeesawResult",
    "maximize_weighted_povm",
    "optimal_povm_step",
    "random_strategy",
    "seesaw",
    "compression_oracle",
    "compression_quantum_sample",
    "ConjectureProbe",
    "conjecture_probe",
]

MODES = ("unitary", "channel")


@dataclass(frozen=True)
class SeesawConfig:
    """Optimizer settings.

    The defaults (50 restarts, tol 1e-8) are engineering choices: the
    underlying search problem has no published algorithm or convergence
    budget, so these are sized to reproduce the known optima at desk
    scale.  ``kraus_rank=None`` means rank d in channel mode.
    """

    restarts: int = 50
    max_iter: int = 150
    tol: float = 1e-8
    kraus_rank: int | None = None
    seed: int = 0
    mode: str = "unitary"
    povm_max_iter: int = 200
    povm_tol: float = 1e-12

    def __post_init__(self):
        if self.restarts < 1 or self.max_iter < 1:
            raise ValueError("restarts and max_iter must be positive")
        if self.tol <= 0:
            raise ValueError("tol must be positive")
        if self.kraus_rank is not None and self.kraus_rank < 1:
            raise ValueError("kraus_rank must be >= 1")
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")


@dataclass(frozen=True)
class SeesawResult:
    best_score: float
    best_strategy: Strategy
    trace: tuple = field(repr=False)
    converged: bool = True
    restart_scores: tuple = field(default=(), repr=False)


def _num_threads() -> int:
    try:
        return max(1, int(os.environ.get("SDI_CERT_THREADS", "1")))
    except ValueError:
        return 1


# ---------------------------------------------------------------------------
# Measurement step: maximize sum_b Tr[W_b M_b] over POVMs


def maximize_weighted_povm(weights, init=None, max_iter: int = 200, tol: float = 1e-12):
    """Fixed-point iteration for the weighted-discrimination POVM.

    Iterates M_b <- R^+ W_b M_b W_b R^+ with R = (sum_b W_b M_b W_b)^(1/2)
    pseudo-inverted on its support; the completeness defect outside the
    support (where no weight lives) is spread uniformly.  A step that
    would lower the objective is rejected, so the returned POVM never
    scores below the incoming one.

    Returns ``(povm, value, converged)``.
    """
    w_st = np.stack([np.asarray(w, dtype=complex) for w in weights])
    m, dim = w_st.shape[0], w_st.shape[1]
    if init is None:
        m_st = np.broadcast_to(np.eye(dim, dtype=complex) / m, w_st.shape).copy()
    else:
        m_st = np.stack([np.asarray(e, dtype=complex) for e in init])

    def objective(cand):
        return float(np.einsum("bij,bji->", w_st, cand).real)

    obj = objective(m_st)
    converged = False
    eye = np.eye(dim, dtype=complex)
    uniform_tried = False
    for _ in range(max_iter):
        wmw = np.einsum("bij,bjk,bkl->bil", w_st, m_st, w_st, optimize=True)
        r2 = wmw.sum(axis=0)
        r2 = (r2 + dag(r2)) / 2
        evals, evecs = np.linalg.eigh(r2)
        support = evals > max(evals[-1], 0.0) * 1e-14
        if not np.any(support):
            # Degenerate warm start (every W_b annihilates its element);
            # the uniform POVM always scores sum_b Tr[W_b]/dim > 0.
            if uniform_tried:
                converged = True
                break
            uniform_tried = True
            cand = np.broadcast_to(eye / m, w_st.shape).copy()
            if objective(cand) >= obj - 1e-12:
                m_st = cand
                obj = objective(cand)
            continue
        vs = evecs[:, support]
        inv_sqrt = (vs / np.sqrt(evals[support])) @ dag(vs)
        cand = inv_sqrt @ wmw @ inv_sqrt
        defect = eye - cand.sum(axis=0)
        cand += (defect + dag(defect)) / (2 * m)
        cand = (cand + np.conj(np.transpose(cand, (0, 2, 1)))) / 2
        new_obj = objective(cand)
        if new_obj < obj - 1e-12:
            break
        m_st = cand
        if new_obj - obj < tol * max(1.0, abs(new_obj)):
            obj = new_obj
            converged = True
            break
        obj = new_obj
    return list(m_st), obj, converged


def optimal_povm_step(state, channels, params: GameParams, init=None,
                      max_iter: int = 200, tol: float = 1e-12):
    """Best-response POVM for fixed state and channels.

    Builds the effective outcome weights W_b and maximizes
    sum_b Tr[W_b M_b]; the result is a complete POVM whose score against
    the fixed state/channels is at least that of ``init``.
    """
    weights = outcome_weights(params, state, channels)
    povm, _, _ = maximize_weighted_povm(weights, init=init, max_iter=max_iter, tol=tol)
    return povm


# ---------------------------------------------------------------------------
# Channel blocks


def _score_given(params, state, channels, povm_stack, win):
    states, _ = transformed_states(params, state, channels)
    return float(np.einsum("tij,tji->t", states, povm_stack[win]).real.mean())


def _group_value(kraus, a_grp, m_grp, pre, post):
    r, dout, din = kraus.shape
    a7 = a_grp.reshape(-1, pre, din, post, pre, din, post)
    m7 = m_grp.reshape(-1, pre, dout, post, pre, dout, post)
    return float(
        np.einsum("aij,tpjqrks,alk,trlspiq->", kraus, a7, kraus.conj(), m7, optimize=True).real
    )


def _group_gradient(kraus, a_grp, m_grp, pre, post):
    r, dout, din = kraus.shape
    a7 = a_grp.reshape(-1, pre, din, post, pre, din, post)
    m7 = m_grp.reshape(-1, pre, dout, post, pre, dout, post)
    return np.einsum("aij,tpjqrks,trlspiq->alk", kraus, a7, m7, optimize=True)


def _ascend_group(kraus, a_grp, m_grp, pre, post, max_halvings: int = 40):
    """Monotone Procrustes ascent of one (party, input-pair) block."""
    r, dout, din = kraus.shape
    f_old = _group_value(kraus, a_grp, m_grp, pre, post)
    grad = _group_gradient(kraus, a_grp, m_grp, pre, post).reshape(r * dout, din)
    if np.linalg.norm(grad) < 1e-15:
        return kraus, f_old
    cand = polar_project(grad).reshape(r, dout, din)
    f_new = _group_value(cand, a_grp, m_grp, pre, post)
    if f_new >= f_old - 1e-13:
        return cand, f_new
    old_flat = kraus.reshape(r * dout, din)
    t = 0.5
    for _ in range(max_halvings):
        damp = polar_project(old_flat + t * (cand.reshape(r * dout, din) - old_flat))
        damp = damp.reshape(r, dout, din)
        f_damp = _group_value(damp, a_grp, m_grp, pre, post)
        if f_damp >= f_old - 1e-13:
            return damp, f_damp
        t *= 0.5
    return kraus, f_old


# ---------------------------------------------------------------------------
# Random strategies and the seesaw itself


def random_strategy(params: GameParams, state, rng: np.random.Generator,
                    mode: str = "unitary", kraus_rank: int | None = None,
                    in_dims=None) -> Strategy:
    """Haar-random channels and a random orthonormal-basis POVM."""
    n, d = params.n, params.d
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}")
    in_dims = [d] * n if in_dims is None else [int(x) for x in in_dims]
    rank = d if kraus_rank is None else int(kraus_rank)
    channels = []
    for k in range(n):
        din = in_dims[k]
        table = []
        for _x in range(d):
            row = []
            for _y in range(d):
                if mode == "unitary":
                    if din != d:
                        raise ValueError("unitary mode requires input dimension d")
                    row.append(haar_unitary(d, rng)[None, :, :])
                else:
                    row.append(haar_isometry(rank * d, din, rng).reshape(rank, d, din))
            table.append(row)
        channels.append(ChannelFamily.from_kraus(k, table))
    basis_u = haar_unitary(d ** n, rng)
    povm = [proj(basis_u[:, b]) for b in range(d ** n)]
    return Strategy.make(params, state, channels, povm)


def _mutable_channels(strategy: Strategy, mode: str, rank: int):
    """Channel tables as mutable stacked-Kraus lists, padded to ``rank``."""
    out = []
    for fam in strategy.channels:
        table = []
        for row in fam.kraus:
            new_row = []
            for ks in row:
                r = ks.shape[0]
                if mode == "unitary":
                    if r != 1 or ks.shape[1] != ks.shape[2]:
                        raise ValueError(
                            "unitary-mode seesaw needs single-Kraus square channels; "
                            "use mode='channel' for general strategies"
                        )
                    new_row.append(ks.astype(complex))
                else:
                    if r > rank:
                        raise ValueError(
                            f"initial channel rank {r} exceeds kraus_rank {rank}"
                        )
                    padded = np.zeros((rank, ks.shape[1], ks.shape[2]), dtype=complex)
                    padded[:r] = ks
                    new_row.append(padded)
            table.append(new_row)
        out.append(table)
    return out


def _families_from_tables(tables):
    return [ChannelFamily.from_kraus(k, tbl) for k, tbl in enumerate(tables)]


def _run_restart(params: GameParams, state, tables, povm, config: SeesawConfig):
    n, d = params.n, params.d
    _, _, win, groups = _input_table(n, d)
    trace = []
    prev = -np.inf
    converged = False
    povm = [np.asarray(m, dtype=complex) for m in povm]
    for _ in range(config.max_iter):
        channels = _families_from_tables(tables)
        weights = outcome_weights(params, state, channels)
        povm, _, _ = maximize_weighted_povm(
            weights, init=povm, max_iter=config.povm_max_iter, tol=config.povm_tol
        )
        povm_stack = np.stack(povm)
        m_win = povm_stack[win] / params.num_inputs
        for k in range(n):
            channels = _families_from_tables(tables)
            skipped, dims_a = transformed_states(params, state, channels, skip_party=k)
            pre = int(np.prod(dims_a[:k])) if k > 0 else 1
            post = int(np.prod(dims_a[k + 1:])) if k < n - 1 else 1
            for a in range(d):
                for b in range(d):
                    idx = groups[k][(a, b)]
                    tables[k][a][b], _ = _ascend_group(
                        tables[k][a][b], skipped[idx], m_win[idx], pre, post
                    )
        val = _score_given(params, state, _families_from_tables(tables), povm_stack, win)
        if val < prev - 1e-12:
            raise RuntimeError(f"seesaw objective decreased: {prev} -> {val}")
        trace.append(val)
        if val - prev < config.tol:
            converged = True
            break
        prev = val
    return trace[-1], tables, povm, trace, converged


def seesaw(initial: Strategy, config: SeesawConfig = SeesawConfig()) -> SeesawResult:
    """Multi-restart alternating optimization of the game score.

    Restart 0 starts from ``initial``'s channels and POVM; the remaining
    restarts draw Haar-random channels and random orthonormal-basis
    POVMs (all against the same shared state).  Ties between restarts
    break toward the lowest restart index, and per-restart RNG streams
    are spawned from the seed, so results are reproducible bit-for-bit
    regardless of the SDI_CERT_THREADS fan-out.
    """
    initial.validate()
    params = initial.params
    rank = params.d if config.kraus_rank is None else config.kraus_rank
    state = initial.state
    in_dims = list(initial.in_dims)
    seqs = np.random.SeedSequence(config.seed).spawn(config.restarts)

    def run(r: int):
        if r == 0:
            start = initial
        else:
            rng = np.random.default_rng(seqs[r])
            start = random_strategy(params, state, rng, mode=config.mode,
                                    kraus_rank=rank, in_dims=in_dims)
        tables = _mutable_channels(start, config.mode, rank)
        return _run_restart(params, state, tables, list(start.povm), config)

    workers = min(_num_threads(), config.restarts)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run, range(config.restarts)))
    else:
        results = [run(r) for r in range(config.restarts)]

    best = max(range(config.restarts), key=lambda r: (results[r][0], -r))
    best_val, tables, povm, trace, converged = results[best]
    strategy = Strategy.make(params, state, _families_from_tables(tables), povm)
    return SeesawResult(
        best_score=float(best_val),
        best_strategy=strategy,
        trace=tuple(trace),
        converged=converged,
        restart_scores=tuple(float(r[0]) for r in results),
    )


# ---------------------------------------------------------------------------
# Classical compression oracle


def compression_oracle(N: int, d: int, guard: int = 10_000_000) -> float:
    """Best average success of deterministic classical coding of N inputs
    through a d-valued message.

    Enumerates every encoding m: {0..N-1} -> {0..d-1}; the optimal
    decoder recovers exactly one input per message value in use, so each
    encoding scores (#used values)/N.  The optimum is min(1, d/N), and
    no quantum strategy can beat it.
    """
    if N < 1 or d < 1:
        raise ValueError("N and d must be positive")
    if d ** N > guard:
        raise SizeLimitError(f"encoding search space d^N = {d ** N} exceeds guard {guard}")
    best = 0
    for enc in itertools.product(range(d), repeat=N):
        used = len(set(enc))
        if used > best:
            best = used
    return best / N


def compression_quantum_sample(N: int, d: int, samples: int, seed: int = 0) -> float:
    """Largest average success over random quantum coding strategies.

    Each sample draws N random pure encodings in dimension d and a
    random N-outcome POVM; used to confirm empirically that quantum
    strategies stay below d/N.
    """
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    best = 0.0
    for _ in range(samples):
        kets = np.stack([random_ket(d, rng) for _ in range(N)])
        g = rng.standard_normal((N, d, d)) + 1j * rng.standard_normal((N, d, d))
        g = g @ np.conj(np.transpose(g, (0, 2, 1)))
        total = g.sum(axis=0)
        evals, evecs = np.linalg.eigh((total + dag(total)) / 2)
        inv_sqrt = (evecs / np.sqrt(np.maximum(evals, 1e-300))) @ dag(evecs)
        povm = inv_sqrt @ g @ inv_sqrt
        p = float(np.einsum("xi,xij,xj->", kets.conj(), povm, kets).real) / N
        if p > best:
            best = p
    return best


# ---------------------------------------------------------------------------
# Conjecture explorer

PROBE_CASES = ((2, 2), (2, 3), (3, 2))


@dataclass(frozen=True)
class ConjectureProbe:
    """Numerical comparison of the free-strategy optimum against the
    channel-extractable GHZ overlap.  Both entries are heuristic
    estimates; a small gap is consistency evidence, not a proof.
    """

    seesaw_best: float
    egf_estimate: float
    gap: float


def conjecture_probe(state, params: GameParams, config: SeesawConfig | None = None) -> ConjectureProbe:
    if (params.n, params.d) not in PROBE_CASES:
        raise ValueError(f"conjecture_probe supports (n,d) in {PROBE_CASES}")
    n, d = params.n, params.d
    if config is None:
        config = SeesawConfig(restarts=8, max_iter=100, tol=1e-10, mode="channel", seed=0)
    else:
        config = replace(config, mode="channel")
    rank = d if config.kraus_rank is None else config.kraus_rank

    state = np.asarray(state, dtype=complex)
    if state.ndim == 1:
        state = proj(state)
    egf_val, egf_ops, _, _ = _egf_opt(
        state, params, kraus_rank=rank, restarts=max(config.restarts, 8),
        tol=1e-12, max_iter=300, seed=config.seed,
    )

    # Warm start: compose the clock/shift rotations with the extraction
    # channels and measure in the GHZ basis; this strategy's score equals
    # the overlap the extraction channels achieve.
    zx = catalog.clock_shift_channels(n, d)
    tables = []
    for k in range(n):
        table = []
        for x in range(d):
            row = []
            for y in range(d):
                u = zx[k].kraus[x][y][0]
                row.append(np.stack([u @ K for K in egf_ops[k]]))
            table.append(row)
        tables.append(table)
    warm = Strategy.make(
        params, state, _families_from_tables(tables), catalog.ghz_basis_measurement(n, d)
    )
    result = seesaw(warm, config)
    return ConjectureProbe(
        seesaw_best=result.best_score,
        egf_estimate=float(egf_val),
        gap=result.best_score - float(egf_val),
    )
