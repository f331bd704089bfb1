"""Certification logic: biseparability and separable-measurement bounds,
their inversion into verdicts, GHZ-fraction estimators, and the PPT
oracle used as ground truth for operator entanglement.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .catalog import ghz_state
from .game import GameParams
from .linalg import dag, haar_isometry, haar_unitary, partial_transpose, polar_project, proj

__all__ = [
    "CertificationReport",
    "biseparable_bound",
    "separable_measurement_bound",
    "certify",
    "ghz_visibility_threshold",
    "ghz_fraction",
    "extractable_ghz_fraction",
    "bipartitions",
    "count_npt_operators",
]


def biseparable_bound(params: GameParams) -> float:
    """Maximum score reachable with a biseparable shared state: 1/d for all n."""
    return 1.0 / params.d


def separable_measurement_bound(params: GameParams, k: int) -> float:
    """Score cap when at least k POVM elements are fully separable.

    (d^n - k + k/d) / d^n; strictly decreasing in k, equal to 1/d at
    k = d^n and to 1 - (d-1)/d^(n+1) at k = 1.
    """
    if not 0 <= k <= params.num_outcomes:
        raise ValueError(f"k must lie in 0..{params.num_outcomes}, got {k}")
    dn = params.num_outcomes
    return (dn - k + k / params.d) / dn


def ghz_visibility_threshold(n: int, d: int) -> float:
    """Visibility above which the noisy GHZ state beats the biseparable cap.

    (d^(n-1) - 1) / (d^n - 1); reduces to 1/(d+1) for n = 2.
    """
    GameParams(n, d)
    return (d ** (n - 1) - 1) / (d ** n - 1)


@dataclass(frozen=True)
class CertificationReport:
    """Verdicts implied by an observed average score.

    ``certified_entangled_ops`` is d^n - k* + 1 for the smallest k* whose
    separable-measurement bound is strictly exceeded (by more than the
    margin), or 0 when no bound is violated.  The margin defaults to 0
    for exact-arithmetic scores; experimental users should set it to a
    statistical error bar.
    """

    score: float
    params: GameParams
    margin: float
    gme_certified: bool
    certified_entangled_ops: int
    thresholds: tuple


def certify(score: float, params: GameParams, margin: float = 0.0) -> CertificationReport:
    if not -1e-9 <= score <= 1 + 1e-9:
        raise ValueError(f"score must lie in [0, 1], got {score}")
    if margin < 0:
        raise ValueError(f"margin must be nonnegative, got {margin}")
    dn = params.num_outcomes
    thresholds = tuple((k, separable_measurement_bound(params, k)) for k in range(1, dn + 1))
    k_star = next((k for k, bound in thresholds if score > bound + margin), None)
    count = 0 if k_star is None else dn - k_star + 1
    gme = score > biseparable_bound(params) + margin
    return CertificationReport(
        score=float(score),
        params=params,
        margin=float(margin),
        gme_certified=gme,
        certified_entangled_ops=count,
        thresholds=thresholds,
    )


# ---------------------------------------------------------------------------
# PPT oracle


def bipartitions(n: int) -> list:
    """Nontrivial bipartitions of n parties, as the side containing party 0.

    Listing only the side with party 0 covers every cut once (a cut and
    its complement give partial transposes with identical spectra).
    """
    cuts = []
    for mask in range(2 ** (n - 1) - 1):  # subsets of {1..n-1}, minus the full one
        side = tuple(k for k in range(1, n) if (mask >> (k - 1)) & 1)
        cuts.append((0,) + side)
    return cuts


def count_npt_operators(povm, dims, atol: float = 1e-9):
    """Count POVM elements that are NPT across at least one bipartition.

    Each element is normalized by its trace and partially transposed
    across every bipartition of the party slots in ``dims``.  NPT implies
    entanglement, so the count is a lower bound on the number of
    entangled elements; for 2x2 and 2x3 bipartite elements PPT is also
    sufficient for separability, making the count exact there.

    Returns ``(count, flags)`` where ``flags[i]`` maps each cut (the
    tuple of party slots on party 0's side) to its NPT boolean, or is
    None for a zero-trace (inconclusive) element.
    """
    dims = [int(d) for d in dims]
    n = len(dims)
    if n < 2:
        raise ValueError("count_npt_operators needs at least two subsystems")
    cuts = bipartitions(n)
    flags = []
    count = 0
    for el in povm:
        el = np.asarray(el, dtype=complex)
        tr = np.trace(el).real
        if tr <= 1e-12:
            flags.append(None)
            continue
        rho = el / tr
        verdicts = {}
        for cut in cuts:
            pt = partial_transpose(rho, dims, sys=list(cut))
            verdicts[cut] = float(np.linalg.eigvalsh((pt + dag(pt)) / 2)[0]) < -atol
        flags.append(verdicts)
        if any(verdicts.values()):
            count += 1
    return count, flags


# ---------------------------------------------------------------------------
# GHZ-fraction estimators (seesaw over local unitaries / channels)


def _apply_local_stack(rho, dims, k, kraus):
    """Conjugate subsystem k of rho by a stacked Kraus family."""
    pre = int(np.prod(dims[:k])) if k > 0 else 1
    post = int(np.prod(dims[k + 1:])) if k < len(dims) - 1 else 1
    r, dout, din = kraus.shape
    t = rho.reshape(pre, din, post, pre, din, post)
    out = np.einsum("aij,pjqrks->apiqrks", kraus, t, optimize=True)
    out = np.einsum("apiqrks,alk->piqrls", out, kraus.conj(), optimize=True)
    new = list(dims)
    new[k] = dout
    return out.reshape(pre * dout * post, pre * dout * post), new


def _block_gradient(kraus, A, dims_a, G, dims_g, k):
    """Wirtinger gradient of Tr[(I (x) Lambda_k (x) I)[A] G] w.r.t. conj(K_a)."""
    pre = int(np.prod(dims_a[:k])) if k > 0 else 1
    post = int(np.prod(dims_a[k + 1:])) if k < len(dims_a) - 1 else 1
    r, dout, din = kraus.shape
    a6 = A.reshape(pre, din, post, pre, din, post)
    g6 = G.reshape(pre, dout, post, pre, dout, post)
    return np.einsum("aij,pjqrks,rlspiq->alk", kraus, a6, g6, optimize=True)


def _block_value(kraus, A, dims_a, G, dims_g, k):
    out, _ = _apply_local_stack(A, dims_a, k, kraus)
    return float(np.einsum("ij,ji->", out, G).real)


def _project_stack(stack_flat, r, dout, din):
    return polar_project(stack_flat).reshape(r, dout, din)


def _ascend_block(kraus, A, dims_a, G, dims_g, k, max_halvings: int = 40):
    """One monotone ascent step of the party-k block.

    The objective is a positive-semidefinite quadratic form in the
    stacked Kraus isometry, so jumping to the orthogonal-Procrustes
    point of the gradient cannot decrease it; halving toward the current
    iterate is kept as a numerical safety net.
    """
    r, dout, din = kraus.shape
    f_old = _block_value(kraus, A, dims_a, G, dims_g, k)
    grad = _block_gradient(kraus, A, dims_a, G, dims_g, k).reshape(r * dout, din)
    norm = np.linalg.norm(grad)
    if norm < 1e-15:
        return kraus, f_old
    cand = _project_stack(grad, r, dout, din)
    f_new = _block_value(cand, A, dims_a, G, dims_g, k)
    if f_new >= f_old - 1e-13:
        return cand, f_new
    old_flat = kraus.reshape(r * dout, din)
    t = 0.5
    for _ in range(max_halvings):
        damp = _project_stack(old_flat + t * (cand.reshape(r * dout, din) - old_flat), r, dout, din)
        f_damp = _block_value(damp, A, dims_a, G, dims_g, k)
        if f_damp >= f_old - 1e-13:
            return damp, f_damp
        t *= 0.5
    return kraus, f_old


def _overlap_value(channels, state, in_dims, G):
    rho, dims = state, list(in_dims)
    for k, ks in enumerate(channels):
        rho, dims = _apply_local_stack(rho, dims, k, ks)
    return float(np.einsum("ij,ji->", rho, G).real)


def _overlap_seesaw(state, in_dims, d, G, inits, tol, max_iter):
    """Alternating block ascent of Tr[(x)_k Lambda_k (state) G].

    Monotone nondecreasing at every step; returns the best result over
    the supplied initial channel lists.
    """
    n = len(in_dims)
    best_val, best_ops, best_conv = -np.inf, None, True
    for channels in inits:
        channels = [np.array(ks, dtype=complex) for ks in channels]
        val = _overlap_value(channels, state, in_dims, G)
        converged = False
        for _ in range(max_iter):
            prev = val
            for k in range(n):
                rho, dims = state, list(in_dims)
                for j in range(n):
                    if j != k:
                        rho, dims = _apply_local_stack(rho, dims, j, channels[j])
                channels[k], block_val = _ascend_block(channels[k], rho, dims, G, [d] * n, k)
                if block_val < val - 1e-12:
                    raise RuntimeError(
                        f"overlap seesaw decreased: {val} -> {block_val}"
                    )
                val = block_val
            if val - prev < tol:
                converged = True
                break
        if val > best_val:
            best_val, best_ops, best_conv = val, channels, converged
    return best_val, best_ops, best_conv


def _state_matrix(state) -> np.ndarray:
    state = np.asarray(state, dtype=complex)
    if state.ndim == 1:
        return proj(state)
    return state


def _gf_opt(state, params: GameParams, restarts: int, tol: float, max_iter: int, seed):
    n, d = params.n, params.d
    rho = _state_matrix(state)
    if rho.shape != (d ** n, d ** n):
        raise ValueError(f"state must act on {d ** n} dimensions for (n,d)=({n},{d})")
    G = proj(ghz_state(n, d))
    seqs = np.random.SeedSequence(seed).spawn(max(restarts, 1))
    eye = np.eye(d, dtype=complex)[None, :, :]
    inits = [[eye.copy() for _ in range(n)]]
    for r in range(1, restarts):
        rng = np.random.default_rng(seqs[r])
        inits.append([haar_unitary(d, rng)[None, :, :] for _ in range(n)])
    return _overlap_seesaw(rho, [d] * n, d, G, inits, tol, max_iter)


def ghz_fraction(state, params: GameParams, restarts: int = 10, tol: float = 1e-11,
                 max_iter: int = 300, seed: int = 0) -> float:
    """Lower bound on the best GHZ overlap reachable with local unitaries.

    Seesaw over the parties' unitaries: each block step maximizes the
    linearization via the orthogonal-Procrustes update, which is exact
    ascent here, so the objective never decreases.  Identity start plus
    Haar-random restarts; the returned value is a certified lower bound
    on the true maximum.
    """
    val, _, converged = _gf_opt(state, params, restarts, tol, max_iter, seed)
    if not converged:
        warnings.warn("ghz_fraction seesaw hit max_iter before converging", RuntimeWarning)
    return val


def _replace_channel(din: int, dout: int) -> np.ndarray:
    """Trace-and-prepare channel sigma -> |0><0|, Kraus |0><a|."""
    ks = np.zeros((din, dout, din), dtype=complex)
    for a in range(din):
        ks[a, 0, a] = 1.0
    return ks


def _egf_opt(state, params: GameParams, kraus_rank, restarts, tol, max_iter, seed):
    n, d = params.n, params.d
    rho = _state_matrix(state)
    if rho.shape != (d ** n, d ** n):
        raise ValueError(f"state must act on {d ** n} dimensions for (n,d)=({n},{d})")
    rank = d if kraus_rank is None else int(kraus_rank)
    if rank < 1:
        raise ValueError(f"kraus_rank must be >= 1, got {rank}")
    G = proj(ghz_state(n, d))

    def pad(stack):
        out = np.zeros((rank, d, d), dtype=complex)
        r = min(rank, stack.shape[0])
        out[:r] = stack[:r]
        return out

    gf_val, gf_ops, _ = _gf_opt(rho, params, restarts=min(restarts, 8), tol=tol,
                                max_iter=max_iter, seed=seed)
    inits = [
        [pad(np.eye(d, dtype=complex)[None]) for _ in range(n)],
        [pad(ops) for ops in gf_ops],
    ]
    if rank >= d:
        inits.append([pad(_replace_channel(d, d)) for _ in range(n)])
    seqs = np.random.SeedSequence(seed).spawn(restarts + 1)
    while len(inits) < restarts:
        rng = np.random.default_rng(seqs[len(inits)])
        inits.append(
            [haar_isometry(rank * d, d, rng).reshape(rank, d, d) for _ in range(n)]
        )
    val, ops, converged = _overlap_seesaw(rho, [d] * n, d, G, inits, tol, max_iter)
    return val, ops, converged, gf_val


def extractable_ghz_fraction(state, params: GameParams, kraus_rank: int | None = None,
                             restarts: int = 20, tol: float = 1e-11,
                             max_iter: int = 300, seed: int = 0) -> float:
    """Heuristic lower bound on the best GHZ overlap under local channels.

    Alternating ascent over rank-limited Kraus families in the stacked
    isometry parameterization (Procrustes projection keeps each family
    trace preserving).  Restarts include the identity, the best local
    unitaries found by ``ghz_fraction``, the trace-and-prepare channel,
    and Haar-random isometries, so the estimate never lands below the
    unitary-only one.
    """
    val, _, converged, _ = _egf_opt(state, params, kraus_rank, restarts, tol, max_iter, seed)
    if not converged:
        warnings.warn(
            "extractable_ghz_fraction ascent hit max_iter before converging", RuntimeWarning
        )
    return val
