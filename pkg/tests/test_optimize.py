import numpy as np
import pytest

from sdicert.catalog import (
    clock_shift_channels,
    ghz_basis_measurement,
    ghz_game_strategy,
    ghz_state,
    noisy_ghz,
)
from sdicert.errors import SizeLimitError
from sdicert.game import GameParams, Strategy, score
from sdicert.linalg import eig_hermitian, is_povm, proj, random_ket, tensor
from sdicert.optimize import (
    SeesawConfig,
    compression_oracle,
    compression_quantum_sample,
    conjecture_probe,
    maximize_weighted_povm,
    optimal_povm_step,
    random_strategy,
    seesaw,
)


def helstrom_two_outcome(w0, w1):
    """Independent two-outcome optimum: Tr W1 + sum of positive
    eigenvalues of W0 - W1 (projector onto the positive eigenspace)."""
    evals, _ = eig_hermitian(w0 - w1)
    return float(np.trace(w1).real + evals[evals > 0].sum())


def test_povm_step_matches_helstrom_oracle():
    w0 = 0.3 * proj(np.array([1, 0], dtype=complex))
    w1 = 0.2 * proj(np.array([1, 1], dtype=complex) / np.sqrt(2))
    povm, value, converged = maximize_weighted_povm([w0, w1])
    assert converged
    assert abs(value - helstrom_two_outcome(w0, w1)) <= 1e-9
    assert is_povm(povm, atol=1e-8)


def test_povm_step_never_decreases_from_warm_start():
    rng = np.random.default_rng(73)
    for _ in range(5):
        weights = []
        for _ in range(4):
            g = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
            weights.append(g @ g.conj().T / 20)
        u = np.linalg.qr(rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4)))[0]
        init = [proj(u[:, b]) for b in range(4)]
        start = sum(float(np.trace(w @ m).real) for w, m in zip(weights, init))
        _, value, _ = maximize_weighted_povm(weights, init=init)
        assert value >= start - 1e-12


def test_povm_step_recovers_ideal_ghz_measurement():
    for (n, d) in ((2, 2), (3, 2), (2, 3)):
        params = GameParams(n, d)
        povm = optimal_povm_step(proj(ghz_state(n, d)), clock_shift_channels(n, d), params)
        s = Strategy.make(params, proj(ghz_state(n, d)), clock_shift_channels(n, d), povm)
        assert score(s).score >= 1 - 1e-6


def test_povm_step_on_maximally_mixed_state():
    params = GameParams(2, 2)
    povm = optimal_povm_step(np.eye(4) / 4, clock_shift_channels(2, 2), params)
    assert is_povm(povm, atol=1e-8)
    s = Strategy.make(params, np.eye(4) / 4, clock_shift_channels(2, 2), povm)
    assert abs(score(s).score - 1 / 4) <= 1e-9


def test_povm_step_escapes_zero_score_warm_start():
    """A warm POVM annihilated by every weight must not trap the step."""
    params = GameParams(2, 2)
    state = proj(ghz_state(2, 2))
    channels = clock_shift_channels(2, 2)
    # ideal basis permuted so every element misses its weight
    ideal = ghz_basis_measurement(2, 2)
    bad = [ideal[1], ideal[0], ideal[3], ideal[2]]
    povm = optimal_povm_step(state, channels, params, init=bad)
    s = Strategy.make(params, state, channels, povm)
    assert score(s).score > 0.9


def test_seesaw_config_validation():
    with pytest.raises(ValueError):
        SeesawConfig(restarts=0)
    with pytest.raises(ValueError):
        SeesawConfig(tol=0)
    with pytest.raises(ValueError):
        SeesawConfig(mode="annealing")


def test_seesaw_reaches_maximum_from_random_starts():
    params = GameParams(2, 2)
    rng = np.random.default_rng(79)
    init = random_strategy(params, proj(ghz_state(2, 2)), rng)
    res = seesaw(init, SeesawConfig(restarts=4, max_iter=80, tol=1e-10, seed=17))
    assert res.best_score >= 1 - 1e-6
    assert res.converged


def test_seesaw_trace_monotone_and_final_entry():
    params = GameParams(2, 2)
    res = seesaw(ghz_game_strategy(2, 2, state=noisy_ghz(2, 2, 0.6)),
                 SeesawConfig(restarts=2, max_iter=50, tol=1e-10, seed=23))
    trace = res.trace
    assert all(b >= a - 1e-12 for a, b in zip(trace, trace[1:]))
    assert res.best_score == trace[-1]


def test_seesaw_deterministic():
    params = GameParams(2, 2)
    init = ghz_game_strategy(2, 2, state=noisy_ghz(2, 2, 0.4))
    cfg = SeesawConfig(restarts=3, max_iter=40, tol=1e-10, seed=29)
    r1, r2 = seesaw(init, cfg), seesaw(init, cfg)
    assert r1.best_score == r2.best_score
    assert r1.restart_scores == r2.restart_scores
    assert all(np.array_equal(a, b) for a, b in zip(r1.best_strategy.povm, r2.best_strategy.povm))


def test_seesaw_iterates_are_valid_strategies():
    params = GameParams(2, 2)
    rng = np.random.default_rng(83)
    init = random_strategy(params, proj(random_ket(4, rng)), rng, mode="channel")
    res = seesaw(init, SeesawConfig(restarts=2, max_iter=30, tol=1e-9, seed=31, mode="channel"))
    res.best_strategy.validate(atol=1e-8)


def test_seesaw_product_state_capped_at_half():
    rng = np.random.default_rng(89)
    params = GameParams(2, 2)
    state = proj(tensor(random_ket(2, rng), random_ket(2, rng)))
    init = random_strategy(params, state, rng)
    res = seesaw(init, SeesawConfig(restarts=6, max_iter=80, tol=1e-10, seed=37))
    assert res.best_score <= 0.5 + 1e-6


def test_seesaw_unitary_mode_on_maximally_mixed():
    """Unitaries cannot reshape white noise: every strategy ties at 1/d^n."""
    params = GameParams(2, 2)
    rng = np.random.default_rng(97)
    init = random_strategy(params, np.eye(4) / 4, rng)
    res = seesaw(init, SeesawConfig(restarts=3, max_iter=30, tol=1e-10, seed=41))
    assert abs(res.best_score - 0.25) <= 1e-6


def test_seesaw_unitary_mode_rejects_kraus_channels():
    params = GameParams(2, 2)
    rng = np.random.default_rng(101)
    init = random_strategy(params, proj(ghz_state(2, 2)), rng, mode="channel")
    with pytest.raises(ValueError, match="unitary"):
        seesaw(init, SeesawConfig(restarts=1, max_iter=5, seed=1, mode="unitary"))


def test_compression_oracle_values():
    assert compression_oracle(4, 2) == 0.5
    assert compression_oracle(2, 2) == 1.0
    assert compression_oracle(9, 3) == 1 / 3 == min(1, 3 / 9)
    assert compression_oracle(3, 5) == 1.0  # no compression needed
    for n_msgs in range(1, 10):
        for d in (2, 3):
            assert compression_oracle(n_msgs, d) == min(1.0, d / n_msgs)


def test_compression_oracle_guard():
    with pytest.raises(SizeLimitError):
        compression_oracle(30, 3)
    with pytest.raises(ValueError):
        compression_oracle(0, 2)


def test_quantum_compression_never_beats_classical():
    for (n_msgs, d) in ((4, 2), (9, 3)):
        best = compression_quantum_sample(n_msgs, d, samples=200, seed=3)
        assert best <= d / n_msgs + 1e-9


def test_conjecture_probe_ghz():
    probe = conjecture_probe(proj(ghz_state(2, 2)), GameParams(2, 2),
                             SeesawConfig(restarts=3, max_iter=60, tol=1e-10, seed=43, mode="channel"))
    assert abs(probe.seesaw_best - 1.0) <= 1e-6
    assert abs(probe.egf_estimate - 1.0) <= 1e-6
    assert abs(probe.gap) <= 1e-6


def test_conjecture_probe_noisy_ghz():
    probe = conjecture_probe(noisy_ghz(2, 2, 0.5), GameParams(2, 2),
                             SeesawConfig(restarts=4, max_iter=80, tol=1e-10, seed=47, mode="channel"))
    assert abs(probe.egf_estimate - 0.625) <= 1e-6
    assert abs(probe.gap) < 1e-3


def test_conjecture_probe_maximally_mixed_reaches_1_over_d():
    """Channels may discard the state entirely, so even white noise
    admits score 1/d (the forwarding strategy); both estimates agree."""
    probe = conjecture_probe(np.eye(4) / 4, GameParams(2, 2),
                             SeesawConfig(restarts=3, max_iter=60, tol=1e-10, seed=53, mode="channel"))
    assert abs(probe.egf_estimate - 0.5) <= 1e-6
    assert abs(probe.seesaw_best - 0.5) <= 1e-6
    assert abs(probe.gap) < 1e-6


def test_conjecture_probe_rejects_untested_sizes():
    with pytest.raises(ValueError):
        conjecture_probe(np.eye(27) / 27, GameParams(3, 3))
