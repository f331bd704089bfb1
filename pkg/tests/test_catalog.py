import itertools

import numpy as np
import pytest

from sdicert.catalog import (
    bell_kets,
    clock_shift_channels,
    coloured_noise_bsm,
    dicke_state,
    ghz_basis_kets,
    ghz_basis_measurement,
    ghz_game_strategy,
    ghz_state,
    hybrid_basis_measurement,
    max_entangled_state,
    noisy_bsm,
    noisy_ghz,
    twisted_clock_shift_channels,
    w_state,
)
from sdicert.certify import separable_measurement_bound
from sdicert.game import GameParams, Strategy, score
from sdicert.linalg import (
    dag,
    is_density_matrix,
    is_povm,
    partial_trace,
    partial_transpose,
    permute_systems,
    proj,
    random_ket,
)

CASES = ((2, 2), (2, 3), (3, 2), (3, 3))


def gram(kets):
    return np.array([[np.vdot(a, b) for b in kets] for a in kets])


def test_ghz_state_qubits():
    assert np.allclose(ghz_state(2, 2), np.array([1, 0, 0, 1]) / np.sqrt(2))


def test_ghz_marginals_maximally_mixed():
    for (n, d) in CASES:
        rho = proj(ghz_state(n, d))
        for k in range(n):
            marg = partial_trace(rho, [d] * n, keep=[k])
            assert np.allclose(marg, np.eye(d) / d, atol=1e-12)


def test_ghz_normalized():
    psi = ghz_state(3, 3)
    assert abs(np.vdot(psi, psi) - 1.0) <= 1e-12


def test_noisy_ghz_limits_and_validation():
    assert np.allclose(noisy_ghz(2, 2, 0.0), np.eye(4) / 4)
    assert np.allclose(noisy_ghz(2, 2, 1.0), proj(ghz_state(2, 2)))
    assert is_density_matrix(noisy_ghz(3, 2, 0.3))
    with pytest.raises(ValueError):
        noisy_ghz(2, 2, 1.2)
    with pytest.raises(ValueError):
        noisy_ghz(2, 2, -0.1)


def test_noisy_ghz_bipartite_entanglement_threshold():
    """For n=2 the mixture is NPT exactly above v = 1/(d+1)."""
    for d in (2, 3):
        thr = 1 / (d + 1)
        for v, entangled in ((thr - 0.01, False), (thr + 0.01, True)):
            pt = partial_transpose(noisy_ghz(2, d, v), [d, d])
            assert (np.linalg.eigvalsh(pt)[0] < -1e-9) == entangled


def test_noisy_ghz_threshold_saturation_value():
    v = 3 / 7
    s = score(ghz_game_strategy(3, 2, state=noisy_ghz(3, 2, v))).score
    assert abs(s - 0.5) <= 1e-12  # v + (1-v)/8 at v = 3/7 is exactly 1/d


def test_w_state_amplitudes():
    psi = w_state()
    assert abs(np.vdot(psi, psi) - 1.0) <= 1e-12
    nonzero = np.flatnonzero(np.abs(psi) > 1e-12)
    assert list(nonzero) == [1, 2, 4]
    assert np.allclose(psi[nonzero], 1 / np.sqrt(3))


def test_dicke_state_amplitudes():
    psi = dicke_state()
    assert abs(np.vdot(psi, psi) - 1.0) <= 1e-12
    nonzero = np.flatnonzero(np.abs(psi) > 1e-12)
    assert len(nonzero) == 6
    assert all(bin(i).count("1") == 2 for i in nonzero)
    assert np.allclose(psi[nonzero], 1 / np.sqrt(6))


def test_w_and_dicke_permutation_symmetric():
    for psi, n in ((w_state(), 3), (dicke_state(), 4)):
        rho = proj(psi)
        for perm in itertools.permutations(range(n)):
            assert np.allclose(permute_systems(rho, [2] * n, list(perm)), rho, atol=1e-12)


def test_clock_shift_channels_identity_at_zero():
    fams = clock_shift_channels(3, 3)
    for fam in fams:
        assert np.allclose(fam.kraus[0][0][0], np.eye(3))


def test_clock_shift_qubit_family_is_pauli():
    fam = clock_shift_channels(2, 2)[0]
    x = np.array([[0, 1], [1, 0]], dtype=complex)
    z = np.diag([1.0, -1.0]).astype(complex)
    assert np.allclose(fam.kraus[0][0][0], np.eye(2))
    assert np.allclose(fam.kraus[0][1][0], x)
    assert np.allclose(fam.kraus[1][0][0], z)
    assert np.allclose(fam.kraus[1][1][0], z @ x)


def test_clock_shift_channels_trace_preserving():
    rng = np.random.default_rng(53)
    for fam in clock_shift_channels(2, 3):
        fam.validate(3)
        rho = proj(random_ket(3, rng))
        for x in range(3):
            for y in range(3):
                k = fam.kraus[x][y][0]
                assert abs(np.trace(k @ rho @ dag(k)).real - 1.0) <= 1e-12


def test_ghz_basis_orthonormal_gram():
    for (n, d) in CASES:
        kets = ghz_basis_kets(n, d)
        assert np.max(np.abs(gram(kets) - np.eye(d ** n))) <= 1e-10


def test_ghz_basis_completeness_and_bell_case():
    for (n, d) in CASES:
        assert is_povm(ghz_basis_measurement(n, d))
    kets = bell_kets()
    expected = [proj(kets["phi+"]), proj(kets["psi+"]), proj(kets["phi-"]), proj(kets["psi-"])]
    for got, want in zip(ghz_basis_measurement(2, 2), expected):
        assert np.allclose(got, want, atol=1e-12)


def test_noisy_bsm_limits_and_completeness():
    for d in (2, 3):
        assert all(np.allclose(a, b) for a, b in zip(noisy_bsm(d, 1.0), ghz_basis_measurement(2, d)))
        for el in noisy_bsm(d, 0.0):
            assert np.allclose(el, np.eye(d * d) / d ** 2)
        for v in (0.0, 0.31, 1.0):
            assert is_povm(noisy_bsm(d, v))
    with pytest.raises(ValueError):
        noisy_bsm(2, 1.5)


def test_noisy_bsm_elements_entangled_above_threshold():
    for d in (2, 3):
        thr = 1 / (d + 1)
        for v, entangled in ((thr - 0.01, False), (thr + 0.01, True)):
            for el in noisy_bsm(d, v):
                pt = partial_transpose(el / np.trace(el).real, [d, d])
                assert (np.linalg.eigvalsh(pt)[0] < -1e-9) == entangled


def test_coloured_noise_completeness_direct_summation():
    for v in (0.0, 0.37, 1.0):
        total = np.zeros((4, 4), dtype=complex)
        for el in coloured_noise_bsm(v):
            total = total + el
        assert np.max(np.abs(total - np.eye(4))) <= 1e-9


def test_coloured_noise_ideal_limit():
    kets = bell_kets()
    expected = [proj(kets["phi+"]), proj(kets["psi+"]), proj(kets["phi-"]), proj(kets["psi-"])]
    for got, want in zip(coloured_noise_bsm(1.0), expected):
        assert np.allclose(got, want, atol=1e-12)


def test_coloured_noise_validation():
    with pytest.raises(ValueError):
        coloured_noise_bsm(-0.2)


def test_hybrid_basis_boundaries():
    d = 3
    comp = hybrid_basis_measurement(d, d)
    params = GameParams(2, d)
    for idx, el in enumerate(comp):
        b0, b1 = params.outcome_tuple(idx)
        want = np.zeros((9, 9))
        want[b0 * 3 + b1, b0 * 3 + b1] = 1.0
        assert np.allclose(el, want)
    fully_ent = hybrid_basis_measurement(d, 0)
    for el in fully_ent:
        pt = partial_transpose(el, [d, d])
        assert np.linalg.eigvalsh(pt)[0] < -1e-9
    with pytest.raises(ValueError):
        hybrid_basis_measurement(3, 4)


def test_hybrid_basis_orthonormality_gram():
    params = GameParams(2, 3)
    els = hybrid_basis_measurement(3, 1)
    kets = []
    for el in els:
        w, v = np.linalg.eigh(el)
        kets.append(v[:, -1] * np.sqrt(w[-1]))
    assert np.max(np.abs(np.abs(gram(kets)) - np.eye(9))) <= 1e-10
    assert is_povm(els)


def test_hybrid_strategy_scores():
    for d in (2, 3):
        params = GameParams(2, d)
        for m in range(d + 1):
            s = Strategy.make(params, proj(max_entangled_state(d)),
                              twisted_clock_shift_channels(d),
                              hybrid_basis_measurement(d, m))
            val = score(s).score
            assert abs(val - ((d - m) / d + m / d ** 2)) <= 1e-9
            assert abs(val - separable_measurement_bound(params, m * d)) <= 1e-9


def test_catalog_povms_are_valid():
    povms = [
        ghz_basis_measurement(3, 2),
        noisy_bsm(3, 0.4),
        coloured_noise_bsm(0.5),
        hybrid_basis_measurement(2, 1),
    ]
    for povm in povms:
        assert is_povm(povm, atol=1e-9)


def test_ideal_pipeline_identity():
    for (n, d) in CASES:
        assert abs(score(ghz_game_strategy(n, d)).score - 1.0) <= 1e-9
