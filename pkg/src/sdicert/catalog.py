"""Named states, channel families and measurements used by the game.

Constructors return plain arrays / game types; everything is normalized
and validated to the structural tolerance.
"""

from __future__ import annotations

import numpy as np

from .game import ChannelFamily, GameParams, Strategy
from .linalg import basis, clock, proj, shift, tensor

__all__ = [
    "ghz_state",
    "max_entangled_state",
    "noisy_ghz",
    "w_state",
    "dicke_state",
    "bell_kets",
    "clock_shift_channels",
    "twisted_clock_shift_channels",
    "ghz_basis_measurement",
    "noisy_bsm",
    "coloured_noise_bsm",
    "hybrid_basis_measurement",
    "ghz_game_strategy",
]


def _check_visibility(v: float) -> float:
    v = float(v)
    if not 0.0 <= v <= 1.0:
        raise ValueError(f"visibility must lie in [0, 1], got {v}")
    return v


def ghz_state(n: int, d: int) -> np.ndarray:
    """|GHZ> = d^(-1/2) sum_i |i>^(tensor n)."""
    GameParams(n, d)
    psi = np.zeros(d ** n, dtype=complex)
    step = (d ** n - 1) // (d - 1)  # index of |i,i,...,i> advances by this per i
    psi[np.arange(d) * step] = 1.0 / np.sqrt(d)
    return psi


def max_entangled_state(d: int) -> np.ndarray:
    """Two-party maximally entangled ket, d^(-1/2) sum_i |ii>."""
    return ghz_state(2, d)


def noisy_ghz(n: int, d: int, v: float) -> np.ndarray:
    """GHZ state mixed with white noise at visibility v."""
    v = _check_visibility(v)
    dim = d ** n
    return v * proj(ghz_state(n, d)) + (1 - v) * np.eye(dim) / dim


def w_state() -> np.ndarray:
    """Three-qubit W state (|001> + |010> + |100>) / sqrt(3)."""
    psi = np.zeros(8, dtype=complex)
    psi[[1, 2, 4]] = 1.0 / np.sqrt(3)
    return psi


def dicke_state() -> np.ndarray:
    """Four-qubit Dicke state with two excitations.

    Equal superposition of the six weight-2 computational basis states,
    normalized by 1/sqrt(6).
    """
    psi = np.zeros(16, dtype=complex)
    psi[[0b0011, 0b0101, 0b0110, 0b1001, 0b1010, 0b1100]] = 1.0 / np.sqrt(6)
    return psi


def bell_kets() -> dict:
    """The two-qubit Bell basis {phi+, phi-, psi+, psi-}."""
    s = 1 / np.sqrt(2)
    return {
        "phi+": np.array([s, 0, 0, s], dtype=complex),
        "phi-": np.array([s, 0, 0, -s], dtype=complex),
        "psi+": np.array([0, s, s, 0], dtype=complex),
        "psi-": np.array([0, s, -s, 0], dtype=complex),
    }


def _zx_power(d: int, zpow: int, xpow: int) -> np.ndarray:
    z, x = clock(d), shift(d)
    return np.linalg.matrix_power(z, zpow % d) @ np.linalg.matrix_power(x, xpow % d)


def clock_shift_channels(n: int, d: int) -> list:
    """Unitary channel families U_{xy} = Z^x X^y for every party."""
    GameParams(n, d)
    table = [[_zx_power(d, x, y) for y in range(d)] for x in range(d)]
    return [ChannelFamily.from_unitaries(k, table) for k in range(n)]


def twisted_clock_shift_channels(d: int) -> list:
    """Two-party clock/shift variant with input-dependent shift offsets.

    Party 0 applies Z^x X^(y+x), party 1 applies Z^x X^(y-x); paired with
    ``hybrid_basis_measurement`` and a maximally entangled state this
    wins every round whose target lands on an entangled basis element.
    """
    GameParams(2, d)
    t0 = [[_zx_power(d, x, y + x) for y in range(d)] for x in range(d)]
    t1 = [[_zx_power(d, x, y - x) for y in range(d)] for x in range(d)]
    return [ChannelFamily.from_unitaries(0, t0), ChannelFamily.from_unitaries(1, t1)]


def ghz_basis_kets(n: int, d: int) -> list:
    """Orthonormal basis Z^(b0) (x) X^(b1) (x) ... (x) X^(b_{n-1}) |GHZ>.

    Ordered by the flat outcome index with party 0 most significant.  For
    n = d = 2 this is the Bell basis in the order phi+, psi+, phi-, psi-.
    """
    params = GameParams(n, d)
    ghz = ghz_state(n, d)
    kets = []
    for idx in range(params.num_outcomes):
        b = params.outcome_tuple(idx)
        ops = [_zx_power(d, b[0], 0)] + [_zx_power(d, 0, b[k]) for k in range(1, n)]
        kets.append(tensor(ops) @ ghz)
    return kets


def ghz_basis_measurement(n: int, d: int) -> list:
    """Projective measurement onto the generalized GHZ basis."""
    return [proj(psi) for psi in ghz_basis_kets(n, d)]


def noisy_bsm(d: int, v: float) -> list:
    """Generalized Bell-state measurement mixed with white noise.

    Each element v |M_b><M_b| + (1-v) I/d^2 is, up to local unitaries, an
    isotropic state, hence entangled exactly when v > 1/(d+1).
    """
    v = _check_visibility(v)
    white = (1 - v) * np.eye(d * d) / (d * d)
    return [v * m + white for m in ghz_basis_measurement(2, d)]


def coloured_noise_bsm(v: float) -> list:
    """Two-qubit Bell-state measurement under coloured (non-white) noise.

    Outcome order (b0, b1) = 00, 01, 10, 11.  The last element stays the
    ideal psi- projector at every visibility, so the measurement is
    entangled even at v = 0.
    """
    v = _check_visibility(v)
    kets = bell_kets()
    phi_p, phi_m = proj(kets["phi+"]), proj(kets["phi-"])
    psi_p, psi_m = proj(kets["psi+"]), proj(kets["psi-"])
    w = (1 - v) / 4
    return [
        v * phi_p + w * (phi_p + 2 * phi_m + psi_p),
        v * psi_p + w * (phi_p + phi_m + 2 * psi_p),
        v * phi_m + w * (2 * phi_p + phi_m + psi_p),
        psi_m.copy(),
    ]


def hybrid_basis_measurement(d: int, m: int) -> list:
    """Projective basis mixing product and maximally entangled elements.

    Outcome (b0, b1) projects onto the computational product state
    |b0, b1> when (b1 - b0) mod d < m, and onto the maximally entangled
    state Z^(b0) (x) X^(b1-b0) |phi_max> otherwise, giving exactly m*d
    product elements and (d-m)*d entangled ones.
    """
    if not 0 <= m <= d:
        raise ValueError(f"m must lie in 0..{d}, got {m}")
    params = GameParams(2, d)
    phi = max_entangled_state(d)
    elements = []
    for idx in range(params.num_outcomes):
        b0, b1 = params.outcome_tuple(idx)
        if (b1 - b0) % d < m:
            elements.append(proj(tensor(basis(d, b0), basis(d, b1))))
        else:
            elements.append(proj(tensor(_zx_power(d, b0, 0), _zx_power(d, 0, b1 - b0)) @ phi))
    return elements


def ghz_game_strategy(n: int, d: int, state: np.ndarray | None = None) -> Strategy:
    """Clock/shift channels with the GHZ-basis measurement.

    Scores 1 on the GHZ state and, by linearity, v + (1-v)/d^n on its
    white-noise mixtures.  ``state`` overrides the shared state (it must
    live on n d-dimensional subsystems).
    """
    params = GameParams(n, d)
    if state is None:
        state = proj(ghz_state(n, d))
    return Strategy.make(
        params, state, clock_shift_channels(n, d), ghz_basis_measurement(n, d)
    )
