"""Self-check suites behind ``sdicert verify``.

Three suites: ``paper`` re-derives every closed-form number the package
is built around (ideal scores, noise lines, thresholds, operator
counts, seesaw targets); ``bounds`` hammers the two certification
bounds with randomized strategies that must not violate them; and
``oracle`` cross-checks the classical compression optimum and the PPT
ground truth.  All randomness is seeded and the report contains no
timestamps, so a repeated run is byte-identical.
"""

from __future__ import annotations

import numpy as np

from . import catalog
from .certify import (
    biseparable_bound,
    bipartitions,
    certify,
    count_npt_operators,
    ghz_fraction,
    ghz_visibility_threshold,
    separable_measurement_bound,
)
from .game import GameParams, Strategy, score, score_from_distribution
from .linalg import (
    haar_isometry,
    haar_unitary,
    partial_trace,
    permute_systems,
    proj,
    random_ket,
    tensor,
)
from .optimize import (
    SeesawConfig,
    compression_oracle,
    compression_quantum_sample,
    optimal_povm_step,
    seesaw,
)

__all__ = ["run_suite", "sample_biseparable_score", "sample_separable_povm_score", "SUITES"]

SUITES = ("paper", "bounds", "oracle")

TARGET_CASES = ((2, 2), (2, 3), (3, 2), (3, 3))


def _fmt(x: float) -> str:
    return f"{x:.9e}"


class _Report:
    def __init__(self, suite: str, seed: int):
        self.lines = [f"suite {suite} (seed {seed})"]
        self.passed = 0
        self.failed = 0
        self.suite = suite

    def check(self, name: str, ok: bool, detail: str = ""):
        tag = "PASS" if ok else "FAIL"
        self.lines.append(f"[{tag}] {name:<44s} {detail}".rstrip())
        if ok:
            self.passed += 1
        else:
            self.failed += 1

    def finish(self):
        self.lines.append(
            f"suite {self.suite}: {self.passed} passed, {self.failed} failed"
        )
        return self.lines, self.failed == 0


# ---------------------------------------------------------------------------
# Randomized strategy samplers shared with the acceptance tests


def _random_channels(params: GameParams, rng: np.random.Generator):
    """Random channel families: a seeded mix of unitary conjugations and
    rank-2 Kraus maps."""
    n, d = params.n, params.d
    fams = []
    for k in range(n):
        table = []
        for _x in range(d):
            row = []
            for _y in range(d):
                if rng.random() < 0.5:
                    row.append(haar_unitary(d, rng)[None, :, :])
                else:
                    row.append(haar_isometry(2 * d, d, rng).reshape(2, d, d))
            table.append(row)
        fams.append(table)
    from .game import ChannelFamily

    return [ChannelFamily.from_kraus(k, tbl) for k, tbl in enumerate(fams)]


def sample_biseparable_score(params: GameParams, rng: np.random.Generator,
                             povm_iters: int = 80) -> float:
    """Score of a random biseparable strategy with a best-response POVM.

    Random bipartition, random pure states on each side of the cut
    (entangled within a side is allowed), random channels, and the POVM
    optimized against them; the biseparability bound caps the result at
    1/d regardless of how far the POVM iteration got.
    """
    n, d = params.n, params.d
    cuts = bipartitions(n)
    cut = cuts[int(rng.integers(len(cuts)))]
    rest = tuple(k for k in range(n) if k not in cut)
    psi = tensor(random_ket(d ** len(cut), rng), random_ket(d ** len(rest), rng))
    concat = list(cut) + list(rest)
    state = permute_systems(proj(psi), [d] * n, [concat.index(j) for j in range(n)])
    channels = _random_channels(params, rng)
    povm = optimal_povm_step(state, channels, params, max_iter=povm_iters)
    return score(Strategy.make(params, state, channels, povm)).score


def sample_separable_povm_score(params: GameParams, rng: np.random.Generator) -> float:
    """Score of a random (possibly GME) state and channels against a
    random product-basis projective measurement; the fully-separable
    measurement bound caps it at 1/d."""
    n, d = params.n, params.d
    state = proj(random_ket(d ** n, rng))
    channels = _random_channels(params, rng)
    locals_u = [haar_unitary(d, rng) for _ in range(n)]
    povm = []
    for idx in range(params.num_outcomes):
        b = params.outcome_tuple(idx)
        povm.append(proj(tensor([locals_u[k][:, b[k]] for k in range(n)])))
    return score(Strategy.make(params, state, channels, povm)).score


# ---------------------------------------------------------------------------
# Suite: paper


def _forwarding_distribution(params: GameParams) -> dict:
    """Senders forward y_k; the referee satisfies every difference
    condition and guesses the sum, succeeding with probability 1/d."""
    from .game import input_table

    n, d = params.n, params.d
    X, Y, _ = input_table(params)
    dist = {}
    for t in range(params.num_inputs):
        x, y = tuple(int(v) for v in X[t]), tuple(int(v) for v in Y[t])
        for guess in range(d):
            b = (guess,) + tuple((y[k] - y[0]) % d for k in range(1, n))
            dist[(b, x, y)] = 1.0 / d
    return dist


def _suite_paper(rep: _Report, seed: int):
    root = np.random.SeedSequence(seed)

    for (n, d) in TARGET_CASES:
        r = score(catalog.ghz_game_strategy(n, d))
        rep.check(f"ideal-score ({n},{d})", abs(r.score - 1.0) <= 1e-9,
                  f"|1-score| = {_fmt(abs(r.score - 1.0))}")

    for (n, d) in TARGET_CASES:
        r = score(catalog.ghz_game_strategy(n, d, state=np.eye(d ** n) / d ** n))
        rep.check(f"white-noise-score ({n},{d})", abs(r.score - d ** -n) <= 1e-9,
                  f"|score-1/d^n| = {_fmt(abs(r.score - d ** -n))}")

    worst = 0.0
    for (n, d) in TARGET_CASES:
        for v in np.linspace(0.0, 1.0, 11):
            r = score(catalog.ghz_game_strategy(n, d, state=catalog.noisy_ghz(n, d, v)))
            worst = max(worst, abs(r.score - (v + (1 - v) / d ** n)))
    rep.check("noisy-ghz-line (11-point grids)", worst <= 1e-9, f"max dev = {_fmt(worst)}")

    for (n, d), quoted in (((2, 2), 1 / 3), ((2, 3), 1 / 4), ((3, 2), 3 / 7), ((3, 3), 4 / 13)):
        thr = ghz_visibility_threshold(n, d)
        ok = abs(thr - quoted) <= 1e-12
        for v, expect in ((thr - 0.01, False), (thr + 0.01, True)):
            r = score(catalog.ghz_game_strategy(n, d, state=catalog.noisy_ghz(n, d, v)))
            ok = ok and certify(r.score, GameParams(n, d)).gme_certified == expect
        rep.check(f"gme-threshold ({n},{d})", ok, f"threshold = {_fmt(thr)}")

    fam = catalog.clock_shift_channels(2, 2)[0]
    pauli_ok = (
        np.allclose(fam.kraus[1][0][0], np.diag([1, -1]))
        and np.allclose(fam.kraus[0][1][0], np.array([[0, 1], [1, 0]]))
    )
    rep.check("clock/shift(2) are Pauli Z/X", pauli_ok)

    kets = catalog.bell_kets()
    bell = [proj(kets["phi+"]), proj(kets["psi+"]), proj(kets["phi-"]), proj(kets["psi-"])]
    got = catalog.ghz_basis_measurement(2, 2)
    rep.check("ghz-basis(2,2) is the Bell measurement",
              all(np.allclose(a, b, atol=1e-12) for a, b in zip(got, bell)))

    for (n, d) in ((2, 2), (2, 3), (3, 2)):
        params = GameParams(n, d)
        r = score_from_distribution(_forwarding_distribution(params), params)
        rep.check(f"forwarding-strategy 1/d ({n},{d})", abs(r.score - 1 / d) <= 1e-12,
                  f"score = {_fmt(r.score)}")

    for (n, d) in ((3, 2), (2, 3)):
        total = sum(catalog.ghz_basis_measurement(n, d))
        marg = partial_trace(total, [d] * n, keep=[0])
        dev = float(np.max(np.abs(marg - d ** (n - 1) * np.eye(d))))
        rep.check(f"povm-marginal d^(n-1) I ({n},{d})", dev <= 1e-9, f"max dev = {_fmt(dev)}")

    p22 = GameParams(2, 2)
    rep.check("separable-bound table (2,2)",
              abs(separable_measurement_bound(p22, 4) - 0.5) <= 1e-12
              and abs(separable_measurement_bound(p22, 1) - 7 / 8) <= 1e-12
              and abs(separable_measurement_bound(p22, 2) - 3 / 4) <= 1e-12,
              "k=4: 1/2, k=1: 7/8, k=2: 3/4")

    ok = True
    detail = []
    for d in (2, 3):
        params = GameParams(2, d)
        for m in range(d + 1):
            s = Strategy.make(params, proj(catalog.max_entangled_state(d)),
                              catalog.twisted_clock_shift_channels(d),
                              catalog.hybrid_basis_measurement(d, m))
            r = score(s)
            expect = (d - m) / d + m / d ** 2
            bound = separable_measurement_bound(params, m * d)
            ok = ok and abs(r.score - expect) <= 1e-9 and abs(r.score - bound) <= 1e-9
        detail.append(f"d={d} ok")
    rep.check("hybrid-basis saturation", ok, "; ".join(detail))

    worst = 0.0
    for v in np.linspace(0.0, 1.0, 11):
        s = Strategy.make(p22, proj(catalog.max_entangled_state(2)),
                          catalog.clock_shift_channels(2, 2), catalog.coloured_noise_bsm(v))
        worst = max(worst, abs(score(s).score - (1 + v) / 2))
    rep.check("coloured-noise score (1+v)/2", worst <= 1e-9, f"max dev = {_fmt(worst)}")

    counts = [certify((1 + v) / 2, p22).certified_entangled_ops for v in (0.1, 0.3, 0.6, 0.9)]
    rep.check("coloured-noise certified counts", counts == [1, 2, 3, 4], f"counts = {counts}")

    npt = [count_npt_operators(catalog.coloured_noise_bsm(v), [2, 2])[0] for v in (0.0, 0.2, 0.5, 1.0)]
    rep.check("coloured-noise NPT ground truth", npt == [1, 2, 4, 4], f"counts = {npt}")

    ok = True
    for d in (2, 3):
        params = GameParams(2, d)
        thr = 1 / (d + 1)
        for v, expect in ((thr - 1e-3, 0), (thr + 1e-3, 1)):
            r = v + (1 - v) / d ** 2
            got = certify(r, params).certified_entangled_ops
            ok = ok and (got >= 1) == (expect == 1)
    rep.check("noisy-bsm certification at 1/(d+1)", ok)

    ok = True
    for v, expect in ((5 / 6 - 1e-3, False), (5 / 6 + 1e-3, True)):
        got = certify(v + (1 - v) / 4, p22).certified_entangled_ops
        ok = ok and (got == 4) == expect
    rep.check("noisy-bsm all-four at 5/6 (d=2)", ok)

    rep.check("noisy-bsm NPT counts",
              count_npt_operators(catalog.noisy_bsm(2, 0.2), [2, 2])[0] == 0
              and count_npt_operators(catalog.noisy_bsm(2, 0.4), [2, 2])[0] == 4)

    rep.check("compression optimum d/N",
              compression_oracle(4, 2) == 0.5 and compression_oracle(9, 3) == 3 / 9,
              "N=4,d=2: 0.5; N=9,d=3: 1/3")

    worst = 0.0
    for (n, d) in ((2, 2), (3, 2)):
        gf = ghz_fraction(catalog.noisy_ghz(n, d, 0.5), GameParams(n, d), restarts=4,
                          seed=int(root.spawn(1)[0].generate_state(1)[0]))
        worst = max(worst, abs(gf - (0.5 + 0.5 / d ** n)))
    rep.check("ghz-fraction noisy line", worst <= 1e-7, f"max dev = {_fmt(worst)}")

    w_proj = proj(catalog.w_state())
    details = []
    ok = True
    for i, v in enumerate((0.25, 0.5, 0.75, 1.0)):
        state = v * w_proj + (1 - v) * np.eye(8) / 8
        cfg = SeesawConfig(restarts=8, max_iter=120, tol=1e-10, seed=1000 + i)
        res = seesaw(catalog.ghz_game_strategy(3, 2, state=state), cfg)
        target = (1 + 5 * v) / 8
        ok = ok and res.best_score >= target - 1e-3
        note = " (above target)" if res.best_score > target + 1e-3 else ""
        details.append(f"v={v}: {res.best_score:.6f}/{target:.6f}{note}")
    rep.check("w-state seesaw line (1+5v)/8", ok, "; ".join(details))

    d_proj = proj(catalog.dicke_state())
    lo_v, hi_v = 0.60, 0.66
    vals = []
    for i, v in enumerate((lo_v, hi_v)):
        state = v * d_proj + (1 - v) * np.eye(16) / 16
        cfg = SeesawConfig(restarts=4, max_iter=120, tol=1e-10, seed=2000 + i)
        vals.append(seesaw(catalog.ghz_game_strategy(4, 2, state=state), cfg).best_score)
    ok = vals[0] <= 0.5 + 1e-4 and vals[1] > 0.5 + 1e-4
    rep.check("dicke GME bracket around 7/11",
              ok, f"score({lo_v}) = {vals[0]:.6f}, score({hi_v}) = {vals[1]:.6f}")


# ---------------------------------------------------------------------------
# Suite: bounds


def _suite_bounds(rep: _Report, seed: int):
    root = np.random.SeedSequence(seed)
    plans = [
        ("biseparable (2,2)", GameParams(2, 2), sample_biseparable_score, 150),
        ("biseparable (3,2)", GameParams(3, 2), sample_biseparable_score, 150),
        ("separable-povm (2,2)", GameParams(2, 2), sample_separable_povm_score, 50),
        ("separable-povm (3,2)", GameParams(3, 2), sample_separable_povm_score, 50),
    ]
    total = 0
    violations = 0
    for name, params, sampler, count in plans:
        seqs = root.spawn(count)
        cap = biseparable_bound(params)
        worst = -np.inf
        bad = 0
        for s in seqs:
            val = sampler(params, np.random.default_rng(s))
            worst = max(worst, val - cap)
            if val > cap + 1e-6:
                bad += 1
        total += count
        violations += bad
        rep.check(f"{name} x{count}", bad == 0,
                  f"max(score - 1/d) = {_fmt(worst)}")
    rep.check(f"no violations in {total} samples", violations == 0,
              f"violations = {violations}")


# ---------------------------------------------------------------------------
# Suite: oracle


def _suite_oracle(rep: _Report, seed: int):
    for (N, d) in ((4, 2), (8, 2), (9, 3)):
        got = compression_oracle(N, d)
        expect = min(1.0, d / N)
        rep.check(f"compression N={N} d={d}", got == expect,
                  f"optimum = {got!r}")

    best = compression_quantum_sample(4, 2, samples=500, seed=seed)
    rep.check("quantum coding stays below d/N (500 samples)",
              best <= 0.5 + 1e-9, f"max observed = {_fmt(best)}")

    npt = [count_npt_operators(catalog.coloured_noise_bsm(v), [2, 2])[0]
           for v in (0.0, 0.2, 0.5, 1.0)]
    rep.check("coloured-noise PPT counts", npt == [1, 2, 4, 4], f"counts = {npt}")

    ok = (count_npt_operators(catalog.noisy_bsm(2, 0.2), [2, 2])[0] == 0
          and count_npt_operators(catalog.noisy_bsm(2, 0.4), [2, 2])[0] == 4
          and count_npt_operators(catalog.noisy_bsm(3, 0.2), [3, 3])[0] == 0
          and count_npt_operators(catalog.noisy_bsm(3, 0.3), [3, 3])[0] == 9)
    rep.check("noisy-bsm PPT counts (d=2,3)", ok)

    ok = all(
        count_npt_operators(catalog.hybrid_basis_measurement(d, m), [d, d])[0] == (d - m) * d
        for d in (2, 3) for m in range(d + 1)
    )
    rep.check("hybrid-basis PPT counts (d-m)d", ok)

    # The score-based witness must never claim more entangled operators
    # than the PPT ground truth grants (exact for two qubits).
    p22 = GameParams(2, 2)
    ok = True
    for v in np.linspace(0.0, 1.0, 21):
        claimed = certify((1 + v) / 2, p22).certified_entangled_ops
        truth, _ = count_npt_operators(catalog.coloured_noise_bsm(v), [2, 2])
        ok = ok and claimed <= truth
        claimed = certify(v + (1 - v) / 4, p22).certified_entangled_ops
        truth, _ = count_npt_operators(catalog.noisy_bsm(2, v), [2, 2])
        ok = ok and claimed <= truth
    rep.check("witness never over-claims vs PPT (21-point grid)", ok)


def run_suite(suite: str, seed: int = 0):
    """Run one suite; returns ``(lines, ok)`` with deterministic content."""
    if suite not in SUITES:
        raise ValueError(f"unknown suite {suite!r}; expected one of {SUITES}")
    rep = _Report(suite, seed)
    if suite == "paper":
        _suite_paper(rep, seed)
    elif suite == "bounds":
        _suite_bounds(rep, seed)
    else:
        _suite_oracle(rep, seed)
    return rep.finish()
