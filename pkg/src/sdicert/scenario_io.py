"""Scenario and sweep documents: JSON in, Strategy out, and back.

A scenario file holds ``params``, ``state``, ``channels`` and ``povm``
sections; each section is either a catalog reference (``{"kind": ...}``)
or explicit matrices with complex entries encoded as ``[re, im]`` pairs
(row-major).  Parse errors carry the offending field path.  See
docs/scenario_format.md for the full schema and worked examples.
"""

from __future__ import annotations

import json

import numpy as np

from . import catalog
from .errors import ScenarioError
from .game import ChannelFamily, GameParams, Strategy
from .linalg import proj

__all__ = [
    "load_scenario",
    "parse_scenario",
    "strategy_to_dict",
    "parse_sweep",
    "load_sweep",
]

STATE_KINDS = ("ghz", "noisy_ghz", "w", "dicke", "max_entangled", "maximally_mixed", "explicit")
CHANNEL_KINDS = ("clock_shift", "twisted_clock_shift", "explicit")
POVM_KINDS = ("ghz_basis", "noisy_bsm", "coloured_bsm", "hybrid", "explicit")


def _require(obj, key, path, kind=None):
    if not isinstance(obj, dict):
        raise ScenarioError(f"{path}: expected an object")
    if key not in obj:
        raise ScenarioError(f"{path}.{key}: missing required field")
    val = obj[key]
    if kind is not None and not isinstance(val, kind):
        raise ScenarioError(f"{path}.{key}: expected {kind.__name__}, got {type(val).__name__}")
    return val


def _number(obj, key, path):
    val = _require(obj, key, path)
    if isinstance(val, bool) or not isinstance(val, (int, float)):
        raise ScenarioError(f"{path}.{key}: expected a number, got {type(val).__name__}")
    return float(val)


def _complex_matrix(node, path, rows, cols) -> np.ndarray:
    if not isinstance(node, list) or len(node) != rows:
        raise ScenarioError(f"{path}: expected {rows} rows")
    out = np.zeros((rows, cols), dtype=complex)
    for i, row in enumerate(node):
        if not isinstance(row, list) or len(row) != cols:
            raise ScenarioError(f"{path}[{i}]: expected {cols} entries of [re, im]")
        for j, cell in enumerate(row):
            if (not isinstance(cell, list) or len(cell) != 2
                    or any(isinstance(v, bool) or not isinstance(v, (int, float)) for v in cell)):
                raise ScenarioError(f"{path}[{i}][{j}]: expected an [re, im] pair")
            out[i, j] = complex(cell[0], cell[1])
    return out


def _encode_matrix(mat: np.ndarray) -> list:
    return [[[float(v.real), float(v.imag)] for v in row] for row in np.asarray(mat, dtype=complex)]


def _parse_params(doc) -> GameParams:
    node = _require(doc, "params", "scenario")
    n = _require(node, "n", "params")
    d = _require(node, "d", "params")
    if isinstance(n, bool) or isinstance(d, bool) or not isinstance(n, int) or not isinstance(d, int):
        raise ScenarioError("params: n and d must be integers")
    try:
        return GameParams(n, d)
    except ValueError as exc:
        raise ScenarioError(f"params: {exc}") from exc


def _parse_state(doc, params: GameParams, in_dims):
    node = _require(doc, "state", "scenario")
    kind = _require(node, "kind", "state", str)
    n, d = params.n, params.d
    if kind == "ghz":
        return proj(catalog.ghz_state(n, d))
    if kind == "noisy_ghz":
        return catalog.noisy_ghz(n, d, _number(node, "v", "state"))
    if kind == "maximally_mixed":
        return catalog.noisy_ghz(n, d, 0.0)
    if kind == "max_entangled":
        if n != 2:
            raise ScenarioError("state: max_entangled requires n = 2")
        return proj(catalog.max_entangled_state(d))
    if kind == "w":
        if (n, d) != (3, 2):
            raise ScenarioError("state: the W state requires (n, d) = (3, 2)")
        return proj(catalog.w_state())
    if kind == "dicke":
        if (n, d) != (4, 2):
            raise ScenarioError("state: the Dicke state requires (n, d) = (4, 2)")
        return proj(catalog.dicke_state())
    if kind == "explicit":
        dim = int(np.prod(in_dims))
        return _complex_matrix(_require(node, "matrix", "state"), "state.matrix", dim, dim)
    raise ScenarioError(f"state.kind: unknown kind {kind!r}; expected one of {STATE_KINDS}")


def _parse_channels(doc, params: GameParams):
    node = _require(doc, "channels", "scenario")
    kind = _require(node, "kind", "channels", str)
    n, d = params.n, params.d
    if kind == "clock_shift":
        return catalog.clock_shift_channels(n, d)
    if kind == "twisted_clock_shift":
        if n != 2:
            raise ScenarioError("channels: twisted_clock_shift requires n = 2")
        return catalog.twisted_clock_shift_channels(d)
    if kind == "explicit":
        fams = _require(node, "families", "channels", list)
        if len(fams) != n:
            raise ScenarioError(f"channels.families: expected {n} families, got {len(fams)}")
        out = []
        for k, fam in enumerate(fams):
            path = f"channels.families[{k}]"
            dim_in = _require(fam, "dim_in", path)
            if isinstance(dim_in, bool) or not isinstance(dim_in, int) or dim_in < 1:
                raise ScenarioError(f"{path}.dim_in: expected a positive integer")
            table = _require(fam, "kraus", path, list)
            if len(table) != d:
                raise ScenarioError(f"{path}.kraus: expected {d} rows (one per x)")
            rows = []
            for x, row in enumerate(table):
                if not isinstance(row, list) or len(row) != d:
                    raise ScenarioError(f"{path}.kraus[{x}]: expected {d} entries (one per y)")
                entry = []
                for y, ks in enumerate(row):
                    kp = f"{path}.kraus[{x}][{y}]"
                    if not isinstance(ks, list) or not ks:
                        raise ScenarioError(f"{kp}: expected a nonempty list of Kraus matrices")
                    mats = [_complex_matrix(m, f"{kp}[{i}]", d, dim_in) for i, m in enumerate(ks)]
                    entry.append(np.stack(mats))
                rows.append(entry)
            out.append(ChannelFamily.from_kraus(k, rows))
        return out
    raise ScenarioError(
        f"channels.kind: unknown kind {kind!r}; expected one of {CHANNEL_KINDS}"
    )


def _parse_povm(doc, params: GameParams):
    node = _require(doc, "povm", "scenario")
    kind = _require(node, "kind", "povm", str)
    n, d = params.n, params.d
    if kind == "ghz_basis":
        return catalog.ghz_basis_measurement(n, d)
    if kind == "noisy_bsm":
        if n != 2:
            raise ScenarioError("povm: noisy_bsm requires n = 2")
        return catalog.noisy_bsm(d, _number(node, "v", "povm"))
    if kind == "coloured_bsm":
        if (n, d) != (2, 2):
            raise ScenarioError("povm: coloured_bsm requires (n, d) = (2, 2)")
        return catalog.coloured_noise_bsm(_number(node, "v", "povm"))
    if kind == "hybrid":
        if n != 2:
            raise ScenarioError("povm: hybrid requires n = 2")
        m = _require(node, "m", "povm")
        if isinstance(m, bool) or not isinstance(m, int):
            raise ScenarioError("povm.m: expected an integer")
        try:
            return catalog.hybrid_basis_measurement(d, m)
        except ValueError as exc:
            raise ScenarioError(f"povm.m: {exc}") from exc
    if kind == "explicit":
        elements = _require(node, "elements", "povm", list)
        if len(elements) != params.num_outcomes:
            raise ScenarioError(
                f"povm.elements: expected {params.num_outcomes} elements, got {len(elements)}"
            )
        dim = d ** n
        return [
            _complex_matrix(el, f"povm[{i}]", dim, dim) for i, el in enumerate(elements)
        ]
    raise ScenarioError(f"povm.kind: unknown kind {kind!r}; expected one of {POVM_KINDS}")


def parse_scenario(doc) -> Strategy:
    """Build a Strategy from a decoded scenario document."""
    if not isinstance(doc, dict):
        raise ScenarioError("scenario: expected a JSON object")
    params = _parse_params(doc)
    channels = _parse_channels(doc, params)
    in_dims = [fam.dim_in for fam in channels]
    state = _parse_state(doc, params, in_dims)
    povm = _parse_povm(doc, params)
    return Strategy.make(params, state, channels, povm)


def load_scenario(path) -> Strategy:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise ScenarioError(f"cannot read scenario file {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"{path}: invalid JSON ({exc})") from exc
    return parse_scenario(doc)


def strategy_to_dict(strategy: Strategy) -> dict:
    """Serialize a Strategy as a fully explicit scenario document.

    Floats survive the JSON round trip exactly, so re-parsing yields a
    bit-identical score.
    """
    params = strategy.params
    families = []
    for fam in strategy.channels:
        families.append({
            "party": fam.party,
            "dim_in": fam.dim_in,
            "kraus": [
                [[_encode_matrix(K) for K in ks] for ks in row] for row in fam.kraus
            ],
        })
    return {
        "params": {"n": params.n, "d": params.d},
        "state": {"kind": "explicit", "matrix": _encode_matrix(strategy.state)},
        "channels": {"kind": "explicit", "families": families},
        "povm": {"kind": "explicit", "elements": [_encode_matrix(m) for m in strategy.povm]},
    }


# ---------------------------------------------------------------------------
# Sweep documents

SWEEP_OUTPUTS = ("score", "gme", "entangled_ops")


def parse_sweep(doc) -> dict:
    """Validate a sweep document; returns {template, values, outputs}.

    The scenario template marks swept fields with ``"v": "sweep"``; each
    grid value is substituted everywhere the marker appears (at least
    one occurrence is required).
    """
    if not isinstance(doc, dict):
        raise ScenarioError("sweep: expected a JSON object")
    template = _require(doc, "scenario", "sweep")
    spec = _require(doc, "sweep", "sweep")
    variable = _require(spec, "variable", "sweep", str)
    if variable != "v":
        raise ScenarioError(f"sweep.variable: only 'v' is supported, got {variable!r}")
    lo = _number(spec, "min", "sweep")
    hi = _number(spec, "max", "sweep")
    steps = _require(spec, "steps", "sweep")
    if isinstance(steps, bool) or not isinstance(steps, int) or steps < 2:
        raise ScenarioError("sweep.steps: expected an integer >= 2")
    if lo > hi:
        raise ScenarioError(f"sweep: min {lo} exceeds max {hi}")
    outputs = doc.get("outputs", list(SWEEP_OUTPUTS))
    if (not isinstance(outputs, list)
            or any(o not in SWEEP_OUTPUTS for o in outputs)):
        raise ScenarioError(f"outputs: entries must be among {SWEEP_OUTPUTS}")
    markers = sum(
        1 for section in ("state", "povm", "channels")
        if isinstance(template.get(section), dict) and template[section].get("v") == "sweep"
    )
    if markers == 0:
        raise ScenarioError('sweep: no section carries the marker "v": "sweep"')
    values = [lo + i * (hi - lo) / (steps - 1) for i in range(steps)]
    return {"template": template, "values": values, "outputs": outputs}


def load_sweep(path) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise ScenarioError(f"cannot read sweep file {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"{path}: invalid JSON ({exc})") from exc
    return parse_sweep(doc)


def sweep_strategy(template, value: float) -> Strategy:
    """Instantiate the sweep template at one grid value."""
    doc = json.loads(json.dumps(template))
    for section in ("state", "povm", "channels"):
        node = doc.get(section)
        if isinstance(node, dict) and node.get("v") == "sweep":
            node["v"] = value
    return parse_scenario(doc)
