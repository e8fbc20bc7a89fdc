"""Cascaded path/polarisation analysers and their detector projectors."""
from __future__ import annotations

import copy
import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from hdqkd.errors import ConfigError, TopologyError
from hdqkd.optics.elements import AMP_TOL, HWP, POLS, element_from_dict

ISOMETRY_ATOL = 1e-10


@dataclass
class OpticalNetwork:
    """Ordered elements acting on inputs ``(path, input_polarization)``, path < d_in.

    ``detectors`` maps a detector id to its terminal ``(path, pol)`` mode.
    """

    d_in: int
    elements: list = field(default_factory=list)
    detectors: dict = field(default_factory=dict)
    input_polarization: str = "H"
    name: str = ""

    def __post_init__(self):
        terminals = list(self.detectors.values())
        if len(set(terminals)) != len(terminals):
            raise ConfigError(f"network {self.name!r}: detector terminal modes must be distinct")

    @property
    def hwp_ids(self) -> list[str]:
        return [e.id for e in self.elements if isinstance(e, HWP)]

    def with_angles(self, angles: dict) -> "OpticalNetwork":
        """Copy of the network with the named wave plates rotated."""
        known = set(self.hwp_ids)
        missing = set(angles) - known
        if missing:
            raise KeyError(f"network {self.name!r} has no wave plate(s) {sorted(missing)}")
        net = copy.deepcopy(self)
        for e in net.elements:
            if isinstance(e, HWP) and e.id in angles:
                e.angle = float(angles[e.id])
        return net

    def input_mode(self, i: int) -> tuple:
        return (i, self.input_polarization)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "d_in": self.d_in,
            "input_polarization": self.input_polarization,
            "elements": [e.to_dict() for e in self.elements],
            "detectors": {k: [v[0], v[1]] for k, v in self.detectors.items()},
        }

    @classmethod
    def from_dict(cls, data: dict) -> "OpticalNetwork":
        name = data.get("name", "")
        for key in ("d_in", "elements", "detectors"):
            if key not in data:
                raise ConfigError(f"network {name!r}: missing field {key!r}")
        elements = [element_from_dict(e, f"network {name!r} element {n}")
                    for n, e in enumerate(data["elements"])]
        ids = [e.id for e in elements]
        if len(set(ids)) != len(ids):
            raise ConfigError(f"network {name!r}: element ids must be unique")
        detectors = {}
        for det, term in data["detectors"].items():
            if len(term) != 2 or term[1] not in POLS:
                raise ConfigError(f"network {name!r}: detector {det} needs [path, 'H'|'V'], got {term!r}")
            detectors[det] = (int(term[0]), term[1])
        pol = data.get("input_polarization", "H")
        if pol not in POLS:
            raise ConfigError(f"network {name!r}: input_polarization must be H or V")
        return cls(int(data["d_in"]), elements, detectors, pol, name)


def load_network(source) -> OpticalNetwork:
    """Load a network from a built-in name (e.g. ``"d4"``) or a JSON file path."""
    path = Path(source)
    if path.suffix == ".json" and path.exists():
        text = path.read_text()
    else:
        try:
            text = resources.files("hdqkd.optics").joinpath("configs").joinpath(f"{source}.json").read_text()
        except FileNotFoundError:
            raise ConfigError(f"no built-in network named {source!r}") from None
    try:
        return OpticalNetwork.from_dict(json.loads(text))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{source}: line {exc.lineno}: {exc.msg}") from None


def propagate(net: OpticalNetwork, state: dict, strict: bool = True) -> dict:
    """Push a mode state through every element in order.

    With ``strict`` and a non-empty detector map, amplitude ending anywhere
    other than a detector terminal raises :class:`TopologyError`.
    """
    for mode, amp in state.items():
        if abs(amp) > AMP_TOL and not (0 <= mode[0] < net.d_in and mode[1] == net.input_polarization):
            raise TopologyError(f"input amplitude on undeclared mode {mode}")
    for element in net.elements:
        state = element.apply(state)
    state = {m: a for m, a in state.items() if abs(a) > AMP_TOL}
    if strict and net.detectors:
        terminals = set(net.detectors.values())
        stray = [m for m in state if m not in terminals]
        if stray:
            raise TopologyError(f"network {net.name!r} leaves amplitude on undetected modes {stray}")
    return state


def transfer_matrix(net: OpticalNetwork) -> tuple[np.ndarray, list]:
    """Matrix from the d_in input modes to every reachable output mode.

    Returns ``(U, modes)`` with ``U[r, i]`` the amplitude on ``modes[r]`` for
    unit input on path i. Detector terminals are listed first.
    """
    columns = [propagate(net, {net.input_mode(i): 1.0}, strict=False) for i in range(net.d_in)]
    modes = list(net.detectors.values())
    for col in columns:
        modes += [m for m in col if m not in modes]
    u = np.zeros((len(modes), net.d_in), dtype=complex)
    for i, col in enumerate(columns):
        for m, a in col.items():
            u[modes.index(m), i] = a
    if not np.allclose(u.conj().T @ u, np.eye(net.d_in), rtol=0, atol=ISOMETRY_ATOL):
        raise TopologyError(f"network {net.name!r} is not norm preserving on its inputs")
    return u, modes


def detector_projector(net: OpticalNetwork, det: str) -> np.ndarray:
    """Input-space vector v with Pr(det clicks | psi) = |<v|psi>|^2."""
    if det not in net.detectors:
        raise KeyError(f"network {net.name!r} has no detector {det!r}")
    u, modes = transfer_matrix(net)
    v = u[modes.index(net.detectors[det])].conj()
    if np.linalg.norm(v) < 1e-12:
        raise TopologyError(f"detector {det} is unreachable from the inputs")
    return v


def detector_projectors(net: OpticalNetwork) -> dict:
    u, modes = transfer_matrix(net)
    out = {}
    for det, term in net.detectors.items():
        v = u[modes.index(term)].conj()
        if np.linalg.norm(v) < 1e-12:
            raise TopologyError(f"detector {det} is unreachable from the inputs")
        out[det] = v
    return out


def is_complete_measurement(projectors: dict, d: int, atol: float = 1e-10) -> bool:
    """Detector states are orthonormal and resolve the identity on C^d."""
    v = np.array(list(projectors.values()))
    if v.shape != (d, d):
        return False
    return bool(np.allclose(v.conj() @ v.T, np.eye(d), rtol=0, atol=atol)
                and np.allclose(v.T @ v.conj(), np.eye(d), rtol=0, atol=atol))


def phase_aligned_deviation(actual: np.ndarray, expected: np.ndarray) -> float:
    """Max amplitude difference after removing the best global phase."""
    overlap = np.vdot(actual, expected)
    phase = overlap / abs(overlap) if abs(overlap) > 1e-15 else 1.0
    return float(np.max(np.abs(actual * phase - expected)))


def verify_table(net: OpticalNetwork, angles: dict, expected: dict, atol: float = 1e-10) -> dict:
    """Compare back-propagated detector states with expected ones.

    Returns ``{detector: {"pass": bool, "deviation": float}}``.
    """
    configured = net.with_angles(angles)
    projectors = detector_projectors(configured)
    result = {}
    for det, target in expected.items():
        target = np.asarray(target, dtype=complex)
        target = target / np.linalg.norm(target)
        if det not in projectors:
            result[det] = {"pass": False, "deviation": float("inf")}
            continue
        dev = phase_aligned_deviation(projectors[det], target)
        result[det] = {"pass": dev <= atol, "deviation": dev}
    return result


def detector_outcome_map(net: OpticalNetwork, basis, atol: float = 1e-10) -> dict | None:
    """Match each detector to the basis outcome it projects on, or None if some do not match."""
    out = {}
    for det, v in detector_projectors(net).items():
        hits = [m for m in range(basis.dim) if phase_aligned_deviation(v, basis.vectors[m]) <= atol]
        if len(hits) != 1:
            return None
        out[det] = hits[0]
    return out if len(set(out.values())) == len(out) else None
