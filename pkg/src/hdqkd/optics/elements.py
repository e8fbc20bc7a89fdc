"""Linear optical elements acting on (path, polarisation) modes.

A mode state is a dict ``{(path, "H" | "V"): amplitude}``. Every element maps
modes to modes linearly; an element that would merge two occupied input modes
into one output mode is not an isometry and raises :class:`TopologyError`.
"""
from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field

import numpy as np

from hdqkd.errors import ConfigError, TopologyError

POLS = ("H", "V")
AMP_TOL = 1e-14


def hwp_matrix(theta: float) -> np.ndarray:
    """Jones matrix of a half-wave plate with fast axis at ``theta`` degrees, {H, V} basis."""
    t = np.deg2rad(2.0 * theta)
    c, s = np.cos(t), np.sin(t)
    # snap exact zeros so 45 and 22.5 degree plates give clean matrices
    c, s = (0.0 if abs(c) < 1e-15 else c), (0.0 if abs(s) < 1e-15 else s)
    return np.array([[c, s], [s, -c]])


def _route(state: dict, mapping) -> dict:
    """Apply ``mapping(mode) -> [(mode', coeff), ...]`` with collision detection."""
    out = defaultdict(complex)
    sources = {}
    for mode, amp in state.items():
        if abs(amp) <= AMP_TOL:
            continue
        for target, coeff in mapping(mode):
            prev = sources.setdefault(target, mode)
            if prev != mode and prev[0] != mode[0]:
                raise TopologyError(f"modes {prev} and {mode} both routed onto {target}")
            out[target] += coeff * amp
    return dict(out)


@dataclass
class Element:
    id: str

    def apply(self, state: dict) -> dict:
        raise NotImplementedError

    def to_dict(self) -> dict:
        raise NotImplementedError


@dataclass
class HWP(Element):
    angle: float = 0.0
    paths: tuple = ()

    def apply(self, state):
        m = hwp_matrix(self.angle)
        paths = set(self.paths)

        def mapping(mode):
            path, pol = mode
            if path not in paths:
                return [(mode, 1.0)]
            col = POLS.index(pol)
            return [((path, p), m[row, col]) for row, p in enumerate(POLS) if m[row, col] != 0]

        return _route(state, mapping)

    def to_dict(self):
        return {"kind": "HWP", "id": self.id, "angle": self.angle, "paths": list(self.paths)}


@dataclass
class BD(Element):
    """Beam displacer: the ``displaced`` polarisation moves by ``offset`` paths."""

    paths: tuple = ()
    displaced: str = "V"
    offset: int = 1

    def apply(self, state):
        paths = set(self.paths)

        def mapping(mode):
            path, pol = mode
            if path in paths and pol == self.displaced:
                return [((path + self.offset, pol), 1.0)]
            return [(mode, 1.0)]

        return _route(state, mapping)

    def to_dict(self):
        return {"kind": "BD", "id": self.id, "paths": list(self.paths),
                "displaced": self.displaced, "offset": self.offset}


@dataclass
class PBS(Element):
    """Polarising beam splitter: ``routes[path] = (H output path, V output path)``."""

    routes: dict = field(default_factory=dict)

    def apply(self, state):
        def mapping(mode):
            path, pol = mode
            if path not in self.routes:
                return [(mode, 1.0)]
            return [((self.routes[path][POLS.index(pol)], pol), 1.0)]

        return _route(state, mapping)

    def to_dict(self):
        return {"kind": "PBS", "id": self.id,
                "routes": {str(k): list(v) for k, v in self.routes.items()}}


@dataclass
class Mirror(Element):
    """Path relabelling (``mapping[old] = new``); polarisation untouched."""

    mapping: dict = field(default_factory=dict)

    def apply(self, state):
        return _route(state, lambda mode: [((self.mapping.get(mode[0], mode[0]), mode[1]), 1.0)])

    def to_dict(self):
        return {"kind": "MIRROR", "id": self.id,
                "mapping": {str(k): v for k, v in self.mapping.items()}}


def element_from_dict(data: dict, where: str = "") -> Element:
    kind = str(data.get("kind", "")).upper()
    try:
        if kind == "HWP":
            return HWP(data["id"], float(data.get("angle", 0.0)), tuple(int(p) for p in data["paths"]))
        if kind == "BD":
            displaced = data.get("displaced", "V")
            if displaced not in POLS:
                raise ConfigError(f"{where}: BD 'displaced' must be H or V, got {displaced!r}")
            return BD(data["id"], tuple(int(p) for p in data["paths"]), displaced, int(data.get("offset", 1)))
        if kind == "PBS":
            routes = {int(k): tuple(int(x) for x in v) for k, v in data["routes"].items()}
            return PBS(data["id"], routes)
        if kind == "MIRROR":
            return Mirror(data["id"], {int(k): int(v) for k, v in data["mapping"].items()})
    except KeyError as exc:
        raise ConfigError(f"{where}: {kind or 'element'} is missing field {exc.args[0]!r}") from None
    raise ConfigError(f"{where}: unknown element kind {data.get('kind')!r}")
