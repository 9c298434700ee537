"""Separating surfaces, parameter-space cells and workspace-topology ids.

Seven surfaces partition the (d3, d4, r2) space into cells of constant
workspace topology.  At fixed (d3, r2) each surface is a d4 threshold, so
a cell is named by the pair of threshold labels bounding its d4 interval.
The mapping cell -> (domain, topology id, counts) is not hardcoded from
any figure: a calibration run measures every cell with the numeric cusp,
node and census oracles and ships the result as a versioned JSON table
(see calibrate.py).  Topology ids are anchored to four named reference
manipulators; a topology is the combination (cusps, nodes, quaternary,
cavity), which the calibration verifies to take exactly nine values.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass
from importlib import resources

import numpy as np

from .model import Params

INSTABILITY_BAND = 1e-6
TABLE_RESOURCE = "topology_cells.json"


@dataclass(frozen=True)
class SurfaceValues:
    """d4 thresholds of the separating surfaces at given (d3, r2).

    c3 exists only for d3 > 1 and c4 only for d3 < 1; c1 can lose its real
    branch for extreme (d3, r2).  Undefined thresholds are None.
    """

    c1: float | None
    c2: float
    c3: float | None
    c4: float | None
    e1: float
    e2: float
    e3: float

    def defined(self) -> dict[str, float]:
        return {
            k: v
            for k, v in (
                ("c1", self.c1),
                ("c2", self.c2),
                ("c3", self.c3),
                ("c4", self.c4),
                ("e1", self.e1),
                ("e2", self.e2),
                ("e3", self.e3),
            )
            if v is not None
        }


def surfaces(d3: float, r2: float) -> SurfaceValues:
    """Closed-form separating-surface thresholds.

    With A = sqrt((d3+1)^2 + r2^2) and B = sqrt((d3-1)^2 + r2^2):
    c1 = sqrt((s - (s^2 - d3^2 + r2^2)/(A*B))/2), s = d3^2 + r2^2
    c2 = d3*A/(1+d3);  c3 = d3*B/(d3-1) (d3>1);  c4 = d3*B/(1-d3) (d3<1)
    e1 = (A-B)/2;  e2 = d3;  e3 = (A+B)/2.
    The c1 radicand grouping was confirmed against the numeric cusp-count
    boundary to ~1e-13 over a spread of (d3, r2).
    """
    if d3 <= 0 or r2 <= 0:
        raise ValueError("d3 and r2 must be positive")
    A = math.hypot(d3 + 1.0, r2)
    B = math.hypot(d3 - 1.0, r2)
    s = d3 * d3 + r2 * r2
    rad = 0.5 * (s - (s * s - d3 * d3 + r2 * r2) / (A * B))
    c1 = math.sqrt(rad) if rad > 0.0 else None
    c2 = d3 / (1.0 + d3) * A
    c3 = d3 / (d3 - 1.0) * B if d3 > 1.0 else None
    c4 = d3 / (1.0 - d3) * B if d3 < 1.0 else None
    return SurfaceValues(c1, c2, c3, c4, 0.5 * (A - B), d3, 0.5 * (A + B))


@dataclass(frozen=True)
class TopologyReport:
    domain: int
    wt: int
    n_cusps: int
    n_nodes: int
    n_aspects: int
    quaternary: bool
    has_cavity: bool
    generic: bool
    census: tuple[int, int, int]  # (void regions, 2-solution, 4-solution)
    unstable: bool

    def as_dict(self) -> dict:
        return {
            "domain": self.domain,
            "wt": self.wt,
            "n_cusps": self.n_cusps,
            "n_nodes": self.n_nodes,
            "n_aspects": self.n_aspects,
            "quaternary": self.quaternary,
            "has_cavity": self.has_cavity,
            "generic": self.generic,
            "census": list(self.census),
            "unstable": self.unstable,
        }


def cell_key(p: Params) -> tuple[str, str, str]:
    """(d3 side, lower bounding label, upper bounding label) of p's cell."""
    sv = surfaces(p.d3, p.r2)
    side = "lo" if p.d3 < 1.0 else ("hi" if p.d3 > 1.0 else "eq")
    items = sorted(sv.defined().items(), key=lambda kv: kv[1])
    below = "bot"
    above = "top"
    for name, val in items:
        if val <= p.d4:
            below = name
        else:
            above = name
            break
    return side, below, above


def surface_distance(p: Params) -> float:
    """Distance in d4 from p to the nearest defined separating surface."""
    sv = surfaces(p.d3, p.r2)
    return min(abs(p.d4 - v) for v in sv.defined().values())


def is_unstable(p: Params) -> bool:
    """True within the instability band of any separating surface."""
    return surface_distance(p) < INSTABILITY_BAND


class UnknownCellError(KeyError):
    """Raised when a cell is missing from the calibration table."""


_TABLE_CACHE: dict | None = None


def load_table() -> dict:
    """The shipped calibration table, cached after first load."""
    global _TABLE_CACHE
    if _TABLE_CACHE is None:
        text = (
            resources.files("ortho3r").joinpath(f"data/{TABLE_RESOURCE}").read_text()
        )
        raw = json.loads(text)
        cells = {}
        for entry in raw["cells"]:
            cells[tuple(entry["key"])] = entry
        _TABLE_CACHE = {"meta": raw["meta"], "cells": cells}
    return _TABLE_CACHE


def _cell_entry(p: Params) -> dict:
    table = load_table()
    key = cell_key(p)
    try:
        return table["cells"][key]
    except KeyError:
        raise UnknownCellError(
            f"cell {key} for (d3={p.d3}, d4={p.d4}, r2={p.r2}) is not in the "
            "calibration table; re-run ortho3r.calibrate over a wider range"
        ) from None


def classify_domain(p: Params) -> tuple[int, int]:
    """(domain 1..5, cusp count) of p from the calibrated cell table."""
    if is_unstable(p):
        warnings.warn(
            "geometry within the instability band of a separating surface; "
            "domain assignment is unreliable here",
            stacklevel=2,
        )
    entry = _cell_entry(p)
    return entry["domain"], entry["cusps"]


def region_census(
    p: Params, grid: int = 400, n_theta: int = 2048
) -> tuple[int, int, int, bool]:
    """(void, 2-solution, 4-solution region counts, toroidal-cavity flag).

    Connected components of the posture-count map over the half-section
    rectangle [0, reach] x [-reach, reach].  A void region is an enclosed
    0-count component (the unreachable exterior, found by flood fill from
    the rectangle border, never counts); it is a toroidal cavity only when
    it stays clear of the rho = 0 axis.
    """
    if grid < 200:
        raise ValueError(f"grid must be >= 200, got {grid}")
    from scipy import ndimage

    from .ik import count_grid

    rmax = p.reach()
    d = rmax / grid
    rho = (np.arange(grid) + 0.5) * d
    zs = (np.arange(-grid, grid) + 0.5) * d
    counts = count_grid(p, rho, zs, n_theta)
    counts = np.minimum(counts, 4)
    counts -= counts % 2  # odd counts only on singular curves; snap down
    lab0, n0 = ndimage.label(counts == 0)
    border_labels = set(
        np.unique(
            np.concatenate([lab0[0, :], lab0[-1, :], lab0[:, 0], lab0[:, -1]])
        )
    ) - {0}
    n_void = 0
    has_cavity = False
    for k in range(1, n0 + 1):
        if k in border_labels:
            continue
        n_void += 1
        rows = np.nonzero(lab0 == k)[0]
        if rows.min() > 0:  # clear of the axis column: a toroidal void
            has_cavity = True
    _, n2 = ndimage.label(counts == 2)
    _, n4 = ndimage.label(counts == 4)
    return n_void, n2, n4, has_cavity


def classify_topology(p: Params, grid: int = 400) -> TopologyReport:
    """Full topology report: calibrated ids plus live census and aspects."""
    from .singular import count_aspects, is_generic

    entry = _cell_entry(p)
    n_void, n2, n4, cavity_live = region_census(p, grid)
    return TopologyReport(
        domain=entry["domain"],
        wt=entry["wt"],
        n_cusps=entry["cusps"],
        n_nodes=entry["nodes"],
        n_aspects=count_aspects(p),
        quaternary=entry["quaternary"],
        has_cavity=cavity_live,
        generic=is_generic(p),
        census=(n_void, n2, n4),
        unstable=is_unstable(p),
    )
