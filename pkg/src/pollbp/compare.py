"""Executable form of the two-dynamics comparison on a blocking set.

Given a finite set Z with states on it, run the threshold-3 dynamics with
everything outside Z occupied and the threshold-2 dynamics with everything
outside Z closed (same rule variant, same initial states on Z).  Domination
holds when every vertex occupied by the first dynamics at some round is
occupied by the second dynamics no later.

The guarantee needs three hypotheses on the configuration: (i) every vertex
of Z with exposure >= 3 is closed, (ii) no initially occupied vertex lies
within l-inf distance m of a vertex with exposure >= 2, and (iii) the second
dynamics' final clusters have l-inf diameter at most m/2.  Exposure means
coordinate exposure for the modified variant and neighbor exposure for the
standard one.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .dynamics import (CLOSED, OCCUPIED, Configuration, Rule, evolve,
                       final_clusters, linf_diameter, region_bbox,
                       region_vertices)
from .lattice import Vertex, linf_norm, sub
from .stego import exposure_grids


@dataclass
class HypothesisReport:
    exposed_unclosed: list = field(default_factory=list)
    occupied_near_exposed: list = field(default_factory=list)
    cluster_diameter_max: int = 0
    cluster_bound_ok: bool = True

    @property
    def ok(self) -> bool:
        return (not self.exposed_unclosed and not self.occupied_near_exposed
                and self.cluster_bound_ok)


@dataclass
class DominationReport:
    holds: bool
    first_violation: tuple | None  # (vertex, round)
    hypothesis_report: HypothesisReport
    cluster_diameter_max: int


def _exposure_map(region) -> dict[Vertex, tuple[int, int]]:
    """(coordinate exposure, neighbor exposure) for every region vertex."""
    bbox = region_bbox(region)
    from .dynamics import _region_mask  # shared rasterizer
    mask = _region_mask(region, bbox)
    eta, etp = exposure_grids(mask)
    out = {}
    ox, oy, oz = bbox.lo
    for x, y, z in np.argwhere(mask):
        out[(int(x) + ox, int(y) + oy, int(z) + oz)] = (
            int(eta[x, y, z]), int(etp[x, y, z]))
    return out


def check_hypotheses(region, occupied: frozenset, closed: frozenset,
                     variant: str, m: int,
                     final_second: frozenset | None = None) -> HypothesisReport:
    idx = 1 if variant == "standard" else 0
    exposure = _exposure_map(region)
    exposed_unclosed = sorted(v for v, e in exposure.items()
                              if e[idx] >= 3 and v not in closed)
    hot = [v for v, e in exposure.items() if e[idx] >= 2]
    near = sorted(v for v in occupied
                  if any(linf_norm(sub(v, w)) <= m for w in hot))
    report = HypothesisReport(exposed_unclosed, near)
    if final_second is not None:
        diam = max((linf_diameter(c) for c in _components(final_second)), default=0)
        report.cluster_diameter_max = diam
        report.cluster_bound_ok = 2 * diam <= m
    return report


def _components(vertices: frozenset):
    from .dynamics import connected_components
    return connected_components(vertices)


def check_domination(region, occupied: frozenset, closed: frozenset, *,
                     variant: str = "modified", m: int,
                     r_high: int = 3, r_low: int = 2,
                     engine: str = "auto") -> DominationReport:
    """Run both dynamics and verify timewise domination plus the hypotheses."""
    first = evolve(Configuration(region, occupied, closed, OCCUPIED),
                   Rule(variant, r_high), engine=engine)
    second = evolve(Configuration(region, occupied, closed, CLOSED),
                    Rule(variant, r_low), engine=engine)

    violations = []
    t2 = second.occupation_time
    for v, t1 in first.occupation_time.items():
        tv = t2.get(v)
        if tv is None or tv > t1:
            violations.append((t1, v))
    first_violation = None
    if violations:
        t, v = min(violations)
        first_violation = (v, t)

    clusters = final_clusters(second)
    diam = max((linf_diameter(c) for c in clusters), default=0)
    hypo = check_hypotheses(region, occupied, closed, variant, m)
    hypo.cluster_diameter_max = diam
    hypo.cluster_bound_ok = 2 * diam <= m

    return DominationReport(
        holds=not violations,
        first_violation=first_violation,
        hypothesis_report=hypo,
        cluster_diameter_max=diam,
    )


def enforce_hypotheses(region, occupied: frozenset, closed: frozenset,
                       variant: str, m: int) -> tuple[frozenset, frozenset]:
    """Post-process states so hypotheses (i) and (ii) hold by construction:
    close every fully exposed vertex, then drop occupied vertices within
    l-inf m of any exposure >= 2 vertex."""
    idx = 1 if variant == "standard" else 0
    exposure = _exposure_map(region)
    closed = frozenset(closed | {v for v, e in exposure.items() if e[idx] >= 3})
    occupied = frozenset(occupied - closed)
    hot = [v for v, e in exposure.items() if e[idx] >= 2]
    occupied = frozenset(v for v in occupied
                         if not any(linf_norm(sub(v, w)) <= m for w in hot))
    return occupied, closed
