"""Polluted bootstrap percolation laboratory for the 3d integer lattice."""

__version__ = "0.1.0"

from .dynamics import (CLOSED, EMPTY, OCCUPIED, Configuration, EvolutionResult,
                       Rule, SiteState, evolve, evolve_internal, final_clusters)
from .lattice import BoxUnion, Cuboid, Vertex, l1_norm, linf_norm
from .sampler import (PlantedField, RandomField, SampleParams, sample_big_obstacles,
                      sample_iid, sample_two_stage)
from .shell import ShellCandidate, explore_shell, verify_shell
from .stego import ScaleParams, Stegosaurus, build_structure, verify_structure

__all__ = [
    "BoxUnion", "CLOSED", "Configuration", "Cuboid", "EMPTY", "EvolutionResult",
    "OCCUPIED", "PlantedField", "RandomField", "Rule", "SampleParams",
    "ScaleParams", "ShellCandidate", "SiteState", "Stegosaurus", "Vertex",
    "build_structure", "evolve", "evolve_internal", "explore_shell",
    "final_clusters", "l1_norm", "linf_norm", "sample_big_obstacles",
    "sample_iid", "sample_two_stage", "verify_shell", "verify_structure",
]
