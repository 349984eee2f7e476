"""Benchmark systems wired for every toolkit operation.

Benchmarks are addressable by name:

    ball-beam        ball on an actuated beam, 2 DOF, 1 input
    vtol-nonsmooth   planar VTOL aircraft, 3 DOF, 2 inputs, non-smooth V_d
    vtol-two-phase   same plant under the two-phase scheme (saturated
                     primary law, then the energy-shaping law)
"""

from __future__ import annotations

from .ballbeam import BallBeamBenchmark, BallBeamParams, make_ball_beam
from .vtol import VtolBenchmark, VtolParams, make_vtol

BENCHMARK_NAMES = ("ball-beam", "vtol-nonsmooth", "vtol-two-phase")


def get_benchmark(name: str, **overrides):
    """Instantiate a benchmark by CLI name, with parameter overrides."""
    if name == "ball-beam":
        return make_ball_beam(BallBeamParams(**overrides))
    if name == "vtol-nonsmooth":
        return make_vtol(VtolParams(**overrides), two_phase=False)
    if name == "vtol-two-phase":
        # the secondary design carries a larger M_d(1, 1) so the phase-1
        # drift momentum enters phase 2 with a modest H_d(t0)
        overrides.setdefault("m11_scale", 8.0)
        return make_vtol(VtolParams(**overrides), two_phase=True)
    raise KeyError(f"unknown benchmark {name!r}; choose from {BENCHMARK_NAMES}")


__all__ = [
    "BENCHMARK_NAMES",
    "BallBeamBenchmark",
    "BallBeamParams",
    "VtolBenchmark",
    "VtolParams",
    "get_benchmark",
    "make_ball_beam",
    "make_vtol",
]
