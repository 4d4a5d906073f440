"""Run-wide tolerances and size caps.

Everything here is configuration: operations take these as keyword
arguments with the defaults below, and the CLI builds a :class:`RunConfig`
from its flags.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field

TAU_ALG = 1e-9
TAU_SDP = 1e-6

CAP_POWER = 100_000
CAP_POLY = 10_000_000
CAP_SDP = 400
CAP_CONSISTENCY_DOMAIN = 12

SEED_ENV = "MINIONLAB_SEED"


def default_seed() -> int:
    raw = os.environ.get(SEED_ENV)
    if raw is None or raw.strip() == "":
        return 0
    return int(raw)


@dataclass(frozen=True)
class RunConfig:
    tol: float = TAU_ALG
    sdp_tol: float = TAU_SDP
    cap_power: int = CAP_POWER
    cap_poly: int = CAP_POLY
    cap_sdp: int = CAP_SDP
    seed: int = field(default_factory=default_seed)
    output_format: str = "json"

    def __post_init__(self):
        if not (self.tol > 0 and self.sdp_tol > 0):
            raise ValueError("tolerances must be positive")
        if min(self.cap_power, self.cap_poly, self.cap_sdp) < 1:
            raise ValueError("size caps must be positive")
        if self.output_format not in ("json", "text"):
            raise ValueError(f"unknown output format {self.output_format!r}")
