import math
from enum import Enum
from typing import Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator

from ncf.config import settings

DEFAULT_GATEWAYS_RATIO = 0.05
MAX_SEED = 2**64 - 1


class Mode(str, Enum):
    """How many gateways each node reaches: uniform over 1..m (RAND) or exactly w (EQUAL)."""

    RAND = "rand"
    EQUAL = "equal"


def gateways_for(n: int, ratio: float = DEFAULT_GATEWAYS_RATIO) -> int:
    """Gateway count from the ratio rule: nearest integer (halves round up), at least 1."""
    return max(1, math.floor(ratio * n + 0.5))


class ScenarioConfig(BaseModel):
    """
    Topology and traffic parameters of one simulated network.

    Attributes:
        n: number of sensor nodes
        m: number of gateways; derived from gateways_ratio * n when not given
        gateways_ratio: ratio used to derive m (defaults to 5% of the nodes)
        pt: per-generation transmission probability of every node
        mode: RAND or EQUAL connectivity
        w: connectivity factor, the gateways each node reaches under EQUAL
        payload_len: payload length L in field symbols (alias "L")
        gf_exp: field exponent k of GF(2^k)
        seed: root seed of the experiment's random streams
    """

    model_config = ConfigDict(populate_by_name=True)

    n: int = Field(ge=1, description="Number of sensor nodes")
    m: Optional[int] = Field(default=None, ge=1, description="Number of gateways")
    gateways_ratio: Optional[float] = Field(default=None, gt=0, description="Gateways per node when m is derived")
    pt: float = Field(ge=0.0, le=1.0, description="Transmission probability")
    mode: Mode = Field(default=Mode.RAND, description="Connectivity mode")
    w: Optional[int] = Field(default=None, ge=1, description="Connectivity factor (EQUAL only)")
    payload_len: int = Field(default_factory=lambda: settings.PAYLOAD_SYMBOLS, ge=1, alias="L")
    gf_exp: int = Field(default_factory=lambda: settings.GF_EXP, ge=2, le=8)
    seed: int = Field(default_factory=lambda: settings.SEED, ge=0, le=MAX_SEED)

    @model_validator(mode="after")
    def _resolve_gateways(self) -> "ScenarioConfig":
        if self.m is not None and self.gateways_ratio is not None:
            # A resolved config keeps its ratio; anything else is a conflict.
            if self.m != gateways_for(self.n, self.gateways_ratio):
                raise ValueError("Give either m or gateways_ratio, not both")
        if self.m is None:
            ratio = self.gateways_ratio if self.gateways_ratio is not None else DEFAULT_GATEWAYS_RATIO
            self.m = gateways_for(self.n, ratio)
        if self.mode is Mode.EQUAL:
            if self.w is None:
                raise ValueError("EQUAL connectivity requires w")
            if self.w > self.m:
                raise ValueError(f"Connectivity factor w={self.w} exceeds gateway count m={self.m}")
        return self
