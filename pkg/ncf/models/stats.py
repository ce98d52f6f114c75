import math
from typing import Optional

from pydantic import BaseModel, Field

from ncf.coding import DecodeStatus

Z_95 = 1.96


class TrialResult(BaseModel):
    """
    Packets forwarded in one generation by both schemes, plus the NCF decode outcome.

    Attributes:
        packets_ncf: encoded packets sent by NCF gateways
        packets_lorawan: raw packets sent by standard gateways
        decode_status: full, partial or empty
        unrecovered_count: nodes the server could not decode
        transmitted: nodes that transmitted this generation
        covered_transmitted: transmitting nodes heard by at least one gateway
    """

    packets_ncf: int = 0
    packets_lorawan: int = 0
    decode_status: DecodeStatus = DecodeStatus.EMPTY
    unrecovered_count: int = 0
    transmitted: int = 0
    covered_transmitted: int = 0


class Accumulator(BaseModel):
    """Exact integer sums over trials; merging is associative and commutative."""

    trials: int = 0
    sum_ncf: int = 0
    sumsq_ncf: int = 0
    sum_lorawan: int = 0
    sumsq_lorawan: int = 0
    full: int = 0
    partial: int = 0
    empty: int = 0
    unrecovered: int = 0

    def add(self, result: TrialResult) -> None:
        self.trials += 1
        self.sum_ncf += result.packets_ncf
        self.sumsq_ncf += result.packets_ncf ** 2
        self.sum_lorawan += result.packets_lorawan
        self.sumsq_lorawan += result.packets_lorawan ** 2
        self.unrecovered += result.unrecovered_count
        if result.decode_status == DecodeStatus.FULL:
            self.full += 1
        elif result.decode_status == DecodeStatus.PARTIAL:
            self.partial += 1
        else:
            self.empty += 1

    def merge(self, other: "Accumulator") -> "Accumulator":
        return Accumulator(**{
            name: getattr(self, name) + getattr(other, name) for name in Accumulator.model_fields
        })


def _mean_and_halfwidth(total: int, total_sq: int, trials: int):
    mean = total / trials
    if trials < 2:
        return mean, 0.0
    variance = (total_sq - total * total / trials) / (trials - 1)
    return mean, Z_95 * math.sqrt(max(variance, 0.0)) / math.sqrt(trials)


class AggregateStats(BaseModel):
    """
    Experiment-level averages with 95% normal-approximation confidence half-widths.

    savings is 1 - mean_ncf / mean_lorawan (0 when nothing was forwarded);
    decode_success_rate is the fraction of trials in which no packet was lost
    to a singular system.
    """

    trials: int
    mean_ncf: float
    mean_lorawan: float
    ci95_ncf: float
    ci95_lorawan: float
    savings: float
    decode_success_rate: float
    partial_trials: int = 0
    unrecovered_total: int = 0
    scenario: Optional[dict] = Field(default=None, description="Scenario the trials were drawn from")

    @classmethod
    def from_accumulator(cls, acc: Accumulator, scenario: Optional[dict] = None) -> "AggregateStats":
        mean_ncf, ci_ncf = _mean_and_halfwidth(acc.sum_ncf, acc.sumsq_ncf, acc.trials)
        mean_lw, ci_lw = _mean_and_halfwidth(acc.sum_lorawan, acc.sumsq_lorawan, acc.trials)
        savings = 1.0 - mean_ncf / mean_lw if mean_lw > 0 else 0.0
        return cls(
            trials=acc.trials,
            mean_ncf=mean_ncf,
            mean_lorawan=mean_lw,
            ci95_ncf=ci_ncf,
            ci95_lorawan=ci_lw,
            savings=savings,
            decode_success_rate=(acc.full + acc.empty) / acc.trials,
            partial_trials=acc.partial,
            unrecovered_total=acc.unrecovered,
            scenario=scenario,
        )
