"""Circular histogram data models."""

import math

from pydantic import BaseModel, ConfigDict, Field, model_validator

DEFAULT_BINS = 200


class CircularHistogram(BaseModel):
    """
    Binned distribution of a circular quantity.

    Moments come from the running resultant vector, never from the bins, so
    the mean and variance do not depend on the binning.
    """

    model_config = ConfigDict(
        frozen=True,
        json_schema_extra={
            "example": {
                "counts": [0, 3, 5, 2],
                "low": -math.pi,
                "high": math.pi,
                "n_total": 11,
                "n_excluded": 1,
                "resultant_re": 7.2,
                "resultant_im": -1.3,
            }
        },
    )

    counts: list[int] = Field(description="Sample counts per bin")
    low: float = Field(default=-math.pi, description="Lower edge of the display range (open)")
    high: float = Field(default=math.pi, description="Upper edge of the display range (closed)")
    n_total: int = Field(default=0, ge=0, description="Samples seen, including exclusions")
    n_excluded: int = Field(default=0, ge=0, description="Excluded (singular) samples")
    resultant_re: float = Field(default=0.0, description="Sum of cos(phi)")
    resultant_im: float = Field(default=0.0, description="Sum of sin(phi)")

    @model_validator(mode="after")
    def check_bookkeeping(self) -> "CircularHistogram":
        if not self.counts:
            raise ValueError("histogram needs at least one bin")
        if self.high <= self.low:
            raise ValueError("high must exceed low")
        if sum(self.counts) + self.n_excluded != self.n_total:
            raise ValueError("bin counts plus exclusions must equal the total")
        return self

    @classmethod
    def empty(
        cls, n_bins: int = DEFAULT_BINS, low: float = -math.pi, high: float = math.pi
    ) -> "CircularHistogram":
        return cls(counts=[0] * n_bins, low=low, high=high)

    @property
    def n_bins(self) -> int:
        return len(self.counts)

    @property
    def n_samples(self) -> int:
        """Samples that landed in bins."""
        return self.n_total - self.n_excluded

    @property
    def bin_width(self) -> float:
        return (self.high - self.low) / self.n_bins

    @property
    def full_circle(self) -> bool:
        return math.isclose(self.high - self.low, 2 * math.pi)

    @property
    def mean_phase(self) -> float:
        """Argument of the resultant vector (see modules.circular_stats)."""
        return math.atan2(self.resultant_im, self.resultant_re)

    @property
    def circ_variance(self) -> float:
        """One minus the mean resultant length."""
        if self.n_samples == 0:
            return 1.0
        length = math.hypot(self.resultant_re, self.resultant_im) / self.n_samples
        return min(1.0, max(0.0, 1.0 - length))


class Peak(BaseModel):
    """A local maximum of a histogram."""

    model_config = ConfigDict(frozen=True)

    center: float = Field(description="Bin center of the maximum (rad)")
    mass: float = Field(ge=0, le=1, description="Probability mass attributed to the peak")
    height: float = Field(ge=0, le=1, description="Probability in the peak bin")
    prominence: float = Field(ge=0, description="Prominence of the peak in probability units")
