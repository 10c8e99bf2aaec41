"""Per-frequency bookkeeping shared by the two inversion drivers.

A frequency march produces one record per wavenumber: the iterate the
solver settled on (a curve or a medium), its data residual, how many
inner iterations ran, why the inner loop stopped, and any error metrics
computed against a supplied ground truth.  Failures are recorded rather
than raised so a march can continue with the previous iterate.
"""

from __future__ import annotations

from dataclasses import dataclass, field

__all__ = ["FrequencyRecord", "ReconstructionTrace"]


@dataclass
class FrequencyRecord:
    k: float
    iterate: object
    residual: float
    rel_residual: float
    n_iter: int
    stop: str
    steps: list = field(default_factory=list)
    n_modes: int | None = None
    eps_gamma: float | None = None
    eps_q: float | None = None
    eps_qb: float | None = None
    failure: str | None = None


@dataclass
class ReconstructionTrace:
    records: list[FrequencyRecord] = field(default_factory=list)

    @property
    def frequencies(self):
        return [r.k for r in self.records]

    @property
    def final(self):
        """Last successfully updated iterate (records carry the previous
        iterate through failed frequencies, so the last record is it)."""
        if not self.records:
            raise ValueError("empty trace")
        return self.records[-1].iterate

    def __iter__(self):
        return iter(self.records)

    def __len__(self):
        return len(self.records)
