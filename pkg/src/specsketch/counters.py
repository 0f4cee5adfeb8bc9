"""Operation counters used to assert cost contracts without timing."""

from __future__ import annotations

from dataclasses import dataclass, field


@dataclass
class OpCounter:
    """Tallies the expensive primitives of a run.

    ``spmm_blocks`` counts sparse matrix times dense-block products (one
    per recurrence step). ``spmm_columns`` counts the same products
    weighted by block width, i.e. sparse matrix-vector equivalents; this
    is the quantity that scales like the number of filterings.
    ``svd_cost_units`` accumulates ``cols**3`` per economic SVD, the
    nominal cubic cost of the orthonormalization stage.
    """

    spmm_blocks: int = 0
    spmm_columns: int = 0
    svd_calls: int = 0
    svd_cost_units: int = 0
    svd_shapes: list = field(default_factory=list)

    def record_spmm(self, width: int) -> None:
        self.spmm_blocks += 1
        self.spmm_columns += width

    def record_svd(self, n_rows: int, n_cols: int) -> None:
        self.svd_calls += 1
        self.svd_cost_units += int(n_cols) ** 3
        self.svd_shapes.append((int(n_rows), int(n_cols)))

    def as_dict(self) -> dict:
        return {
            "spmm_blocks": self.spmm_blocks,
            "spmm_columns": self.spmm_columns,
            "svd_calls": self.svd_calls,
            "svd_cost_units": self.svd_cost_units,
        }
