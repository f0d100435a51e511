"""Match-quality metrics and multi-method rank statistics."""

from .cddiagram import cd_diagram, render_cd_svg
from .metrics import PRF, micro_average, per_type_prf, prf
from .ranking import (
    NEMENYI_Q,
    FriedmanResult,
    RankReport,
    average_ranks,
    chi2_sf,
    friedman_test,
    nemenyi_cd,
    nemenyi_groups,
    nemenyi_q,
    rank_matrix,
    rank_report,
    read_score_csv,
)

__all__ = [
    "NEMENYI_Q",
    "PRF",
    "FriedmanResult",
    "RankReport",
    "average_ranks",
    "cd_diagram",
    "chi2_sf",
    "friedman_test",
    "micro_average",
    "nemenyi_cd",
    "nemenyi_groups",
    "nemenyi_q",
    "per_type_prf",
    "prf",
    "rank_matrix",
    "rank_report",
    "read_score_csv",
    "render_cd_svg",
]
