"""Temporal accumulation of column sums and spatial combination into MAC results.

A column accumulates its per-cycle tree sums over the N activation cycles,
negating the sign-bit cycle, and weighting cycle t by 2**t (LSB first).
The four column results of a group then pass through a two-stage shift-add
tree whose shift amounts come from `GroupConfig`; 6/7-bit weights route the
fourth column around the group tree onto an independent cross-group path.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

from .errors import ArityMismatch, ConfigMismatch, LengthMismatch, UnsupportedPrecision
from .numeric import GroupConfig

ACCUMULATOR_BITS = 18  # modeled accumulator width, sign included


@dataclass(frozen=True)
class ColumnResult:
    """One column's accumulator value after all activation cycles."""

    value: int
    hw_width_ok: bool = True


@dataclass(frozen=True)
class GroupResult:
    """Combined outputs of one group; `independent_feed` is the raw fourth-column
    result routed off-group in 6/7-bit mode."""

    outputs: tuple[int, ...]
    independent_feed: Optional[int] = None


def accumulate_serial(
    tree_totals: Sequence[int], sf_flags: Sequence[bool]
) -> ColumnResult:
    """Accumulate per-cycle column sums, negating the sign-bit cycle's term."""
    if len(tree_totals) != len(sf_flags):
        raise LengthMismatch(
            f"{len(tree_totals)} totals but {len(sf_flags)} sign flags"
        )
    value = 0
    for t, (total, sf) in enumerate(zip(tree_totals, sf_flags)):
        value += (-total if sf else total) << t
    return ColumnResult(value, abs(value) < (1 << (ACCUMULATOR_BITS - 1)))


def combine_group(
    col_results: Sequence[ColumnResult], cfg: GroupConfig
) -> GroupResult:
    """Two-stage shift-add combine of a group's four column results.

    Stage 1 pairs (c0, c1) and (c2, c3); stage 2 joins the pairs when the
    precision spans the whole group.  A stage shift of zero between columns
    belonging to distinct weights means bypass, handled by the output count.
    """
    if len(col_results) != 4:
        raise ConfigMismatch(
            f"a group combines exactly 4 column results, got {len(col_results)}"
        )
    c0, c1, c2, c3 = (r.value for r in col_results)
    feed = None
    if cfg.weight_precision in (6, 7):
        feed = c3  # reclaimed by the independent path; zeroed in the group tree
        c3 = 0
    t_low = c0 + (c1 << cfg.shifter1)
    t_high = c2 + (c3 << cfg.shifter0)
    if cfg.outputs_per_group == 1:
        outputs: tuple[int, ...] = (t_low + (t_high << cfg.shifter2),)
    elif cfg.outputs_per_group == 2:
        outputs = (t_low, t_high)
    else:
        outputs = (c0, c1, c2, c3)
    return GroupResult(outputs, feed)


def combine_independent(feeds: Sequence[int], weight_precision: int) -> int:
    """Sum the reclaimed fourth-column results of three consecutive groups.

    `feeds` must be ordered by ascending chunk significance; the path adds
    one extra weight's MAC result in 6/7-bit operation.
    """
    if weight_precision not in (6, 7):
        raise UnsupportedPrecision(
            f"independent paths exist only for 6/7-bit weights, got {weight_precision}"
        )
    if len(feeds) != 3:
        raise ArityMismatch(f"independent paths combine exactly 3 feeds, got {len(feeds)}")
    return feeds[0] + (feeds[1] << 2) + (feeds[2] << 4)
