"""Data models for the spreading simulator."""

from .deployment import Deployment, LargeScaleGain
from .channel import TapSet, LinkChannel, LinkArray
from .codebook import Codebook
from .grid import Mode, BlockGrid, Assignment
from .modem import Constellation
from .receiver import ChannelEstimate, Decision, EqualizedBlock
from .records import Estimate, DelayProfile, TrialRecord
from .results import ResultRow, ResultTable, metric_key, split_metric_key

__all__ = [
    "Deployment",
    "LargeScaleGain",
    "TapSet",
    "LinkChannel",
    "LinkArray",
    "Codebook",
    "Mode",
    "BlockGrid",
    "Assignment",
    "Constellation",
    "ChannelEstimate",
    "Decision",
    "EqualizedBlock",
    "Estimate",
    "DelayProfile",
    "TrialRecord",
    "ResultRow",
    "ResultTable",
    "metric_key",
    "split_metric_key",
]
