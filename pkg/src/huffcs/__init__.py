"""Adaptive compressed sampling of sparse vectors with Huffman-planned binary queries."""

from .model import (
    ExplicitModel,
    MarginalModel,
    ModelError,
    SupportModel,
    load_model,
    model_from_spec,
    worked_example_model,
)
from .noise import NoiseSpec, predict, predict_single_error, threshold_for
from .recovery import (
    CancellationError,
    MeasurementOracle,
    RecoveryResult,
    exact_expected_cost,
    find_one,
    recover,
)
from .sim import CampaignConfig, SignalGenerator, fit_trend, generate_signal, run_campaign
from .tree import HuffmanTree, TreeNode, build_tree, node_costs, sampling_vector, special_nodes

__version__ = "0.1.0"
