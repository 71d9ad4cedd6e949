"""Secrecy-rate maximization for multi-relay SWIPT amplify-and-forward networks."""
from .model import (
    ChannelSet,
    NetworkGeometry,
    QuadraticForms,
    Solution,
    SystemParams,
    assemble_quadratic_forms,
    constraint_residuals,
    dbm_to_watts,
    draw_channels,
    first_hop_eve_sinr,
    harvested_power,
    rate_destination,
    rate_eavesdropper,
    relay_tx_power,
    secrecy_rate,
)
from .optimizer import (
    PenaltyConfig,
    SolveTrace,
    armijo_search,
    block_sweep,
    grad_blocks,
    kkt_residual,
    penalty_objective,
    solve_pa,
)
from .baseline import SafConfig, saf_gain, saf_search

__version__ = "0.1.0"
