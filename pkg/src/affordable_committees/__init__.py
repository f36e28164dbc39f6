"""Approval-based committee rules, completions, payment checks and guarantee verification."""

from .core import (
    Committee,
    CommitteeError,
    GuaranteeReport,
    Instance,
    InstanceParseError,
    InvalidCommitteeError,
    ParameterError,
    ResourceLimitError,
    UndefinedRatioError,
    coverage,
    load_instance,
    max_unselected_approvals,
    representation_ratio,
    save_instance,
    social_welfare,
    utilitarian_ratio,
)
from .axioms import check_ejr, check_ejr_plus, check_jr, maximin_support, representativeness_profile
from .completions import (
    complete_av,
    complete_cc,
    complete_mms,
    complete_seq_cc,
    hybrid_c,
    hybrid_sqrt,
    mes_perturbation,
    mes_vary_budget,
)
from .harness import BOUNDS, Pipeline, SweepConfig, evaluate, load_config, run_sweep
from .payments import PaymentSystem, is_affordable, is_b_priceable, is_priceable, verify
from .rules import av, cc_exact, gjcr, greedy_ejr, mes, mms_rule, seq_cc, seq_phragmen

__version__ = "0.1.0"
