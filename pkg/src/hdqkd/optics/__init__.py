"""Jones-calculus model of the cascaded multi-outcome path analysers."""
from hdqkd.optics.elements import BD, HWP, PBS, Element, Mirror, hwp_matrix
from hdqkd.optics.network import (
    OpticalNetwork,
    detector_outcome_map,
    detector_projector,
    detector_projectors,
    is_complete_measurement,
    load_network,
    propagate,
    transfer_matrix,
    verify_table,
)
from hdqkd.optics.tables import load_golden_tables, verify_golden_tables

__all__ = [
    "BD", "HWP", "PBS", "Element", "Mirror", "OpticalNetwork", "detector_outcome_map",
    "detector_projector", "detector_projectors", "hwp_matrix", "is_complete_measurement",
    "load_golden_tables", "load_network", "propagate", "transfer_matrix", "verify_table",
    "verify_golden_tables",
]
