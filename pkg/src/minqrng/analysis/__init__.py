from .battery import TestResult, randomness_battery
from .efficiency import EfficiencyPoint, efficiency, efficiency_curve, expected_bits_per_class
from .histogram import HistogramFit, waiting_time_histogram

__all__ = [
    "EfficiencyPoint",
    "HistogramFit",
    "TestResult",
    "efficiency",
    "efficiency_curve",
    "expected_bits_per_class",
    "randomness_battery",
    "waiting_time_histogram",
]
