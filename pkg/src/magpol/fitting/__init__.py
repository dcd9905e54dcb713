"""Spectrum analysis: peaks, Fano fits, ridges and avoided-crossing fits."""

from .crossing import CrossingFit, fit_avoided_crossing, seed_crossing
from .fano import FanoFit, FanoParams, fano, fit_fano, fit_trace_peaks, linewidth_stats
from .lm import FitError, LMResult, levenberg_marquardt
from .peaks import Peak, PeakList, find_peaks
from .pipeline import MapFitResult, fit_map_crossings, match_labels
from .ridges import Ridge, column_peaks, extract_ridges

__all__ = [
    "CrossingFit", "fit_avoided_crossing", "seed_crossing",
    "FanoFit", "FanoParams", "fano", "fit_fano", "fit_trace_peaks", "linewidth_stats",
    "FitError", "LMResult", "levenberg_marquardt",
    "Peak", "PeakList", "find_peaks",
    "MapFitResult", "fit_map_crossings", "match_labels",
    "Ridge", "column_peaks", "extract_ridges",
]
