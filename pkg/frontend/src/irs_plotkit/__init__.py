"""Figure rendering for irs-opsim result tables.

Reads the experiment CSV schema (`sweep,comparator,mean_rate,stderr,
n_trials,seed`) plus the sibling manifest when present, and renders one
PNG per table.  It never recomputes any science: everything drawn comes
from the CSV.
"""

from .render import PlotSpec, ResultData, SchemaError, load_results, render

__version__ = "0.1.0"

__all__ = ["PlotSpec", "ResultData", "SchemaError", "load_results", "render"]
