"""Model-side adapter for the effpred pipeline.

Produces per-example gradient dumps (GRDX) and greedy-decode confidence
records (JSONL) from a small torch model, so the analysis toolkit can be
exercised end-to-end. Communication with the analysis side happens only
through those file formats and its CLI.
"""

__version__ = "0.1.0"
