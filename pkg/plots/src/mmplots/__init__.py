"""Figure and table rendering for market-maker evaluation results.

Consumes the evaluator's CSV outputs (results tables and per-episode dumps);
produces kernel-density wealth figures and markdown renditions of the
results tables. No dependency on the simulator package itself.
"""

__version__ = "0.1.0"
