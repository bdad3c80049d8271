"""fedcast: directional forecasting of federal-funds-rate decisions.

A library plus CLI that fuses macroeconomic indicators with text
features from central-bank communications to classify each policy
meeting as Raise, Hold, or Lower, with from-scratch models, resampling,
cross-validated evaluation, and exact tree-ensemble explanations.
"""

__version__ = "0.1.0"
