"""Render stability-study figures from fermistab CSV/JSON artifacts.

This package only draws: every curve traces back to record columns or to
fits already stored in the run summary; no physics is recomputed here.
"""

__version__ = "0.1.0"
