"""colwave: regularized wave equations over epsilon ladders.

Solvers for 1D transport/wave problems whose discontinuous coefficients are
replaced by mollified families c_eps, plus a detector that estimates where
derivative magnitudes grow with 1/eps (the singular rays) and closed-form
reference solutions to validate against.
"""

__version__ = "0.1.0"
