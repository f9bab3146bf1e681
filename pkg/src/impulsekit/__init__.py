"""impulsekit: mouse-cursor impulsivity toolkit.

Turns pointer-trajectory logs from stop-signal and delay-discounting tasks
into motion features, SSRT and discounting estimates, and the statistical
analyses built on them; ships a seeded simulator that provides ground truth
for every estimator and a collection server for the live task runner.
"""

__version__ = "0.1.0"
