"""gridsched: day-ahead energy scheduling toolkit.

Subpackages cover building thermal dynamics, device models, scenario
generation and reduction, a generic LP/MILP layer with an embedded
solver, the joint EV+HVAC scheduler, the microgrid bidding scheduler,
and a command-line front end.
"""

__version__ = "0.1.0"
