"""Control of an n-qubit register through a single probe qubit.

Synthesises probe-only programs that measure two-valued functions of the
register's ``S_z`` eigenvalue, checks them against exact simulation, and
compiles gates and movable-probe schedules from them.
"""

__version__ = "0.1.0"
