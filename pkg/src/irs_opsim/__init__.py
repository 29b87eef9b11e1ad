"""Simulator and closed-form companion for IRS-assisted opportunistic scheduling.

Subpackage map:

- ``core``       units, geometry, link budgets, seeded RNG streams, config
- ``channel``    fading channel generators (narrowband / Gauss-Markov /
                 steering / wideband) and the tap-to-subcarrier DFT
- ``irs``        reflection-phase strategies and composite channels
- ``sched``      user-selection policies and instantaneous rates
- ``analytic``   scaling laws, hypoexponential / extreme-value machinery
- ``experiment`` scenario sweeps, Monte Carlo aggregation, CSV output
- ``cli``        the ``irs-opsim`` command-line entry point
"""

__version__ = "0.1.0"
