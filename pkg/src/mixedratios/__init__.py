"""Averages of mixed ratios of characteristic polynomials over U(N).

Modules:

* :mod:`.partitions` -- partitions, diagrams, ribbons
* :mod:`.symfunc` -- symmetric polynomials, Littlewood-Schur functions, Cauchy products
* :mod:`.mn` -- Murnaghan-Nakayama expansions and power-sum operators
* :mod:`.moments` -- main terms (ratios, log-derivatives, recipe, explicit formula)
* :mod:`.haar` -- Haar Monte-Carlo oracle
* :mod:`.cli` -- command line
"""

__version__ = "0.1.0"
