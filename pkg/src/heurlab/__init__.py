"""heurlab: adversarial-instance laboratory for four classical heuristics.

Exact reference solvers, published lower-bound constructions, and two
instance-search baselines (annealed local search and an LLM-driven evolve
loop over a restricted DSL), tied together by a CLI.
"""

__version__ = "0.1.0"
