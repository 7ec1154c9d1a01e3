"""Finitary fairness for regular model checking of parameterized probabilistic systems."""

__version__ = "0.1.0"
