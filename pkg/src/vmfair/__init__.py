"""Von Mises style frequency probability, randomness and fairness audits on 0-1 streams."""

__version__ = "0.1.0"
