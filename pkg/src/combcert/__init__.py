"""combcert: numerical certification of comb calculus, twirled-operator
domination, and low-Kraus-rank channel separation constructions."""

__version__ = "0.1.0"
