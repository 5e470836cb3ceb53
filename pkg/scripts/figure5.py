"""Parallel tempering (ladder 0.1, ..., 1.0) on the Bingham-von Mises-Fisher target.

Prints cold-chain x5 sign changes and the swap acceptance rate per rung pair.
"""

from figure4 import main

if __name__ == "__main__":
    main("figure5")
