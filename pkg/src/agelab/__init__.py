"""Age-of-information under attack: gossip simulation, interference games and
slotted scheduling with a blocking adversary."""

__version__ = "0.1.0"
