"""fribackend: protocol server and fixture trainer for the frimap scanner.

Speaks the line-delimited JSON classification protocol over stdio or
TCP, wraps torch models (or the deterministic echo model), and trains
the small CIFAR-style CNN whose weights ship as frimap fixtures.
"""

__version__ = "0.1.0"
