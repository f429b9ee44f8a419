"""Construction-count instrumentation.

Counting is switched on by temporarily pointing a module's constructor
aliases at subclasses whose constructor bumps a counter, so engines pay
nothing when it is off.  The swap is process-global: use it from one thread.
"""

from contextlib import contextmanager
from dataclasses import dataclass


@dataclass
class Counters:
    nodes: int = 0
    bottom_splits: int = 0


def _counted(cls, counters):
    init = cls.__init__

    def __init__(self, *args):
        counters.nodes += 1
        init(self, *args)

    return type(cls.__name__, (cls,), {"__slots__": (), "__init__": __init__,
                                       "__module__": cls.__module__,
                                       "__qualname__": cls.__qualname__})


@contextmanager
def swap_counted(namespace, aliases, counters):
    """Point each constructor alias in ``namespace`` at a counting subclass.

    ``aliases`` maps alias name to the real class; type tests keep using the
    real classes, which the counting subclasses inherit from.
    """
    saved = {name: namespace[name] for name in aliases}
    for name, cls in aliases.items():
        namespace[name] = _counted(cls, counters)
    try:
        yield counters
    finally:
        namespace.update(saved)
