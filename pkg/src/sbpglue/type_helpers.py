"""
Class decorators shared by the scenario packages.
"""

import inspect
from typing import Callable, Type, TypeVar

S = TypeVar("S", bound=type)


def ensure_all_methods_implemented(base: type) -> Callable[[S], S]:
    """
    Rejects, at import time, a scenario class that does not subclass ``base`` or leaves one
    of ``base.__scenario_hooks__`` unimplemented or with a different signature.
    """

    def check(scenario: S) -> S:
        if not issubclass(scenario, base):
            raise TypeError(f"{scenario.__name__} must subclass {base.__name__}")
        for name in getattr(base, "__scenario_hooks__", ()):
            hook = scenario.__dict__.get(name)
            if not callable(hook):
                raise NotImplementedError(f"{scenario.__name__} does not implement the scenario hook '{name}'")
            expected = inspect.signature(getattr(base, name)).parameters.keys()
            if inspect.signature(hook).parameters.keys() != expected:
                raise TypeError(f"{scenario.__name__}.{name} must take ({', '.join(expected)})")
        return scenario

    return check
