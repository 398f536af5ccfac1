import random

import pytest
from hypothesis import settings

from abstensor.core import Label, TensorSymbol

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")


def lab(name: str, t: str = "A") -> Label:
    return Label(name, t)


def sym(name: str, lower, upper, t: str = "A") -> TensorSymbol:
    """Symbol with every label of type ``t``; labels given as strings or Labels."""
    conv = lambda ls: tuple(l if isinstance(l, Label) else Label(l, t) for l in ls)  # noqa: E731
    return TensorSymbol(name, conv(lower), conv(upper))


@pytest.fixture
def rng():
    return random.Random(20261015)
