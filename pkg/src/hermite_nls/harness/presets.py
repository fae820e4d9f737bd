"""Registry of closed-form initial data, interpolated onto the Hermite basis.

``paper_dnlse``
    ``exp(i x - (x-1)^2/2) + exp(-(x+2)^2/4)``, the DNLS test case.
``gaussian``
    ``exp(-x^2/2)``.
``shifted_gaussian``
    ``exp(-(x-1)^2/2 + 2 i x)``: displaced and moving, so it excites
    many modes at moderate M.
"""

from __future__ import annotations

import numpy as np

from ..basis import interpolate
from ..quadrature import QuadratureRule, gauss_hermite_rule

__all__ = ["PRESETS", "UnknownPresetError", "preset_values", "initial_preset"]


class UnknownPresetError(KeyError):
    pass


PRESETS = {
    "paper_dnlse": lambda x: np.exp(1j * x - (x - 1.0) ** 2 / 2.0) + np.exp(-((x + 2.0) ** 2) / 4.0),
    "gaussian": lambda x: np.exp(-(x**2) / 2.0) + 0j,
    "shifted_gaussian": lambda x: np.exp(-((x - 1.0) ** 2) / 2.0 + 2j * x),
}


def preset_values(name: str, x) -> np.ndarray:
    try:
        fn = PRESETS[name]
    except KeyError:
        raise UnknownPresetError(f"unknown initial preset {name!r}; known: {', '.join(sorted(PRESETS))}") from None
    return fn(np.asarray(x, dtype=float))


def initial_preset(name: str, M: int, rule: QuadratureRule | None = None) -> np.ndarray:
    rule = rule or gauss_hermite_rule(M)
    return interpolate(preset_values(name, rule.nodes), rule)
