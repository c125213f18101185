"""Analytic overlap families alpha_j = <A^j phi, phi> with their known closed forms.

Each factory returns an :class:`OverlapModel`.  ``known_facts`` entries carry a
``kind`` tag: ``reference`` for closed forms of the model itself, ``derived``
for values obtained from them, ``trivial`` for limiting cases.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

from .lattice import CoeffLattice, as_index, lp_norm
from .symbol import SymbolFunction

SQRT2 = math.sqrt(2.0)


@dataclass(frozen=True)
class KnownFact:
    value: object
    kind: str
    note: str = ""


@dataclass(frozen=True)
class OverlapModel:
    name: str
    dimension: int
    parameters: dict
    formula: Callable = field(repr=False, compare=False)
    natural_radius: int = 1
    known_facts: dict = field(default_factory=dict, repr=False, compare=False)

    def overlap_at(self, index) -> complex:
        return complex(self.formula(as_index(index, self.dimension)))

    def lattice(self, radius: int | None = None) -> CoeffLattice:
        """Materialise overlaps on [-radius, radius]^D (default: the natural radius)."""
        radius = self.natural_radius if radius is None else radius
        return CoeffLattice.from_function(self.dimension, radius, self.formula)

    def symbol(self, radius: int | None = None) -> SymbolFunction:
        return SymbolFunction(self.lattice(radius))


def _tail_radius(rate: float, tail: float = 1e-18) -> int:
    # smallest R with rate**R below tail
    return max(1, math.ceil(math.log(tail) / math.log(rate)))


def box_model(a: float) -> OverlapModel:
    """Translates of the indicator of [0, a) by integer steps."""
    if not 0 < a <= 2:
        raise ValueError(f"box model needs 0 < a <= 2, got {a}")

    def formula(idx):
        (j,) = idx
        if j == 0:
            return a
        if a > 1 and abs(j) == 1:
            return a - 1
        return 0.0

    facts = {
        "symbol": KnownFact(f"{a} + {2 * (a - 1) if a > 1 else 0} cos p", "reference"),
    }
    if a <= 1:
        facts["dual"] = KnownFact({0: 1 / a}, "reference", "c_l = delta_l0 / a")
    else:
        facts["symbol_min"] = KnownFact(2 - a, "reference", "minimum at p = pi")
        facts["symbol_argmin"] = KnownFact(math.pi, "reference")
    if a == 1.5:
        facts["dual_l2_squared"] = KnownFact(12 / (5 * math.sqrt(5)), "reference")
    if a == 2:
        facts["verdict"] = KnownFact("has_zero", "reference", "symbol vanishes at p = pi")
    return OverlapModel("box", 1, {"a": a}, formula, 1, facts)


def geometric_model(r: float) -> OverlapModel:
    """alpha_j = r^|j|; the dual has only three nonzero coefficients."""
    if not 0 <= r < 1:
        raise ValueError(f"geometric model needs 0 <= r < 1, got {r}")

    def formula(idx):
        (j,) = idx
        return r ** abs(j) if r > 0 else float(j == 0)

    radius = 1 if r == 0 else _tail_radius(r)
    denom = 1 - r * r
    facts = {
        "symbol": KnownFact(f"(1 - r^2) / (1 + r^2 - 2 r cos p), r={r}", "reference"),
        "dual": KnownFact({0: (1 + r * r) / denom, 1: -r / denom, -1: -r / denom}, "reference"),
        "symbol_min": KnownFact((1 - r) / (1 + r), "derived", "value at p = pi"),
        "symbol_max": KnownFact((1 + r) / (1 - r), "derived", "value at p = 0"),
    }
    return OverlapModel("geometric", 1, {"r": r}, formula, radius, facts)


def dilation_model() -> OverlapModel:
    """Dyadic dilates of the indicator of [0, 1): alpha_j = 2^(-|j|/2)."""
    base = geometric_model(1 / SQRT2)
    facts = {
        "symbol": KnownFact("1 / (3 - 2^(3/2) cos p)", "reference"),
        "symbol_min": KnownFact(1 / (3 + 2 * SQRT2), "reference", "~0.1716 at p = pi"),
        "symbol_max": KnownFact(1 / (3 - 2 * SQRT2), "reference", "~5.8284 at p = 0"),
        "dual": KnownFact({0: 3.0, 1: -SQRT2, -1: -SQRT2}, "reference"),
        "dual_l2_squared": KnownFact(13.0, "derived", "9 + 2 + 2 from the dual coefficients"),
    }

    def formula(idx):
        (j,) = idx
        return 2.0 ** (-abs(j) / 2)

    return OverlapModel("dilation", 1, {}, formula, base.natural_radius, facts)


def coherent_overlap(L: int, n1: int, n2: int) -> float:
    sign = -1.0 if (L * n1 * n2) % 2 else 1.0
    return sign * math.exp(-0.5 * math.pi * L * (n1 * n1 + n2 * n2))


def io_bound(L: int, tail_tol: float = 1e-18) -> float:
    """Majorant (sum_m exp(-pi L m^2 / 2))^2 - 1 of the off-centre part of the coherent symbol."""
    if L < 1:
        raise ValueError("L must be >= 1")
    total, m = 1.0, 1
    while True:
        term = 2 * math.exp(-0.5 * math.pi * L * m * m)
        total += term
        if term < tail_tol:
            break
        m += 1
    return total * total - 1


def coherent_model(L: int) -> OverlapModel:
    """Von Neumann lattice coherent states with a^2 = 2 pi L (D = 2)."""
    L = int(L)
    if L < 1:
        raise ValueError(f"coherent model needs integer L >= 1, got {L}")

    def formula(idx):
        return coherent_overlap(L, *idx)

    # exp(-pi L R^2 / 2) < 1e-17 for R = 6 and every L >= 1
    facts = {
        "io_bound": KnownFact(io_bound(L), "derived", "(sum_m exp(-pi L m^2/2))^2 - 1"),
    }
    facts["overlap_energy"] = KnownFact(sum(math.exp(-math.pi * L * m * m) for m in range(-8, 9)) ** 2,
                                        "derived", "theta_3(0, exp(-pi L))^2")
    return OverlapModel("coherent", 2, {"L": L}, formula, 6, facts)


def overlap_energy(model: OverlapModel, radius: int | None = None) -> float:
    """sum_l |alpha_l|^2 over the window."""
    return lp_norm(model.lattice(radius), 2) ** 2


CATALOG = {
    "box": {"factory": box_model, "params": {"a": {"type": "float", "range": "0 < a <= 2"}}},
    "dilation": {"factory": dilation_model, "params": {}},
    "geometric": {"factory": geometric_model, "params": {"r": {"type": "float", "range": "0 <= r < 1"}}},
    "coherent": {"factory": coherent_model, "params": {"L": {"type": "int", "range": "L >= 1"}}},
}


def make_model(name: str, **params) -> OverlapModel:
    """Instantiate a catalog model, ignoring parameters that are ``None``."""
    if name not in CATALOG:
        raise ValueError(f"unknown model {name!r}; choose from {sorted(CATALOG)}")
    spec = CATALOG[name]
    kwargs = {}
    for key in spec["params"]:
        if params.get(key) is None:
            raise ValueError(f"model {name!r} requires parameter --{key}")
        kwargs[key] = params[key]
    return spec["factory"](**kwargs)
