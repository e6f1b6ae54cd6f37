"""Free additive convolution of multi-cut measures.

Numerics for the Cauchy-Stieltjes transform machinery of free probability:
subordination solvers for the pair convolution mu_a [+] mu_b and the
semigroup mu^[+]t, density and support reconstruction on the real line,
support-component bound checks, and random matrix validation.
"""

from freeconv.measures import (
    Atom,
    InputError,
    JacobiComponent,
    MultiCutMeasure,
    build_measure,
    from_json,
    moment,
    quantile,
    variance,
)

__version__ = "0.1.0"

__all__ = [
    "Atom",
    "InputError",
    "JacobiComponent",
    "MultiCutMeasure",
    "build_measure",
    "from_json",
    "moment",
    "quantile",
    "variance",
    "__version__",
]
