"""Prefix-evaluated adversarial sequence training.

Thin Python surface over the C++ core: corpus handling, the synthetic
oracle, generator/discriminator models, reward estimators for the
policy-gradient path, the Gumbel-softmax relaxed path, and BLEU/NLL metrics.
"""

from ._core import *  # noqa: F401,F403
from ._core import __all__ as _core_all

__all__ = list(_core_all)
