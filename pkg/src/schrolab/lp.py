""" Dyadic Littlewood-Paley blocks in the spectral variable lambda^2

The low block is psi~(s) = eta(s); block k >= 1 is psi(4^-k s) with
psi(s) = eta(s) - eta(4s). The sum telescopes to eta(4^-K s), which is 1
for s <= 4^K.
"""

import logging
import math
from dataclasses import dataclass

import numpy as np

from .exceptions import ConfigurationError

log = logging.getLogger(__name__)


def _sigma(u):
    u = np.asarray(u, dtype=float)
    out = np.zeros_like(u)
    pos = u > 0
    out[pos] = np.exp(-1 / u[pos])
    return out


def eta(s):
    """ Smooth cutoff: 1 on [0, 1], 0 on [4, inf), exp(-1/u) blend between

    Accepts scalars or arrays; scalars come back as floats.
    """
    scalar = np.ndim(s) == 0
    s = np.asarray(s, dtype=float)
    u1 = (s - 1) / 3
    u2 = 1 - u1
    a, b = _sigma(u1), _sigma(u2)
    with np.errstate(invalid='ignore', divide='ignore'):
        blend = np.where(a + b > 0, b / np.where(a + b > 0, a + b, 1), 0.0)
    out = np.where(s <= 1, 1.0, np.where(s >= 4, 0.0, blend))
    return float(out) if scalar else out


def psi(s):
    return eta(s) - eta(4 * np.asarray(s, dtype=float))


def block_multiplier(k, s):
    """ psi~(s) for k == 0, psi(4^-k s) otherwise """
    s = np.asarray(s, dtype=float)
    if k == 0:
        return eta(s)
    return psi(s * 4.0 ** -k)


@dataclass(frozen=True)
class LPBlockSet:
    """ Blocks k = 0..K; block 0 is the low-frequency piece """
    K: int

    def __post_init__(self):
        if self.K < 0:
            raise ConfigurationError(f"block count must be >= 0, got {self.K}")

    @classmethod
    def covering(cls, max_eigenvalue):
        """ The smallest set whose partition covers [0, max_eigenvalue] """
        if max_eigenvalue <= 1:
            return cls(0)
        return cls(max(0, math.ceil(math.log(max_eigenvalue, 4) - 1e-12)))

    def __len__(self):
        return self.K + 1

    def __iter__(self):
        return iter(range(self.K + 1))

    def multiplier(self, k, s):
        return block_multiplier(k, s)

    def support(self, k):
        """ Closed interval of lambda^2 outside which block k vanishes """
        if k == 0:
            return (0.0, 4.0)
        return (4.0 ** (k - 1), 4.0 ** (k + 1))

    def partition(self, s):
        """ Sum of every block multiplier; 1 on [0, 4^K] """
        return sum(self.multiplier(k, s) for k in self)


def apply_block(f, k):
    """ Multiply coefficients by the block-k multiplier of lambda_j^2 """
    if k < 0:
        raise ConfigurationError(f"block index must be >= 0, got {k}")
    return f.with_coeffs(f.coeffs * block_multiplier(k, f.eigenvalues))


def dyadic_index(h):
    """ k with h = 2^-k, k >= 1; anything else is a configuration error """
    if not 0 < h <= 1:
        raise ConfigurationError(f"scale h must be in (0, 1], got {h}")
    k = -math.log2(h)
    nearest = round(k)
    if nearest < 1 or abs(k - nearest) > 1e-9:
        raise ConfigurationError(f"scale h={h} is not 2^-k for an integer "
                                 f"k >= 1")
    return int(nearest)


def block_for_h(f, h):
    """ psi(h^2 Delta) f for dyadic h """
    return apply_block(f, dyadic_index(h))


def decompose(f, K=None):
    """ All blocks of f, low block first """
    blocks = LPBlockSet.covering(f.table.eigenvalues.max(initial=0)) \
        if K is None else LPBlockSet(K)
    return [apply_block(f, k) for k in blocks]


def overlap_energy(f, K=None):
    """ sum_k ||block_k f||^2 / ||f||^2; lies in [1/2, 1] for nonzero f

    At most two multipliers are nonzero at any s, and for two numbers in
    [0, 1] summing to 1 the sum of squares lies in [1/2, 1].
    """
    total = f.l2_norm() ** 2
    if total == 0:
        return 0.0
    return sum(b.l2_norm() ** 2 for b in decompose(f, K)) / total
