"""State dwell-time distributions.

Three families:

- "geometric": support {1, 2, ...}, leave probability 1/mean per frame.
  Memoryless, so the hidden process collapses to a plain Markov chain with
  self-loop 1 - 1/mean; this is what makes the exact oracle cheap.
- "negative_binomial": sum of r unit-shifted geometrics, support
  {r, r+1, ...}, mean r/q with q = r/mean. Default, r=3.
- "pmf": explicit bounded per-phoneme pmfs over support {1..D}. Lets the
  exact oracle and the particle filter share one bounded-dwell definition.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError
from .phonemes import SIL

FAMILIES = ("negative_binomial", "geometric", "pmf")


def _check_pmf(name, pmf):
    vec = np.asarray(pmf, dtype=float)
    if vec.ndim != 1 or vec.size == 0 or (vec < 0).any() or abs(vec.sum() - 1.0) > 1e-9:
        raise ConfigError(f"dwell pmf for {name!r} is not a distribution")
    return vec


@dataclass(frozen=True)
class DwellSpec:
    family: str = "negative_binomial"
    mean: float = 10.0
    sil_mean: float = 20.0
    means: dict = field(default_factory=dict)  # per-phoneme overrides
    r: int = 3
    pmfs: dict = field(default_factory=dict)   # per-phoneme pmf vectors; "default" key allowed

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ConfigError(f"unknown dwell family {self.family!r}")
        if self.family == "pmf":
            if not self.pmfs:
                raise ConfigError("pmf dwell family needs pmf vectors")
            for name in self.pmfs:
                _check_pmf(name, self.pmfs[name])
            return
        for name, m in [("mean", self.mean), ("sil_mean", self.sil_mean), *self.means.items()]:
            if m < 1:
                raise ConfigError(f"dwell mean for {name} must be >= 1, got {m}")
            if self.family == "negative_binomial" and m < self.r:
                raise ConfigError(
                    f"negative-binomial dwell mean for {name} must be >= r={self.r}, got {m}"
                )
        if self.family == "negative_binomial" and self.r < 1:
            raise ConfigError("negative-binomial r must be >= 1")

    def mean_for(self, symbol):
        if symbol in self.means:
            return self.means[symbol]
        if symbol == SIL:
            return self.sil_mean
        return self.mean

    def pmf_for(self, symbol):
        if self.family == "geometric":
            return None
        if self.family == "pmf":
            pmf = self.pmfs.get(symbol, self.pmfs.get("default"))
            if pmf is None:
                raise ConfigError(f"no dwell pmf for {symbol!r}")
            return _check_pmf(symbol, pmf)
        raise ConfigError("negative-binomial dwell has unbounded support")


def _nb_hazard_row(r: int, q: float, width: int):
    """Leave probabilities h(k) = P(d = k | d >= k) for d = r + NB(r, q)."""
    m = width - r + 1
    pmf = np.empty(m)
    pmf[0] = q ** r
    for j in range(1, m):
        pmf[j] = pmf[j - 1] * (j + r - 1) / j * (1.0 - q)
    tail = max(1.0 - pmf.sum(), 0.0)
    sf = np.cumsum(pmf[::-1])[::-1] + tail
    row = np.zeros(width + 1)
    row[r:] = np.clip(pmf / sf, 0.0, 1.0)
    return row


class DwellSampler:
    """Vectorized dwell draws and hazards for one inventory.

    Draws are made per particle in index order from the caller's Generator,
    so sequences are reproducible bit for bit. The hazard view gives the
    same dwell law one survival-conditioned frame at a time, P(d = k) =
    h(k) prod_{j<k} (1 - h(j)), which lets a filter flip an independent
    leave coin per particle per frame instead of committing to a counter
    drawn at state entry.
    """

    def __init__(self, spec: DwellSpec, inventory):
        self.spec = spec
        self.inventory = inventory
        n = len(inventory)
        if spec.family == "pmf":
            pmfs = [spec.pmf_for(sym) for sym in inventory.symbols]
            width = max(p.size for p in pmfs)
            cdf = np.zeros((n, width))
            for i, p in enumerate(pmfs):
                cdf[i, : p.size] = np.cumsum(p)
                cdf[i, p.size - 1:] = 1.0  # exact top so a draw never lands past the support
            # offset rows so one flat searchsorted handles mixed symbols
            self._flat_cdf = (cdf + np.arange(n)[:, None]).ravel()
            self._width = width
            # h(k) = pmf[k] / sf[k]; column 0 is elapsed == 0, never a leave
            self._hazard = np.ones((n, width + 1))
            self._hazard[:, 0] = 0.0
            for i, p in enumerate(pmfs):
                sf = np.cumsum(p[::-1])[::-1]
                self._hazard[i, 1: p.size + 1] = np.clip(p / np.maximum(sf, 1e-300), 0.0, 1.0)
                self._hazard[i, p.size] = 1.0  # exact top of the support
        else:
            means = np.array([spec.mean_for(sym) for sym in inventory.symbols], dtype=float)
            if spec.family == "geometric":
                self._p = 1.0 / means
                # memoryless: constant hazard from the first emitted frame on
                self._hazard = np.column_stack([np.zeros(n), self._p])
            else:
                self._q = spec.r / means
                r = spec.r
                std = np.sqrt(r * (1.0 - self._q)) / self._q
                width = int(np.ceil((means + 40.0 * std).max())) + 64
                self._hazard = np.empty((n, width + 1))
                for i in range(n):
                    self._hazard[i] = _nb_hazard_row(r, float(self._q[i]), width)
                # beyond the table the hazard has converged to q from below
                self._hazard[:, -1] = np.maximum(self._hazard[:, -1], self._q)

    def draw(self, rng, symbol_idx):
        """Dwell frames (>= 1) for each inventory index in symbol_idx."""
        symbol_idx = np.asarray(symbol_idx)
        n = symbol_idx.size
        if n == 0:
            return np.zeros(0, dtype=np.int64)
        if self.spec.family == "geometric":
            return rng.geometric(self._p[symbol_idx]).astype(np.int64)
        if self.spec.family == "negative_binomial":
            q = self._q[symbol_idx]
            return rng.negative_binomial(self.spec.r, q).astype(np.int64) + self.spec.r
        u = rng.random(n)
        pos = np.searchsorted(self._flat_cdf, symbol_idx + u, side="right")
        return (pos - symbol_idx * self._width + 1).astype(np.int64)

    def leave_prob(self, symbol_idx, elapsed):
        """P(leave before the next frame | symbol, frames emitted so far).

        Zero at elapsed == 0: a state always emits at least once.
        """
        idx = np.minimum(elapsed, self._hazard.shape[1] - 1)
        return self._hazard[symbol_idx, idx]
