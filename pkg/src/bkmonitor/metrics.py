"""Divergences and error functionals between distributions.

All logarithms are natural, so divergences are in nats.
"""

from __future__ import annotations

import math

import numpy as np

from .core import Distribution

LN2 = math.log(2.0)


def _pair(a, b) -> tuple[np.ndarray, np.ndarray]:
    if isinstance(a, Distribution) and isinstance(b, Distribution) and a.space != b.space:
        raise ValueError(f"distributions live on different spaces: {a.space.names} vs {b.space.names}")
    x = np.asarray(a, dtype=float).reshape(-1)
    y = np.asarray(b, dtype=float).reshape(-1)
    if x.shape != y.shape:
        raise ValueError(f"distributions have different sizes: {x.size} vs {y.size}")
    return x, y


def kl_divergence(phi, psi) -> float:
    """Relative entropy ``D[phi || psi]`` in nats.

    Uses ``0 ln(0/x) = 0`` and returns ``inf`` when ``phi`` puts mass where
    ``psi`` has none. Accepts :class:`Distribution` objects or plain arrays.
    """
    p, q = _pair(phi, psi)
    on = p > 0
    if np.any(q[on] == 0):
        return math.inf
    d = float(np.sum(p[on] * np.log(p[on] / q[on])))
    return max(d, 0.0)


def l1_distance(phi, psi) -> float:
    p, q = _pair(phi, psi)
    return float(np.abs(p - q).sum())


def max_log_ratio(sigma_hat, sigma_tilde) -> float:
    """Largest ``ln(sigma_hat[i] / sigma_tilde[i])`` over states where sigma_hat > 0."""
    p, q = _pair(sigma_hat, sigma_tilde)
    on = p > 0
    if not np.any(on):
        return -math.inf
    if np.any(q[on] == 0):
        return math.inf
    return float(np.max(np.log(p[on] / q[on])))


def incurred_error(sigma_exact, sigma_hat, sigma_tilde) -> float:
    """Error incurred by replacing ``sigma_hat`` with ``sigma_tilde``, measured against ``sigma_exact``.

    This is ``D[sigma || sigma_tilde] - D[sigma || sigma_hat]``. Infinite
    divergences propagate (``inf - inf`` gives ``nan``).
    """
    _pair(sigma_exact, sigma_hat)
    _pair(sigma_exact, sigma_tilde)
    return kl_divergence(sigma_exact, sigma_tilde) - kl_divergence(sigma_exact, sigma_hat)


def l1_bound_from_kl(kl: float, reading: str = "bits") -> float:
    """Upper bound of the form ``sqrt(2 ln 2 * D)`` on the L1 distance.

    ``kl`` is in nats, as returned by :func:`kl_divergence`. Under the
    ``"bits"`` reading ``D`` is ``kl`` converted to bits, which makes this
    Pinsker's inequality ``sqrt(2 * kl)``. The ``"nats"`` reading plugs
    ``kl`` in directly; that bound is tighter and fails near ``phi == psi``,
    e.g. ``(0.6, 0.4)`` against ``(0.5, 0.5)``.
    """
    if reading == "bits":
        d = kl / LN2
    elif reading == "nats":
        d = kl
    else:
        raise ValueError(f"reading must be 'bits' or 'nats', not {reading!r}")
    return math.sqrt(2.0 * LN2 * d)


def random_distribution(rng: np.random.Generator, n: int, alpha: float | None = None) -> np.ndarray:
    """Strictly positive random distribution of length ``n``.

    ``alpha`` is the symmetric Dirichlet concentration; when omitted it is drawn
    log-uniformly from [0.2, 5] so that both peaked and flat vectors appear.
    """
    if alpha is None:
        alpha = math.exp(rng.uniform(math.log(0.2), math.log(5.0)))
    p = rng.dirichlet(np.full(n, alpha))
    p = np.maximum(p, 1e-12)
    return p / p.sum()


def sweep_metrics(trials: int = 1000, seed: int = 0) -> dict[str, dict]:
    """Randomized checks of the metric inequalities.

    Returns a mapping from property name to ``{"trials", "failures", "holds"}``.
    The L1/KL inequality is checked under both the nats and bits readings;
    only the bits reading counts toward overall success (see README).
    """
    rng = np.random.default_rng(seed)
    counts = {k: 0 for k in ("kl_nonnegative", "l1_kl_bits", "l1_kl_nats",
                             "projection_monotone", "incurred_le_maxlog")}
    for _ in range(trials):
        n = int(rng.integers(2, 7))
        p, q = random_distribution(rng, n), random_distribution(rng, n)
        d = kl_divergence(p, q)
        counts["kl_nonnegative"] += not (d >= 0 and kl_divergence(p, p) == 0)
        l1 = l1_distance(p, q)
        counts["l1_kl_bits"] += l1 > l1_bound_from_kl(d, "bits") + 1e-9
        counts["l1_kl_nats"] += l1 > l1_bound_from_kl(d, "nats") + 1e-9

        a, b = int(rng.integers(2, 4)), int(rng.integers(2, 4))
        jp, jq = random_distribution(rng, a * b), random_distribution(rng, a * b)
        mp, mq = jp.reshape(a, b).sum(axis=1), jq.reshape(a, b).sum(axis=1)
        counts["projection_monotone"] += kl_divergence(mp, mq) > kl_divergence(jp, jq) + 1e-12

        s, sh, st = (random_distribution(rng, 3) for _ in range(3))
        counts["incurred_le_maxlog"] += incurred_error(s, sh, st) > max_log_ratio(sh, st) + 1e-12
    return {k: {"trials": trials, "failures": v, "holds": v == 0} for k, v in counts.items()}
