"""Finitely-squeezed GKP noise: shift statistics, flip decisions and soft information.

Everything here works in the shift-error picture. A GKP qubit suffers a
Gaussian displacement; the ideal error-correction block measures the
displacement modulo sqrt(pi) and undoes the most likely shift, leaving a
logical flip whenever the true shift sat in an odd coset.
"""

from __future__ import annotations

import enum
import functools
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp
from scipy.stats import norm

SQRT_PI = math.sqrt(math.pi)

#: Lattice translates kept in the one-dimensional sums (grown for wide Gaussians).
MIN_TERMS = 8
#: Half-width of the 2D candidate window, after reducing modulo 2*sqrt(pi).
PAIR_WINDOW = 5


def squeezing_db_to_variance(squeezing_db: float) -> float:
    """Shift variance sigma^2 of a GKP state with the given squeezing in dB."""
    if not math.isfinite(squeezing_db):
        raise ValueError(f"squeezing must be finite, got {squeezing_db!r}")
    return 10.0 ** (-squeezing_db / 10.0) / 2.0


def variance_to_squeezing_db(variance: float) -> float:
    _check_variance(variance)
    return 10.0 * math.log10(1.0 / (2.0 * variance))


def _check_variance(variance) -> None:
    v = np.asarray(variance, dtype=float)
    if not np.all(np.isfinite(v)) or np.any(v <= 0):
        raise ValueError(f"variance must be positive and finite, got {variance!r}")


def _n_terms(variance: float) -> int:
    # enough translates to cover 12 standard deviations
    sigma = math.sqrt(variance)
    return max(MIN_TERMS, math.ceil(12.0 * sigma / SQRT_PI) + 1)


@dataclass(frozen=True)
class GkpParams:
    """Squeezing of the GKP ancillas, the only noise source in the model."""

    squeezing_db: float

    def __post_init__(self):
        squeezing_db_to_variance(self.squeezing_db)

    @classmethod
    def from_variance(cls, variance: float) -> "GkpParams":
        return cls(variance_to_squeezing_db(variance))

    @property
    def base_variance(self) -> float:
        return squeezing_db_to_variance(self.squeezing_db)


class Mechanism(enum.IntEnum):
    IDLE = 0
    PREPARE = 1
    MEASURE = 2
    CNOT_CONTROL = 3
    CNOT_TARGET = 4

    @property
    def label(self) -> str:
        return _LABELS[self]

    def effective_variance(self, params: GkpParams, quadrature: str = "q") -> float:
        """Variance of the shift entering the GKP-EC block at this kind of location.

        For CNOT legs this is the marginal of the correlated pair; the pair
        itself is sampled jointly.
        """
        s2 = params.base_variance
        if self in (Mechanism.IDLE, Mechanism.PREPARE):
            return 2.0 * s2
        if self is Mechanism.MEASURE:
            return s2
        cov = pair_covariance(quadrature, s2)
        return float(cov[0, 0] if self is Mechanism.CNOT_CONTROL else cov[1, 1])


_LABELS = {
    Mechanism.IDLE: "Idle",
    Mechanism.PREPARE: "Prepare",
    Mechanism.MEASURE: "Measure",
    Mechanism.CNOT_CONTROL: "CnotControl",
    Mechanism.CNOT_TARGET: "CnotTarget",
}


# ---------------------------------------------------------------------------
# single-mode statistics


def sample_shift(variance: float, rng: np.random.Generator, size=None):
    _check_variance(variance)
    return rng.normal(0.0, math.sqrt(variance), size=size)


def canonical_residue(shift):
    """Shift modulo sqrt(pi), mapped into [0, sqrt(pi))."""
    r = np.mod(np.asarray(shift, dtype=float), SQRT_PI)
    # np.mod can round up to the period for tiny negative inputs
    return np.where(r >= SQRT_PI, 0.0, r)


def is_logical_flip(shift):
    """1 where the nearest multiple of sqrt(pi) is odd.

    Boundaries are half-open: shifts of exactly sqrt(pi)/2 (mod 2 sqrt(pi))
    count as flips, 3 sqrt(pi)/2 does not.
    """
    r = np.mod(np.asarray(shift, dtype=float), 2.0 * SQRT_PI)
    out = ((r >= 0.5 * SQRT_PI) & (r < 1.5 * SQRT_PI)).astype(np.uint8)
    return out if out.ndim else int(out)


def prior_flip_probability(variance: float) -> float:
    """Probability that a N(0, variance) shift lands in an odd coset."""
    _check_variance(variance)
    sigma = math.sqrt(variance)
    n = np.arange(_n_terms(variance) + 1)
    lo = (4 * n + 1) / 2.0 * SQRT_PI / sigma
    hi = (4 * n + 3) / 2.0 * SQRT_PI / sigma
    # the flip region is symmetric about zero; survival functions keep tail precision
    return float(2.0 * np.sum(norm.sf(lo) - norm.sf(hi)))


def posterior_flip_probability(residue, variance: float):
    """Probability of a logical flip given the measured shift modulo sqrt(pi).

    The residue is taken relative to the nearest multiple of sqrt(pi), i.e.
    relative to the correction the GKP-EC block actually applies, so the
    result is at most 1/2 and is symmetric under ``r -> sqrt(pi) - r``.
    """
    _check_variance(variance)
    r = canonical_residue(residue)
    delta = np.minimum(r, SQRT_PI - r)
    n = np.arange(-_n_terms(variance), _n_terms(variance) + 1)
    d = np.asarray(delta)[..., None]
    log_all = -((d - n * SQRT_PI) ** 2) / (2.0 * variance)
    log_odd = -((d - (2 * n + 1) * SQRT_PI) ** 2) / (2.0 * variance)
    out = np.exp(logsumexp(log_odd, axis=-1) - logsumexp(log_all, axis=-1))
    return float(out) if out.ndim == 0 else out


# ---------------------------------------------------------------------------
# correlated CNOT shifts


@dataclass(frozen=True)
class PairShift:
    eta_control: float
    eta_target: float
    quadrature: str = "q"


@dataclass(frozen=True)
class PairClass:
    parity_control: int
    parity_target: int

    @property
    def is_fault(self) -> bool:
        return bool(self.parity_control or self.parity_target)


def pair_covariance(quadrature: str, variance: float) -> np.ndarray:
    """Covariance of the effective (control, target) shifts behind a CNOT."""
    if quadrature == "q":
        return variance * np.array([[2.0, 1.0], [1.0, 3.0]])
    if quadrature == "p":
        return variance * np.array([[3.0, -1.0], [-1.0, 2.0]])
    raise ValueError(f"quadrature must be 'q' or 'p', got {quadrature!r}")


def pair_log_density(x, y, quadrature: str, variance: float, covariance=None):
    """Log of the joint Gaussian density of the effective CNOT shifts.

    With ``covariance=None`` this uses the closed quadratic forms of the
    teleportation-based CNOT model; a 2x2 covariance overrides them.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if covariance is None:
        if quadrature == "q":
            quad = (3 * x * x + 2 * y * y - 2 * x * y) / (10.0 * variance)
        elif quadrature == "p":
            quad = (2 * x * x + 3 * y * y + 2 * x * y) / (10.0 * variance)
        else:
            raise ValueError(f"quadrature must be 'q' or 'p', got {quadrature!r}")
        log_norm = math.log(2.0 * math.pi * math.sqrt(5.0) * variance)
        return -quad - log_norm
    cov = np.asarray(covariance, dtype=float)
    prec = np.linalg.inv(cov)
    quad = 0.5 * (prec[0, 0] * x * x + 2 * prec[0, 1] * x * y + prec[1, 1] * y * y)
    return -quad - math.log(2.0 * math.pi * math.sqrt(np.linalg.det(cov)))


def sample_cnot_shifts(params: GkpParams, rng: np.random.Generator, size=None):
    """Effective shifts on control and target after a noisy CNOT.

    Returns ``(q_pair, p_pair)`` as arrays of shape ``size + (2,)`` holding
    (control, target). The eight underlying shifts are the prior (mu) and
    posterior (nu) shifts of both GKP-EC blocks; the posterior ones are
    conjugated through the CSUM.
    """
    shape = () if size is None else (size if isinstance(size, tuple) else (size,))
    sigma = math.sqrt(params.base_variance)
    mu_qc, mu_qt, mu_pc, mu_pt, nu_qc, nu_qt, nu_pc, nu_pt = rng.normal(0.0, sigma, size=(8,) + shape)
    q = np.stack([nu_qc + mu_qc, nu_qt + nu_qc + mu_qt], axis=-1)
    p = np.stack([nu_pc - nu_pt + mu_pc, nu_pt + mu_pt], axis=-1)
    return q, p


def sample_cnot_q_shifts(variance: float, rng: np.random.Generator, size: int) -> np.ndarray:
    """Only the position-quadrature pair, shape ``(size, 2)``; this is all X faults need."""
    mu_c, mu_t, nu_c, nu_t = rng.normal(0.0, math.sqrt(variance), size=(4, size))
    return np.stack([nu_c + mu_c, nu_t + nu_c + mu_t], axis=-1)


def _window():
    a = np.arange(-PAIR_WINDOW, PAIR_WINDOW + 1)
    aa, bb = np.meshgrid(a, a, indexing="ij")
    return aa.ravel(), bb.ravel()


def _best_translate(x, y, quadrature, variance, covariance=None, sign=1.0):
    """Index into the window of the translate maximising density(x + sign*a*sqrt(pi), ...)."""
    aa, bb = _window()
    best_log = np.full(np.shape(x), -np.inf)
    best = np.zeros(np.shape(x), dtype=np.intp)
    for i in range(aa.size):
        logd = pair_log_density(
            x + sign * aa[i] * SQRT_PI, y + sign * bb[i] * SQRT_PI, quadrature, variance, covariance
        )
        better = logd > best_log
        best_log = np.where(better, logd, best_log)
        best = np.where(better, i, best)
    return best, best_log


def classify_pairs(control, target, quadrature: str, variance: float, covariance=None):
    """Vectorised nearest-lattice-point decision for correlated pairs.

    Returns the parities (control, target) of the lattice translate
    maximising the joint density of the residual shift.
    """
    c = np.mod(np.asarray(control, dtype=float), 2.0 * SQRT_PI)
    t = np.mod(np.asarray(target, dtype=float), 2.0 * SQRT_PI)
    best, _ = _best_translate(c, t, quadrature, variance, covariance, sign=-1.0)
    aa, bb = _window()
    return (aa[best] % 2).astype(np.uint8), (bb[best] % 2).astype(np.uint8)


def classify_pair_shift(pair: PairShift, params: GkpParams, covariance=None) -> PairClass:
    pc, pt = classify_pairs(pair.eta_control, pair.eta_target, pair.quadrature, params.base_variance, covariance)
    return PairClass(int(pc), int(pt))


def pair_posteriors(res_control, res_target, quadrature: str, variance: float):
    """Vectorised class posteriors, shape ``(..., 4)`` ordered (0,0),(0,1),(1,0),(1,1).

    Classes are parities relative to the most likely lattice translate,
    which is the translate the decoder of the GKP-EC block corrects by.
    """
    rc = canonical_residue(res_control)
    rt = canonical_residue(res_target)
    best, best_log = _best_translate(rc, rt, quadrature, variance)
    aa, bb = _window()
    a0, b0 = aa[best], bb[best]
    out = np.zeros(np.shape(rc) + (4,))
    for i in range(aa.size):
        w = np.exp(pair_log_density(rc + aa[i] * SQRT_PI, rt + bb[i] * SQRT_PI, quadrature, variance) - best_log)
        cls = 2 * ((aa[i] - a0) % 2) + (bb[i] - b0) % 2
        for k in range(4):
            out[..., k] += np.where(cls == k, w, 0.0)
    return out / out.sum(axis=-1, keepdims=True)


def pair_posterior(residue_control: float, residue_target: float, quadrature: str, params: GkpParams) -> np.ndarray:
    return pair_posteriors(residue_control, residue_target, quadrature, params.base_variance)


def pair_marginals(post: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Per-leg flip probabilities from class posteriors."""
    return post[..., 2] + post[..., 3], post[..., 1] + post[..., 3]


@functools.lru_cache(maxsize=256)
def cnot_leg_priors(quadrature: str, variance: float, grid: int = 300) -> tuple[float, float]:
    """Unconditional flip probabilities of the control and target legs.

    Integrates the pair posterior against the folded joint density over one
    cell of the sqrt(pi) lattice (midpoint rule). This is the 2D analogue of
    :func:`prior_flip_probability` for the correlated decision.
    """
    _check_variance(variance)
    h = SQRT_PI / grid
    x = (np.arange(grid) + 0.5) * h
    rc, rt = np.meshgrid(x, x, indexing="ij")
    rc, rt = rc.ravel(), rt.ravel()
    best, best_log = _best_translate(rc, rt, quadrature, variance)
    aa, bb = _window()
    a0, b0 = aa[best], bb[best]
    pc = pt = 0.0
    for i in range(aa.size):
        dens = np.exp(pair_log_density(rc + aa[i] * SQRT_PI, rt + bb[i] * SQRT_PI, quadrature, variance))
        pc += float(np.sum(dens[(aa[i] - a0) % 2 == 1]))
        pt += float(np.sum(dens[(bb[i] - b0) % 2 == 1]))
    return pc * h * h, pt * h * h
