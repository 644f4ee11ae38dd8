"""Closed-form spread counts and transmission abilities.

Two evaluation modes exist for the chain aggregates. EXACT_SUM evaluates the
finite per-source sums and is the model truth: it matches the independent
tree oracle to machine precision. ASYMPTOTIC evaluates the simplified
large-size closed forms as written. Beware: the simplification of
the chain aggregates drops an O(N) term from both TTA and FTA, and that term
carries the leading contribution to their difference, so the asymptotic chain
IFA decays like 1/N^2 while the exact one decays like 1/N. The two modes do
NOT converge to each other; see chain_asymptotic_overcount for the exact
discrepancy. Star formulas involve no simplification and are exact.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

from .errors import ContractError, SingularityError


class SumMode(Enum):
    EXACT_SUM = "exact"
    ASYMPTOTIC = "asymptotic"


def geometric_sum(ratio: float, lo: int, hi: int) -> float:
    """Sum of ratio**k for k in [lo, hi]; empty ranges give 0.

    Uses the closed form away from ratio = 1; inside the window where the
    closed form cancels catastrophically it sums the (all-positive) terms
    directly, which is exactly rounded. The window keeps the closed-form
    absolute error at or below ~1e-13 for the ranges used here.
    """
    if hi < lo:
        return 0.0
    if abs(1.0 - ratio) < 1e-3:
        return math.fsum(ratio**k for k in range(lo, hi + 1))
    return (ratio**lo - ratio ** (hi + 1)) / (1.0 - ratio)


def _check_chain_args(n: int, eta: float, minimum: int = 2) -> None:
    if n < minimum:
        raise ContractError(f"need n >= {minimum}, got {n}")
    if not 0.0 <= eta <= 1.0:
        raise ContractError(f"eta must lie in [0, 1], got {eta}")


# ---------------------------------------------------------------------------
# chain
# ---------------------------------------------------------------------------

def chain_true_count(n: int, eta: float, trained: bool, source: int) -> float:
    """Expected posters of a true message sourced at chain position ``source``.

    Three contributions: the sub-chain from the source away from the smart
    terminal, the normal nodes between source and terminal, and the smart
    terminal itself (which forwards a true message at rate eta regardless of
    trust). Training saturates the away-from-terminal hop rate from eta/2
    to eta.
    """
    half = eta / 2.0
    away = eta if trained else half
    if source == 1:
        return geometric_sum(away, 0, n - 1)
    return (geometric_sum(away, 0, n - source)
            + geometric_sum(half, 1, source - 2)
            + eta * half ** (source - 2))


def chain_false_count(n: int, eta: float, trained: bool, source: int) -> float:
    """Expected posters of a false message sourced at position >= 2; the
    smart terminal never posts it."""
    if source < 2:
        raise ContractError("a false message needs a normal source (index >= 2)")
    half = eta / 2.0
    away = eta if trained else half
    return geometric_sum(half, 1, source - 2) + geometric_sum(away, 0, n - source)


@dataclass
class ChainMetrics:
    size: int
    eta: float
    trained: bool
    mode: SumMode
    true_counts: dict[int, float]
    false_counts: dict[int, float]
    tta: float
    fta: float
    ifa: float


def _chain_asymptotic(n: int, eta: float, trained: bool) -> tuple[float, float, float]:
    if trained:
        if eta >= 1.0:
            raise SingularityError("trained asymptotic chain forms divide by 1 - eta")
        c = (2 + eta - 2 * eta**2) / ((2 - eta) * (1 - eta))
        d = 2 * eta / (2 - eta) ** 2 + eta / (1 - eta) ** 2
        tta = c / n - d / n**2
        fta = c / n - d / (n * (n - 1))
        num = 2 * eta * (1 - eta) ** 2 + eta * (2 - eta) ** 2
        den = n * ((2 + eta - 2 * eta**2) * (2 - eta) * (1 - eta) * (n - 1) - num)
    else:
        a = (1 + eta) / (1 - eta / 2.0)
        b = eta / (1 - eta / 2.0) ** 2
        tta = (a * n - b) / n**2
        fta = (a * (n - 1) - b) / (n * (n - 1))
        num = eta
        den = n * ((1 + eta) * (1 - eta / 2.0) * (n - 1) - eta)
    if den == 0.0:
        raise SingularityError(f"asymptotic chain IFA denominator vanishes at n={n}, eta={eta}")
    return tta, fta, num / den


def chain_metrics(n: int, eta: float, trained: bool = False,
                  mode: SumMode = SumMode.EXACT_SUM) -> ChainMetrics:
    """Per-source spread counts and TTA/FTA/IFA for the chain.

    The count dicts always hold the exact finite sums (there is no asymptotic
    variant of a per-source count); ``mode`` selects how the three aggregates
    are evaluated.
    """
    _check_chain_args(n, eta)
    true_counts = {i: chain_true_count(n, eta, trained, i) for i in range(1, n + 1)}
    false_counts = {i: chain_false_count(n, eta, trained, i) for i in range(2, n + 1)}
    if mode is SumMode.EXACT_SUM:
        tta = math.fsum(true_counts.values()) / n**2
        fta = math.fsum(false_counts.values()) / (n * (n - 1))
        ifa = (tta - fta) / fta
    else:
        tta, fta, ifa = _chain_asymptotic(n, eta, trained)
    return ChainMetrics(size=n, eta=eta, trained=trained, mode=mode,
                        true_counts=true_counts, false_counts=false_counts,
                        tta=tta, fta=fta, ifa=ifa)


def chain_ifa_scaling(n: int, eta: float, trained: bool = False) -> float:
    """The pure scaling-law tail of the simplified chain IFA, proportional to
    1/N^2. Used for slope checks; coarser than the ASYMPTOTIC aggregate."""
    _check_chain_args(n, eta)
    if trained:
        if eta >= 1.0:
            raise SingularityError("trained scaling form divides by 1 - eta")
        num = 2 * eta * (1 - eta) ** 2 + eta * (2 - eta) ** 2
        return num / (n**2 * (2 + eta - 2 * eta**2) * (2 - eta) * (1 - eta))
    return eta / (n**2 * (1 + eta) * (1 - eta / 2.0))


def chain_asymptotic_overcount(n: int, eta: float) -> tuple[float, float]:
    """Exact amounts by which the untrained large-size simplifications exceed
    the finite-sum TTA and FTA.

    Both overcounts are Theta(1/n) relative, dominated by a lost
    (n-1)*(eta/2)/(1-eta/2) term; tests pin the identity to machine
    precision as a characterization of the simplified forms.
    """
    q = eta / 2.0
    tta_gap = (q * (n - 1) + 3 * q**n) / ((1 - q) * n**2) - 2 * q**n / ((1 - q) ** 2 * n**2)
    fta_gap = (q * (n - 1) - 2 * q**n / (1 - q)) / ((1 - q) * n * (n - 1))
    return tta_gap, fta_gap


# ---------------------------------------------------------------------------
# star
# ---------------------------------------------------------------------------

@dataclass
class StarMetrics:
    size: int
    eta: float
    trained: bool
    true_counts: dict[int, float]
    false_counts: dict[int, float]
    tta: float
    fta: float
    ifa: float


def star_metrics(n: int, eta: float, trained: bool = False) -> StarMetrics:
    """Exact spread counts and abilities for a star with a smart center.

    A false message from a leaf dies at the center, so FTA is exactly 1/n.
    Training doubles the center-to-leaf hop rate coefficients.
    """
    _check_chain_args(n, eta)
    center_rate = eta if trained else eta / 2.0
    leaf_rate = eta**2 if trained else eta**2 / 2.0
    true_counts = {1: 1.0 + center_rate * (n - 1)}
    for i in range(2, n + 1):
        true_counts[i] = 1.0 + eta + leaf_rate * (n - 2)
    false_counts = {i: 1.0 for i in range(2, n + 1)}
    tta = (true_counts[1] + (n - 1) * true_counts[2]) / n**2 if n >= 2 else 1.0 / n
    fta = 1.0 / n
    if trained:
        ifa = (2 * eta * (n - 1) + eta**2 * (n**2 - 3 * n + 2)) / n
    else:
        ifa = (1.5 * eta * (n - 1) + 0.5 * eta**2 * (n**2 - 3 * n + 2)) / n
    return StarMetrics(size=n, eta=eta, trained=trained,
                       true_counts=true_counts, false_counts=false_counts,
                       tta=tta, fta=fta, ifa=ifa)


# ---------------------------------------------------------------------------
# stratification along the chain
# ---------------------------------------------------------------------------

@dataclass
class StratificationProfile:
    """Successive diffusion-power differences D(i) = n(i) - n(i+1) for the
    interior chain positions, plus the index where the false-message profile
    changes sign."""

    size: int
    eta: float
    trained: bool
    d_true: dict[int, float]
    d_false: dict[int, float]
    switching_point: float


def stratification_profile(n: int, eta: float, trained: bool = False) -> StratificationProfile:
    """Closed-form stratification differences for i = 2..n-1.

    Untrained, the false-message profile is antisymmetric about the chain
    midpoint (n+1)/2; training pulls the switching point toward the smart
    terminal, down to 1 in the eta = 1 limit. eta = 0 degenerates to an
    all-zero profile (reported, not an error).
    """
    _check_chain_args(n, eta, minimum=3)
    half = eta / 2.0
    d_true = {}
    d_false = {}
    for i in range(2, n):
        towards_end = eta ** (n - i) if trained else half ** (n - i)
        d_true[i] = towards_end + (1 - eta) * half ** (i - 1)
        d_false[i] = towards_end - half ** (i - 1)
    if not trained:
        switching = (n + 1) / 2.0
    elif eta == 0.0:
        switching = (n + 1) / 2.0  # limit of the closed form as eta -> 0+
    else:
        ln2 = math.log(2.0)
        switching = ((n + 1) * math.log(eta) - ln2) / (2 * math.log(eta) - ln2)
    return StratificationProfile(size=n, eta=eta, trained=trained,
                                 d_true=d_true, d_false=d_false,
                                 switching_point=switching)


# ---------------------------------------------------------------------------
# bridged chains (crossover)
# ---------------------------------------------------------------------------

def bridge_gain_true(n: int, h: int, eta: float, trained: bool) -> float:
    """Expected extra posters inside the far chain per unit probability that
    its bridge endpoint receives a true message."""
    if trained:
        return geometric_sum(eta, 0, n - h) + geometric_sum(eta, 1, h - 1)
    half = eta / 2.0
    return (geometric_sum(half, 0, n - h) + geometric_sum(half, 1, h - 2)
            + eta * half ** (h - 2))


def bridge_gain_false(n: int, h: int, eta: float, trained: bool) -> float:
    """Same as bridge_gain_true for a false message: the far smart terminal
    never joins in."""
    if trained:
        return geometric_sum(eta, 0, n - h) + geometric_sum(eta, 1, h - 2)
    half = eta / 2.0
    return geometric_sum(half, 0, n - h) + geometric_sum(half, 1, h - 2)


def crossover_true_count(n: int, l: int, h: int, eta: float, trained: bool, source: int) -> float:
    """Expected posters across both bridged chains of a true message sourced
    at position ``source`` of chain A (bridge at A-position l, B-position h)."""
    half = eta / 2.0
    gain = bridge_gain_true(n, h, eta, trained)
    if not trained:
        reach = half ** (l if source == 1 else abs(source - l) + 1)
        return chain_true_count(n, eta, False, source) + reach * gain
    if source == 1:
        return geometric_sum(eta, 0, n - 1) + eta**l * gain
    if source <= l:
        return (geometric_sum(eta, 0, n - source)
                + geometric_sum(eta, 1, source - 1)
                + eta ** (l - source + 1) * gain)
    return (geometric_sum(eta, 0, n - source)
            + half ** (source - l) * geometric_sum(eta, 1, l - 1)
            + geometric_sum(half, 1, source - l)
            + eta * half ** (source - l) * gain)


def crossover_false_count(n: int, l: int, h: int, eta: float, trained: bool, source: int) -> float:
    """crossover_true_count for a false message (normal source, index >= 2)."""
    if source < 2:
        raise ContractError("a false message needs a normal source (index >= 2)")
    half = eta / 2.0
    gain = bridge_gain_false(n, h, eta, trained)
    if not trained:
        reach = half ** (abs(source - l) + 1)
        return chain_false_count(n, eta, False, source) + reach * gain
    if source <= l:
        return (geometric_sum(eta, 0, n - source)
                + geometric_sum(eta, 1, source - 2)
                + eta ** (l - source + 1) * gain)
    return (geometric_sum(eta, 0, n - source)
            + half ** (source - l) * geometric_sum(eta, 1, l - 2)
            + geometric_sum(half, 1, source - l)
            + eta * half ** (source - l) * gain)


@dataclass
class CrossoverMetrics:
    size: int
    l: int
    h: int
    eta: float
    trained: bool
    true_counts_a: dict[int, float]
    false_counts_a: dict[int, float]
    true_counts_b: dict[int, float]
    false_counts_b: dict[int, float]
    d_true_a: dict[int, float]
    d_false_a: dict[int, float]
    untrained_gain_true: float
    untrained_gain_false: float
    trained_gain_true: float
    trained_gain_false: float


def crossover_metrics(n: int, l: int, h: int, eta: float, trained: bool = False) -> CrossoverMetrics:
    """All closed-form crossover quantities for a bridged pair of chains.

    B-side counts come from exchanging l and h. The trained difference arrays
    use the piecewise forms: one branch for 2 <= i <= l-1, another for
    l <= i <= n-1. The four bridge-gain constants are reported for both
    regimes regardless of ``trained``.
    """
    _check_chain_args(n, eta, minimum=3)
    if not (2 <= l <= n and 2 <= h <= n):
        raise ContractError(f"bridge indices must lie in [2, {n}], got l={l}, h={h}")
    half = eta / 2.0
    true_a = {i: crossover_true_count(n, l, h, eta, trained, i) for i in range(1, n + 1)}
    false_a = {i: crossover_false_count(n, l, h, eta, trained, i) for i in range(2, n + 1)}
    true_b = {i: crossover_true_count(n, h, l, eta, trained, i) for i in range(1, n + 1)}
    false_b = {i: crossover_false_count(n, h, l, eta, trained, i) for i in range(2, n + 1)}

    d_true = {}
    d_false = {}
    if trained:
        gain_t = bridge_gain_true(n, h, eta, True)
        gain_f = bridge_gain_false(n, h, eta, True)
        for i in range(2, n):
            if i <= l - 1:
                d_true[i] = eta ** (n - i) - eta**i - eta ** (l - i) * (1 - eta) * gain_t
                d_false[i] = eta ** (n - i) - eta ** (i - 1) - eta ** (l - i) * (1 - eta) * gain_f
            else:
                shared = half ** (i - l)
                d_true[i] = (eta ** (n - i)
                             + shared * (1 - half) * geometric_sum(eta, 1, l - 1)
                             - shared * half
                             + eta * (1 - half) * shared * gain_t)
                d_false[i] = (eta ** (n - i)
                              + shared * (1 - half) * geometric_sum(eta, 1, l - 2)
                              - shared * half
                              + eta * (1 - half) * shared * gain_f)
    else:
        gain_t = bridge_gain_true(n, h, eta, False)
        gain_f = bridge_gain_false(n, h, eta, False)
        for i in range(2, n):
            step = half ** (abs(i - l) + 1) - half ** (abs(i + 1 - l) + 1)
            d_true[i] = half ** (n - i) + (1 - eta) * half ** (i - 1) + step * gain_t
            d_false[i] = half ** (n - i) - half ** (i - 1) + step * gain_f

    return CrossoverMetrics(
        size=n, l=l, h=h, eta=eta, trained=trained,
        true_counts_a=true_a, false_counts_a=false_a,
        true_counts_b=true_b, false_counts_b=false_b,
        d_true_a=d_true, d_false_a=d_false,
        untrained_gain_true=bridge_gain_true(n, h, eta, False),
        untrained_gain_false=bridge_gain_false(n, h, eta, False),
        trained_gain_true=bridge_gain_true(n, h, eta, True),
        trained_gain_false=bridge_gain_false(n, h, eta, True),
    )


def relative_improvement(after: float, before: float) -> float:
    """Relative IFA improvement (after - before) / before."""
    if before <= 0.0:
        raise ContractError(f"relative improvement undefined for baseline {before}")
    return (after - before) / before
