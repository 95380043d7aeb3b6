"""Closed-form detection and throughput metrics for the hopping scheme.

The warden's energy statistic over one block is a sum of 2qL squared
Gaussians: under the signal-present hypothesis the k occupied slots
contribute Gamma(kL, rho g + sigma0_sq) energy and the q - k idle slots
contribute Gamma((q-k)L, sigma0_sq), where g is the warden-channel gain.
Expanding the occupied-slot factor as a negative-binomial mixture of
Gamma shapes gives the conditional miss probability

    P_md(g) = (1-x)^kL * sum_n [(kL)_n / n!] x^n P(qL + n, y),

with x = rho g / (rho g + sigma0_sq) and y the threshold in noise units.
Averaging x^n (1-x)^kL over the exponential gain density turns each
mixture weight into c (kL)_n U(n+1, 2-kL, c) with c = sigma0_sq /
(rho omega_e), which is the series evaluated by the "series" method
below; the "quadrature" method integrates P_md(g) against the gain
density directly. The two are independent routes to the same number and
are kept separate so they can cross-check each other.
"""

import math
import threading
import warnings

import numpy as np
from scipy import integrate
from scipy.integrate import IntegrationWarning

from .params import SystemParams
from .specfun import (
    DEFAULT_SERIES_CONTROL,
    ConvergenceError,
    SeriesControl,
    exp_e1_scaled,
    log_pochhammer,
    log_tricomi_u,
    reg_gamma_lower,
    reg_gamma_upper,
)

_LN2 = math.log(2.0)
_DEAD = 1e-320  # entries below this are numerically zero


class _GammaShapeTable:
    """Memo of P(s0 + n, y) for n = 0, 1, 2, ... at fixed y.

    P is strictly decreasing in the shape argument, so once an entry
    falls below the floor every later entry would too; growth stops
    there and value() reports 0.0 beyond that point. Instances are
    shared across threads, hence the lock around growth.
    """

    __slots__ = ("s0", "y", "_vals", "_dead", "_lock")

    _GROW = 256
    _HARD_CAP = 2_000_000

    def __init__(self, s0: float, y: float):
        self.s0 = s0
        self.y = y
        self._vals: list[float] = []
        self._dead = False
        self._lock = threading.Lock()

    def _grow_to(self, n: int) -> None:
        with self._lock:
            while len(self._vals) <= n and not self._dead:
                if len(self._vals) >= self._HARD_CAP:
                    raise ConvergenceError(
                        f"gamma shape table exceeded {self._HARD_CAP} entries "
                        f"(s0={self.s0}, y={self.y})"
                    )
                stop = len(self._vals) + self._GROW
                while len(self._vals) < stop:
                    v = reg_gamma_lower(self.s0 + len(self._vals), self.y)
                    self._vals.append(v)
                    if v < _DEAD:
                        self._dead = True
                        break

    def value(self, n: int) -> float:
        if n >= len(self._vals):
            if self._dead:
                return 0.0
            self._grow_to(n)
            if n >= len(self._vals):
                return 0.0
        return self._vals[n]

    def alive_prefix(self) -> np.ndarray:
        """All entries down to the numerical floor, as an array."""
        while not self._dead:
            self._grow_to(len(self._vals) + self._GROW)
        return np.asarray(self._vals, dtype=float)


_tables: dict[tuple[float, float], _GammaShapeTable] = {}
_tables_lock = threading.Lock()
_TABLE_CACHE_MAX = 16


def _shape_table(s0: float, y: float) -> _GammaShapeTable:
    key = (s0, y)
    with _tables_lock:
        tab = _tables.get(key)
        if tab is None:
            if len(_tables) >= _TABLE_CACHE_MAX:
                _tables.pop(next(iter(_tables)))
            tab = _GammaShapeTable(s0, y)
            _tables[key] = tab
        return tab


def false_alarm_prob(params: SystemParams) -> float:
    """Probability the energy detector fires on noise alone.

    The noise-only statistic is Gamma(qL, sigma0_sq), so this is the
    regularized upper incomplete gamma at the threshold in noise units.
    """
    y = params.effective_threshold / params.sigma0_sq
    return reg_gamma_upper(params.q * params.L, y)


def miss_detection_conditional(
    params: SystemParams, g: float, ctl: SeriesControl | None = None
) -> float:
    """Miss probability for a fixed warden channel gain g >= 0.

    Evaluates the negative-binomial mixture of incomplete gamma terms,
    truncated once the certified tail bound (remaining mixture mass
    times the next, largest remaining P value) is negligible against
    the accumulated sum.
    """
    if not g >= 0.0:
        raise ValueError(f"channel gain must be >= 0, got {g!r}")
    ctl = ctl or DEFAULT_SERIES_CONTROL
    s2 = params.sigma0_sq
    y = params.effective_threshold / s2
    if y == 0.0:
        return 0.0
    s0 = float(params.q * params.L)
    table = _shape_table(s0, y)
    rg = params.rho * g
    if rg == 0.0:
        return table.value(0)
    x = rg / (rg + s2)
    kl = float(params.k * params.L)
    lt0 = kl * math.log1p(-x)
    if lt0 <= -745.0:
        # Mixture mass sits beyond the table floor; the sum is 0 to
        # double precision.
        return 0.0
    t = math.exp(lt0)
    mass = t
    total = t * table.value(0)
    for n in range(1, ctl.max_terms):
        t *= x * (kl + n - 1.0) / n
        mass += t
        total += t * table.value(n)
        bound = max(1.0 - mass, 0.0) * table.value(n + 1)
        if bound <= ctl.rel_tol * total + 1e-300:
            return total
    raise ConvergenceError(
        f"conditional miss series did not converge (g={g})",
        partial=total,
        terms=ctl.max_terms,
    )


def _checked_quad(fn, lo, hi, points=None):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", IntegrationWarning)
        val, err = integrate.quad(
            fn, lo, hi, points=points, limit=300, epsabs=1e-14, epsrel=1e-10
        )
    if err > max(abs(val) * 1e-7, 1e-12):
        raise ConvergenceError(
            f"gain average quadrature error {err:g} too large (value {val:g})"
        )
    return val


def _avg_md_quadrature(params: SystemParams, y: float, ctl: SeriesControl) -> float:
    s2 = params.sigma0_sq
    s0 = float(params.q * params.L)
    kl = float(params.k * params.L)
    rho = params.rho
    omega = params.omega_e
    table = _shape_table(s0, y)
    pvals = table.alive_prefix()
    n_alive = pvals.size
    # ratio of consecutive mixture weights, without the x factor
    base = (kl + np.arange(n_alive - 1, dtype=float)) / np.arange(1.0, n_alive)

    def cond_md(g: float) -> float:
        rg = rho * g
        if rg == 0.0:
            return float(pvals[0])
        x = rg / (rg + s2)
        lt0 = kl * math.log1p(-x)
        if lt0 <= -745.0:
            return 0.0
        t = np.empty(n_alive)
        t[0] = 1.0
        np.cumprod(x * base, out=t[1:])
        return math.exp(lt0) * float(t @ pvals)

    def integrand(g: float) -> float:
        return math.exp(-g / omega) / omega * cond_md(g)

    g_max = omega * math.log(1e16)
    pts = None
    if params.p_b > 0.0:
        # gain at which the mean occupied-slot energy crosses the
        # threshold; the integrand bends hardest there
        g_star = (params.effective_threshold - s0 * s2) * params.q / (
            params.m * params.p_b
        )
        if 0.0 < g_star < g_max:
            pts = [g_star]
    bulk = _checked_quad(integrand, 0.0, g_max, points=pts)
    # exponential tail beyond g_max, bounded by the (decreasing)
    # integrand value at the cut
    tail = cond_md(g_max) * math.exp(-g_max / omega)
    return bulk + tail


def _avg_md_series(params: SystemParams, y: float, ctl: SeriesControl) -> float:
    s2 = params.sigma0_sq
    s0 = float(params.q * params.L)
    kl = float(params.k * params.L)
    table = _shape_table(s0, y)
    c = s2 / (params.rho * params.omega_e)
    lc = math.log(c)
    total = 0.0
    mass = 0.0
    for n in range(ctl.max_terms):
        lw = lc + log_pochhammer(kl, n) + log_tricomi_u(n + 1.0, 2.0 - kl, c)
        w = math.exp(lw) if lw > -745.0 else 0.0
        mass += w
        total += w * table.value(n)
        bound = max(1.0 - mass, 0.0) * table.value(n + 1)
        if n >= 1 and bound <= ctl.rel_tol * total + 1e-300:
            return total
    raise ConvergenceError(
        "averaged miss series did not converge", partial=total, terms=ctl.max_terms
    )


def miss_detection_prob(
    params: SystemParams,
    method: str = "quadrature",
    ctl: SeriesControl | None = None,
) -> float:
    """Miss probability averaged over the exponential warden-channel gain.

    method "quadrature" integrates the conditional miss against the gain
    density; method "series" sums the closed-form mixture whose weights
    involve the Tricomi U function. Both respect ctl.rel_tol.
    """
    ctl = ctl or DEFAULT_SERIES_CONTROL
    s2 = params.sigma0_sq
    y = params.effective_threshold / s2
    if y == 0.0:
        return 0.0
    if math.isinf(y):
        # the statistic is almost surely finite
        return 1.0
    if params.p_b == 0.0:
        return reg_gamma_lower(params.q * params.L, y)
    if method == "quadrature":
        return _avg_md_quadrature(params, y, ctl)
    if method == "series":
        return _avg_md_series(params, y, ctl)
    raise ValueError(f"unknown method {method!r}, expected 'quadrature' or 'series'")


def dep(
    params: SystemParams,
    method: str = "quadrature",
    ctl: SeriesControl | None = None,
) -> float:
    """Detection error probability: false alarm plus averaged miss.

    A blind warden achieves 1 by always guessing one hypothesis, so the
    covertness constraint asks for dep >= 1 - eps_e.
    """
    return false_alarm_prob(params) + miss_detection_prob(params, method, ctl)


def rtp(params: SystemParams) -> float:
    """Reliable transmission probability of the hopping user.

    The user decodes when its exponential channel gain clears
    gamma_u k sigma0_sq / (m p_b), giving a closed-form exponential
    survival probability.
    """
    if params.gamma_u == 0.0:
        return 1.0
    if params.p_b == 0.0:
        return 0.0
    expo = (
        params.gamma_u
        * params.k
        * params.sigma0_sq
        / (params.m * params.p_b * params.omega_u)
    )
    return math.exp(-expo)


def covert_rate(params: SystemParams, p: float) -> float:
    """Ergodic rate (bits per channel use) at transmit power p > 0.

    E[log2(1 + beta h)] over an exponential gain h with mean omega_u,
    where beta = m p / (k sigma0_sq), reduces to e^c E1(c) / ln 2 with
    c = 1 / (beta omega_u). The scaled product form avoids the
    underflow of E1 alone at small powers.
    """
    if not p > 0.0:
        raise ValueError(f"transmit power must be > 0, got {p!r}")
    c = params.k * params.sigma0_sq / (params.m * params.omega_u * p)
    return exp_e1_scaled(c) / _LN2
