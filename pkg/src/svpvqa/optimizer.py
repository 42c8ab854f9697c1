"""Powell's conjugate-direction minimizer with a hard evaluation budget.

Line searches bracket the minimum by golden-ratio expansion with parabolic
extrapolation and then refine it with Brent's method. Every call of the
objective is counted; the budget is never exceeded.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

GOLDEN = 1.618034
CGOLD = 0.3819660
BRENT_TOL = 1e-6
BRENT_MINTOL = 1e-11
BRENT_MAXITER = 500
GROW_LIMIT = 110.0
BRACKET_MAXITER = 1000


class NonFiniteValueError(ArithmeticError):
    pass


class _BudgetExhausted(Exception):
    pass


@dataclass(frozen=True)
class OptimizeConfig:
    xtol: float = 1e-4
    ftol: float = 1e-4
    max_evals: int | None = None  # None -> 1000 * parameter count
    seed: int | None = None

    def __post_init__(self) -> None:
        if not (self.xtol > 0 and self.ftol > 0):
            raise ValueError("xtol and ftol must be positive")
        if self.max_evals is not None and self.max_evals < 1:
            raise ValueError("max_evals must be positive")

    def budget(self, num_params: int) -> int:
        return self.max_evals if self.max_evals is not None else 1000 * max(num_params, 1)


@dataclass
class OptimizeResult:
    best_params: np.ndarray
    best_value: float
    num_evals: int
    converged: bool
    trace: list[float] = field(default_factory=list)
    message: str = ""


def init_params(count: int, rng: np.random.Generator) -> np.ndarray:
    """I.i.d. uniform angles on [0, pi]."""
    if count < 0:
        raise ValueError("count must be non-negative")
    return rng.uniform(0.0, math.pi, size=count)


class _Counted:
    def __init__(self, f: Callable[[np.ndarray], float], budget: int):
        self.f = f
        self.budget = budget
        self.count = 0
        self.best_x: np.ndarray | None = None
        self.best_f = math.inf

    def __call__(self, x: np.ndarray) -> float:
        if self.count >= self.budget:
            raise _BudgetExhausted
        self.count += 1
        val = float(self.f(x))
        if not math.isfinite(val):
            raise NonFiniteValueError(f"objective returned {val} at evaluation {self.count}, x={x!r}")
        if val < self.best_f:
            self.best_f = val
            self.best_x = np.array(x, dtype=np.float64, copy=True)
        return val


def _bracket(f1: Callable[[float], float], fa: float) -> tuple[float, float, float, float, float, float]:
    """Bracket a minimum of ``f1`` starting from 0 (value ``fa``) and 1."""
    xa, xb = 0.0, 1.0
    fb = f1(xb)
    if fa < fb:
        xa, xb = xb, xa
        fa, fb = fb, fa
    xc = xb + GOLDEN * (xb - xa)
    fc = f1(xc)
    it = 0
    while fc < fb:
        tmp1 = (xb - xa) * (fb - fc)
        tmp2 = (xb - xc) * (fb - fa)
        val = tmp2 - tmp1
        denom = 2.0 * (1e-21 if abs(val) < 1e-21 else val)
        w = xb - ((xb - xc) * tmp2 - (xb - xa) * tmp1) / denom
        wlim = xb + GROW_LIMIT * (xc - xb)
        it += 1
        if it > BRACKET_MAXITER:
            break
        if (w - xc) * (xb - w) > 0.0:
            fw = f1(w)
            if fw < fc:
                return xb, w, xc, fb, fw, fc
            if fw > fb:
                return xa, xb, w, fa, fb, fw
            w = xc + GOLDEN * (xc - xb)
            fw = f1(w)
        elif (w - wlim) * (wlim - xc) >= 0.0:
            w = wlim
            fw = f1(w)
        elif (w - wlim) * (xc - w) > 0.0:
            fw = f1(w)
            if fw < fc:
                xb, xc, w = xc, w, w + GOLDEN * (w - xc)
                fb, fc, fw = fc, fw, f1(w)
        else:
            w = xc + GOLDEN * (xc - xb)
            fw = f1(w)
        xa, xb, xc = xb, xc, w
        fa, fb, fc = fb, fc, fw
    return xa, xb, xc, fa, fb, fc


def _brent(f1: Callable[[float], float], brack: tuple, tol: float = BRENT_TOL) -> tuple[float, float]:
    xa, xb, xc, fa, fb, fc = brack
    a, b = (xa, xc) if xa < xc else (xc, xa)
    x = w = v = xb
    fx = fw = fv = fb
    deltax = 0.0
    rat = 0.0
    for _ in range(BRENT_MAXITER):
        tol1 = tol * abs(x) + BRENT_MINTOL
        tol2 = 2.0 * tol1
        xmid = 0.5 * (a + b)
        if abs(x - xmid) < (tol2 - 0.5 * (b - a)):
            break
        if abs(deltax) <= tol1:
            deltax = (a - x) if x >= xmid else (b - x)
            rat = CGOLD * deltax
        else:
            tmp1 = (x - w) * (fx - fv)
            tmp2 = (x - v) * (fx - fw)
            p = (x - v) * tmp2 - (x - w) * tmp1
            tmp2 = 2.0 * (tmp2 - tmp1)
            if tmp2 > 0.0:
                p = -p
            tmp2 = abs(tmp2)
            dx_temp = deltax
            deltax = rat
            if p > tmp2 * (a - x) and p < tmp2 * (b - x) and abs(p) < abs(0.5 * tmp2 * dx_temp):
                rat = p / tmp2
                u = x + rat
                if (u - a) < tol2 or (b - u) < tol2:
                    rat = tol1 if xmid - x >= 0 else -tol1
            else:
                deltax = (a - x) if x >= xmid else (b - x)
                rat = CGOLD * deltax
        u = x + rat if abs(rat) >= tol1 else (x + tol1 if rat >= 0 else x - tol1)
        fu = f1(u)
        if fu > fx:
            if u < x:
                a = u
            else:
                b = u
            if fu <= fw or w == x:
                v, w = w, u
                fv, fw = fw, fu
            elif fu <= fv or v == x or v == w:
                v, fv = u, fu
        else:
            if u >= x:
                a = x
            else:
                b = x
            v, w, x = w, x, u
            fv, fw, fx = fw, fx, fu
    return x, fx


def _line_search(func: _Counted, x: np.ndarray, fx: float, direction: np.ndarray) -> tuple[float, np.ndarray]:
    def f1(alpha: float) -> float:
        return func(x + alpha * direction)

    brack = _bracket(f1, fx)
    alpha, fmin = _brent(f1, brack)
    if fmin > fx:  # never move uphill
        return fx, x
    return fmin, x + alpha * direction


def powell_minimize(
    f: Callable[[np.ndarray], float],
    x0: np.ndarray,
    cfg: OptimizeConfig = OptimizeConfig(),
) -> OptimizeResult:
    """Minimize ``f`` from ``x0`` with Powell's method.

    Stops when a full sweep improves ``f`` by less than the fractional
    tolerance ``ftol``, when no parameter moved more than ``xtol * (1 +
    max|x|)`` during the sweep, or when the evaluation budget is spent. The
    returned point is the best one ever evaluated.
    """
    x = np.array(x0, dtype=np.float64, copy=True).reshape(-1)
    if not np.all(np.isfinite(x)):
        raise ValueError("x0 must be finite")
    d = x.shape[0]
    func = _Counted(f, cfg.budget(d))
    trace: list[float] = []
    converged = False
    message = ""
    try:
        fval = func(x)
        if d == 0:
            return OptimizeResult(x, fval, func.count, True, [fval], "no parameters")
        direc = np.eye(d)
        while True:
            fx = fval
            x1 = x.copy()
            bigind = 0
            delta = 0.0
            for i in range(d):
                before = fval
                fval, x = _line_search(func, x, fval, direc[i])
                if before - fval > delta:
                    delta = before - fval
                    bigind = i
            trace.append(fval)
            if 2.0 * (fx - fval) <= cfg.ftol * (abs(fx) + abs(fval)) + 1e-20:
                converged, message = True, "ftol"
                break
            if np.max(np.abs(x - x1)) <= cfg.xtol * (1.0 + np.max(np.abs(x))):
                converged, message = True, "xtol"
                break
            direc1 = x - x1
            x2 = 2.0 * x - x1
            fx2 = func(x2)
            if fx > fx2:
                t = 2.0 * (fx + fx2 - 2.0 * fval)
                temp = fx - fval - delta
                t *= temp * temp
                temp = fx - fx2
                t -= delta * temp * temp
                if t < 0.0:
                    fval, x = _line_search(func, x, fval, direc1)
                    if np.any(direc1):
                        direc[bigind] = direc[-1]
                        direc[-1] = direc1
    except _BudgetExhausted:
        message = "max_evals"
    best_x = func.best_x if func.best_x is not None else x
    best_f = func.best_f
    if not trace or trace[-1] > best_f:
        trace.append(best_f)
    for k in range(1, len(trace)):
        trace[k] = min(trace[k], trace[k - 1])
    return OptimizeResult(best_x, best_f, func.count, converged, trace, message)
