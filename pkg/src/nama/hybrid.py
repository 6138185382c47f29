"""Monte Carlo checks of hybrid-limit statements on local polydisc models.

A local model carries coordinates z_0..z_p tied by ``prod z_i^{b_i} = t``
plus n-p free unit-disc coordinates, a holomorphic factor u as a polynomial
with u(0) != 0, and nonnegative damping exponents a_i (the factor
``prod |z_i|^{2 a_i}`` in the volume form).  In log-polar coordinates
``x_i = log|z_i| / log|t|`` the flat part of the volume form becomes
Lebesgue measure on the simplex ``sum b_i x_i = 1``, so sampling is done
there with importance weights ``|u|^2 / |u(0)|^2``.

Sampling uses a counter-based generator addressed by seed and chunk index:
identical (model, count, seed) inputs give bit-identical batches, and the
chunks could be generated in parallel without changing the result.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .convexgeom import box_simplex_volume

_DYADIC_BITS = 40
_DYADIC_ONE = 1 << _DYADIC_BITS
_CHUNK = 1 << 16
_COUNTERS_PER_CHUNK = 1 << 24


@dataclass(frozen=True)
class MultiPoly:
    """Sparse polynomial in variables z_0..z_{nvars-1} with complex
    coefficients, stored as exponent tuple -> coefficient."""

    nvars: int
    terms: dict

    def __post_init__(self):
        cleaned = {}
        for exps, coeff in dict(self.terms).items():
            exps = tuple(int(e) for e in exps)
            if len(exps) != self.nvars:
                raise ValueError(
                    f"exponent tuple {exps} needs {self.nvars} entries")
            if any(e < 0 for e in exps):
                raise ValueError("exponents must be nonnegative")
            c = complex(coeff)
            if c != 0:
                cleaned[exps] = cleaned.get(exps, 0) + c
        object.__setattr__(self, "terms", cleaned)

    @classmethod
    def constant(cls, nvars, value=1):
        return cls(nvars, {(0,) * nvars: value})

    def constant_term(self):
        return self.terms.get((0,) * self.nvars, 0j)

    def __call__(self, zs):
        """Evaluate on an array of shape (..., nvars)."""
        zs = np.asarray(zs, dtype=complex)
        out = np.zeros(zs.shape[:-1], dtype=complex)
        for exps, coeff in self.terms.items():
            term = np.full(zs.shape[:-1], coeff, dtype=complex)
            for i, e in enumerate(exps):
                if e:
                    term = term * zs[..., i] ** e
            out += term
        return out


def parse_poly(text, nvars):
    """Parse expressions like ``1 + z0 - 2.5*z1^2*z2`` into a MultiPoly."""
    import re

    terms = {}
    cleaned = text.replace(" ", "").replace("**", "^")
    if not cleaned:
        raise ValueError("empty polynomial")
    pieces = re.findall(r"[+-]?[^+-]+", cleaned)
    if "".join(pieces) != cleaned:
        raise ValueError(f"cannot parse polynomial {text!r}")
    for piece in pieces:
        sign = 1.0
        body = piece
        if body[0] in "+-":
            sign = -1.0 if body[0] == "-" else 1.0
            body = body[1:]
        coeff = sign
        exps = [0] * nvars
        for factor in body.split("*"):
            if not factor:
                raise ValueError(f"cannot parse term {piece!r}")
            m = re.fullmatch(r"z(\d+)(?:\^(\d+))?", factor)
            if m:
                idx, power = int(m.group(1)), int(m.group(2) or 1)
                if idx >= nvars:
                    raise ValueError(
                        f"variable z{idx} out of range (nvars={nvars})")
                exps[idx] += power
            else:
                try:
                    coeff *= float(factor)
                except ValueError:
                    raise ValueError(f"cannot parse factor {factor!r}")
        key = tuple(exps)
        terms[key] = terms.get(key, 0.0) + coeff
    return MultiPoly(nvars, terms)


@dataclass(frozen=True)
class LocalModel:
    """One polydisc chart of a degenerating family near a depth-p stratum.

    ``multiplicities`` are the exponents b_0..b_p of the divisor coordinates
    in ``prod z_i^{b_i} = t``; ``u`` is the holomorphic factor, a polynomial
    in all n+1 coordinates; ``weights`` are the damping exponents a_0..a_p.
    """

    multiplicities: tuple
    t: complex
    dimension: int
    u: MultiPoly = None
    weights: tuple = None

    def __post_init__(self):
        bs = tuple(int(b) for b in self.multiplicities)
        if not bs or any(b < 1 for b in bs):
            raise ValueError("multiplicities must be integers >= 1")
        object.__setattr__(self, "multiplicities", bs)
        t = complex(self.t)
        if not 0 < abs(t) < 1:
            raise ValueError("t must satisfy 0 < |t| < 1")
        object.__setattr__(self, "t", t)
        n = int(self.dimension)
        if n + 1 < len(bs):
            raise ValueError("more divisor coordinates than dimensions")
        object.__setattr__(self, "dimension", n)
        u = self.u if self.u is not None else MultiPoly.constant(n + 1)
        if u.nvars != n + 1:
            raise ValueError(f"u must be a polynomial in {n + 1} variables")
        if abs(u.constant_term()) == 0:
            raise ValueError("u must not vanish at the origin")
        object.__setattr__(self, "u", u)
        ws = self.weights if self.weights is not None else (0,) * len(bs)
        ws = tuple(float(w) for w in ws)
        if len(ws) != len(bs):
            raise ValueError("one damping weight per divisor coordinate")
        if any(w < 0 for w in ws):
            raise ValueError("damping weights must be nonnegative")
        object.__setattr__(self, "weights", ws)

    @property
    def depth(self):
        """Number p of divisor coordinates minus one."""
        return len(self.multiplicities) - 1

    @property
    def fiber_count(self):
        return self.dimension - self.depth

    @property
    def sheets(self):
        return math.gcd(*self.multiplicities) \
            if len(self.multiplicities) > 1 else self.multiplicities[0]

    @property
    def log_scale(self):
        """T = |log|t||."""
        return -math.log(abs(self.t))

    def with_t(self, t):
        return LocalModel(self.multiplicities, t, self.dimension,
                          self.u, self.weights)

    def expected_growth_exponent(self):
        return sum(1 for w in self.weights if w == 0) - 1


@dataclass(frozen=True)
class SampleBatch:
    """Samples of the volume measure in log-polar chart coordinates.

    ``numerators`` are the dyadic integer coordinates of the simplex point
    (row sums are exactly 2^40), ``xs`` the float coordinates x_i with
    ``sum b_i x_i = 1``, ``thetas`` the divisor phases, ``fiber`` the free
    unit-disc coordinates, ``weights`` the importance weights
    |u|^2 / |u(0)|^2.
    """

    model: LocalModel
    seed: int
    count: int
    numerators: np.ndarray
    xs: np.ndarray
    thetas: np.ndarray
    fiber: np.ndarray
    weights: np.ndarray

    def effective_sample_size(self):
        s = float(self.weights.sum())
        q = float((self.weights ** 2).sum())
        return s * s / q if q > 0 else 0.0

    def mean_weight(self):
        return float(self.weights.mean())

    def chart_sums_exact(self):
        """True when every sample satisfies the simplex relation exactly."""
        return bool((self.numerators.sum(axis=1) == _DYADIC_ONE).all())


def _chunk_generator(seed, chunk_index):
    bg = np.random.Philox(key=seed)
    if chunk_index:
        bg = bg.advance(chunk_index * _COUNTERS_PER_CHUNK)
    return np.random.Generator(bg)


def sample_cy_measure(model, count, seed):
    """Draw ``count`` samples of the local volume measure.

    The simplex point is uniform with respect to the chart Lebesgue measure
    (drawn on a dyadic 2^-40 grid so the constraint sum b_i x_i = 1 is exact
    in integer arithmetic), divisor phases are uniform subject to
    ``sum b_i theta_i = arg t`` with the sheet chosen uniformly, fiber
    coordinates are uniform on the unit disc, and the weight is
    |u(z)|^2 / |u(0)|^2.  Identical inputs give bit-identical batches.
    """
    count = int(count)
    if count < 1:
        raise ValueError("count must be >= 1")
    bs = np.array(model.multiplicities, dtype=np.int64)
    p = model.depth
    nf = model.fiber_count
    T = model.log_scale
    phase_t = cmath.phase(model.t)
    u0 = abs(model.u.constant_term()) ** 2

    nums, thetas_all, fibers, weights = [], [], [], []
    for start in range(0, count, _CHUNK):
        m = min(_CHUNK, count - start)
        g = _chunk_generator(seed, start // _CHUNK)

        cuts = g.integers(0, _DYADIC_ONE + 1, size=(m, p), dtype=np.int64)
        cuts.sort(axis=1)
        padded = np.concatenate(
            [np.zeros((m, 1), dtype=np.int64), cuts,
             np.full((m, 1), _DYADIC_ONE, dtype=np.int64)], axis=1)
        num = np.diff(padded, axis=1)

        free_thetas = g.uniform(0.0, 2.0 * math.pi, size=(m, p))
        if model.multiplicities[0] > 1:
            sheet = g.integers(0, model.multiplicities[0], size=m)
        else:
            sheet = np.zeros(m, dtype=np.int64)
        theta0 = (phase_t - free_thetas @ bs[1:].astype(float)
                  + 2.0 * math.pi * sheet) / bs[0]
        theta = np.concatenate([theta0[:, None] % (2.0 * math.pi),
                                free_thetas], axis=1)

        if nf:
            radii = np.sqrt(g.uniform(0.0, 1.0, size=(m, nf)))
            fphase = g.uniform(0.0, 2.0 * math.pi, size=(m, nf))
            fib = radii * np.exp(1j * fphase)
        else:
            fib = np.zeros((m, 0), dtype=complex)

        ys = num / float(_DYADIC_ONE)
        x = ys / bs
        zdiv = np.exp(-T * x) * np.exp(1j * theta)
        zs = np.concatenate([zdiv, fib], axis=1)
        w = np.abs(model.u(zs)) ** 2 / u0

        nums.append(num)
        thetas_all.append(theta)
        fibers.append(fib)
        weights.append(w)

    numerators = np.concatenate(nums)
    xs = (numerators / float(_DYADIC_ONE)) / bs
    return SampleBatch(model, int(seed), count, numerators, xs,
                       np.concatenate(thetas_all), np.concatenate(fibers),
                       np.concatenate(weights))


# ---------------------------------------------------------------------------
# distance to the uniform measure


@dataclass(frozen=True)
class DistanceReport:
    distance: float
    standard_error: float
    statistic: str
    cells: tuple = ()

    def within(self, multiple=3.0):
        return self.distance <= multiple * self.standard_error


def ks_statistic(sorted_points, weights):
    """Weighted Kolmogorov-Smirnov distance to the uniform law on [0, 1]."""
    cum = np.cumsum(weights)
    total = cum[-1]
    upper = np.abs(cum / total - sorted_points)
    lower = np.abs(np.concatenate([[0.0], cum[:-1]]) / total - sorted_points)
    return float(max(upper.max(), lower.max()))


def cell_statistic(empirical, exact):
    """Sup deviation between two discrete mass vectors."""
    emp = np.asarray(empirical, dtype=float)
    exa = np.asarray(exact, dtype=float)
    if emp.shape != exa.shape:
        raise ValueError("mass vectors must have equal length")
    return float(np.abs(emp - exa).max())


def dyadic_cell_volumes(p, level):
    """Exact relative volumes of dyadic cells intersected with the simplex.

    Cells are the boxes of side 2^-level in the free coordinates y_1..y_p,
    the simplex is ``sum y_i <= 1``; volumes are normalized by the simplex
    volume 1/p! and returned as a flat array indexed like ravel of the
    (2^level)^p grid.
    """
    side = Fraction(1, 1 << level)
    k = 1 << level
    shape = (k,) * p
    vols = np.zeros(k ** p, dtype=object)
    for flat in range(k ** p):
        idx = np.unravel_index(flat, shape)
        lo = [side * i for i in idx]
        cap = 1 - sum(lo)
        v = box_simplex_volume([side] * p, [Fraction(1)] * p, cap)
        vols[flat] = v * math.factorial(p)
    return vols


def pushforward_distance(batch, level=2):
    """Sup-distance between the weighted empirical law of the simplex
    coordinates and the uniform one.

    In one free dimension this is a weighted Kolmogorov-Smirnov statistic;
    in higher dimension it is the sup over a fixed dyadic partition of the
    difference between empirical and exact cell masses.  The reported
    standard error uses the effective sample size of the weights.
    """
    p = batch.model.depth
    neff = batch.effective_sample_size()
    if p == 0:
        return DistanceReport(0.0, 0.0, "point")
    ys = batch.numerators[:, 1:] / float(_DYADIC_ONE)
    if p == 1:
        order = np.argsort(ys[:, 0], kind="stable")
        d = ks_statistic(ys[order, 0], batch.weights[order])
        return DistanceReport(d, 1.0 / math.sqrt(neff), "ks")
    k = 1 << level
    cell_idx = np.minimum(batch.numerators[:, 1:] >> (_DYADIC_BITS - level),
                          k - 1)
    flat = np.ravel_multi_index(tuple(cell_idx.T), (k,) * p)
    emp = np.bincount(flat, weights=batch.weights, minlength=k ** p)
    emp = emp / batch.weights.sum()
    exact = dyadic_cell_volumes(p, level).astype(float)
    d = cell_statistic(emp, exact)
    worst = float(np.max(np.sqrt(exact * (1.0 - exact)))) / math.sqrt(neff)
    return DistanceReport(d, worst, "dyadic-cells",
                          cells=tuple(zip(emp.tolist(), exact.tolist())))


# ---------------------------------------------------------------------------
# volume estimates and growth order


def estimate_volume(model, count, seed):
    """Monte Carlo estimate of the local volume integral.

    The flat prefactor integrates the log-polar form exactly; the sample
    mean carries the |u|^2 correction and the ``|z_i|^{2 a_i}`` damping.
    """
    batch = sample_cy_measure(model, count, seed)
    return volume_from_batch(batch)


def volume_from_batch(batch):
    model = batch.model
    p = model.depth
    T = model.log_scale
    norm = math.factorial(p)
    for b in model.multiplicities:
        norm *= b
    pref = (2.0 ** p) * (2.0 * math.pi) ** model.dimension * T ** p / norm
    u0 = abs(model.u.constant_term()) ** 2
    a = np.array(model.weights)
    damping = np.exp(-2.0 * T * (batch.xs @ a)) if a.any() else 1.0
    return pref * u0 * float(np.mean(batch.weights * damping))


def exact_flat_volume(model):
    """Closed-form volume for u constant and zero damping weights."""
    if model.u.terms != {(0,) * (model.dimension + 1):
                         model.u.constant_term()}:
        raise ValueError("exact volume needs a constant u")
    if any(model.weights):
        raise ValueError("exact volume needs zero damping weights")
    p = model.depth
    T = model.log_scale
    norm = math.factorial(p)
    for b in model.multiplicities:
        norm *= b
    return (2.0 ** p) * (2.0 * math.pi) ** model.dimension * T ** p \
        / norm * abs(model.u.constant_term()) ** 2


@dataclass(frozen=True)
class GrowthReport:
    exponent: float
    expected: int
    log_scales: tuple
    volumes: tuple

    def within(self, tol=0.1):
        return abs(self.exponent - self.expected) <= tol


def volume_growth_exponent(model, t_values, count=100000, seed=0):
    """Fit the growth order of the local volume in T = |log|t||.

    Estimates the volume for each t, then least-squares fits
    log(volume) against log(T).  The expected exponent is the number of
    zero damping weights minus one.
    """
    ts = [complex(t) for t in t_values]
    if len(set(abs(t) for t in ts)) < 2:
        raise ValueError("need at least two distinct |t| values")
    logT, logV = [], []
    for t in ts:
        variant = model.with_t(t)
        v = estimate_volume(variant, count, seed)
        logT.append(math.log(variant.log_scale))
        logV.append(math.log(v))
    slope = float(np.polyfit(logT, logV, 1)[0])
    return GrowthReport(slope, model.expected_growth_exponent(),
                        tuple(math.exp(u) for u in logT), tuple(
                            math.exp(v) for v in logV))
