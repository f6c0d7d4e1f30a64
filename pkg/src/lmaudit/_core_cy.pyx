# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Scalar numeric kernels, compiled backend.

Mirror of ``_core_py`` with identical algorithms and operation order; keep
both in sync.  Compiled with ``-ffp-contract=off`` so results are
bit-for-bit identical to the pure-Python backend.
"""

from libc.math cimport log, log1p, exp, sqrt, isnan, isinf
from libc.stdint cimport uint32_t, uint64_t

import numpy

from .errors import NumericError

__all__ = [
    "log_gamma",
    "reg_incomplete_beta",
    "f_sf",
    "t_cdf",
    "t_sf",
    "t_pdf",
    "t_quantile",
    "normal_quantile",
    "Pcg32",
]

cdef double M_PI = 3.141592653589793

cdef double[14] _LANCZOS_COEFFS
_LANCZOS_COEFFS[0] = 57.1562356658629235
_LANCZOS_COEFFS[1] = -59.5979603554754912
_LANCZOS_COEFFS[2] = 14.1360979747417471
_LANCZOS_COEFFS[3] = -0.491913816097620199
_LANCZOS_COEFFS[4] = 0.339946499848118887e-4
_LANCZOS_COEFFS[5] = 0.465236289270485756e-4
_LANCZOS_COEFFS[6] = -0.983744753048795646e-4
_LANCZOS_COEFFS[7] = 0.158088703224912494e-3
_LANCZOS_COEFFS[8] = -0.210264441724104883e-3
_LANCZOS_COEFFS[9] = 0.217439618115212643e-3
_LANCZOS_COEFFS[10] = -0.164318106536763890e-3
_LANCZOS_COEFFS[11] = 0.844182239838527433e-4
_LANCZOS_COEFFS[12] = -0.261908384015814087e-4
_LANCZOS_COEFFS[13] = 0.368991826595316234e-5

cdef double _SQRT_2PI = 2.5066282746310005

cdef double _BETA_EPS = 1e-15
cdef double _BETA_FPMIN = 1e-300
cdef int _BETA_ITMAX = 2000


cdef double _log_gamma(double x):
    cdef double y = x
    cdef double tmp = x + 5.2421875
    cdef double ser = 0.999999999999997092
    cdef int i
    tmp = (x + 0.5) * log(tmp) - tmp
    for i in range(14):
        y += 1.0
        ser += _LANCZOS_COEFFS[i] / y
    return tmp + log(_SQRT_2PI * ser / x)


def log_gamma(double x):
    """Natural log of the gamma function for x > 0."""
    if not (x > 0.0) or isinf(x):
        raise NumericError(f"log_gamma requires finite x > 0, got {x!r}")
    return _log_gamma(x)


cdef double _beta_contfrac(double x, double a, double b) except? -1.0:
    cdef double qab = a + b
    cdef double qap = a + 1.0
    cdef double qam = a - 1.0
    cdef double c = 1.0
    cdef double d = 1.0 - qab * x / qap
    cdef double h, aa, delta
    cdef int m, m2
    if abs(d) < _BETA_FPMIN:
        d = _BETA_FPMIN
    d = 1.0 / d
    h = d
    for m in range(1, _BETA_ITMAX + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < _BETA_FPMIN:
            d = _BETA_FPMIN
        c = 1.0 + aa / c
        if abs(c) < _BETA_FPMIN:
            c = _BETA_FPMIN
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < _BETA_FPMIN:
            d = _BETA_FPMIN
        c = 1.0 + aa / c
        if abs(c) < _BETA_FPMIN:
            c = _BETA_FPMIN
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _BETA_EPS:
            return h
    raise NumericError(
        f"incomplete beta continued fraction failed to converge (x={x}, a={a}, b={b})"
    )


cdef double _reg_incomplete_beta(double x, double a, double b) except? -1.0:
    cdef double ln_front, front
    if x == 0.0:
        return 0.0
    if x == 1.0:
        return 1.0
    ln_front = (
        a * log(x)
        + b * log1p(-x)
        - (_log_gamma(a) + _log_gamma(b) - _log_gamma(a + b))
    )
    front = exp(ln_front)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _beta_contfrac(x, a, b) / a
    return 1.0 - front * _beta_contfrac(1.0 - x, b, a) / b


def reg_incomplete_beta(double x, double a, double b):
    """Regularized incomplete beta function I_x(a, b) for 0 <= x <= 1."""
    if not (a > 0.0 and b > 0.0) or isinf(a) or isinf(b):
        raise NumericError(f"reg_incomplete_beta requires a, b > 0, got a={a!r}, b={b!r}")
    if not (0.0 <= x <= 1.0):
        raise NumericError(f"reg_incomplete_beta requires 0 <= x <= 1, got {x!r}")
    return _reg_incomplete_beta(x, a, b)


def f_sf(double f, double df1, double df2):
    """Upper tail probability of the F distribution, P[F(df1, df2) > f]."""
    if not (df1 > 0.0 and df2 > 0.0):
        raise NumericError(f"f_sf requires positive degrees of freedom, got {df1!r}, {df2!r}")
    if not (f >= 0.0) or isinf(f):
        raise NumericError(f"f_sf requires finite f >= 0, got {f!r}")
    return _reg_incomplete_beta(df2 / (df2 + df1 * f), 0.5 * df2, 0.5 * df1)


cdef double _t_cdf(double t, double df) except? -1.0:
    cdef double tail
    if t == 0.0:
        return 0.5
    tail = 0.5 * _reg_incomplete_beta(df / (df + t * t), 0.5 * df, 0.5)
    return 1.0 - tail if t > 0.0 else tail


def t_cdf(double t, double df):
    """Cumulative distribution function of Student's t with df > 0."""
    if not (df > 0.0):
        raise NumericError(f"t_cdf requires df > 0, got {df!r}")
    if isnan(t):
        raise NumericError("t_cdf requires finite t")
    return _t_cdf(t, df)


def t_sf(double t, double df):
    """Upper tail probability of Student's t, P[T(df) > t]."""
    return t_cdf(-t, df)


cdef double _t_pdf(double t, double df):
    cdef double ln = (
        _log_gamma(0.5 * (df + 1.0))
        - _log_gamma(0.5 * df)
        - 0.5 * log(df * M_PI)
        - 0.5 * (df + 1.0) * log1p(t * t / df)
    )
    return exp(ln)


def t_pdf(double t, double df):
    """Density of Student's t with df > 0."""
    if not (df > 0.0):
        raise NumericError(f"t_pdf requires df > 0, got {df!r}")
    return _t_pdf(t, df)


def t_quantile(double p, double df):
    """Quantile of Student's t: the t with t_cdf(t, df) = p.

    Inverted by safeguarded Newton iteration on the CDF, so the result
    satisfies |t_cdf(result, df) - p| <= 1e-10 over the supported range.
    """
    cdef double lo, hi, t, err, dens, step, nxt
    cdef int i
    if not (df > 0.0):
        raise NumericError(f"t_quantile requires df > 0, got {df!r}")
    if not (0.0 < p < 1.0):
        raise NumericError(f"t_quantile requires 0 < p < 1, got {p!r}")
    if p == 0.5:
        return 0.0
    if p < 0.5:
        return -t_quantile(1.0 - p, df)

    lo = 0.0
    hi = max(1.0, _normal_quantile(p) * 2.0)
    while _t_cdf(hi, df) < p:
        lo = hi
        hi *= 2.0
        if hi > 1e300:
            raise NumericError(f"t_quantile bracket expansion failed (p={p}, df={df})")
    t = min(max(_normal_quantile(p), lo), hi)
    if t <= lo or t >= hi:
        t = 0.5 * (lo + hi)
    for i in range(200):
        err = _t_cdf(t, df) - p
        if abs(err) <= 1e-13:
            return t
        if err > 0.0:
            hi = t
        else:
            lo = t
        dens = _t_pdf(t, df)
        if dens > 0.0:
            step = err / dens
            nxt = t - step
        else:
            nxt = 0.5 * (lo + hi)
        if not (lo < nxt < hi):
            nxt = 0.5 * (lo + hi)
        if abs(nxt - t) <= 1e-15 * max(1.0, abs(t)):
            t = nxt
            break
        t = nxt
    if abs(_t_cdf(t, df) - p) > 1e-10:
        raise NumericError(f"t_quantile failed to converge (p={p}, df={df})")
    return t


# AS 241 (Wichura), PPND16 coefficient sets.
cdef double[8] _PPND_A
_PPND_A[0] = 3.3871328727963666080e0
_PPND_A[1] = 1.3314166789178437745e2
_PPND_A[2] = 1.9715909503065514427e3
_PPND_A[3] = 1.3731693765509461125e4
_PPND_A[4] = 4.5921953931549871457e4
_PPND_A[5] = 6.7265770927008700853e4
_PPND_A[6] = 3.3430575583588128105e4
_PPND_A[7] = 2.5090809287301226727e3

cdef double[8] _PPND_B
_PPND_B[0] = 1.0
_PPND_B[1] = 4.2313330701600911252e1
_PPND_B[2] = 6.8718700749205790830e2
_PPND_B[3] = 5.3941960214247511077e3
_PPND_B[4] = 2.1213794301586595867e4
_PPND_B[5] = 3.9307895800092710610e4
_PPND_B[6] = 2.8729085735721942674e4
_PPND_B[7] = 5.2264952788528545610e3

cdef double[8] _PPND_C
_PPND_C[0] = 1.42343711074968357734e0
_PPND_C[1] = 4.63033784615654529590e0
_PPND_C[2] = 5.76949722146069140550e0
_PPND_C[3] = 3.64784832476320460504e0
_PPND_C[4] = 1.27045825245236838258e0
_PPND_C[5] = 2.41780725177450611770e-1
_PPND_C[6] = 2.27238449892691845833e-2
_PPND_C[7] = 7.74545014278341407640e-4

cdef double[8] _PPND_D
_PPND_D[0] = 1.0
_PPND_D[1] = 2.05319162663775882187e0
_PPND_D[2] = 1.67638483018380384940e0
_PPND_D[3] = 6.89767334985100004550e-1
_PPND_D[4] = 1.48103976427480074590e-1
_PPND_D[5] = 1.51986665636164571966e-2
_PPND_D[6] = 5.47593808499534494600e-4
_PPND_D[7] = 1.05075007164441684324e-9

cdef double[8] _PPND_E
_PPND_E[0] = 6.65790464350110377720e0
_PPND_E[1] = 5.46378491116411436990e0
_PPND_E[2] = 1.78482653991729133580e0
_PPND_E[3] = 2.96560571828504891230e-1
_PPND_E[4] = 2.65321895265761230930e-2
_PPND_E[5] = 1.24266094738807843860e-3
_PPND_E[6] = 2.71155556874348757815e-5
_PPND_E[7] = 2.01033439929228813265e-7

cdef double[8] _PPND_F
_PPND_F[0] = 1.0
_PPND_F[1] = 5.99832206555887937690e-1
_PPND_F[2] = 1.36929880922735805310e-1
_PPND_F[3] = 1.48753612908506148525e-2
_PPND_F[4] = 7.86869131145613259100e-4
_PPND_F[5] = 1.84631831751005468180e-5
_PPND_F[6] = 1.42151175831644588870e-7
_PPND_F[7] = 2.04426310338993978564e-15


cdef double _ppnd_poly(double* coeffs, double r):
    cdef double acc = coeffs[7]
    cdef int i
    for i in range(6, -1, -1):
        acc = acc * r + coeffs[i]
    return acc


cdef double _normal_quantile(double p) except? -1.0:
    cdef double q = p - 0.5
    cdef double r, x
    if abs(q) <= 0.425:
        r = 0.180625 - q * q
        return q * _ppnd_poly(_PPND_A, r) / _ppnd_poly(_PPND_B, r)
    r = p if q < 0.0 else 1.0 - p
    r = sqrt(-log(r))
    if r <= 5.0:
        r -= 1.6
        x = _ppnd_poly(_PPND_C, r) / _ppnd_poly(_PPND_D, r)
    else:
        r -= 5.0
        x = _ppnd_poly(_PPND_E, r) / _ppnd_poly(_PPND_F, r)
    return -x if q < 0.0 else x


def normal_quantile(double p):
    """Standard normal quantile (inverse CDF) via AS 241."""
    if not (0.0 < p < 1.0):
        raise NumericError(f"normal_quantile requires 0 < p < 1, got {p!r}")
    return _normal_quantile(p)


cdef uint64_t _PCG_MULT = 6364136223846793005
cdef double _TWO_NEG52 = 2.0**-52


cdef class Pcg32:
    """PCG-XSH-RR 64/32 pseudo-random generator with portable semantics.

    Identical streams to the pure-Python backend; see ``_core_py.Pcg32``
    for the full description of the state transition and derived draws.
    """

    cdef uint64_t _state
    cdef uint64_t _inc

    def __init__(self, seed, stream=0):
        self._inc = (((<uint64_t> stream) << 1) | 1)
        self._state = 0
        self._state = self._state * _PCG_MULT + self._inc
        self._state = self._state + (<uint64_t> seed)
        self._state = self._state * _PCG_MULT + self._inc

    cdef uint32_t _next_u32(self):
        cdef uint64_t old = self._state
        cdef uint32_t xorshifted, rot
        self._state = old * _PCG_MULT + self._inc
        xorshifted = <uint32_t> (((old >> 18) ^ old) >> 27)
        rot = <uint32_t> (old >> 59)
        return (xorshifted >> rot) | (xorshifted << ((32 - rot) & 31))

    def next_u32(self):
        return self._next_u32()

    cdef double _uniform(self):
        cdef uint64_t hi = self._next_u32()
        cdef uint64_t lo = self._next_u32()
        cdef uint64_t u52 = ((hi << 32) | lo) >> 12
        return (<double> u52 + 0.5) * _TWO_NEG52

    def uniform(self):
        return self._uniform()

    def normal(self):
        return _normal_quantile(self._uniform())

    def uniforms(self, n):
        """Return n uniform draws as a float64 array."""
        out = numpy.empty(n, dtype=numpy.float64)
        cdef double[::1] view = out
        cdef Py_ssize_t i
        for i in range(view.shape[0]):
            view[i] = self._uniform()
        return out

    def normals(self, n):
        """Return n standard normal draws as a float64 array."""
        out = numpy.empty(n, dtype=numpy.float64)
        cdef double[::1] view = out
        cdef Py_ssize_t i
        for i in range(view.shape[0]):
            view[i] = _normal_quantile(self._uniform())
        return out
