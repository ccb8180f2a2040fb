"""Pure-numpy implementations of the kernels in ``_core.pyx``.

Integer streams match the compiled core bit for bit. Floating-point transforms
can differ from it in the last ulp because numpy's vectorized ``sin``/``log``
are not guaranteed to round like libm.
"""

import numpy as np

KIND_SYM1D, KIND_ISO, KIND_POS, KIND_PARETO = 0, 1, 2, 3
DRIFT_OU, DRIFT_LINEAR, DRIFT_OU_SINE = 0, 1, 2
MODE_FINAL, MODE_MOMENT, MODE_COUPLED = 0, 1, 2

_M0 = np.uint64(0xD2E7470EE14C6C93)
_M1 = np.uint64(0xCA5A826395121157)
_W0 = np.uint64(0x9E3779B97F4A7C15)
_W1 = np.uint64(0xBB67AE8584CAA73B)
_LO32 = np.uint64(0xFFFFFFFF)
_S32 = np.uint64(32)
_S11 = np.uint64(11)


def _mulhilo(a, b):
    a_lo, a_hi = a & _LO32, a >> _S32
    b_lo, b_hi = b & _LO32, b >> _S32
    p0 = a_lo * b_lo
    p1 = a_lo * b_hi
    p2 = a_hi * b_lo
    p3 = a_hi * b_hi
    mid = (p0 >> _S32) + (p1 & _LO32) + (p2 & _LO32)
    hi = p3 + (p1 >> _S32) + (p2 >> _S32) + (mid >> _S32)
    return hi, a * b


def philox_blocks(k0, k1, c0):
    """Philox4x64-10 on broadcast arrays of keys and first counter words.

    Returns an array of shape ``broadcast_shape + (4,)``.
    """
    k0, k1, c0 = np.broadcast_arrays(
        np.asarray(k0, dtype=np.uint64),
        np.asarray(k1, dtype=np.uint64),
        np.asarray(c0, dtype=np.uint64),
    )
    k0 = k0.copy()
    k1 = k1.copy()
    x0 = c0.copy()
    x1 = np.zeros_like(x0)
    x2 = np.zeros_like(x0)
    x3 = np.zeros_like(x0)
    with np.errstate(over="ignore"):
        for r in range(10):
            if r:
                k0 += _W0
                k1 += _W1
            hi0, lo0 = _mulhilo(_M0, x0)
            hi1, lo1 = _mulhilo(_M1, x2)
            x0, x1, x2, x3 = hi1 ^ x1 ^ k0, lo1, hi0 ^ x3 ^ k1, lo0
    return np.stack([x0, x1, x2, x3], axis=-1)


def philox_raw(seed, stream, first_block, n_blocks):
    blocks = np.arange(n_blocks, dtype=np.uint64) + np.uint64(first_block)
    return philox_blocks(np.uint64(seed), np.uint64(stream), blocks).reshape(-1)


def _to_open_unit(raw):
    return ((raw >> _S11).astype(np.float64) + 0.5) * 2.0**-53


def uniforms_per_draw(kind, d):
    if kind in (KIND_SYM1D, KIND_POS):
        return 2
    if kind == KIND_ISO:
        return 2 + 2 * ((d + 1) // 2)
    if d == 1:
        return 2
    return 1 + 2 * ((d + 1) // 2)


def blocks_per_draw(kind, d):
    return (uniforms_per_draw(kind, d) + 3) // 4


def _uniforms(seed, streams, first_blocks, nb):
    # shape (n, 4 * nb)
    ctr = np.asarray(first_blocks, dtype=np.uint64)[:, None] + np.arange(nb, dtype=np.uint64)
    raw = philox_blocks(np.uint64(seed), np.asarray(streams, dtype=np.uint64)[:, None], ctr)
    return _to_open_unit(raw.reshape(raw.shape[0], -1))


def _gaussians(u, d):
    n = u.shape[0]
    out = np.empty((n, d))
    for i in range(0, d, 2):
        r = np.sqrt(-2.0 * np.log(u[:, i]))
        th = 2.0 * np.pi * u[:, i + 1]
        out[:, i] = r * np.cos(th)
        if i + 1 < d:
            out[:, i + 1] = r * np.sin(th)
    return out


def _cms_symmetric(alpha, u1, u2):
    v = np.pi * (u1 - 0.5)
    w = -np.log(u2)
    return (np.sin(alpha * v) / np.cos(v) ** (1.0 / alpha)
            * (np.cos((1.0 - alpha) * v) / w) ** ((1.0 - alpha) / alpha))


def _kanter_positive(a, u1, u2):
    v = np.pi * u1
    w = -np.log(u2)
    return (np.sin(a * v) / np.sin(v) ** (1.0 / a)
            * (np.sin((1.0 - a) * v) / w) ** ((1.0 - a) / a))


def _unit_draws(kind, d, alpha, u):
    if kind == KIND_SYM1D:
        return _cms_symmetric(alpha, u[:, 0], u[:, 1])[:, None]
    if kind == KIND_POS:
        return _kanter_positive(alpha, u[:, 0], u[:, 1])[:, None]
    if kind == KIND_ISO:
        s = _kanter_positive(0.5 * alpha, u[:, 0], u[:, 1])
        return np.sqrt(2.0 * s)[:, None] * _gaussians(u[:, 2:], d)
    r = u[:, 0] ** (-1.0 / alpha)
    if d == 1:
        return np.where(u[:, 1] < 0.5, -r, r)[:, None]
    g = _gaussians(u[:, 1:], d)
    return r[:, None] * g / np.sqrt(np.sum(g * g, axis=1))[:, None]


def draw_units(kind, d, alpha, seed, stream, first_draw, n):
    nb = blocks_per_draw(kind, d)
    idx = np.arange(n, dtype=np.uint64) + np.uint64(first_draw)
    u = _uniforms(seed, np.full(n, stream, dtype=np.uint64), idx * np.uint64(nb), nb)
    return _unit_draws(kind, d, alpha, u)


def _drift(code, y, A, c):
    if code == DRIFT_OU:
        return -y
    if code == DRIFT_LINEAR:
        return -(y @ A.T)
    return -y + c * np.sin(y)


def _drift_diff(code, y, D, A, c):
    if code == DRIFT_OU:
        return -D
    if code == DRIFT_LINEAR:
        return -(D @ A.T)
    return -D + 2.0 * c * np.cos(y - 0.5 * D) * np.sin(0.5 * D)


def simulate_chunk(mode, scheme_kind, drift_code, A, c, x0, y0, eta, steps, alpha, scale,
                   seed, first_chain, n_chains, noise_off, beta, drift_fn=None):
    """Vectorized over chains; ``drift_fn`` (batch callable) overrides ``drift_code``."""
    x0 = np.asarray(x0, dtype=np.float64)
    d = x0.shape[0]
    nb = blocks_per_draw(scheme_kind, d)
    streams = np.arange(n_chains, dtype=np.uint64) + np.uint64(first_chain)
    y = np.tile(x0, (n_chains, 1))
    # coupled mode: z is the difference X - Y
    z = np.tile(x0 - np.asarray(y0, dtype=np.float64), (n_chains, 1))
    acc = np.zeros(steps + 1)

    def drift(v):
        return drift_fn(v) if drift_fn is not None else _drift(drift_code, v, A, c)

    def drift_diff(v, D):
        if drift_fn is not None:
            return drift_fn(v) - drift_fn(v - D)
        return _drift_diff(drift_code, v, D, A, c)

    def record(k):
        if mode == MODE_MOMENT:
            acc[k] = _ordered_sum(np.sqrt(np.sum(y * y, axis=1)) ** beta)
        elif mode == MODE_COUPLED:
            acc[k] = _ordered_sum(np.sqrt(np.sum(z * z, axis=1)))

    record(0)
    for k in range(steps):
        if noise_off:
            inc = np.zeros_like(y)
        else:
            u = _uniforms(seed, streams, np.full(n_chains, k * nb, dtype=np.uint64), nb)
            inc = _unit_draws(scheme_kind, d, alpha, u)
        if mode == MODE_COUPLED:
            z = z + eta * drift_diff(y, z)
        y = y + eta * drift(y) + scale * inc
        if mode == MODE_COUPLED:
            bad = ~(np.all(np.isfinite(y), axis=1) & np.all(np.isfinite(z), axis=1))
        else:
            bad = ~np.all(np.isfinite(y), axis=1)
        if bad.any():
            j = int(np.argmax(bad))
            return y, acc, 1, first_chain + j, k
        record(k + 1)
    return y, acc, 0, -1, -1


def _ordered_sum(v):
    # cumsum accumulates left to right, the same order as the compiled chain loop
    return float(np.cumsum(v)[-1]) if v.size else 0.0


def phim1_series(u, alpha, sigma_alpha):
    u = np.abs(np.asarray(u, dtype=np.float64))
    u2 = u * u
    t = np.ones_like(u)
    s = np.zeros_like(u)
    for k in range(1, 60):
        t = t * u2 / ((2.0 * k - 1.0) * (2.0 * k))
        term = t / (2.0 * k - alpha)
        s = s + term if k % 2 == 1 else s - term
        if np.all(term <= 1e-18 * np.abs(s)):
            break
    return -sigma_alpha * u**alpha + alpha * s


def log_pareto_product(u0, ratio, start, stop, alpha, sigma_alpha):
    i = np.arange(start, stop, dtype=np.float64)
    p = phim1_series(abs(u0) * np.exp(i * np.log(ratio)), alpha, sigma_alpha)
    if np.any(p <= -1.0):
        return float("nan")
    return float(np.sum(np.log1p(p)))
