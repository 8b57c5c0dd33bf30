"""Hot inner loops: the matching-pursuit iteration and scheduler priority bumps.

Each kernel exists twice, an explicit-loop version compiled with numba and a
vectorised numpy version. ``matching_pursuit`` and ``bump_priorities`` point
at the numba pair unless ``CAFSE_NO_NUMBA`` is set (see ``cafse._jit``).
Both variants are always importable so they can be checked against each
other.
"""

import numpy as np

from ._jit import USE_NUMBA, njit

__all__ = [
    "canonical_mask",
    "matching_pursuit",
    "matching_pursuit_jit",
    "matching_pursuit_numpy",
    "bump_priorities",
    "bump_priorities_jit",
    "bump_priorities_numpy",
]


def canonical_mask(n):
    """True where (k1, k2) is lexicographically <= its mirror (-k1, -k2) mod n."""
    k1, k2 = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
    m1 = (n - k1) % n
    m2 = (n - k2) % n
    return (k1 < m1) | ((k1 == m1) & (k2 <= m2))


def _trig_tables(n):
    phase = 2.0 * np.pi * np.arange(n) / n
    return np.cos(phase), np.sin(phase)


# ---------------------------------------------------------------------------
# matching pursuit


@njit
def _mp_loop_jit(rw, w2, residual, weights, coeffs, gamma, w0, cos_tab, sin_tab,
                 selected, increments, e_before, e_after, box):
    n = rw.shape[0]
    mask = n - 1  # n is a power of two
    iterations = selected.shape[0]
    r_lo, r_hi, c_lo, c_hi = box[0], box[1], box[2], box[3]

    energy = 0.0
    for m in range(r_lo, r_hi):
        for k in range(c_lo, c_hi):
            energy += weights[m, k] * residual[m, k] * residual[m, k]

    for it in range(iterations):
        e_before[it] = energy

        best = -1.0
        u1 = 0
        u2 = 0
        for k1 in range(n):
            m1 = (n - k1) & mask
            if k1 > m1:
                continue
            # row k1 == its mirror: only k2 <= n/2 (or k2 == 0) is canonical
            k2_end = n // 2 + 1 if k1 == m1 else n
            for k2 in range(k2_end):
                z = rw[k1, k2]
                v = z.real * z.real + z.imag * z.imag
                if v > best:
                    best = v
                    u1 = k1
                    u2 = k2

        v1 = (n - u1) & mask
        v2 = (n - u2) & mask
        self_conj = u1 == v1 and u2 == v2
        dc = gamma * rw[u1, u2] / w0
        if self_conj:
            dc = complex(dc.real, 0.0)
        dcc = dc.conjugate()

        selected[it, 0] = u1
        selected[it, 1] = u2
        increments[it] = dc
        coeffs[u1, u2] += dc
        if not self_conj:
            coeffs[v1, v2] += dcc

        # w2 is W tiled 2x2, so w2[k - u + n] == W[(k - u) mod n].
        # The spectrum of the real weighted residual is conjugate symmetric and
        # selection only reads rows 0..n/2, so the other rows are left stale.
        if self_conj:
            for k1 in range(n // 2 + 1):
                a1 = k1 - u1 + n
                for k2 in range(n):
                    rw[k1, k2] -= dc * w2[a1, k2 - u2 + n]
        else:
            for k1 in range(n // 2 + 1):
                a1 = k1 - u1 + n
                b1 = k1 - v1 + n
                for k2 in range(n):
                    rw[k1, k2] -= dc * w2[a1, k2 - u2 + n] + dcc * w2[b1, k2 - v2 + n]

        scale = 1.0 if self_conj else 2.0
        dr = scale * dc.real
        di = scale * dc.imag
        energy = 0.0
        for m in range(r_lo, r_hi):
            idx = (u1 * m + u2 * c_lo) & mask
            for k in range(c_lo, c_hi):
                r = residual[m, k] - (dr * cos_tab[idx] - di * sin_tab[idx])
                residual[m, k] = r
                energy += weights[m, k] * r * r
                idx = (idx + u2) & mask
        e_after[it] = energy


def _mp_loop_numpy(rw, w2, residual, weights, coeffs, gamma, w0, cos_tab, sin_tab,
                   selected, increments, e_before, e_after, box):
    n = rw.shape[0]
    iterations = selected.shape[0]
    canon = canonical_mask(n)
    mm, kk = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
    w_full = w2[:n, :n]

    energy = float(np.sum(weights * residual * residual))
    for it in range(iterations):
        e_before[it] = energy

        mag = rw.real * rw.real + rw.imag * rw.imag
        mag[~canon] = -1.0
        u1, u2 = np.unravel_index(int(np.argmax(mag)), mag.shape)
        u1, u2 = int(u1), int(u2)
        v1, v2 = (n - u1) % n, (n - u2) % n
        self_conj = u1 == v1 and u2 == v2
        dc = gamma * rw[u1, u2] / w0
        if self_conj:
            dc = complex(dc.real, 0.0)

        selected[it] = (u1, u2)
        increments[it] = dc
        coeffs[u1, u2] += dc
        if not self_conj:
            coeffs[v1, v2] += np.conj(dc)

        upd = dc * np.roll(w_full, (u1, u2), axis=(0, 1))
        if not self_conj:
            upd += np.conj(dc) * np.roll(w_full, (v1, v2), axis=(0, 1))
        rw -= upd

        scale = 1.0 if self_conj else 2.0
        idx = (u1 * mm + u2 * kk) % n
        residual -= scale * (dc.real * cos_tab[idx] - dc.imag * sin_tab[idx])
        energy = float(np.sum(weights * residual * residual))
        e_after[it] = energy


def _run_mp(loop, samples, weights, gamma, iterations):
    samples = np.asarray(samples, dtype=np.float64)
    weights = np.ascontiguousarray(weights, dtype=np.float64)
    n = samples.shape[0]
    residual = np.where(weights > 0, samples, 0.0)
    big_w, rw = np.fft.fft2(np.stack([weights, residual * weights]))
    w0 = float(big_w[0, 0].real)
    w2 = np.ascontiguousarray(np.tile(big_w, (2, 2)))
    cos_tab, sin_tab = _trig_tables(n)

    coeffs = np.zeros((n, n), dtype=np.complex128)
    selected = np.zeros((iterations, 2), dtype=np.int64)
    increments = np.zeros(iterations, dtype=np.complex128)
    e_before = np.zeros(iterations)
    e_after = np.zeros(iterations)
    rows = np.flatnonzero(weights.any(axis=1))
    cols = np.flatnonzero(weights.any(axis=0))
    # residual values outside the weight support never matter
    box = np.array([rows[0], rows[-1] + 1, cols[0], cols[-1] + 1], dtype=np.int64)
    loop(rw, w2, residual, weights, coeffs, float(gamma), w0, cos_tab, sin_tab,
         selected, increments, e_before, e_after, box)
    return coeffs, selected, increments, e_before, e_after


def matching_pursuit_jit(samples, weights, gamma, iterations):
    return _run_mp(_mp_loop_jit, samples, weights, gamma, iterations)


def matching_pursuit_numpy(samples, weights, gamma, iterations):
    return _run_mp(_mp_loop_numpy, samples, weights, gamma, iterations)


# ---------------------------------------------------------------------------
# scheduler priority bumps


@njit
def _bump_jit(priority, fresh, row0, col0, bs, border):
    """Add fresh pixels (a block-local mask at image offset row0, col0) to the
    priority of every block whose support window contains them."""
    gh, gw = priority.shape
    h, w = fresh.shape
    for i in range(h):
        r = row0 + i
        # block rows rb with rb*bs - border <= r < rb*bs + bs + border
        lo_r = (r - bs - border) // bs + 1
        hi_r = (r + border) // bs
        if lo_r < 0:
            lo_r = 0
        if hi_r > gh - 1:
            hi_r = gh - 1
        for j in range(w):
            if not fresh[i, j]:
                continue
            c = col0 + j
            lo_c = (c - bs - border) // bs + 1
            hi_c = (c + border) // bs
            if lo_c < 0:
                lo_c = 0
            if hi_c > gw - 1:
                hi_c = gw - 1
            for rb in range(lo_r, hi_r + 1):
                for cb in range(lo_c, hi_c + 1):
                    priority[rb, cb] += 1


def _bump_numpy(priority, fresh, row0, col0, bs, border):
    gh, gw = priority.shape
    h, w = fresh.shape
    lo_r = max((row0 - bs - border) // bs + 1, 0)
    hi_r = min((row0 + h - 1 + border) // bs, gh - 1)
    lo_c = max((col0 - bs - border) // bs + 1, 0)
    hi_c = min((col0 + w - 1 + border) // bs, gw - 1)
    for rb in range(lo_r, hi_r + 1):
        r_lo = max(rb * bs - border - row0, 0)
        r_hi = min(rb * bs + bs + border - row0, h)
        if r_hi <= r_lo:
            continue
        for cb in range(lo_c, hi_c + 1):
            c_lo = max(cb * bs - border - col0, 0)
            c_hi = min(cb * bs + bs + border - col0, w)
            if c_hi <= c_lo:
                continue
            priority[rb, cb] += int(np.count_nonzero(fresh[r_lo:r_hi, c_lo:c_hi]))


def bump_priorities_jit(priority, fresh, row0, col0, bs, border):
    _bump_jit(priority, np.ascontiguousarray(fresh, dtype=np.bool_), row0, col0, bs, border)


def bump_priorities_numpy(priority, fresh, row0, col0, bs, border):
    _bump_numpy(priority, np.asarray(fresh, dtype=bool), row0, col0, bs, border)


if USE_NUMBA:
    matching_pursuit = matching_pursuit_jit
    bump_priorities = bump_priorities_jit
else:
    matching_pursuit = matching_pursuit_numpy
    bump_priorities = bump_priorities_numpy
