"""Numpy implementations of the hot kernels.

Used when the compiled ``_ckernels`` extension is not built. Every function
here has the same signature and produces the same bits as its compiled
counterpart; the parity tests hold both to that.
"""
import numpy as np
from scipy import ndimage

# neighbour offsets (dx, dy) along each quantized gradient sector
SECTOR_OFFSETS = ((1, 0), (1, 1), (0, 1), (-1, 1))


def mean_shift(img, spatial_radius, range_radius, max_iterations, epsilon):
    """Flat-kernel joint (x, y, gray) mean shift, all pixels advanced together.

    Returns ``(filtered, iterations)``.
    """
    img = np.ascontiguousarray(img, dtype=np.uint8)
    h, w = img.shape
    r = int(spatial_radius)
    rr = float(range_radius)
    eps2 = float(epsilon) * float(epsilon)
    gray = img.astype(np.float64)

    ys, xs = np.mgrid[0:h, 0:w]
    px = xs.ravel().astype(np.float64)
    py = ys.ravel().astype(np.float64)
    pc = gray.ravel().copy()
    iters = np.zeros(h * w, dtype=np.int32)
    active = np.arange(h * w)

    for _ in range(int(max_iterations)):
        if active.size == 0:
            break
        xc, yc, cc = px[active], py[active], pc[active]
        bx = np.floor(xc).astype(np.int64)
        by = np.floor(yc).astype(np.int64)
        sx = np.zeros(active.size)
        sy = np.zeros(active.size)
        sc = np.zeros(active.size)
        cnt = np.zeros(active.size, dtype=np.int64)
        for oy in range(-r, r + 2):
            ny = by + oy
            ok_y = (ny >= 0) & (ny < h) & (np.abs(ny - yc) <= r)
            nyc = np.clip(ny, 0, h - 1)
            for ox in range(-r, r + 2):
                nx = bx + ox
                ok = ok_y & (nx >= 0) & (nx < w) & (np.abs(nx - xc) <= r)
                g = gray[nyc, np.clip(nx, 0, w - 1)]
                ok &= np.abs(g - cc) <= rr
                sx += np.where(ok, nx, 0)
                sy += np.where(ok, ny, 0)
                sc += np.where(ok, g, 0.0)
                cnt += ok

        moved = cnt > 0
        safe = np.where(moved, cnt, 1)
        nx_ = np.where(moved, sx / safe, xc)
        ny_ = np.where(moved, sy / safe, yc)
        nc_ = np.where(moved, sc / safe, cc)
        dx = nx_ - xc
        dy = ny_ - yc
        dc = nc_ - cc
        d2 = dx * dx + dy * dy + dc * dc

        px[active], py[active], pc[active] = nx_, ny_, nc_
        iters[active] += moved
        done = ~moved | (d2 <= eps2)
        active = active[~done]

    out = np.clip(np.floor(pc + 0.5), 0, 255).astype(np.uint8)
    return out.reshape(h, w), iters.reshape(h, w)


def non_max_suppression(magnitude, sector):
    """Thin a magnitude field along quantized gradient sectors (0..3).

    A pixel survives iff it is strictly greater than its neighbour behind
    the gradient and no smaller than the one ahead of it. Out-of-image
    neighbours count as zero.
    """
    mag = np.ascontiguousarray(magnitude, dtype=np.float64)
    sector = np.asarray(sector)
    h, w = mag.shape
    pad = np.zeros((h + 2, w + 2))
    pad[1:-1, 1:-1] = mag
    out = np.zeros_like(mag)
    for s, (dx, dy) in enumerate(SECTOR_OFFSETS):
        ahead = pad[1 + dy:h + 1 + dy, 1 + dx:w + 1 + dx]
        behind = pad[1 - dy:h + 1 - dy, 1 - dx:w + 1 - dx]
        keep = (sector == s) & (mag > behind) & (mag >= ahead)
        out[keep] = mag[keep]
    return out


def hysteresis(magnitude, low, high):
    """Keep 8-connected components of ``magnitude > low`` holding a ``> high`` pixel."""
    mag = np.asarray(magnitude, dtype=np.float64)
    candidate = mag > low
    labels, n = ndimage.label(candidate, structure=np.ones((3, 3), dtype=bool))
    if n == 0:
        return np.zeros(mag.shape, dtype=np.uint8)
    seeded = np.zeros(n + 1, dtype=bool)
    seeded[labels[mag > high]] = True
    seeded[0] = False
    return np.where(seeded[labels], 255, 0).astype(np.uint8)


def glcm_counts(levels, dx, dy, n_levels):
    """Ordered co-occurrence counts for pairs (p, p + (dx, dy))."""
    lv = np.asarray(levels, dtype=np.int64)
    h, w = lv.shape
    x0, x1 = max(0, -dx), min(w, w - dx)
    y0, y1 = max(0, -dy), min(h, h - dy)
    if x1 <= x0 or y1 <= y0:
        return np.zeros((n_levels, n_levels), dtype=np.int64)
    a = lv[y0:y1, x0:x1]
    b = lv[y0 + dy:y1 + dy, x0 + dx:x1 + dx]
    flat = np.bincount((a * n_levels + b).ravel(), minlength=n_levels * n_levels)
    return flat.reshape(n_levels, n_levels).astype(np.int64)
