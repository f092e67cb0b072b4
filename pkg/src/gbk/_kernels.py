"""Compiled kernels for velocity-grid operator assembly.

Matrices are assembled transposed (AT[j, i] = A[i, j]) so each column's
scatter writes stay inside one contiguous row. Post-collision points are
deposited on the lattice through a separable stencil: 2-point (linear) or
4-point (cubic, Keys a = -1/2) per axis; stencil weights sum to one, so mass
leaks only where the stencil leaves the grid, and the per-column deposited
mass is tracked against the intended mass for consistency reporting.

The mollified truncation factors (radial plateau bumps in |v|, |v - v_*| and
the impact-angle cosine) select the compact, regularizing part of an operator;
`out_bump` additionally truncates the scattered output so the compact part's
range stays inside the nominal support ball.
"""

import math

from numba import njit

__all__ = ["bath_gain", "pair_gain", "pair_loss"]


@njit(cache=True, inline="always")
def _smoothstep(t):
    if t <= 0.0:
        return 0.0
    if t >= 1.0:
        return 1.0
    a = math.exp(-1.0 / t)
    b = math.exp(-1.0 / (1.0 - t))
    return a / (a + b)


@njit(cache=True, inline="always")
def _bump_down(x, x0, w):
    """C^inf ramp: 1 for x <= x0, 0 for x >= x0 + w."""
    return 1.0 - _smoothstep((x - x0) / w)


@njit(cache=True, inline="always")
def _bump_up(x, x0, w):
    """C^inf ramp: 0 for x <= x0 - w, 1 for x >= x0."""
    return _smoothstep((x - (x0 - w)) / w)


@njit(cache=True, inline="always")
def _scatter_linear(row, tx, ty, tz, ox, oy, oz, inv_h, n, amount):
    fx = (tx - ox) * inv_h
    fy = (ty - oy) * inv_h
    fz = (tz - oz) * inv_h
    ix = int(math.floor(fx))
    iy = int(math.floor(fy))
    iz = int(math.floor(fz))
    wx1 = fx - ix
    wy1 = fy - iy
    wz1 = fz - iz
    landed = 0.0
    for a in range(2):
        ia = ix + a
        if ia < 0 or ia >= n:
            continue
        wa = (1.0 - wx1) if a == 0 else wx1
        for b in range(2):
            ib = iy + b
            if ib < 0 or ib >= n:
                continue
            wb = wa * ((1.0 - wy1) if b == 0 else wy1)
            for c in range(2):
                ic = iz + c
                if ic < 0 or ic >= n:
                    continue
                w = wb * ((1.0 - wz1) if c == 0 else wz1) * amount
                row[(ia * n + ib) * n + ic] += w
                landed += w
    return landed


@njit(cache=True, inline="always")
def _scatter_4pt(row, tx, ty, tz, ox, oy, oz, inv_h, n, amount, spline):
    """Separable 4-point deposit: Keys cubic (spline=False) or cubic B-spline
    basis (spline=True; cardinal accuracy restored by a post-assembly filter).
    All weights are computed as scalars (no small-array churn)."""
    fx = (tx - ox) * inv_h
    fy = (ty - oy) * inv_h
    fz = (tz - oz) * inv_h
    ix = int(math.floor(fx))
    iy = int(math.floor(fy))
    iz = int(math.floor(fz))
    t = fx - ix
    if spline:
        s = 1.0 - t
        wx0 = s * s * s / 6.0
        wx3 = t * t * t / 6.0
        wx1 = (4.0 - 6.0 * t * t + 3.0 * t * t * t) / 6.0
        wx2 = 1.0 - wx0 - wx1 - wx3
    else:
        wx0 = ((-0.5 * t + 1.0) * t - 0.5) * t
        wx1 = (1.5 * t - 2.5) * t * t + 1.0
        wx2 = ((-1.5 * t + 2.0) * t + 0.5) * t
        wx3 = (0.5 * t - 0.5) * t * t
    t = fy - iy
    if spline:
        s = 1.0 - t
        wy0 = s * s * s / 6.0
        wy3 = t * t * t / 6.0
        wy1 = (4.0 - 6.0 * t * t + 3.0 * t * t * t) / 6.0
        wy2 = 1.0 - wy0 - wy1 - wy3
    else:
        wy0 = ((-0.5 * t + 1.0) * t - 0.5) * t
        wy1 = (1.5 * t - 2.5) * t * t + 1.0
        wy2 = ((-1.5 * t + 2.0) * t + 0.5) * t
        wy3 = (0.5 * t - 0.5) * t * t
    t = fz - iz
    if spline:
        s = 1.0 - t
        wz0 = s * s * s / 6.0
        wz3 = t * t * t / 6.0
        wz1 = (4.0 - 6.0 * t * t + 3.0 * t * t * t) / 6.0
        wz2 = 1.0 - wz0 - wz1 - wz3
    else:
        wz0 = ((-0.5 * t + 1.0) * t - 0.5) * t
        wz1 = (1.5 * t - 2.5) * t * t + 1.0
        wz2 = ((-1.5 * t + 2.0) * t + 0.5) * t
        wz3 = (0.5 * t - 0.5) * t * t

    z0 = iz - 1
    z_ok = z0 >= 0 and z0 + 3 < n
    landed = 0.0
    for a in range(4):
        ia = ix - 1 + a
        if ia < 0 or ia >= n:
            continue
        if a == 0:
            wa = wx0 * amount
        elif a == 1:
            wa = wx1 * amount
        elif a == 2:
            wa = wx2 * amount
        else:
            wa = wx3 * amount
        for b in range(4):
            ib = iy - 1 + b
            if ib < 0 or ib >= n:
                continue
            if b == 0:
                wb = wa * wy0
            elif b == 1:
                wb = wa * wy1
            elif b == 2:
                wb = wa * wy2
            else:
                wb = wa * wy3
            base = (ia * n + ib) * n + z0
            if z_ok:
                row[base] += wb * wz0
                row[base + 1] += wb * wz1
                row[base + 2] += wb * wz2
                row[base + 3] += wb * wz3
                landed += wb
            else:
                if z0 >= 0 and z0 < n:
                    row[base] += wb * wz0
                    landed += wb * wz0
                if 0 <= z0 + 1 < n:
                    row[base + 1] += wb * wz1
                    landed += wb * wz1
                if 0 <= z0 + 2 < n:
                    row[base + 2] += wb * wz2
                    landed += wb * wz2
                if 0 <= z0 + 3 < n:
                    row[base + 3] += wb * wz3
                    landed += wb * wz3
    return landed


@njit(cache=True)
def bath_gain(AT, nodes, wq, e, sg_nodes, sg_w, ox, oy, oz, inv_h, n, mode,
              use_theta, delta, width, out_bump, gain_target, gain_landed):
    """Gain part of the linear background-scattering operator on nodal values.

    Column j collects, for every background node q and scattering direction s,
    the deposit of the gas particle's post-collision velocity
    v' = v_j - (1+e)/4 (u - |u| sigma), u = v_j - v_q, with weight
    wq[q] * |u| * sg_w[s] (wq already carries the volume element and the
    background density).
    """
    a = 0.25 * (1.0 + e)
    nn = nodes.shape[0]
    ns = sg_nodes.shape[0]
    for j in range(nn):
        row = AT[j]
        vx = nodes[j, 0]
        vy = nodes[j, 1]
        vz = nodes[j, 2]
        th1 = 1.0
        if use_theta:
            vn = math.sqrt(vx * vx + vy * vy + vz * vz)
            th1 = _bump_down(vn, 1.0 / delta, width)
            if th1 == 0.0:
                continue
        for q in range(nn):
            w0 = wq[q]
            if w0 == 0.0:
                continue
            ux = vx - nodes[q, 0]
            uy = vy - nodes[q, 1]
            uz = vz - nodes[q, 2]
            um = math.sqrt(ux * ux + uy * uy + uz * uz)
            if um == 0.0:
                continue
            base = w0 * um * th1
            if use_theta:
                base *= (_bump_up(um, 2.0 * delta, width)
                         * _bump_down(um, 1.0 / delta, width))
                if base == 0.0:
                    continue
            bx = vx - a * ux
            by = vy - a * uy
            bz = vz - a * uz
            r = a * um
            iux = ux / um
            iuy = uy / um
            iuz = uz / um
            for s in range(ns):
                sx = sg_nodes[s, 0]
                sy = sg_nodes[s, 1]
                sz = sg_nodes[s, 2]
                amt = base * sg_w[s]
                if use_theta:
                    cd = iux * sx + iuy * sy + iuz * sz
                    arg = 0.5 * (1.0 - cd)
                    cn = math.sqrt(arg) if arg > 0.0 else 0.0
                    amt *= _bump_down(cn, 1.0 - 2.0 * delta, width)
                    if amt == 0.0:
                        continue
                tx = bx + r * sx
                ty = by + r * sy
                tz = bz + r * sz
                if out_bump:
                    tn = math.sqrt(tx * tx + ty * ty + tz * tz)
                    amt *= _bump_down(tn, 1.0 / delta, width)
                    if amt == 0.0:
                        continue
                gain_target[j] += amt
                if mode == 0:
                    gain_landed[j] += _scatter_linear(row, tx, ty, tz, ox, oy, oz,
                                                      inv_h, n, amt)
                else:
                    gain_landed[j] += _scatter_4pt(row, tx, ty, tz, ox, oy, oz,
                                                   inv_h, n, amt, mode == 2)


@njit(cache=True)
def pair_gain(AT, nodes, wf, alpha, sg_nodes, sg_w, ox, oy, oz, inv_h, n,
              mode, use_theta, delta, width, out_bump,
              gain_target, gain_landed):
    """Gain parts of the collision interaction with one argument frozen to the
    nodal field wf. Column j (the live argument) collects, per frozen node q
    and direction s, the deposits of both post-collision velocities
      v'_live = v_j - (1+alpha)/4 (u - |u| sigma),
      v'_frozen = v_q + (1+alpha)/4 (u - |u| sigma),  u = v_j - v_q,
    with weight wf[q] * |u| * sg_w[s]. Losses are exact nodal values and are
    added separately (pair_loss), so a deposit-accuracy filter can act on this
    matrix alone.
    """
    a = 0.25 * (1.0 + alpha)
    nn = nodes.shape[0]
    ns = sg_nodes.shape[0]
    for j in range(nn):
        row = AT[j]
        vx = nodes[j, 0]
        vy = nodes[j, 1]
        vz = nodes[j, 2]
        th1j = 1.0
        if use_theta:
            vn = math.sqrt(vx * vx + vy * vy + vz * vz)
            th1j = _bump_down(vn, 1.0 / delta, width)
        for q in range(nn):
            w0 = wf[q]
            if w0 == 0.0:
                continue
            qx = nodes[q, 0]
            qy = nodes[q, 1]
            qz = nodes[q, 2]
            ux = vx - qx
            uy = vy - qy
            uz = vz - qz
            um = math.sqrt(ux * ux + uy * uy + uz * uz)
            if um == 0.0:
                continue
            base = w0 * um
            th1q = 1.0
            th2 = 1.0
            if use_theta:
                qn = math.sqrt(qx * qx + qy * qy + qz * qz)
                th1q = _bump_down(qn, 1.0 / delta, width)
                th2 = (_bump_up(um, 2.0 * delta, width)
                       * _bump_down(um, 1.0 / delta, width))
                if th2 == 0.0 or (th1j == 0.0 and th1q == 0.0):
                    continue
            bx = vx - a * ux
            by = vy - a * uy
            bz = vz - a * uz
            cx = qx + a * ux
            cy = qy + a * uy
            cz = qz + a * uz
            r = a * um
            iux = ux / um
            iuy = uy / um
            iuz = uz / um
            for s in range(ns):
                sx = sg_nodes[s, 0]
                sy = sg_nodes[s, 1]
                sz = sg_nodes[s, 2]
                ws = sg_w[s]
                amt1 = base * ws * th1j
                amt2 = base * ws * th1q
                if use_theta:
                    cd = iux * sx + iuy * sy + iuz * sz
                    arg = 0.5 * (1.0 - cd)
                    cn = math.sqrt(arg) if arg > 0.0 else 0.0
                    th3 = _bump_down(cn, 1.0 - 2.0 * delta, width) * th2
                    if th3 == 0.0:
                        continue
                    amt1 *= th3
                    amt2 *= th3
                t1x = bx + r * sx
                t1y = by + r * sy
                t1z = bz + r * sz
                t2x = cx - r * sx
                t2y = cy - r * sy
                t2z = cz - r * sz
                if out_bump:
                    if amt1 != 0.0:
                        tn = math.sqrt(t1x * t1x + t1y * t1y + t1z * t1z)
                        amt1 *= _bump_down(tn, 1.0 / delta, width)
                    if amt2 != 0.0:
                        tn = math.sqrt(t2x * t2x + t2y * t2y + t2z * t2z)
                        amt2 *= _bump_down(tn, 1.0 / delta, width)
                if amt1 != 0.0:
                    gain_target[j] += amt1
                    if mode == 0:
                        gain_landed[j] += _scatter_linear(row, t1x, t1y, t1z,
                                                          ox, oy, oz, inv_h, n, amt1)
                    else:
                        gain_landed[j] += _scatter_4pt(row, t1x, t1y, t1z,
                                                       ox, oy, oz, inv_h, n, amt1,
                                                       mode == 2)
                if amt2 != 0.0:
                    gain_target[j] += amt2
                    if mode == 0:
                        gain_landed[j] += _scatter_linear(row, t2x, t2y, t2z,
                                                          ox, oy, oz, inv_h, n, amt2)
                    else:
                        gain_landed[j] += _scatter_4pt(row, t2x, t2y, t2z,
                                                       ox, oy, oz, inv_h, n, amt2,
                                                       mode == 2)


@njit(cache=True)
def pair_loss(AT, nodes, wf, sg_nodes, sg_w, use_theta, delta, width):
    """Loss parts of the frozen-argument collision interaction (exact nodal
    values, no lattice deposit).

    Untruncated: AT[j, j] -= nu_f(v_j) (live-argument loss against wf) and
    AT[j, q] -= 4 pi wf[q] |u| (frozen-argument loss). Truncated: only the
    frozen-argument loss survives in the compact part, with the direction
    integral of the angular bump replacing 4 pi.
    """
    nn = nodes.shape[0]
    ns = sg_nodes.shape[0]
    sw_total = 0.0
    for s in range(ns):
        sw_total += sg_w[s]
    for j in range(nn):
        row = AT[j]
        vx = nodes[j, 0]
        vy = nodes[j, 1]
        vz = nodes[j, 2]
        for q in range(nn):
            w0 = wf[q]
            if w0 == 0.0:
                continue
            ux = vx - nodes[q, 0]
            uy = vy - nodes[q, 1]
            uz = vz - nodes[q, 2]
            um = math.sqrt(ux * ux + uy * uy + uz * uz)
            if um == 0.0:
                continue
            base = w0 * um
            if not use_theta:
                row[j] -= base * sw_total
                row[q] -= base * sw_total
                continue
            qx = nodes[q, 0]
            qy = nodes[q, 1]
            qz = nodes[q, 2]
            th1q = _bump_down(math.sqrt(qx * qx + qy * qy + qz * qz),
                              1.0 / delta, width)
            if th1q == 0.0:
                continue
            th2 = (_bump_up(um, 2.0 * delta, width)
                   * _bump_down(um, 1.0 / delta, width))
            if th2 == 0.0:
                continue
            iux = ux / um
            iuy = uy / um
            iuz = uz / um
            ang = 0.0
            for s in range(ns):
                cd = iux * sg_nodes[s, 0] + iuy * sg_nodes[s, 1] + iuz * sg_nodes[s, 2]
                arg = 0.5 * (1.0 - cd)
                cn = math.sqrt(arg) if arg > 0.0 else 0.0
                ang += sg_w[s] * _bump_down(cn, 1.0 - 2.0 * delta, width)
            row[q] -= base * th1q * th2 * ang
