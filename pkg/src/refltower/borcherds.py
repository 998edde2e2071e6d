"""Borcherds products of the tower weight-0 forms.

The product attached to a member psi with weight-0 form phi0 has two
computable shapes.  The exponential form

    B = psi * s^a * exp(- sum_{j>=1} (phi0|V_j^(0)) s^j)

is the workhorse: every layer is a finite convolution and the result
must come out integral, which the constructor asserts.  The literal
product form multiplies factors (1 - q^n s^m zeta^l) with exponents
read off phi0 at n*m, times a Weyl monomial; it agrees with the
exponential form wherever both are computed and is kept for modest
windows.

The divisor scan walks the negative-norm support of phi0, reduces each
Fourier index to a primitive wall vector, sums the coefficients along
multiples of the wall, and groups the results by the invariants of the
reflection.  Termination of the multiplicity sum rests on the checked
fact that negative-norm support sits only at the minimal norm of the
family.
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd as _gcd
from typing import NamedTuple

from .jacobi import (
    MEMBERS,
    _corner_dirs,
    divide_by_member,
    dual_from_z,
    member_hecke_slice,
    member_series,
    member_slice,
    weak_weight0,
)
from .lattices import lattice
from .lifting import lift_layers
from .series import FourierSeries, TruncationWindow, _slice_mul_into


def index_step(key: str) -> int:
    """s_num of the first Fourier-Jacobi layer (1 on the half grid)."""
    return 1 if MEMBERS[key].family == "A1" else 2


class WeylData(NamedTuple):
    q_num: int  # 24 times the q-exponent of the leading monomial
    z: tuple  # stored z-exponent of the Weyl part
    s_num: int  # index scale, in half-integer s units
    sign: int


def weyl_data(key: str) -> WeylData:
    meta = MEMBERS[key]
    dirs = _corner_dirs(meta)
    zw = tuple(-sum(col) for col in zip(*dirs))
    return WeylData(meta.val_q, zw, index_step(key), (-1) ** len(dirs))


# ---------------------------------------------------------------------------
# weight-0 Hecke translates and the exponential layers


def hecke_v0(phi: FourierSeries, m: int, q_depth: int) -> FourierSeries:
    """phi|V_m^(0) on the integral grid, with 1/d weights."""
    if m < 1:
        raise ValueError("translate order must be positive")
    need = 24 * q_depth * m
    if phi.window.q_max < need:
        raise ValueError("weight-0 form is too shallow for this translate")
    out = FourierSeries(phi.r, phi.den_z, TruncationWindow(24 * q_depth, 0))
    for n in range(q_depth + 1):
        acc: dict = {}
        for d in range(1, m + 1):
            if m % d or (n % d if n else 0):
                continue
            src = phi.cells.get((0, 24 * n * m // (d * d)))
            if not src:
                continue
            for z, c in src.items():
                zz = tuple(d * a for a in z)
                v = acc.get(zz, 0) + (c if d == 1 else Fraction(c, d))
                if v:
                    acc[zz] = v
                elif zz in acc:
                    del acc[zz]
        if acc:
            out.cells[(0, 24 * n)] = acc
    return out


def exp_layers(key: str, j_max: int, q_depth: int) -> list:
    """Layers E_0..E_j of exp(-sum (phi0|V_j^(0)) s^j) as q-z series.

    Computed through the first-order recursion j E_j = sum i X_i E_{j-i}.
    The combinations i X_i have integral coefficients (the 1/d weights of
    V_i^(0) cancel against i), and the layers themselves are integral
    because every product factor expands with binomial coefficients, so
    the convolutions run over plain integers and the division by j is
    exact termwise.
    """
    meta = MEMBERS[key]
    phi = weak_weight0(key, max(j_max * q_depth, 1)).series
    win = TruncationWindow(24 * q_depth, 0)
    one = FourierSeries.monomial(1, 0, (0,) * meta.r, 0, meta.den_z, win)
    if j_max == 0:
        return [one]
    W = [None]
    for i in range(1, j_max + 1):
        vi = hecke_v0(phi, i, q_depth)
        for sl in vi.cells.values():
            for z, c in sl.items():
                v = c * (-i)
                if isinstance(v, Fraction) and v.denominator == 1:
                    v = v.numerator
                sl[z] = v
        W.append(vi)
    E = [one]
    for j in range(1, j_max + 1):
        acc: dict = {}
        for i in range(1, j + 1):
            for (_, qa), sa in W[i].cells.items():
                for (_, qb), sb in E[j - i].cells.items():
                    if qa + qb <= win.q_max:
                        _slice_mul_into(acc.setdefault((0, qa + qb), {}),
                                        sa, sb, meta.r)
        Ej = FourierSeries(meta.r, meta.den_z, win)
        for kk, sl in acc.items():
            d = {}
            for z, c in sl.items():
                if c:
                    v, rem = divmod(c, j)
                    d[z] = v if not rem else Fraction(c, j)
            if d:
                Ej.cells[kk] = d
        E.append(Ej)
    return E


def borcherds_exp(key: str, window: TruncationWindow) -> FourierSeries:
    """The Borcherds product as a materialised series over a window."""
    meta = MEMBERS[key]
    s0 = index_step(key)
    j_max = max((window.s_max - s0) // 2, 0)
    q_depth = max((window.q_max - meta.val_q) // 24, 0)
    E = exp_layers(key, j_max, q_depth)
    psi = member_series(key, TruncationWindow(window.q_max, 0))
    out = FourierSeries(meta.r, meta.den_z, window)
    for j, Ej in enumerate(E):
        s_num = s0 + 2 * j
        if s_num > window.s_max:
            break
        for (_, qa), sa in psi.cells.items():
            for (_, qb), sb in Ej.cells.items():
                q = qa + qb
                if q > window.q_max:
                    continue
                acc = out.cells.setdefault((s_num, q), {})
                _slice_mul_into(acc, sa, sb, meta.r)
    for cq in list(out.cells):
        sl = out.cells[cq]
        clean = {}
        for z, c in sl.items():
            if not c:
                continue
            if isinstance(c, Fraction):
                if c.denominator != 1:
                    raise ArithmeticError(
                        "non-integral product coefficient at %r" % (cq,))
                c = int(c)
            clean[z] = c
        if clean:
            out.cells[cq] = clean
        else:
            del out.cells[cq]
    return out


# ---------------------------------------------------------------------------
# literal product form


def _binom_factor(c: int, q_num: int, z: tuple, s_num: int,
                  r: int, den_z: int, window: TruncationWindow) -> FourierSeries:
    """(1 - q^(q_num/24) zeta^z s^(s_num/2)) ** c inside a window."""
    out = FourierSeries(r, den_z, window)
    if q_num == 0 and s_num == 0:
        if c < 0:
            raise ValueError("z-only factors need a non-negative exponent")
        t_max = c
    else:
        t_max = min(window.q_max // q_num if q_num else 10 ** 9,
                    window.s_max // s_num if s_num else 10 ** 9)
    b = 1
    t = 0
    while t <= t_max:
        out.add_term(t * q_num, tuple(t * a for a in z), t * s_num,
                     b if t % 2 == 0 else -b)
        b = b * (c - t) // (t + 1)
        t += 1
    return out


def borcherds_product_form(key: str, window: TruncationWindow) -> FourierSeries:
    """The product over positive indices, for modest windows.

    Factor exponents at (n, l, m) are phi0 coefficients at (nm, l); the
    m = 0 factors rebuild the theta block itself, so the only input
    beyond the member data is the weight-0 form.
    """
    meta = MEMBERS[key]
    wd = weyl_data(key)
    s0 = wd.s_num
    m_max = max((window.s_max - s0) // 2, 0)
    q_depth = max((window.q_max - meta.val_q) // 24, 0)
    phi = weak_weight0(key, max(q_depth * max(m_max, 1), 1)).series
    zero = (0,) * meta.r
    out = FourierSeries.monomial(1, 0, zero, 0, meta.den_z, window)
    for m in range(m_max + 1):
        for n in range(q_depth + 1):
            sl = phi.cells.get((0, 24 * n * m))
            if not sl:
                continue
            for z in sorted(sl):
                c = sl[z]
                if n == 0 and m == 0:
                    if z <= zero:
                        continue  # one factor per +-pair of z-only walls
                if not c:
                    continue
                fac = _binom_factor(c, 24 * n, z, 2 * m,
                                    meta.r, meta.den_z, window)
                out = out.mul(fac, window)
    out = out.shifted(wd.q_num, wd.z, s0).scaled(wd.sign).truncated(window)
    return out


# ---------------------------------------------------------------------------
# lift versus product, layer by layer


def _slice_first_diff(a: dict, b: dict):
    for z in sorted(set(a) | set(b)):
        if a.get(z, 0) != b.get(z, 0):
            return z
    return None


def _product_coefficient(key: str, Ej, q_num: int, z: tuple) -> object:
    """One coefficient of psi * E_j, by direct convolution."""
    meta = MEMBERS[key]
    tot = 0
    qa = meta.val_q
    while qa <= q_num:
        sb = Ej.cells.get((0, q_num - qa))
        if sb:
            sa = member_slice(key, qa)
            for z1, c1 in sb.items():
                c0 = sa.get(tuple(a - b for a, b in zip(z, z1)))
                if c0:
                    tot += c0 * c1
        qa += 24
    return tot


def compare_lift_product(key: str, q_depth: int, s_depth: int) -> dict:
    """Check lift layers against product layers, layer by layer.

    The product layer at s0 + 2j is psi * E_j, so the check divides each
    lift layer by the theta block (exact, unit corner) and compares the
    quotient with E_j levelwise.  Division is the cheap direction: the
    block factors into theta binomials.  On a mismatch the original
    coefficients of both sides are recomputed directly for the report;
    if a corrupted layer is not divisible at all, the comparison falls
    back to convolving the product side outright.
    """
    meta = MEMBERS[key]
    s0 = index_step(key)
    layers = lift_layers(key, 2 * s_depth)
    q_top = 24 * q_depth
    q_aux = max((q_top - meta.val_q) // 24, 0)
    j_max = max(((s - s0) // 2) for s, _ in layers) if layers else 0
    E = exp_layers(key, j_max, q_aux)
    checked = 0
    mismatch = None
    rows = []
    for s_num, order in layers:
        Ej = E[(s_num - s0) // 2]
        layer_terms = 0
        lifts = [member_hecke_slice(key, order, meta.val_q + 24 * j)
                 for j in range(q_aux + 1)]
        layer_terms = sum(len(sl) for sl in lifts)
        try:
            quo = divide_by_member(lifts, key, q_aux, consume=True)
        except ArithmeticError:
            quo = None
        lifts = None
        for j in range(q_aux + 1):
            if mismatch is not None:
                break
            q = meta.val_q + 24 * j
            if quo is not None:
                z = _slice_first_diff(quo[j], Ej.cells.get((0, 24 * j), {}))
            else:
                rhs: dict = {}
                qa = meta.val_q
                while qa <= q:
                    sa = member_slice(key, qa)
                    sb = Ej.cells.get((0, q - qa))
                    if sa and sb:
                        _slice_mul_into(rhs, sa, sb, meta.r)
                    qa += 24
                z = _slice_first_diff(member_hecke_slice(key, order, q), rhs)
            if z is not None:
                mismatch = {
                    "s_num": s_num, "q_num": q, "z": z,
                    "lift": member_hecke_slice(key, order, q).get(z, 0),
                    "product": _product_coefficient(key, Ej, q, z),
                }
        checked += layer_terms
        rows.append({"s_num": s_num, "order": order, "terms": layer_terms})
    return {
        "status": "pass" if mismatch is None else "fail",
        "member": key,
        "q_depth": q_depth,
        "s_depth": s_depth,
        "layers": rows,
        "checked_terms": checked,
        "first_mismatch": mismatch,
    }


# ---------------------------------------------------------------------------
# reflective divisor scan


_FAMILY_MIN = {
    "D": Fraction(-1),
    "D1": Fraction(-1),
    "A2": Fraction(-2, 3),
    "A1": Fraction(-1, 2),
}


class WallClass(NamedTuple):
    v2: int
    div: int
    kappa: tuple
    multiplicities: tuple  # distinct nonzero wall multiplicities seen
    walls: int
    example: tuple  # a primitive (n, z, m) realising the class


def _z_norm(family: str, z: tuple) -> Fraction:
    if family == "D":
        return Fraction(sum(a * a for a in z), 4)
    if family == "D1":
        return Fraction(z[0] * z[0], 16)
    if family == "A1":
        return Fraction(sum(a * a for a in z), 8)
    total = 0
    for i in range(0, len(z), 2):
        a, b = z[i], z[i + 1]
        total += a * a + b * b + a * b
    return Fraction(total, 54)


def _primitive(lat, family: str, n: int, z: tuple, m: int):
    g = _gcd(_gcd(n, m), _gcd(*(abs(a) for a in z)))
    t = 1
    rest = g
    p = 2
    while p * p <= rest:
        while rest % p == 0:
            cand = tuple(a // (t * p) for a in z)
            if lat.in_dual(dual_from_z(family, cand)):
                t *= p
            rest //= p
        p += 1
    if rest > 1:
        cand = tuple(a // (t * rest) for a in z)
        if lat.in_dual(dual_from_z(family, cand)):
            t *= rest
    return n // t, tuple(a // t for a in z), m // t


def reflective_divisor_scan(key: str, q_depth: int, m_bound: int = None) -> dict:
    """Group the walls supporting the product divisor by reflection class.

    Every index (n, l, m) of negative norm inside the window is reduced
    to a primitive wall vector; the wall multiplicity is the sum of
    coefficients along its multiples, finite because negative support
    stops at the minimal norm of the family.
    """
    meta = MEMBERS[key]
    lat = lattice(meta.lattice_name)
    fam_min = _FAMILY_MIN[meta.family]
    if m_bound is None:
        m_bound = q_depth
    # truncate so the report does not depend on how deep a cached
    # weight-0 form happens to be
    phi = weak_weight0(key, q_depth).series.truncated(
        TruncationWindow(24 * q_depth, 0))
    walls: set = set()
    for (_, qn), sl in phi.cells.items():
        nphi = qn // 24
        for z in sl:
            if 2 * nphi - _z_norm(meta.family, z) >= 0:
                continue
            if nphi:
                splits = [(a, nphi // a) for a in range(1, nphi + 1)
                          if nphi % a == 0 and a <= q_depth
                          and nphi // a <= m_bound]
            else:
                splits = [(0, m) for m in range(m_bound + 1)]
                splits += [(n, 0) for n in range(1, q_depth + 1)]
            for n, m in splits:
                n0, z0, m0 = _primitive(lat, meta.family, n, z, m)
                if n0 == 0 and m0 == 0 and z0 < tuple(-a for a in z0):
                    z0 = tuple(-a for a in z0)
                walls.add((n0, z0, m0))
    classes: dict = {}
    for (n0, z0, m0) in sorted(walls):
        mu2 = 2 * n0 * m0 - _z_norm(meta.family, z0)
        mult = 0
        d = 1
        while d * d * mu2 >= fam_min:
            qn = 24 * d * d * n0 * m0
            if qn > phi.window.q_max:
                raise ValueError("window too small for the multiplicity sum")
            mult += phi.cells.get((0, qn), {}).get(tuple(d * a for a in z0), 0)
            d += 1
        if not mult:
            continue
        ell = dual_from_z(meta.family, z0)
        ec = lat.eichler_invariant(n0, ell, m0)
        neg = lat.disc_reduce(tuple(-a for a in ec.kappa))
        ck = (ec.v2, ec.div, min(ec.kappa, neg))
        row = classes.get(ck)
        if row is None:
            classes[ck] = [set([mult]), 1, (n0, z0, m0)]
        else:
            row[0].add(mult)
            row[1] += 1
    out = []
    for (v2, dv, kp) in sorted(classes):
        mset, cnt, ex = classes[(v2, dv, kp)]
        out.append(WallClass(v2, dv, kp, tuple(sorted(mset)), cnt, ex))
    return {
        "member": key,
        "q_depth": q_depth,
        "m_bound": m_bound,
        "classes": out,
        "wall_count": sum(c.walls for c in out),
    }
