"""Theta blocks, eta powers, and weak weight-0 Jacobi forms of the towers.

The registry covers three families of theta blocks:

* D family: eta^(24-3k) prod_i theta(tau, z_i) for k = 2..8, the rank-one
  doubled block eta^21 theta(tau, 2z), and their common conventions
  (den_z = 2, the dual vector of a key z is z/2 in e-coordinates);
* A2 family: powers of the A2 theta function Theta = eta^-1 theta(z1)
  theta(z2 - z1) theta(z2) with weight-coordinate exponents (den_z = 6,
  dual vector z/6);
* A1 family: eta^(12-3n) prod theta(tau, z_i), index one half, supported
  on a shifted grid (den_z = 2, dual vector z/4 in root coordinates).

Each weight-0 form is minus the quotient of a Hecke translate of its
theta block by the block itself; the minus sign is what makes the
constant term positive and the exponential lift reproduce the block.
"""

from __future__ import annotations

import re
from fractions import Fraction
from math import isqrt
from math import gcd as _gcd
from typing import NamedTuple

import numpy as np

from .series import (
    FourierSeries,
    TruncationWindow,
    _div_binomial_slice,
    _packed_reduce,
    _slice_mul_into,
)


def chi4(m: int) -> int:
    """Kronecker symbol (-4/m)."""
    if m % 2 == 0:
        return 0
    return 1 if m % 4 == 1 else -1


def _divisors(n: int) -> list:
    n = abs(n)
    out = [d for d in range(1, n + 1) if n % d == 0]
    return out


# ---------------------------------------------------------------------------
# eta powers


_ETA_TABLES: dict = {}


def _conv1(a: list, b: list, depth: int) -> list:
    out = [0] * (depth + 1)
    for i, x in enumerate(a):
        if x == 0 or i > depth:
            continue
        top = min(depth - i, len(b) - 1)
        for j in range(top + 1):
            y = b[j]
            if y:
                out[i + j] += x * y
    return out


def _euler(depth: int) -> list:
    """prod_{n>=1} (1 - q^n) by the pentagonal number recursion."""
    e = [0] * (depth + 1)
    e[0] = 1
    k = 1
    while k * (3 * k - 1) // 2 <= depth:
        s = -1 if k % 2 else 1
        for g in (k * (3 * k - 1) // 2, k * (3 * k + 1) // 2):
            if g <= depth:
                e[g] = s
        k += 1
    return e


def _eta_table(p: int, depth: int) -> list:
    """Integer-exponent coefficients of prod (1 - q^n)^p up to q^depth."""
    tab = _ETA_TABLES.get(p)
    if tab is not None and len(tab) > depth:
        return tab
    depth = max(depth, 32, 2 * (len(tab) - 1) if tab else 0)
    e = _euler(depth)
    if p >= 0:
        base = e
    else:
        base = [0] * (depth + 1)
        base[0] = 1
        for n in range(1, depth + 1):
            acc = 0
            for k in range(1, n + 1):
                if e[k]:
                    acc += e[k] * base[n - k]
            base[n] = -acc
    result = [1] + [0] * depth
    power = base
    n = abs(p)
    while n:
        if n & 1:
            result = _conv1(result, power, depth)
        n >>= 1
        if n:
            power = _conv1(power, power, depth)
    _ETA_TABLES[p] = result
    return result


def _eta_coeff(p: int, q_num: int) -> int:
    """Coefficient of eta^p at q^(q_num/24); exponents are p/24 + Z_{>=0}."""
    t = q_num - p
    if t < 0 or t % 24:
        return 0
    return _eta_table(p, t // 24)[t // 24]


def eta_power(p: int, q_max: int, s_max: int = 0) -> FourierSeries:
    """eta^p as an r=0 series, exact through q_num <= q_max."""
    f = FourierSeries(0, 1, TruncationWindow(q_max, s_max))
    t = 0
    while p + 24 * t <= q_max:
        c = _eta_coeff(p, p + 24 * t)
        if c:
            f.add_term(p + 24 * t, (), 0, c)
        t += 1
    return f


# ---------------------------------------------------------------------------
# theta functions


def theta(q_max: int, s_max: int = 0) -> FourierSeries:
    """The odd Jacobi theta function as a series: sum chi4(m) q^(m^2/8) zeta^(m/2)."""
    f = FourierSeries(1, 2, TruncationWindow(q_max, s_max))
    m = 1
    while 3 * m * m <= q_max:
        f.add_term(3 * m * m, (m,), 0, chi4(m))
        f.add_term(3 * m * m, (-m,), 0, chi4(-m))
        m += 2
    return f


def theta_product_form(q_max: int) -> FourierSeries:
    """The same theta function from its triple product expansion."""
    w = TruncationWindow(q_max, 0)
    out = FourierSeries.monomial(-1, 3, (-1,), 0, 2, w)
    n = 1
    while True:
        built_any = False
        for q_num, z in ((24 * (n - 1), 2), (24 * n, -2), (24 * n, 0)):
            if q_num <= q_max - 3:
                fac = FourierSeries(1, 2, w)
                fac.add_term(0, (0,), 0, 1)
                fac.add_term(q_num, (z,), 0, -1)
                out = out.mul(fac, w)
                built_any = True
        if not built_any:
            break
        n += 1
    return out.truncated(w)


def _promote(f: FourierSeries, r: int, den_z: int) -> FourierSeries:
    """Embed an r=0 series into r variables."""
    out = FourierSeries(r, den_z, f.window)
    zero = (0,) * r
    for (s, q), sl in f.cells.items():
        out.cells[(s, q)] = {zero: sl[()]}
    return out


def theta_A2(q_max: int) -> FourierSeries:
    """Theta function of the A2 lattice, exponents in weight coordinates."""
    pad = 24
    th = theta(q_max + pad)
    f1 = th.map_z([[3, 0]], den_z_new=6)
    f2 = th.map_z([[-3, 3]], den_z_new=6)
    f3 = th.map_z([[0, 3]], den_z_new=6)
    prod = f1.mul(f2).mul(f3)
    em1 = _promote(eta_power(-1, q_max + pad), 2, 6)
    return prod.mul(em1).truncated(TruncationWindow(q_max, 0))


# ---------------------------------------------------------------------------
# the member registry


class MemberMeta(NamedTuple):
    key: str
    family: str  # "D", "D1", "A2", "A1"
    lattice_name: str
    copies: int  # number of theta factors (A2: copies of the A2 block)
    eta_exp: int
    weight: int
    r: int
    den_z: int
    val_q: int  # q_num of the lowest slice
    index: Fraction
    hecke_p: int  # the Hecke translate used for the weight-0 form


MEMBERS: dict = {}

for _k in range(2, 9):
    _key = "psi_%d_D%d" % (12 - _k, _k)
    MEMBERS[_key] = MemberMeta(_key, "D", "D%d" % _k, _k, 24 - 3 * _k,
                               12 - _k, _k, 2, 24, Fraction(1), 2)
MEMBERS["eta21_theta2z"] = MemberMeta("eta21_theta2z", "D1", "D1", 1, 21,
                                      11, 1, 2, 24, Fraction(1), 2)
for _c, _key in ((1, "psi_9_A2"), (2, "psi_6_2A2"), (3, "psi_3_3A2")):
    MEMBERS[_key] = MemberMeta(_key, "A2", ("%dA2" % _c) if _c > 1 else "A2",
                               _c, 24 - 8 * _c, 12 - 3 * _c, 2 * _c, 6, 24,
                               Fraction(1), 2)
for _c, _key in ((1, "psi_5_A1"), (2, "psi_4_2A1"), (3, "psi_3_3A1"),
                 (4, "psi_2_4A1")):
    MEMBERS[_key] = MemberMeta(_key, "A1", ("%dA1" % _c) if _c > 1 else "A1",
                               _c, 12 - 3 * _c, 6 - _c, _c, 2, 12,
                               Fraction(1, 2), 3)

MEMBER_FOR_LATTICE = {m.lattice_name: m.key for m in MEMBERS.values()}
TOWER_TOPS = {"psi_4_D8", "psi_3_3A2", "psi_2_4A1"}
REGISTRY_KEYS = ("theta", "Theta_A2") + tuple(MEMBERS)


class JacobiForm(NamedTuple):
    name: str
    series: FourierSeries
    weight: object  # int or Fraction
    index: Fraction
    lattice_name: object  # str or None
    family: object  # str or None
    copies: int


# ---------------------------------------------------------------------------
# coefficient slices of the members


_SHELL_CACHE: dict = {}
_SHELL_CACHE_MAX_U = 9


def _odd_shell(r: int, total: int) -> dict:
    """Odd vectors with sum of squares == total, mapped to prod chi4(m_i)."""
    if total < r or (total - r) % 8:
        return {}
    key = (r, total)
    cached = _SHELL_CACHE.get(key)
    if cached is not None:
        return cached
    out: dict = {}
    vec = [0] * r

    def rec(i, rem, sign):
        left = r - i
        if left == 1:
            m = isqrt(rem)
            if m * m == rem and m % 2:
                s = sign * chi4(m)
                vec[i] = m
                out[tuple(vec)] = s
                vec[i] = -m
                out[tuple(vec)] = -s
            return
        m = 1
        while m * m <= rem - (left - 1):
            s = sign * chi4(m)
            vec[i] = m
            rec(i + 1, rem - m * m, s)
            vec[i] = -m
            rec(i + 1, rem - m * m, -s)
            m += 2

    rec(0, total, 1)
    if total <= r + 8 * _SHELL_CACHE_MAX_U:
        _SHELL_CACHE[key] = out
    return out


_A2_SERIES: dict = {}


def _a2_member_series(copies: int, q_max: int) -> FourierSeries:
    cur = _A2_SERIES.get(copies)
    if cur is not None and cur.window.q_max >= q_max:
        return cur
    q_max = max(q_max, 24 * 6)
    block = theta_A2(q_max)
    r = 2 * copies
    prod = None
    for c in range(copies):
        rows = [[0] * r, [0] * r]
        rows[0][2 * c] = 1
        rows[1][2 * c + 1] = 1
        fac = block.map_z(rows, den_z_new=6)
        prod = fac if prod is None else prod.mul(fac)
    p = 24 - 8 * copies
    if p:
        prod = prod.mul(_promote(eta_power(p, q_max), r, 6))
    prod = prod.truncated(TruncationWindow(q_max, 0))
    _A2_SERIES[copies] = prod
    return prod


def warm_a2_cache(copies: int, q_max: int) -> None:
    _a2_member_series(copies, q_max)


_PSI_SLICES: dict = {}
_PSI_SLICE_CACHE_DEPTH = 6


def member_slice(key: str, q_num: int) -> dict:
    """The z-slice of a registry theta block at the given q_num."""
    meta = MEMBERS[key]
    if q_num < meta.val_q or (q_num - meta.val_q) % 24:
        return {}
    ck = (key, q_num)
    cached = _PSI_SLICES.get(ck)
    if cached is not None:
        return cached
    if meta.family in ("D", "A1"):
        out = {}
        u = 0
        while True:
            ssq = meta.copies + 8 * u
            rest = q_num - 3 * ssq
            if rest < meta.eta_exp:
                break
            e = _eta_coeff(meta.eta_exp, rest)
            if e:
                for z, s in _odd_shell(meta.copies, ssq).items():
                    out[z] = e * s
            u += 1
    elif meta.family == "D1":
        out = {}
        m = 1
        while 3 * m * m <= q_num - meta.eta_exp:
            e = _eta_coeff(meta.eta_exp, q_num - 3 * m * m)
            if e:
                s = chi4(m)
                out[(2 * m,)] = e * s
                out[(-2 * m,)] = -e * s
            m += 2
    else:
        ser = _a2_member_series(meta.copies, q_num)
        out = dict(ser.cells.get((0, q_num), {}))
    if (q_num - meta.val_q) // 24 <= _PSI_SLICE_CACHE_DEPTH:
        _PSI_SLICES[ck] = out
    return out


def member_coefficient(key: str, q_num: int, z: tuple) -> int:
    meta = MEMBERS[key]
    if meta.family in ("D", "A1"):
        if any(c % 2 == 0 for c in z):
            return 0
        ssq = sum(c * c for c in z)
        e = _eta_coeff(meta.eta_exp, q_num - 3 * ssq)
        if not e:
            return 0
        s = 1
        for c in z:
            s *= chi4(c)
        return e * s
    if meta.family == "D1":
        m2 = z[0]
        if m2 % 4 == 0 or m2 % 2:
            return 0
        m = m2 // 2
        return _eta_coeff(meta.eta_exp, q_num - 3 * m * m) * chi4(m)
    return member_slice(key, q_num).get(tuple(z), 0)


def member_series(key: str, window: TruncationWindow) -> FourierSeries:
    meta = MEMBERS[key]
    f = FourierSeries(meta.r, meta.den_z, window)
    q = meta.val_q
    while q <= window.q_max:
        sl = member_slice(key, q)
        if sl:
            f.cells[(0, q)] = dict(sl)
        q += 24
    return f


def build(name: str, window: TruncationWindow) -> JacobiForm:
    """Construct a registry form, exact through the window."""
    m = re.fullmatch(r"eta\^(-?\d+)", name)
    if m:
        p = int(m.group(1))
        return JacobiForm(name, eta_power(p, window.q_max, window.s_max),
                          Fraction(p, 2), Fraction(0), None, None, 0)
    if name == "theta":
        return JacobiForm(name, theta(window.q_max, window.s_max),
                          Fraction(1, 2), Fraction(1, 2), None, None, 1)
    if name == "Theta_A2":
        return JacobiForm(name, theta_A2(window.q_max), 1, Fraction(1),
                          "A2", "A2", 1)
    if name in MEMBERS:
        meta = MEMBERS[name]
        return JacobiForm(name, member_series(name, window), meta.weight,
                          meta.index, meta.lattice_name, meta.family,
                          meta.copies)
    raise KeyError("unknown registry name %r" % (name,))


# ---------------------------------------------------------------------------
# Hecke translates


def member_hecke_slice(key: str, m: int, q_num: int) -> dict:
    """z-slice of psi|V_m at q_num, by the divisor-sum formula.

    The A1 family runs in display coordinates (doubled exponents, odd
    translate orders); the divisor condition d | (n, l, m) is realised
    by scaling source keys, so l-divisibility needs no separate test.
    """
    meta = MEMBERS[key]
    out: dict = {}
    if meta.family == "A1":
        if m % 2 == 0:
            raise ValueError("translate order must be odd on the half grid")
        if q_num % 12 or (q_num // 12) % 2 == 0:
            return {}
        nd = q_num // 12
        for d in _divisors(_gcd(nd, m)):
            if d % 2 == 0:
                continue
            src = member_slice(key, 12 * (nd * m // (d * d)))
            if d == 1 and not out:
                out = dict(src)
                continue
            w = d ** (meta.weight - 1)
            for z, c in src.items():
                zz = tuple(d * a for a in z)
                v = out.get(zz, 0) + w * c
                if v:
                    out[zz] = v
                else:
                    out.pop(zz, None)
        return out
    if q_num % 24:
        return {}
    n = q_num // 24
    for d in _divisors(_gcd(n, m)):
        src = member_slice(key, 24 * (n * m // (d * d)))
        if d == 1 and not out:
            out = dict(src)
            continue
        w = d ** (meta.weight - 1)
        for z, c in src.items():
            zz = tuple(d * a for a in z)
            v = out.get(zz, 0) + w * c
            if v:
                out[zz] = v
            else:
                out.pop(zz, None)
    return out


def hecke_Vm(form: JacobiForm, m: int) -> JacobiForm:
    """psi|V_m from a materialised series (integral q-grid only)."""
    ser = form.series
    if any(q % 24 for (_, q) in ser.cells):
        raise ValueError("hecke_Vm needs an integral q-grid")
    wq = ser.window.q_max // m
    out = FourierSeries(ser.r, ser.den_z, TruncationWindow(wq, ser.window.s_max))
    for n in range(0, wq // 24 + 1):
        acc: dict = {}
        for d in _divisors(_gcd(n, m)):
            cell = ser.cells.get((0, 24 * (n * m // (d * d))), {})
            w = d ** (form.weight - 1)
            for z, c in cell.items():
                zz = tuple(d * a for a in z)
                v = acc.get(zz, 0) + w * c
                if v:
                    acc[zz] = v
                else:
                    acc.pop(zz, None)
        if acc:
            out.cells[(0, 24 * n)] = acc
    return JacobiForm("%s|V_%d" % (form.name, m), out, form.weight,
                      form.index * m, form.lattice_name, form.family,
                      form.copies)


def hecke_Vm_subst(form: JacobiForm, m: int) -> JacobiForm:
    """The same translate as an average over tau -> (a tau + b)/d.

    Literal sum m^-1 sum_{ad=m} a^k sum_{b mod d} psi((a tau + b)/d, a z);
    the b-average keeps exactly the keys with d | n.  Only integral
    q-grids are supported: on half-integral grids the average acquires
    multiplier-system phases and stops being a plain divisor sum.
    """
    ser = form.series
    if any(q % 24 for (_, q) in ser.cells):
        raise ValueError("substitution average needs an integral q-grid")
    wq = ser.window.q_max // m
    out = FourierSeries(ser.r, ser.den_z, TruncationWindow(wq, ser.window.s_max))
    for a in _divisors(m):
        d = m // a
        factor = Fraction(a ** form.weight * d, m)
        for (s, q), sl in ser.cells.items():
            n = q // 24
            if n % d:
                continue  # the b-average kills this key
            qq = 24 * a * n // d
            if qq > wq:
                continue
            for z, c in sl.items():
                out.add_term(qq, tuple(a * x for x in z), s, factor * c)
    return JacobiForm("%s|V_%d" % (form.name, m), out, form.weight,
                      form.index * m, form.lattice_name, form.family,
                      form.copies)


# ---------------------------------------------------------------------------
# weak weight-0 forms


def _corner_dirs(meta: MemberMeta) -> list:
    if meta.family in ("D", "A1"):
        dirs = []
        for i in range(meta.r):
            d = [0] * meta.r
            d[i] = 1
            dirs.append(tuple(d))
        return dirs
    if meta.family == "D1":
        return [(2,)]
    dirs = []
    for c in range(meta.copies):
        for pat in ((3, 0), (-3, 3), (0, 3)):
            d = [0] * meta.r
            d[2 * c], d[2 * c + 1] = pat
            dirs.append(tuple(d))
    return dirs


def _corner_slice(meta: MemberMeta) -> dict:
    """prod over directions of (zeta^dvec - zeta^-dvec), as a z-slice."""
    acc = {(0,) * meta.r: 1}
    for dvec in _corner_dirs(meta):
        neg = tuple(-a for a in dvec)
        binom = {dvec: 1, neg: -1}
        nxt: dict = {}
        _slice_mul_into(nxt, acc, binom, meta.r)
        acc = nxt
    return acc


def _factor_stack(meta: MemberMeta, depth: int) -> list:
    """The theta factors of a block, as (dirs, {level: slice}) pairs.

    Each factor's cells are indexed by 24-grid level above its own
    valuation, with the level-0 binomial left out (it is handled by the
    per-direction division).  All higher cells are tiny, which is what
    makes dividing by the whole block factor by factor cheap.
    """
    stack = []
    if meta.family in ("D", "A1", "D1"):
        scale = 2 if meta.family == "D1" else 1
        for i in range(meta.r):
            cells: dict = {}
            m = 3
            while 3 * (m * m - 1) <= 24 * depth:
                lvl = (m * m - 1) // 8
                z = [0] * meta.r
                z[i] = scale * m
                cells.setdefault(lvl, {})[tuple(z)] = chi4(m)
                z[i] = -scale * m
                cells[lvl][tuple(z)] = -chi4(m)
                m += 2
            d = [0] * meta.r
            d[i] = scale
            stack.append(([tuple(d)], cells))
        return stack
    block = theta_A2(8 + 24 * depth)
    val_b = min(q for (_, q) in block.cells)
    dirs_all = _corner_dirs(meta)
    for c in range(meta.copies):
        cells = {}
        for (_, q), sl in block.cells.items():
            lvl = (q - val_b) // 24
            if lvl == 0 or lvl > depth:
                continue
            out = {}
            for (a, b), co in sl.items():
                z = [0] * meta.r
                z[2 * c], z[2 * c + 1] = a, b
                out[tuple(z)] = co
            cells[lvl] = out
        stack.append((dirs_all[3 * c:3 * c + 3], cells))
    return stack


def _shift_sub_into(R: dict, src: dict, zc: tuple, coeff) -> None:
    """R -= coeff * (src shifted by zc), termwise with zero removal."""
    nz = [i for i, v in enumerate(zc) if v]
    if len(nz) == 1:
        i = nz[0]
        d = zc[i]
        for z, c in src.items():
            zt = z[:i] + (z[i] + d,) + z[i + 1:]
            v = R.get(zt, 0) - coeff * c
            if v:
                R[zt] = v
            else:
                R.pop(zt, None)
        return
    for z, c in src.items():
        zt = tuple(a + b for a, b in zip(z, zc))
        v = R.get(zt, 0) - coeff * c
        if v:
            R[zt] = v
        else:
            R.pop(zt, None)


def _div_binomial_axis(sl: dict, axis: int, s: int) -> dict:
    """Exact division by (zeta_axis^s - zeta_axis^-s), line by line."""
    if not sl:
        return {}
    lines: dict = {}
    for z, c in sl.items():
        lines.setdefault(z[:axis] + z[axis + 1:], {})[z[axis]] = c
    out: dict = {}
    step = 2 * s
    for base, ln in lines.items():
        ps = sorted(ln)
        pmin, pmax = ps[0], ps[-1]
        for p0 in {p % step for p in ps}:
            top = pmax - ((pmax - p0) % step)
            if top < pmin:
                continue
            acc = 0
            p = top
            while p >= pmin:
                c = ln.get(p)
                if c:
                    acc += c
                if acc:
                    out[base[:axis] + (p - s,) + base[axis:]] = acc
                p -= step
            if acc:
                raise ArithmeticError("binomial division left a remainder")
    return out


def _binomial_packed(keys, vals, span: int, s: int):
    """Divide packed (line*span + d) data by (zeta^s - zeta^-s) on the digit.

    Keys must come in sorted so lines are contiguous.  Per line and
    residue class mod 2s the quotient is the descending running sum,
    shifted down by s; a nonzero class total means a remainder.
    """
    n = len(keys)
    if n == 0:
        return keys, vals
    step = 2 * s
    out_k = []
    out_v = []
    lines = keys // span
    bounds = np.flatnonzero(lines[1:] != lines[:-1]) + 1
    # cap the dense block at a few million cells
    limit = max(1, (1 << 21) // span)
    edges = np.concatenate(([0], bounds, [n]))
    b0 = 0
    while b0 < len(edges) - 1:
        b1 = min(b0 + limit, len(edges) - 1)
        lo, hi = edges[b0], edges[b1]
        b0 = b1
        kb = keys[lo:hi]
        vb = vals[lo:hi]
        lb = lines[lo:hi]
        uniq, inv = np.unique(lb, return_inverse=True)
        dense = np.zeros((len(uniq), span), dtype=np.int64)
        dense[inv, kb - lb * span] = vb
        for rho in range(step):
            sub = dense[:, rho::step]
            if sub.shape[1] == 0:
                continue
            c = sub[:, ::-1].cumsum(axis=1)[:, ::-1]
            if np.any(c[:, 0]):
                raise ArithmeticError("binomial division left a remainder")
            rows, cols = np.nonzero(c)
            if len(rows) == 0:
                continue
            d_out = rho + step * cols - s
            if d_out.min() < 0 or d_out.max() >= span:
                raise ArithmeticError("packed grid margin exhausted")
            out_k.append(uniq[rows] * span + d_out)
            out_v.append(c[rows, cols])
    if not out_k:
        return keys[:0], vals[:0]
    return np.concatenate(out_k), np.concatenate(out_v)


def _divide_packed(levels: list, meta: MemberMeta, depth: int,
                   stack: list) -> list:
    """The factored division on packed int64 keys (single-axis blocks).

    Same factor-by-factor scheme as the slicewise path, with each level
    held as (packed keys, values); repacking puts the active axis on
    stride one so corrections are scalar shifts and the binomial pass
    works on contiguous lines.  Returns quotient dicts, raises
    ArithmeticError when division is not exact, TypeError or
    OverflowError when the data does not fit the packed form.
    """
    r = meta.r
    lo = [0] * r
    hi = [0] * r
    seen = False
    for sl in levels:
        for z in sl:
            if not seen:
                lo = list(z)
                hi = list(z)
                seen = True
                continue
            for i, a in enumerate(z):
                if a < lo[i]:
                    lo[i] = a
                elif a > hi[i]:
                    hi[i] = a
    if not seen:
        return [{} for _ in range(depth + 1)]
    for sl in levels:
        for c in sl.values():
            if type(c) is not int:
                raise TypeError("packed division needs plain integers")
    axes = []
    for dirs, cells in stack:
        dvec = dirs[0]
        ax = next(i for i, v in enumerate(dvec) if v)
        terms = sorted((lvl, zc[ax], cc) for lvl, t in cells.items()
                       for zc, cc in t.items())
        axes.append((ax, dvec[ax], terms))
    pad = [0] * r
    for ax, s, terms in axes:
        shift = max([abs(d) for _, d, _ in terms], default=0)
        pad[ax] = shift + s
    span = [hi[i] - lo[i] + 1 + 2 * pad[i] for i in range(r)]
    total = 1
    for w in span:
        total *= w
        if total >= (1 << 62):
            raise OverflowError("packed span too wide")
    order = [i for i in range(r) if i != axes[0][0]] + [axes[0][0]]

    def strides_for(seq):
        st = [0] * r
        acc = 1
        for ax in reversed(seq):
            st[ax] = acc
            acc *= span[ax]
        return st

    st = strides_for(order)
    work = []
    for j in range(depth + 1):
        sl = levels[j] if j < len(levels) else {}
        if not sl:
            work.append((np.zeros(0, np.int64), np.zeros(0, np.int64)))
            continue
        cols = np.array(list(sl.keys()), dtype=np.int64).reshape(len(sl), r)
        vals = np.fromiter(sl.values(), dtype=np.int64, count=len(sl))
        if int(np.abs(vals).max()) >= (1 << 40):
            raise OverflowError("coefficients too large for packed division")
        packed = np.zeros(len(sl), dtype=np.int64)
        for i in range(r):
            packed += (cols[:, i] - lo[i] + pad[i]) * st[i]
        work.append((packed, vals))
    e = meta.eta_exp
    if e:
        coeffs = [_eta_coeff(e, e + 24 * i) for i in range(depth + 1)]
        for j in range(1, depth + 1):
            parts_k = [work[j][0]]
            parts_v = [work[j][1]]
            for i in range(1, j + 1):
                a = coeffs[i]
                pk, pv = work[j - i]
                if a and len(pk):
                    parts_k.append(pk)
                    parts_v.append(pv * (-a))
            work[j] = _packed_reduce(np.concatenate(parts_k),
                                     np.concatenate(parts_v))
    for ax, s, terms in axes:
        new_order = [i for i in order if i != ax] + [ax]
        if new_order != order:
            st_old = strides_for(order)
            st_new = strides_for(new_order)
            for j in range(depth + 1):
                pk, pv = work[j]
                if not len(pk):
                    continue
                rem = pk.copy()
                out = np.zeros_like(pk)
                for i in order:
                    dig = rem // st_old[i]
                    rem -= dig * st_old[i]
                    out += dig * st_new[i]
                work[j] = (out, pv)
            order = new_order
        w_ax = span[ax]
        for j in range(depth + 1):
            parts_k = [work[j][0]]
            parts_v = [work[j][1]]
            for lvl, d, cc in terms:
                if lvl > j:
                    continue
                pk, pv = work[j - lvl]
                if len(pk):
                    parts_k.append(pk + d)
                    parts_v.append(pv * (-cc))
            pk, pv = _packed_reduce(np.concatenate(parts_k),
                                    np.concatenate(parts_v))
            work[j] = _binomial_packed(pk, pv, w_ax, s)
    quo = []
    st = strides_for(order)
    for pk, pv in work:
        if not len(pk):
            quo.append({})
            continue
        cols = np.empty((len(pk), r), dtype=np.int64)
        rem = pk.copy()
        for i in order:
            dig = rem // st[i]
            rem -= dig * st[i]
            cols[:, i] = dig + lo[i] - pad[i]
        quo.append({tuple(zr): c
                    for zr, c in zip(cols.tolist(), pv.tolist())})
    return quo


def divide_by_member(levels: list, key: str, depth: int,
                     consume: bool = False) -> list:
    """Exact division of 24-grid levels by the whole theta block.

    ``levels[j]`` is the dividend slice at q_num = val + 24*j; the result
    is the quotient slice list on levels 0..depth.  Works factor by
    factor: the eta power contributes a scalar level recurrence, each
    theta factor a sparse correction plus a linear binomial pass.
    Raises ArithmeticError when the division is not exact.  With
    ``consume`` the input dicts are reused as scratch space.
    """
    meta = MEMBERS[key]
    stack = _factor_stack(meta, depth)
    if meta.family in ("D", "A1", "D1"):
        try:
            return _divide_packed(levels, meta, depth, stack)
        except (TypeError, OverflowError):
            pass
    if consume:
        work = [levels[j] if j < len(levels) else {} for j in range(depth + 1)]
    else:
        work = [dict(levels[j]) if j < len(levels) else {}
                for j in range(depth + 1)]
    e = meta.eta_exp
    if e:
        coeffs = [_eta_coeff(e, e + 24 * i) for i in range(depth + 1)]
        for j in range(1, depth + 1):
            R = work[j]
            for i in range(1, j + 1):
                a = coeffs[i]
                if not a:
                    continue
                for z, c in work[j - i].items():
                    v = R.get(z, 0) - a * c
                    if v:
                        R[z] = v
                    else:
                        R.pop(z, None)
    for dirs, cells in _factor_stack(meta, depth):
        for j in range(depth + 1):
            R = work[j]
            for i, t in cells.items():
                if i > j:
                    continue
                prev = work[j - i]
                if prev:
                    for zc, cc in t.items():
                        _shift_sub_into(R, prev, zc, cc)
            for dvec in dirs:
                nz = [i for i, v in enumerate(dvec) if v]
                if len(nz) == 1:
                    R = _div_binomial_axis(R, nz[0], dvec[nz[0]])
                else:
                    R = _div_binomial_slice(R, dvec)
            work[j] = R
    return work


def phi0_by_division(key: str, q_depth: int) -> JacobiForm:
    """The weak weight-0 form as -(psi|V_p)/psi, solved slice by slice."""
    meta = MEMBERS[key]
    p = meta.hecke_p
    val = meta.val_q
    corner = _corner_slice(meta)
    if member_slice(key, val) != corner:
        raise AssertionError("theta block corner is not the binomial product")
    if meta.family == "A2":
        warm_a2_cache(meta.copies, val + 24 * q_depth * p + 24 * p)
    quo = divide_by_member(
        [member_hecke_slice(key, p, val + 24 * j) for j in range(q_depth + 1)],
        key, q_depth, consume=True)
    out = FourierSeries(meta.r, meta.den_z, TruncationWindow(24 * q_depth, 0))
    for j, sl in enumerate(quo):
        if sl:
            out.cells[(0, 24 * j)] = {z: -c for z, c in sl.items()}
    return JacobiForm("phi0_%s" % meta.lattice_name, out, 0, Fraction(1),
                      meta.lattice_name, meta.family, meta.copies)


def phi0_by_general_division(key: str, q_depth: int) -> JacobiForm:
    """Same quotient through the generic series division (cross-check path)."""
    meta = MEMBERS[key]
    p = meta.hecke_p
    w_num = FourierSeries(meta.r, meta.den_z,
                          TruncationWindow(meta.val_q + 24 * q_depth, 0))
    w_den = FourierSeries(meta.r, meta.den_z,
                          TruncationWindow(meta.val_q + 24 * q_depth, 0))
    for j in range(q_depth + 1):
        q = meta.val_q + 24 * j
        num = member_hecke_slice(key, p, q)
        if num:
            w_num.cells[(0, q)] = num
        den = member_slice(key, q)
        if den:
            w_den.cells[(0, q)] = dict(den)
    quo = w_num.div(w_den)
    ser = (-quo).truncated(TruncationWindow(24 * q_depth, 0))
    return JacobiForm("phi0_%s" % meta.lattice_name, ser, 0, Fraction(1),
                      meta.lattice_name, meta.family, meta.copies)


def restrict_tower(form: JacobiForm, target_lattice: str) -> JacobiForm:
    """Set the trailing block of elliptic variables to zero."""
    from .lattices import lattice as _lat
    tgt = _lat(target_lattice)
    meta_family = "D" if tgt.family == "D" else ("A2" if tgt.family == "A2" else "A1")
    if form.family in ("D", "D1"):
        src_family = "D"
    else:
        src_family = form.family
    if src_family != meta_family:
        raise ValueError("restriction stays inside one family")
    ser = form.series
    r_target = tgt.rank if tgt.family != "A2" else tgt.rank
    if r_target > ser.r:
        raise ValueError("restriction cannot add variables")
    while ser.r > r_target:
        ser = ser.restrict_z(ser.r - 1)
    return JacobiForm("%s|%s" % (form.name, target_lattice), ser, form.weight,
                      form.index, target_lattice, form.family, 0)


_PHI0_CACHE: dict = {}


def weak_weight0(key: str, q_depth: int) -> JacobiForm:
    """Weight-0 form of a tower member, shared through the tower-top cache.

    A member restricts the top form when a deep enough top is already
    cached (a sweep over a tower pays for the top once and every member
    below reads it for free).  Otherwise its own block is divided, which
    is always cheaper than building the top just for one member.  The
    agreement of restriction and direct division is a checked identity.
    """
    cached = _PHI0_CACHE.get(key)
    if cached is not None and cached.series.window.q_max >= 24 * q_depth:
        return cached
    meta = MEMBERS[key]
    f = None
    if key not in TOWER_TOPS and meta.family != "D1":
        top_key = {"D": "psi_4_D8", "A2": "psi_3_3A2", "A1": "psi_2_4A1"}[meta.family]
        top = _PHI0_CACHE.get(top_key)
        if top is not None and top.series.window.q_max >= 24 * q_depth:
            res = restrict_tower(top, meta.lattice_name)
            f = JacobiForm("phi0_%s" % meta.lattice_name, res.series, 0,
                           Fraction(1), meta.lattice_name, meta.family,
                           meta.copies)
    if f is None:
        f = phi0_by_division(key, q_depth)
    if cached is None or f.series.window.q_max > cached.series.window.q_max:
        _PHI0_CACHE[key] = f
    return f


def quasi_pullback(form: JacobiForm, coord: int) -> JacobiForm:
    """Derivative in one elliptic variable followed by its restriction.

    Sends a block vanishing on z_coord = 0 to a block in one variable
    fewer; theta goes to eta^3, and each D-family block to its neighbour.
    """
    ser = form.series.derivative_z(coord).restrict_z(coord)
    new_lat = None
    if form.family == "D" and form.lattice_name and form.lattice_name != "D2":
        k = int(form.lattice_name[1:])
        if k >= 3:
            new_lat = "D%d" % (k - 1)
    weight = form.weight + 1
    return JacobiForm("qp(%s)" % form.name, ser, weight, form.index,
                      new_lat, form.family, max(0, form.copies - 1))


# ---------------------------------------------------------------------------
# coordinate dictionaries


def dual_from_z(family: str, z: tuple) -> tuple:
    """Dual lattice vector of a stored z-exponent tuple.

    The D1 block stores zeta-exponents of theta(tau, 2z) whose dual
    vectors are z/4 in e-coordinates; its holomorphic support bound pins
    the normalisation down.
    """
    if family == "D":
        return tuple(Fraction(a, 2) for a in z)
    if family == "A2":
        return tuple(Fraction(a, 6) for a in z)
    if family in ("A1", "D1"):
        return tuple(Fraction(a, 4) for a in z)
    raise ValueError("unknown family %r" % (family,))


def z_from_dual(family: str, ell: tuple) -> tuple:
    den = {"D": 2, "D1": 4, "A2": 6, "A1": 4}[family]
    out = []
    for a in ell:
        v = Fraction(a) * den
        if v.denominator != 1:
            raise ValueError("vector is not on the z grid")
        out.append(int(v))
    return tuple(out)
