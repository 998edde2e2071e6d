"""Sparse Laurent-Fourier series with exact coefficients on fixed fractional grids.

Exponent bookkeeping is integral throughout: powers of q are stored as
integer multiples of 1/24, powers of s as integer multiples of 1/2, and
the r elliptic exponents as integer multiples of 1/den_z.  Coefficients
are python ints, promoted to Fraction only where an operation demands it.

A series is a dict of cells keyed by (s_num, q_num); each cell is a dict
mapping a z-exponent tuple to its coefficient.  Every series carries a
TruncationWindow recording the region where its terms are exact; binary
operations propagate the largest window they can honestly guarantee.
"""

from __future__ import annotations

import heapq
import json
from fractions import Fraction
from hashlib import sha256
from typing import Iterator, NamedTuple

import numpy as np

QDEN = 24
SDEN = 2
INF = 1 << 60

ZKey = tuple


class TruncationWindow(NamedTuple):
    """Inclusive exactness bounds, in grid units of 1/24 (q) and 1/2 (s)."""

    q_max: int
    s_max: int

    def meet(self, other: "TruncationWindow") -> "TruncationWindow":
        return TruncationWindow(min(self.q_max, other.q_max), min(self.s_max, other.s_max))


def window(q_max: int, s_max: int = 0) -> TruncationWindow:
    return TruncationWindow(q_max, s_max)


def _norm_coeff(c):
    """Collapse integral Fractions back to int."""
    if isinstance(c, Fraction) and c.denominator == 1:
        return int(c)
    return c


def _coeff_to_str(c) -> str:
    return str(c)


def _coeff_from_str(s: str):
    if "/" in s:
        return Fraction(s)
    return int(s)


def _lex_positive(z: ZKey) -> bool:
    for a in z:
        if a:
            return a > 0
    return False


# ---------------------------------------------------------------------------
# slice-level kernels


def _slice_mul_py(acc: dict, A: dict, B: dict) -> None:
    """acc += A * B by direct pair enumeration."""
    for za, ca in A.items():
        for zb, cb in B.items():
            z = tuple(x + y for x, y in zip(za, zb))
            v = acc.get(z, 0) + ca * cb
            if v:
                acc[z] = v
            else:
                acc.pop(z, None)


_NP_PAIR_MIN = 4096
_NP_CHUNK = 1 << 21
_NP_MERGE_CAP = 1 << 22


def _np_safe(A: dict, B: dict) -> bool:
    if len(A) * len(B) < _NP_PAIR_MIN:
        return False
    sa = sb = 0
    for c in A.values():
        if not isinstance(c, int):
            return False
        sa += c if c >= 0 else -c
    for c in B.values():
        if not isinstance(c, int):
            return False
        sb += c if c >= 0 else -c
    return sa * sb < (1 << 62)


def _packed_reduce(keys, vals):
    """Sum vals over equal keys; sorted keys and nonzero sums come back."""
    order = np.argsort(keys, kind="stable")
    ks = keys[order]
    vs = vals[order]
    if len(ks) == 0:
        return ks, vs
    starts = np.empty(len(ks), dtype=bool)
    starts[0] = True
    np.not_equal(ks[1:], ks[:-1], out=starts[1:])
    idx = np.flatnonzero(starts)
    sums = np.add.reduceat(vs, idx)
    keep = sums != 0
    return ks[idx][keep], sums[keep]


def _slice_mul_np(acc: dict, A: dict, B: dict, r: int) -> None:
    """acc += A * B with packed-key numpy accumulation.

    Keys are linearised with common strides so that packing commutes with
    addition.  Pair enumeration runs in bounded chunks and the partial
    sums are merged whenever they pass a size cap, which keeps the peak
    footprint independent of the total pair count.
    """
    ka = np.array(list(A.keys()), dtype=np.int64).reshape(len(A), r)
    kb = np.array(list(B.keys()), dtype=np.int64).reshape(len(B), r)
    ca = np.fromiter(A.values(), dtype=np.int64, count=len(A))
    cb = np.fromiter(B.values(), dtype=np.int64, count=len(B))
    lo = ka.min(0) + kb.min(0) if r else np.zeros(0, np.int64)
    hi = ka.max(0) + kb.max(0) if r else np.zeros(0, np.int64)
    span = hi - lo + 1
    total = 1
    for w in span:
        total *= int(w)
        if total >= (1 << 62):
            _slice_mul_py(acc, A, B)
            return
    strides = np.ones(r, dtype=np.int64)
    for i in range(r - 2, -1, -1):
        strides[i] = strides[i + 1] * span[i + 1]
    pa = ka @ strides
    pb = kb @ strides
    base = int(lo @ strides)
    rows = max(1, _NP_CHUNK // max(1, len(B)))
    run_k = run_v = None
    pending = 0
    pieces_k = []
    pieces_v = []

    def flush():
        nonlocal run_k, run_v, pending, pieces_k, pieces_v
        if run_k is not None:
            pieces_k.append(run_k)
            pieces_v.append(run_v)
        run_k, run_v = _packed_reduce(np.concatenate(pieces_k),
                                      np.concatenate(pieces_v))
        pieces_k = []
        pieces_v = []
        pending = 0

    for start in range(0, len(A), rows):
        p = (pa[start : start + rows, None] + pb[None, :]).ravel() - base
        w = (ca[start : start + rows, None] * cb[None, :]).ravel()
        k1, v1 = _packed_reduce(p, w)
        pieces_k.append(k1)
        pieces_v.append(v1)
        pending += len(k1)
        if pending > _NP_MERGE_CAP:
            flush()
    if pieces_k:
        flush()
    if run_k is None or len(run_k) == 0:
        return
    uniq, tot = run_k, run_v
    # unpack and merge
    zcols = np.empty((len(uniq), r), dtype=np.int64)
    rem = uniq
    for i in range(r):
        quo, rem = np.divmod(rem, strides[i])
        zcols[:, i] = quo + lo[i]
    if not acc:
        for row, c in zip(zcols.tolist(), tot.tolist()):
            acc[tuple(row)] = c
        return
    for row, c in zip(zcols.tolist(), tot.tolist()):
        z = tuple(row)
        v = acc.get(z, 0) + c
        if v:
            acc[z] = v
        else:
            acc.pop(z, None)


def _slice_mul_into(acc: dict, A: dict, B: dict, r: int) -> None:
    if not A or not B:
        return
    if _np_safe(A, B):
        _slice_mul_np(acc, A, B, r)
    else:
        _slice_mul_py(acc, A, B)


def _peel_divide(R: dict, B0: dict, r: int) -> dict:
    """Exact division of a z-slice by a slice with a +-1 lex-max pivot.

    Peels the lex-largest remainder term against the pivot; newly created
    keys are pushed on a max-heap with lazy deletion.  Raises ArithmeticError
    when the division leaves a remainder (detected by the support floor of
    an exact quotient, or by a nonzero final remainder).
    """
    if not R:
        return {}
    pivot = max(B0)
    pc = B0[pivot]
    if pc != 1 and pc != -1:
        raise ArithmeticError("divisor slice pivot is not a unit")
    rlo = [min(k[i] for k in R) for i in range(r)]
    blo = [min(k[i] for k in B0) for i in range(r)]
    floor = tuple(a - b for a, b in zip(rlo, blo))
    live = dict(R)
    heap = [tuple(-c for c in z) for z in live]
    heapq.heapify(heap)
    Q: dict = {}
    while heap:
        z = tuple(-c for c in heapq.heappop(heap))
        c = live.get(z)
        if not c:
            continue
        zq = tuple(a - b for a, b in zip(z, pivot))
        for a, f in zip(zq, floor):
            if a < f:
                raise ArithmeticError("slice division left a remainder")
        cq = c if pc == 1 else -c
        Q[zq] = cq
        for zb, cb in B0.items():
            zt = tuple(a + b for a, b in zip(zq, zb))
            old = live.get(zt, 0)
            v = old - cq * cb
            if v:
                if not old:
                    heapq.heappush(heap, tuple(-x for x in zt))
                live[zt] = v
            else:
                live.pop(zt, None)
    if any(live.values()):
        raise ArithmeticError("slice division left a remainder")
    return Q


def _div_binomial_slice(sl: dict, dvec: ZKey) -> dict:
    """Exact division of a z-slice by (zeta^dvec - zeta^-dvec).

    Works line by line in the dvec direction with a descending prefix
    recurrence; raises ArithmeticError when some line has a remainder.
    """
    if not sl:
        return {}
    D = sum(d * d for d in dvec)
    lines: dict = {}
    for z, c in sl.items():
        t = sum(a * b for a, b in zip(z, dvec))
        perp = tuple(a * D - t * b for a, b in zip(z, dvec))
        lines.setdefault(perp, {})[t] = (z, c)
    out: dict = {}
    for ln in lines.values():
        ts = sorted(ln)
        tmin, tmax = ts[0], ts[-1]
        for t0 in {t % (2 * D) for t in ts}:
            # walk this congruence class from the top
            top = tmax - ((tmax - t0) % (2 * D))
            if top < tmin:
                continue
            acc = 0
            zcur = None
            t = top
            while t >= tmin:
                ent = ln.get(t)
                if ent is not None:
                    z, c = ent
                    acc += c
                    zcur = z
                if acc and zcur is not None:
                    zq = tuple(a - b for a, b in zip(zcur, dvec))
                    out[zq] = out.get(zq, 0) + acc
                    if not out[zq]:
                        del out[zq]
                    zcur = tuple(a - 2 * b for a, b in zip(zcur, dvec))
                t -= 2 * D
            if acc:
                raise ArithmeticError("binomial division left a remainder")
    return out


# ---------------------------------------------------------------------------


class FourierSeries:
    """Truncated exact Fourier expansion in q, zeta_1..zeta_r, s."""

    __slots__ = ("r", "den_z", "window", "cells")

    def __init__(self, r: int, den_z: int, window: TruncationWindow):
        self.r = r
        self.den_z = den_z
        self.window = window
        self.cells: dict = {}

    # -- construction ------------------------------------------------------

    @classmethod
    def zero(cls, r: int, den_z: int, window: TruncationWindow) -> "FourierSeries":
        return cls(r, den_z, window)

    @classmethod
    def monomial(cls, coeff, q_num: int, z: ZKey, s_num: int, den_z: int,
                 window: TruncationWindow) -> "FourierSeries":
        f = cls(len(z), den_z, window)
        f.add_term(q_num, tuple(z), s_num, coeff)
        return f

    def add_term(self, q_num: int, z: ZKey, s_num: int, coeff) -> None:
        if q_num > self.window.q_max or s_num > self.window.s_max:
            return
        coeff = _norm_coeff(coeff)
        if not coeff:
            return
        cell = self.cells.setdefault((s_num, q_num), {})
        v = cell.get(z, 0) + coeff
        v = _norm_coeff(v)
        if v:
            cell[z] = v
        else:
            del cell[z]
            if not cell:
                del self.cells[(s_num, q_num)]

    # -- inspection --------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.cells

    def coefficient(self, q_num: int, z: ZKey, s_num: int = 0):
        cell = self.cells.get((s_num, q_num))
        if not cell:
            return 0
        return cell.get(tuple(z), 0)

    def terms(self) -> Iterator[tuple]:
        """Yield (q_num, z, s_num, coeff) in canonical (s, q, z) order."""
        for (s, q) in sorted(self.cells):
            cell = self.cells[(s, q)]
            for z in sorted(cell):
                yield q, z, s, cell[z]

    def term_count(self) -> int:
        return sum(len(c) for c in self.cells.values())

    def q_valuation(self) -> int:
        return min((q for (_, q) in self.cells), default=INF)

    def s_valuation(self) -> int:
        return min((s for (s, _) in self.cells), default=INF)

    def corner_cell(self) -> tuple:
        """Cell (s, q) at minimal s, then minimal q; requires nonzero."""
        s0 = min(s for (s, _) in self.cells)
        q0 = min(q for (s, q) in self.cells if s == s0)
        return (s0, q0)

    def lowest_term(self) -> tuple:
        """(q_num, z, s_num, coeff) at the corner cell, lex-least z."""
        s0, q0 = self.corner_cell()
        cell = self.cells[(s0, q0)]
        z = min(cell)
        return q0, z, s0, cell[z]

    def __repr__(self) -> str:
        return "FourierSeries(r=%d, den_z=%d, window=%s, %d terms)" % (
            self.r, self.den_z, tuple(self.window), self.term_count())

    def __eq__(self, other) -> bool:
        if not isinstance(other, FourierSeries):
            return NotImplemented
        return (self.r == other.r and self.den_z == other.den_z
                and self.window == other.window and self.cells == other.cells)

    def __hash__(self):
        raise TypeError("unhashable")

    # -- linear structure ----------------------------------------------------

    def copy(self) -> "FourierSeries":
        f = FourierSeries(self.r, self.den_z, self.window)
        f.cells = {cq: dict(sl) for cq, sl in self.cells.items()}
        return f

    def _check_compatible(self, other: "FourierSeries") -> None:
        if self.r != other.r or self.den_z != other.den_z:
            raise ValueError("incompatible series shapes")

    def __add__(self, other: "FourierSeries") -> "FourierSeries":
        self._check_compatible(other)
        w = self.window.meet(other.window)
        out = FourierSeries(self.r, self.den_z, w)
        for src in (self, other):
            for (s, q), sl in src.cells.items():
                if s > w.s_max or q > w.q_max:
                    continue
                for z, c in sl.items():
                    out.add_term(q, z, s, c)
        return out

    def __neg__(self) -> "FourierSeries":
        out = FourierSeries(self.r, self.den_z, self.window)
        out.cells = {cq: {z: -c for z, c in sl.items()} for cq, sl in self.cells.items()}
        return out

    def __sub__(self, other: "FourierSeries") -> "FourierSeries":
        return self + (-other)

    def scaled(self, c) -> "FourierSeries":
        c = _norm_coeff(c)
        out = FourierSeries(self.r, self.den_z, self.window)
        if not c:
            return out
        for cq, sl in self.cells.items():
            out.cells[cq] = {z: _norm_coeff(v * c) for z, v in sl.items()}
        return out

    def shifted(self, q_num: int = 0, z: ZKey = None, s_num: int = 0) -> "FourierSeries":
        """Multiply by the monomial q^(q_num/24) zeta^z s^(s_num/2)."""
        if z is None:
            z = (0,) * self.r
        w = TruncationWindow(self.window.q_max + q_num, self.window.s_max + s_num)
        out = FourierSeries(self.r, self.den_z, w)
        for (s, q), sl in self.cells.items():
            out.cells[(s + s_num, q + q_num)] = {
                tuple(a + b for a, b in zip(zz, z)): c for zz, c in sl.items()}
        return out

    # -- multiplication ------------------------------------------------------

    def mul(self, other: "FourierSeries", window: TruncationWindow = None) -> "FourierSeries":
        """Product, exact on the largest window both factors support.

        With valuations v and windows W the product of A and B is exact for
        q <= min(W_A.q + v_B.q, W_B.q + v_A.q), and likewise in s; an
        explicit window argument intersects with that bound.
        """
        self._check_compatible(other)
        if self.is_zero() or other.is_zero():
            wq = min(self.window.q_max, other.window.q_max)
            ws = min(self.window.s_max, other.window.s_max)
            return FourierSeries.zero(self.r, self.den_z, TruncationWindow(wq, ws))
        wq = min(self.window.q_max + other.q_valuation(),
                 other.window.q_max + self.q_valuation())
        ws = min(self.window.s_max + other.s_valuation(),
                 other.window.s_max + self.s_valuation())
        w = TruncationWindow(min(wq, INF), min(ws, INF))
        if window is not None:
            w = w.meet(window)
        out = FourierSeries(self.r, self.den_z, w)
        for (s1, q1), A in self.cells.items():
            for (s2, q2), B in other.cells.items():
                s, q = s1 + s2, q1 + q2
                if s > w.s_max or q > w.q_max:
                    continue
                acc = out.cells.setdefault((s, q), {})
                _slice_mul_into(acc, A, B, self.r)
        out.cells = {cq: sl for cq, sl in out.cells.items() if sl}
        return out

    def __mul__(self, other):
        if isinstance(other, FourierSeries):
            return self.mul(other)
        return self.scaled(other)

    __rmul__ = __mul__

    def pow_int(self, n: int, window: TruncationWindow = None) -> "FourierSeries":
        if n < 0:
            raise ValueError("negative power")
        result = None
        base = self
        while n:
            if n & 1:
                result = base if result is None else result.mul(base, window)
            n >>= 1
            if n:
                base = base.mul(base, window)
        if result is None:
            w = window if window is not None else self.window
            return FourierSeries.monomial(1, 0, (0,) * self.r, 0, self.den_z, w)
        return result

    # -- division ------------------------------------------------------------

    def div(self, other: "FourierSeries") -> "FourierSeries":
        """Exact division; the divisor's corner slice must have a unit pivot.

        Quotient cells are solved in increasing (s, q) order; each cell is a
        z-slice division of the running remainder by the divisor's corner
        slice.  Raises ArithmeticError when no exact quotient exists on the
        deduced window, ValueError when the divisor support escapes the
        quadrant above its corner.
        """
        self._check_compatible(other)
        if other.is_zero():
            raise ZeroDivisionError("division by zero series")
        bs, bq = other.corner_cell()
        for (s, q) in other.cells:
            if s < bs or q < bq:
                raise ValueError("divisor support must lie in its corner quadrant")
        if self.is_zero():
            w = TruncationWindow(self.window.q_max - bq, self.window.s_max - bs)
            return FourierSeries.zero(self.r, self.den_z, w)
        avs, avq = self.s_valuation(), self.q_valuation()
        wq = min(self.window.q_max, other.window.q_max + avq - bq) - bq
        ws = min(self.window.s_max, other.window.s_max + avs - bs) - bs
        w = TruncationWindow(wq, ws)
        out = FourierSeries(self.r, self.den_z, w)
        B0 = other.cells[(bs, bq)]
        for cs in range(avs - bs, ws + 1):
            for cq in range(avq - bq, wq + 1):
                R = dict(self.cells.get((cs + bs, cq + bq), {}))
                for (s2, q2), Bsl in other.cells.items():
                    if s2 == bs and q2 == bq:
                        continue
                    Csl = out.cells.get((cs + bs - s2, cq + bq - q2))
                    if Csl:
                        negB = {z: -c for z, c in Bsl.items()}
                        _slice_mul_into(R, Csl, negB, self.r)
                R = {z: c for z, c in R.items() if c}
                if R:
                    Q = _peel_divide(R, B0, self.r)
                    if Q:
                        out.cells[(cs, cq)] = Q
        return out

    def __truediv__(self, other):
        if isinstance(other, FourierSeries):
            return self.div(other)
        return self.scaled(Fraction(1, other) if isinstance(other, int) else 1 / other)

    # -- exponential ---------------------------------------------------------

    def exp_s(self) -> "FourierSeries":
        """exp of a series with positive s-valuation, exact on its window."""
        one = FourierSeries.monomial(1, 0, (0,) * self.r, 0, self.den_z, self.window)
        if self.is_zero():
            return one
        sval = self.s_valuation()
        if sval <= 0:
            raise ValueError("exp needs positive s-valuation")
        out = one
        term = one
        j = 1
        while j * sval <= self.window.s_max:
            term = term.mul(self, self.window).scaled(Fraction(1, j))
            if term.is_zero():
                break
            out = out + term
            j += 1
        return out

    # -- variable changes ------------------------------------------------------

    def scale_variables(self, q_factor=1, z_factor=1) -> "FourierSeries":
        """Substitute tau -> a*tau, z -> b*z; errors if a key leaves the grid."""
        qf = Fraction(q_factor)
        zf = Fraction(z_factor)
        wq = int(self.window.q_max * qf) if qf >= 1 else self.window.q_max
        out = FourierSeries(self.r, self.den_z, TruncationWindow(wq, self.window.s_max))
        for (s, q), sl in self.cells.items():
            qn = q * qf
            if qn.denominator != 1:
                raise ValueError("q exponent leaves the 1/24 grid")
            for z, c in sl.items():
                zn = tuple(a * zf for a in z)
                if any(a.denominator != 1 for a in zn):
                    raise ValueError("z exponent leaves the 1/den_z grid")
                out.add_term(int(qn), tuple(int(a) for a in zn), s, c)
        return out

    def map_z(self, matrix, den_z_new: int = None) -> "FourierSeries":
        """Relabel elliptic exponents by z_new = z @ matrix (integer matrix)."""
        rows = len(matrix)
        if rows != self.r:
            raise ValueError("matrix rows must match r")
        r_new = len(matrix[0]) if rows else 0
        dz = den_z_new if den_z_new is not None else self.den_z
        if r_new == 0:
            dz = 1
        out = FourierSeries(r_new, dz, self.window)
        for (s, q), sl in self.cells.items():
            acc = out.cells.setdefault((s, q), {})
            for z, c in sl.items():
                zn = tuple(sum(z[i] * matrix[i][j] for i in range(rows)) for j in range(r_new))
                v = _norm_coeff(acc.get(zn, 0) + c)
                if v:
                    acc[zn] = v
                else:
                    acc.pop(zn, None)
        out.cells = {cq: sl for cq, sl in out.cells.items() if sl}
        return out

    def restrict_z(self, i: int) -> "FourierSeries":
        """Set z_i = 0, summing coefficients; r drops by one."""
        if not 0 <= i < self.r:
            raise ValueError("coordinate out of range")
        cols = [j for j in range(self.r) if j != i]
        matrix = [[1 if j == col else 0 for col in cols] for j in range(self.r)]
        return self.map_z(matrix)

    def derivative_z(self, i: int) -> "FourierSeries":
        """Apply (2 pi i)^-1 d/dz_i, i.e. multiply each term by its z_i exponent."""
        if not 0 <= i < self.r:
            raise ValueError("coordinate out of range")
        out = FourierSeries(self.r, self.den_z, self.window)
        for (s, q), sl in self.cells.items():
            acc = {}
            for z, c in sl.items():
                v = _norm_coeff(c * Fraction(z[i], self.den_z))
                if v:
                    acc[z] = v
            if acc:
                out.cells[(s, q)] = acc
        return out

    def truncated(self, window: TruncationWindow) -> "FourierSeries":
        w = self.window.meet(window)
        out = FourierSeries(self.r, self.den_z, w)
        for (s, q), sl in self.cells.items():
            if s <= w.s_max and q <= w.q_max:
                out.cells[(s, q)] = dict(sl)
        return out

    # -- comparison ------------------------------------------------------------

    def first_difference(self, other: "FourierSeries",
                         window: TruncationWindow = None):
        """First (s, q, z) key where the two series differ, or None.

        Comparison runs over the meet of both windows (and the argument).
        """
        self._check_compatible(other)
        w = self.window.meet(other.window)
        if window is not None:
            w = w.meet(window)
        keys = set()
        for src in (self, other):
            for (s, q), sl in src.cells.items():
                if s <= w.s_max and q <= w.q_max:
                    for z in sl:
                        keys.add((s, q, z))
        for (s, q, z) in sorted(keys):
            a = self.coefficient(q, z, s)
            b = other.coefficient(q, z, s)
            if a != b:
                return (s, q, z, a, b)
        return None

    # -- serialisation -----------------------------------------------------------

    def to_json(self) -> str:
        terms = [{"q": q, "z": list(z), "s": s, "c": _coeff_to_str(c)}
                 for q, z, s, c in self.terms()]
        doc = {"schema": 1, "r": self.r, "den_z": self.den_z,
               "window": {"q_max": self.window.q_max, "s_max": self.window.s_max},
               "terms": terms}
        return json.dumps(doc, separators=(",", ":"), sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "FourierSeries":
        doc = json.loads(text)
        if doc.get("schema") != 1:
            raise ValueError("unknown schema version")
        w = TruncationWindow(doc["window"]["q_max"], doc["window"]["s_max"])
        f = cls(doc["r"], doc["den_z"], w)
        for t in doc["terms"]:
            f.add_term(t["q"], tuple(t["z"]), t["s"], _coeff_from_str(t["c"]))
        return f

    def digest(self) -> str:
        return sha256(self.to_json().encode()).hexdigest()
