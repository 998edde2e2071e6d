"""Root lattice catalogue with discriminant data and reflective vector classes.

Covered lattices: D_n for n = 1..8 (D_1 is the rank-one lattice of Gram
matrix (4)), k copies of A_2 for k = 1..3, and n copies of A_1 for
n = 1..4.  Coordinates are Euclidean e-coordinates for the D family,
fundamental-weight coordinates per copy for the A_2 family, and root
coordinates per copy for the A_1 family.

Reflective vectors live in the even lattice L = 2U + S(-1).  A Fourier
index (n, l, m) of a weight-0 form corresponds to w = m e' + n f' + l
in U + S^vee; the primitive negative vector on its line is v = D w with
D the order of l in the discriminant group, and the pair
(v^2, v/div(v) mod L) classifies its orbit under the stable orthogonal
group.
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd, isqrt
from typing import NamedTuple

Vec = tuple


def _fr(x) -> Fraction:
    return x if isinstance(x, Fraction) else Fraction(x)


def _mod2(x: Fraction) -> Fraction:
    """Reduce a rational into [0, 2)."""
    x = _fr(x)
    return x - 2 * (x / 2).__floor__()


CATALOGUE = (
    "D1", "D2", "D3", "D4", "D5", "D6", "D7", "D8",
    "A2", "2A2", "3A2",
    "A1", "2A1", "3A1", "4A1",
)


class DiscGroup(NamedTuple):
    order: int
    invariants: tuple
    reps: tuple  # coordinate tuples of Fractions


class EichlerClass(NamedTuple):
    v2: int
    div: int
    kappa: Vec  # reduced representative of v/div(v) in the discriminant group

    @property
    def is_reflective(self) -> bool:
        a = -self.v2
        return a > 0 and self.v2 % self.div == 0 and (2 * self.div) % a == 0


class ReflectiveClass(NamedTuple):
    v2: int
    div: int
    kappas: tuple  # the pair {kappa, -kappa}, merged when they coincide
    t_action: str  # "id", "-id", or "other": action of sigma_v on disc(S)
    in_tilde_o: bool
    in_tilde_so: bool
    witness: tuple  # Fourier index (n, l, m) realising the class


class Lattice:
    """One catalogue member; all data derives from family and copy count."""

    def __init__(self, name: str):
        if name not in CATALOGUE:
            raise ValueError("unknown lattice %r" % (name,))
        self.name = name
        if name.startswith("D"):
            self.family = "D"
            self.n = int(name[1:])
            self.rank = self.n
        else:
            k = 1 if name[0] == "A" else int(name[0])
            self.family = "A2" if name.endswith("A2") else "A1"
            self.n = k
            self.rank = 2 * k if self.family == "A2" else k
        self.dual_den = 3 if self.family == "A2" else 2

    def __repr__(self):
        return "Lattice(%s)" % self.name

    # -- bilinear form -------------------------------------------------------

    def inner(self, u: Vec, v: Vec) -> Fraction:
        if len(u) != self.rank or len(v) != self.rank:
            raise ValueError("bad vector length")
        if self.family == "D":
            total = sum(_fr(a) * _fr(b) for a, b in zip(u, v))
        elif self.family == "A1":
            total = 2 * sum(_fr(a) * _fr(b) for a, b in zip(u, v))
        else:
            total = Fraction(0)
            for i in range(0, self.rank, 2):
                a1, a2 = _fr(u[i]), _fr(u[i + 1])
                b1, b2 = _fr(v[i]), _fr(v[i + 1])
                total += Fraction(2 * a1 * b1 + 2 * a2 * b2 + a1 * b2 + a2 * b1, 3)
        return total

    def norm(self, v: Vec) -> Fraction:
        return self.inner(v, v)

    # -- membership ----------------------------------------------------------

    def in_lattice(self, v: Vec) -> bool:
        fv = [_fr(a) for a in v]
        if any(a.denominator != 1 for a in fv):
            return False
        iv = [int(a) for a in fv]
        if self.family == "D":
            if self.n == 1:
                return iv[0] % 2 == 0
            return sum(iv) % 2 == 0
        if self.family == "A1":
            return True
        return all((iv[i] - iv[i + 1]) % 3 == 0 for i in range(0, self.rank, 2))

    def in_dual(self, v: Vec) -> bool:
        fv = [_fr(a) for a in v]
        if self.family == "D":
            if self.n == 1:
                return fv[0].denominator in (1, 2)
            dens = {a.denominator for a in fv}
            return dens <= {1} or dens <= {1, 2} and all(a.denominator == 2 for a in fv)
        if self.family == "A1":
            return all(a.denominator in (1, 2) for a in fv)
        return all(a.denominator == 1 for a in fv)

    # -- basis and divisor -----------------------------------------------------

    def basis(self) -> tuple:
        """A Z-basis of S in ambient coordinates (the root basis)."""
        if self.family == "D":
            if self.n == 1:
                return ((Fraction(2),),)
            if self.n == 2:
                return ((Fraction(1), Fraction(-1)), (Fraction(1), Fraction(1)))
            rows = []
            for i in range(self.n - 1):
                row = [Fraction(0)] * self.n
                row[i], row[i + 1] = Fraction(1), Fraction(-1)
                rows.append(tuple(row))
            last = [Fraction(0)] * self.n
            last[self.n - 2] = last[self.n - 1] = Fraction(1)
            rows.append(tuple(last))
            return tuple(rows)
        if self.family == "A1":
            rows = []
            for i in range(self.rank):
                row = [Fraction(0)] * self.rank
                row[i] = Fraction(1)
                rows.append(tuple(row))
            return tuple(rows)
        rows = []
        for c in range(self.n):
            r1 = [Fraction(0)] * self.rank
            r2 = [Fraction(0)] * self.rank
            r1[2 * c], r1[2 * c + 1] = Fraction(2), Fraction(-1)
            r2[2 * c], r2[2 * c + 1] = Fraction(-1), Fraction(2)
            rows.append(tuple(r1))
            rows.append(tuple(r2))
        return tuple(rows)

    def gram(self) -> tuple:
        b = self.basis()
        return tuple(tuple(int(self.inner(x, y)) for y in b) for x in b)

    def content(self, v: Vec) -> int:
        """Positive generator of the pairing ideal (v, S)."""
        g = 0
        for b in self.basis():
            p = self.inner(v, b)
            if p.denominator != 1:
                raise ValueError("vector is not in the dual lattice")
            g = gcd(g, abs(int(p)))
        return g

    def divisor(self, v: Vec) -> int:
        """div(v) for v in S."""
        if not self.in_lattice(v):
            raise ValueError("divisor is defined for lattice vectors")
        return self.content(v)

    # -- discriminant group -----------------------------------------------------

    def disc_reduce(self, v: Vec) -> Vec:
        """Canonical representative of v + S in the discriminant group."""
        fv = [_fr(a) for a in v]
        if self.family == "A1":
            return tuple(a - a.__floor__() for a in fv)
        if self.family == "A2":
            out = []
            for c in range(self.n):
                t = int(fv[2 * c] + 2 * fv[2 * c + 1]) % 3
                out.extend((Fraction(1), Fraction(0)) if t == 1 else
                           (Fraction(0), Fraction(1)) if t == 2 else
                           (Fraction(0), Fraction(0)))
            return tuple(out)
        if self.n == 1:
            return (_mod2(fv[0]),)
        dens = {a.denominator for a in fv}
        zero = Fraction(0)
        if dens <= {1}:
            if sum(fv) % 2 == 0:
                return tuple([zero] * self.n)
            out = [zero] * self.n
            out[-1] = Fraction(1)
            return tuple(out)
        # half-integer coset: h or h' told apart by the doubled coordinate sum mod 4
        t = int(sum(2 * a for a in fv)) % 4
        h = [Fraction(1, 2)] * self.n
        if t != (self.n % 4):
            h[-1] = Fraction(-1, 2)
        return tuple(h)

    def disc_order(self, v: Vec) -> int:
        for d in range(1, 13):
            if self.in_lattice(tuple(_fr(a) * d for a in v)):
                return d
        raise ValueError("order not found; is the vector in the dual lattice?")

    def discriminant_group(self) -> DiscGroup:
        if self.family == "D":
            if self.n == 1:
                reps = [(Fraction(k, 2),) for k in range(4)]
                inv = (4,)
            else:
                zero = tuple([Fraction(0)] * self.n)
                e = list(zero)
                e[-1] = Fraction(1)
                h = tuple([Fraction(1, 2)] * self.n)
                hp = list(h)
                hp[-1] = Fraction(-1, 2)
                reps = [zero, tuple(e), h, tuple(hp)]
                inv = (4,) if self.n % 2 else (2, 2)
        elif self.family == "A1":
            reps = []
            for mask in range(1 << self.n):
                reps.append(tuple(Fraction(1, 2) if mask >> i & 1 else Fraction(0)
                                  for i in range(self.n)))
            inv = (2,) * self.n
        else:
            reps = [()]
            for _ in range(self.n):
                ext = []
                for t in ((Fraction(0), Fraction(0)), (Fraction(1), Fraction(0)),
                          (Fraction(0), Fraction(1))):
                    ext.extend(r + t for r in reps)
                reps = ext
            inv = (3,) * self.n
        reps = [self.disc_reduce(r) for r in reps]
        order = 1
        for t in inv:
            order *= t
        assert len(set(reps)) == order == len(reps)
        return DiscGroup(order, inv, tuple(sorted(reps)))

    # -- dual vector enumeration -------------------------------------------------

    def dual_vectors_up_to_norm(self, bound) -> list:
        """All v in S^vee with (v, v) <= bound, as coordinate tuples."""
        bound = _fr(bound)
        if bound < 0:
            return []
        if self.family == "D":
            out = []
            if self.n == 1:
                vals = set()
                t = Fraction(0)
                while t * t <= bound:
                    vals.add(t)
                    vals.add(-t)
                    t += Fraction(1, 2)
                return [(x,) for x in sorted(vals)]
            for parity in (0, 1):  # integer and half-integer cosets
                out.extend(self._rec_euclid(self.n, bound, parity))
            return sorted(out)
        if self.family == "A1":
            return sorted(self._rec_scaled(self.rank, bound, Fraction(1, 2), 2))
        return sorted(self._rec_a2(self.n, bound))

    def _rec_euclid(self, k, rem, parity):
        if k == 0:
            return [()] if rem >= 0 else []
        out = []
        t = Fraction(parity, 2)
        while t * t <= rem:
            for v in (t, -t) if t else (t,):
                for tail in self._rec_euclid(k - 1, rem - v * v, parity):
                    out.append((v,) + tail)
            t += 1
        return out

    def _rec_scaled(self, k, rem, step, scale):
        if k == 0:
            return [()] if rem >= 0 else []
        out = []
        t = Fraction(0)
        while scale * t * t <= rem:
            for v in (t, -t) if t else (t,):
                for tail in self._rec_scaled(k - 1, rem - scale * v * v, step, scale):
                    out.append((v,) + tail)
            t += step
        return out

    def _rec_a2(self, copies, rem):
        if copies == 0:
            return [()] if rem >= 0 else []
        out = []
        lim = int(3 * rem / 2) + 1
        r = isqrt(4 * lim // 3) + 2
        cell = []
        for a in range(-r, r + 1):
            for b in range(-r, r + 1):
                nrm = Fraction(2 * (a * a + a * b + b * b), 3)
                if nrm <= rem:
                    cell.append(((Fraction(a), Fraction(b)), nrm))
        for (pair, nrm) in cell:
            for tail in self._rec_a2(copies - 1, rem - nrm):
                out.append(pair + tail)
        return out

    # -- Eichler data ----------------------------------------------------------

    def eichler_invariant(self, n: int, ell: Vec, m: int) -> EichlerClass:
        """Orbit data of the primitive vector on the line of m e' + n f' + ell."""
        ell = tuple(_fr(a) for a in ell)
        if not self.in_dual(ell):
            raise ValueError("ell must be a dual vector")
        D = self.disc_order(ell)
        hyper = 2 * n * m - self.norm(ell)
        v2 = D * D * hyper
        if v2.denominator != 1:
            raise ValueError("non-integral vector norm")
        dv = gcd(gcd(D * abs(n), D * abs(m)), D * self.content(ell))
        kappa = self.disc_reduce(tuple(a * Fraction(D, dv) for a in ell))
        return EichlerClass(int(v2), dv, kappa)

    def classify_reflective(self) -> list:
        """All reflective vector classes of 2U + S(-1), with group flags."""
        disc = self.discriminant_group()
        seen = {}
        for kappa in disc.reps:
            D = self.disc_order(kappa)
            for v2 in (-D, -2 * D):
                if v2 % 2:
                    continue
                qk = _mod2(-self.norm(kappa))
                if _mod2(Fraction(v2, D * D)) != qk:
                    continue
                key = (v2, D, min(kappa, self.disc_reduce(tuple(-a for a in kappa))))
                if key in seen:
                    continue
                seen[key] = self._build_class(v2, D, kappa, disc)
        return sorted(seen.values(), key=lambda c: (-c.v2, c.div, c.kappas))

    def _build_class(self, v2, D, kappa, disc) -> ReflectiveClass:
        neg = self.disc_reduce(tuple(-a for a in kappa))
        kappas = (kappa,) if neg == kappa else tuple(sorted((kappa, neg)))
        # action of sigma_v on the discriminant group
        action = "id"
        ident = True
        negid = True
        for mu in disc.reps:
            t = Fraction(2 * D * D * self.inner(mu, kappa), v2)
            assert t.denominator == 1
            img = self.disc_reduce(tuple(a + t * b for a, b in zip(mu, kappa)))
            if img != mu:
                ident = False
            if img != self.disc_reduce(tuple(-a for a in mu)):
                negid = False
        if ident:
            action = "id"
        elif negid:
            action = "-id"
        else:
            action = "other"
        in_o = ident or negid
        in_so = negid and (self.rank % 2 == 1)
        mt = Fraction(v2 + D * D * self.norm(kappa), 2 * D)
        assert mt.denominator == 1 and int(mt) % D == 0
        witness = (int(mt) // D, kappa, 1)
        return ReflectiveClass(v2, D, kappas, action, in_o, in_so, witness)


_cache: dict = {}


def lattice(name: str) -> Lattice:
    if name not in _cache:
        _cache[name] = Lattice(name)
    return _cache[name]
