"""Command line front end.

Three commands:

* ``expand`` materialises a series for a descriptor and prints it,
* ``verify`` runs named identity checks and reports pass or fail,
* ``compare`` expands two descriptors and reports the first difference.

Descriptors name a series to build:

* a registry name: ``theta``, ``eta^3``, ``Theta_A2``, or a member key
  such as ``psi_4_D8`` (the block lattice, ``D8`` or ``3A2``, also works),
* ``lift:MEMBER`` for the arithmetic lift,
* ``borcherds:MEMBER`` for the product in exponential form,
* ``product:MEMBER`` for the literal factor-by-factor product,
* ``phi0:MEMBER`` for the weight-0 input of the product,
* ``closedform:Dk`` for the divisor-sum formula on the D tower.

Windows are given in displayed powers: ``--qmax 4 --smax 2`` keeps
everything through q^4 and s^2.  Expansions can be cached on disk with
``--cache-dir`` (or the CACHE_DIR environment variable); cache entries are
keyed by descriptor and window and carry a digest of the payload.
"""

import argparse
import hashlib
import json
import os
import sys
from fractions import Fraction

from .series import FourierSeries, TruncationWindow
from . import jacobi
from . import lifting
from . import borcherds
from . import verification

_SCHEMA = 1

_BY_LATTICE = {meta.lattice_name: key for key, meta in jacobi.MEMBERS.items()}


def _resolve_member(tok: str) -> str:
    if tok in jacobi.MEMBERS:
        return tok
    if tok in _BY_LATTICE:
        return _BY_LATTICE[tok]
    raise ValueError("unknown member %r (use a key like psi_4_D8 or a "
                     "block name like D8)" % tok)


def expand_descriptor(desc: str, window: TruncationWindow) -> FourierSeries:
    """Build the series a descriptor names, exact through the window."""
    kind, _, rest = desc.partition(":")
    if not rest:
        name = desc
        if name in _BY_LATTICE:
            name = _BY_LATTICE[name]
        try:
            return jacobi.build(name, window).series
        except KeyError:
            raise ValueError("unknown registry name %r" % desc)
    if kind == "lift":
        return lifting.gritsenko_lift(_resolve_member(rest), window).series
    if kind == "borcherds":
        return borcherds.borcherds_exp(_resolve_member(rest), window)
    if kind == "product":
        return borcherds.borcherds_product_form(_resolve_member(rest), window)
    if kind == "phi0":
        key = _resolve_member(rest)
        depth = max(window.q_max // 24, 1)
        w = TruncationWindow(24 * depth, 0)
        return jacobi.weak_weight0(key, depth).series.truncated(w)
    if kind == "closedform":
        key = _resolve_member(rest)
        meta = jacobi.MEMBERS[key]
        if meta.family != "D":
            raise ValueError("closedform: covers the D tower only")
        return lifting.closed_form_Dk(meta.r, window).series
    raise ValueError("unknown descriptor prefix %r" % kind)


# ---------------------------------------------------------------------------
# cache

def _cache_path(cache_dir: str, desc: str, window: TruncationWindow) -> str:
    key = json.dumps({"schema": _SCHEMA, "descriptor": desc,
                      "q_max": window.q_max, "s_max": window.s_max},
                     separators=(",", ":"), sort_keys=True)
    h = hashlib.sha256(key.encode()).hexdigest()
    return os.path.join(cache_dir, h + ".json")


def _cached_expand(desc: str, window: TruncationWindow, cache_dir) -> tuple:
    """Return (series_json, digest, hit)."""
    path = _cache_path(cache_dir, desc, window) if cache_dir else None
    if path and os.path.exists(path):
        with open(path) as fh:
            doc = json.load(fh)
        body = doc["series"]
        if (doc.get("schema") == _SCHEMA
                and hashlib.sha256(body.encode()).hexdigest() == doc.get("digest")):
            return body, doc["digest"], True
    series = expand_descriptor(desc, window)
    body = series.to_json()
    digest = hashlib.sha256(body.encode()).hexdigest()
    if path:
        os.makedirs(cache_dir, exist_ok=True)
        doc = {"schema": _SCHEMA, "descriptor": desc,
               "q_max": window.q_max, "s_max": window.s_max,
               "series": body, "digest": digest}
        tmp = path + ".tmp"
        with open(tmp, "w") as fh:
            json.dump(doc, fh, separators=(",", ":"), sort_keys=True)
        os.replace(tmp, path)
    return body, digest, False


# ---------------------------------------------------------------------------
# rendering

def _pow_str(num: int, den: int) -> str:
    f = Fraction(num, den)
    return str(f)


def _render_text(desc: str, window, series: FourierSeries, digest: str) -> str:
    lines = [
        "descriptor: %s" % desc,
        "window: q^%s s^%s" % (_pow_str(window.q_max, 24), _pow_str(window.s_max, 2)),
        "grid: r=%d den_z=%d" % (series.r, series.den_z),
        "terms: %d" % series.term_count(),
        "digest: %s" % digest,
    ]
    for (s, q) in sorted(series.cells, key=lambda c: (c[0], c[1])):
        sl = series.cells[(s, q)]
        if not sl:
            continue
        lines.append("s^%s q^%s: %d terms" % (_pow_str(s, 2), _pow_str(q, 24), len(sl)))
        for z in sorted(sl):
            lines.append("  (%s) %s" % (",".join(str(a) for a in z), sl[z]))
    return "\n".join(lines) + "\n"


def _render_json(desc: str, window, body: str, digest: str) -> str:
    doc = {"schema": _SCHEMA, "descriptor": desc,
           "window": {"q_max": window.q_max, "s_max": window.s_max},
           "digest": digest, "series": json.loads(body)}
    return json.dumps(doc, separators=(",", ":"), sort_keys=True) + "\n"


def _emit(text: str, out) -> None:
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# commands

def _window_from(args) -> TruncationWindow:
    return TruncationWindow(24 * args.qmax, 2 * args.smax)


def _cmd_expand(args) -> int:
    window = _window_from(args)
    cache_dir = args.cache_dir or os.environ.get("CACHE_DIR")
    try:
        body, digest, _ = _cached_expand(args.descriptor, window, cache_dir)
    except ValueError as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 2
    if args.format == "json":
        text = _render_json(args.descriptor, window, body, digest)
    else:
        text = _render_text(args.descriptor, window, FourierSeries.from_json(body), digest)
    _emit(text, args.out)
    return 0


def _cmd_verify(args) -> int:
    if args.list:
        _emit("".join(n + "\n" for n in verification.identities()), args.out)
        return 0
    window = None
    if args.qmax is not None or args.smax is not None:
        qn = 24 * args.qmax if args.qmax is not None else 1 << 40
        sn = 2 * args.smax if args.smax is not None else 1 << 40
        window = TruncationWindow(qn, sn)
    try:
        reports = verification.run_suite(args.identity or None, window)
    except KeyError as exc:
        print("error: %s" % exc.args[0], file=sys.stderr)
        return 2
    if args.format == "json":
        doc = [r._asdict() for r in reports]
        text = json.dumps(doc, separators=(",", ":"), sort_keys=True) + "\n"
    else:
        lines = []
        for r in reports:
            lines.append("%-4s %-34s checked=%-9d window=q^%s,s^%s" % (
                r.status, r.identity, r.checked_terms,
                _pow_str(r.window[0], 24), _pow_str(r.window[1], 2)))
            if r.status != "pass":
                lines.append("     claim: %s" % r.claim)
                lines.append("     details: %s" % json.dumps(r.details, sort_keys=True))
        text = "\n".join(lines) + "\n"
    _emit(text, args.out)
    return 0 if all(r.status == "pass" for r in reports) else 1


def _cmd_compare(args) -> int:
    window = _window_from(args)
    cache_dir = args.cache_dir or os.environ.get("CACHE_DIR")
    try:
        body_a, _, _ = _cached_expand(args.left, window, cache_dir)
        body_b, _, _ = _cached_expand(args.right, window, cache_dir)
    except ValueError as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 2
    a = FourierSeries.from_json(body_a)
    b = FourierSeries.from_json(body_b)
    if (a.r, a.den_z) != (b.r, b.den_z):
        print("error: incompatible grids r=%d,den_z=%d vs r=%d,den_z=%d"
              % (a.r, a.den_z, b.r, b.den_z), file=sys.stderr)
        return 2
    diff = a.first_difference(b)
    if diff is None:
        print("equal: %s == %s through q^%s s^%s (%d terms)" % (
            args.left, args.right, _pow_str(window.q_max, 24),
            _pow_str(window.s_max, 2), a.term_count()))
        return 0
    s, q, z, ca, cb = diff
    print("difference at s^%s q^%s z=(%s): %s vs %s" % (
        _pow_str(s, 2), _pow_str(q, 24), ",".join(str(v) for v in z), ca, cb))
    return 1


def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="refltower",
        description="Expand and verify the reflective tower forms.")
    sub = p.add_subparsers(dest="command", required=True)

    def add_window(sp, qdef=4, sdef=2):
        sp.add_argument("--qmax", type=int, default=qdef,
                        help="largest displayed q power (default %d)" % qdef)
        sp.add_argument("--smax", type=int, default=sdef,
                        help="largest displayed s power (default %d)" % sdef)

    def add_io(sp):
        sp.add_argument("--format", choices=("text", "json"), default="text")
        sp.add_argument("--out", help="write output to a file")

    sp = sub.add_parser("expand", help="materialise one series")
    sp.add_argument("descriptor")
    add_window(sp)
    add_io(sp)
    sp.add_argument("--cache-dir", help="cache expansions here (or CACHE_DIR)")
    sp.set_defaults(func=_cmd_expand)

    sp = sub.add_parser("verify", help="run identity checks")
    sp.add_argument("identity", nargs="*", help="identity names (default all)")
    sp.add_argument("--qmax", type=int, default=None,
                    help="cap the displayed q power of every check")
    sp.add_argument("--smax", type=int, default=None,
                    help="cap the displayed s power of every check")
    sp.add_argument("--list", action="store_true", help="list identity names")
    add_io(sp)
    sp.set_defaults(func=_cmd_verify)

    sp = sub.add_parser("compare", help="expand two descriptors and diff them")
    sp.add_argument("left")
    sp.add_argument("right")
    add_window(sp)
    sp.add_argument("--cache-dir", help="cache expansions here (or CACHE_DIR)")
    sp.set_defaults(func=_cmd_compare)
    return p


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    raise SystemExit(main())
