"""Command-line front end.

Exit codes: 0 success, 1 a check ran and failed, 2 bad input, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Sequence

import mpmath
import numpy as np

from .errors import InputError, NumericalError
from .forms import (
    DEFAULT_PRECISION,
    TernaryForm,
    dir_derivative,
    divide,
    form_from_json,
    format_form,
    monomials,
    parse_form,
    to_mpf,
)

EXIT_OK, EXIT_FAILED, EXIT_INPUT, EXIT_NUMERIC = 0, 1, 2, 3

COMMANDS = ("check-hyperbolic", "check-interlacer", "intersect", "dixon", "certify",
            "rationalize", "bezout", "sos", "conic-search", "render")


@dataclass
class RunConfig:
    command: str
    f: str | None = None
    g: str | None = None
    p: str | None = None
    e: tuple = (1, 0, 0)
    precision: int = DEFAULT_PRECISION
    samples: int | None = None
    seed: int = 0
    max_denominator: int = 1000
    perturb: bool = False
    exact: bool = False
    output: str | None = None

    def __post_init__(self):
        if self.precision < 64:
            raise InputError("precision must be at least 64 bits")
        if self.samples is not None and self.samples < 1:
            raise InputError("samples must be positive")


# ---------------------------------------------------------------- input


def _read_source(text: str):
    """File contents (JSON if it parses) or the argument itself."""
    path = Path(text)
    if len(text) < 4096 and path.is_file():
        raw = path.read_text()
        try:
            return json.loads(raw)
        except json.JSONDecodeError:
            return raw.strip()
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def load_form(text: str) -> TernaryForm:
    data = _read_source(text)
    if isinstance(data, str):
        return parse_form(data)
    if isinstance(data, dict):
        return form_from_json(data)
    raise InputError(f"cannot read a form from {text!r}")


def load_pencil(text: str):
    """A LinearPencil or RationalPencil from JSON, or a bracketed matrix of linear forms."""
    from .dixon import LinearPencil
    from .rationalize import RationalPencil

    data = _read_source(text)
    if isinstance(data, dict):
        if "v" in data:
            return RationalPencil.from_json(data)
        return LinearPencil.from_json(data)
    if isinstance(data, str):
        rows = _split_matrix(data)
    elif isinstance(data, list):
        rows = [[str(c) for c in row] for row in data]
    else:
        raise InputError("unrecognized pencil input")
    forms = []
    for row in rows:
        out = []
        for entry in row:
            form = parse_form(entry)
            if form.is_zero():
                form = TernaryForm.zero(1)
            if form.degree != 1:
                raise InputError(f"pencil entry {entry!r} is not linear")
            out.append(form)
        forms.append(out)
    n = len(forms)
    if any(len(r) != n for r in forms):
        raise InputError("pencil must be square")
    for i in range(n):
        for j in range(i):
            if forms[i][j] != forms[j][i]:
                raise InputError("pencil must be symmetric")
    return LinearPencil.from_forms(forms)


def _split_matrix(text: str) -> list[list[str]]:
    body = text.strip()
    if not (body.startswith("[[") and body.endswith("]]")):
        raise InputError("matrix text must look like [[a, b], [c, d]]")
    rows = body[2:-2].split("],")
    return [[c.strip() for c in r.replace("[", "").replace("]", "").split(",")] for r in rows]


def parse_point(text: str) -> tuple:
    parts = [p.strip() for p in text.split(",")]
    if len(parts) != 3:
        raise InputError("e must have three comma-separated coordinates")
    try:
        return tuple(Fraction(p) for p in parts)
    except (ValueError, ZeroDivisionError):
        raise InputError(f"cannot parse point {text!r}") from None


def _point_json(p: Sequence) -> list[str]:
    return [str(c) if isinstance(c, Fraction) else mpmath.nstr(to_mpf(c), 20) for c in p]


def _require(cfg: RunConfig, *names: str):
    for n in names:
        if getattr(cfg, n) is None:
            raise InputError(f"option -{n} is required for {cfg.command}")


def _forms(cfg: RunConfig):
    f = load_form(cfg.f)
    g = load_form(cfg.g) if cfg.g is not None else None
    return f, g


# ---------------------------------------------------------------- commands


def cmd_check_hyperbolic(cfg: RunConfig):
    from .hyperbolic import is_hyperbolic

    _require(cfg, "f")
    f, _ = _forms(cfg)
    if not cfg.exact:
        f = f.to_float(cfg.precision) if f.exact else f
    res = is_hyperbolic(f, cfg.e if f.exact else [to_mpf(c) for c in cfg.e],
                        n=cfg.samples or 200, seed=cfg.seed)
    out = {"hyperbolic": res.hyperbolic, "reason": res.reason,
           "witness": None if res.witness is None else _point_json(res.witness)}
    return out, res.hyperbolic


def cmd_check_interlacer(cfg: RunConfig):
    from .hyperbolic import is_interlacer

    _require(cfg, "f", "g")
    f, g = _forms(cfg)
    if not cfg.exact:
        f = f.to_float(cfg.precision) if f.exact else f
        g = g.to_float(cfg.precision) if g.exact else g
    e = cfg.e if f.exact else [to_mpf(c) for c in cfg.e]
    rep = is_interlacer(f, g, e, samples=cfg.samples or 200, seed=cfg.seed)
    out = {"interlacer": rep.is_interlacer, "strict": rep.strict,
           "wronskian_min": mpmath.nstr(to_mpf(rep.wronskian_min), 12),
           "bezout_psd_failures": len(rep.bezout_psd_failures),
           "line_failures": len(rep.line_failures), "reason": rep.reason}
    return out, rep.is_interlacer


def cmd_intersect(cfg: RunConfig):
    from .curves import classify_cycle, intersection_cycle

    _require(cfg, "f", "g")
    f, g = _forms(cfg)
    cyc = intersection_cycle(f, g, seed=cfg.seed, precision=cfg.precision)
    out = cyc.to_json()
    out["total"] = cyc.total
    try:
        data = classify_cycle(cyc, cfg.e, cfg.precision)
        out["r"], out["s"] = data.r, data.s
    except InputError as exc:
        out["classification"] = str(exc)
    return out, True


def _dixon(cfg: RunConfig, f, g):
    from .dixon import dixon_pipeline

    return dixon_pipeline(f, g, cfg.e, precision=cfg.precision, seed=cfg.seed,
                          perturb=cfg.perturb)


def cmd_dixon(cfg: RunConfig):
    _require(cfg, "f", "g")
    f, g = _forms(cfg)
    return _dixon(cfg, f, g).to_json(), True


def cmd_certify(cfg: RunConfig):
    from .certify import certify_pencil
    from .rationalize import RationalPencil

    _require(cfg, "f", "p")
    f, g = _forms(cfg)
    pencil = load_pencil(cfg.p)
    if isinstance(pencil, RationalPencil):
        pencil = pencil.pencil()
    if not cfg.exact and pencil.exact and not f.exact:
        pencil = pencil.to_float(cfg.precision)
    cert = certify_pencil(f, cfg.e, pencil, g=g, samples=cfg.samples or 10_000, seed=cfg.seed)
    return cert.to_json(), cert.passed


def cmd_rationalize(cfg: RunConfig):
    from .rationalize import RationalizationFailed, RationalPencil, rationalize_pencil

    _require(cfg, "f")
    f, g = _forms(cfg)
    if not f.exact:
        raise InputError("rationalize needs a curve with rational coefficients")
    if cfg.p is not None:
        pencil = load_pencil(cfg.p)
        if not isinstance(pencil, RationalPencil):
            raise InputError("a supplied pencil must be a rational pencil with its vector v")
        basis = None
    else:
        g = g if g is not None else dir_derivative(f, cfg.e)
        res = _dixon(cfg, f, g)
        pencil, basis = res.pencil, res.state.basis
    try:
        rp = rationalize_pencil(f, cfg.e, pencil, basis=basis, max_denominator=cfg.max_denominator,
                                seed=cfg.seed)
    except RationalizationFailed as exc:
        out = {"status": "failed", "reason": str(exc),
               "nearest": None if exc.nearest is None else exc.nearest.to_json()}
        return out, False
    out = rp.to_json()
    out["status"] = "ok"
    return out, True


def cmd_bezout(cfg: RunConfig):
    from .hyperbolic import bezout_multi, wronskian

    _require(cfg, "f", "g")
    f, g = _forms(cfg)
    B = bezout_multi(f, g, cfg.e)
    W = wronskian(f, g, cfg.e)
    return {"bezout": [[format_form(b) for b in row] for row in B.entries],
            "wronskian": format_form(W)}, True


def cmd_sos(cfg: RunConfig):
    from .rationalize import rationalize_pencil
    from .sosbez import extract_sos, sos_residual, verify_sos

    _require(cfg, "f")
    f, g = _forms(cfg)
    g = g if g is not None else dir_derivative(f, cfg.e)
    res = _dixon(cfg, f, g)
    if cfg.exact:
        if not (f.exact and g.exact):
            raise InputError("--exact needs rational f and g")
        v = [g.coefficient(m) for m in monomials(f.degree - 1)]
        source = rationalize_pencil(f, cfg.e, res.pencil, basis=res.state.basis,
                                    max_denominator=cfg.max_denominator, fixed_v=v, seed=cfg.seed)
    else:
        source = res
    sf = extract_sos(f, g, source, e=cfg.e)
    ok = verify_sos(f, g, sf)
    out = sf.to_json()
    resid = sos_residual(f, g, sf)
    out["residual"] = str(resid) if isinstance(resid, (int, Fraction)) else mpmath.nstr(resid, 6)
    out["verified"] = ok
    return out, ok


def cmd_conic_search(cfg: RunConfig):
    from .conics import real_contact_conic_search

    _require(cfg, "f")
    f, _ = _forms(cfg)
    res = real_contact_conic_search(f, cfg.e, angles=cfg.samples or 36, seed=cfg.seed)
    return res.to_json(), res.success


def cmd_render(cfg: RunConfig):
    _require(cfg, "f")
    f, g = _forms(cfg)
    extra = None
    if cfg.p is not None:
        from .certify import pencil_minor_form
        from .rationalize import RationalPencil

        pencil = load_pencil(cfg.p)
        if isinstance(pencil, RationalPencil):
            pencil = pencil.pencil()
        det, _ = pencil_minor_form(pencil)
        ff = f if det.exact else (f.to_float(det.precision) if f.exact else f)
        extra, _ = divide(det, ff)
    svg = render_svg(f, cfg.e, g, extra)
    return svg, True


HANDLERS = {
    "check-hyperbolic": cmd_check_hyperbolic,
    "check-interlacer": cmd_check_interlacer,
    "intersect": cmd_intersect,
    "dixon": cmd_dixon,
    "certify": cmd_certify,
    "rationalize": cmd_rationalize,
    "bezout": cmd_bezout,
    "sos": cmd_sos,
    "conic-search": cmd_conic_search,
    "render": cmd_render,
}


# ---------------------------------------------------------------- SVG


def _chart_frame(e: Sequence) -> np.ndarray:
    """Columns (u, v, e) with u, v orthonormal and orthogonal to e."""
    ev = np.array([float(c) for c in e])
    ev = ev / np.linalg.norm(ev)
    helper = np.eye(3)[int(np.argmin(np.abs(ev)))]
    u = np.cross(ev, helper)
    u /= np.linalg.norm(u)
    v = np.cross(ev, u)
    return np.column_stack([u, v, ev])


def render_svg(f: TernaryForm, e: Sequence, g: TernaryForm | None = None,
               extra: TernaryForm | None = None, size: int = 400, radius: float | None = None) -> str:
    """Static plot in the affine chart centred at e: the cone region, V(f), V(g), V(extra)."""
    from .fastnum import batched_roots, eval_form, restriction_coefficients

    T = _chart_frame(e)
    ev = T[:, 2]
    fx = f.to_float(53) if f.exact else f
    if radius is None:
        phis = np.linspace(0, 2 * np.pi, 181)[:-1]
        dirs = np.column_stack([np.cos(phis), np.sin(phis), np.zeros_like(phis)]) @ T.T
        roots = batched_roots(_ray_coeffs(fx, ev, dirs))
        real = np.where(np.abs(roots.imag) < 1e-9, np.abs(roots.real), np.nan)
        far = np.nanmax(real) if np.isfinite(real).any() else 1.0
        radius = float(min(max(1.3 * far, 1.0), 20.0))
    xs = np.linspace(-radius, radius, size)
    X, Y = np.meshgrid(xs, xs[::-1])
    pts = (np.stack([X.ravel(), Y.ravel(), np.ones(X.size)], axis=1)) @ T.T
    fr = restriction_coefficients(fx, list(ev), pts)
    rts = batched_roots(fr)
    inside = np.all((np.abs(rts.imag) > 1e-7) | (rts.real <= 0), axis=1).reshape(size, size)
    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" '
             f'viewBox="0 0 {size} {size}">',
             f'<rect width="{size}" height="{size}" fill="white"/>']
    for i in range(size):
        row = inside[i]
        j = 0
        while j < size:
            if row[j]:
                k = j
                while k < size and row[k]:
                    k += 1
                parts.append(f'<rect x="{j}" y="{i}" width="{k - j}" height="1" fill="#9fd89f"/>')
                j = k
            else:
                j += 1
    for form, colour in ((fx, "#1f4fbf"), (g, "#d0302f"), (extra, "#555555")):
        if form is None:
            continue
        ff = form.to_float(53) if form.exact else form
        vals = np.sign(eval_form(ff, pts)).reshape(size, size)
        edge = np.zeros((size, size), dtype=bool)
        edge[:, :-1] |= vals[:, :-1] != vals[:, 1:]
        edge[:-1, :] |= vals[:-1, :] != vals[1:, :]
        ii, jj = np.nonzero(edge)
        path = "".join(f"M{j} {i}h1v1h-1z" for i, j in zip(ii.tolist(), jj.tolist()))
        if path:
            parts.append(f'<path d="{path}" fill="{colour}"/>')
    parts.append(f"<!-- chart radius {radius:.6g} -->")
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def _ray_coeffs(f: TernaryForm, e: np.ndarray, dirs: np.ndarray) -> np.ndarray:
    """Coefficients of ``t -> f(e + t d)`` for each direction ``d`` (rows)."""
    from .fastnum import eval_form

    d = f.degree
    nodes = np.cos(np.pi * (np.arange(d + 1) + 0.5) / (d + 1))
    vals = np.stack([eval_form(f, e[None, :] + t * dirs) for t in nodes], axis=1)
    return np.linalg.solve(np.vander(nodes, d + 1), vals.T).T


# ---------------------------------------------------------------- entry point


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="hypcurve",
                                 description="Definite determinantal pencils for hyperbolic plane curves.")
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("-f", help="curve: JSON file, text file or expression")
    ap.add_argument("-g", help="interlacer: JSON file, text file or expression")
    ap.add_argument("-p", help="pencil: JSON file or [[...], ...] matrix of linear forms")
    ap.add_argument("-e", default="1,0,0", help="direction x,y,z (default 1,0,0)")
    ap.add_argument("--precision", type=int, default=DEFAULT_PRECISION)
    ap.add_argument("--samples", type=int)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--max-denom", type=int, default=1000, dest="max_denominator")
    ap.add_argument("--perturb", action="store_true")
    ap.add_argument("--exact", action="store_true")
    ap.add_argument("-o", dest="output")
    return ap


def _emit(payload, cfg: RunConfig, stream) -> None:
    if isinstance(payload, str):
        text = payload
    else:
        text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    if cfg.output:
        Path(cfg.output).write_text(text)
    else:
        stream.write(text)


def _attach_negative_values(argv: list[str]) -> list[str]:
    """``-e -1,0,1`` -> ``-e=-1,0,1`` so argparse does not read the value as a flag."""
    out = []
    i = 0
    while i < len(argv):
        if argv[i] == "-e" and i + 1 < len(argv) and argv[i + 1].startswith("-"):
            out.append("-e=" + argv[i + 1])
            i += 2
        else:
            out.append(argv[i])
            i += 1
    return out


def run(argv: Sequence[str] | None = None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    argv = _attach_negative_values(list(sys.argv[1:] if argv is None else argv))
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    try:
        cfg = RunConfig(args.command, args.f, args.g, args.p, parse_point(args.e), args.precision,
                        args.samples, args.seed, args.max_denominator, args.perturb, args.exact,
                        args.output)
        with mpmath.workprec(cfg.precision):
            payload, ok = HANDLERS[cfg.command](cfg)
        if isinstance(payload, dict):
            payload["seed"] = cfg.seed
            payload["command"] = cfg.command
            payload["e"] = _point_json(cfg.e)
        _emit(payload, cfg, stdout)
        return EXIT_OK if ok else EXIT_FAILED
    except NumericalError as exc:
        stderr.write(f"numerical failure: {exc}\n")
        return EXIT_NUMERIC
    except (InputError, ValueError, KeyError, OSError, ZeroDivisionError) as exc:
        stderr.write(f"input error: {exc}\n")
        return EXIT_INPUT


def main() -> None:  # pragma: no cover - console script
    sys.exit(run())


if __name__ == "__main__":  # pragma: no cover
    main()
