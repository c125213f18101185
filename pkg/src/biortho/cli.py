"""Command-line front end: ``biortho <command> [options]``.

Exit codes: 0 success, 1 usage error, 2 refusal (the diagnostic is still
written, with a ``reason`` drawn from :class:`RefusalReason`).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass, field, fields
from pathlib import Path

import numpy as np

from . import coherent, dual, pseudo_hermitian
from .errors import Refusal, RefusalReason
from .models import CATALOG, coherent_model, io_bound, make_model
from .symbol import classify, evaluate_grid, grid_nodes

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

EXIT_OK, EXIT_USAGE, EXIT_REFUSED = 0, 1, 2
FORMATS = ("json", "csv", "pretty")
COHERENT_MODES = ("perturbative", "exact", "table", "zak", "obstruction")
EPS_SCHEMES = ("linear", "random-seeded", "constant")


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    model: str | None = None
    a: float | None = None
    r: float | None = None
    L: list = field(default_factory=list)
    radius: int | None = None
    check_radius: int | None = None
    tol: float | None = None
    samples: int = 256
    mode: str = "table"
    case: str | None = None
    doublings: int | None = None
    R: int = 8
    eps: str = "linear"
    seed: int = 0
    value: float = 1.0
    margin: int | None = None
    action: str = "list"
    name: str | None = None
    index: str | None = None
    format: str = "json"
    out: str | None = None

    def model_params(self) -> dict:
        L = self.L[0] if self.L else None
        return {"a": self.a, "r": self.r, "L": L}

    def validate(self):
        if self.format not in FORMATS:
            raise UsageError(f"--format must be one of {FORMATS}")
        if self.tol is not None and not self.tol > 0:
            raise UsageError("--tol must be positive")
        for key in ("radius", "check_radius", "margin"):
            val = getattr(self, key)
            if val is not None and val < (1 if key == "margin" else 0):
                raise UsageError(f"--{key.replace('_', '-')} out of range: {val}")
        if self.command in ("symbol", "dual", "verify", "spectra"):
            if self.model is None:
                raise UsageError("--model is required")
            self.build_model()
        if self.command == "coherent":
            if self.mode not in COHERENT_MODES:
                raise UsageError(f"--mode must be one of {COHERENT_MODES}")
            if self.doublings is not None and self.doublings < 3:
                raise UsageError("--doublings must be >= 3")
            if any(int(L) < 1 for L in self.L):
                raise UsageError("--L must be >= 1")
        if self.command == "spectra":
            if self.eps not in EPS_SCHEMES:
                raise UsageError(f"--eps must be one of {EPS_SCHEMES}")
            if self.R < 1:
                raise UsageError("--R must be >= 1")
        if self.command == "models" and self.action == "eval":
            if self.name is None or self.index is None:
                raise UsageError("models eval needs --name and --index")
        if self.samples < 8:
            raise UsageError("--samples must be >= 8")

    def build_model(self):
        try:
            return make_model(self.model, **self.model_params())
        except (ValueError, TypeError) as exc:
            raise UsageError(str(exc)) from None


# -- serialization ----------------------------------------------------------


def clean(obj):
    """JSON-ready copy with every float rounded to 12 significant digits."""
    if isinstance(obj, dict):
        return {str(k): clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return clean(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return [clean(obj.real), clean(obj.imag)]
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if not math.isfinite(x):
            return None
        x = float(format(x, ".12g"))
        return 0.0 if x == 0 else x
    if isinstance(obj, RefusalReason):
        return obj.value
    return obj


def fmt_num(x) -> str:
    x = clean(x)
    return "nan" if x is None else repr(x)


def to_json(obj) -> str:
    return json.dumps(clean(obj), indent=2) + "\n"


def to_csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt_num(v) if isinstance(v, (float, np.floating)) else v for v in row])
    return buf.getvalue()


def to_pretty(obj, indent: int = 0) -> str:
    pad = "  " * indent
    lines = []
    for k, v in clean(obj).items():
        if isinstance(v, dict):
            lines.append(f"{pad}{k}:")
            lines.append(to_pretty(v, indent + 1).rstrip("\n"))
        elif isinstance(v, list) and v and isinstance(v[0], dict):
            lines.append(f"{pad}{k}:")
            keys = list(v[0])
            lines.append(pad + "  " + "  ".join(f"{c:>16}" for c in keys))
            for row in v:
                lines.append(pad + "  " + "  ".join(f"{str(row.get(c)):>16}" for c in keys))
        else:
            lines.append(f"{pad}{k}: {v}")
    return "\n".join(lines) + "\n"


def lattice_csv(columns: dict) -> str:
    """Columns of same-shaped lattices, one row per index."""
    first = next(iter(columns.values()))
    header = [f"i{k + 1}" for k in range(first.dimension)]
    for name in columns:
        header += [f"{name}_re", f"{name}_im"]
    rows = []
    for idx in first.indices():
        row = list(idx)
        for lat in columns.values():
            v = lat[idx]
            row += [float(v.real), float(v.imag)]
        rows.append(row)
    return to_csv(header, rows)


def render(cfg: RunConfig, report: dict, csv_text: str | None = None) -> str:
    if cfg.format == "csv" and csv_text is not None:
        return csv_text
    if cfg.format == "pretty":
        return to_pretty(report)
    return to_json(report)


def emit(cfg: RunConfig, text: str):
    if cfg.out:
        Path(cfg.out).write_text(text, encoding="utf-8", newline="\n")
    else:
        sys.stdout.write(text)


# -- commands ---------------------------------------------------------------


def _model_header(model) -> dict:
    return {"model": model.name, "parameters": model.parameters, "dimension": model.dimension}


def cmd_symbol(cfg: RunConfig) -> int:
    model = cfg.build_model()
    s = model.symbol(cfg.radius)
    verdict = classify(s)
    n = cfg.samples if model.dimension == 1 else min(cfg.samples, 64)
    vals = evaluate_grid(s, n).real
    p = grid_nodes(n)
    if model.dimension == 1:
        rows = [[float(pi), float(v)] for pi, v in zip(p, vals)]
        text = to_csv(["p", "alpha"], rows)
    else:
        rows = [[float(p[i]), float(p[j]), float(vals[i, j])] for i in range(n) for j in range(n)]
        text = to_csv(["p1", "p2", "alpha"], rows)
    report = {**_model_header(model), "verdict": verdict.to_dict()}
    emit(cfg, render(cfg, report, text))
    return EXIT_OK


def _pair(cfg: RunConfig, model):
    radius = dual.DEFAULT_RADIUS.get(model.dimension, 4) if cfg.radius is None else cfg.radius
    return dual.build_pair(model.symbol(), radius, radius, cfg.check_radius, cfg.tol)


def cmd_dual(cfg: RunConfig) -> int:
    model = cfg.build_model()
    pair = _pair(cfg, model)
    report = {**_model_header(model), "status": "ok", **pair.to_dict()}
    if cfg.format == "pretty":
        c0 = pair.c[(0,) * model.dimension]
        report = {
            **_model_header(model),
            "residuals": [{
                "c_radius": pair.c.radius,
                "check_radius": pair.check_radius,
                "nodes": pair.quadrature_nodes,
                "delta_residual": pair.delta_residual,
                "unit_sum": pair.unit_sum.real,
                "c0": c0.real,
            }],
            "c_decay": pair.c_summability.decay_class,
        }
    emit(cfg, render(cfg, report, lattice_csv({"c": pair.c, "d": pair.d})))
    return EXIT_OK


def cmd_verify(cfg: RunConfig) -> int:
    model = cfg.build_model()
    base = dual.DEFAULT_RADIUS.get(model.dimension, 4) if cfg.radius is None else cfg.radius
    check = cfg.check_radius if cfg.check_radius is not None else max(1, base // 2)
    rows = []
    for radius in (base, 2 * base, 4 * base) if model.dimension == 1 else (base, 2 * base):
        pair = dual.build_pair(model.symbol(), radius, radius, min(check, radius), cfg.tol)
        rows.append({"radius": radius, "check_radius": pair.check_radius,
                     "delta_residual": pair.delta_residual, "unit_sum": pair.unit_sum.real,
                     "nodes": pair.quadrature_nodes})
    res = [r["delta_residual"] for r in rows]
    report = {**_model_header(model), "status": "ok", "rows": rows,
              "monotone": all(b <= a + 1e-15 for a, b in zip(res, res[1:]))}
    text = to_csv(list(rows[0]), [list(r.values()) for r in rows])
    emit(cfg, render(cfg, report, text))
    return EXIT_OK


def _coherent_Ls(cfg: RunConfig, default) -> list[int]:
    return [int(L) for L in cfg.L] if cfg.L else list(default)


def cmd_coherent(cfg: RunConfig) -> int:
    mode = cfg.mode
    if mode == "table":
        rows = coherent.coherent_table(_coherent_Ls(cfg, (1, 2, 3, 4)))
        text = to_csv(["L", "offdiag", "diag", "bound"],
                      [[r["L"], r["offdiag"], r["diag"], r["bound"]] for r in rows])
        emit(cfg, render(cfg, {"rows": rows}, text))
        return EXIT_OK
    if mode == "perturbative":
        out = []
        for L in _coherent_Ls(cfg, (2,)):
            pd = coherent.perturbative_dual(L)
            nb = coherent.norm_bound_check(L)
            out.append({"L": L, "c0": 1.0, "neighbour": pd.neighbour_value, "bound": nb.bound,
                        "l1_residual": nb.l1_residual, "reliable": nb.reliable,
                        "coefficients": pd.coefficients.to_dict()})
        emit(cfg, render(cfg, {"duals": out},
                         to_csv(["L", "c0", "neighbour", "bound"],
                                [[o["L"], o["c0"], o["neighbour"], o["bound"]] for o in out])))
        return EXIT_OK
    if mode == "exact":
        out = []
        for L in _coherent_Ls(cfg, (2,)):
            radius = 6 if cfg.radius is None else cfg.radius
            c = coherent.exact_dual_2d(L, radius, cfg.tol or dual.DEFAULT_TOL[2])
            eps = math.exp(-0.5 * math.pi * L)
            gamma_dev = max(abs(c[s] + eps) for s in coherent.GAMMA)
            d = coherent_model(L).lattice(radius)
            check = min(3, radius) if cfg.check_radius is None else cfg.check_radius
            res, _ = dual.delta_residual(c, d, check)
            out.append({"L": L, "c00": c[(0, 0)].real, "c10": c[(1, 0)].real,
                        "perturbative_c10": -eps, "gamma_deviation": gamma_dev,
                        "io_bound_squared": io_bound(L) ** 2, "delta_residual": res,
                        "coefficients": c.to_dict()})
        emit(cfg, render(cfg, {"status": "ok", "duals": out},
                         to_csv(["L", "c00", "c10", "perturbative_c10", "gamma_deviation", "delta_residual"],
                                [[o[k] for k in ("L", "c00", "c10", "perturbative_c10",
                                                 "gamma_deviation", "delta_residual")] for o in out])))
        return EXIT_OK
    if mode == "zak":
        z = coherent.locate_zak_zero()
        report = {"zero": [z.point.k, z.point.q], "abs_value": abs(z.value),
                  "basins": len(z.basins), "expected": list(coherent.P0)}
        emit(cfg, render(cfg, report, to_csv(["k", "q", "abs_value"],
                                             [[z.point.k, z.point.q, abs(z.value)]])))
        return EXIT_OK
    # obstruction
    case = cfg.case or "coherent_L1"
    if case not in coherent.PROBE_CASES:
        raise UsageError(f"--case must be one of {sorted(coherent.PROBE_CASES)}")
    probe = coherent.l1_obstruction_probe(case, cfg.doublings)
    report = probe.to_dict()
    text = to_csv(["nodes", "radius", "l1", "l2_squared"], [list(r) for r in probe.rows])
    if probe.verdict == "divergent":
        report = {"status": RefusalReason.DIVERGENT.value, "reason": RefusalReason.DIVERGENT.value,
                  "message": "partial sums of the would-be dual grow without bound", **report}
        emit(cfg, to_json(report))
        return EXIT_REFUSED
    emit(cfg, render(cfg, {"status": "ok", **report}, text))
    return EXIT_OK


def cmd_spectra(cfg: RunConfig) -> int:
    model = cfg.build_model()
    R = cfg.R
    pair = dual.build_pair(model.symbol(), 2 * R, 2 * R, None, cfg.tol)
    f = pseudo_hermitian.build_frame(model, pair, R)
    eps = pseudo_hermitian.make_eps(cfg.eps, f.size, cfg.seed, cfg.value)
    rep = pseudo_hermitian.build_triple(f, eps, cfg.margin)
    report = {**_model_header(model), "R": R, "eps": cfg.eps, "status": "ok", **rep.to_dict(),
              "sop_residual": pseudo_hermitian.sop_identities(f, rep.interior_margin),
              "e_gram_residual": pseudo_hermitian.e_gram_residual(f, rep.interior_margin)
              if rep.h_available else None}
    keys = list(rep.spectra)
    rows = [[i] + [float(rep.spectra[k][i]) for k in keys] for i in range(f.size)]
    emit(cfg, render(cfg, report, to_csv(["k"] + keys, rows)))
    return EXIT_OK


def cmd_models(cfg: RunConfig) -> int:
    if cfg.action == "list":
        report = {"models": [{"name": name, "params": spec["params"]}
                             for name, spec in sorted(CATALOG.items())]}
        text = to_csv(["name", "params"],
                      [[n, ";".join(CATALOG[n]["params"])] for n in sorted(CATALOG)])
        emit(cfg, render(cfg, report, text))
        return EXIT_OK
    cfg.model = cfg.name
    model = cfg.build_model()
    try:
        index = tuple(int(t) for t in str(cfg.index).replace(" ", "").split(","))
        value = model.overlap_at(index if len(index) > 1 else index[0])
    except ValueError as exc:
        raise UsageError(f"bad --index {cfg.index!r}: {exc}") from None
    report = {**_model_header(model), "index": list(index), "overlap": value}
    text = to_csv([f"i{k + 1}" for k in range(len(index))] + ["re", "im"],
                  [list(index) + [value.real, value.imag]])
    emit(cfg, render(cfg, report, text))
    return EXIT_OK


COMMANDS = {
    "symbol": cmd_symbol,
    "dual": cmd_dual,
    "verify": cmd_verify,
    "coherent": cmd_coherent,
    "spectra": cmd_spectra,
    "models": cmd_models,
}


# -- argument parsing -------------------------------------------------------


class Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(EXIT_USAGE)


def _common() -> argparse.ArgumentParser:
    # every default is SUPPRESS so that only flags actually given override the config file
    p = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    p.add_argument("--format", choices=FORMATS)
    p.add_argument("--out")
    p.add_argument("--tol", type=float)
    p.add_argument("--config", help="TOML or JSON file with option values; flags win")
    return p


def _model_flags(p):
    p.add_argument("--model", choices=sorted(CATALOG))
    p.add_argument("--a", type=float)
    p.add_argument("--r", type=float)
    p.add_argument("--L", type=int, action="append")


def build_parser() -> Parser:
    common = _common()
    parser = Parser(prog="biortho", description=__doc__.splitlines()[0], parents=[common],
                    argument_default=argparse.SUPPRESS)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=Parser)
    kw = dict(parents=[common], argument_default=argparse.SUPPRESS)

    p = sub.add_parser("symbol", help="sample the symbol and classify invertibility", **kw)
    _model_flags(p)
    p.add_argument("--radius", type=int)
    p.add_argument("--samples", type=int)

    for name, text in (("dual", "dual and direct coefficients"),
                       ("verify", "convolution identity across radius doublings")):
        p = sub.add_parser(name, help=text, **kw)
        _model_flags(p)
        p.add_argument("--radius", type=int)
        p.add_argument("--check-radius", type=int, dest="check_radius")

    p = sub.add_parser("coherent", help="coherent-state lattice reports", **kw)
    p.add_argument("--L", type=int, action="append")
    p.add_argument("--mode", choices=COHERENT_MODES)
    p.add_argument("--case", choices=sorted(coherent.PROBE_CASES))
    p.add_argument("--doublings", type=int, help="node doublings for the obstruction probe (>= 3)")
    p.add_argument("--radius", type=int)
    p.add_argument("--check-radius", type=int, dest="check_radius")

    p = sub.add_parser("spectra", help="isospectral triple on a finite window", **kw)
    _model_flags(p)
    p.add_argument("--R", type=int)
    p.add_argument("--eps", choices=EPS_SCHEMES)
    p.add_argument("--seed", type=int)
    p.add_argument("--value", type=float)
    p.add_argument("--margin", type=int)

    p = sub.add_parser("models", help="model catalog", **kw)
    p.add_argument("action", nargs="?", choices=("list", "eval"))
    p.add_argument("--name", choices=sorted(CATALOG))
    p.add_argument("--index")
    p.add_argument("--a", type=float)
    p.add_argument("--r", type=float)
    p.add_argument("--L", type=int, action="append")
    return parser


def load_config(path: str) -> dict:
    text = Path(path).read_text(encoding="utf-8")
    try:
        data = json.loads(text) if path.endswith(".json") else tomllib.loads(text)
    except (ValueError, tomllib.TOMLDecodeError) as exc:
        raise UsageError(f"cannot parse config {path}: {exc}") from None
    return {k.replace("-", "_"): v for k, v in data.items()}


def make_config(ns: argparse.Namespace) -> RunConfig:
    given = vars(ns)
    merged = {}
    if "config" in given:
        try:
            merged.update(load_config(given["config"]))
        except OSError as exc:
            raise UsageError(f"cannot read config: {exc}") from None
    merged.update({k: v for k, v in given.items() if k != "config"})
    known = {f.name for f in fields(RunConfig)}
    unknown = sorted(set(merged) - known)
    if unknown:
        raise UsageError(f"unknown config keys: {unknown}")
    if "L" in merged and not isinstance(merged["L"], list):
        merged["L"] = [merged["L"]]
    cfg = RunConfig(**merged)
    cfg.validate()
    return cfg


def main(argv=None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        cfg = make_config(ns)
        return COMMANDS[cfg.command](cfg)
    except UsageError as exc:
        sys.stderr.write(f"biortho: error: {exc}\n")
        return EXIT_USAGE
    except Refusal as exc:
        emit(cfg, to_json(exc.to_dict()))
        return EXIT_REFUSED


if __name__ == "__main__":
    sys.exit(main())
