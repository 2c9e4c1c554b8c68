"""Command-line front end.

Every command builds one operator, either from a kernel-sample file
(``--input``) or from the built-in 1D Helmholtz Green's function, runs the
requested analysis and emits a JSON document (or a CSV spectrum table).

Exit status: 0 when every check passes, 2 when a check fails (the document is
still written), 1 for usage and I/O errors.
"""

from __future__ import annotations

import argparse
import io
import csv
import json
import sys
import time
from dataclasses import dataclass

import numpy as np

from .kernels import (GridSpec, Helmholtz1D, KernelFileError, OverlapError, RULES, discretize,
                      load_kernel_samples)
from .operators import HS_METHODS, apply, hs_norm, is_hermitian, truncate
from .report import CheckReport
from .spaces import describe_space, validate_space
from .spectral import hermitian_eig, verify_eigen_properties
from .svd import sum_rule_check, svd, verify_svd_properties

COMMANDS = ("validate", "hsnorm", "truncate", "eig", "svd", "channels")
SPECTRUM_COMMANDS = ("eig", "svd", "channels")
HS_AGREEMENT_RTOL = 1e-10
PYTHAGORAS_RTOL = 1e-10
VERIFY_TOL = 1e-8
DEFAULT_TOL = {"eig": 1e-10, "svd": 1e-12, "channels": 1e-12}
SHIFT_NOTE = ("operator entries are sqrt(w_receiver) G sqrt(w_source) (orthonormal-basis "
              "coordinates of the quadrature-weighted spaces); vectors below are reported as "
              "function values at grid nodes, i.e. with the sqrt(weights) divided back out")


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    input: str | None = None
    wavenumber: float | None = None
    source: tuple[float, float] | None = None
    receiver: tuple[float, float] | None = None
    points: int | None = None
    rule: str = "midpoint"
    k: int = 1
    tol: float | None = None
    seed: int = 0
    output_format: str = "json"
    rows: int | None = None
    cols: int | None = None
    timing: bool = False

    def validate(self) -> None:
        if self.command not in COMMANDS:
            raise UsageError(f"unknown command {self.command!r}")
        if self.k < 1:
            raise UsageError(f"--k must be at least 1, got {self.k}")
        if self.tol is not None and not self.tol > 0:
            raise UsageError(f"--tol must be positive, got {self.tol}")
        if self.output_format not in ("json", "csv"):
            raise UsageError(f"--format must be json or csv, got {self.output_format!r}")
        if self.output_format == "csv" and self.command not in SPECTRUM_COMMANDS:
            raise UsageError(f"csv output is only available for {', '.join(SPECTRUM_COMMANDS)}")
        builtin = [self.wavenumber, self.source, self.receiver, self.points]
        if self.input is not None:
            if any(v is not None for v in builtin):
                raise UsageError("--input cannot be combined with built-in kernel flags")
            if self.command == "channels":
                raise UsageError("channels runs the built-in Helmholtz kernel; use svd for --input")
        elif any(v is None for v in builtin):
            raise UsageError("give --input PATH, or all of --wavenumber, --source, --receiver, --points")

    def echo(self) -> dict:
        return {
            "input": self.input,
            "wavenumber": self.wavenumber,
            "source": list(self.source) if self.source else None,
            "receiver": list(self.receiver) if self.receiver else None,
            "points": self.points,
            "rule": self.rule if self.input is None else None,
            "k": self.k,
            "tol": self.tol,
            "seed": self.seed,
            "format": self.output_format,
        }


def _complex_list(values) -> list:
    return [[float(z.real), float(z.imag)] for z in np.asarray(values).ravel()]


def _floats(values) -> list:
    return [float(x) for x in np.asarray(values).ravel()]


def _grid_dict(grid: GridSpec) -> dict:
    return {"lower": grid.lower, "upper": grid.upper, "points": grid.points, "rule": grid.rule}


def build_operator(config: RunConfig):
    if config.input is not None:
        return discretize(load_kernel_samples(config.input))
    try:
        kernel = Helmholtz1D(config.wavenumber)
        source = GridSpec(*config.source, config.points, config.rule)
        receiver = GridSpec(*config.receiver, config.points, config.rule)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    return discretize(kernel, source, receiver)


def _validate(disc, config):
    report = CheckReport()
    spaces = {}
    for name, space in (("source_space", disc.source_space), ("receiver_space", disc.receiver_space)):
        problems = validate_space(space)
        spaces[name] = {**describe_space(space), "violations": problems}
        report.add(f"{name}_valid", len(problems), 0)
    a = disc.op.elements
    hermitian = a.shape[0] == a.shape[1] and is_hermitian(disc.op)
    payload = {**spaces, "shape": list(a.shape), "hermitian": hermitian}
    return payload, report


def _hsnorm(disc, config):
    values = {m: hs_norm(disc.op, m) for m in HS_METHODS}
    ref = values["entry-squares"]
    spread = max(abs(v - ref) for v in values.values()) / ref if ref > 0 else 0.0
    report = CheckReport()
    report.add("methods_agree", spread, HS_AGREEMENT_RTOL)
    payload = {"hs_norm": ref, "hs_norm_squared": ref ** 2, "by_method": values}
    return payload, report


def _truncate(disc, config):
    rows, cols = disc.op.shape
    m = config.rows if config.rows is not None else min(config.k, rows)
    n = config.cols if config.cols is not None else min(config.k, cols)
    try:
        kept, cert = truncate(disc.op, m, n)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    total = hs_norm(disc.op)
    kept_norm = hs_norm(kept)
    report = CheckReport()
    pyth = abs(cert.tail_hs_norm ** 2 + kept_norm ** 2 - total ** 2) / max(total ** 2, 1e-300)
    report.add("pythagoras", pyth, PYTHAGORAS_RTOL)
    rng = np.random.default_rng(config.seed)
    worst = 0.0
    for _ in range(100):
        mu = rng.standard_normal(cols) + 1j * rng.standard_normal(cols)
        err = np.linalg.norm(apply(disc.op, mu) - apply(kept, mu))
        bound = cert.tail_hs_norm * np.linalg.norm(mu)
        worst = max(worst, err - bound * (1 + 1e-12))
    report.add("tail_bound", max(worst, 0.0), 0.0)
    payload = {"kept_rows": cert.kept_rows, "kept_cols": cert.kept_cols,
               "tail_hs_norm": cert.tail_hs_norm, "kept_hs_norm": kept_norm,
               "total_hs_norm": total}
    return payload, report


def _eig(disc, config):
    report = CheckReport()
    a = disc.op.elements
    hermitian = a.shape[0] == a.shape[1] and is_hermitian(disc.op)
    report.add("hermitian", 0.0 if hermitian else 1.0, 0.0, passed=hermitian)
    if not hermitian:
        return None, report
    k = min(config.k, a.shape[0])
    tol = config.tol if config.tol is not None else DEFAULT_TOL["eig"]
    d = hermitian_eig(disc.op, k, tol, config.seed)
    for name, check in verify_eigen_properties(disc.op, d, VERIFY_TOL, seed=config.seed).checks.items():
        report.checks[name] = check
    report.add("converged", sum(not c for c in d.converged), 0)
    payload = {
        "requested_k": config.k,
        "eigenvalues": _floats(d.eigenvalues),
        "residuals": _floats(d.residuals),
        "converged": list(d.converged),
        "eigenvectors_at_nodes": [_complex_list(disc.to_nodes(v, "source")) for v in d.eigenvectors],
        "nodes": _floats(disc.source_grid.nodes()),
    }
    return payload, report


def _svd(disc, config):
    rows, cols = disc.op.shape
    tol = config.tol if config.tol is not None else DEFAULT_TOL[config.command]
    r = svd(disc.op, min(rows, cols), tol, config.seed)
    report = verify_svd_properties(disc.op, r, VERIFY_TOL, seed=config.seed)
    rule = sum_rule_check(r, disc.op)
    report.add("sum_rule", rule["gap"], 1e-8)
    report.add("converged", 0 if r.converged else 1, 0)
    shown = min(config.k, len(r))
    psi = r.right_vectors.vectors[:, :shown]
    phi = r.left_vectors.vectors[:, :shown]
    payload = {
        "requested_k": config.k,
        "kept": shown,
        "numerical_rank": len(r),
        "singular_values": _floats(r.singular_values[:shown]),
        "sum_rule": rule,
        "source_nodes": _floats(disc.source_grid.nodes()),
        "receiver_nodes": _floats(disc.receiver_grid.nodes()),
        "psi_at_source_nodes": [_complex_list(v) for v in disc.to_nodes(psi, "source").T],
        "phi_at_receiver_nodes": [_complex_list(v) for v in disc.to_nodes(phi, "receiver").T],
    }
    return payload, report


_HANDLERS = {"validate": _validate, "hsnorm": _hsnorm, "truncate": _truncate, "eig": _eig,
             "svd": _svd, "channels": _svd}


def run(config: RunConfig) -> tuple[dict, int]:
    """Execute ``config`` and return the result document and exit status.

    Raises :class:`UsageError`, ``OSError`` or :class:`KernelFileError` for the
    conditions that map to exit status 1.
    """
    config.validate()
    start = time.perf_counter()
    disc = build_operator(config)
    payload, report = _HANDLERS[config.command](disc, config)
    doc = {
        "command": config.command,
        "parameters": config.echo(),
        "operator": {
            "shape": list(disc.op.shape),
            "source_grid": _grid_dict(disc.source_grid),
            "receiver_grid": _grid_dict(disc.receiver_grid),
            "coordinates": SHIFT_NOTE,
        },
        "payload": payload,
        "checks": report.to_dict(),
        "passed": report.passed,
    }
    if config.timing:
        doc["wall_time_s"] = time.perf_counter() - start
    return doc, 0 if report.passed else 2


def render(doc: dict, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(doc, indent=2, allow_nan=True) + "\n"
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    payload = doc["payload"]
    if payload is None:
        writer.writerow(["index", "eigenvalue", "residual", "converged"])
    elif "eigenvalues" in payload:
        writer.writerow(["index", "eigenvalue", "residual", "converged"])
        for i, (ev, res, ok) in enumerate(zip(payload["eigenvalues"], payload["residuals"],
                                              payload["converged"]), 1):
            writer.writerow([i, repr(ev), repr(res), ok])
    else:
        writer.writerow(["index", "singular_value"])
        for i, s in enumerate(payload["singular_values"], 1):
            writer.writerow([i, repr(s)])
    return buf.getvalue()


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    src = common.add_argument_group("operator source")
    src.add_argument("--input", metavar="PATH", help="kernel-sample file (KERNEL v1 format)")
    src.add_argument("--wavenumber", type=float, metavar="K", help="built-in 1D Helmholtz kernel")
    src.add_argument("--source", type=float, nargs=2, metavar=("LO", "HI"))
    src.add_argument("--receiver", type=float, nargs=2, metavar=("LO", "HI"))
    src.add_argument("--points", type=int, metavar="N", help="quadrature points per interval")
    src.add_argument("--rule", choices=RULES, default="midpoint")
    common.add_argument("--k", type=int, default=1, help="number of leading pairs/triples")
    common.add_argument("--tol", type=float, default=None, help="solver tolerance / cutoff")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--format", dest="output_format", choices=("json", "csv"), default="json")
    common.add_argument("--output", metavar="PATH", help="write here instead of standard output")
    common.add_argument("--rows", type=int, help="truncate: kept rows (default k)")
    common.add_argument("--cols", type=int, help="truncate: kept columns (default k)")
    common.add_argument("--timing", action="store_true", help="record wall time (breaks byte identity)")

    parser = _Parser(prog="hilbertkit", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name, text in (("validate", "check the inner-product spaces of the operator"),
                       ("hsnorm", "Hilbert-Schmidt norm by four equivalent sums"),
                       ("truncate", "leading-block truncation with its tail certificate"),
                       ("eig", "Hermitian eigendecomposition by deflation"),
                       ("svd", "singular-value decomposition with sum-rule check"),
                       ("channels", "coupling channels of the built-in Helmholtz kernel")):
        sub.add_parser(name, parents=[common], help=text)
    return parser


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        output = args.output
        config = RunConfig(
            command=args.command, input=args.input, wavenumber=args.wavenumber,
            source=tuple(args.source) if args.source else None,
            receiver=tuple(args.receiver) if args.receiver else None,
            points=args.points, rule=args.rule, k=args.k, tol=args.tol, seed=args.seed,
            output_format=args.output_format, rows=args.rows, cols=args.cols, timing=args.timing)
        doc, status = run(config)
        text = render(doc, config.output_format)
        if output:
            with open(output, "w", encoding="utf-8") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)
        return status
    except (UsageError, OverlapError) as exc:
        print(f"hilbertkit: error: {exc}", file=sys.stderr)
        return 1
    except (OSError, KernelFileError) as exc:
        print(f"hilbertkit: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
