"""Command-line front end: simulate, fit, fuse, decide, evaluate, boundary, grid-rho.

Exit codes: 0 success, 2 input or configuration error, 3 fitting error,
4 evaluation error. Reports go to standard output, diagnostics to standard
error, and files are written only when ``--out`` is given.
"""

import argparse
import os
import sys

import numpy as np

from . import serialization
from .calibration import AffineCalibration, GaussianBackend, backend_llrs, fit_affine_asv, fit_affine_cm, fit_gaussian_backend
from .decision import CostMatrix, Priors, decide_linear, decide_optimal_llr
from .errors import DomainError, FitError, MetricError, SasvError
from .fusion import FusionKind, grid_search_rho
from .simulation import SimulationSpec, export_boundary_grid, sample_trials
from .systems import FittedModels, evaluate_system, fuse_system, system_spec, system_streams
from .trials import format_tsv, read_tsv

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_FIT = 3
EXIT_EVAL = 4


class CommandError(Exception):
    def __init__(self, message, code):
        super().__init__(message)
        self.code = code


class RunConfig:
    """Parsed evaluation configuration; model paths are relative to the config file."""

    def __init__(self, doc, base_dir="."):
        try:
            self.system = system_spec(str(doc["system"])).name
        except KeyError:
            raise DomainError("config needs a 'system' entry") from None
        self.priors = Priors.from_dict(doc["priors"]) if "priors" in doc else Priors.flat()
        self.costs = CostMatrix.from_dict(doc["costs"]) if "costs" in doc else CostMatrix()
        self.rho_source = doc.get("rho")
        self.model_paths = {k: os.path.join(base_dir, v) for k, v in doc.get("models", {}).items()}
        self.base_dir = base_dir

    @classmethod
    def load(cls, path):
        doc = serialization.load(path)
        if not isinstance(doc, dict):
            raise DomainError(f"{path}: config must be a JSON object")
        try:
            return cls(doc, os.path.dirname(os.path.abspath(path)))
        except (TypeError, AttributeError, ValueError) as exc:
            if isinstance(exc, DomainError):
                raise
            raise DomainError(f"{path}: malformed config ({exc})") from None

    def models(self, resolve_rho=True):
        """Load the models of the configured system.

        With ``resolve_rho=False`` rho is left unset; the per-stream values do
        not depend on it.
        """
        spec = system_spec(self.system)
        backend = affine_asv = affine_cm = None
        if spec.uses_backend:
            backend = GaussianBackend.from_dict(self._model("backend"))
        if spec.calibrated:
            affine_asv = AffineCalibration.from_dict(self._model("affine_asv"))
            affine_cm = AffineCalibration.from_dict(self._model("affine_cm"))
        rho = None
        if resolve_rho and spec.kind is FusionKind.LLR_NONLINEAR:
            rho = self._rho(backend, affine_asv, affine_cm)
        return FittedModels(affine_asv, affine_cm, backend, rho)

    def _model(self, key):
        if key not in self.model_paths:
            raise DomainError(f"system {self.system} needs model '{key}' in the config")
        return serialization.load(self.model_paths[key])

    def _rho(self, backend, affine_asv, affine_cm):
        src = self.rho_source
        if src is None:
            return float(self.priors.rho)
        if "fixed" in src:
            rho = float(src["fixed"])
            if not 0.0 <= rho <= 1.0:
                raise DomainError("fixed rho must lie in [0, 1]")
            return rho
        if "grid" in src:
            if "dev" not in src:
                raise DomainError("grid rho needs a 'dev' trial file")
            dev = read_tsv(os.path.join(self.base_dir, src["dev"]))
            a, c = system_streams(self.system, FittedModels(affine_asv, affine_cm, backend, 0.0), dev.s_asv, dev.s_cm)
            return grid_search_rho(a, c, dev.label, objective=src["grid"], costs=self.costs, priors=self.priors)
        raise DomainError("rho must be {'fixed': value} or {'grid': objective}")


def _streams(cfg, trials):
    models = cfg.models(resolve_rho=False)
    models = FittedModels(models.affine_asv, models.affine_cm, models.backend, 0.0)
    return system_streams(cfg.system, models, trials.s_asv, trials.s_cm)


def _write_text(text, out):
    if out:
        with open(out, "w", encoding="utf-8", newline="\n") as f:
            f.write(text)
    else:
        sys.stdout.write(text)


def _read_trials(path, code=EXIT_INPUT):
    try:
        return read_tsv(path)
    except OSError as exc:
        raise CommandError(f"cannot read {path}: {exc.strerror}", code) from None
    except DomainError as exc:
        raise CommandError(str(exc), code) from None


def _write_trials(trials, out, extra=None):
    _write_text(format_tsv(trials, extra), out)


def cmd_simulate(args):
    try:
        doc = serialization.load(args.spec)
        if args.seed is not None:
            doc["seed"] = args.seed
        spec = SimulationSpec.from_dict(doc)
    except OSError as exc:
        raise CommandError(f"cannot read {args.spec}: {exc.strerror}", EXIT_INPUT) from None
    except DomainError as exc:
        raise CommandError(f"invalid simulation spec: {exc}", EXIT_INPUT) from None
    _write_trials(sample_trials(spec), args.out)
    return EXIT_OK


def cmd_fit(args):
    dev = _read_trials(args.dev, EXIT_FIT)
    if len(dev) == 0 or not dev.is_labeled:
        raise CommandError("development file must contain labeled trials only", EXIT_FIT)
    try:
        if args.what == "backend":
            model = fit_gaussian_backend(dev.s_asv, dev.s_cm, dev.label)
        else:
            a, c = dev.s_asv, dev.s_cm
            if args.on_backend:
                a, c = backend_llrs(GaussianBackend.from_dict(serialization.load(args.on_backend)), a, c)
            if args.what == "affine-asv":
                model = fit_affine_asv(a, dev.label)
            else:
                model = fit_affine_cm(c, dev.label)
    except FitError as exc:
        raise CommandError(str(exc), EXIT_FIT) from None
    _write_text(serialization.dumps(model.to_dict()), args.out)
    return EXIT_OK


def _load_config(path, code):
    if not path:
        raise CommandError("--config is required", code)
    try:
        return RunConfig.load(path)
    except OSError as exc:
        raise CommandError(f"cannot read {path}: {exc.strerror}", code) from None
    except DomainError as exc:
        raise CommandError(str(exc), code) from None


def cmd_evaluate(args):
    trials = _read_trials(args.trials, EXIT_EVAL)
    if len(trials) == 0:
        raise CommandError("evaluation file has no trials", EXIT_EVAL)
    cfg = _load_config(args.config, EXIT_EVAL)
    try:
        report = evaluate_system(trials, cfg.system, cfg.models(), cfg.priors, cfg.costs)
    except (DomainError, MetricError, FitError, OSError) as exc:
        raise CommandError(str(exc), EXIT_EVAL) from None
    out = {"system": cfg.system, "n_trials": len(trials)}
    out.update(report.to_dict())
    _write_text(serialization.dumps(out), args.out)
    return EXIT_OK


def cmd_fuse(args):
    trials = _read_trials(args.trials)
    cfg = _load_config(args.config, EXIT_EVAL)
    try:
        fused = fuse_system(cfg.system, cfg.models(), trials.s_asv, trials.s_cm)
    except (DomainError, FitError, OSError) as exc:
        raise CommandError(str(exc), EXIT_EVAL) from None
    _write_trials(trials, args.out, {"s_sasv": np.atleast_1d(fused)})
    return EXIT_OK


def cmd_decide(args):
    trials = _read_trials(args.trials)
    cfg = _load_config(args.config, EXIT_EVAL)
    spec = system_spec(cfg.system)
    if spec.kind in (FusionKind.SUM_RAW, FusionKind.SIGMOID_SUM, FusionKind.SIGMOID_PRODUCT):
        raise CommandError(f"system {cfg.system} does not produce LLRs; decisions need b1c, l2, l2c, l3 or l3c", EXIT_EVAL)
    try:
        llrs = _streams(cfg, trials)
        if args.policy == "linear":
            accept = decide_linear(llrs, cfg.priors)
        else:
            accept = decide_optimal_llr(llrs, cfg.priors, cfg.costs)
    except (DomainError, FitError, OSError) as exc:
        raise CommandError(str(exc), EXIT_EVAL) from None
    decisions = np.where(np.atleast_1d(accept), "accept", "reject").astype(object)
    _write_trials(trials, args.out, {"decision": decisions})
    return EXIT_OK


def cmd_grid_rho(args):
    dev = _read_trials(args.dev, EXIT_FIT)
    cfg = _load_config(args.config, EXIT_INPUT)
    try:
        a, c = _streams(cfg, dev)
        rho = grid_search_rho(a, c, dev.label, objective=args.objective, costs=cfg.costs, priors=cfg.priors)
    except FitError as exc:
        raise CommandError(str(exc), EXIT_FIT) from None
    except (DomainError, OSError) as exc:
        raise CommandError(str(exc), EXIT_INPUT) from None
    _write_text(serialization.dumps({"rho": rho}), args.out)
    return EXIT_OK


def _parse_priors(text):
    try:
        values = [float(v) for v in text.split(",")]
        return Priors(np.array(values))
    except (ValueError, DomainError) as exc:
        raise CommandError(f"bad priors {text!r}: {exc}", EXIT_INPUT) from None


def cmd_boundary(args):
    priors, costs = Priors.flat(), CostMatrix()
    if args.config:
        cfg = _load_config(args.config, EXIT_INPUT)
        priors, costs = cfg.priors, cfg.costs
    mismatched = _parse_priors(args.mismatched_priors) if args.mismatched_priors else None
    try:
        grid = export_boundary_grid(tuple(args.asv), tuple(args.cm), priors, costs, mismatched)
    except DomainError as exc:
        raise CommandError(str(exc), EXIT_INPUT) from None
    _write_text(grid.csv_text(), args.out)
    return EXIT_OK


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise CommandError(message, EXIT_INPUT)


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="override the simulation seed")
    common.add_argument("--config", default=None, help="run configuration (JSON)")
    common.add_argument("--out", default=None, help="output path (default: standard output)")

    parser = _Parser(prog="sasvfusion", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("simulate", parents=[common], help="draw trials from a Gaussian score world")
    p.add_argument("spec", help="simulation spec (JSON)")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("fit", parents=[common], help="fit a calibration or backend model")
    p.add_argument("dev", help="labeled development trials (TSV)")
    p.add_argument("--what", required=True, choices=["affine-asv", "affine-cm", "backend"])
    p.add_argument("--on-backend", default=None, help="fit the affine map on LLRs of this backend")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("fuse", parents=[common], help="append the fused SASV score column")
    p.add_argument("trials")
    p.set_defaults(func=cmd_fuse)

    p = sub.add_parser("decide", parents=[common], help="accept/reject each trial")
    p.add_argument("trials")
    p.add_argument("--policy", choices=["optimal", "linear"], default="optimal")
    p.set_defaults(func=cmd_decide)

    p = sub.add_parser("evaluate", parents=[common], help="print a metrics report (JSON)")
    p.add_argument("trials")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("boundary", parents=[common], help="export decision boundaries on an LLR grid (CSV)")
    p.add_argument("--asv", nargs=3, type=float, required=True, metavar=("START", "STOP", "STEP"))
    p.add_argument("--cm", nargs=3, type=float, required=True, metavar=("START", "STOP", "STEP"))
    p.add_argument("--mismatched-priors", default=None, metavar="SPF,NONBF,TARBF")
    p.set_defaults(func=cmd_boundary)

    p = sub.add_parser("grid-rho", parents=[common], help="grid-search rho on development trials")
    p.add_argument("dev")
    p.add_argument("--objective", choices=["min_sasv_eer", "min_risk"], default="min_sasv_eer")
    p.set_defaults(func=cmd_grid_rho)
    return parser


def main(argv=None):
    try:
        args = build_parser().parse_args(argv)
        return args.func(args)
    except CommandError as exc:
        print(f"sasvfusion: error: {exc}", file=sys.stderr)
        return exc.code
    except SasvError as exc:
        print(f"sasvfusion: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except BrokenPipeError:
        # reader went away (e.g. piped into head); silence the flush at exit
        os.dup2(os.open(os.devnull, os.O_WRONLY), sys.stdout.fileno())
        return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
