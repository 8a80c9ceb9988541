"""Command-line front end.

    silverreach analyze --pi 1,2.41421356 --v 1,1
    silverreach gramian --alpha 1,2 --beta 1,1 [--target 0.5,0.3]
    silverreach optimize
    silverreach sweep --n 200 --out fun.csv
    silverreach synthesize --pi 1,2 --target 0.1,0,0,0 [--horizon 8 --dt 0.004]
    silverreach pendulum --inertia 0.01,0.0017 --mass 1 --arm 0.1

JSON goes to stdout (or ``--out``) and carries ``"schema": "silverreach/1"``.
Floats are written with 17 significant digits in JSON and shortest
round-trip form in CSV.  Failures exit with status 2 and print an error
object ``{"schema", "error": {"code", "message"}}`` to stderr.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import warnings
from dataclasses import dataclass, field
from typing import Any, Optional, Sequence

import numpy as np

from . import gramian as gm
from .decomposition import build_transform, to_modal
from .errors import DegenerateSystemWarning, SilverReachError, ValidationError
from .pendulum import G0, PendulumParams, linearize, optimal_inertia_ratio, recommend
from .reachability import optimal_ratio, reachable_set, sweep_objective, volume_measures
from .synthesis import SynthesisProblem, synthesize_min_energy
from .systems import CoupledSystem, FirstOrderPair, StabilityClass, classify, modal_pairs

SCHEMA = "silverreach/1"
COMMANDS = ("analyze", "gramian", "optimize", "sweep", "synthesize", "pendulum")
FORMATS = ("json", "csv", "text")
EXIT_OK = 0
EXIT_ERROR = 2


class UsageError(ValidationError):
    code = "usage_error"


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse would print usage and exit
        raise UsageError(message)


# -- serialization -----------------------------------------------------------


def _json_value(obj: Any) -> str:
    if obj is None or obj is True or obj is False:
        return json.dumps(obj)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return format(x, ".17g") if math.isfinite(x) else "null"
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        items = (f"{json.dumps(str(k))}: {_json_value(v)}" for k, v in obj.items())
        return "{" + ", ".join(items) + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        return "[" + ", ".join(_json_value(v) for v in obj) + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(report: dict) -> str:
    """Deterministic JSON with 17 significant digits; non-finite floats become null."""
    return _json_value(report) + "\n"


def _text(report: dict, prefix: str = "") -> str:
    lines = []
    for key, value in report.items():
        if isinstance(value, dict):
            lines.append(_text(value, prefix + key + "."))
        else:
            lines.append(f"{prefix}{key}: {_json_value(value)}")
    return "\n".join(lines)


def _csv(header: Sequence[str], rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([repr(float(x)) for x in row])
    return buf.getvalue()


# -- argument parsing ---------------------------------------------------------


def _floats(count: int):
    def parse(text: str) -> tuple[float, ...]:
        try:
            values = tuple(float(s) for s in text.split(","))
        except ValueError:
            raise argparse.ArgumentTypeError(f"expected {count} comma-separated numbers, got {text!r}")
        if len(values) != count:
            raise argparse.ArgumentTypeError(f"expected {count} comma-separated numbers, got {text!r}")
        if not all(math.isfinite(v) for v in values):
            raise argparse.ArgumentTypeError(f"non-finite value in {text!r}")
        return values

    return parse


def _finite_float(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}")
    if not math.isfinite(value):
        raise argparse.ArgumentTypeError(f"non-finite value {text!r}")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="silverreach", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", parser_class=_Parser, required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--format", choices=FORMATS, default=None)
        p.add_argument("--out", default=None, help="write the report to this file")

    p = sub.add_parser("analyze", help="modal pairs, P matrix and volume of X")
    p.add_argument("--pi", type=_floats(2), required=True)
    p.add_argument("--v", type=_floats(2), default=(1.0, 1.0))
    common(p)

    p = sub.add_parser("gramian", help="Gramian, area and mixed-case set of a first-order pair")
    p.add_argument("--alpha", type=_floats(2), required=True)
    p.add_argument("--beta", type=_floats(2), required=True)
    p.add_argument("--target", type=_floats(2), default=None)
    p.add_argument("--rtol", type=_finite_float, default=1e-8)
    common(p)

    p = sub.add_parser("optimize", help="silver-ratio optimum")
    common(p)

    p = sub.add_parser("sweep", help="samples of eps (1 - eps) / (1 + eps) on (0, 1]")
    p.add_argument("--n", type=int, default=200)
    common(p)

    p = sub.add_parser("synthesize", help="minimum-energy input through a target state")
    p.add_argument("--pi", type=_floats(2), required=True)
    p.add_argument("--v", type=_floats(2), default=(1.0, 1.0))
    p.add_argument("--target", type=_floats(4), required=True)
    p.add_argument("--horizon", type=_finite_float, default=None)
    p.add_argument("--dt", type=_finite_float, default=None)
    common(p)

    p = sub.add_parser("pendulum", help="linearized pendulum and inertia recommendation")
    p.add_argument("--inertia", type=_floats(2), required=True)
    p.add_argument("--mass", type=_finite_float, required=True)
    p.add_argument("--arm", type=_finite_float, required=True)
    p.add_argument("--g", type=_finite_float, default=G0)
    common(p)
    return parser


_VALUE_FLAGS = {"--pi", "--v", "--alpha", "--beta", "--target", "--horizon", "--dt",
                "--inertia", "--mass", "--arm", "--g", "--n", "--rtol"}


def _attach_negative_values(argv: Sequence[str]) -> list[str]:
    """Rewrite ``--alpha -1,2`` as ``--alpha=-1,2`` so argparse does not read ``-1,2`` as a flag."""
    out: list[str] = []
    it = iter(argv)
    for token in it:
        if token in _VALUE_FLAGS:
            value = next(it, None)
            if value is None:
                out.append(token)
            elif value.startswith("-") and not value.startswith("--"):
                out.append(f"{token}={value}")
            else:
                out.extend((token, value))
        else:
            out.append(token)
    return out


@dataclass
class RunConfig:
    command: str
    params: dict = field(default_factory=dict)
    output_format: Optional[str] = None
    output_path: Optional[str] = None

    @classmethod
    def from_argv(cls, argv: Sequence[str]) -> "RunConfig":
        ns = vars(build_parser().parse_args(_attach_negative_values(argv)))
        command = ns.pop("command")
        fmt = ns.pop("format")
        out = ns.pop("out")
        return cls(command, ns, fmt, out)

    def resolved_format(self) -> str:
        if self.output_format:
            return self.output_format
        if self.command == "sweep" or (self.output_path or "").endswith(".csv"):
            return "csv"
        return "json"


# -- commands -----------------------------------------------------------------


def _pair_dict(pair: FirstOrderPair) -> dict:
    return {"alpha": list(pair.alphas), "beta": list(pair.betas), "class": classify(pair).value}


def _analyze(params: dict) -> dict:
    sys_ = CoupledSystem(*params["pi"], *params["v"])
    unstable, stable = modal_pairs(sys_)
    report = volume_measures(sys_)
    x = reachable_set(sys_)
    return {
        "system": {"pi": list(sys_.pis), "v": list(sys_.gains)},
        "modal_pairs": {"unstable": _pair_dict(unstable), "stable": _pair_dict(stable)},
        "volume": report.as_dict(),
        "reachable_set": {
            "kind": x.kind.value,
            "frame": x.frame,
            "degenerate": x.degenerate,
            "form": x.form.tolist(),
        },
        "degenerate": sys_.is_degenerate,
    }


def _gramian(params: dict) -> dict:
    pair = FirstOrderPair(*params["alpha"], *params["beta"])
    cls = classify(pair)
    out: dict = {"pair": _pair_dict(pair)}
    if cls is StabilityClass.MIXED:
        s = gm.mixed_set(pair)
        out["set"] = {"kind": s.kind.value, "form": s.form.tolist()}
        out["paper_area"] = s.sqrt_det()
        out["geometric_area"] = s.geometric_measure()
        if params["target"] is not None:
            out["min_energy"] = s.energy(params["target"])
        out["degenerate"] = False
        return out

    closed = gm.gramian_closed_form(pair)
    quad = gm.gramian_quadrature(pair, params["rtol"])
    degenerate = gm.is_degenerate(pair)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", DegenerateSystemWarning)
        area = gm.ellipse_area_paper(pair)
    out["gramian"] = closed.as_matrix().tolist()
    out["gramian_quadrature"] = quad.as_matrix().tolist()
    out["paper_area"] = area
    out["geometric_area"] = math.pi * area
    if params["target"] is not None:
        out["min_energy"] = gm.min_energy_to_reach(pair, params["target"])
    out["degenerate"] = degenerate
    return out


def _optimize(params: dict) -> dict:
    eps, delta = optimal_ratio()
    return {"epsilon_star": eps, "delta_s": delta, "inertia_ratio": optimal_inertia_ratio()}


def _sweep(params: dict) -> dict:
    eps, f = sweep_objective(params["n"])
    return {"n": len(eps), "epsilon": eps.tolist(), "f": f.tolist()}


def _synthesize(params: dict):
    sys_ = CoupledSystem(*params["pi"], *params["v"])
    problem = SynthesisProblem(sys_, params["target"], params["horizon"], params["dt"])
    traj = synthesize_min_energy(problem)
    x = reachable_set(sys_)
    n = (len(traj.times) - 1) // 2
    summary = {
        "system": {"pi": list(sys_.pis), "v": list(sys_.gains)},
        "target": list(problem.target),
        "modal_target": to_modal(build_transform(sys_), problem.target).tolist(),
        "horizon": problem.horizon,
        "dt": traj.dt,
        "samples": len(traj.times),
        "energy": traj.energy,
        "closed_form_energy": x.energy(problem.target),
        "state_at_zero": traj.states[n].tolist(),
        "final_state": traj.states[-1].tolist(),
        "degenerate": sys_.is_degenerate,
    }
    return summary, traj


def _pendulum(params: dict) -> dict:
    pp = PendulumParams(*params["inertia"], params["mass"], params["arm"], params["g"])
    sys_ = linearize(pp)
    rec = recommend(pp)
    out = rec.as_dict()
    out["v"] = list(sys_.gains)
    out["optimal_inertia_ratio"] = optimal_inertia_ratio()
    out["gain_defined"] = rec.gain_factor is not None
    return out


_HANDLERS = {
    "analyze": _analyze,
    "gramian": _gramian,
    "optimize": _optimize,
    "synthesize": _synthesize,
    "sweep": _sweep,
    "pendulum": _pendulum,
}


def _render(config: RunConfig, payload) -> str:
    fmt = config.resolved_format()
    traj = None
    if config.command == "synthesize":
        payload, traj = payload
    if fmt == "csv":
        if config.command == "sweep":
            return _csv(("epsilon", "f"), zip(payload["epsilon"], payload["f"]))
        if traj is not None:
            return traj.to_csv()
        raise UsageError(f"csv output is not available for {config.command!r}", code="unsupported_format")
    report = {"schema": SCHEMA, "command": config.command}
    report.update(payload)
    if fmt == "text":
        return _text(report) + "\n"
    return dumps(report)


def error_report(exc: SilverReachError) -> dict:
    return {"schema": SCHEMA, "error": {"code": exc.code, "message": str(exc)}}


def run(config: RunConfig) -> tuple[int, str]:
    """Execute one command; returns ``(exit_status, text)``.

    On failure ``text`` is the serialized error object.
    """
    try:
        if config.command not in _HANDLERS:
            raise UsageError(f"unknown command {config.command!r}")
        return EXIT_OK, _render(config, _HANDLERS[config.command](config.params))
    except SilverReachError as exc:
        return EXIT_ERROR, dumps(error_report(exc))


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        config = RunConfig.from_argv(argv)
    except SilverReachError as exc:
        sys.stderr.write(dumps(error_report(exc)))
        return EXIT_ERROR
    status, text = run(config)
    if status != EXIT_OK:
        sys.stderr.write(text)
        return status
    if config.output_path:
        with open(config.output_path, "w", newline="") as fh:
            fh.write(text)
    else:
        try:
            sys.stdout.write(text)
            sys.stdout.flush()
        except BrokenPipeError:
            pass
    return status


if __name__ == "__main__":
    sys.exit(main())
