"""Command-line front end.

Exit codes: 0 success, 1 failed validation, 2 bad input, 3 assumption
violation, 4 solver failure.
"""
from __future__ import annotations

import csv
import datetime as _dt
import io
import json
import re
import sys
import warnings
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import click
import numpy as np

from . import __version__, config
from .comparison import (BUILTIN_CONE_PARAMETER, BUILTIN_CONES, QUANTITIES, ConeSpec, check_comparison,
                         evaluate_quantity, increasing_set_check, monotone_sweep)
from .errors import AssumptionViolation, ModelError, PerturbMCError
from .generator import assemble_generator, block_decompose, classify_states, verify_assumptions
from .mfpt import mfpt_exact, mfpt_leading
from .oracle import SimConfig, slope_fit, ssa_run, total_variation
from .pole_order import pole_orders
from .scrn_model import (DEFAULT_RATES, MODEL_KINDS, ChromatinParams, build_chromatin_model,
                         chromatin_network, enumerate_states, format_model, load_model)
from .stationary_expansion import higher_order, stationary_exact, zeroth_via_transient

SCHEMA_VERSION = 1
EXIT_VALIDATION_FAILED = 1


# parsing helpers ---------------------------------------------------------------

def _split_top_level(text: str, sep: str = ",") -> list[str]:
    """Split on ``sep`` outside parentheses, so state tuples survive."""
    parts, depth, current = [], 0, []
    for ch in text:
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        if ch == sep and depth == 0:
            parts.append("".join(current).strip())
            current = []
        else:
            current.append(ch)
    parts.append("".join(current).strip())
    return [p for p in parts if p]


def _float_list(text: str | None, name: str) -> list[float]:
    if text is None:
        return []
    try:
        values = [float(v) for v in _split_top_level(text)]
    except ValueError:
        raise ModelError(f"{name}: cannot parse {text!r} as a list of numbers") from None
    if not values:
        raise ModelError(f"{name}: empty list")
    return values


def _pairs(text: str | None) -> list[tuple[str, str]]:
    if not text:
        return []
    pairs = []
    for item in _split_top_level(text):
        source, sep, target = item.partition(":")
        if not sep or not source.strip() or not target.strip():
            raise ModelError(f"--mfpt entries must look like source:target, got {item!r}")
        pairs.append((source.strip(), target.strip()))
    return pairs


def _cone(text: str | None, kind: str | None) -> ConeSpec | None:
    if not text:
        return None
    if text == "builtin":
        if kind not in BUILTIN_CONES:
            raise ModelError("no built-in cone for this model")
        return BUILTIN_CONES[kind]
    try:
        rows = [[int(v) for v in row.replace(",", " ").split()] for row in text.split(";")]
    except ValueError:
        raise ModelError(f"--cone: cannot parse {text!r}; use 'builtin' or rows like '1 0;0 -1'") from None
    return ConeSpec(tuple(tuple(r) for r in rows))


def _meta_line(ctx: click.Context) -> str:
    stamp = _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")
    return f"perturbmc {__version__} {ctx.info_name} {stamp}"


class _Output:
    """Writes report files with an optional metadata header."""

    def __init__(self, out: str | None, meta: str | None):
        self.dir = Path(out) if out else None
        self.meta = meta
        if self.dir is not None:
            self.dir.mkdir(parents=True, exist_ok=True)

    def csv(self, name: str, header: list[str], rows) -> None:
        if self.dir is None:
            return
        buffer = io.StringIO()
        if self.meta:
            buffer.write(f"# {self.meta}\n")
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([f"{v:.17g}" if isinstance(v, (float, np.floating)) else v for v in row])
        (self.dir / name).write_text(buffer.getvalue())

    def json(self, name: str, payload: dict) -> None:
        text = json.dumps(_jsonable(payload), indent=2, sort_keys=False) + "\n"
        if self.dir is None:
            click.echo(text, nl=False)
        else:
            (self.dir / name).write_text(text)


def _jsonable(value):
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return _jsonable(value.tolist())
    if isinstance(value, (np.floating, float)):
        return float(value)
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.bool_,)):
        return bool(value)
    return value


# model options -------------------------------------------------------------------

def model_options(func):
    options = [
        click.option("--model", "model", default=None,
                     help=f"Built-in circuit ({', '.join(MODEL_KINDS)}) or path to a model document."),
        click.option("--spec", "spec_path", default=None, type=click.Path(dir_okay=False),
                     help="Path to a model document."),
        click.option("--dtot", type=int, default=None, help="Number of nucleosomes (built-in models)."),
        click.option("--mu", type=float, default=None),
        click.option("--mu-prime", "mu_prime", type=float, default=None),
        click.option("--b", "b", type=float, default=None),
        click.option("--beta", type=float, default=None),
        click.option("--param", "params", multiple=True, metavar="NAME=VALUE",
                     help="Override a rate constant or model parameter; repeatable."),
        click.option("--approximate-pairs", is_flag=True,
                     help="Use x^2 instead of x(x-1)/2 for pair catalysis (3D/4D)."),
    ]
    for option in reversed(options):
        func = option(func)
    return func


class ModelChoice:
    """Resolved model: either built-in parameters or a parsed document."""

    def __init__(self, kind=None, params=None, network=None, overrides=None):
        self.kind = kind
        self.params = params
        self.network = network
        self.overrides = overrides or {}

    def build(self, **changes):
        if self.params is not None:
            return build_chromatin_model(self.params.replace(**changes) if changes else self.params).generator
        network = self.network.with_parameters(**changes) if changes else self.network
        return assemble_generator(network, enumerate_states(network))

    def network_document(self) -> str:
        network = chromatin_network(self.params) if self.params is not None else self.network
        return format_model(network)

    def describe(self) -> dict:
        if self.params is not None:
            return {"kind": self.kind, "dtot": self.params.dtot, "mu": self.params.mu,
                    "mu_prime": self.params.mu_prime, "b": self.params.b, "beta": self.params.beta,
                    "rates": {k: self.params.rate(k) for k in sorted(DEFAULT_RATES)},
                    "approximate_pairs": self.params.approximate_pairs}
        return {"kind": "document", "name": self.network.name, "species": list(self.network.species),
                "parameters": dict(self.network.parameters)}


def _parse_overrides(items) -> dict[str, float]:
    out = {}
    for item in items:
        name, sep, value = item.partition("=")
        if not sep:
            raise ModelError(f"--param expects NAME=VALUE, got {item!r}")
        try:
            out[name.strip()] = float(value)
        except ValueError:
            raise ModelError(f"--param {name}: {value!r} is not a number") from None
    return out


def resolve_model(model, spec_path, dtot, mu, mu_prime, b, beta, params, approximate_pairs) -> ModelChoice:
    overrides = _parse_overrides(params)
    if spec_path is None and model is not None and model.lower() not in MODEL_KINDS:
        spec_path = model
    if spec_path is not None:
        network = load_model(spec_path)
        if overrides:
            network = network.with_parameters(**overrides)
        return ModelChoice(network=network)
    if model is None:
        raise ModelError("give --model or --spec")
    kind = model.lower()
    fields = {"mu": mu, "mu_prime": mu_prime, "b": b, "beta": beta}
    fields = {k: v for k, v in fields.items() if v is not None}
    for key in list(overrides):
        if key in ("mu", "mu_prime", "b", "beta"):
            fields[key] = overrides.pop(key)
    unknown = set(overrides) - set(DEFAULT_RATES)
    if unknown:
        raise ModelError(f"unknown parameters {sorted(unknown)}")
    params_ = ChromatinParams(kind, dtot if dtot is not None else 2, rates=overrides,
                              approximate_pairs=approximate_pairs, **fields)
    return ModelChoice(kind=kind, params=params_)


def _run(func):
    """Translate package errors into exit codes."""
    try:
        return func()
    except PerturbMCError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(exc.exit_code)


@click.group()
@click.version_option(__version__)
def main():
    """Analyse singularly perturbed Markov chains built from reaction networks."""


# analyze -------------------------------------------------------------------------

@main.command()
@model_options
@click.option("--eps", "eps_text", default="0.1,0.01,0.001", show_default=True, help="Comma separated eps values.")
@click.option("--order", type=int, default=1, show_default=True, help="Highest expansion order.")
@click.option("--mfpt", "mfpt_text", default=None, help="Pairs source:target, e.g. a:r,r:a.")
@click.option("--target-set", "target_text", default=None, help="States for pole orders, separated by ';'.")
@click.option("--cone", "cone_text", default=None, help="'builtin' or matrix rows like '1 0;0 -1'.")
@click.option("--ssa", type=int, default=0, help="Events per eps value for a simulation cross-check.")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", default=None, type=click.Path(file_okay=False), help="Output directory.")
@click.option("--best-effort", is_flag=True, help="Continue past assumption violations.")
@click.option("--no-meta", is_flag=True, help="Omit the timestamped header line in CSV files.")
@click.pass_context
def analyze(ctx, eps_text, order, mfpt_text, target_text, cone_text, ssa, seed, out, best_effort,
            no_meta, **model_kw):
    """Classify states, expand the stationary distribution and compute passage-time poles."""
    _run(lambda: _analyze(ctx, eps_text, order, mfpt_text, target_text, cone_text, ssa, seed, out,
                          best_effort, no_meta, model_kw))


def _analyze(ctx, eps_text, order, mfpt_text, target_text, cone_text, ssa, seed, out, best_effort,
             no_meta, model_kw):
    choice = resolve_model(**model_kw)
    eps_values = _float_list(eps_text, "--eps")
    pairs = _pairs(mfpt_text)
    cone = _cone(cone_text, choice.kind)
    if order < 0:
        raise ModelError("--order must be nonnegative")
    output = _Output(out, None if no_meta else _meta_line(ctx))
    gen = choice.build()
    labels = gen.space.labels
    report = {"schema_version": SCHEMA_VERSION, "command": "analyze", "model": choice.describe(),
              "n_states": gen.n, "eps": eps_values, "errors": []}

    assumptions = verify_assumptions(gen)
    report["assumptions"] = assumptions.to_dict()
    required = assumptions.holds(1) and assumptions.holds(2) and assumptions.irreducible.holds
    if not required and not best_effort:
        output.json("report.json", report)
        failed = [k for k in (1, 2) if not assumptions.holds(k)]
        raise AssumptionViolation(failed[0] if failed else 5,
                                  "required assumptions fail; rerun with --best-effort to continue")

    def guarded(section, func):
        try:
            return func()
        except PerturbMCError as exc:
            if not best_effort:
                raise
            report["errors"].append({"section": section, "error": str(exc)})
            return None

    def expansion_section():
        cls = classify_states(gen)
        blocks = block_decompose(gen, cls)
        expansion = higher_order(gen, order, blocks)
        report["absorbing"] = [labels[i] for i in cls.absorbing]
        report["reduced_generator"] = expansion.reduced.matrix
        report["alpha"] = expansion.reduced.alpha
        report["deviation_matrix"] = expansion.reduced.deviation
        output.csv("coefficients.csv", ["state", "k", "value"],
                   ([labels[i], k, float(v)] for k, row in enumerate(expansion.coefficients)
                    for i, v in enumerate(row)))
        if assumptions.holds(3):
            alpha_t, _ = zeroth_via_transient(gen, blocks)
            report["alpha_route_difference"] = float(np.abs(alpha_t - expansion.reduced.alpha).max())
        return blocks, expansion

    result = guarded("expansion", expansion_section)
    blocks = result[0] if result else None

    stationary_rows, histogram = [], {}
    for eps in eps_values:
        pi = guarded(f"stationary eps={eps}", lambda: stationary_exact(gen, eps))
        if pi is None:
            continue
        histogram[eps] = pi
        row = {"eps": eps}
        if result:
            row["truncation_error"] = float(np.abs(pi - result[1].evaluate(eps)).max())
        stationary_rows.append(row)
    report["stationary"] = stationary_rows
    sim_rows = {}
    if ssa > 0:
        for k, eps in enumerate(eps_values):
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                sim = ssa_run(gen, SimConfig(eps, n_events=ssa, seed=[seed, k]))
            sim_rows[eps] = sim.occupancy
            if eps in histogram:
                report.setdefault("ssa_total_variation", {})[str(eps)] = total_variation(
                    sim.occupancy, histogram[eps])
    output.csv("stationary.csv", ["state", "eps", "probability"] + (["ssa_probability"] if ssa else []),
               ([labels[i], eps, float(p)] + ([float(sim_rows[eps][i])] if ssa else [])
                for eps, pi in histogram.items() for i, p in enumerate(pi)))

    mfpt_report, mfpt_rows = [], []
    for source_token, target_token in pairs:
        def one_pair():
            source, target = gen.resolve(source_token), gen.resolve(target_token)
            entry = {"source": labels[source], "target": labels[target]}
            if source == target:
                entry.update(pole_order=0)
                return entry
            entry["pole_order"] = pole_orders(gen, [target])[source]
            if blocks is not None and source in blocks.absorbing and target in blocks.absorbing:
                with warnings.catch_warnings(record=True) as caught:
                    warnings.simplefilter("always")
                    lead = mfpt_leading(gen, source, target, blocks, result[1].reduced)
                entry.update(leading_order=lead.order, leading_coefficient=lead.coefficient,
                             zero_coefficient=lead.zero_coefficient,
                             warnings=[str(w.message) for w in caught])
            values = []
            for eps in eps_values:
                h = float(mfpt_exact(gen, eps, [target])[source])
                values.append(h)
                mfpt_rows.append([labels[source], labels[target], eps, h])
            entry["exact"] = dict(zip([str(e) for e in eps_values], values))
            if len(eps_values) >= 3:
                slope, r2 = slope_fit(values, eps_values)
                entry.update(slope=slope, r_squared=r2)
            return entry

        entry = guarded(f"mfpt {source_token}:{target_token}", one_pair)
        if entry is not None:
            mfpt_report.append(entry)
    report["mfpt"] = mfpt_report
    output.csv("mfpt.csv", ["source", "target", "eps", "h"], mfpt_rows)

    if target_text:
        targets = [gen.resolve(t) for t in _split_top_level(target_text, ";")]
        poles = guarded("target-set", lambda: pole_orders(gen, targets))
        if poles is not None:
            report["target_set"] = {"target": [labels[t] for t in targets],
                                    "pole_orders": {labels[k]: v for k, v in poles.orders.items()},
                                    "trace": poles.trace}
            output.csv("pole_orders.csv", ["state", "pole_order"],
                       ([labels[k], v] for k, v in poles.orders.items()))
            if cone is not None:
                report["target_set"]["monotonicity"] = increasing_set_check(
                    cone, gen.space.states, targets).kind
    output.json("report.json", report)
    if out:
        click.echo(f"wrote report to {out}")


# sweep ----------------------------------------------------------------------------

@main.command()
@model_options
@click.option("--sweep-param", required=True, help="Parameter to vary (mu, mu_prime, b, beta or a rate name).")
@click.option("--sweep-values", required=True, help="Comma separated values.")
@click.option("--eps", "eps_text", default="0.1,0.01", show_default=True)
@click.option("--quantity", "quantities", default=",".join(QUANTITIES), show_default=True,
              help="Quantities per grid point.")
@click.option("--cone", "cone_text", default=None, help="Check comparison conditions between neighbours.")
@click.option("--ssa", type=int, default=0, help="Events per grid point for simulated occupancy.")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--jobs", type=int, default=1, show_default=True, help="Worker threads.")
@click.option("--out", default=None, type=click.Path(file_okay=False))
@click.option("--no-meta", is_flag=True)
@click.pass_context
def sweep(ctx, sweep_param, sweep_values, eps_text, quantities, cone_text, ssa, seed, jobs, out, no_meta,
          **model_kw):
    """Evaluate stationary and passage-time quantities over a parameter grid."""
    _run(lambda: _sweep(ctx, sweep_param, sweep_values, eps_text, quantities, cone_text, ssa, seed, jobs,
                        out, no_meta, model_kw))


def _sweep(ctx, param, values_text, eps_text, quantities_text, cone_text, ssa, seed, jobs, out, no_meta,
           model_kw):
    choice = resolve_model(**model_kw)
    values = sorted(_float_list(values_text, "--sweep-values"))
    eps_values = _float_list(eps_text, "--eps")
    quantities = _split_top_level(quantities_text)
    for q in quantities:
        if q not in QUANTITIES:
            raise ModelError(f"unknown quantity {q!r}; choose from {QUANTITIES}")
    cone = _cone(cone_text, choice.kind)
    if choice.params is not None and param == "dtot":
        raise ModelError("dtot changes the state space and cannot be swept")
    output = _Output(out, None if no_meta else _meta_line(ctx))
    generators = {v: choice.build(**{param: v}) for v in values}
    landmarks = next(iter(generators.values())).space.landmarks
    wanted = [q for q in quantities if {"a", "r"} <= set(landmarks)]

    def grid_point(job):
        index, (value, eps) = job
        gen = generators[value]
        pi = stationary_exact(gen, eps)
        row = [param, value, eps] + [evaluate_quantity(gen, eps, q) for q in wanted]
        occupancy = None
        if ssa > 0:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                occupancy = ssa_run(gen, SimConfig(eps, n_events=ssa, seed=[seed, index])).occupancy
        return row, pi, occupancy

    jobs_list = list(enumerate((v, e) for v in values for e in eps_values))
    with ThreadPoolExecutor(max_workers=max(1, jobs)) as pool:
        results = list(pool.map(grid_point, jobs_list))
    output.csv("sweep.csv", ["parameter", "value", "eps"] + wanted, (r[0] for r in results))
    hist_header = ["parameter", "value", "eps", "state", "probability"] + (["ssa_probability"] if ssa else [])
    hist_rows = []
    for (_, (value, eps)), (_, pi, occ) in zip(jobs_list, results):
        labels = generators[value].space.labels
        for i, p in enumerate(pi):
            hist_rows.append([param, value, eps, labels[i], float(p)] + ([float(occ[i])] if ssa else []))
    output.csv("histogram.csv", hist_header, hist_rows)

    summary = {"schema_version": SCHEMA_VERSION, "command": "sweep", "model": choice.describe(),
               "parameter": param, "values": values, "eps": eps_values, "trends": []}
    for eps in eps_values:
        for q in wanted:
            table = monotone_sweep(lambda v: generators[v], param, values, eps, q)
            summary["trends"].append({"eps": eps, "quantity": q, "verdict": table.verdict,
                                      "results": table.results})
    if cone is not None:
        checks = []
        for low, high in zip(values[:-1], values[1:]):
            forward = check_comparison(generators[high], generators[low], cone)
            backward = check_comparison(generators[low], generators[high], cone)
            checks.append({"lower_value": low, "higher_value": high,
                           "higher_is_reference_holds": forward.holds,
                           "lower_is_reference_holds": backward.holds,
                           "violations": [str(v) for v in (forward.violations or backward.violations)[:10]]})
        summary["comparison"] = checks
    output.json("sweep.json", summary)
    if out:
        click.echo(f"wrote {len(results)} grid points to {out}")


# validate -------------------------------------------------------------------------

@main.command()
@model_options
@click.option("--ssa", type=int, default=0, help="Events for a simulation cross-check at eps=0.1.")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", default=None, type=click.Path(file_okay=False))
def validate(ssa, seed, out, **model_kw):
    """Run the invariant battery on a built-in model and print a scoreboard."""
    def run():
        from .validation import run_validation

        choice = resolve_model(**model_kw)
        if choice.params is None:
            raise ModelError("validate needs a built-in model")
        results = run_validation(choice.params, ssa_events=ssa, seed=seed)
        width = max(len(r.name) for r in results)
        for r in results:
            click.echo(f"{'PASS' if r.passed else 'FAIL'}  {r.name:<{width}}  {r.detail}")
        failed = [r for r in results if not r.passed]
        click.echo(f"{len(results) - len(failed)}/{len(results)} checks passed")
        if out:
            _Output(out, None).json("validate.json", {
                "schema_version": SCHEMA_VERSION, "command": "validate", "model": choice.describe(),
                "checks": [{"name": r.name, "passed": r.passed, "detail": r.detail} for r in results]})
        if failed:
            sys.exit(EXIT_VALIDATION_FAILED)

    _run(run)


# export ---------------------------------------------------------------------------

@main.command()
@model_options
@click.option("--out", default=None, type=click.Path(dir_okay=False), help="File to write; stdout if omitted.")
def export(out, **model_kw):
    """Write the model as a re-parsable model document."""
    def run():
        text = resolve_model(**model_kw).network_document()
        if out:
            Path(out).write_text(text)
        else:
            click.echo(text, nl=False)

    _run(run)


if __name__ == "__main__":
    main()
