"""Command-line interface: model configs, simulation runs, drift checks,
regime classification and experiment presets.

Configurations are JSON documents with five sections (chemistry,
compartments, inflow, kernel, simulation); unknown keys are rejected with
the offending key named. Results are written as CSV plus JSON; exit status
is 0 for success / no violation, 1 for a violation or failed outcome
evaluation, and 2 for usage or configuration errors.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from pathlib import Path

from .compartments import (
    CompartmentModel,
    InflowDistribution,
    PopulationState,
    make_kernel,
)
from .crn import Reaction, ReactionNetwork
from .lyapunov import (
    TableFunction,
    TransienceWitness,
    WeightedPopulationFunction,
    check_crn_linear_bound,
    check_population_drift,
    classify_regime,
    enumerate_population_states,
    recurrence_region,
    transience_threshold,
)
from .presets import PRESET_NAMES, run_preset
from .simulate import StopCondition, run_trajectory

OUT_DIR_ENV = "FRAGSIM_OUT"


class ConfigError(ValueError):
    pass


def _check_keys(section: dict, allowed, context: str):
    for key in section:
        if key not in allowed:
            raise ConfigError(f"unknown key {key!r} in {context}")


def _require(section: dict, key: str, context: str):
    if key not in section:
        raise ConfigError(f"missing key {key!r} in {context}")
    return section[key]


def _species_index(ref, species, context) -> int:
    if isinstance(ref, int):
        if not 0 <= ref < len(species):
            raise ConfigError(f"species index {ref} out of range in {context}")
        return ref
    if ref in species:
        return species.index(ref)
    raise ConfigError(f"unknown species {ref!r} in {context}")


def model_from_config(doc: dict) -> tuple[CompartmentModel, dict]:
    """Build a model from a configuration document; returns (model, simulation
    defaults). Unknown keys anywhere are configuration errors."""
    if not isinstance(doc, dict):
        raise ConfigError("configuration must be a JSON object")
    _check_keys(doc, {"chemistry", "compartments", "inflow", "kernel", "simulation"}, "config")

    chem = _require(doc, "chemistry", "config")
    _check_keys(chem, {"species", "reactions"}, "chemistry")
    species = [str(s) for s in _require(chem, "species", "chemistry")]
    reactions = []
    for i, r in enumerate(_require(chem, "reactions", "chemistry")):
        _check_keys(r, {"source", "product", "rate_constant"}, f"chemistry.reactions[{i}]")
        reactions.append(
            Reaction(
                tuple(_require(r, "source", f"chemistry.reactions[{i}]")),
                tuple(_require(r, "product", f"chemistry.reactions[{i}]")),
                float(_require(r, "rate_constant", f"chemistry.reactions[{i}]")),
            )
        )
    try:
        network = ReactionNetwork(tuple(species), tuple(reactions))
    except ValueError as e:
        raise ConfigError(f"invalid chemistry: {e}")

    comp = _require(doc, "compartments", "config")
    _check_keys(
        comp,
        {"kappa_I", "kappa_E", "kappa_F", "kappa_C", "fragmentation_species"},
        "compartments",
    )
    frag = _species_index(
        _require(comp, "fragmentation_species", "compartments"),
        species,
        "compartments.fragmentation_species",
    )

    inflow_doc = _require(doc, "inflow", "config")
    kind = _require(inflow_doc, "kind", "inflow")
    if kind == "point_mass":
        _check_keys(inflow_doc, {"kind", "content"}, "inflow")
        inflow = InflowDistribution.point_mass(_require(inflow_doc, "content", "inflow"))
    elif kind == "categorical":
        _check_keys(inflow_doc, {"kind", "entries"}, "inflow")
        entries = [
            (tuple(x), float(p)) for x, p in _require(inflow_doc, "entries", "inflow")
        ]
        inflow = InflowDistribution.categorical(entries)
    elif kind == "poisson_product":
        _check_keys(inflow_doc, {"kind", "rates", "tail_bound"}, "inflow")
        inflow = InflowDistribution.poisson_product(
            _require(inflow_doc, "rates", "inflow"),
            float(inflow_doc.get("tail_bound", 1e-12)),
        )
    else:
        raise ConfigError(f"unknown inflow kind {kind!r}")

    kernel_doc = _require(doc, "kernel", "config")
    kind = _require(kernel_doc, "kind", "kernel")
    if kind in ("binomial_half", "uniform_unordered_pairs"):
        _check_keys(kernel_doc, {"kind"}, "kernel")
        kernel = make_kernel(kind)
    elif kind == "enzyme_substrate":
        _check_keys(
            kernel_doc, {"kind", "p", "enzyme_species", "substrate_species"}, "kernel"
        )
        kernel = make_kernel(
            kind,
            p=float(_require(kernel_doc, "p", "kernel")),
            enzyme_species=_species_index(
                _require(kernel_doc, "enzyme_species", "kernel"), species, "kernel"
            ),
            substrate_species=_species_index(
                _require(kernel_doc, "substrate_species", "kernel"), species, "kernel"
            ),
        )
    elif kind == "table":
        _check_keys(kernel_doc, {"kind", "entries"}, "kernel")
        entries = {
            tuple(x): [(tuple(y), float(p)) for y, p in pmf]
            for x, pmf in _require(kernel_doc, "entries", "kernel")
        }
        kernel = make_kernel(kind, entries=entries)
    else:
        raise ConfigError(f"unknown kernel kind {kind!r}")

    sim = doc.get("simulation", {})
    _check_keys(sim, {"t_max", "event_budget", "grid", "seed", "initial"}, "simulation")

    try:
        model = CompartmentModel(
            chemistry=network,
            kappa_I=float(_require(comp, "kappa_I", "compartments")),
            kappa_E=float(_require(comp, "kappa_E", "compartments")),
            kappa_F=float(_require(comp, "kappa_F", "compartments")),
            kappa_C=float(_require(comp, "kappa_C", "compartments")),
            fragmentation_species=frag,
            inflow=inflow,
            kernel=kernel,
        )
    except ValueError as e:
        raise ConfigError(f"invalid model: {e}")
    return model, dict(sim)


def model_to_config(model: CompartmentModel, simulation: dict | None = None) -> dict:
    """Serialize a model back to the configuration document form."""
    species = list(model.chemistry.species_names)
    inflow = {"kind": model.inflow.kind}
    if model.inflow.kind == "point_mass":
        inflow["content"] = list(model.inflow.params["content"])
    elif model.inflow.kind == "categorical":
        inflow["entries"] = [
            [list(x), p] for x, p in model.inflow.params["entries"]
        ]
    else:
        inflow["rates"] = list(model.inflow.params["rates"])
        inflow["tail_bound"] = model.inflow.params["tail_bound"]
    kernel = {"kind": model.kernel.kind}
    params = model.kernel.params()
    if model.kernel.kind == "enzyme_substrate":
        kernel["p"] = params["p"]
        kernel["enzyme_species"] = species[params["enzyme_species"]]
        kernel["substrate_species"] = species[params["substrate_species"]]
    elif model.kernel.kind == "table":
        kernel["entries"] = [
            [list(x), [[list(y), p] for y, p in pmf]]
            for x, pmf in sorted(params["entries"].items())
        ]
    doc = {
        "chemistry": {
            "species": species,
            "reactions": [
                {
                    "source": list(r.source),
                    "product": list(r.product),
                    "rate_constant": r.rate_constant,
                }
                for r in model.chemistry.reactions
            ],
        },
        "compartments": {
            "kappa_I": model.kappa_I,
            "kappa_E": model.kappa_E,
            "kappa_F": model.kappa_F,
            "kappa_C": model.kappa_C,
            "fragmentation_species": species[model.fragmentation_species],
        },
        "inflow": inflow,
        "kernel": kernel,
    }
    if simulation is not None:
        doc["simulation"] = simulation
    return doc


def load_config(path) -> tuple[CompartmentModel, dict]:
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except OSError as e:
        raise ConfigError(f"cannot read config: {e}")
    except json.JSONDecodeError as e:
        raise ConfigError(f"config is not valid JSON: {e}")
    return model_from_config(doc)


# ---------------------------------------------------------------------------
# output helpers


def _out_dir(arg: str | None) -> Path:
    out = Path(arg or os.environ.get(OUT_DIR_ENV, "fragsim-out"))
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_json(path: Path, payload: dict):
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _cell(v) -> str:
    if isinstance(v, bool):
        return "1" if v else "0"
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _report_dict(report) -> dict:
    return {
        "final_state": sorted(
            [list(k), v] for k, v in report.final_state.items()
        )
        if isinstance(report.final_state, dict)
        else report.final_state,
        "final_time": report.final_time,
        "event_count": report.event_count,
        "stop_reason": report.stop_reason,
        "overflow": report.overflow,
        "suspected_explosion": report.suspected_explosion,
        "seed": report.seed,
        "engine": report.engine,
        "empty_entry_times": list(report.empty_entry_times),
        "first_window_mean": report.first_window_mean,
        "last_window_mean": report.last_window_mean,
        "event_kind_counts": dict(sorted(report.event_kind_counts.items())),
        "grid": [
            {
                "time": g.time,
                "compartments": g.compartments,
                "totals": list(g.totals),
                "s_hat": g.s_hat,
            }
            for g in report.grid
        ],
        "returns_below": report.returns_below,
        "final_mass": report.final_mass(),
        "final_compartments": report.final_compartments(),
    }


# ---------------------------------------------------------------------------
# subcommands


def cmd_simulate(args) -> int:
    model, sim = load_config(args.config)
    seed = args.seed if args.seed is not None else int(sim.get("seed", 0))
    t_max = args.t_max if args.t_max is not None else sim.get("t_max")
    budget = args.event_budget if args.event_budget is not None else sim.get("event_budget")
    if t_max is None and budget is None:
        t_max = 100.0
    grid = args.grid if args.grid is not None else sim.get("grid", ())
    initial = {tuple(x): int(c) for x, c in sim.get("initial", [])}
    stop = StopCondition(
        t_max=float(t_max) if t_max is not None else None,
        event_budget=int(budget) if budget is not None else None,
    )
    report = run_trajectory(
        model, initial, stop, seed, grid=grid, engine="pure", record_events=True
    )
    out = _out_dir(args.out)
    d = model.dimension
    enzyme = model.enzyme_indices()
    header = ["time", "event_kind", "C"] + list(model.chemistry.species_names)
    if enzyme is not None:
        header.append("S_hat")

    n = PopulationState.from_dict(initial, d)
    totals = [0] * d
    for x, c in n.items():
        for j in range(d):
            totals[j] += x[j] * c
    comp = sum(n.values())

    def s_hat():
        e_idx, s_idx = enzyme
        return sum(x[s_idx] * c for x, c in n.items() if x[e_idx] == 0)

    csv_path = out / "trajectory.csv"
    with open(csv_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        row = [_cell(0.0), "init", comp] + totals
        if enzyme is not None:
            row.append(s_hat())
        writer.writerow(row)
        for t, kind, edits in report.event_log:
            for x, dc in edits:
                comp += dc
                new = n.get(x, 0) + dc
                if new:
                    n[x] = new
                else:
                    n.pop(x, None)
                for j in range(d):
                    totals[j] += x[j] * dc
            row = [_cell(t), kind, comp] + totals
            if enzyme is not None:
                row.append(s_hat())
            writer.writerow(row)
    _write_json(out / "summary.json", _report_dict(report))
    print(f"wrote {csv_path} and summary.json ({report.event_count} events)")
    return 0


def cmd_classify(args) -> int:
    model, _ = load_config(args.config)
    result = classify_regime(model)
    out = _out_dir(args.out_dir) if args.out is None else None
    path = Path(args.out) if args.out else out / "classification.json"
    _write_json(path, result.to_dict())
    print(f"{result.kind}" + (f" (condition {result.condition})" if result.condition else ""))
    return 0


def _parse_floats(text: str) -> tuple[float, ...]:
    return tuple(float(v) for v in text.split(","))


def cmd_drift_check(args) -> int:
    model, _ = load_config(args.config)
    out = _out_dir(args.out_dir)
    path = Path(args.out) if args.out else out / "drift_report.json"

    if args.function == "linear_crn":
        w = _parse_floats(args.w) if args.w else (1.0,) * model.dimension
        report = check_crn_linear_bound(
            model.chemistry, w, args.c, args.d, args.x_bound
        )
        _write_json(path, report.to_dict())
        print(f"{report.violation_count} violation(s) on {report.region_checked}")
        return 0 if report.passed else 1

    states = list(
        enumerate_population_states(model.dimension, args.cmax, args.mmax)
    )
    description = f"all states with C <= {args.cmax}, mass <= {args.mmax}"
    region = None
    certificate = {}
    if args.function == "population_weighted":
        if args.alpha == "auto":
            cls = classify_regime(model)
            if cls.kind != "positive_recurrent":
                print(
                    f"classification is {cls.kind}; no recurrence certificate",
                    file=sys.stderr,
                )
                return 1
            alpha = cls.alpha
        else:
            alpha = float(args.alpha)
        V = WeightedPopulationFunction(alpha, (1.0,) * model.dimension)
        certificate = {"alpha": alpha}
        if args.bound == "le-neg1-outside":
            region = recurrence_region(model, alpha)
            description += "; outside the closed-form drift > -1 region"
    elif args.function == "transience_witness":
        if args.alpha == "auto":
            cls = classify_regime(model)
            if cls.kind != "transient":
                print(
                    f"classification is {cls.kind}; no transience certificate",
                    file=sys.stderr,
                )
                return 1
            alpha = cls.alpha
        else:
            alpha = float(args.alpha)
        V = TransienceWitness(alpha)
        k_eps = transience_threshold(model, V, states)
        certificate = {"alpha": alpha, "k_epsilon": k_eps}
        region = lambda n: V.weight(n) < k_eps  # noqa: E731
        description += f"; outside the sublevel set W < {k_eps}"
    elif args.function == "constant":
        V = TableFunction(default=args.value)
        certificate = {"value": args.value}
    else:
        print(f"unknown function {args.function!r}", file=sys.stderr)
        return 2

    bound = {"le-neg1-outside": "le_minus_one_outside", "le-cv-d": "le_cv_plus_d",
             "ge0-outside": "ge_zero_outside"}[args.bound]
    report = check_population_drift(
        model, V, bound=bound, states=states, region=region,
        c=args.c, d=args.d, region_description=description,
        v_increment_bound=args.increment_bound,
    )
    report.certificate.update(certificate)
    _write_json(path, report.to_dict())
    print(f"{report.violation_count} violation(s) on {report.region_checked}")
    return 0 if report.passed else 1


def cmd_experiment(args) -> int:
    if args.preset not in PRESET_NAMES:
        print(
            f"unknown preset {args.preset!r}; choose from {', '.join(PRESET_NAMES)}",
            file=sys.stderr,
        )
        return 2
    result = run_preset(args.preset, args.master_seed, args.count)
    out = _out_dir(args.out)
    rows = result["rows"]
    fields = sorted({k for row in rows for k in row})
    lead = [f for f in ("ensemble", "trajectory", "seed") if f in fields]
    fields = lead + [f for f in fields if f not in lead]
    csv_path = out / f"{args.preset}-trajectories.csv"
    with open(csv_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(fields)
        for row in rows:
            writer.writerow([_cell(row.get(f)) for f in fields])
    summary = {
        "preset": result["preset"],
        "master_seed": result["master_seed"],
        "ensembles": result["ensembles"],
        "outcome": result["outcome"],
    }
    _write_json(out / f"{args.preset}-summary.json", summary)
    passed = result["outcome"]["passed"]
    print(f"{args.preset}: {'pass' if passed else 'FAIL'} -> {csv_path}")
    return 0 if passed else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fragsim",
        description="Stochastic simulation and drift checking for compartment "
        "reaction networks with content-driven fragmentation",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run one trajectory, write CSV + JSON")
    p.add_argument("--config", required=True)
    p.add_argument("--seed", type=int)
    p.add_argument("--t-max", type=float, dest="t_max")
    p.add_argument("--event-budget", type=int, dest="event_budget")
    p.add_argument("--grid", type=_parse_floats)
    p.add_argument("--out")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("classify", help="classify the parameter regime")
    p.add_argument("--config", required=True)
    p.add_argument("--out")
    p.add_argument("--out-dir", dest="out_dir")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("drift-check", help="numerical drift-bound falsification scan")
    p.add_argument("--config", required=True)
    p.add_argument(
        "--function",
        default="population_weighted",
        choices=["population_weighted", "transience_witness", "linear_crn", "constant"],
    )
    p.add_argument("--bound", default="le-neg1-outside",
                   choices=["le-neg1-outside", "le-cv-d", "ge0-outside"])
    p.add_argument("--alpha", default="auto")
    p.add_argument("--w", help="comma-separated weights for linear functions")
    p.add_argument("--c", type=float, default=0.0)
    p.add_argument("--d", type=float, default=0.0)
    p.add_argument("--value", type=float, default=1.0, help="constant function value")
    p.add_argument("--x-bound", type=int, default=200, dest="x_bound")
    p.add_argument("--cmax", type=int, default=8)
    p.add_argument("--mmax", type=int, default=16)
    p.add_argument("--increment-bound", type=float, dest="increment_bound")
    p.add_argument("--out")
    p.add_argument("--out-dir", dest="out_dir")
    p.set_defaults(func=cmd_drift_check)

    p = sub.add_parser("experiment", help="run a named experiment preset")
    p.add_argument("preset")
    p.add_argument("--master-seed", type=int, default=0, dest="master_seed")
    p.add_argument("--count", type=int)
    p.add_argument("--out")
    p.set_defaults(func=cmd_experiment)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as e:
        print(f"configuration error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
