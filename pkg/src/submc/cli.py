"""Command-line interface: ``submc <command> ...``."""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from . import formula as fm
from .ctlstar import check_ctlstar
from .errors import SubmcError
from .games import check_strategic
from .harness.experiment import DEFAULT_GRID, TEMPLATES, ExperimentConfig, run_experiment
from .harness.generator import PRESETS, GeneratorConfig, config_for, random_icgs
from .harness.oracles import (oracle_lasso_ltl, oracle_memoryless_uniform,
                              perfect_information_states)
from .model import read_model
from .pipeline import model_checking_procedure
from .submodel import find_submodels, preprocess

EXIT_ERROR = 3


def read_formulas(path) -> list[tuple[str, str]]:
    """``name = formula`` lines; blank lines and ``#`` comments ignored.
    A line without ``=`` is named by its position."""
    out = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        name, sep, text = line.partition("=")
        if sep and name.strip().isidentifier():
            out.append((name.strip(), text.strip()))
        else:
            out.append((f"f{len(out) + 1}", line))
    return out


def _formulas(args) -> list[tuple[str, str]]:
    if getattr(args, "formulas", None):
        return read_formulas(args.formulas)
    if args.formula is None:
        # a model file may ship its properties next to it
        sibling = Path(args.model).with_name(Path(args.model).stem + "_formulas.txt")
        if sibling.is_file():
            return read_formulas(sibling)
        raise SubmcError(f"give --formula or --formulas (no {sibling.name} found)")
    return [("formula", args.formula)]


def _emit(args, text: str):
    if getattr(args, "out", None):
        Path(args.out).write_text(text + ("" if text.endswith("\n") else "\n"), encoding="utf-8")
    else:
        print(text)


def cmd_check(args) -> int:
    if args.model is None:
        args.model = args.model_file
    if args.model is None:
        raise SubmcError("give a model file")
    m = read_model(args.model)
    reports, lines = {}, []
    code = 0
    for name, text in _formulas(args):
        rep = model_checking_procedure(m, fm.parse(text), parallel=args.parallel,
                                       exhaustive=args.exhaustive,
                                       path_bounds=not args.literal)
        reports[name] = rep.to_dict(timings=not args.no_timings)
        lines.append(f"{name}: {rep.verdict.symbol} ({rep.verdict.value}); "
                     f"candidates={rep.candidates} conclusive={rep.conclusive_candidate} "
                     f"time={rep.timings_ms['total']:.1f}ms")
        code = rep.verdict.exit_code
    doc = reports["formula"] if list(reports) == ["formula"] else reports
    if args.report:
        Path(args.report).write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")
    _emit(args, json.dumps(doc, indent=2) if args.format == "json" else "\n".join(lines))
    return code if len(reports) == 1 else 0


def cmd_enumerate(args) -> int:
    m = read_model(args.model)
    f = fm.parse(args.formula)
    pre = preprocess(m, f)
    pairs = find_submodels(pre.model, pre.formula)
    if args.emit_dir:
        os.makedirs(args.emit_dir, exist_ok=True)
    rows = []
    for p in pairs:
        rows.append({"index": p.index, "core": p.core_names(),
                     "removed": [pre.model.states[s] for s in range(pre.model.n_states)
                                 if s not in p.core]})
        if args.emit_dir:
            for sub in (p.neg, p.pos):
                path = Path(args.emit_dir) / f"candidate{p.index}_{sub.kind}.json"
                path.write_text(sub.model.to_json() + "\n", encoding="utf-8")
    if args.format == "json":
        _emit(args, json.dumps({"candidates": len(pairs), "pairs": rows}, indent=2))
    else:
        text = [f"{len(pairs)} candidate pair(s)"]
        text += [f"[{r['index']}] core={{{', '.join(r['core'])}}} removed={r['removed']}"
                 for r in rows]
        _emit(args, "\n".join(text))
    return 0


def cmd_check_sub(args) -> int:
    m = read_model(args.model)
    sat = check_strategic(m, fm.parse(args.formula))
    names = [m.states[s] for s in sorted(sat)]
    _emit(args, json.dumps(names) if args.format == "json" else " ".join(names))
    return 0


def cmd_check_ctl(args) -> int:
    m = read_model(args.model)
    state = m.initial if args.state is None else m.state_index(args.state)
    holds = check_ctlstar(m, state, fm.parse(args.formula))
    _emit(args, "true" if holds else "false")
    return 0 if holds else 1


def cmd_oracle(args) -> int:
    m = read_model(args.model)
    state = m.initial if args.state is None else m.state_index(args.state)
    if args.kind == "lasso":
        holds = oracle_lasso_ltl(m, state, fm.parse_path(args.formula))
    elif args.kind == "memoryless":
        holds = oracle_memoryless_uniform(m, fm.parse(args.formula), state)
    else:
        holds = state in perfect_information_states(m, fm.parse(args.formula))
    _emit(args, "true" if holds else "false")
    return 0 if holds else 1


def cmd_generate(args) -> int:
    base = PRESETS[args.preset] if args.preset else GeneratorConfig()
    changes = {k: v for k, v in {
        "states": args.states, "agents": args.agents, "actions_per_agent": args.actions,
        "atom_count": args.atoms, "label_density": args.label_density,
        "layered_fraction": args.layered}.items() if v is not None}
    cfg = config_for(base, args.seed, args.pi, **changes)
    _emit(args, random_icgs(cfg).to_json())
    return 0


def cmd_experiment(args) -> int:
    grid = tuple(int(g) if g == int(g) else g for g in args.grid) if args.grid else DEFAULT_GRID
    gen = GeneratorConfig(layered_fraction=args.layered)
    cfg = ExperimentConfig(grid=grid, models_per_bucket=args.models, seed=args.seed,
                           generator=gen, min_states=args.min_states, max_states=args.max_states,
                           templates=tuple(args.templates) if args.templates else tuple(TEMPLATES),
                           envelope=not args.no_envelope)
    rep = run_experiment(cfg, parallel=args.parallel)
    if args.format == "json":
        text = json.dumps(rep.to_dict(timing=not args.no_timings), indent=2)
    elif args.format == "csv":
        text = rep.to_csv()
    else:
        text = rep.to_text()
    _emit(args, text)
    return 1 if rep.violations else 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", default=0, help="random seed (generate, experiment)")
    common.add_argument("--parallel", type=int, default=1, help="worker processes")
    common.add_argument("--out", help="write the main output to this file")
    common.add_argument("--format", choices=("json", "csv", "text"), default="text")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="submc", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("check", parents=[common], help="run the full procedure")
    c.add_argument("model_file", nargs="?", help="model JSON (alternative to --model)")
    c.add_argument("--model")
    c.add_argument("--formula")
    c.add_argument("--formulas", help="file of 'name = formula' lines")
    c.add_argument("--report", help="write the JSON report here")
    c.add_argument("--exhaustive", action="store_true",
                   help="process every candidate and cross-check verdicts")
    c.add_argument("--literal", action="store_true",
                   help="label sub-formula atoms from the sub-models only")
    c.add_argument("--no-timings", action="store_true")
    c.set_defaults(func=cmd_check)

    e = sub.add_parser("enumerate", parents=[common], help="list candidate sub-models")
    e.add_argument("--model", required=True)
    e.add_argument("--formula", required=True)
    e.add_argument("--emit-dir")
    e.set_defaults(func=cmd_enumerate)

    s = sub.add_parser("check-sub", parents=[common],
                       help="satisfaction set of one strategic operator (perfect information)")
    s.add_argument("--model", required=True)
    s.add_argument("--formula", required=True)
    s.set_defaults(func=cmd_check_sub)

    k = sub.add_parser("check-ctl", parents=[common], help="CTL* check at a state")
    k.add_argument("--model", required=True)
    k.add_argument("--formula", required=True)
    k.add_argument("--state")
    k.set_defaults(func=cmd_check_ctl)

    o = sub.add_parser("oracle", parents=[common], help="brute-force reference checks")
    o.add_argument("--model", required=True)
    o.add_argument("--formula", required=True)
    o.add_argument("--state")
    o.add_argument("--kind", choices=("memoryless", "lasso", "perfect-information"),
                   default="memoryless")
    o.set_defaults(func=cmd_oracle)

    g = sub.add_parser("generate", parents=[common], help="random iCGS as JSON")
    g.add_argument("--preset", choices=sorted(PRESETS))
    g.add_argument("--states", type=int)
    g.add_argument("--agents", type=int)
    g.add_argument("--actions", type=int)
    g.add_argument("--atoms", type=int)
    g.add_argument("--label-density", type=float)
    g.add_argument("--layered", type=float)
    g.add_argument("--pi", type=float, help="percentage of imperfect information")
    g.set_defaults(func=cmd_generate)

    x = sub.add_parser("experiment", parents=[common], help="conclusiveness experiment")
    x.add_argument("--grid", type=float, nargs="+", help="pi percentages")
    x.add_argument("--models", type=int, default=500, help="models per bucket")
    x.add_argument("--min-states", type=int, default=4)
    x.add_argument("--max-states", type=int, default=8)
    x.add_argument("--layered", type=float, default=0.3)
    x.add_argument("--templates", nargs="+", choices=sorted(TEMPLATES))
    x.add_argument("--no-envelope", action="store_true")
    x.add_argument("--no-timings", action="store_true")
    x.set_defaults(func=cmd_experiment)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (SubmcError, OSError) as exc:
        print(f"submc: error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
