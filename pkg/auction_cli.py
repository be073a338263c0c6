#!/usr/bin/env python3
# auction_cli.py - 在线组合拍卖 (posted pricing with production costs) 命令行
# 用法: ppa <subcommand> --help

import argparse
import json
import sys
from dataclasses import asdict
from typing import Any, Dict, List, Optional

import numpy as np
from pydantic import ValidationError
from rich.console import Console
from rich.panel import Panel
from rich.table import Table

from auctions.adversary_instances.generators import (
    gen_limited_supply_bundle_stages,
    gen_limited_supply_value_chain,
    gen_random_multi_minded,
    gen_staged_single_item,
)
from auctions.auction_engine.mechanism import Instance, run_mechanism, welfare
from auctions.auction_engine.schema import FAMILY_NAMES, RULE_NAMES, SCHEMAS
from auctions.cost_models.constructions import cost_from_spec
from auctions.cost_models.models import CostModel
from auctions.errors import AuctionError, UnsupportedRule
from auctions.experiments.reports import FORMATS, report_emit
from auctions.experiments.sweep import RatioReport, experiment_sweep, initial_demand
from auctions.oracles_offline.oracles import opt_for
from auctions.pricing_rules.alpha import estimate_alpha, guaranteed_alpha
from auctions.pricing_rules.feasibility import check_eq1, check_eq2_range
from auctions.pricing_rules.rules import PricingRule, rule_from_spec
from auctions.primal_dual_ledger.ledger import audit
from auctions.settings import configure_logging
from instance_store import InstanceStore

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_ERROR = 2

console = Console()
store = InstanceStore()


def _json_arg(text: Optional[str]) -> Dict[str, Any]:
    if not text:
        return {}
    payload = json.loads(text)
    if not isinstance(payload, dict):
        raise ValueError("expected a JSON object")
    return payload


def _rule_for(
    args: argparse.Namespace, instance: Optional[Instance] = None, cost: Optional[CostModel] = None
) -> PricingRule:
    spec = {"name": args.rule, "params": _json_arg(getattr(args, "rule_params", None))}
    if instance is not None:
        return rule_from_spec(spec, instance.cost, instance.m, instance.v_min, instance.v_max)
    return rule_from_spec(spec, cost)


def cmd_run(args: argparse.Namespace) -> int:
    instance = store.load_instance(args.instance)
    rule = _rule_for(args, instance)
    init_y = args.init_y if args.init_y is not None else initial_demand(rule, args.epsilon)
    trace = run_mechanism(instance, rule, init_y)
    store.save_trace(args.out, trace)

    sold = sum(1 for s in trace.steps if s.bundle)
    lines = [
        f"[bold]rule[/bold]     {rule.name} {rule.params() or ''}",
        f"[bold]buyers[/bold]   {instance.n} ({sold} served)",
        f"[bold]init_y[/bold]   {init_y:g}",
        f"[bold]welfare[/bold]  {welfare(trace):.9g}",
        f"[bold]final y[/bold]  {', '.join(f'{v:g}' for v in trace.final_y)}",
    ]
    console.print(Panel("\n".join(lines), title=f"Trace → {args.out}", border_style="green"))
    return EXIT_OK


def cmd_opt(args: argparse.Namespace) -> int:
    instance = store.load_instance(args.instance)
    result = opt_for(instance, args.method, workers=args.workers)
    payload = asdict(result)
    if payload["allocation"] is not None:
        payload["allocation"] = [list(items) for items in payload["allocation"]]
    console.print_json(data=payload)
    return EXIT_OK


def generate_instance(family: str, params: Dict[str, Any]) -> Instance:
    if family == "staged-single":
        return gen_staged_single_item(
            cost_from_spec(params["cost"]),
            float(params["v_star"]),
            float(params["delta_v"]),
            float(params.get("delta_y", params["delta_v"])),
        )
    if family == "value-chain":
        return gen_limited_supply_value_chain(
            int(params["k"]), float(params["v_min"]), float(params["v_max"]), float(params.get("delta_v", 1.0))
        )
    if family == "bundle-stages":
        return gen_limited_supply_bundle_stages(
            int(params["m"]), int(params["k"]), int(params["i"]), int(params.get("seed", 0))
        )
    return gen_random_multi_minded(
        m=int(params["m"]),
        n=int(params["n"]),
        max_bundles=int(params.get("max_bundles", 3)),
        cost=cost_from_spec(params["cost"]),
        v_min=float(params["v_min"]),
        v_max=float(params["v_max"]),
        seed=int(params["seed"]),
        delta_y=float(params.get("delta_y", 1.0)),
    )


def cmd_gen(args: argparse.Namespace) -> int:
    instance = generate_instance(args.family, _json_arg(args.params))
    path = store.save_instance(args.out, instance)
    console.print(f"[green]✅ {args.family}: {instance.n} buyers, {instance.m} item(s) → {path}[/green]")
    return EXIT_OK


def cmd_audit(args: argparse.Namespace) -> int:
    trace = store.load_trace(args.trace)
    opt_value: Optional[float] = None
    if not args.skip_opt:
        try:
            opt_value = opt_for(trace.instance, args.opt_method).value
        except AuctionError as exc:
            console.print(f"[yellow]⚠️  OPT unavailable, weak duality not checked: {exc}[/yellow]")

    beta_theorem: Optional[float] = None
    try:
        beta_theorem = guaranteed_alpha(trace.rule, args.epsilon).beta * trace.instance.m
    except UnsupportedRule:
        pass

    report = audit(trace, args.alpha, opt_value, beta_theorem)
    console.print_json(
        data={
            "local_ok": report.local_ok,
            "weak_duality_ok": report.weak_duality_ok if opt_value is not None else None,
            "dual_feasible": report.dual_feasible,
            "beta_actual": report.beta_actual,
            "beta_theorem": report.beta_theorem,
            "first_violation": report.first_violation,
            "opt": report.opt,
        }
    )
    ok = report.local_ok and report.weak_duality_ok and report.dual_feasible
    return EXIT_OK if ok else EXIT_CHECK_FAILED


def cmd_verify_diffeq(args: argparse.Namespace) -> int:
    cost = store.load_cost(args.cost)
    rule = _rule_for(args, cost=cost)

    if rule.integral:
        start = args.y_from if args.y_from is not None else 0
        violations = check_eq2_range(rule, args.alpha, start, int(args.ymax))
        console.print_json(
            data={
                "feasible": not violations,
                "alpha": args.alpha,
                "checked": [start, int(args.ymax)],
                "violations": violations[:50],
                "violation_count": len(violations),
            }
        )
        return EXIT_OK if not violations else EXIT_CHECK_FAILED

    grid = np.arange(0.0, args.ymax + 0.5 * args.step, args.step)
    verdict = check_eq1(rule, args.alpha, args.beta, grid)
    console.print_json(data=asdict(verdict))
    return EXIT_OK if verdict.feasible else EXIT_CHECK_FAILED


def cmd_estimate_alpha(args: argparse.Namespace) -> int:
    cost = store.load_cost(args.cost)
    alpha = estimate_alpha(cost, y_max=args.ymax, p0=args.p0, tol=args.tol)
    console.print_json(data={"alpha": alpha, "cost": cost.to_spec(), "y_max": args.ymax, "tol": args.tol})
    return EXIT_OK


def _summary_table(reports: List[RatioReport]) -> Table:
    table = Table(title="Competitive ratios", border_style="cyan")
    for column in ("params", "rule", "alpha", "beta", "W", "OPT", "OPT/W", "ok"):
        table.add_column(column)
    for r in reports:
        status = "[red]failed[/red]" if r.failed else ("[green]✓[/green]" if r.guarantee_ok else "[red]✗[/red]")
        table.add_row(
            json.dumps(r.params, sort_keys=True),
            r.rule,
            f"{r.alpha:.4g}",
            f"{r.beta:.4g}",
            f"{r.welfare:.6g}",
            f"{r.opt:.6g}",
            f"{r.ratio:.4g}",
            status,
        )
    return table


def cmd_sweep(args: argparse.Namespace) -> int:
    config = store.load_sweep_config(args.config)
    reports = experiment_sweep(config, workers=args.workers)
    path = report_emit(reports, args.out, args.format)
    console.print(_summary_table(reports))
    failures = [r for r in reports if not r.guarantee_ok]
    if failures:
        console.print(f"[red]{len(failures)} of {len(reports)} sweep points failed the guarantee check[/red]")
        for r in failures:
            if r.error:
                console.print(f"[red]  {json.dumps(r.params, sort_keys=True)}: {r.error}[/red]")
    console.print(f"[green]report → {path}[/green]")
    return EXIT_OK if not failures else EXIT_CHECK_FAILED


def cmd_schema(args: argparse.Namespace) -> int:
    console.print_json(data=SCHEMAS[args.kind].json_schema())
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ppa", description="Posted-price online auctions with production costs")
    parser.add_argument("--verbose", "-v", action="store_true", help="debug logging on stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    def rule_options(p: argparse.ArgumentParser) -> None:
        p.add_argument("--rule", required=True, choices=RULE_NAMES)
        p.add_argument("--rule-params", dest="rule_params", default=None, help='JSON, e.g. {"lam": 2}')

    p = sub.add_parser("run", help="run the mechanism on an instance")
    p.add_argument("--instance", required=True)
    rule_options(p)
    p.add_argument("--init-y", dest="init_y", type=float, default=None)
    p.add_argument("--epsilon", type=float, default=0.1)
    p.add_argument("--out", required=True)
    p.set_defaults(handler=cmd_run)

    p = sub.add_parser("opt", help="offline optimum of an instance")
    p.add_argument("--instance", required=True)
    p.add_argument("--method", choices=["auto", "brute-force", "closed-form"], default="auto")
    p.add_argument("--workers", type=int, default=None)
    p.set_defaults(handler=cmd_opt)

    p = sub.add_parser("gen", help="generate an instance family")
    p.add_argument("--family", required=True, choices=FAMILY_NAMES)
    p.add_argument("--params", required=True, help="JSON generator parameters")
    p.add_argument("--out", required=True)
    p.set_defaults(handler=cmd_gen)

    p = sub.add_parser("audit", help="primal/dual audit of a trace")
    p.add_argument("--trace", required=True)
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--epsilon", type=float, default=0.1)
    p.add_argument("--opt-method", dest="opt_method", choices=["auto", "brute-force", "closed-form"], default="auto")
    p.add_argument("--skip-opt", dest="skip_opt", action="store_true")
    p.set_defaults(handler=cmd_audit)

    p = sub.add_parser("verify-diffeq", help="check the pricing inequality for a rule")
    p.add_argument("--cost", required=True)
    rule_options(p)
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--beta", type=float, default=0.0)
    p.add_argument("--ymax", type=float, default=10.0)
    p.add_argument("--step", type=float, default=0.01)
    p.add_argument("--y-from", dest="y_from", type=int, default=None, help="first integer checked (integral rules)")
    p.set_defaults(handler=cmd_verify_diffeq)

    p = sub.add_parser("estimate-alpha", help="numerical estimate of alpha(f)")
    p.add_argument("--cost", required=True)
    p.add_argument("--ymax", type=float, default=100.0)
    p.add_argument("--tol", type=float, default=1e-4)
    p.add_argument("--p0", type=float, default=None)
    p.set_defaults(handler=cmd_estimate_alpha)

    p = sub.add_parser("sweep", help="run an experiment sweep and write a ratio report")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--format", choices=FORMATS, default="csv")
    p.add_argument("--workers", type=int, default=None)
    p.set_defaults(handler=cmd_sweep)

    p = sub.add_parser("schema", help="print the JSON Schema of an input format")
    p.add_argument("kind", choices=sorted(SCHEMAS))
    p.set_defaults(handler=cmd_schema)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    configure_logging("DEBUG" if args.verbose else None)
    try:
        return args.handler(args)
    except (AuctionError, ValidationError, json.JSONDecodeError, OSError, KeyError, ValueError, ArithmeticError) as exc:
        console.print(f"[red]❌ {type(exc).__name__}: {exc}[/red]")
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
