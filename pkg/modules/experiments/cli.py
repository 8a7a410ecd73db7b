import argparse
import json
import logging
from pathlib import Path

from pydantic import ValidationError

from core.config import load_config
from core.errors import EXIT_NUMERICAL, EXIT_OK, EXIT_VALIDATION, ShapeOptError
from core.logging import setup_logging

from .drivers import check_gradient, curvature_study, mg_bench, optimize
from .schemas import ScenarioConfig

logger = logging.getLogger(__name__)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="shapeopt")
    sub = parser.add_subparsers(dest="cmd", required=True)

    for name, text in (
        ("check-gradient", "Compare assembled shape derivatives with finite differences"),
        ("optimize", "Run the shape optimization loop"),
        ("curvature-study", "Interface curvature across refinement levels"),
        ("mg-bench", "Multigrid-preconditioned CG iteration counts across levels"),
    ):
        p = sub.add_parser(name, help=text)
        p.add_argument("--config", default="config/base.yaml")
        p.add_argument("--output", help="output directory (overrides output.dir)")
        p.add_argument("--verbose", action="store_true")
    return parser


def _write_table(table, out: Path, name: str) -> Path:
    out.mkdir(parents=True, exist_ok=True)
    path = out / name
    table.to_csv(path, index=False, float_format="%.17g")
    return path


def run_command(args: argparse.Namespace) -> int:
    cfg = ScenarioConfig.model_validate(load_config(args.config))
    out = Path(args.output or cfg.output.dir)

    if args.cmd == "check-gradient":
        result = check_gradient(cfg)
        if len(result.table):
            _write_table(result.table, out, "gradient_check.csv")
            summary = result.table.groupby("component")["order"].min().to_dict()
        else:
            summary = {}
        print(json.dumps({"passed": result.passed, "min_order": summary}))
        return EXIT_OK if result.passed else EXIT_VALIDATION

    if args.cmd == "optimize":
        _, state = optimize(cfg, out)
        last = state.history[-1] if state.history else {}
        print(json.dumps({
            "iterations": state.iteration,
            "converged": state.converged,
            "halted": state.halted,
            "J": last.get("J"),
            "gs_norm": last.get("gs_norm"),
            "output": str(out),
        }))
        return EXIT_OK

    if args.cmd == "curvature-study":
        table, slope = curvature_study(cfg)
        _write_table(table, out, "curvature_study.csv")
        print(json.dumps({"levels": len(table), "slope": slope}))
        return EXIT_OK

    if args.cmd == "mg-bench":
        table = mg_bench(cfg)
        _write_table(table, out, "mg_bench.csv")
        its = table["iterations"]
        print(json.dumps({"problem": cfg.mg_bench.problem, "iterations": its.tolist(),
                          "spread": int(its.max() - its.min())}))
        return EXIT_OK
    return EXIT_VALIDATION


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    setup_logging("config/logging.yaml", verbose=args.verbose)
    try:
        return run_command(args)
    except (ValidationError, ValueError, FileNotFoundError) as exc:
        logger.error("invalid configuration: %s", exc)
        return EXIT_VALIDATION
    except ShapeOptError as exc:
        logger.error("%s: %s", type(exc).__name__, exc)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    raise SystemExit(main())
