from __future__ import annotations

import argparse
import asyncio
import json
import logging
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Union

from pydantic import ValidationError

from config.default import DEFAULT_CONFIG_PATH, load_config_file, settings
from gateway.orchestrator import PackingOrchestrator
from gateway.schemas import FailureResponse, RunConfig
from services.common.errors import InvalidInputError, OctetError
from services.common.models import Octuple
from services.geometry.inversive import reference_quadruple
from services.verifier.service import missing_csv

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_INTERNAL = 4

Output = Union[str, bytes]


def build_parser() -> argparse.ArgumentParser:
    """构建命令行解析器：全局选项 + 子命令。"""
    parser = argparse.ArgumentParser(prog="octet", description="Generalized Apollonian sphere packings toolkit")
    parser.add_argument("--config", help="flat key=value config file (defaults to config/octet.conf if present)")
    parser.add_argument("--log-level", dest="log_level", help="DEBUG, INFO, WARNING or ERROR")
    parser.add_argument("--mem-budget-mb", dest="mem_budget_mb", type=int, help="memory budget in MiB")
    parser.add_argument("--search-budget", dest="search_budget", type=int, help="lattice points per representation search")
    sub = parser.add_subparsers(dest="command", required=True)

    def seeded(name: str, help_text: str) -> argparse.ArgumentParser:
        command = sub.add_parser(name, help=help_text)
        group = command.add_mutually_exclusive_group()
        group.add_argument("--octuple", help="curvature vector a,b,c,d,omega")
        group.add_argument("--seed-file", dest="seed_file", help="JSON object with a,b,c,d,omega or a comma line")
        return command

    seeded("root", "reduce an octuple to its root and seed vector")

    for name, formats, default in (
        ("enumerate", ("json", "csv", "bitmap"), "csv"),
        ("verify", ("json", "csv"), "json"),
    ):
        command = seeded(name, f"{name} curvatures up to --bound")
        command.add_argument("--bound", type=int, help="curvature bound N")
        command.add_argument("--threads", type=int)
        command.add_argument("--dedup-depth", dest="dedup_depth", type=int)
        command.add_argument("--executor", choices=("thread", "process"))
        command.add_argument("--out", help="output path, stdout when omitted")
        command.add_argument("--format", choices=formats, default=default)
    sub.choices["verify"].add_argument(
        "--stability", action="store_true", help="re-run at 2N and compare the missing values"
    )

    reps = seeded("reps", "representation counts and densities of m by the seed's form")
    reps.add_argument("--m", type=int, required=True, help="value of the form")

    seeded("form", "print the quaternary form of the seed")

    sweep = seeded("density-sweep", "compare primitive counts with the main term over a range")
    sweep.add_argument("--low", type=int, default=1000)
    sweep.add_argument("--high", type=int, default=5000)
    sweep.add_argument("--samples", type=int, default=200)

    geometry = sub.add_parser("geometry", help="export spheres from four mutually tangent spheres")
    source = geometry.add_mutually_exclusive_group(required=True)
    source.add_argument("--geometry-file", dest="geometry_file", help="JSON list of four sphere/plane objects")
    source.add_argument("--reference", action="store_true", help="planes z=±1 with unit spheres at (−1,∓1,0)")
    geometry.add_argument("--depth", type=int, default=1)
    geometry.add_argument("--geometry-max-depth", dest="geometry_max_depth", type=int)

    picard = seeded("picard-check", "verify the Picard group identities")
    picard.add_argument("--format", choices=("table", "json"), default="table")
    return parser


def read_seed(args: argparse.Namespace) -> Optional[Octuple]:
    if getattr(args, "octuple", None):
        return Octuple.parse(args.octuple)
    seed_file = getattr(args, "seed_file", None)
    if not seed_file:
        return None
    path = Path(seed_file)
    if not path.exists():
        raise InvalidInputError(f"seed file not found: {path}")
    text = path.read_text(encoding="utf-8").strip()
    if text.startswith("{"):
        try:
            return Octuple.from_mapping(json.loads(text))
        except json.JSONDecodeError as exc:
            raise InvalidInputError(f"seed file {path} is not valid JSON") from exc
    return Octuple.parse(text)


def read_geometry(args: argparse.Namespace) -> tuple[List[Dict[str, Any]], Optional[List[Any]]]:
    if args.reference:
        return [sphere.to_geometry() for sphere in reference_quadruple()], None
    path = Path(args.geometry_file)
    if not path.exists():
        raise InvalidInputError(f"geometry file not found: {path}")
    try:
        payload = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise InvalidInputError(f"geometry file {path} is not valid JSON") from exc
    if isinstance(payload, dict):
        return payload.get("spheres", []), payload.get("w")
    if not isinstance(payload, list):
        raise InvalidInputError("geometry file must hold a list of spheres or an object with 'spheres'")
    return payload, None


def build_config(args: argparse.Namespace) -> RunConfig:
    """CLI > 配置文件 > 环境变量 > 默认值。"""
    file_values: Dict[str, Any] = {}
    if args.config:
        file_values = load_config_file(args.config)
    elif DEFAULT_CONFIG_PATH.exists():
        file_values = load_config_file(DEFAULT_CONFIG_PATH)
    cli_values = {
        key: getattr(args, key, None)
        for key in ("mem_budget_mb", "threads", "dedup_depth", "executor", "search_budget", "geometry_max_depth", "log_level")
    }
    effective = settings.merged(file_values, cli_values)
    settings.update(effective.as_dict())

    seed = read_seed(args)
    fmt = getattr(args, "format", "json")
    return RunConfig(
        octuple=seed.as_tuple() if seed else None,
        bound=getattr(args, "bound", None),
        out=getattr(args, "out", None),
        format=fmt if fmt in ("json", "csv", "bitmap") else "json",
        **effective.as_dict(),
    )


def _dumps(payload: Any) -> str:
    return json.dumps(payload, ensure_ascii=False, indent=2) + "\n"


def _require_seed(config: RunConfig) -> None:
    if config.octuple is None:
        raise InvalidInputError("a seed is required: pass --octuple or --seed-file")


async def dispatch(args: argparse.Namespace, config: RunConfig) -> tuple[int, Output]:
    orchestrator = PackingOrchestrator.from_config(config)
    command = args.command

    if command == "geometry":
        spheres, known_w = read_geometry(args)
        export = await orchestrator.handle_geometry(spheres, args.depth, known_w)
        return EXIT_OK, _dumps(export.to_json())

    if command == "picard-check":
        report = await orchestrator.handle_picard(config)
        text = report.to_table() + "\n" if args.format == "table" else _dumps(report.to_json())
        return (EXIT_OK if report.ok else EXIT_INTERNAL), text

    _require_seed(config)
    if command == "root":
        response = await orchestrator.handle_root(config)
        return EXIT_OK, _dumps(response.model_dump())
    if command == "enumerate":
        result = await orchestrator.handle_enumerate(config)
        if config.format == "bitmap":
            return EXIT_OK, result.table.to_bitmap()
        if config.format == "csv":
            return EXIT_OK, result.table.to_csv()
        return EXIT_OK, _dumps(orchestrator.enumerate_payload(result).model_dump())
    if command == "verify":
        if args.stability:
            stability = await orchestrator.handle_stability(config)
            return EXIT_OK, _dumps(stability.to_json())
        report = await orchestrator.handle_verify(config)
        return EXIT_OK, missing_csv(report) if config.format == "csv" else _dumps(report.to_json())
    if command == "reps":
        density = await orchestrator.handle_reps(config, args.m)
        return EXIT_OK, _dumps(density.to_json())
    if command == "form":
        form = await orchestrator.handle_form(config)
        return EXIT_OK, _dumps(form.to_json())
    if command == "density-sweep":
        sweep = await orchestrator.handle_density_sweep(config, args.low, args.high, args.samples)
        return EXIT_OK, _dumps(sweep.to_json())
    raise InvalidInputError(f"unknown command {command!r}")


def write_output(output: Output, out: Optional[str]) -> None:
    if out:
        path = Path(out)
        if isinstance(output, bytes):
            path.write_bytes(output)
        else:
            path.write_text(output, encoding="utf-8")
        logger.info("Wrote output", extra={"path": str(path), "bytes": len(output)})
        return
    if isinstance(output, bytes):
        sys.stdout.buffer.write(output)
        sys.stdout.buffer.flush()
    else:
        sys.stdout.write(output)


def _failure(detail: str, reason: str, context: Optional[Dict[str, Any]] = None) -> str:
    return _dumps(FailureResponse(detail=detail, reason=reason, context=context or {}).model_dump())


def run(argv: Optional[Sequence[str]] = None) -> int:
    """执行一次命令并返回退出码：0 成功，2 输入非法，3 超出预算，4 内部不变量失败。"""
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=(args.log_level or settings.log_level).upper(),
        format="%(asctime)s %(levelname)s [%(name)s] %(message)s",
        stream=sys.stderr,
    )
    try:
        config = build_config(args)
        logging.getLogger().setLevel(config.log_level)
        code, output = asyncio.run(dispatch(args, config))
        write_output(output, config.out)
        return code
    except OctetError as exc:
        logger.error("Command %s failed: %s", args.command, exc, extra={"detail": exc.detail})
        sys.stdout.write(_dumps(exc.to_payload()))
        return exc.exit_code
    except ValidationError as exc:
        logger.error("Invalid configuration: %s", exc)
        sys.stdout.write(_failure("invalid_input", "configuration rejected", {"errors": [{"loc": list(err["loc"]), "msg": err["msg"]} for err in exc.errors()]}))
        return EXIT_INVALID
    except Exception as exc:  # noqa: BLE001
        logger.exception("Unexpected failure in %s", args.command)
        sys.stdout.write(_failure("internal_error", str(exc)))
        return EXIT_INTERNAL


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
