"""
命令行入口
把各项实验绑定为可复现的子命令，输出 JSON 报告与 CSV 轨迹

退出码：0 成功，1 配置错误，2 超出容差，3 轨迹 blow-up
"""
import argparse
import logging
import sys
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional

import yaml
from pydantic import (
    BaseModel,
    ConfigDict,
    Field,
    NonNegativeInt,
    PositiveFloat,
    PositiveInt,
    ValidationError,
    field_validator,
    model_validator,
)

from .config import Config
from .exceptions import NDARiccatiError
from .services.algebra import AlgebraTag
from .services.experiment_service import STATUS_BLOWUP, STATUS_OK, STATUS_TOLERANCE, ExperimentService
from .utils.expressions import load_spec_file
from .utils.report_utils import write_json, write_text

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_TOLERANCE = 2
EXIT_BLOWUP = 3

_STATUS_EXIT = {STATUS_OK: EXIT_OK, STATUS_TOLERANCE: EXIT_TOLERANCE, STATUS_BLOWUP: EXIT_BLOWUP}

COMMANDS = (
    "laws", "closure", "integrate", "superposition", "conformal",
    "lift", "symplectic", "schrodinger", "table",
)

_NEEDS_SPEC = {"integrate", "superposition", "conformal", "lift", "schrodinger"}


class RunConfig(BaseModel):
    """一次运行的完整配置；命令行参数覆盖 --config 文件中的同名项"""

    model_config = ConfigDict(extra="forbid")

    command: Literal[COMMANDS]  # type: ignore[valid-type]
    algebra: Optional[str] = None
    spec: Optional[Path] = None
    t0: float = 0.0
    t1: float = 1.0
    step: PositiveFloat = Field(default_factory=lambda: Config.DEFAULT_STEP)
    seed: NonNegativeInt = Field(default_factory=lambda: Config.DEFAULT_SEED)
    degree_cap: PositiveInt = Field(default_factory=lambda: Config.DEGREE_CAP)
    round_cap: PositiveInt = Field(default_factory=lambda: Config.ROUND_CAP)
    samples: PositiveInt = 200
    exact: Optional[bool] = None
    generators: str = "riccati"
    compare: bool = False
    check: Optional[PositiveInt] = None
    table: Optional[Path] = None
    initials: List[float] = Field(default_factory=lambda: [0.0, 0.5, 2.0])
    k: float = 3.0
    convergence: bool = False
    minimal_algebra: bool = False
    csv: Optional[Path] = None
    out: Optional[Path] = None

    @field_validator("algebra")
    @classmethod
    def _known_algebra(cls, value: Optional[str]) -> Optional[str]:
        if value is None:
            return None
        return AlgebraTag.parse(value).value

    @model_validator(mode="after")
    def _check_ranges(self) -> "RunConfig":
        if self.t1 <= self.t0:
            raise ValueError("t1 must be greater than t0")
        if self.command in _NEEDS_SPEC and self.spec is None:
            raise ValueError(f"'{self.command}' needs --spec")
        if self.command in ("laws", "symplectic") and self.algebra is None:
            raise ValueError(f"'{self.command}' needs --algebra")
        if len(self.initials) != 3:
            raise ValueError("initials needs exactly three values")
        return self


def _parse_args(argv: Optional[List[str]] = None) -> argparse.Namespace:
    # 未给出的选项不出现在 Namespace 中，缺省值统一由 RunConfig 提供
    common = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    common.add_argument("--config", dest="config_file", type=Path, help="YAML/JSON run config")
    common.add_argument("--algebra", help="R, C, H or O")
    common.add_argument("--spec", type=Path)
    common.add_argument("--t0", type=float)
    common.add_argument("--t1", type=float)
    common.add_argument("--step", type=float)
    common.add_argument("--seed", type=int)
    common.add_argument("--degree-cap", dest="degree_cap", type=int)
    common.add_argument("--round-cap", dest="round_cap", type=int)
    common.add_argument("--samples", type=int)
    mode = common.add_mutually_exclusive_group()
    mode.add_argument("--exact", dest="exact", action="store_const", const=True)
    mode.add_argument("--float", dest="exact", action="store_const", const=False)
    common.add_argument("--csv", type=Path)
    common.add_argument("--out", type=Path)

    parser = argparse.ArgumentParser(
        prog="nda-riccati",
        description="Riccati equations over the normed division algebras",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def command(name: str, help_text: str) -> argparse.ArgumentParser:
        return sub.add_parser(name, parents=[common], argument_default=argparse.SUPPRESS, help=help_text)

    command("laws", "composition law residuals")

    closure = command("closure", "Lie closure of a generator family")
    closure.add_argument("--generators")
    closure.add_argument("--table", type=Path)

    command("integrate", "RK4 integration of a Riccati spec")

    superposition = command("superposition", "real superposition rule")
    superposition.add_argument("--initials", type=float, nargs=3)
    superposition.add_argument("--k", type=float)

    conformal = command("conformal", "conformal-form equality check")
    conformal.add_argument("--check", type=int)

    lift = command("lift", "projective linear lift")
    lift.add_argument("--compare", action="store_const", const=True)

    command("symplectic", "Hamiltonian checks of the radial fields")

    schrodinger = command("schrodinger", "quaternionic Schrodinger, E = 0")
    schrodinger.add_argument("--convergence", action="store_const", const=True)
    schrodinger.add_argument("--minimal-algebra", dest="minimal_algebra", action="store_const", const=True)

    table = command("table", "render a table of vector fields")
    table.add_argument("--generators")

    return parser.parse_args(argv)


def load_run_config(args: argparse.Namespace) -> RunConfig:
    """
    合并配置文件与命令行参数

    Raises:
        ValidationError: 未知键或数值非法
        OSError: 配置文件不可读
    """
    values: Dict[str, Any] = {}
    options = vars(args).copy()
    config_file = options.pop("config_file", None)
    if config_file is not None:
        with open(config_file, "r", encoding="utf-8") as f:
            loaded = yaml.safe_load(f) or {}
        if not isinstance(loaded, dict):
            raise ValueError(f"Config file {config_file} must contain a mapping")
        values.update(loaded)
    values.update(options)
    return RunConfig.model_validate(values)


def run(config: RunConfig, service: ExperimentService) -> Dict[str, Any]:
    """执行一条子命令，返回带 status 的报告"""
    spec_data = load_spec_file(config.spec) if config.spec is not None else {}
    csv = str(config.csv) if config.csv is not None else None
    command = config.command

    if command == "laws":
        exact = True if config.exact is None else config.exact
        return service.check_laws(config.algebra, config.samples, config.seed, exact)
    if command == "closure":
        table = str(config.table) if config.table is not None else None
        return service.compute_closure(
            config.algebra or "O", config.generators, config.degree_cap, config.round_cap, table=table
        )
    if command == "integrate":
        return service.integrate_riccati(spec_data, config.t0, config.t1, config.step, csv)
    if command == "superposition":
        return service.check_superposition(
            spec_data, config.initials, config.k, config.t0, config.t1, config.step
        )
    if command == "conformal":
        samples = config.check if config.check is not None else config.samples
        return service.check_conformal(spec_data, samples, config.seed, config.exact)
    if command == "lift":
        return service.compare_lift(spec_data, config.t0, config.t1, config.step, config.compare, csv)
    if command == "symplectic":
        return service.check_symplectic(config.algebra, config.samples, config.seed)
    if command == "schrodinger":
        return service.solve_schrodinger(
            spec_data, config.step, csv, config.convergence, config.minimal_algebra
        )
    raise NDARiccatiError(f"Unhandled command: {command}")


def main(argv: Optional[List[str]] = None) -> int:
    """主函数，解析参数并执行子命令"""
    logging.basicConfig(level=getattr(logging, Config.LOG_LEVEL), stream=sys.stderr)
    args = _parse_args(argv)

    try:
        Config.validate()
        config = load_run_config(args)
    except (ValidationError, ValueError, OSError, yaml.YAMLError) as e:
        logger.error(f"配置错误: {str(e)}")
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG

    service = ExperimentService(output_dir=Path("."))

    if config.command == "table":
        text = service.render_table(config.algebra, getattr(args, "generators", None))
        if config.out is not None:
            write_text(text, config.out)
        else:
            sys.stdout.write(text)
        return EXIT_OK

    try:
        payload = run(config, service)
    except (NDARiccatiError, OSError, yaml.YAMLError) as e:
        logger.error(f"执行 {config.command} 时出错: {str(e)}")
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG

    payload["config"] = config.model_dump(mode="json")
    text = write_json(payload, config.out)
    if config.out is None:
        sys.stdout.write(text)
    status = payload.get("status", STATUS_OK)
    logger.info(f"{config.command} 完成: {status}")
    return _STATUS_EXIT.get(status, EXIT_OK)


if __name__ == "__main__":
    raise SystemExit(main())
