"""
报告工具模块
提供有理数解析与格式化、JSON/CSV 输出以及向量场表格渲染
"""
import csv
import json
import logging
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence

import sympy
from jinja2 import Environment, StrictUndefined

from ..exceptions import ExpressionParseError

logger = logging.getLogger(__name__)

FIELD_TABLE_TEMPLATE = (
    "{% for row in rows %}"
    "{{ row.name | fieldname(width) }} | {{ row.expression }}\n"
    "{% endfor %}"
)

_env = Environment(
    undefined=StrictUndefined,
    keep_trailing_newline=True,
    autoescape=False,
)
_env.filters["fieldname"] = lambda name, width: name.ljust(width)


def parse_scalar(value: Any) -> Fraction:
    """
    把 JSON 标量解析为精确有理数

    Args:
        value: 整数、浮点数或 "p/q" 字符串

    Returns:
        Fraction
    """
    if isinstance(value, bool):
        raise ExpressionParseError(f"Boolean is not a scalar: {value!r}")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        # 经 repr 取最短十进制表示，0.1 得到 1/10 而非二进制展开
        return Fraction(repr(value))
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError):
            raise ExpressionParseError(f"Not a rational scalar: {value!r}") from None
    raise ExpressionParseError(f"Unsupported scalar type: {type(value).__name__}")


def format_scalar(value: Any) -> Any:
    """精确值输出为整数或 "p/q" 字符串，浮点数原样输出"""
    if isinstance(value, sympy.Rational):
        value = Fraction(int(value.p), int(value.q))
    if isinstance(value, Fraction):
        if value.denominator == 1:
            return int(value.numerator)
        return f"{value.numerator}/{value.denominator}"
    if isinstance(value, bool):
        return value
    if isinstance(value, int):
        return value
    if isinstance(value, float):
        return value
    try:
        return float(value)
    except (TypeError, ValueError):
        return str(value)


def dump_json(payload: Dict[str, Any]) -> str:
    """键排序、两空格缩进；不含时间戳，相同输入得到逐字节相同的输出"""
    return json.dumps(payload, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def write_json(payload: Dict[str, Any], path: Optional[Path]) -> str:
    """
    写出 JSON 报告

    Args:
        payload: 报告内容
        path: 输出路径；为 None 时仅返回文本

    Returns:
        JSON 文本
    """
    text = dump_json(payload)
    if path is not None:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8")
        logger.info(f"报告已写入: {path}")
    return text


def write_text(text: str, path: Path) -> Path:
    """写出纯文本产物（如向量场表格）"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")
    logger.info(f"文件已写入: {path}")
    return path


def write_csv(header: Sequence[str], rows: Iterable[Sequence[Any]], path: Path) -> int:
    """
    写出轨迹 CSV，浮点数按 repr 格式

    Returns:
        写出的数据行数
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    count = 0
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(list(header))
        for row in rows:
            writer.writerow([repr(v) if isinstance(v, float) else v for v in row])
            count += 1
    logger.info(f"CSV 已写入: {path} ({count} 行)")
    return count


def render_field_table(rows: List[Dict[str, str]]) -> str:
    """
    渲染向量场表格，每个场一行

    Args:
        rows: [{"name": ..., "expression": ...}]

    Returns:
        表格文本
    """
    width = max((len(r["name"]) for r in rows), default=0)
    return _env.from_string(FIELD_TABLE_TEMPLATE).render(rows=rows, width=width)
