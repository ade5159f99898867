"""
系数表达式工具
封闭的 t 依赖系数族（常数、多项式、正弦、指数及其有限和）以及规格文件模型
"""
import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Any, Callable, Dict, List, Literal, Optional, Sequence, Tuple, Union

import numpy as np
import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError

from ..exceptions import ContractViolationError, ExpressionParseError
from .report_utils import format_scalar, parse_scalar

logger = logging.getLogger(__name__)

Vector = Tuple[Fraction, ...]


class CoeffNode(BaseModel):
    """表达式节点 {type, params}"""

    model_config = ConfigDict(extra="forbid")

    type: Literal["constant", "polynomial", "sin", "exp", "sum"]
    params: Dict[str, Any] = Field(default_factory=dict)


def _vector(raw: Any, dim: int) -> Vector:
    """标量视为实元素，列表须恰有 dim 项"""
    if isinstance(raw, (list, tuple)):
        if len(raw) != dim:
            raise ExpressionParseError(f"Expected {dim} coefficients, got {len(raw)}")
        return tuple(parse_scalar(v) for v in raw)
    return (parse_scalar(raw),) + (Fraction(0),) * (dim - 1)


def _require(params: Dict[str, Any], key: str, kind: str) -> Any:
    if key not in params:
        raise ExpressionParseError(f"'{kind}' node needs parameter '{key}'")
    return params[key]


@dataclass(frozen=True)
class _Constant:
    value: Vector

    def evaluate(self, t: Any, exact: bool) -> List:
        return list(self.value) if exact else [float(v) for v in self.value]

    def amplitudes(self) -> List[Vector]:
        return [self.value]

    def mapped(self, fn: Callable[[Vector], Vector]) -> "_Constant":
        return _Constant(tuple(fn(self.value)))

    def to_node(self) -> Dict[str, Any]:
        return {"type": "constant", "params": {"value": [format_scalar(v) for v in self.value]}}


@dataclass(frozen=True)
class _Polynomial:
    coeffs: Tuple[Vector, ...]

    def evaluate(self, t: Any, exact: bool) -> List:
        dim = len(self.coeffs[0])
        if exact:
            t = Fraction(t)
            out = [Fraction(0)] * dim
        else:
            t = float(t)
            out = [0.0] * dim
        # Horner
        for c in reversed(self.coeffs):
            out = [o * t + (v if exact else float(v)) for o, v in zip(out, c)]
        return out

    def amplitudes(self) -> List[Vector]:
        return list(self.coeffs)

    def mapped(self, fn: Callable[[Vector], Vector]) -> "_Polynomial":
        return _Polynomial(tuple(tuple(fn(c)) for c in self.coeffs))

    def to_node(self) -> Dict[str, Any]:
        return {
            "type": "polynomial",
            "params": {"coeffs": [[format_scalar(v) for v in c] for c in self.coeffs]},
        }


@dataclass(frozen=True)
class _Sine:
    amplitude: Vector
    omega: Fraction
    phase: Fraction

    def evaluate(self, t: Any, exact: bool) -> List:
        if exact:
            raise ContractViolationError("sin coefficients have no exact rational evaluation")
        s = math.sin(float(self.omega) * float(t) + float(self.phase))
        return [float(v) * s for v in self.amplitude]

    def amplitudes(self) -> List[Vector]:
        return [self.amplitude]

    def mapped(self, fn: Callable[[Vector], Vector]) -> "_Sine":
        return _Sine(tuple(fn(self.amplitude)), self.omega, self.phase)

    def to_node(self) -> Dict[str, Any]:
        return {
            "type": "sin",
            "params": {
                "amplitude": [format_scalar(v) for v in self.amplitude],
                "omega": format_scalar(self.omega),
                "phase": format_scalar(self.phase),
            },
        }


@dataclass(frozen=True)
class _Exp:
    amplitude: Vector
    rate: Fraction

    def evaluate(self, t: Any, exact: bool) -> List:
        if exact:
            raise ContractViolationError("exp coefficients have no exact rational evaluation")
        s = math.exp(float(self.rate) * float(t))
        return [float(v) * s for v in self.amplitude]

    def amplitudes(self) -> List[Vector]:
        return [self.amplitude]

    def mapped(self, fn: Callable[[Vector], Vector]) -> "_Exp":
        return _Exp(tuple(fn(self.amplitude)), self.rate)

    def to_node(self) -> Dict[str, Any]:
        return {
            "type": "exp",
            "params": {
                "amplitude": [format_scalar(v) for v in self.amplitude],
                "rate": format_scalar(self.rate),
            },
        }


_Term = Union[_Constant, _Polynomial, _Sine, _Exp]


class CoeffFn:
    """
    代数值的 t 依赖系数，由有限个项求和

    求值是确定性的；exact=True 时仅常数与多项式项可用，在有理数 t 上给出精确结果。
    """

    def __init__(self, dim: int, terms: Sequence[_Term] = ()):
        self.dim = dim
        self.terms: Tuple[_Term, ...] = tuple(terms)

    # ---- 构造 ----

    @classmethod
    def zero(cls, dim: int) -> "CoeffFn":
        return cls(dim, ())

    @classmethod
    def constant(cls, dim: int, value: Sequence[Any]) -> "CoeffFn":
        return cls(dim, (_Constant(_vector(list(value), dim)),))

    @classmethod
    def parse(cls, dim: int, raw: Any) -> "CoeffFn":
        """
        解析规格文件中的系数

        Args:
            dim: 代数维数
            raw: None（零）、标量、dim 项列表或表达式节点 {type, params}

        Returns:
            CoeffFn
        """
        if raw is None:
            return cls.zero(dim)
        if isinstance(raw, dict):
            try:
                node = CoeffNode.model_validate(raw)
            except ValidationError as e:
                raise ExpressionParseError(f"Malformed expression node: {e}") from None
            return cls(dim, cls._terms_of(node, dim))
        return cls(dim, (_Constant(_vector(raw, dim)),))

    @classmethod
    def _terms_of(cls, node: CoeffNode, dim: int) -> List[_Term]:
        p = node.params
        if node.type == "constant":
            return [_Constant(_vector(_require(p, "value", "constant"), dim))]
        if node.type == "polynomial":
            coeffs = _require(p, "coeffs", "polynomial")
            if not isinstance(coeffs, list) or not coeffs:
                raise ExpressionParseError("'polynomial' coeffs must be a non-empty list")
            return [_Polynomial(tuple(_vector(c, dim) for c in coeffs))]
        if node.type == "sin":
            return [_Sine(
                _vector(_require(p, "amplitude", "sin"), dim),
                parse_scalar(_require(p, "omega", "sin")),
                parse_scalar(p.get("phase", 0)),
            )]
        if node.type == "exp":
            return [_Exp(
                _vector(_require(p, "amplitude", "exp"), dim),
                parse_scalar(_require(p, "rate", "exp")),
            )]
        terms = _require(p, "terms", "sum")
        if not isinstance(terms, list):
            raise ExpressionParseError("'sum' terms must be a list")
        out: List[_Term] = []
        for raw in terms:
            out.extend(cls.parse(dim, raw).terms)
        return out

    # ---- 求值 ----

    def evaluate(self, t: Any, exact: bool = False) -> List:
        """返回系数列表（exact 时为 Fraction，否则为 float）"""
        acc: List = [Fraction(0)] * self.dim if exact else [0.0] * self.dim
        for term in self.terms:
            acc = [a + v for a, v in zip(acc, term.evaluate(t, exact))]
        return acc

    def evaluate_array(self, t: float) -> np.ndarray:
        return np.asarray(self.evaluate(t, exact=False), dtype=float)

    # ---- 变换 ----

    def is_zero(self) -> bool:
        return all(not any(v) for term in self.terms for v in term.amplitudes())

    def is_real(self) -> bool:
        """所有项的虚部系数均为零，即对每个 t 取实值"""
        return all(not any(v[1:]) for term in self.terms for v in term.amplitudes())

    def is_exact(self) -> bool:
        return all(isinstance(term, (_Constant, _Polynomial)) for term in self.terms)

    def map_linear(self, dim: int, fn: Callable[[Vector], Sequence[Fraction]]) -> "CoeffFn":
        """对每个系数向量施加同一线性映射，得到 dim 维的新系数"""
        return CoeffFn(dim, [term.mapped(lambda v: tuple(fn(v))) for term in self.terms])

    def __add__(self, other: "CoeffFn") -> "CoeffFn":
        if self.dim != other.dim:
            raise ContractViolationError("CoeffFn dimension mismatch")
        return CoeffFn(self.dim, self.terms + other.terms)

    def __neg__(self) -> "CoeffFn":
        return self.map_linear(self.dim, lambda v: [-x for x in v])

    def to_node(self) -> Dict[str, Any]:
        if len(self.terms) == 1:
            return self.terms[0].to_node()
        return {"type": "sum", "params": {"terms": [t.to_node() for t in self.terms]}}

    def __repr__(self) -> str:
        return f"CoeffFn(dim={self.dim}, node={self.to_node()})"


# ---------------------------------------------------------------------------
# 规格文件
# ---------------------------------------------------------------------------

class RiccatiSpecFile(BaseModel):
    """Riccati 规格文件：{algebra, b_minus, b_0L, b_0R, b_plus}，可附初值 initial"""

    model_config = ConfigDict(extra="forbid")

    algebra: str
    b_minus: Any = None
    b_0L: Any = None
    b_0R: Any = None
    b_plus: Any = None
    initial: Optional[List[Any]] = None


class LiftSpecFile(BaseModel):
    """线性提升规格文件：{algebra, a11, a12, a21, a22}"""

    model_config = ConfigDict(extra="forbid")

    algebra: str
    a11: Any = None
    a12: Any = None
    a21: Any = None
    a22: Any = None
    initial: Optional[List[List[Any]]] = None


class SchrodingerSpecFile(BaseModel):
    """定态四元数 Schrödinger 规格文件"""

    model_config = ConfigDict(extra="forbid")

    hbar: Any = 1
    m: Any = 1
    E: Any = 0
    V: Any = None
    W: Any = None
    x0: Any = 0
    x1: Any = 1
    u0: Optional[List[Any]] = None
    psi0: Optional[List[Any]] = None


def load_spec_file(path: Union[str, Path]) -> Dict[str, Any]:
    """
    读取 JSON 或 YAML 规格文件

    Raises:
        ExpressionParseError: 文件内容不是映射
    """
    path = Path(path)
    with open(path, "r", encoding="utf-8") as f:
        data = yaml.safe_load(f)
    if not isinstance(data, dict):
        raise ExpressionParseError(f"Spec file {path} must contain a mapping")
    logger.debug(f"已读取规格文件: {path}")
    return data
