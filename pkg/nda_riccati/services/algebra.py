"""
赋范可除代数模块
提供 ℝ、ℂ、ℍ、𝕆 的结构常数（Cayley–Dickson 倍增构造）、元素运算以及合成律检验
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from functools import cached_property, lru_cache
from typing import Any, Callable, Dict, List, Sequence, Tuple

import numpy as np
import sympy

from ..exceptions import AlgebraDivisionError, ContractViolationError
from ..utils.report_utils import format_scalar, parse_scalar

logger = logging.getLogger(__name__)


class AlgebraTag(str, Enum):
    """四个赋范可除代数，维数为 2^level（level 为倍增次数）"""

    R = "R"
    C = "C"
    H = "H"
    O = "O"

    @property
    def level(self) -> int:
        return "RCHO".index(self.value)

    @property
    def dim(self) -> int:
        return 2 ** self.level

    @classmethod
    def parse(cls, value: Any) -> "AlgebraTag":
        """接受 AlgebraTag、'R'/'C'/'H'/'O'（大小写均可）或 ℝ/ℂ/ℍ/𝕆"""
        if isinstance(value, cls):
            return value
        aliases = {"ℝ": "R", "ℂ": "C", "ℍ": "H", "𝕆": "O"}
        text = aliases.get(str(value).strip(), str(value).strip().upper())
        try:
            return cls(text)
        except ValueError:
            raise ContractViolationError(f"Unknown algebra: {value!r}") from None


def _cd_conj(x: Sequence) -> List:
    return [x[0]] + [-v for v in x[1:]]


def _cayley_dickson(x: Sequence, y: Sequence) -> List:
    """(a,b)(c,d) = (ac − d*b, da + bc*)"""
    n = len(x)
    if n == 1:
        return [x[0] * y[0]]
    h = n // 2
    a, b, c, d = x[:h], x[h:], y[:h], y[h:]
    ac = _cayley_dickson(a, c)
    db = _cayley_dickson(_cd_conj(d), b)
    da = _cayley_dickson(d, a)
    bc = _cayley_dickson(b, _cd_conj(c))
    return [p - q for p, q in zip(ac, db)] + [p + q for p, q in zip(da, bc)]


@dataclass(frozen=True)
class StructureConstants:
    """
    完整乘法表：table[i][j] = (sign, k) 表示 e_i·e_j = sign·e_k
    """

    tag: AlgebraTag
    table: Tuple[Tuple[Tuple[int, int], ...], ...]

    @property
    def dim(self) -> int:
        return len(self.table)

    def product(self, i: int, j: int) -> Tuple[int, int]:
        return self.table[i][j]

    @cached_property
    def _flat_tensor(self) -> np.ndarray:
        n = self.dim
        tensor = np.zeros((n * n, n))
        for i in range(n):
            for j in range(n):
                sign, k = self.table[i][j]
                tensor[i * n + j, k] = sign
        return tensor

    def multiply(self, x: Sequence, y: Sequence) -> List:
        """
        双线性展开乘积，系数可为整数、Fraction、浮点数、多项式或 sympy 表达式

        Args:
            x: 左因子坐标
            y: 右因子坐标

        Returns:
            乘积坐标列表
        """
        zero = x[0] * y[0] * 0
        out = [zero] * self.dim
        for i, xi in enumerate(x):
            if not xi:
                continue
            row = self.table[i]
            for j, yj in enumerate(y):
                if not yj:
                    continue
                sign, k = row[j]
                if sign > 0:
                    out[k] = out[k] + xi * yj
                else:
                    out[k] = out[k] - xi * yj
        return out

    def multiply_array(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        """浮点快速路径"""
        return np.outer(x, y).ravel() @ self._flat_tensor

    def left_basis(self, i: int, x: Sequence) -> List:
        """e_i·x"""
        out = [x[0] * 0] * self.dim
        for j, xj in enumerate(x):
            sign, k = self.table[i][j]
            out[k] = out[k] + sign * xj
        return out

    def right_basis(self, x: Sequence, i: int) -> List:
        """x·e_i"""
        out = [x[0] * 0] * self.dim
        for j, xj in enumerate(x):
            sign, k = self.table[j][i]
            out[k] = out[k] + sign * xj
        return out

    def as_rows(self) -> List[List[str]]:
        """导出为 '+e3' / '-e0' 形式的表格，用于黄金文件比对"""
        return [
            [f"{'+' if sign > 0 else '-'}e{k}" for sign, k in row]
            for row in self.table
        ]


@lru_cache(maxsize=None)
def build_algebra(tag: AlgebraTag) -> StructureConstants:
    """
    由 Cayley–Dickson 倍增构造结构常数

    Args:
        tag: 代数标签

    Returns:
        结构常数表
    """
    tag = AlgebraTag.parse(tag)
    n = tag.dim
    rows = []
    for i in range(n):
        row = []
        for j in range(n):
            ei = [0] * n
            ej = [0] * n
            ei[i] = 1
            ej[j] = 1
            prod = _cayley_dickson(ei, ej)
            k = next(idx for idx, v in enumerate(prod) if v)
            row.append((prod[k], k))
        rows.append(tuple(row))
    logger.debug(f"构造 {tag.value} 的结构常数，维数 {n}")
    return StructureConstants(tag=tag, table=tuple(rows))


def _is_exact(value: Any) -> bool:
    return isinstance(value, (int, Fraction)) and not isinstance(value, bool)


@dataclass(frozen=True)
class AlgebraElement:
    """代数元素：规范基下的系数向量"""

    algebra: AlgebraTag
    coeffs: Tuple[Any, ...]

    def __post_init__(self):
        object.__setattr__(self, "algebra", AlgebraTag.parse(self.algebra))
        object.__setattr__(self, "coeffs", tuple(self.coeffs))
        if len(self.coeffs) != self.algebra.dim:
            raise ContractViolationError(
                f"{self.algebra.value} needs {self.algebra.dim} coefficients, got {len(self.coeffs)}"
            )

    # ---- 构造 ----

    @classmethod
    def basis(cls, tag: AlgebraTag, index: int, value: Any = 1) -> "AlgebraElement":
        tag = AlgebraTag.parse(tag)
        if not 0 <= index < tag.dim:
            raise ContractViolationError(f"Basis index {index} out of range for {tag.value}")
        coeffs = [0] * tag.dim
        coeffs[index] = value
        return cls(tag, tuple(coeffs))

    @classmethod
    def scalar(cls, tag: AlgebraTag, value: Any = 1) -> "AlgebraElement":
        return cls.basis(tag, 0, value)

    @classmethod
    def zero(cls, tag: AlgebraTag) -> "AlgebraElement":
        tag = AlgebraTag.parse(tag)
        return cls(tag, (0,) * tag.dim)

    @classmethod
    def from_json(cls, tag: AlgebraTag, values: Sequence[Any]) -> "AlgebraElement":
        """从 JSON 数组构造，有理数可写作 "p/q" 字符串"""
        return cls(AlgebraTag.parse(tag), tuple(parse_scalar(v) for v in values))

    @classmethod
    def from_array(cls, tag: AlgebraTag, values: np.ndarray) -> "AlgebraElement":
        return cls(AlgebraTag.parse(tag), tuple(float(v) for v in values))

    # ---- 属性 ----

    @property
    def sc(self) -> StructureConstants:
        return build_algebra(self.algebra)

    def is_exact(self) -> bool:
        return all(_is_exact(c) for c in self.coeffs)

    def is_zero(self) -> bool:
        return not any(self.coeffs)

    def is_real(self) -> bool:
        return not any(self.coeffs[1:])

    def as_array(self) -> np.ndarray:
        return np.array([float(c) for c in self.coeffs])

    def to_float(self) -> "AlgebraElement":
        return AlgebraElement(self.algebra, tuple(float(c) for c in self.coeffs))

    def to_json(self) -> List[Any]:
        return [format_scalar(c) for c in self.coeffs]

    # ---- 运算 ----

    def _check_same(self, other: "AlgebraElement"):
        if not isinstance(other, AlgebraElement) or other.algebra != self.algebra:
            raise ContractViolationError("Algebra mismatch between operands")

    def __add__(self, other: "AlgebraElement") -> "AlgebraElement":
        self._check_same(other)
        return AlgebraElement(self.algebra, tuple(p + q for p, q in zip(self.coeffs, other.coeffs)))

    def __sub__(self, other: "AlgebraElement") -> "AlgebraElement":
        self._check_same(other)
        return AlgebraElement(self.algebra, tuple(p - q for p, q in zip(self.coeffs, other.coeffs)))

    def __neg__(self) -> "AlgebraElement":
        return AlgebraElement(self.algebra, tuple(-c for c in self.coeffs))

    def __mul__(self, other: Any) -> "AlgebraElement":
        if isinstance(other, AlgebraElement):
            return mul(self, other)
        return AlgebraElement(self.algebra, tuple(c * other for c in self.coeffs))

    def __rmul__(self, other: Any) -> "AlgebraElement":
        return AlgebraElement(self.algebra, tuple(other * c for c in self.coeffs))

    def __truediv__(self, other: Any) -> "AlgebraElement":
        if _is_exact(other):
            other = Fraction(other)
        return AlgebraElement(self.algebra, tuple(c / other for c in self.coeffs))

    def norm_squared(self) -> Any:
        return sum((c * c for c in self.coeffs[1:]), self.coeffs[0] * self.coeffs[0])

    def norm(self) -> float:
        return math.sqrt(float(self.norm_squared()))

    def conj(self) -> "AlgebraElement":
        return AlgebraElement(self.algebra, tuple(_cd_conj(self.coeffs)))

    def inner(self, other: "AlgebraElement") -> Any:
        self._check_same(other)
        return sum((p * q for p, q in zip(self.coeffs[1:], other.coeffs[1:])),
                   self.coeffs[0] * other.coeffs[0])

    def inv(self) -> "AlgebraElement":
        n2 = self.norm_squared()
        if not n2:
            raise AlgebraDivisionError("Cannot invert the zero element")
        return self.conj() / n2

    def scalar_part(self) -> Any:
        return self.coeffs[0]

    def vector_part(self) -> "AlgebraElement":
        return AlgebraElement(self.algebra, (self.coeffs[0] * 0,) + self.coeffs[1:])


def mul(a: AlgebraElement, b: AlgebraElement) -> AlgebraElement:
    """代数乘法，经结构常数双线性展开"""
    a._check_same(b)
    sc = build_algebra(a.algebra)
    return AlgebraElement(a.algebra, tuple(sc.multiply(a.coeffs, b.coeffs)))


def conj(a: AlgebraElement) -> AlgebraElement:
    return a.conj()


def norm(a: AlgebraElement) -> float:
    return a.norm()


def inner(a: AlgebraElement, b: AlgebraElement) -> Any:
    return a.inner(b)


def inv(a: AlgebraElement) -> AlgebraElement:
    return a.inv()


def scalar_part(a: AlgebraElement) -> Any:
    return a.scalar_part()


def vector_part(a: AlgebraElement) -> AlgebraElement:
    return a.vector_part()


# ---------------------------------------------------------------------------
# 合成律检验
# ---------------------------------------------------------------------------

# 𝕆 上结合律不是必须成立的律，仅作报告
INFORMATIONAL_LAWS = {"associativity"}


@dataclass
class LawReport:
    """合成律检验报告：每条律在所有样本上的最大绝对残差"""

    algebra: AlgebraTag
    samples: int
    seed: int
    exact: bool
    tolerance: float
    residuals: Dict[str, Any] = field(default_factory=dict)
    derivative_rules: Dict[str, Any] = field(default_factory=dict)

    def required_laws(self) -> List[str]:
        names = sorted(self.residuals)
        if self.algebra == AlgebraTag.O:
            names = [n for n in names if n not in INFORMATIONAL_LAWS]
        return names

    @property
    def passed(self) -> bool:
        for name in self.required_laws():
            value = self.residuals[name]
            if self.exact and value != 0:
                return False
            if not self.exact and not float(value) < self.tolerance:
                return False
        return not self.derivative_rules.get("failures", 0)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "algebra": self.algebra.value,
            "samples": self.samples,
            "seed": self.seed,
            "exact": self.exact,
            "tolerance": self.tolerance,
            "residuals": {k: float(v) for k, v in sorted(self.residuals.items())},
            "derivative_rules": self.derivative_rules,
            "passed": self.passed,
        }


def _max_abs(vec: Sequence) -> Any:
    return max(abs(v) for v in vec)


def _sub(x: Sequence, y: Sequence) -> List:
    return [p - q for p, q in zip(x, y)]


def _scale(s: Any, x: Sequence) -> List:
    return [s * v for v in x]


def _dot(x: Sequence, y: Sequence) -> Any:
    return sum((p * q for p, q in zip(x[1:], y[1:])), x[0] * y[0])


def _law_residuals(sc: StructureConstants, mul_fn: Callable, a, b, c, d, o) -> Dict[str, Any]:
    """对单个样本计算所有合成律残差"""
    ab, ac, bc = mul_fn(a, b), mul_fn(a, c), mul_fn(b, c)
    ba, ca, cb = mul_fn(b, a), mul_fn(c, a), mul_fn(c, b)
    ad = mul_fn(a, d)
    a_c = _cd_conj(a)
    na, nb = _dot(a, a), _dot(b, b)

    out = {}
    out["scaling"] = abs(_dot(ab, ac) - na * _dot(b, c))
    out["exchange"] = abs(_dot(ab, mul_fn(c, d)) - 2 * _dot(a, c) * _dot(b, d) + _dot(ad, cb))
    g_abc = _dot(ab, c)
    out["braid"] = max(abs(g_abc - _dot(b, mul_fn(a_c, c))),
                       abs(g_abc - _dot(a, mul_fn(c, _cd_conj(b)))))
    out["inverse"] = _max_abs(_sub(mul_fn(a_c, ab), _scale(na, b)))
    out["alternative"] = max(_max_abs(_sub(mul_fn(a, ab), mul_fn(mul_fn(a, a), b))),
                             _max_abs(_sub(mul_fn(a, ba), mul_fn(ab, a))))
    out["moufang"] = _max_abs(_sub(mul_fn(ab, ca), mul_fn(mul_fn(a, bc), a)))
    out["norm_multiplicativity"] = abs(_dot(ab, ab) - na * nb)
    out["associativity"] = _max_abs(_sub(mul_fn(ab, c), mul_fn(a, bc)))
    # 共轭按分量实现，再与 2g(a,1) − a 对照
    two_g = [2 * a[0]] + [a[0] * 0] * (len(a) - 1)
    out["conjugation"] = _max_abs(_sub(a_c, _sub(two_g, a)))

    anti = a[0] * 0
    n = sc.dim
    for i in range(1, n):
        for j in range(i + 1, n):
            left = [p + q for p, q in zip(sc.left_basis(i, sc.left_basis(j, o)),
                                          sc.left_basis(j, sc.left_basis(i, o)))]
            right = [p + q for p, q in zip(sc.right_basis(sc.right_basis(o, i), j),
                                           sc.right_basis(sc.right_basis(o, j), i))]
            anti = max(anti, _max_abs(left), _max_abs(right))
    out["anticommutation"] = anti
    return out


def _random_rational(rng: np.random.Generator, n: int) -> List[Fraction]:
    nums = rng.integers(-9, 10, size=n)
    dens = rng.integers(1, 10, size=n)
    return [Fraction(int(p), int(q)) for p, q in zip(nums, dens)]


def _clear_denominators(x: Sequence[Fraction]) -> List[int]:
    # 所有律对每个自变量都是齐次的，逐元素乘以分母最小公倍数不改变残差是否为零
    m = math.lcm(*(v.denominator for v in x))
    return [int(v * m) for v in x]


def check_composition_laws(
    tag: AlgebraTag,
    samples: int,
    seed: int,
    exact: bool = True,
    tolerance: float = 1e-12,
    derivative_samples: int = 0,
) -> LawReport:
    """
    在随机样本上检验标度律、交换律、辫律、逆律、交错律、Moufang 恒等式及基元反交换

    Args:
        tag: 代数标签
        samples: 样本数（≥ 1）
        seed: 随机种子
        exact: True 用精确有理数，False 用单位尺度浮点数
        tolerance: 浮点模式容差
        derivative_samples: 附加的导数法则符号检验样本数

    Returns:
        LawReport
    """
    tag = AlgebraTag.parse(tag)
    if samples < 1:
        raise ContractViolationError("samples must be >= 1")

    sc = build_algebra(tag)
    rng = np.random.default_rng(seed)
    n = tag.dim
    logger.info(f"开始检验 {tag.value} 合成律: {samples} 个样本, exact={exact}")

    if exact:
        def draw():
            return _clear_denominators(_random_rational(rng, n))
        mul_fn = sc.multiply
    else:
        def draw():
            v = rng.standard_normal(n)
            return v / np.linalg.norm(v)

        def mul_fn(x, y):
            return sc.multiply_array(np.asarray(x, dtype=float), np.asarray(y, dtype=float))

    worst: Dict[str, Any] = {}
    for _ in range(samples):
        a, b, c, d, o = draw(), draw(), draw(), draw(), draw()
        for name, value in _law_residuals(sc, mul_fn, a, b, c, d, o).items():
            if name not in worst or value > worst[name]:
                worst[name] = value

    report = LawReport(
        algebra=tag,
        samples=samples,
        seed=seed,
        exact=exact,
        tolerance=tolerance,
        residuals=worst,
    )
    if derivative_samples:
        report.derivative_rules = check_derivative_rules(tag, derivative_samples, seed)

    logger.info(f"{tag.value} 合成律检验完成，通过: {report.passed}")
    return report


def check_derivative_rules(tag: AlgebraTag, samples: int = 3, seed: int = 0) -> Dict[str, Any]:
    """
    在多项式曲线上符号验证乘积法则与逆元求导法则

    逆元法则 d(a⁻¹)/dt = −a⁻¹a'a⁻¹ 乘以 ‖a‖⁴ 后化为多项式恒等式
    (a*)'‖a‖² − a*(‖a‖²)' + (a*a')a* = 0。
    """
    tag = AlgebraTag.parse(tag)
    sc = build_algebra(tag)
    rng = np.random.default_rng(seed)
    t = sympy.Symbol("t", real=True)
    n = tag.dim

    def curve():
        return [
            sum(sympy.Rational(int(rng.integers(-5, 6)), int(rng.integers(1, 5))) * t ** p
                for p in range(3))
            for _ in range(n)
        ]

    product_failures = 0
    inverse_failures = 0
    for _ in range(samples):
        a, b = curve(), curve()
        da = [sympy.diff(v, t) for v in a]
        db = [sympy.diff(v, t) for v in b]

        lhs = [sympy.diff(v, t) for v in sc.multiply(a, b)]
        rhs = [p + q for p, q in zip(sc.multiply(da, b), sc.multiply(a, db))]
        if any(sympy.expand(p - q) != 0 for p, q in zip(lhs, rhs)):
            product_failures += 1

        a_c = _cd_conj(a)
        n2 = sympy.expand(_dot(a, a))
        dn2 = sympy.diff(n2, t)
        sandwich = sc.multiply(sc.multiply(a_c, da), a_c)
        identity = [
            sympy.expand(sympy.diff(ac, t) * n2 - ac * dn2 + s)
            for ac, s in zip(a_c, sandwich)
        ]
        if any(v != 0 for v in identity):
            inverse_failures += 1

    return {
        "samples": samples,
        "product_rule_failures": product_failures,
        "inverse_rule_failures": inverse_failures,
        "failures": product_failures + inverse_failures,
    }
