"""
多项式向量场服务模块
提供 λ_o 提升、Lie 括号、生成元族、括号闭包以及线性场矩阵
"""
import ast
import logging
import re
from dataclasses import dataclass, field, replace
from fractions import Fraction
from functools import cached_property, lru_cache
from typing import Any, Dict, List, Optional, Sequence, Tuple

from sympy import QQ, Matrix, Rational, zeros
from sympy.polys.orderings import grlex
from sympy.polys.rings import PolyElement, PolyRing, xring

from ..config import Config
from ..exceptions import ContractViolationError, ExpressionParseError
from ..utils.linear import EchelonBasis, SparseVector
from ..utils.report_utils import format_scalar, render_field_table as _render_rows
from .algebra import AlgebraElement, AlgebraTag, StructureConstants, build_algebra

logger = logging.getLogger(__name__)

GENERATOR_FAMILIES = ("riccati", "rotations", "extremal", "alt-left", "alt-right", "schrodinger")

# 共形场至多二次
CONFORMAL_DEGREE = 2


@lru_cache(maxsize=None)
def coordinate_ring(dim: int) -> PolyRing:
    """变量 o_0..o_{dim-1} 上的有理系数多项式环，次数-字典序"""
    ring, _ = xring([f"o_{i}" for i in range(dim)], QQ, grlex)
    return ring


def _to_fraction(c: Any) -> Fraction:
    return Fraction(int(QQ.numer(c)), int(QQ.denom(c)))


def _to_qq(value: Any) -> Any:
    if isinstance(value, Fraction):
        return QQ(value.numerator, value.denominator)
    if isinstance(value, Rational):
        return QQ(int(value.p), int(value.q))
    return QQ.convert(value)


def _to_poly(ring: PolyRing, value: Any) -> PolyElement:
    if isinstance(value, PolyElement):
        return value
    return ring.ground_new(_to_qq(value))


def _monomial_text(exps: Tuple[int, ...]) -> str:
    parts = []
    for i, e in enumerate(exps):
        if e == 1:
            parts.append(f"o_{i}")
        elif e > 1:
            parts.append(f"o_{i}^{e}")
    return "*".join(parts) if parts else "1"


@dataclass(frozen=True, eq=False)
class PolyVectorField:
    """
    ℝⁿ 上的多项式向量场，分量为 o_0..o_{n-1} 的有理系数多项式

    相等性只比较分量（规范单项式序下的语法相等），名称与分级不参与比较。
    """

    name: str
    components: Tuple[PolyElement, ...]
    grade: Optional[int] = None

    def __post_init__(self):
        object.__setattr__(self, "components", tuple(self.components))

    @property
    def dim(self) -> int:
        return len(self.components)

    @property
    def ring(self) -> PolyRing:
        return coordinate_ring(self.dim)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, PolyVectorField):
            return NotImplemented
        return self.dim == other.dim and all(
            p == q for p, q in zip(self.components, other.components)
        )

    __hash__ = None  # type: ignore[assignment]

    def __add__(self, other: "PolyVectorField") -> "PolyVectorField":
        _check_dims(self, other)
        return PolyVectorField(
            f"{self.name}+{other.name}",
            tuple(p + q for p, q in zip(self.components, other.components)),
            self.grade if self.grade == other.grade else None,
        )

    def __sub__(self, other: "PolyVectorField") -> "PolyVectorField":
        _check_dims(self, other)
        return PolyVectorField(
            f"{self.name}-{other.name}",
            tuple(p - q for p, q in zip(self.components, other.components)),
            self.grade if self.grade == other.grade else None,
        )

    def __neg__(self) -> "PolyVectorField":
        return PolyVectorField(f"-{self.name}", tuple(-p for p in self.components), self.grade)

    def scaled(self, factor: Any) -> "PolyVectorField":
        q = _to_qq(factor)
        return PolyVectorField(
            f"{format_scalar(_to_fraction(q))}*{self.name}",
            tuple(p * q for p in self.components),
            self.grade,
        )

    def renamed(self, name: str, grade: Optional[int] = None) -> "PolyVectorField":
        return replace(self, name=name, grade=self.grade if grade is None else grade)

    def is_zero(self) -> bool:
        return not any(self.components)

    def degree(self) -> int:
        """最高总次数；零场返回 -1"""
        degrees = [sum(m) for p in self.components for m in p.keys()]
        return max(degrees) if degrees else -1

    def is_linear_homogeneous(self) -> bool:
        return all(sum(m) == 1 for p in self.components for m in p.keys())

    @cached_property
    def jacobian(self) -> Tuple[Tuple[PolyElement, ...], ...]:
        """jacobian[j][i] = ∂F_j/∂o_i"""
        gens = self.ring.gens
        return tuple(tuple(p.diff(x) for x in gens) for p in self.components)

    def coefficient_vector(self) -> SparseVector:
        """列键 (总次数, 指数元组, 分量) -> 系数"""
        vec: SparseVector = {}
        for j, p in enumerate(self.components):
            for exps, c in p.items():
                vec[(sum(exps), tuple(exps), j)] = _to_fraction(c)
        return vec

    def component_maps(self) -> List[Dict[str, Any]]:
        return [
            {_monomial_text(exps): format_scalar(_to_fraction(c)) for exps, c in p.terms()}
            for p in self.components
        ]

    def expression(self) -> str:
        """渲染为 -o_1 ∂/∂o_0 + o_0 ∂/∂o_1 形式"""
        pieces: List[str] = []
        for j, p in enumerate(self.components):
            for exps, c in p.terms():
                value = _to_fraction(c)
                mag = abs(value)
                mono = _monomial_text(exps)
                if mono == "1":
                    body = "" if mag == 1 else f"{format_scalar(mag)} "
                else:
                    body = (f"{format_scalar(mag)}*" if mag != 1 else "") + mono + " "
                term = f"{body}∂/∂o_{j}"
                if not pieces:
                    pieces.append(("-" if value < 0 else "") + term)
                else:
                    pieces.append((" - " if value < 0 else " + ") + term)
        return "".join(pieces) if pieces else "0"

    def to_dict(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "grade": self.grade,
            "degree": self.degree(),
            "components": self.component_maps(),
        }


def _check_dims(a: PolyVectorField, b: PolyVectorField):
    if a.dim != b.dim:
        raise ContractViolationError(f"Dimension mismatch: {a.dim} vs {b.dim}")


def bracket(y1: PolyVectorField, y2: PolyVectorField, name: Optional[str] = None) -> PolyVectorField:
    """
    Lie 括号 [Y1,Y2]_j = Σ_i (F1_i ∂F2_j/∂o_i − F2_i ∂F1_j/∂o_i)

    Args:
        y1: 左场
        y2: 右场
        name: 结果名称，缺省为 "[Y1,Y2]"

    Returns:
        括号场
    """
    _check_dims(y1, y2)
    ring = y1.ring
    j1, j2 = y1.jacobian, y2.jacobian
    comps = []
    for j in range(y1.dim):
        acc = ring.zero
        for i in range(y1.dim):
            f1, f2 = y1.components[i], y2.components[i]
            if f1 and j2[j][i]:
                acc += f1 * j2[j][i]
            if f2 and j1[j][i]:
                acc -= f2 * j1[j][i]
        comps.append(acc)
    grade = y1.grade + y2.grade if y1.grade is not None and y2.grade is not None else None
    return PolyVectorField(name or f"[{y1.name},{y2.name}]", tuple(comps), grade)


# ---------------------------------------------------------------------------
# 代数词表达式的提升
# ---------------------------------------------------------------------------

_BASIS_NAME = re.compile(r"^e_?(\d+)$")


class _WordEvaluator:
    """在符号元素 o（系数为环生成元）上求值代数词"""

    def __init__(self, sc: StructureConstants):
        self.sc = sc
        self.tag = sc.tag
        self.ring = coordinate_ring(sc.dim)
        self.o = AlgebraElement(self.tag, self.ring.gens)

    def evaluate(self, text: str) -> AlgebraElement:
        try:
            tree = ast.parse(text.strip(), mode="eval")
        except SyntaxError as e:
            raise ExpressionParseError(f"Malformed expression {text!r}: {e.msg}") from None
        return self._as_element(self._visit(tree.body))

    def _as_element(self, value: Any) -> AlgebraElement:
        if isinstance(value, AlgebraElement):
            return value
        return AlgebraElement.scalar(self.tag, value)

    def _visit(self, node: ast.AST) -> Any:
        if isinstance(node, ast.BinOp):
            left = self._visit(node.left)
            if isinstance(node.op, ast.Pow):
                return self._power(left, node.right)
            right = self._visit(node.right)
            if isinstance(node.op, ast.Add):
                return self._add(left, right)
            if isinstance(node.op, ast.Sub):
                return self._add(left, self._neg(right))
            if isinstance(node.op, ast.Mult):
                return self._mul(left, right)
            if isinstance(node.op, ast.Div):
                if isinstance(right, AlgebraElement) or not right:
                    raise ExpressionParseError("Division is only allowed by a nonzero number")
                return self._mul(left, 1 / right)
            raise ExpressionParseError(f"Unsupported operator: {type(node.op).__name__}")
        if isinstance(node, ast.UnaryOp):
            value = self._visit(node.operand)
            if isinstance(node.op, ast.USub):
                return self._neg(value)
            if isinstance(node.op, ast.UAdd):
                return value
            raise ExpressionParseError(f"Unsupported unary operator: {type(node.op).__name__}")
        if isinstance(node, ast.Name):
            if node.id == "o":
                return self.o
            match = _BASIS_NAME.match(node.id)
            if match:
                index = int(match.group(1))
                if index >= self.tag.dim:
                    raise ExpressionParseError(f"{node.id} is not a basis element of {self.tag.value}")
                return AlgebraElement.basis(self.tag, index)
            raise ExpressionParseError(f"Unknown name: {node.id}")
        if isinstance(node, ast.Constant):
            if isinstance(node.value, bool) or not isinstance(node.value, (int, float)):
                raise ExpressionParseError(f"Unsupported constant: {node.value!r}")
            if isinstance(node.value, float):
                return _to_qq(Fraction(repr(node.value)))
            return QQ(node.value)
        raise ExpressionParseError(f"Unsupported syntax: {type(node).__name__}")

    def _add(self, a: Any, b: Any) -> Any:
        if isinstance(a, AlgebraElement) or isinstance(b, AlgebraElement):
            return self._as_element(a) + self._as_element(b)
        return a + b

    def _neg(self, a: Any) -> Any:
        return -a

    def _mul(self, a: Any, b: Any) -> Any:
        if isinstance(a, AlgebraElement) and isinstance(b, AlgebraElement):
            return a * b
        if isinstance(a, AlgebraElement):
            return a * b
        if isinstance(b, AlgebraElement):
            return b * a
        return a * b

    def _power(self, base: Any, exponent_node: ast.AST) -> Any:
        if not (isinstance(exponent_node, ast.Constant) and isinstance(exponent_node.value, int)
                and not isinstance(exponent_node.value, bool) and exponent_node.value >= 0):
            raise ExpressionParseError("Exponent must be a non-negative integer literal")
        result: Any = QQ(1)
        for _ in range(exponent_node.value):
            result = self._mul(result, base) if isinstance(result, AlgebraElement) else self._mul(base, result)
        return result


def lift_field(
    expression: str,
    sc: StructureConstants,
    name: Optional[str] = None,
    grade: Optional[int] = None,
) -> PolyVectorField:
    """
    把代数词 F(o) 提升为坐标向量场 λ_o(F(o))

    Args:
        expression: 代数词，如 "e1*o"、"(o*e2)*o"、"o**2"；允许 o、e0..e7（或 e_0）、数字、+ - * / **
        sc: 结构常数
        name: 场名称
        grade: 分级

    Returns:
        PolyVectorField
    """
    element = _WordEvaluator(sc).evaluate(expression)
    ring = coordinate_ring(sc.dim)
    comps = tuple(_to_poly(ring, c) for c in element.coeffs)
    return PolyVectorField(name or f"λ({expression})", comps, grade)


def coordinate_field(dim: int, terms: Dict[int, Any], name: str, grade: Optional[int] = None) -> PolyVectorField:
    """由 {分量: 多项式} 直接构造场，多项式可为环元素或数"""
    ring = coordinate_ring(dim)
    comps = [ring.zero] * dim
    for j, value in terms.items():
        comps[j] = _to_poly(ring, value)
    return PolyVectorField(name, tuple(comps), grade)


# ---------------------------------------------------------------------------
# 生成元族
# ---------------------------------------------------------------------------

def riccati_generators(tag: AlgebraTag) -> List[PolyVectorField]:
    """
    NDA Riccati 方程的生成元：X_i⁻ = λ(e_i)、X^(0) = λ(o)、X_j^{0_L} = λ(e_j o)、
    X_j^{0_R} = λ(o e_j)、X_i⁺ = λ((o e_i) o)

    Returns:
        4·dim − 1 个场，顺序为 X⁻、X^(0)、X^{0_L}、X^{0_R}、X⁺
    """
    sc = build_algebra(AlgebraTag.parse(tag))
    n = sc.dim
    fields = [lift_field(f"e{i}", sc, f"X^-_{i}", -1) for i in range(n)]
    fields.append(lift_field("o", sc, "X^{(0)}", 0))
    fields += [lift_field(f"e{j}*o", sc, f"X^{{0_L}}_{j}", 0) for j in range(1, n)]
    fields += [lift_field(f"o*e{j}", sc, f"X^{{0_R}}_{j}", 0) for j in range(1, n)]
    fields += [lift_field(f"(o*e{i})*o", sc, f"X^+_{i}", 1) for i in range(n)]
    return fields


def rotation_generators(tag: AlgebraTag) -> List[PolyVectorField]:
    """{X_j^{0_L}, X_j^{0_R}}，j ≥ 1"""
    return [f for f in riccati_generators(tag) if f.name.startswith(("X^{0_L}", "X^{0_R}"))]


def extremal_generators(tag: AlgebraTag) -> List[PolyVectorField]:
    """只含 X_i⁻ 与 X_i⁺"""
    return [f for f in riccati_generators(tag) if f.grade in (-1, 1)]


def alt_quadratic_generators(tag: AlgebraTag, side: str) -> List[PolyVectorField]:
    """
    以 e_k o²（side="left"）或 o² e_k（side="right"）替换 (o e_k) o 的生成元集合

    Args:
        tag: 仅限 H 或 O
        side: "left" 或 "right"
    """
    tag = AlgebraTag.parse(tag)
    if tag not in (AlgebraTag.H, AlgebraTag.O):
        raise ContractViolationError("Alternative quadratic generators are defined for H and O only")
    if side not in ("left", "right"):
        raise ContractViolationError(f"side must be 'left' or 'right', got {side!r}")
    sc = build_algebra(tag)
    fields = [f for f in riccati_generators(tag) if f.grade != 1]
    for k in range(sc.dim):
        word = f"e{k}*(o*o)" if side == "left" else f"(o*o)*e{k}"
        label = "L" if side == "left" else "R"
        fields.append(lift_field(word, sc, f"Y^{label}_{k}", 1))
    return fields


def schrodinger_generators() -> List[PolyVectorField]:
    """ℍ 上的 {X_0⁺ = λ(u²), X_0⁻..X_3⁻}"""
    sc = build_algebra(AlgebraTag.H)
    fields = [lift_field(f"e{i}", sc, f"X^-_{i}", -1) for i in range(4)]
    fields.append(lift_field("o*o", sc, "X^+_0", 1))
    return fields


def generator_set(tag: AlgebraTag, family: str) -> List[PolyVectorField]:
    """按名称取生成元族：riccati、rotations、extremal、alt-left、alt-right、schrodinger"""
    if family == "riccati":
        return riccati_generators(tag)
    if family == "rotations":
        return rotation_generators(tag)
    if family == "extremal":
        return extremal_generators(tag)
    if family in ("alt-left", "alt-right"):
        return alt_quadratic_generators(tag, family.split("-")[1])
    if family == "schrodinger":
        if AlgebraTag.parse(tag) != AlgebraTag.H:
            raise ContractViolationError("The schrodinger generator family lives on H")
        return schrodinger_generators()
    raise ContractViolationError(f"Unknown generator family: {family!r}")


_DOUBLE_LEFT = re.compile(r"^X\^\{\(0\)\}_\{(\d)(\d)\}$")
_RIGHT_PRODUCT = re.compile(r"^X\^\{0_R\}_\{(\d)\.(\d)\}$")
_TILDE = re.compile(r"^X~_\{(\d)(\d)\}$")


def named_field(tag: AlgebraTag, name: str) -> PolyVectorField:
    """
    按名称取场；除生成元外支持
    X^{(0)}_{ij} = λ(e_i(e_j o))、X^{0_R}_{j.i} = λ(o(e_j e_i))、X~_{ij} = [X_i⁻, X_j⁺]
    """
    tag = AlgebraTag.parse(tag)
    sc = build_algebra(tag)
    for f in riccati_generators(tag):
        if f.name == name:
            return f
    match = _DOUBLE_LEFT.match(name)
    if match:
        i, j = int(match.group(1)), int(match.group(2))
        _check_indices(tag, i, j)
        return lift_field(f"e{i}*(e{j}*o)", sc, name, 0)
    match = _RIGHT_PRODUCT.match(name)
    if match:
        j, i = int(match.group(1)), int(match.group(2))
        _check_indices(tag, i, j)
        return lift_field(f"o*(e{j}*e{i})", sc, name, 0)
    match = _TILDE.match(name)
    if match:
        i, j = int(match.group(1)), int(match.group(2))
        _check_indices(tag, i, j)
        return bracket(named_field(tag, f"X^-_{i}"), named_field(tag, f"X^+_{j}"), name)
    raise ContractViolationError(f"Unknown field name: {name!r}")


def _check_indices(tag: AlgebraTag, *indices: int):
    if any(not 0 <= k < tag.dim for k in indices):
        raise ContractViolationError(f"Index out of range for {tag.value}: {indices}")


def in_span(fields: Sequence[PolyVectorField], candidate: PolyVectorField) -> bool:
    """精确判定 candidate 是否在 fields 的张成空间内"""
    echelon = EchelonBasis()
    for f in fields:
        echelon.add(f.coefficient_vector())
    return echelon.contains(candidate.coefficient_vector())


def check_grading(fields: Sequence[PolyVectorField]) -> Dict[str, Any]:
    """
    检验 [V^(k1), V^(k2)] ⊂ V^(k1+k2)，V^(k) 为给定场中分级为 k 的部分的张成

    Returns:
        {"pairs": 检验的对数, "violations": 违反的括号名称列表}
    """
    graded: Dict[int, EchelonBasis] = {}
    for f in fields:
        if f.grade is None:
            raise ContractViolationError(f"Field {f.name} carries no grade")
        graded.setdefault(f.grade, EchelonBasis()).add(f.coefficient_vector())

    pairs = 0
    violations = []
    for a in range(len(fields)):
        for b in range(a + 1, len(fields)):
            pairs += 1
            br = bracket(fields[a], fields[b])
            if br.is_zero():
                continue
            target = graded.get(br.grade)
            if target is None or not target.contains(br.coefficient_vector()):
                violations.append(br.name)
    return {"pairs": pairs, "violations": violations}


def diagonal_field(dim: int, k: int, power: int = 1) -> PolyVectorField:
    """o_k^power ∂/∂o_k"""
    ring = coordinate_ring(dim)
    return coordinate_field(dim, {k: ring.gens[k] ** power}, f"o_{k}^{power}∂_{k}")


def power_chain(tag: AlgebraTag, side: str, alpha: int, beta: int) -> PolyVectorField:
    """
    计算 [o_β∂_β, [o_α∂_α, Y_α]]，Y_α 为交错二次生成元 λ(e_α o²) 或 λ(o² e_α)

    结果为 ±2 o_β² ∂/∂o_α，β = 0 时取负号。要求 α ≥ 1 且 β ≠ α。
    """
    tag = AlgebraTag.parse(tag)
    if alpha < 1 or alpha == beta:
        raise ContractViolationError("power_chain needs alpha >= 1 and beta != alpha")
    _check_indices(tag, alpha, beta)
    label = "L" if side == "left" else "R"
    y_alpha = next(f for f in alt_quadratic_generators(tag, side) if f.name == f"Y^{label}_{alpha}")
    inner = bracket(diagonal_field(tag.dim, alpha), y_alpha)
    return bracket(diagonal_field(tag.dim, beta), inner, f"X^{{({alpha},{beta})}}")


def raise_power(fld: PolyVectorField, beta: int, delta: int) -> PolyVectorField:
    """
    作用 [o_β²∂_δ, [o_δ∂_β, ·]]：把 o_β^k ∂/∂o_α 映为 k·o_β^{k+1} ∂/∂o_α（α ∉ {β, δ}）
    """
    if beta == delta:
        raise ContractViolationError("raise_power needs beta != delta")
    ring = fld.ring
    shift = coordinate_field(fld.dim, {beta: ring.gens[delta]}, f"o_{delta}∂_{beta}")
    lift = coordinate_field(fld.dim, {delta: ring.gens[beta] ** 2}, f"o_{beta}^2∂_{delta}")
    return bracket(lift, bracket(shift, fld), f"raise({fld.name})")


# ---------------------------------------------------------------------------
# 线性场矩阵
# ---------------------------------------------------------------------------

def linear_matrix(fld: PolyVectorField) -> Matrix:
    """
    线性齐次场 X = Σ_j (A o)_j ∂/∂o_j 对应 Ξ(X) = −A

    Ξ 是 Lie 代数同态：Ξ([X,Y]) = [Ξ(X), Ξ(Y)]。

    Raises:
        ContractViolationError: 场不是线性齐次的
    """
    if not fld.is_linear_homogeneous():
        raise ContractViolationError(f"{fld.name} is not a linear homogeneous field")
    n = fld.dim
    m = zeros(n, n)
    for j, p in enumerate(fld.components):
        for exps, c in p.items():
            i = list(exps).index(1)
            value = _to_fraction(c)
            m[j, i] = -Rational(value.numerator, value.denominator)
    return m


def is_antisymmetric(m: Matrix) -> bool:
    return (m + m.T).is_zero_matrix


# ---------------------------------------------------------------------------
# 闭包
# ---------------------------------------------------------------------------

@dataclass
class ClosureReport:
    """括号闭包结果"""

    basis: List[PolyVectorField]
    closed: bool
    rounds: int
    degree_cap: int
    round_cap: int
    brackets_evaluated: int = 0
    offending_degree: Optional[int] = None
    offending_field: Optional[PolyVectorField] = None
    new_degrees: Dict[int, List[int]] = field(default_factory=dict)

    @property
    def dimension(self) -> int:
        return len(self.basis)

    @property
    def degree_histogram(self) -> Dict[int, int]:
        hist: Dict[int, int] = {}
        for f in self.basis:
            hist[f.degree()] = hist.get(f.degree(), 0) + 1
        return dict(sorted(hist.items()))

    @property
    def max_degree(self) -> int:
        return max((f.degree() for f in self.basis), default=-1)

    def to_dict(self, include_basis: bool = True) -> Dict[str, Any]:
        payload: Dict[str, Any] = {
            "dimension": self.dimension,
            "closed": self.closed,
            "rounds": self.rounds,
            "degree_cap": self.degree_cap,
            "round_cap": self.round_cap,
            "brackets_evaluated": self.brackets_evaluated,
            "degree_histogram": {str(k): v for k, v in self.degree_histogram.items()},
            "new_degrees": {str(k): v for k, v in sorted(self.new_degrees.items())},
            "offending_degree": self.offending_degree,
            "offending_field": self.offending_field.to_dict() if self.offending_field else None,
        }
        if include_basis:
            payload["basis"] = [f.to_dict() for f in self.basis]
        return payload


def closure(
    generators: Sequence[PolyVectorField],
    degree_cap: Optional[int] = None,
    round_cap: Optional[int] = None,
) -> ClosureReport:
    """
    迭代计算所有括号，以精确秩检验扩充基，直到某轮不再产生新的无关场

    每轮以上一轮新增的场（按次数降序）对本轮开始时的基（按次数升序）求括号。
    次数超过 degree_cap 的括号不并入基，只记录第一个；出现这样的括号后仍算完本轮，然后停止。
    任何一轮并入次数大于 2 的无关场，或括号超过上限，都报告 closed=False；
    没有超限括号时，记录的是第一个次数大于 2 的无关场。

    Args:
        generators: 生成元
        degree_cap: 次数上限，缺省取 Config.DEGREE_CAP
        round_cap: 轮数上限，缺省取 Config.ROUND_CAP

    Returns:
        ClosureReport
    """
    degree_cap = Config.DEGREE_CAP if degree_cap is None else degree_cap
    round_cap = Config.ROUND_CAP if round_cap is None else round_cap
    if not generators:
        raise ContractViolationError("closure needs at least one generator")
    if round_cap < 1:
        raise ContractViolationError("round_cap must be >= 1")
    top = max(g.degree() for g in generators)
    if degree_cap < top:
        raise ContractViolationError(f"degree_cap {degree_cap} is below generator degree {top}")

    echelon = EchelonBasis()
    basis: List[PolyVectorField] = []
    for g in generators:
        if not g.is_zero() and echelon.add(g.coefficient_vector()) is not None:
            basis.append(g)

    report = ClosureReport(basis=basis, closed=False, rounds=0, degree_cap=degree_cap, round_cap=round_cap)
    frontier = list(range(len(basis)))
    done = set()
    over_cap: Optional[PolyVectorField] = None
    nonconformal: Optional[PolyVectorField] = next((g for g in basis if g.degree() > CONFORMAL_DEGREE), None)
    logger.info(f"开始闭包计算: {len(generators)} 个生成元, 次数上限 {degree_cap}, 轮数上限 {round_cap}")

    while report.rounds < round_cap:
        report.rounds += 1
        snapshot = sorted(range(len(basis)), key=lambda k: (basis[k].degree(), k))
        added: List[int] = []
        for fi in sorted(frontier, key=lambda k: (-basis[k].degree(), k)):
            for bj in snapshot:
                pair = (min(fi, bj), max(fi, bj))
                if fi == bj or pair in done:
                    continue
                done.add(pair)
                br = bracket(basis[fi], basis[bj])
                report.brackets_evaluated += 1
                if br.is_zero():
                    continue
                deg = br.degree()
                if deg > degree_cap:
                    if over_cap is None:
                        over_cap = br
                        logger.info(f"第 {report.rounds} 轮出现 {deg} 次场 {br.name}，超过上限，算完本轮后停止")
                    continue
                if echelon.add(br.coefficient_vector()) is not None:
                    basis.append(br)
                    added.append(len(basis) - 1)
                    if nonconformal is None and deg > CONFORMAL_DEGREE:
                        nonconformal = br
        report.new_degrees[report.rounds] = sorted({basis[k].degree() for k in added})
        logger.debug(f"第 {report.rounds} 轮新增 {len(added)} 个场，当前维数 {len(basis)}")
        if over_cap is not None or not added:
            break
        frontier = added

    witness = over_cap if over_cap is not None else nonconformal
    if witness is not None:
        report.offending_degree = witness.degree()
        report.offending_field = witness
    else:
        report.closed = not added
    logger.info(f"闭包计算结束: 维数 {report.dimension}, closed={report.closed}")
    return report


def render_field_table(fields: Sequence[PolyVectorField]) -> str:
    """每个场一行：名称 | 坐标表达式"""
    return _render_rows([{"name": f.name, "expression": f.expression()} for f in fields])


def octonion_linear_table() -> str:
    """八元数线性场表：X^(0)、X^{0_R}_1..7、X^{0_L}_1..7"""
    gens = riccati_generators(AlgebraTag.O)
    rows = [f for f in gens if f.name == "X^{(0)}"]
    rows += [f for f in gens if f.name.startswith("X^{0_R}")]
    rows += [f for f in gens if f.name.startswith("X^{0_L}")]
    return render_field_table(rows)
