"""
辛结构检验服务模块
提供径向坐标下的辛形式、实系数 Riccati 场的 Hamilton 函数、Poisson 括号以及常系数不变 2-形式的求解
"""
import logging
from dataclasses import dataclass
from itertools import combinations
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
import sympy
from sympy import Expr, Matrix, Symbol

from ..exceptions import ContractViolationError
from .algebra import AlgebraTag, build_algebra
from .vector_fields import PolyVectorField, _to_fraction, coordinate_field, coordinate_ring, lift_field

logger = logging.getLogger(__name__)

RHO = Symbol("rho", positive=True)


@dataclass(frozen=True)
class RadialChart:
    """
    径向局部坐标 (o_0, ρ, 球面坐标...)，ρ = sqrt(Σ_{i≥1} o_i²)

    球面坐标约定保持抽象：三个径向场没有角向分量，约定不影响任何检验。
    """

    name: str
    coordinates: Tuple[Symbol, ...]
    polar: Optional[Symbol] = None

    @property
    def scalar(self) -> Symbol:
        return self.coordinates[0]

    @property
    def rho(self) -> Symbol:
        return self.coordinates[1]

    def valid(self, point: Dict[Symbol, float]) -> bool:
        """排除 ρ ≤ 0；带极角的图卡还排除 sin θ = 0"""
        if not point[self.rho] > 0:
            return False
        if self.polar is not None and np.sin(point[self.polar]) == 0:
            return False
        return True


def octonionic_chart() -> RadialChart:
    o0, alpha, beta, gamma, psi, theta, phi = sympy.symbols("o_0 alpha beta gamma psi theta phi", real=True)
    return RadialChart("octonionic", (o0, RHO, alpha, beta, gamma, psi, theta, phi))


def quaternionic_chart() -> RadialChart:
    q0, theta, phi = sympy.symbols("q_0 theta phi", real=True)
    return RadialChart("quaternionic", (q0, RHO, theta, phi), polar=theta)


@dataclass(frozen=True)
class ChartField:
    """径向图卡上的向量场，components 与 chart.coordinates 对齐"""

    name: str
    chart: RadialChart
    components: Tuple[Expr, ...]

    def apply(self, f: Expr) -> Expr:
        """X(f)"""
        return sympy.simplify(sum(c * sympy.diff(f, x) for c, x in zip(self.components, self.chart.coordinates)))


def chart_bracket(x: ChartField, y: ChartField) -> ChartField:
    coords = x.chart.coordinates
    comps = []
    for j in range(len(coords)):
        value = sum(
            x.components[i] * sympy.diff(y.components[j], coords[i])
            - y.components[i] * sympy.diff(x.components[j], coords[i])
            for i in range(len(coords))
        )
        comps.append(sympy.simplify(value))
    return ChartField(f"[{x.name},{y.name}]", x.chart, tuple(comps))


def _radial_fields(chart: RadialChart, label: str) -> List[ChartField]:
    s, r = chart.scalar, chart.rho
    rest = (sympy.Integer(0),) * (len(chart.coordinates) - 2)
    return [
        ChartField(f"X^-_{label}", chart, (sympy.Integer(1), sympy.Integer(0)) + rest),
        ChartField(f"X^(0)_{label}", chart, (s, r) + rest),
        ChartField(f"X^+_{label}", chart, (s ** 2 - r ** 2, 2 * s * r) + rest),
    ]


def real_octonionic_fields() -> List[ChartField]:
    """X⁻ = ∂/∂o_0，X⁰ = o_0∂/∂o_0 + ρ∂/∂ρ，X⁺ = (o_0² − ρ²)∂/∂o_0 + 2o_0ρ∂/∂ρ"""
    return _radial_fields(octonionic_chart(), "O")


def real_quaternionic_fields() -> List[ChartField]:
    """(q_0, ρ, θ, φ) 图卡中的同一组场"""
    return _radial_fields(quaternionic_chart(), "H")


def cartesian_real_fields(tag: AlgebraTag) -> List[PolyVectorField]:
    """
    笛卡尔坐标下的三个场：∂/∂o_0、Σ o_i∂/∂o_i、(o_0² − Σ_{i≥1} o_i²)∂/∂o_0 + 2o_0 Σ_{i≥1} o_i∂/∂o_i
    """
    tag = AlgebraTag.parse(tag)
    n = tag.dim
    o = coordinate_ring(n).gens
    minus = coordinate_field(n, {0: 1}, "X^-", -1)
    euler = coordinate_field(n, {i: o[i] for i in range(n)}, "X^(0)", 0)
    plus_terms = {0: o[0] ** 2 - sum((o[i] ** 2 for i in range(1, n)), coordinate_ring(n).zero)}
    plus_terms.update({i: 2 * o[0] * o[i] for i in range(1, n)})
    plus = coordinate_field(n, plus_terms, "X^+", 1)
    return [minus, euler, plus]


def square_field(tag: AlgebraTag) -> PolyVectorField:
    """λ_o(o²)"""
    return lift_field("o*o", build_algebra(AlgebraTag.parse(tag)), "λ(o²)", 1)


@dataclass(frozen=True)
class SymplecticForm:
    """分块辛形式 Σ w(x, y) dx∧dy"""

    name: str
    chart: RadialChart
    blocks: Tuple[Tuple[Symbol, Symbol, Expr], ...]

    def matrix(self) -> Matrix:
        """反对称系数矩阵 W，ω = ½ Σ W_ij dx_i∧dx_j"""
        coords = self.chart.coordinates
        index = {c: k for k, c in enumerate(coords)}
        m = sympy.zeros(len(coords), len(coords))
        for x, y, w in self.blocks:
            m[index[x], index[y]] += w
            m[index[y], index[x]] -= w
        return m

    def is_antisymmetric(self) -> bool:
        m = self.matrix()
        return (m + m.T).is_zero_matrix

    def is_closed(self) -> bool:
        """dω = 0：∂_i W_jk + ∂_j W_ki + ∂_k W_ij = 0"""
        m = self.matrix()
        coords = self.chart.coordinates
        for i, j, k in combinations(range(len(coords)), 3):
            value = (sympy.diff(m[j, k], coords[i]) + sympy.diff(m[k, i], coords[j])
                     + sympy.diff(m[i, j], coords[k]))
            if sympy.simplify(value) != 0:
                return False
        return True

    def is_nondegenerate(self) -> bool:
        return sympy.simplify(self.matrix().det()) != 0

    def contract(self, field: ChartField) -> List[Expr]:
        """i_X ω 的系数：(i_X ω)_j = Σ_i X^i W_ij"""
        m = self.matrix()
        n = len(self.chart.coordinates)
        return [sympy.simplify(sum(field.components[i] * m[i, j] for i in range(n))) for j in range(n)]


def octonion_form() -> SymplecticForm:
    """ω_O = do_0∧dρ/ρ² + dα∧dβ + dγ∧dψ + dθ∧dφ"""
    chart = octonionic_chart()
    o0, rho, alpha, beta, gamma, psi, theta, phi = chart.coordinates
    one = sympy.Integer(1)
    return SymplecticForm(
        "omega_O",
        chart,
        ((o0, rho, 1 / rho ** 2), (alpha, beta, one), (gamma, psi, one), (theta, phi, one)),
    )


def quaternion_form() -> SymplecticForm:
    """ω_H = dq_0∧dρ/ρ² + sin θ dθ∧dφ"""
    chart = quaternionic_chart()
    q0, rho, theta, phi = chart.coordinates
    return SymplecticForm("omega_H", chart, ((q0, rho, 1 / rho ** 2), (theta, phi, sympy.sin(theta))))


@dataclass
class HamiltonianResult:
    """i_X ω = df 的求解结果"""

    field: str
    form: str
    function: Optional[Expr]
    status: str

    def to_dict(self) -> Dict[str, Any]:
        return {
            "field": self.field,
            "form": self.form,
            "function": None if self.function is None else str(self.function),
            "status": self.status,
        }


def hamiltonian_of(field: ChartField, omega: SymplecticForm) -> HamiltonianResult:
    """
    求 f 使 i_X ω = df

    i_X ω 不闭时返回 status="non_hamiltonian"；否则逐坐标积分得到 f（相差常数），
    并符号验证 df − i_X ω = 0。
    """
    if field.chart != omega.chart:
        raise ContractViolationError("Field and form use different charts")
    coords = omega.chart.coordinates
    alpha = omega.contract(field)

    for i, j in combinations(range(len(coords)), 2):
        if sympy.simplify(sympy.diff(alpha[j], coords[i]) - sympy.diff(alpha[i], coords[j])) != 0:
            logger.info(f"{field.name} 关于 {omega.name} 不是 Hamilton 场")
            return HamiltonianResult(field.name, omega.name, None, "non_hamiltonian")

    f: Expr = sympy.Integer(0)
    for k, x in enumerate(coords):
        remainder = sympy.simplify(alpha[k] - sympy.diff(f, x))
        if remainder != 0:
            f = f + sympy.integrate(remainder, x)
    f = sympy.simplify(f)

    residual = [sympy.simplify(sympy.diff(f, x) - a) for x, a in zip(coords, alpha)]
    status = "hamiltonian" if all(r == 0 for r in residual) else "unverified"
    return HamiltonianResult(field.name, omega.name, f, status)


def poisson(f: Expr, g: Expr, omega: SymplecticForm) -> Expr:
    """{f, g} = Σ_blocks (∂_x f ∂_y g − ∂_y f ∂_x g) / w"""
    value = sum(
        (sympy.diff(f, x) * sympy.diff(g, y) - sympy.diff(f, y) * sympy.diff(g, x)) / w
        for x, y, w in omega.blocks
    )
    return sympy.simplify(value)


def lie_derivative_check(
    field: ChartField,
    omega: SymplecticForm,
    samples: int,
    seed: int = 0,
) -> Dict[str, Any]:
    """
    L_X ω = d(i_X ω)（ω 闭）在采样点上的最大残差；落在 ρ ≤ 0 等排除区域的样本跳过并计数

    Returns:
        {"field", "form", "residual", "status", "samples", "skipped"}
    """
    coords = omega.chart.coordinates
    alpha = omega.contract(field)
    d_alpha = [
        sympy.simplify(sympy.diff(alpha[j], coords[i]) - sympy.diff(alpha[i], coords[j]))
        for i, j in combinations(range(len(coords)), 2)
    ]
    nonzero = [e for e in d_alpha if e != 0]

    rng = np.random.default_rng(seed)
    residual = 0.0
    skipped = 0
    for _ in range(samples):
        point = {c: float(rng.uniform(-2.0, 2.0)) for c in coords}
        point[omega.chart.rho] = float(rng.uniform(-0.5, 2.0))
        if not omega.chart.valid(point):
            skipped += 1
            continue
        for expr in nonzero:
            residual = max(residual, abs(float(expr.subs(point))))
    if skipped:
        logger.warning(f"{skipped} 个样本落在排除区域，已跳过")
    status = "ok" if residual < 1e-12 else "failed"
    return {
        "field": field.name,
        "form": omega.name,
        "residual": residual,
        "status": status,
        "samples": samples,
        "skipped": skipped,
    }


def invariant_constant_forms(fields: Sequence[PolyVectorField]) -> List[Matrix]:
    """
    求所有常系数 2-形式 ω = ½ Σ W_ij do_i∧do_j 使 L_X ω = 0 对每个给定场成立

    (L_X ω)_ij = Σ_k (W_kj ∂_i X^k + W_ik ∂_j X^k)，按单项式展开后为关于 W 的线性方程组。

    Returns:
        解空间的一组基（反对称矩阵）；空列表表示只有零形式
    """
    if not fields:
        raise ContractViolationError("At least one field is needed")
    n = fields[0].dim
    unknowns = {pair: k for k, pair in enumerate(combinations(range(n), 2))}

    def w_index(a: int, b: int) -> Tuple[Optional[int], int]:
        if a == b:
            return None, 0
        return (unknowns[(a, b)], 1) if a < b else (unknowns[(b, a)], -1)

    rows: Dict[Tuple, Dict[int, Any]] = {}
    for fi, fld in enumerate(fields):
        jac = fld.jacobian
        for i, j in combinations(range(n), 2):
            for k in range(n):
                for col, dpoly, (a, b) in ((i, jac[k][i], (k, j)), (j, jac[k][j], (i, k))):
                    idx, sign = w_index(a, b)
                    if idx is None or not dpoly:
                        continue
                    for exps, c in dpoly.items():
                        row = rows.setdefault((fi, i, j, tuple(exps)), {})
                        row[idx] = row.get(idx, 0) + sign * _to_fraction(c)

    m = len(unknowns)
    if rows:
        system = Matrix([[sympy.Rational(row.get(k, 0)) for k in range(m)] for row in rows.values()])
        basis = system.nullspace()
    else:
        basis = [Matrix([1 if k == q else 0 for k in range(m)]) for q in range(m)]

    forms = []
    for vec in basis:
        w = sympy.zeros(n, n)
        for (a, b), k in unknowns.items():
            w[a, b] = vec[k]
            w[b, a] = -vec[k]
        forms.append(w)
    logger.info(f"常系数不变 2-形式空间维数: {len(forms)}")
    return forms


def symplectic_report(tag: AlgebraTag, samples: int = 50, seed: int = 0) -> Dict[str, Any]:
    """
    对 ℍ 或 𝕆 汇总：Hamilton 函数、Poisson 关系、Lie 导数以及常系数不变形式见证

    Returns:
        JSON 可序列化的报告
    """
    tag = AlgebraTag.parse(tag)
    if tag == AlgebraTag.O:
        fields, omega = real_octonionic_fields(), octonion_form()
    elif tag == AlgebraTag.H:
        fields, omega = real_quaternionic_fields(), quaternion_form()
    else:
        raise ContractViolationError("The radial symplectic forms are defined for H and O")

    s, r = omega.chart.scalar, omega.chart.rho
    expected = [-1 / r, -s / r, -(s ** 2 + r ** 2) / r]
    hams = [hamiltonian_of(f, omega) for f in fields]
    checks = []
    for res, fld, target in zip(hams, fields, expected):
        matches = res.function is not None and sympy.simplify(
            sympy.diff(res.function - target, s) ** 2 + sympy.diff(res.function - target, r) ** 2) == 0
        checks.append({**res.to_dict(), "expected": str(target), "matches_expected": bool(matches)})

    fm, f0, fp = expected
    relations = {
        "{f-,f0} = -f-": sympy.simplify(poisson(fm, f0, omega) + fm) == 0,
        "{f-,f+} = -2f0": sympy.simplify(poisson(fm, fp, omega) + 2 * f0) == 0,
        "{f0,f+} = -f+": sympy.simplify(poisson(f0, fp, omega) + fp) == 0,
    }
    lie = [lie_derivative_check(f, omega, samples, seed) for f in fields]

    invariant = invariant_constant_forms(_cartesian_minus_and_euler(tag))

    passed = (
        all(c["status"] == "hamiltonian" and c["matches_expected"] for c in checks)
        and all(relations.values())
        and all(item["status"] == "ok" for item in lie)
        and not invariant
        and omega.is_closed() and omega.is_nondegenerate()
    )
    return {
        "algebra": tag.value,
        "form": omega.name,
        "form_closed": omega.is_closed(),
        "form_nondegenerate": omega.is_nondegenerate(),
        "hamiltonians": checks,
        "poisson_relations": {k: bool(v) for k, v in relations.items()},
        "lie_derivative": lie,
        "invariant_constant_forms": len(invariant),
        "passed": passed,
    }


def _cartesian_minus_and_euler(tag: AlgebraTag) -> List[PolyVectorField]:
    """{X_i⁻} 与 X^(0)"""
    n = tag.dim
    o = coordinate_ring(n).gens
    fields = [coordinate_field(n, {i: 1}, f"X^-_{i}", -1) for i in range(n)]
    fields.append(coordinate_field(n, {i: o[i] for i in range(n)}, "X^{(0)}", 0))
    return fields
