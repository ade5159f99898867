"""
Riccati 求解服务模块
提供 NDA Riccati 方程的右端求值、RK4 积分、实叠加公式以及共形形式转换
"""
import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import ValidationError

from ..config import Config
from ..exceptions import ContractViolationError, ExpressionParseError, SingularCombinationError
from ..utils.expressions import CoeffFn, RiccatiSpecFile
from ..utils.report_utils import format_scalar, write_csv
from .algebra import AlgebraElement, AlgebraTag, StructureConstants, build_algebra

logger = logging.getLogger(__name__)


def is_exact_scalar(value: Any) -> bool:
    return isinstance(value, (int, Fraction)) and not isinstance(value, bool)


@dataclass(frozen=True)
class RiccatiSpec:
    """da/dt = b⁻(t) + b^{0_L}(t)a + a b^{0_R}(t) + (a b⁺(t)) a"""

    algebra: AlgebraTag
    b_minus: CoeffFn
    b_0L: CoeffFn
    b_0R: CoeffFn
    b_plus: CoeffFn

    def __post_init__(self):
        object.__setattr__(self, "algebra", AlgebraTag.parse(self.algebra))
        for name in ("b_minus", "b_0L", "b_0R", "b_plus"):
            if getattr(self, name).dim != self.algebra.dim:
                raise ContractViolationError(f"{name} does not live in {self.algebra.value}")

    @classmethod
    def zero(cls, tag: AlgebraTag) -> "RiccatiSpec":
        tag = AlgebraTag.parse(tag)
        z = CoeffFn.zero(tag.dim)
        return cls(tag, z, z, z, z)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "RiccatiSpec":
        """
        从规格映射构造

        Raises:
            ExpressionParseError: 字段缺失、未知键或表达式非法
        """
        try:
            model = RiccatiSpecFile.model_validate(data)
        except ValidationError as e:
            raise ExpressionParseError(f"Invalid Riccati spec: {e}") from None
        tag = AlgebraTag.parse(model.algebra)
        return cls(
            tag,
            CoeffFn.parse(tag.dim, model.b_minus),
            CoeffFn.parse(tag.dim, model.b_0L),
            CoeffFn.parse(tag.dim, model.b_0R),
            CoeffFn.parse(tag.dim, model.b_plus),
        )

    @property
    def sc(self) -> StructureConstants:
        return build_algebra(self.algebra)

    def is_exact(self) -> bool:
        return all(f.is_exact() for f in (self.b_minus, self.b_0L, self.b_0R, self.b_plus))

    def coefficients(self, t: Any, exact: bool = False) -> Tuple[List, List, List, List]:
        return tuple(f.evaluate(t, exact) for f in (self.b_minus, self.b_0L, self.b_0R, self.b_plus))

    def to_dict(self) -> Dict[str, Any]:
        return {
            "algebra": self.algebra.value,
            "b_minus": self.b_minus.to_node(),
            "b_0L": self.b_0L.to_node(),
            "b_0R": self.b_0R.to_node(),
            "b_plus": self.b_plus.to_node(),
        }


def initial_state(tag: AlgebraTag, raw: Optional[Sequence[Any]]) -> AlgebraElement:
    """规格文件中的初值；缺省为零元素"""
    tag = AlgebraTag.parse(tag)
    if raw is None:
        return AlgebraElement.zero(tag)
    return AlgebraElement.from_json(tag, raw)


def _rhs_lists(sc: StructureConstants, coeffs, a: Sequence) -> List:
    bm, bl, br, bp = coeffs
    left = sc.multiply(bl, a)
    right = sc.multiply(a, br)
    quad = sc.multiply(sc.multiply(a, bp), a)
    return [w + x + y + z for w, x, y, z in zip(bm, left, right, quad)]


def _rhs_array(sc: StructureConstants, coeffs, a: np.ndarray) -> np.ndarray:
    bm, bl, br, bp = coeffs
    mul = sc.multiply_array
    return bm + mul(bl, a) + mul(a, br) + mul(mul(a, bp), a)


def rhs(spec: RiccatiSpec, t: Any, a: AlgebraElement) -> AlgebraElement:
    """
    求值 Riccati 方程右端

    Args:
        spec: Riccati 规格
        t: 时间
        a: 当前状态

    Returns:
        b⁻(t) + b^{0_L}(t)a + a b^{0_R}(t) + (a b⁺(t)) a；
        规格、t 与 a 均为精确有理数时结果精确，否则为浮点
    """
    if a.algebra != spec.algebra:
        raise ContractViolationError("State and spec live in different algebras")
    sc = spec.sc
    if a.is_exact() and is_exact_scalar(t) and spec.is_exact():
        coeffs = spec.coefficients(Fraction(t), exact=True)
        return AlgebraElement(spec.algebra, tuple(_rhs_lists(sc, coeffs, a.coeffs)))
    coeffs = tuple(np.asarray(c, dtype=float) for c in spec.coefficients(t))
    return AlgebraElement.from_array(spec.algebra, _rhs_array(sc, coeffs, a.as_array()))


def alternativity_gap(spec: RiccatiSpec, t: Any, a: AlgebraElement) -> AlgebraElement:
    """(a b⁺) a − a (b⁺ a)，由交错性应为零"""
    exact = a.is_exact() and is_exact_scalar(t) and spec.b_plus.is_exact()
    bp = AlgebraElement(spec.algebra, tuple(spec.b_plus.evaluate(t, exact=exact)))
    return (a * bp) * a - a * (bp * a)


# ---------------------------------------------------------------------------
# 积分
# ---------------------------------------------------------------------------

@dataclass(eq=False)
class Trajectory:
    """定步长积分得到的轨迹"""

    algebra: AlgebraTag
    times: np.ndarray
    states: np.ndarray
    step: float
    method: str = "rk4"
    blowup: bool = False

    def __post_init__(self):
        if len(self.times) != len(self.states):
            raise ContractViolationError("times and states differ in length")

    def __len__(self) -> int:
        return len(self.times)

    def state(self, k: int) -> AlgebraElement:
        return AlgebraElement.from_array(self.algebra, self.states[k])

    def final(self) -> AlgebraElement:
        return self.state(-1)

    def elements(self) -> List[AlgebraElement]:
        return [self.state(k) for k in range(len(self))]

    def header(self) -> List[str]:
        return ["t"] + [f"x_{i}" for i in range(self.states.shape[1])]

    def rows(self) -> List[List[float]]:
        return [[float(t)] + [float(v) for v in s] for t, s in zip(self.times, self.states)]

    def to_csv(self, path: Path) -> int:
        return write_csv(self.header(), self.rows(), path)

    def summary(self) -> Dict[str, Any]:
        return {
            "points": len(self),
            "t_start": float(self.times[0]),
            "t_end": float(self.times[-1]),
            "step": self.step,
            "method": self.method,
            "blowup": self.blowup,
            "final": [float(v) for v in self.states[-1]],
        }


def integrate_system(
    f: Callable[[float, np.ndarray], np.ndarray],
    y0: np.ndarray,
    t0: float,
    t1: float,
    step: float,
    bound: Optional[float] = None,
) -> Tuple[np.ndarray, np.ndarray, float, bool]:
    """
    经典四阶 Runge–Kutta 定步长积分

    步数 n = ceil((t1 − t0)/step)，实际步长 h = (t1 − t0)/n。
    状态范数超过 bound 或出现非有限值时截断并置 blow-up 标志。

    Returns:
        (times, states, h, blowup)
    """
    if step <= 0:
        raise ContractViolationError("step must be positive")
    if t1 <= t0:
        raise ContractViolationError("t1 must be greater than t0")
    bound = Config.BLOWUP_BOUND if bound is None else bound
    n = max(1, math.ceil((t1 - t0) / step - 1e-9))
    h = (t1 - t0) / n
    y = np.asarray(y0, dtype=float)
    times = [t0]
    states = [y]
    blowup = False
    with np.errstate(over="ignore", invalid="ignore"):
        for k in range(n):
            t = t0 + k * h
            k1 = f(t, y)
            k2 = f(t + h / 2, y + (h / 2) * k1)
            k3 = f(t + h / 2, y + (h / 2) * k2)
            k4 = f(t + h, y + h * k3)
            y = y + (h / 6) * (k1 + 2 * k2 + 2 * k3 + k4)
            if not np.all(np.isfinite(y)) or np.linalg.norm(y) > bound:
                logger.warning(f"t={t + h:.6g} 处状态超过界 {bound:g}，轨迹截断")
                blowup = True
                break
            times.append(t0 + (k + 1) * h)
            states.append(y)
    return np.array(times), np.array(states), h, blowup


def integrate(
    spec: RiccatiSpec,
    a0: AlgebraElement,
    t0: float,
    t1: float,
    step: Optional[float] = None,
    bound: Optional[float] = None,
) -> Trajectory:
    """
    RK4 积分 Riccati 方程

    Args:
        spec: Riccati 规格
        a0: 初值
        t0: 起始时间
        t1: 终止时间
        step: 步长，缺省取 Config.DEFAULT_STEP
        bound: blow-up 范数界，缺省取 Config.BLOWUP_BOUND

    Returns:
        Trajectory；发生 blow-up 时截断并置标志
    """
    if a0.algebra != spec.algebra:
        raise ContractViolationError("Initial state and spec live in different algebras")
    step = Config.DEFAULT_STEP if step is None else step
    sc = spec.sc

    def f(t: float, y: np.ndarray) -> np.ndarray:
        coeffs = tuple(f_.evaluate_array(t) for f_ in (spec.b_minus, spec.b_0L, spec.b_0R, spec.b_plus))
        return _rhs_array(sc, coeffs, y)

    logger.info(f"积分 {spec.algebra.value} Riccati 方程: t ∈ [{t0}, {t1}], 步长 {step}")
    times, states, h, blowup = integrate_system(f, a0.as_array(), float(t0), float(t1), step, bound)
    return Trajectory(spec.algebra, times, states, h, blowup=blowup)


# ---------------------------------------------------------------------------
# 实 Riccati 方程的叠加公式
# ---------------------------------------------------------------------------

def superposition_real(x1: Any, x2: Any, x3: Any, k: Any) -> Any:
    """
    x = [x1(x3 − x2) + k·x2(x3 − x1)] / [x3 − x2 + k(x3 − x1)]

    Raises:
        SingularCombinationError: 分母为零
    """
    den = x3 - x2 + k * (x3 - x1)
    if den == 0:
        raise SingularCombinationError("x3 - x2 + k(x3 - x1) vanishes")
    if all(is_exact_scalar(v) for v in (x1, x2, x3, k)):
        den = Fraction(den)
    return (x1 * (x3 - x2) + k * x2 * (x3 - x1)) / den


def superposition_curve(x1: np.ndarray, x2: np.ndarray, x3: np.ndarray, k: float) -> np.ndarray:
    """逐点应用叠加公式"""
    den = x3 - x2 + k * (x3 - x1)
    if np.any(den == 0):
        raise SingularCombinationError("x3 - x2 + k(x3 - x1) vanishes on the grid")
    return (x1 * (x3 - x2) + k * x2 * (x3 - x1)) / den


def check_superposition(
    spec: RiccatiSpec,
    initials: Sequence[float],
    k: float,
    t0: float = 0.0,
    t1: float = 1.0,
    step: Optional[float] = None,
) -> Dict[str, Any]:
    """
    由三个特解组合出的曲线与以组合初值直接积分的解对比

    Returns:
        {"x0": 组合初值, "max_error": 上确界误差, "blowup": 是否有轨迹截断}
    """
    if spec.algebra != AlgebraTag.R:
        raise ContractViolationError("The closed-form superposition rule is stated for real Riccati equations")
    if len(initials) != 3:
        raise ContractViolationError("Exactly three particular solutions are needed")
    runs = [integrate(spec, AlgebraElement(AlgebraTag.R, (float(x),)), t0, t1, step) for x in initials]
    x0 = superposition_real(*(float(x) for x in initials), float(k))
    direct = integrate(spec, AlgebraElement(AlgebraTag.R, (x0,)), t0, t1, step)
    blowup = direct.blowup or any(r.blowup for r in runs)
    n = min(len(direct), *(len(r) for r in runs))
    combined = superposition_curve(*(r.states[:n, 0] for r in runs), float(k))
    error = float(np.max(np.abs(combined - direct.states[:n, 0])))
    logger.info(f"叠加公式检验: x0={x0:.6g}, 最大误差 {error:.3e}")
    return {"x0": x0, "k": float(k), "max_error": error, "blowup": blowup, "points": n}


# ---------------------------------------------------------------------------
# 共形 Riccati 形式
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ConformalSpec:
    """
    dξ/dt = a(t) + λ(t)ξ + Ω(t)ξ + c(t)⟨ξ,ξ⟩ − 2⟨c(t),ξ⟩ξ

    Ω(t) 由左右旋转部分 u(t)、v(t) 给出：Ω(t)x = u(t)x + x v(t)，u、v 为纯虚元素，故 Ω 反对称。
    """

    algebra: AlgebraTag
    lambda_coeff: CoeffFn
    a_coeff: CoeffFn
    c_coeff: CoeffFn
    left_rotation: CoeffFn
    right_rotation: CoeffFn

    @property
    def n(self) -> int:
        return self.algebra.dim

    @classmethod
    def zero(cls, tag: AlgebraTag) -> "ConformalSpec":
        tag = AlgebraTag.parse(tag)
        z = CoeffFn.zero(tag.dim)
        return cls(tag, CoeffFn.zero(1), z, z, z, z)

    def is_exact(self) -> bool:
        return all(f.is_exact() for f in (self.lambda_coeff, self.a_coeff, self.c_coeff,
                                          self.left_rotation, self.right_rotation))

    def lambda_fn(self, t: Any, exact: bool = False) -> Any:
        return self.lambda_coeff.evaluate(t, exact)[0]

    def a_fn(self, t: Any, exact: bool = False) -> List:
        return self.a_coeff.evaluate(t, exact)

    def c_fn(self, t: Any, exact: bool = False) -> List:
        return self.c_coeff.evaluate(t, exact)

    def omega_fn(self, t: Any, exact: bool = False) -> List[List]:
        """Ω(t) 的矩阵，列 j 为 T_t(e_j) 的坐标"""
        sc = build_algebra(self.algebra)
        u = self.left_rotation.evaluate(t, exact)
        v = self.right_rotation.evaluate(t, exact)
        n = self.n
        zero = Fraction(0) if exact else 0.0
        omega = [[zero] * n for _ in range(n)]
        for j in range(n):
            for i in range(n):
                if u[i]:
                    sign, k = sc.product(i, j)
                    omega[k][j] += sign * u[i]
                if v[i]:
                    sign, k = sc.product(j, i)
                    omega[k][j] += sign * v[i]
        return omega

    def antisymmetry_residual(self, t: Any, exact: bool = False) -> Any:
        """‖Ω + Ωᵀ‖_∞"""
        omega = self.omega_fn(t, exact)
        n = self.n
        return max(abs(omega[i][j] + omega[j][i]) for i in range(n) for j in range(n))

    def to_dict(self) -> Dict[str, Any]:
        return {
            "n": self.n,
            "lambda": self.lambda_coeff.to_node(),
            "a": self.a_coeff.to_node(),
            "c": self.c_coeff.to_node(),
            "omega_left": self.left_rotation.to_node(),
            "omega_right": self.right_rotation.to_node(),
        }


def to_conformal(spec: RiccatiSpec) -> ConformalSpec:
    """
    λ = b^{0_L}_0 + b^{0_R}_0；a = b⁻；c = −(b⁺)*；Ω = vec(b^{0_L})·(·) + (·)·vec(b^{0_R})
    """
    n = spec.algebra.dim

    def scalar_of(v):
        return [v[0]]

    def vector_of(v):
        return [v[0] * 0] + list(v[1:])

    def minus_conj(v):
        return [-v[0]] + list(v[1:])

    lam = spec.b_0L.map_linear(1, scalar_of) + spec.b_0R.map_linear(1, scalar_of)
    return ConformalSpec(
        algebra=spec.algebra,
        lambda_coeff=lam,
        a_coeff=spec.b_minus,
        c_coeff=spec.b_plus.map_linear(n, minus_conj),
        left_rotation=spec.b_0L.map_linear(n, vector_of),
        right_rotation=spec.b_0R.map_linear(n, vector_of),
    )


def conformal_rhs(cs: ConformalSpec, t: Any, xi: Sequence[Any]) -> List:
    """
    求值共形 Riccati 右端，⟨·,·⟩ 为欧氏内积

    Raises:
        ContractViolationError: ξ 的维数与 cs.n 不符
    """
    if len(xi) != cs.n:
        raise ContractViolationError(f"xi has {len(xi)} entries, expected {cs.n}")
    exact = all(is_exact_scalar(v) for v in xi) and is_exact_scalar(t) and cs.is_exact()
    if exact:
        t = Fraction(t)
        xi = [Fraction(v) for v in xi]
    else:
        xi = [float(v) for v in xi]
    a = cs.a_fn(t, exact)
    c = cs.c_fn(t, exact)
    lam = cs.lambda_fn(t, exact)
    omega = cs.omega_fn(t, exact)
    xx = sum(v * v for v in xi)
    cx = sum(p * q for p, q in zip(c, xi))
    out = []
    for k in range(cs.n):
        rot = sum(omega[k][j] * xi[j] for j in range(cs.n))
        out.append(a[k] + lam * xi[k] + rot + c[k] * xx - 2 * cx * xi[k])
    return out


def quadratic_identity_check(b_plus: AlgebraElement, a: AlgebraElement) -> float:
    """
    ‖(a b⁺)a − 2g((b⁺)*, a) a + (b⁺)* g(a, a)‖

    精确载体上残差的平方范数为精确零时返回 0.0。
    """
    if b_plus.algebra != a.algebra:
        raise ContractViolationError("Operands live in different algebras")
    bc = b_plus.conj()
    residual = (a * b_plus) * a - (2 * bc.inner(a)) * a + a.inner(a) * bc
    return residual.norm()


def random_polynomial_spec(tag: AlgebraTag, rng: np.random.Generator, degree: int = 2) -> RiccatiSpec:
    """多项式系数的随机规格，供共形形式等式检验"""
    n = tag.dim

    def coeff():
        rows = [[f"{int(rng.integers(-9, 10))}/{int(rng.integers(1, 10))}" for _ in range(n)]
                for _ in range(degree + 1)]
        return CoeffFn.parse(n, {"type": "polynomial", "params": {"coeffs": rows}})

    return RiccatiSpec(tag, coeff(), coeff(), coeff(), coeff())


def check_conformal(
    spec: RiccatiSpec,
    samples: int,
    seed: int,
    exact: Optional[bool] = None,
) -> Dict[str, Any]:
    """
    在随机 (t, a) 上比较 rhs 与 conformal_rhs(to_conformal(spec))，并检查 Ω 的反对称性

    Args:
        spec: Riccati 规格
        samples: 样本数
        seed: 随机种子
        exact: 缺省时规格可精确求值即用精确有理数

    Returns:
        {"samples", "exact", "max_residual", "antisymmetry_residual"}
    """
    if samples < 1:
        raise ContractViolationError("samples must be >= 1")
    exact = spec.is_exact() if exact is None else exact
    if exact and not spec.is_exact():
        raise ContractViolationError("Spec contains sin/exp terms; use float mode")
    rng = np.random.default_rng(seed)
    cs = to_conformal(spec)
    tag = spec.algebra
    worst: Any = Fraction(0) if exact else 0.0
    anti: Any = Fraction(0) if exact else 0.0
    for _ in range(samples):
        if exact:
            t = Fraction(int(rng.integers(-20, 21)), int(rng.integers(1, 11)))
            a = AlgebraElement(tag, tuple(Fraction(int(rng.integers(-9, 10)), int(rng.integers(1, 10)))
                                          for _ in range(tag.dim)))
        else:
            t = float(rng.uniform(-2.0, 2.0))
            v = rng.standard_normal(tag.dim)
            a = AlgebraElement.from_array(tag, v / np.linalg.norm(v))
        lhs = rhs(spec, t, a).coeffs
        rhs_conf = conformal_rhs(cs, t, a.coeffs)
        worst = max(worst, max(abs(p - q) for p, q in zip(lhs, rhs_conf)))
        anti = max(anti, cs.antisymmetry_residual(t, exact))
    logger.info(f"共形形式检验 ({tag.value}): 最大残差 {float(worst):.3e}")
    return {
        "samples": samples,
        "exact": exact,
        "max_residual": format_scalar(worst) if exact else float(worst),
        "antisymmetry_residual": format_scalar(anti) if exact else float(anti),
    }


def conformal_dimension(tag: AlgebraTag) -> int:
    """conf(ℝⁿ) 的维数 (n+1)(n+2)/2"""
    n = AlgebraTag.parse(tag).dim
    return (n + 1) * (n + 2) // 2
