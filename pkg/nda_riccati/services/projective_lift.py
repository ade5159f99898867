"""
射影直线提升服务模块
提供 AP¹ 的两图卡表示、典范投影 π_A、线性提升及其带图卡切换的积分
"""
import logging
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
from pydantic import ValidationError

from ..config import Config
from ..exceptions import ContractViolationError, ExpressionParseError, UnsupportedRestrictionError
from ..utils.expressions import CoeffFn, LiftSpecFile
from ..utils.report_utils import write_csv
from .algebra import AlgebraElement, AlgebraTag, StructureConstants, build_algebra
from .riccati_solver import RiccatiSpec, is_exact_scalar, integrate, integrate_system

logger = logging.getLogger(__name__)


class Chart(str, Enum):
    """D1：w_1 = a_2 a_1⁻¹；D2：w_2 = a_1 a_2⁻¹"""

    D1 = "D1"
    D2 = "D2"

    @property
    def other(self) -> "Chart":
        return Chart.D2 if self is Chart.D1 else Chart.D1


@dataclass(frozen=True)
class ProjPoint:
    """射影直线上的点：图卡与图卡坐标"""

    algebra: AlgebraTag
    chart: Chart
    rep: AlgebraElement

    def switched(self) -> "ProjPoint":
        """图卡转换 rep ↦ rep⁻¹，要求 ‖rep‖ > 0"""
        if self.rep.is_zero():
            raise ContractViolationError("The chart transition is undefined at rep = 0")
        return ProjPoint(self.algebra, self.chart.other, self.rep.inv())

    def d2_coordinate(self) -> AlgebraElement:
        return self.rep if self.chart is Chart.D2 else self.switched().rep


@dataclass(frozen=True)
class LiftState:
    """A²_× 中的点 (a_1, a_2)，不全为零"""

    a1: AlgebraElement
    a2: AlgebraElement

    def __post_init__(self):
        if self.a1.algebra != self.a2.algebra:
            raise ContractViolationError("Lift components live in different algebras")
        if self.a1.is_zero() and self.a2.is_zero():
            raise ContractViolationError("(0, 0) is not a point of the punctured plane")

    @property
    def algebra(self) -> AlgebraTag:
        return self.a1.algebra

    def as_array(self) -> np.ndarray:
        return np.concatenate([self.a1.as_array(), self.a2.as_array()])

    @classmethod
    def from_array(cls, tag: AlgebraTag, y: np.ndarray) -> "LiftState":
        n = AlgebraTag.parse(tag).dim
        return cls(AlgebraElement.from_array(tag, y[:n]), AlgebraElement.from_array(tag, y[n:]))


def project(s: LiftState) -> ProjPoint:
    """
    典范投影：‖a_2‖ ≥ ‖a_1‖ 时取 D2，rep = a_1 a_2⁻¹；否则取 D1，rep = a_2 a_1⁻¹
    """
    if s.a2.norm_squared() >= s.a1.norm_squared():
        return ProjPoint(s.algebra, Chart.D2, s.a1 * s.a2.inv())
    return ProjPoint(s.algebra, Chart.D1, s.a2 * s.a1.inv())


@dataclass(frozen=True)
class LiftSpec:
    """
    2×2 系数 (a11, a12, a21, a22)

    allow_nonlinear 为 True 时，八元数非实 a11/a22 按两分支公式原样求值。
    """

    algebra: AlgebraTag
    a11: CoeffFn
    a12: CoeffFn
    a21: CoeffFn
    a22: CoeffFn
    allow_nonlinear: bool = False

    def __post_init__(self):
        object.__setattr__(self, "algebra", AlgebraTag.parse(self.algebra))
        for name in ("a11", "a12", "a21", "a22"):
            if getattr(self, name).dim != self.algebra.dim:
                raise ContractViolationError(f"{name} does not live in {self.algebra.value}")

    @classmethod
    def from_dict(cls, data: Dict[str, Any], allow_nonlinear: bool = False) -> "LiftSpec":
        try:
            model = LiftSpecFile.model_validate(data)
        except ValidationError as e:
            raise ExpressionParseError(f"Invalid lift spec: {e}") from None
        tag = AlgebraTag.parse(model.algebra)
        return cls(
            tag,
            CoeffFn.parse(tag.dim, model.a11),
            CoeffFn.parse(tag.dim, model.a12),
            CoeffFn.parse(tag.dim, model.a21),
            CoeffFn.parse(tag.dim, model.a22),
            allow_nonlinear,
        )

    @property
    def linear(self) -> bool:
        """除八元数外，或八元数 a11、a22 取实值时，提升系统是线性的"""
        return self.algebra != AlgebraTag.O or (self.a11.is_real() and self.a22.is_real())

    def require_supported(self):
        if not self.linear and not self.allow_nonlinear:
            raise UnsupportedRestrictionError(
                "Octonionic lifts need real a11 and a22 unless allow_nonlinear is set"
            )

    def to_dict(self) -> Dict[str, Any]:
        return {
            "algebra": self.algebra.value,
            "a11": self.a11.to_node(),
            "a12": self.a12.to_node(),
            "a21": self.a21.to_node(),
            "a22": self.a22.to_node(),
            "allow_nonlinear": self.allow_nonlinear,
        }


def riccati_to_lift(spec: RiccatiSpec) -> LiftSpec:
    """
    a12 = b⁻，a11 = b^{0_L}，a22 = b^{0_R}，a21 = b⁺

    Raises:
        UnsupportedRestrictionError: 八元数规格的 b^{0_L} 或 b^{0_R} 不是实值
    """
    lift = LiftSpec(spec.algebra, spec.b_0L, spec.b_minus, spec.b_plus, spec.b_0R)
    lift.require_supported()
    return lift


def _inv_array(x: np.ndarray) -> np.ndarray:
    conj = -x
    conj[0] = x[0]
    return conj / np.dot(x, x)


def _octonion_branch(sc: StructureConstants, a11, a22, o1, o2) -> Tuple[Any, Any]:
    """o_1 o_2 ≠ 0 分支的 a11 项与 a22 项（数组运算）"""
    mul = sc.multiply_array
    q = mul(o1, _inv_array(o2))
    term1 = mul(mul(a11, q), o2)
    inner = mul(_inv_array(o1), mul(q, a22))
    term2 = mul(mul(o2, inner), o2)
    return term1, term2


def _lift_rhs_array(lift: LiftSpec, t: float, y: np.ndarray, threshold: float) -> Tuple[np.ndarray, bool]:
    sc = build_algebra(lift.algebra)
    n = sc.dim
    o1, o2 = y[:n], y[n:]
    a11, a12, a21, a22 = (f.evaluate_array(t) for f in (lift.a11, lift.a12, lift.a21, lift.a22))
    mul = sc.multiply_array
    generic = lift.algebra == AlgebraTag.O and np.linalg.norm(o1) * np.linalg.norm(o2) > threshold
    if generic:
        t11, t22 = _octonion_branch(sc, a11, a22, o1, o2)
    else:
        t11, t22 = mul(a11, o1), mul(a22, o2)
    d1 = t11 + mul(a12, o2)
    d2 = -mul(a21, o1) - t22
    return np.concatenate([d1, d2]), generic


def lift_rhs(lift: LiftSpec, t: Any, s: LiftState) -> Tuple[AlgebraElement, AlgebraElement]:
    """
    提升系统的右端

    ℝ、ℂ、ℍ 为线性系统 (a11 o_1 + a12 o_2, −a21 o_1 − a22 o_2)；
    八元数按两分支求值：o_1 o_2 ≠ 0 时
    o_1' = [a11(o_1 o_2⁻¹)]o_2 + a12 o_2，o_2' = −a21 o_1 − o_2{o_1⁻¹[(o_1 o_2⁻¹)a22]}o_2，
    否则取线性形式。精确状态用零检验选分支，浮点状态用阈值 Config.BRANCH_THRESHOLD。

    Raises:
        UnsupportedRestrictionError: 八元数非实 a11/a22 且未设置 allow_nonlinear
    """
    if s.algebra != lift.algebra:
        raise ContractViolationError("State and lift live in different algebras")
    lift.require_supported()
    exact = (
        s.a1.is_exact() and s.a2.is_exact() and is_exact_scalar(t)
        and all(f.is_exact() for f in (lift.a11, lift.a12, lift.a21, lift.a22))
    )
    if not exact:
        dy, _ = _lift_rhs_array(lift, float(t), s.as_array(), Config.BRANCH_THRESHOLD)
        n = lift.algebra.dim
        return AlgebraElement.from_array(lift.algebra, dy[:n]), AlgebraElement.from_array(lift.algebra, dy[n:])

    tag = lift.algebra
    a11, a12, a21, a22 = (AlgebraElement(tag, tuple(f.evaluate(t, exact=True)))
                          for f in (lift.a11, lift.a12, lift.a21, lift.a22))
    o1, o2 = s.a1, s.a2
    if tag == AlgebraTag.O and not (o1 * o2).is_zero():
        q = o1 * o2.inv()
        t11 = (a11 * q) * o2
        t22 = (o2 * (o1.inv() * (q * a22))) * o2
    else:
        t11, t22 = a11 * o1, a22 * o2
    return t11 + a12 * o2, -(a21 * o1) - t22


def chart_d1_rhs(lift: LiftSpec, t: Any, w1: AlgebraElement) -> AlgebraElement:
    """D1 图卡中的动力学 dw_1/dt = −w_1 a12 w_1 − w_1 a11 − a22 w_1 − a21"""
    exact = w1.is_exact() and is_exact_scalar(t) and all(
        f.is_exact() for f in (lift.a11, lift.a12, lift.a21, lift.a22))
    tag = lift.algebra
    a11, a12, a21, a22 = (AlgebraElement(tag, tuple(f.evaluate(t, exact=exact)))
                          for f in (lift.a11, lift.a12, lift.a21, lift.a22))
    return -((w1 * a12) * w1) - w1 * a11 - a22 * w1 - a21


@dataclass(eq=False)
class ProjectedTrajectory:
    """投影到射影直线上的轨迹"""

    algebra: AlgebraTag
    times: np.ndarray
    charts: List[Chart]
    reps: np.ndarray
    step: float
    chart_switches: int = 0
    continuity_gap: float = 0.0
    branch_switches: int = 0
    blowup: bool = False

    def __len__(self) -> int:
        return len(self.times)

    def point(self, k: int) -> ProjPoint:
        return ProjPoint(self.algebra, self.charts[k], AlgebraElement.from_array(self.algebra, self.reps[k]))

    def d2_coordinates(self) -> np.ndarray:
        """统一换算到 D2 坐标；D1 中 rep = 0（D2 的无穷远点）记为 nan"""
        out = np.array(self.reps, dtype=float)
        for k, chart in enumerate(self.charts):
            if chart is Chart.D1:
                w = self.reps[k]
                out[k] = _inv_array(w) if np.dot(w, w) > 0 else np.nan
        return out

    def to_csv(self, path: Path) -> int:
        header = ["t", "chart"] + [f"w_{i}" for i in range(self.reps.shape[1])]
        rows = ([float(t), c.value] + [float(v) for v in w]
                for t, c, w in zip(self.times, self.charts, self.reps))
        return write_csv(header, rows, path)

    def summary(self) -> Dict[str, Any]:
        return {
            "points": len(self),
            "step": self.step,
            "chart_switches": self.chart_switches,
            "continuity_gap": self.continuity_gap,
            "branch_switches": self.branch_switches,
            "blowup": self.blowup,
            "final_chart": self.charts[-1].value,
            "final_rep": [float(v) for v in self.reps[-1]],
        }


def _chart_rep(sc: StructureConstants, chart: Chart, y: np.ndarray) -> Optional[np.ndarray]:
    n = sc.dim
    num, den = (y[:n], y[n:]) if chart is Chart.D2 else (y[n:], y[:n])
    if not np.dot(den, den) > 0:
        return None
    return sc.multiply_array(num, _inv_array(den))


def lift_integrate_and_project(
    lift: LiftSpec,
    s0: LiftState,
    t0: float,
    t1: float,
    step: Optional[float] = None,
    bound: Optional[float] = None,
) -> ProjectedTrajectory:
    """
    在 A²_× 上积分提升系统并逐点投影

    图卡在 ‖rep‖ 超过 CHART_THRESHOLD·(1 + CHART_HYSTERESIS) 时切换；
    切换处记录 ‖rep_new − rep_old⁻¹‖ 的最大值作为连续性间隙。

    Returns:
        ProjectedTrajectory
    """
    if s0.algebra != lift.algebra:
        raise ContractViolationError("Initial state and lift live in different algebras")
    lift.require_supported()
    step = Config.DEFAULT_STEP if step is None else step
    threshold = Config.BRANCH_THRESHOLD
    sc = build_algebra(lift.algebra)

    def f(t: float, y: np.ndarray) -> np.ndarray:
        return _lift_rhs_array(lift, t, y, threshold)[0]

    logger.info(f"积分 {lift.algebra.value} 线性提升: t ∈ [{t0}, {t1}]")
    times, states, h, blowup = integrate_system(f, s0.as_array(), float(t0), float(t1), step, bound)

    switch_radius = Config.CHART_THRESHOLD * (1 + Config.CHART_HYSTERESIS)
    chart = project(s0).chart
    charts: List[Chart] = []
    reps = []
    switches = 0
    gap = 0.0
    for y in states:
        rep = _chart_rep(sc, chart, y)
        if rep is None or np.linalg.norm(rep) > switch_radius:
            new_chart = chart.other
            new_rep = _chart_rep(sc, new_chart, y)
            if rep is not None and new_rep is not None:
                gap = max(gap, float(np.linalg.norm(new_rep - _inv_array(rep))))
            switches += 1
            logger.debug(f"图卡切换 {chart.value} -> {new_chart.value}")
            chart, rep = new_chart, new_rep
        charts.append(chart)
        reps.append(rep)

    branch_flags = [
        lift.algebra == AlgebraTag.O and np.linalg.norm(y[:sc.dim]) * np.linalg.norm(y[sc.dim:]) > threshold
        for y in states
    ]
    branch_switches = sum(1 for a, b in zip(branch_flags, branch_flags[1:]) if a != b)

    return ProjectedTrajectory(
        algebra=lift.algebra,
        times=times,
        charts=charts,
        reps=np.array(reps),
        step=h,
        chart_switches=switches,
        continuity_gap=gap,
        branch_switches=branch_switches,
        blowup=blowup,
    )


def compare_with_direct(
    spec: RiccatiSpec,
    a0: AlgebraElement,
    t0: float,
    t1: float,
    step: Optional[float] = None,
) -> Dict[str, Any]:
    """
    投影的提升轨迹与直接积分的 Riccati 轨迹在 D2 坐标下比较

    Returns:
        {"max_deviation", "chart_switches", "continuity_gap", "branch_switches", ...}
    """
    lift = riccati_to_lift(spec)
    s0 = LiftState(a0, AlgebraElement.scalar(spec.algebra, 1))
    projected = lift_integrate_and_project(lift, s0, t0, t1, step)
    direct = integrate(spec, a0, t0, t1, step)

    n = min(len(projected), len(direct))
    q_proj = projected.d2_coordinates()[:n]
    q_direct = direct.states[:n]
    finite = np.all(np.isfinite(q_proj), axis=1)
    deviation = float(np.max(np.linalg.norm(q_proj[finite] - q_direct[finite], axis=1))) if finite.any() else 0.0
    logger.info(f"提升与直接积分比较: 最大偏差 {deviation:.3e}, 图卡切换 {projected.chart_switches} 次")
    return {
        "max_deviation": deviation,
        "points_compared": int(finite.sum()),
        "chart_switches": projected.chart_switches,
        "continuity_gap": projected.continuity_gap,
        "branch_switches": projected.branch_switches,
        "projected_blowup": projected.blowup,
        "direct_blowup": direct.blowup,
        "projected": projected,
        "direct": direct,
    }
