"""
四元数 Schrödinger 服务模块
将 E=0 的 1+1 维定态问题化为四元数 Riccati 方程，求解后重建 Ψ 并计算方程残差
"""
import logging
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, Optional, Sequence

import numpy as np
from pydantic import ValidationError

from ..config import Config
from ..exceptions import ContractViolationError, ExpressionParseError, UnsupportedRestrictionError
from ..utils.expressions import CoeffFn, SchrodingerSpecFile
from ..utils.report_utils import format_scalar, parse_scalar, write_csv
from .algebra import AlgebraElement, AlgebraTag, build_algebra
from .riccati_solver import RiccatiSpec, _rhs_array, integrate_system
from .vector_fields import ClosureReport, closure, schrodinger_generators

logger = logging.getLogger(__name__)

H = AlgebraTag.H
E1, E2, E3 = (tuple(1 if i == k else 0 for i in range(4)) for k in (1, 2, 3))


@dataclass(frozen=True)
class SchrodingerSpec:
    """
    定态右线性四元数 Schrödinger 方程的参数

    V 为实值势，W 取值于 e_0–e_1 子代数（二维系数），E 目前只支持 0。
    """

    V: CoeffFn
    W: CoeffFn
    hbar: Fraction = Fraction(1)
    m: Fraction = Fraction(1)
    E: Fraction = Fraction(0)
    x0: Fraction = Fraction(0)
    x1: Fraction = Fraction(1)

    def __post_init__(self):
        if self.V.dim != 1:
            raise ContractViolationError("V must be real valued")
        if self.W.dim != 2:
            raise ContractViolationError("W must take values in the e_0-e_1 subalgebra")
        if self.hbar <= 0 or self.m <= 0:
            raise ContractViolationError("hbar and m must be positive")
        if self.x1 <= self.x0:
            raise ContractViolationError("x1 must be greater than x0")

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "SchrodingerSpec":
        """
        从规格映射构造；V 是一维系数，W 是二维系数（标量视为实的 W）

        Raises:
            ExpressionParseError: 未知键或表达式非法
        """
        try:
            model = SchrodingerSpecFile.model_validate(data)
        except ValidationError as e:
            raise ExpressionParseError(f"Invalid Schrodinger spec: {e}") from None
        return cls(
            V=CoeffFn.parse(1, model.V),
            W=CoeffFn.parse(2, model.W),
            hbar=parse_scalar(model.hbar),
            m=parse_scalar(model.m),
            E=parse_scalar(model.E),
            x0=parse_scalar(model.x0),
            x1=parse_scalar(model.x1),
        )

    @property
    def kinetic(self) -> Fraction:
        """ħ²/2m"""
        return self.hbar ** 2 / (2 * self.m)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "hbar": format_scalar(self.hbar),
            "m": format_scalar(self.m),
            "E": format_scalar(self.E),
            "V": self.V.to_node(),
            "W": self.W.to_node(),
            "x0": format_scalar(self.x0),
            "x1": format_scalar(self.x1),
        }


def riccati_from_potentials(spec: SchrodingerSpec) -> RiccatiSpec:
    """
    du/dx = −u² + b(x)，b = (2m/ħ²)(V + k W)

    Raises:
        UnsupportedRestrictionError: E ≠ 0
    """
    if spec.E != 0:
        raise UnsupportedRestrictionError("Only the E = 0 stationary problem reduces to a Riccati equation")
    sc = build_algebra(H)
    scale = 1 / spec.kinetic

    potential = spec.V.map_linear(4, lambda v: [scale * v[0], 0, 0, 0])
    coupling = spec.W.map_linear(4, lambda v: [scale * c for c in sc.multiply(E3, (v[0], v[1], 0, 0))])
    return RiccatiSpec(
        H,
        potential + coupling,
        CoeffFn.zero(4),
        CoeffFn.zero(4),
        CoeffFn.constant(4, [-1, 0, 0, 0]),
    )


@dataclass(eq=False)
class WaveSolution:
    """网格上的 u、Ψ 与逐点残差；边界点残差使用单侧差分，不计入最大值"""

    xs: np.ndarray
    u: np.ndarray
    psi: np.ndarray
    residual: np.ndarray
    step: float
    blowup: bool = False

    def __len__(self) -> int:
        return len(self.xs)

    @property
    def max_residual(self) -> float:
        interior = self.residual[1:-1]
        return float(np.max(interior)) if len(interior) else 0.0

    def log_derivative_gap(self) -> float:
        """内点上 ‖(Ψ_{k+1} − Ψ_{k−1})/2h − u_k Ψ_k‖ 的最大值"""
        if len(self) < 3:
            return 0.0
        sc = build_algebra(H)
        gap = 0.0
        for k in range(1, len(self) - 1):
            d_psi = (self.psi[k + 1] - self.psi[k - 1]) / (2 * self.step)
            gap = max(gap, float(np.linalg.norm(d_psi - sc.multiply_array(self.u[k], self.psi[k]))))
        return gap

    def header(self):
        return ["x"] + [f"u_{i}" for i in range(4)] + [f"psi_{i}" for i in range(4)] + ["residual"]

    def to_csv(self, path: Path) -> int:
        rows = [
            [float(x)] + [float(v) for v in u] + [float(v) for v in p] + [float(r)]
            for x, u, p, r in zip(self.xs, self.u, self.psi, self.residual)
        ]
        return write_csv(self.header(), rows, path)

    def summary(self) -> Dict[str, Any]:
        return {
            "points": len(self),
            "step": self.step,
            "blowup": self.blowup,
            "max_residual": self.max_residual,
            "log_derivative_gap": self.log_derivative_gap(),
            "final_u": [float(v) for v in self.u[-1]],
            "final_psi": [float(v) for v in self.psi[-1]],
        }


def _second_derivative(psi: np.ndarray, h: float) -> np.ndarray:
    """中心差分，两端用二阶单侧差分"""
    n = len(psi)
    out = np.full_like(psi, np.nan)
    if n >= 3:
        out[1:-1] = (psi[2:] - 2 * psi[1:-1] + psi[:-2]) / h ** 2
    if n >= 4:
        out[0] = (2 * psi[0] - 5 * psi[1] + 4 * psi[2] - psi[3]) / h ** 2
        out[-1] = (2 * psi[-1] - 5 * psi[-2] + 4 * psi[-3] - psi[-4]) / h ** 2
    return out


def equation_residual(spec: SchrodingerSpec, xs: np.ndarray, psi: np.ndarray, h: float) -> np.ndarray:
    """逐点 ‖i[(ħ²/2m)Ψ'' − VΨ] + (jW)Ψ‖，算子均从左作用"""
    sc = build_algebra(H)
    i_unit = np.array(E1, dtype=float)
    j_unit = np.array(E2, dtype=float)
    kinetic = float(spec.kinetic)
    d2 = _second_derivative(psi, h)
    out = np.empty(len(xs))
    for k, x in enumerate(xs):
        if np.isnan(d2[k]).any():
            out[k] = np.nan
            continue
        v = spec.V.evaluate_array(x)[0]
        w = np.concatenate([spec.W.evaluate_array(x), [0.0, 0.0]])
        inner = kinetic * d2[k] - v * psi[k]
        value = sc.multiply_array(i_unit, inner) + sc.multiply_array(sc.multiply_array(j_unit, w), psi[k])
        out[k] = float(np.linalg.norm(value))
    return out


def solve_and_reconstruct(
    spec: SchrodingerSpec,
    u0: Optional[Sequence[Any]] = None,
    psi0: Optional[Sequence[Any]] = None,
    step: Optional[float] = None,
    bound: Optional[float] = None,
) -> WaveSolution:
    """
    联合积分 u' = −u² + b 与 Ψ' = uΨ（Ψ 在右），再计算方程残差

    Args:
        spec: Schrödinger 参数
        u0: u(x0)，缺省为 0
        psi0: Ψ(x0)，缺省为 1，必须非零
        step: 网格步长，缺省取 Config.DEFAULT_STEP
        bound: blow-up 范数界

    Returns:
        WaveSolution；u 在 Ψ 的零点附近发散时截断并置标志
    """
    u_init = AlgebraElement.zero(H) if u0 is None else AlgebraElement.from_json(H, u0)
    psi_init = AlgebraElement.scalar(H, 1) if psi0 is None else AlgebraElement.from_json(H, psi0)
    if psi_init.is_zero():
        raise ContractViolationError("psi0 must be nonzero")
    step = Config.DEFAULT_STEP if step is None else step

    riccati = riccati_from_potentials(spec)
    sc = build_algebra(H)
    fns = (riccati.b_minus, riccati.b_0L, riccati.b_0R, riccati.b_plus)

    def f(x: float, y: np.ndarray) -> np.ndarray:
        u, psi = y[:4], y[4:]
        coeffs = tuple(fn.evaluate_array(x) for fn in fns)
        return np.concatenate([_rhs_array(sc, coeffs, u), sc.multiply_array(u, psi)])

    y0 = np.concatenate([u_init.as_array(), psi_init.as_array()])
    logger.info(f"求解四元数 Schrödinger 方程: x ∈ [{spec.x0}, {spec.x1}], 步长 {step}")
    xs, states, h, blowup = integrate_system(f, y0, float(spec.x0), float(spec.x1), step, bound)
    psi = states[:, 4:]
    residual = equation_residual(spec, xs, psi, h)
    solution = WaveSolution(xs, states[:, :4], psi, residual, h, blowup)
    logger.info(f"最大内点残差: {solution.max_residual:.3e}")
    return solution


def residual_convergence(
    spec: SchrodingerSpec,
    u0: Optional[Sequence[Any]] = None,
    psi0: Optional[Sequence[Any]] = None,
    step: float = 0.02,
) -> Dict[str, Any]:
    """步长减半前后的最大残差之比，二阶格式应接近 4"""
    coarse = solve_and_reconstruct(spec, u0, psi0, step)
    fine = solve_and_reconstruct(spec, u0, psi0, step / 2)
    ratio = coarse.max_residual / fine.max_residual if fine.max_residual > 0 else float("inf")
    return {
        "step": coarse.step,
        "coarse_residual": coarse.max_residual,
        "fine_residual": fine.max_residual,
        "ratio": ratio,
    }


def schrodinger_closure() -> ClosureReport:
    return closure(schrodinger_generators())


def minimal_algebra_dimension() -> int:
    """{λ_u(u²), λ_u(e_i)} 生成的 Lie 代数维数"""
    report = schrodinger_closure()
    if not report.closed:
        raise ContractViolationError("Closure of the Schrodinger generators did not terminate")
    return report.dimension
