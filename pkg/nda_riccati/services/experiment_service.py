"""
实验服务模块
将各项检验与积分组合为可直接序列化为 JSON 的报告，供命令行与 MCP 服务器共用
"""
import logging
from pathlib import Path
from typing import Any, Dict, Optional, Sequence

from ..config import Config
from ..exceptions import ContractViolationError
from ..utils.report_utils import write_text
from .algebra import AlgebraElement, AlgebraTag, check_composition_laws
from .hamiltonian import symplectic_report
from .projective_lift import LiftSpec, LiftState, compare_with_direct, lift_integrate_and_project, riccati_to_lift
from .riccati_solver import RiccatiSpec, check_conformal, check_superposition, initial_state, integrate
from .schrodinger import SchrodingerSpec, minimal_algebra_dimension, residual_convergence, solve_and_reconstruct
from .vector_fields import closure, generator_set, octonion_linear_table, render_field_table

logger = logging.getLogger(__name__)

STATUS_OK = "ok"
STATUS_TOLERANCE = "tolerance_failed"
STATUS_BLOWUP = "blowup"

_LIFT_KEYS = ("a11", "a12", "a21", "a22")


class ExperimentService:
    """实验服务类"""

    def __init__(self, output_dir: Optional[Path] = None):
        self.output_dir = Path(output_dir or Config.OUTPUT_DIR)

    def _artifact(self, name: Optional[str]) -> Optional[Path]:
        if name is None:
            return None
        path = Path(name)
        return path if path.is_absolute() else self.output_dir / path

    def check_laws(
        self,
        algebra: str,
        samples: int,
        seed: int,
        exact: bool = True,
        tolerance: Optional[float] = None,
        derivative_samples: int = 3,
    ) -> Dict[str, Any]:
        """
        组合律检验报告

        Returns:
            LawReport 字典加 status；任一必需残差超出容差时为 tolerance_failed
        """
        tolerance = Config.LAW_TOLERANCE if tolerance is None else tolerance
        report = check_composition_laws(
            AlgebraTag.parse(algebra), samples, seed, exact, tolerance, derivative_samples
        )
        payload = report.to_dict()
        payload["status"] = STATUS_OK if report.passed else STATUS_TOLERANCE
        return payload

    def compute_closure(
        self,
        algebra: str,
        generators: str = "riccati",
        degree_cap: Optional[int] = None,
        round_cap: Optional[int] = None,
        include_basis: bool = True,
        table: Optional[str] = None,
    ) -> Dict[str, Any]:
        """
        生成元族的 Lie 闭包；未闭合是结果而不是失败
        """
        tag = AlgebraTag.parse(algebra)
        report = closure(generator_set(tag, generators), degree_cap, round_cap)
        payload = report.to_dict(include_basis)
        payload.update({"algebra": tag.value, "generators": generators, "status": STATUS_OK})
        table_path = self._artifact(table)
        if table_path is not None:
            write_text(render_field_table(report.basis), table_path)
            payload["table"] = str(table_path)
        return payload

    def integrate_riccati(
        self,
        spec_data: Dict[str, Any],
        t0: float,
        t1: float,
        step: Optional[float] = None,
        csv: Optional[str] = None,
    ) -> Dict[str, Any]:
        spec = RiccatiSpec.from_dict({k: v for k, v in spec_data.items() if k != "initial"})
        a0 = initial_state(spec.algebra, spec_data.get("initial"))
        trajectory = integrate(spec, a0, t0, t1, step)
        payload = {"spec": spec.to_dict(), "initial": a0.to_json(), **trajectory.summary()}
        csv_path = self._artifact(csv)
        if csv_path is not None:
            trajectory.to_csv(csv_path)
            payload["csv"] = str(csv_path)
        payload["status"] = STATUS_BLOWUP if trajectory.blowup else STATUS_OK
        return payload

    def check_superposition(
        self,
        spec_data: Dict[str, Any],
        initials: Sequence[float],
        k: float,
        t0: float,
        t1: float,
        step: Optional[float] = None,
        tolerance: Optional[float] = None,
    ) -> Dict[str, Any]:
        """实 Riccati 方程的叠加公式与直接积分的比较"""
        tolerance = Config.LIFT_TOLERANCE if tolerance is None else tolerance
        spec = RiccatiSpec.from_dict({k_: v for k_, v in spec_data.items() if k_ != "initial"})
        result = check_superposition(spec, initials, k, t0, t1, step)
        result.update({"spec": spec.to_dict(), "initials": [float(x) for x in initials], "tolerance": tolerance})
        if result["blowup"]:
            result["status"] = STATUS_BLOWUP
        else:
            result["status"] = STATUS_OK if result["max_error"] <= tolerance else STATUS_TOLERANCE
        return result

    def check_conformal(
        self,
        spec_data: Dict[str, Any],
        samples: int,
        seed: int,
        exact: Optional[bool] = None,
        tolerance: Optional[float] = None,
    ) -> Dict[str, Any]:
        """rhs 与共形形式右端的逐点比较"""
        tolerance = Config.CONFORMAL_TOLERANCE if tolerance is None else tolerance
        spec = RiccatiSpec.from_dict({k: v for k, v in spec_data.items() if k != "initial"})
        result = check_conformal(spec, samples, seed, exact)
        if result["exact"]:
            passed = result["max_residual"] == 0 and result["antisymmetry_residual"] == 0
        else:
            passed = result["max_residual"] <= tolerance and result["antisymmetry_residual"] <= tolerance
        result.update({"spec": spec.to_dict(), "seed": seed, "tolerance": tolerance})
        result["status"] = STATUS_OK if passed else STATUS_TOLERANCE
        return result

    def compare_lift(
        self,
        spec_data: Dict[str, Any],
        t0: float,
        t1: float,
        step: Optional[float] = None,
        compare: bool = False,
        csv: Optional[str] = None,
        tolerance: Optional[float] = None,
    ) -> Dict[str, Any]:
        """
        线性提升积分并投影回射影直线

        规格含 a11..a22 时按提升规格读取，否则按 Riccati 规格读取并转换；compare 仅对后者可用。
        """
        tolerance = Config.LIFT_TOLERANCE if tolerance is None else tolerance
        data = {k: v for k, v in spec_data.items() if k != "initial"}
        raw_initial = spec_data.get("initial")
        spec: Optional[RiccatiSpec] = None
        if any(key in data for key in _LIFT_KEYS):
            lift = LiftSpec.from_dict(data)
            tag = lift.algebra
            if raw_initial is None:
                s0 = LiftState(AlgebraElement.zero(tag), AlgebraElement.scalar(tag, 1))
            else:
                s0 = LiftState(AlgebraElement.from_json(tag, raw_initial[0]),
                               AlgebraElement.from_json(tag, raw_initial[1]))
        else:
            spec = RiccatiSpec.from_dict(data)
            lift = riccati_to_lift(spec)
            a0 = initial_state(spec.algebra, raw_initial)
            s0 = LiftState(a0, AlgebraElement.scalar(spec.algebra, 1))

        if compare:
            if spec is None:
                raise ContractViolationError("Comparison needs a Riccati spec (b_minus, b_0L, b_0R, b_plus)")
            comparison = compare_with_direct(spec, s0.a1, t0, t1, step)
            projected = comparison.pop("projected")
            comparison.pop("direct")
        else:
            projected = lift_integrate_and_project(lift, s0, t0, t1, step)
            comparison = None

        payload: Dict[str, Any] = {"lift": lift.to_dict(), **projected.summary()}
        csv_path = self._artifact(csv)
        if csv_path is not None:
            projected.to_csv(csv_path)
            payload["csv"] = str(csv_path)
        status = STATUS_BLOWUP if projected.blowup else STATUS_OK
        if comparison is not None:
            payload["comparison"] = comparison
            payload["tolerance"] = tolerance
            if status == STATUS_OK and comparison["max_deviation"] > tolerance:
                status = STATUS_TOLERANCE
        payload["status"] = status
        return payload

    def check_symplectic(self, algebra: str, samples: int, seed: int) -> Dict[str, Any]:
        payload = symplectic_report(AlgebraTag.parse(algebra), samples, seed)
        payload["status"] = STATUS_OK if payload["passed"] else STATUS_TOLERANCE
        return payload

    def solve_schrodinger(
        self,
        spec_data: Dict[str, Any],
        step: Optional[float] = None,
        csv: Optional[str] = None,
        convergence: bool = False,
        minimal_algebra: bool = False,
        tolerance: Optional[float] = None,
    ) -> Dict[str, Any]:
        """
        E=0 定态问题的求解与残差检验

        Args:
            spec_data: Schrödinger 规格，可含初值 u0、psi0
            step: 网格步长
            csv: 逐点结果 CSV 文件名
            convergence: 是否附带步长减半的残差收敛比
            minimal_algebra: 是否附带生成元闭包维数
            tolerance: 残差与对数导数容差
        """
        tolerance = Config.RESIDUAL_TOLERANCE if tolerance is None else tolerance
        u0 = spec_data.get("u0")
        psi0 = spec_data.get("psi0")
        spec = SchrodingerSpec.from_dict({k: v for k, v in spec_data.items() if k not in ("u0", "psi0")})
        solution = solve_and_reconstruct(spec, u0, psi0, step)
        payload: Dict[str, Any] = {"spec": spec.to_dict(), **solution.summary(), "tolerance": tolerance}
        csv_path = self._artifact(csv)
        if csv_path is not None:
            solution.to_csv(csv_path)
            payload["csv"] = str(csv_path)
        if convergence:
            payload["convergence"] = residual_convergence(spec, u0, psi0)
        if minimal_algebra:
            payload["minimal_algebra_dimension"] = minimal_algebra_dimension()

        if solution.blowup:
            payload["status"] = STATUS_BLOWUP
        elif solution.max_residual > tolerance or payload["log_derivative_gap"] > tolerance:
            payload["status"] = STATUS_TOLERANCE
        else:
            payload["status"] = STATUS_OK
        return payload

    def render_table(self, algebra: Optional[str] = None, generators: Optional[str] = None) -> str:
        """缺省给出八元数线性场表；指定族时渲染其闭包基"""
        if generators is None:
            return octonion_linear_table()
        tag = AlgebraTag.parse(algebra or "O")
        return render_field_table(closure(generator_set(tag, generators)).basis)
