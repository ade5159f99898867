"""
NDA Riccati MCP 服务器
提供组合律检验、Lie 闭包、Riccati 积分、共形形式、射影提升、辛结构与四元数 Schrödinger 等工具
"""
import logging
from typing import Any, Dict, Optional

from fastmcp import FastMCP
from pydantic import BaseModel, Field

from .config import Config
from .services.experiment_service import ExperimentService

# 配置日志
logging.basicConfig(level=getattr(logging, Config.LOG_LEVEL))
logger = logging.getLogger(__name__)

# 创建 FastMCP 应用
mcp = FastMCP("NDA Riccati Server")

# 初始化服务
experiment_service = ExperimentService()


class LawCheckRequest(BaseModel):
    """组合律检验请求模型"""
    algebra: str = "O"
    samples: int = Field(default=100, gt=0)
    seed: int = Field(default=Config.DEFAULT_SEED, ge=0)
    exact: bool = True


class ClosureRequest(BaseModel):
    """Lie 闭包请求模型"""
    algebra: str = "O"
    generators: str = "riccati"  # riccati, rotations, extremal, alt-left, alt-right, schrodinger
    degree_cap: Optional[int] = Field(default=None, gt=0)
    round_cap: Optional[int] = Field(default=None, gt=0)
    include_basis: bool = False


class RiccatiRequest(BaseModel):
    """Riccati 积分请求模型"""
    spec: Dict[str, Any]
    t0: float = 0.0
    t1: float = 1.0
    step: Optional[float] = Field(default=None, gt=0)
    csv: Optional[str] = None


class ConformalRequest(BaseModel):
    """共形形式检验请求模型"""
    spec: Dict[str, Any]
    samples: int = Field(default=100, gt=0)
    seed: int = Field(default=Config.DEFAULT_SEED, ge=0)
    exact: Optional[bool] = None


class LiftRequest(BaseModel):
    """射影提升请求模型"""
    spec: Dict[str, Any]
    t0: float = 0.0
    t1: float = 1.0
    step: Optional[float] = Field(default=None, gt=0)
    compare: bool = True
    csv: Optional[str] = None


class SymplecticRequest(BaseModel):
    """辛结构检验请求模型"""
    algebra: str = "O"
    samples: int = Field(default=50, gt=0)
    seed: int = Field(default=Config.DEFAULT_SEED, ge=0)


class SchrodingerRequest(BaseModel):
    """四元数 Schrödinger 求解请求模型"""
    spec: Dict[str, Any]
    step: Optional[float] = Field(default=None, gt=0)
    csv: Optional[str] = None
    convergence: bool = False
    minimal_algebra: bool = False


@mcp.tool()
async def check_laws(request: LawCheckRequest) -> Dict[str, Any]:
    """
    在随机样本上检验赋范可除代数的组合律

    Args:
        request: 代数、样本数、随机种子与是否精确计算

    Returns:
        各定律的最大残差与总体状态
    """
    try:
        logger.info(f"开始检验组合律: {request.algebra}")
        return experiment_service.check_laws(request.algebra, request.samples, request.seed, request.exact)
    except Exception as e:
        logger.error(f"检验组合律时出错: {str(e)}")
        return {"error": str(e)}


@mcp.tool()
async def compute_closure(request: ClosureRequest) -> Dict[str, Any]:
    """
    计算生成元族在 Lie 括号下的闭包

    Args:
        request: 代数、生成元族与次数上限

    Returns:
        闭包维数、是否闭合以及各次数的场数目
    """
    try:
        logger.info(f"开始计算闭包: {request.algebra} / {request.generators}")
        return experiment_service.compute_closure(
            request.algebra,
            request.generators,
            request.degree_cap,
            request.round_cap,
            include_basis=request.include_basis,
        )
    except Exception as e:
        logger.error(f"计算闭包时出错: {str(e)}")
        return {"error": str(e)}


@mcp.tool()
async def integrate_riccati(request: RiccatiRequest) -> Dict[str, Any]:
    """
    RK4 积分 NDA Riccati 方程

    Args:
        request: Riccati 规格（可含 initial）、时间区间与步长

    Returns:
        轨迹摘要，blow-up 时 status 为 blowup
    """
    try:
        return experiment_service.integrate_riccati(request.spec, request.t0, request.t1, request.step, request.csv)
    except Exception as e:
        logger.error(f"积分 Riccati 方程时出错: {str(e)}")
        return {"error": str(e)}


@mcp.tool()
async def check_conformal(request: ConformalRequest) -> Dict[str, Any]:
    """
    比较 Riccati 右端与其共形形式的右端

    Args:
        request: Riccati 规格、样本数与随机种子

    Returns:
        最大残差与 Ω 的反对称残差
    """
    try:
        return experiment_service.check_conformal(request.spec, request.samples, request.seed, request.exact)
    except Exception as e:
        logger.error(f"检验共形形式时出错: {str(e)}")
        return {"error": str(e)}


@mcp.tool()
async def compare_lift(request: LiftRequest) -> Dict[str, Any]:
    """
    线性提升积分后投影回射影直线，可与直接积分比较

    Args:
        request: Riccati 或提升规格、时间区间与是否比较

    Returns:
        投影轨迹摘要与比较结果
    """
    try:
        return experiment_service.compare_lift(
            request.spec, request.t0, request.t1, request.step, request.compare, request.csv
        )
    except Exception as e:
        logger.error(f"计算射影提升时出错: {str(e)}")
        return {"error": str(e)}


@mcp.tool()
async def check_symplectic(request: SymplecticRequest) -> Dict[str, Any]:
    """
    检验实系数径向场关于 ω_O 或 ω_H 的 Hamilton 性

    Args:
        request: 代数（H 或 O）、样本数与随机种子

    Returns:
        Hamilton 函数、Poisson 关系、Lie 导数残差与不变常形式个数
    """
    try:
        return experiment_service.check_symplectic(request.algebra, request.samples, request.seed)
    except Exception as e:
        logger.error(f"检验辛结构时出错: {str(e)}")
        return {"error": str(e)}


@mcp.tool()
async def solve_schrodinger(request: SchrodingerRequest) -> Dict[str, Any]:
    """
    求解 E=0 的四元数 Schrödinger 方程并计算残差

    Args:
        request: 势 V、W 与初值 u0、psi0 等参数

    Returns:
        解的摘要、最大残差与对数导数偏差
    """
    try:
        return experiment_service.solve_schrodinger(
            request.spec, request.step, request.csv, request.convergence, request.minimal_algebra
        )
    except Exception as e:
        logger.error(f"求解 Schrödinger 方程时出错: {str(e)}")
        return {"error": str(e)}


def main():
    """主函数，启动 MCP 服务器"""
    try:
        # 验证配置
        Config.validate()
        logger.info("NDA Riccati 服务器启动中...")
        mcp.run()
    except Exception as e:
        logger.error(f"启动服务器时出错: {str(e)}")
        raise


if __name__ == "__main__":
    main()
