"""
NDA Riccati Package
赋范可除代数（ℝ、ℂ、ℍ、𝕆）上的 Riccati 方程：代数运算、李括号闭包、共形形式、射影线性化、辛结构验证与四元数薛定谔应用
"""

__version__ = "0.1.0"

from .config import Config
from .services.algebra import AlgebraElement, AlgebraTag, build_algebra

__all__ = ["Config", "AlgebraElement", "AlgebraTag", "build_algebra"]
