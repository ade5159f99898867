"""
异常定义模块
"""


class NDARiccatiError(Exception):
    """所有 nda-riccati 异常的基类"""


class ContractViolationError(NDARiccatiError, ValueError):
    """前置条件不满足（代数不一致、维数不符、非线性场等）"""


class AlgebraDivisionError(NDARiccatiError, ZeroDivisionError):
    """对零元素求逆"""


class ExpressionParseError(NDARiccatiError, ValueError):
    """代数表达式或系数表达式节点无法解析"""


class SingularCombinationError(NDARiccatiError, ZeroDivisionError):
    """叠加公式分母为零"""


class UnsupportedRestrictionError(NDARiccatiError, ValueError):
    """输入超出已实现的限制情形（如八元数提升的非实系数、E ≠ 0）"""
