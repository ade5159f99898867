"""
精确线性代数工具
增量行阶梯基：在有理数上判定向量的线性无关性
"""
import logging
from fractions import Fraction
from typing import Dict, Hashable, List, Optional

logger = logging.getLogger(__name__)

SparseVector = Dict[Hashable, Fraction]


class EchelonBasis:
    """
    行阶梯基

    每一行以其最大列为主元并归一化为 1；各行主元互不相同。
    列键须可全序比较，向量场使用 (总次数, 指数元组, 分量) 作为列键，即按次数-字典序排列。
    """

    def __init__(self):
        self._rows: Dict[Hashable, SparseVector] = {}

    def __len__(self) -> int:
        return len(self._rows)

    @property
    def pivots(self) -> List[Hashable]:
        return sorted(self._rows)

    def reduce(self, vector: SparseVector) -> SparseVector:
        """
        消去向量中所有主元列

        Args:
            vector: 稀疏向量（列键 -> 有理系数）

        Returns:
            约化后的余向量；为空表示向量在当前张成空间内
        """
        residual = {k: Fraction(v) for k, v in vector.items() if v}
        while residual:
            present = [k for k in residual if k in self._rows]
            if not present:
                break
            pivot = max(present)
            factor = residual[pivot]
            for col, coeff in self._rows[pivot].items():
                value = residual.get(col, 0) - factor * coeff
                if value:
                    residual[col] = value
                else:
                    residual.pop(col, None)
        return residual

    def contains(self, vector: SparseVector) -> bool:
        return not self.reduce(vector)

    def add(self, vector: SparseVector) -> Optional[Hashable]:
        """
        若向量与当前基线性无关则并入

        Returns:
            新行的主元列；向量已在张成空间内时返回 None
        """
        residual = self.reduce(vector)
        if not residual:
            return None
        pivot = max(residual)
        lead = residual[pivot]
        self._rows[pivot] = {k: v / lead for k, v in residual.items()}
        return pivot


def rank(vectors: List[SparseVector]) -> int:
    """精确秩"""
    basis = EchelonBasis()
    for vec in vectors:
        basis.add(vec)
    return len(basis)
