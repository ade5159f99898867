"""
配置管理模块
"""
import os
from dotenv import load_dotenv

# 加载环境变量
load_dotenv()


class Config:
    """配置类，管理所有环境变量和数值默认值"""

    # 调试配置
    DEBUG = os.getenv("DEBUG", "false").lower() == "true"
    LOG_LEVEL = os.getenv("LOG_LEVEL", "INFO")

    # 输出配置
    OUTPUT_DIR = os.getenv("OUTPUT_DIR", "output")

    # 积分配置
    DEFAULT_STEP = float(os.getenv("DEFAULT_STEP", "1e-3"))
    BLOWUP_BOUND = float(os.getenv("BLOWUP_BOUND", "1e8"))

    # 李括号闭包配置
    DEGREE_CAP = int(os.getenv("DEGREE_CAP", "5"))
    ROUND_CAP = int(os.getenv("ROUND_CAP", "12"))

    # 容差配置
    LAW_TOLERANCE = float(os.getenv("LAW_TOLERANCE", "1e-12"))
    CONFORMAL_TOLERANCE = float(os.getenv("CONFORMAL_TOLERANCE", "1e-12"))
    LIFT_TOLERANCE = float(os.getenv("LIFT_TOLERANCE", "1e-5"))
    RESIDUAL_TOLERANCE = float(os.getenv("RESIDUAL_TOLERANCE", "1e-5"))

    # 射影直线图卡配置
    CHART_THRESHOLD = float(os.getenv("CHART_THRESHOLD", "1.0"))
    CHART_HYSTERESIS = float(os.getenv("CHART_HYSTERESIS", "0.1"))
    BRANCH_THRESHOLD = float(os.getenv("BRANCH_THRESHOLD", "1e-12"))

    # 随机数配置
    DEFAULT_SEED = int(os.getenv("DEFAULT_SEED", "0"))

    @classmethod
    def validate(cls):
        """验证数值配置项是否合法"""
        invalid = []

        positive = [
            "DEFAULT_STEP", "BLOWUP_BOUND", "DEGREE_CAP", "ROUND_CAP",
            "LAW_TOLERANCE", "CONFORMAL_TOLERANCE", "LIFT_TOLERANCE", "RESIDUAL_TOLERANCE",
            "CHART_THRESHOLD", "BRANCH_THRESHOLD",
        ]
        for name in positive:
            if getattr(cls, name) <= 0:
                invalid.append(name)

        if cls.DEFAULT_SEED < 0:
            invalid.append("DEFAULT_SEED")

        if not 0 <= cls.CHART_HYSTERESIS < 1:
            invalid.append("CHART_HYSTERESIS")

        if invalid:
            raise ValueError(f"Invalid configuration values: {', '.join(invalid)}")

        return True
