# src/config.py
import os
from typing import Tuple

from dotenv import load_dotenv

# 从 .env 文件加载环境变量
# 可在项目根目录下创建 .env 文件覆盖下列默认值，例如: MBS_EQUIV_DEPTH=6
load_dotenv()

# --- 等价性搜索 ---
# equiv 命令与 hasse 处理二元环时使用的默认 BFS 深度（IH 变换步数）
EQUIV_DEPTH = int(os.getenv("MBS_EQUIV_DEPTH", "4"))
# BFS 与重新展开枚举访问曲面数的硬上限，达到后按 NoWithinDepth 结束并给出警告
SEARCH_NODE_LIMIT = int(os.getenv("MBS_SEARCH_NODE_LIMIT", "20000"))

# --- 随机曲面生成器 ---
RANDOM_SEED = int(os.getenv("MBS_RANDOM_SEED", "1"))
RANDOM_LIMITS = {
    # 分支个数上限
    "max_branches": int(os.getenv("MBS_RANDOM_MAX_BRANCHES", "3")),
    # 扇区个数上限
    "max_sectors": int(os.getenv("MBS_RANDOM_MAX_SECTORS", "4")),
    # 分支度数上限（下限固定为 3）
    "max_degree": int(os.getenv("MBS_RANDOM_MAX_DEGREE", "6")),
}

# --- 日志 ---
LOG_LEVEL = os.getenv("MBS_LOG_LEVEL", "WARNING")

# --- 样例数据 ---
FIXTURES_PATH = os.path.join(os.path.dirname(__file__), "fixtures")


def get_equiv_depth(depth: int | None = None) -> int:
    """
    获取等价性搜索深度；显式传入的值优先，否则返回全局默认。
    """
    if depth is not None:
        return depth
    return EQUIV_DEPTH


def get_search_node_limit() -> int:
    return SEARCH_NODE_LIMIT


def get_random_seed() -> int:
    return RANDOM_SEED


def get_random_limits() -> Tuple[int, int, int]:
    """
    返回 (max_branches, max_sectors, max_degree)。
    """
    return RANDOM_LIMITS["max_branches"], RANDOM_LIMITS["max_sectors"], RANDOM_LIMITS["max_degree"]


def get_log_level() -> str:
    return LOG_LEVEL.upper()
