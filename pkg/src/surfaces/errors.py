from typing import Optional


class SurfaceError(Exception):
    """多分支曲面相关错误的基类；location 指明出错的分支/扇区/圆周。"""

    def __init__(self, message: str, location: Optional[str] = None) -> None:
        self.message = message
        self.location = location
        super().__init__(f"{message} (at {location})" if location else message)


# --- 构造校验 ---
class ValidationError(SurfaceError):
    pass


class NonUniformWrap(ValidationError):
    pass


class UnattachedCircle(ValidationError):
    pass


class ReusedOrbit(ValidationError):
    pass


class ReusedCircle(ReusedOrbit):
    pass


class Disconnected(ValidationError):
    pass


class ClosedSector(ValidationError):
    pass


class NoBranch(ValidationError):
    pass


class BadSignature(ValidationError):
    pass


# --- 查询 ---
class UnknownBranch(SurfaceError):
    pass


class UnknownSector(SurfaceError):
    pass


# --- 变换 ---
class NotApplicable(SurfaceError):
    pass


class NotMaximallySpread(SurfaceError):
    pass


class NonOrientableUnsupported(SurfaceError):
    pass


class InvalidSplit(SurfaceError):
    pass


class InvalidSpec(SurfaceError):
    pass


# --- 偏序 ---
class MalformedCertificate(SurfaceError):
    pass


class PosetViolation(SurfaceError):
    pass


class FactRejected(SurfaceError):
    pass


# --- 目录 ---
class BadParameters(SurfaceError):
    pass


class LimitsUnsatisfiable(SurfaceError):
    pass


class ParseError(SurfaceError):
    """文本格式解析错误，line 为 1 起始的行号。"""

    def __init__(self, line: int, message: str) -> None:
        self.line = line
        super().__init__(f"line {line}: {message}")
