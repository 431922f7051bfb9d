"""
异常定义模块
所有可预期的错误都继承自 DcloseError，并带有稳定的机器可读错误码
"""


class DcloseError(Exception):
    """工具包基础异常"""
    code = "dclose_error"

    def __init__(self, message: str = ""):
        super().__init__(message)
        self.message = message

    def to_dict(self) -> dict:
        return {"error": self.code, "message": self.message}


class GraphError(DcloseError):
    code = "graph_error"


class DuplicateEdgeError(GraphError):
    code = "duplicate_edge"


class SelfLoopError(GraphError):
    code = "self_loop"


class UnknownNodeError(GraphError):
    code = "unknown_node"


class MissingEdgeError(GraphError):
    code = "missing_edge"


class LabelError(DcloseError):
    """图没有社区标签却请求了社区相关统计"""
    code = "missing_labels"


class ParseError(DcloseError):
    code = "parse_error"

    def __init__(self, message: str, line_no: int = 0):
        if line_no:
            message = f"第 {line_no} 行: {message}"
        super().__init__(message)
        self.line_no = line_no

    def to_dict(self) -> dict:
        data = super().to_dict()
        data["line"] = self.line_no
        return data


class ConfigError(DcloseError):
    code = "config_error"


class EnumerationLimitError(DcloseError):
    code = "enumeration_limit"


class StatisticsError(DcloseError):
    code = "statistics_error"
