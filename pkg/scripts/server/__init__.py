"""
服务器模块
提供实验运行、随机化检验和日志服务
"""

from .state import STATE, SCRIPT_DIR, ServiceState
from .schemas import (
    ExperimentRequest, ExperimentResponse,
    RandTestRequest, RandTestResponse, RandTestRowModel,
    HealthResponse,
)
from .experiment_service import run_experiment_request, run_randtest_request
from dclose.logging_config import LOG_BUFFER, setup_logging

__all__ = [
    # 日志
    'LOG_BUFFER', 'setup_logging',
    # 模型
    'ExperimentRequest', 'ExperimentResponse',
    'RandTestRequest', 'RandTestResponse', 'RandTestRowModel',
    'HealthResponse',
    # 状态
    'STATE', 'SCRIPT_DIR', 'ServiceState',
    # 服务
    'run_experiment_request', 'run_randtest_request',
]
