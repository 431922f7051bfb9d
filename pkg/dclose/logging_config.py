"""
日志系统模块
控制台日志 + 供 /logs 接口读取的环形缓冲区
"""

import sys
import logging
import threading
from collections import deque
from datetime import datetime
from typing import List, Optional


class LogBuffer:
    """环形日志缓冲区

    分析任务在线程池里并行记录日志，读写都在锁内进行。
    每条记录带递增 id，客户端用 since_id 增量拉取。
    """

    def __init__(self, max_size: int = 1000):
        self.buffer = deque(maxlen=max_size)
        self._last_id = 0
        self._lock = threading.Lock()

    def add(
        self,
        level: str,
        message: str,
        name: str = "",
        created: Optional[float] = None,
        thread: str = "",
    ) -> dict:
        stamp = datetime.fromtimestamp(created) if created is not None else datetime.now()
        with self._lock:
            self._last_id += 1
            entry = {
                "id": self._last_id,
                "time": stamp.isoformat(timespec="milliseconds"),
                "level": level,
                "logger": name,
                "thread": thread,
                "message": message,
            }
            self.buffer.append(entry)
        return entry

    def get_all(self, since_id: int = 0, limit: int = 0, prefix: str = "") -> List[dict]:
        """since_id 之后的记录；prefix 按 logger 名前缀过滤（如 "dclose.baseline"）"""
        with self._lock:
            entries = [
                e for e in self.buffer
                if e["id"] > since_id and (not prefix or e["logger"].startswith(prefix))
            ]
        return entries[-limit:] if limit > 0 else entries

    def get_last_id(self) -> int:
        return self._last_id

    def clear(self):
        with self._lock:
            self.buffer.clear()
            self._last_id = 0


LOG_BUFFER = LogBuffer(max_size=500)


class BufferedLogHandler(logging.Handler):
    """把日志记录写入 LOG_BUFFER，时间取记录产生的时刻"""

    def emit(self, record):
        try:
            LOG_BUFFER.add(
                record.levelname,
                self.format(record),
                name=record.name,
                created=record.created,
                thread=record.threadName,
            )
        except Exception:
            self.handleError(record)


def setup_logging(level: str = "INFO", stream=None):
    """配置日志，重复调用时替换而不是叠加本模块的处理器"""
    root_logger = logging.getLogger()
    numeric_level = getattr(logging, str(level).upper(), logging.INFO)
    root_logger.setLevel(numeric_level)

    for handler in list(root_logger.handlers):
        if getattr(handler, "_dclose", False):
            root_logger.removeHandler(handler)

    # CLI 的标准输出只留给结果 JSON，日志写 stderr
    console_handler = logging.StreamHandler(stream or sys.stderr)
    console_handler.setLevel(numeric_level)
    console_handler.setFormatter(
        logging.Formatter('[%(asctime)s] %(levelname)s %(name)s: %(message)s', datefmt='%H:%M:%S')
    )
    console_handler._dclose = True

    buffer_handler = BufferedLogHandler()
    buffer_handler.setLevel(logging.DEBUG)
    buffer_handler.setFormatter(logging.Formatter('%(message)s'))
    buffer_handler._dclose = True

    root_logger.addHandler(console_handler)
    root_logger.addHandler(buffer_handler)

    # uvicorn 的日志交给根 logger 统一输出
    for name in ["uvicorn", "uvicorn.access", "uvicorn.error"]:
        logger = logging.getLogger(name)
        logger.handlers = []
        logger.propagate = True

    return logging.getLogger("dclose")
