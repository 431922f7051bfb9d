"""
有向闭包分析服务

API 端点：
- GET  /health          - 健康检查
- GET  /config          - 获取配置
- POST /config          - 更新配置
- GET  /config/default  - 默认配置
- POST /experiments     - 运行实验，结果写入 results/<name>/
- POST /randtest        - 对生成图做随机化检验
- GET  /logs            - 获取服务日志
- POST /logs/clear      - 清空日志
"""

import os
import sys
from contextlib import asynccontextmanager
from pathlib import Path

# 添加项目根目录到路径
PROJECT_ROOT = Path(__file__).resolve().parents[1]
if str(PROJECT_ROOT) not in sys.path:
    sys.path.insert(0, str(PROJECT_ROOT))

from fastapi import FastAPI, HTTPException
from fastapi.middleware.cors import CORSMiddleware

from server import (
    LOG_BUFFER, setup_logging,
    ExperimentRequest, ExperimentResponse,
    RandTestRequest, RandTestResponse, HealthResponse,
    STATE,
    run_experiment_request, run_randtest_request,
)

from dclose.config import DEFAULT_CONFIG, load_config, merge_config, save_config
from dclose.errors import DcloseError
from dclose.schemas import AnalysisOptions, CelebrityBounds, ModelParams

# 设置日志
logger = setup_logging(load_config()["logging"]["level"])


# ============== FastAPI 生命周期 ==============

@asynccontextmanager
async def lifespan(app):
    """应用生命周期管理"""
    config = STATE._load_config()
    logger.info("=" * 60)
    logger.info("有向闭包分析服务启动")
    logger.info(f"  结果目录: {STATE.results_dir}")
    logger.info(f"  图缓存上限: {config['service']['cache_size']}")
    logger.info("=" * 60)
    yield
    STATE.clear_cache()
    logger.info("服务正在关闭...")


# ============== FastAPI 应用 ==============

app = FastAPI(title="Directed Closure Service", lifespan=lifespan)

app.add_middleware(
    CORSMiddleware,
    allow_origins=["*"],
    allow_credentials=True,
    allow_methods=["*"],
    allow_headers=["*"],
)


def _bad_request(e: DcloseError) -> HTTPException:
    logger.warning(f"请求被拒绝: {e.code}: {e.message}")
    return HTTPException(status_code=400, detail=e.to_dict())


# ============== 健康检查 ==============

@app.get("/health", response_model=HealthResponse)
def health():
    return HealthResponse(
        status="ok",
        cached_graphs=STATE.cached_keys(),
        cache_size=STATE.cache_size,
        running=dict(STATE.running),
    )


# ============== 配置 API ==============

@app.get("/config")
def get_config():
    """获取当前配置"""
    return load_config()


@app.post("/config")
def update_config(config: dict):
    """更新配置；model/analysis/celebrity 段先校验再保存"""
    current = merge_config(load_config(), config)
    try:
        ModelParams.model_validate(current["model"])
        AnalysisOptions.model_validate(current["analysis"])
        CelebrityBounds.model_validate(current["celebrity"])
    except ValueError as e:
        raise HTTPException(status_code=400, detail={"error": "config_error", "message": str(e)})
    try:
        save_config(current)
    except OSError as e:
        raise HTTPException(status_code=500, detail=f"Failed to save config: {e}")
    STATE.reload_config()
    return {"status": "ok", "config": current}


@app.get("/config/default")
def get_default_config():
    """获取默认配置"""
    return DEFAULT_CONFIG


# ============== 分析 API ==============

@app.post("/experiments", response_model=ExperimentResponse)
def experiments(req: ExperimentRequest):
    try:
        return run_experiment_request(req)
    except DcloseError as e:
        raise _bad_request(e)


@app.post("/randtest", response_model=RandTestResponse)
def randtest(req: RandTestRequest):
    try:
        return run_randtest_request(req)
    except DcloseError as e:
        raise _bad_request(e)


# ============== 日志 API ==============

@app.get("/logs")
def get_logs(since_id: int = 0, limit: int = 100, logger: str = ""):
    """获取日志，logger 按模块名前缀过滤"""
    return {
        "logs": LOG_BUFFER.get_all(since_id, limit, prefix=logger),
        "last_id": LOG_BUFFER.get_last_id()
    }


@app.post("/logs/clear")
def clear_logs():
    """清空日志缓冲区"""
    LOG_BUFFER.clear()
    return {"status": "ok"}


# ============== 入口 ==============

def main():
    service = load_config()["service"]
    host = os.getenv("HOST", service["host"])
    port = int(os.getenv("PORT", str(service["port"])))
    import uvicorn
    uvicorn.run(app, host=host, port=port)


if __name__ == "__main__":
    try:
        main()
    except KeyboardInterrupt:
        sys.exit(0)
