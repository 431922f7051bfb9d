"""
一键启动脚本
启动有向闭包分析服务，并在就绪后保持运行

用法:
  python start.py            # 使用 config.json 中的 service.port
  python start.py --reload   # 开发模式（uvicorn 自动重载）
"""

import os
import sys
import time
import signal
import socket
import subprocess
import threading
from pathlib import Path

# 项目根目录
ROOT_DIR = Path(__file__).resolve().parent
SCRIPTS_DIR = ROOT_DIR / "scripts"

sys.path.insert(0, str(ROOT_DIR))
from dclose.config import load_config

SERVICE = load_config()["service"]
BACKEND_HOST = os.getenv("HOST", SERVICE["host"])
BACKEND_PORT = int(os.getenv("PORT", str(SERVICE["port"])))

# 存储子进程
processes = []


def log(msg):
    print(f"[Launcher] {msg}")


def start_backend(reload: bool = False):
    """启动分析服务"""
    log(f"启动分析服务 ({BACKEND_HOST}:{BACKEND_PORT})...")
    env = os.environ.copy()
    env["HOST"] = BACKEND_HOST
    env["PORT"] = str(BACKEND_PORT)

    if reload:
        cmd = [
            sys.executable, "-m", "uvicorn", "serve_report:app",
            "--host", BACKEND_HOST, "--port", str(BACKEND_PORT), "--reload",
        ]
    else:
        cmd = [sys.executable, str(SCRIPTS_DIR / "serve_report.py")]

    proc = subprocess.Popen(
        cmd,
        cwd=SCRIPTS_DIR,
        env=env,
        stdout=subprocess.PIPE,
        stderr=subprocess.STDOUT,
        encoding="utf-8",
        errors="replace",
        bufsize=1,
        start_new_session=sys.platform != "win32",
    )
    processes.append(("Backend", proc))
    return proc


def wait_for_backend(timeout=30):
    """等待服务端口可连接"""
    log("等待服务就绪...")
    start_time = time.time()

    while time.time() - start_time < timeout:
        try:
            with socket.create_connection((BACKEND_HOST, BACKEND_PORT), timeout=1):
                log("服务已就绪")
                return True
        except OSError:
            pass
        time.sleep(0.3)

    log("警告: 服务启动超时")
    return False


def _stream_reader(proc, name):
    """在独立线程中持续读取进程输出并打印"""
    try:
        for line in proc.stdout:
            print(f"[{name}] {line.rstrip()}")
    except (IOError, ValueError, OSError):
        pass


def cleanup():
    """清理所有子进程"""
    log("正在关闭服务...")

    for name, proc in processes:
        if proc.poll() is not None:
            continue
        log(f"终止 {name}...")
        try:
            if sys.platform == "win32":
                subprocess.run(["taskkill", "/F", "/T", "/PID", str(proc.pid)], capture_output=True, timeout=5)
            else:
                os.killpg(os.getpgid(proc.pid), signal.SIGTERM)
        except (ProcessLookupError, subprocess.TimeoutExpired):
            pass
        except Exception as e:
            log(f"警告: 终止 {name} 失败: {e}")

    for name, proc in processes:
        try:
            proc.wait(timeout=3)
        except subprocess.TimeoutExpired:
            log(f"警告: {name} 未能在超时时间内终止")

    log("服务已关闭")


def signal_handler(signum, frame):
    """处理退出信号"""
    print()
    cleanup()
    sys.exit(0)


def main():
    reload = "--reload" in sys.argv

    signal.signal(signal.SIGINT, signal_handler)
    signal.signal(signal.SIGTERM, signal_handler)

    log("=" * 50)
    log("有向闭包分析服务 - 一键启动")
    log(f"模式: {'开发模式（自动重载）' if reload else '生产模式'}")
    log("=" * 50)

    try:
        backend_proc = start_backend(reload)
        threading.Thread(target=_stream_reader, args=(backend_proc, "Backend"), daemon=True).start()
        if not wait_for_backend():
            return

        log(f"  API: http://{BACKEND_HOST}:{BACKEND_PORT}")
        log(f"  文档: http://{BACKEND_HOST}:{BACKEND_PORT}/docs")
        log("按 Ctrl+C 停止服务")

        while backend_proc.poll() is None:
            time.sleep(0.5)
        log(f"服务已退出 (code {backend_proc.returncode})")
    except KeyboardInterrupt:
        pass
    except Exception as e:
        log(f"错误: {e}")
    finally:
        cleanup()


if __name__ == "__main__":
    main()
