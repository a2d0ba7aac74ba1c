"""
启动智能体注册/消息服务
"""

import logging
import sys

from src.config import load_config, resolve_bind
from web.app import serve


def main():
    """按配置（或环境变量 MACI_BIND）启动服务"""
    config = load_config()
    logging.basicConfig(level=getattr(logging, str(config["logging"].get("level", "INFO")).upper(), logging.INFO),
                        format='%(asctime)s - %(levelname)s - %(message)s')
    host, port = resolve_bind(config, sys.argv[1] if len(sys.argv) > 1 else None)

    print("正在启动注册服务...")
    print(f"访问地址: http://{host}:{port}/health")
    print("按 Ctrl+C 停止服务")

    try:
        serve(host, port, config.get("generator"))
    except KeyboardInterrupt:
        print("\n服务已停止")


if __name__ == "__main__":
    main()
