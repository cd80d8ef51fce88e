import argparse
import os

import uvicorn

from .app import ServiceConfig, create_app
from .model import DEFAULT_MODEL


def main():
    parser = argparse.ArgumentParser(
        description="Masked-LM substitute scoring service")
    parser.add_argument("--model", default=os.environ.get("SWSDS_MLM_MODEL",
                                                          DEFAULT_MODEL))
    parser.add_argument("--host", default=os.environ.get("SWSDS_MLM_HOST",
                                                         "127.0.0.1"))
    parser.add_argument("--port", type=int,
                        default=int(os.environ.get("SWSDS_MLM_PORT", "8321")))
    parser.add_argument("--max-batch", type=int,
                        default=int(os.environ.get("SWSDS_MLM_MAX_BATCH", "128")))
    parser.add_argument("--device", default=os.environ.get("SWSDS_MLM_DEVICE",
                                                           "cpu"),
                        choices=["cpu", "cuda"])
    args = parser.parse_args()
    config = ServiceConfig(model_id=args.model, host=args.host, port=args.port,
                           max_batch=args.max_batch, device=args.device)
    app = create_app(config)
    uvicorn.run(app, host=config.host, port=config.port)


if __name__ == "__main__":
    main()
