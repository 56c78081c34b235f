import logging
import sys

from dotenv import load_dotenv

from config.config import app_config


def configure_logging() -> None:
    logging.basicConfig(level=app_config.logging.level, format=app_config.logging.format, stream=sys.stderr)


if __name__ == '__main__':
    load_dotenv()
    configure_logging()

    from app.cli.commands import cli_main

    sys.exit(cli_main())
