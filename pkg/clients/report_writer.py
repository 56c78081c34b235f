import logging
import os
from typing import Optional

import click

from clients.bundle_file import BundleFile

logger = logging.getLogger(__name__)


class ReportWriter:
    """Вывод отчетов: строки в stdout, файлы отчета и сводки в каталог --out"""

    def __init__(self, files: BundleFile):
        self.files = files

    def echo(self, text: str, err: bool = False) -> None:
        click.echo(text, err=err)

    def save(self, directory: Optional[str], filename: str, text: str) -> Optional[str]:
        """Сохраняет text в directory/filename; без каталога ничего не пишет"""
        if not directory:
            return None
        path = os.path.join(directory, filename)
        self.files.write(path, text if text.endswith("\n") else text + "\n")
        logger.info("saved %s", path)
        return path
