import logging
from pathlib import Path

from app.exception.bundle_error import BundleError

logger = logging.getLogger(__name__)


class BundleFile:
    """Файловый клиент бандлов: только текст, разбор схемы делает репозиторий"""

    def __init__(self, encoding: str = "utf-8"):
        self.encoding = encoding

    def exists(self, path: str) -> bool:
        return Path(path).is_file()

    def read(self, path: str) -> str:
        try:
            return Path(path).read_text(encoding=self.encoding)
        except (OSError, UnicodeDecodeError) as e:
            raise BundleError(path, "", f"не удалось прочитать файл: {e}")

    def write(self, path: str, text: str) -> None:
        target = Path(path)
        try:
            target.parent.mkdir(parents=True, exist_ok=True)
            target.write_text(text, encoding=self.encoding)
        except OSError as e:
            raise BundleError(path, "", f"не удалось записать файл: {e}")
        logger.debug("wrote %d bytes to %s", len(text), path)
