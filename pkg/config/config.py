import os
from pathlib import Path
from typing import Optional

from dotenv import load_dotenv
from pydantic import BaseModel, Field
from ruamel.yaml import YAML

yaml = YAML()
yaml.preserve_quotes = True

CONFIG_DIR = Path(__file__).resolve().parent

# каталог вывода по умолчанию можно задать в окружении или в .env
OUT_DIR_ENV = "WORKBENCH_OUT_DIR"


class LimitsConfig(BaseModel):
    # наибольший размер семейства в переборах; None - все семейства
    max_family: Optional[int] = Field(default=None, ge=0)
    # до этого числа семейств компонент преобразования перебираются полностью
    transformation_bound: Optional[int] = Field(default=4096, ge=1)
    seed: int = 0


class OutputConfig(BaseModel):
    directory: Optional[str] = None


class LoggingConfig(BaseModel):
    level: str = "WARNING"
    format: str = "%(asctime)s %(levelname)s %(name)s: %(message)s"


class Config(BaseModel):
    limits: LimitsConfig = Field(default_factory=LimitsConfig)
    output: OutputConfig = Field(default_factory=OutputConfig)
    logging: LoggingConfig = Field(default_factory=LoggingConfig)

    @classmethod
    def load(cls, path: Path = CONFIG_DIR / "values.yaml") -> "Config":
        load_dotenv()
        with open(path) as f:
            data = yaml.load(f) or {}
        config = cls(**data)
        if os.getenv(OUT_DIR_ENV):
            config.output.directory = os.getenv(OUT_DIR_ENV)
        return config


app_config: Config = Config.load()
