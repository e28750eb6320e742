import json
import asyncio
import logging
import aiofiles
from typing import Dict, Any

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from errors import DocumentSyntaxError
from utils import parse_eps

logger = logging.getLogger("ConfigManager")


class CheckerSettings(BaseModel):
    """Defaults for the checking commands; every one can be overridden by a flag."""
    model_config = ConfigDict(extra="forbid")

    default_depth: int = Field(6, ge=0)
    eps: str = "1e-9"
    max_iter: int = Field(1_000_000, ge=1)
    bruteforce_budget: int = Field(65536, ge=1)

    @field_validator("eps")
    @classmethod
    def eps_is_positive(cls, value: str) -> str:
        parse_eps(value)
        return value


class AppSettings(BaseModel):
    model_config = ConfigDict(extra="forbid")

    log_level: str = "WARNING"
    pretty: bool = False

    @field_validator("log_level")
    @classmethod
    def known_level(cls, value: str) -> str:
        value = value.upper()
        if value not in {"DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"}:
            raise ValueError(f"unknown log level {value!r}")
        return value


class Settings(BaseModel):
    checker_settings: CheckerSettings = Field(default_factory=CheckerSettings)
    app_settings: AppSettings = Field(default_factory=AppSettings)


class ConfigManager:
    """
    Reads config.json. A missing file means "use the defaults"; a file that
    exists but is broken is an input error.
    """
    def __init__(self, config_path: str = "config.json"):
        self.config_path = config_path
        self._lock = asyncio.Lock()

    async def get_config(self) -> Dict[str, Any]:
        async with self._lock:
            try:
                async with aiofiles.open(self.config_path, "r", encoding="utf-8") as f:
                    content = await f.read()
            except FileNotFoundError:
                logger.info(f"No config at {self.config_path}, using defaults")
                return {}
        try:
            return json.loads(content)
        except json.JSONDecodeError as e:
            raise DocumentSyntaxError(f"config {self.config_path}: {e.msg}", e.pos) from None

    async def get_settings(self) -> Settings:
        config = await self.get_config()
        try:
            return Settings.model_validate(config)
        except ValidationError as e:
            loc = ".".join(str(part) for part in e.errors()[0]["loc"]) if e.errors() else None
            raise DocumentSyntaxError(f"config {self.config_path}: invalid setting", loc) from None
