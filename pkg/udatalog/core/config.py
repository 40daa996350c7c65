"""
Interpreter configuration settings.
"""
from typing import List, Optional, Union

from pydantic import field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    # Tool identity
    PROJECT_NAME: str = "U-Datalog Interpreter"
    VERSION: str = "1.0.0"
    DESCRIPTION: str = "Deferred-update Datalog with stratified negation"

    # Logging
    LOG_LEVEL: str = "WARNING"

    # Fresh variable numbering (UDATALOG_SEED)
    SEED: int = 0

    # Evaluation bounds
    UNFOLD_CAP: Optional[int] = None  # None means TC_MAX_STEPS
    TC_MAX_STEPS: int = 32
    MAX_FIXPOINT_ROUNDS: int = 10000

    # Universe overrides; a plain string is accepted so "a,b" need not be JSON
    EXTRA_DOMAIN: Union[List[str], str] = []

    @field_validator("EXTRA_DOMAIN", mode="before")
    def assemble_domain(cls, v: Union[str, List[str]]) -> List[str]:
        if isinstance(v, str) and not v.startswith("["):
            return [i.strip() for i in v.split(",") if i.strip()]
        elif isinstance(v, list):
            return v
        raise ValueError(v)

    # CLI rendering
    VERBOSE: bool = False
    NO_COLOR: bool = False

    model_config = SettingsConfigDict(
        env_prefix="UDATALOG_",
        env_file=".env",
        case_sensitive=True,
        extra="ignore",
    )


settings = Settings()
