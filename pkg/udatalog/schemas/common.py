"""
Common Pydantic schemas used across the interpreter.
"""
from pydantic import BaseModel, ConfigDict


class KernelModel(BaseModel):
    """Base schema for reports that carry kernel syntax objects."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)
