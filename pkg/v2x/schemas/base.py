from pydantic import BaseModel, ConfigDict


class StrictModel(BaseModel):
    """Base for every JSON-backed model: unknown keys are a hard error, instances are immutable."""
    model_config = ConfigDict(extra='forbid', frozen=True, populate_by_name=True)
