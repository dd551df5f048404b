from typing import Optional

from pydantic import BaseModel, Field

from assembly.assembly_models import AssemblyClass


class PlanRequest(BaseModel):
    goal_id: Optional[str] = Field(default=None, description="A goal of the catalog.")
    goal_xml: Optional[str] = Field(default=None, description="A goal file, used instead of goal_id.")


class RunRequest(BaseModel):
    assembly_class: AssemblyClass
    out_dir: str
    config_toml: Optional[str] = Field(
        default=None, description="Simulator config; the shipped baseline when omitted."
    )
    seed: Optional[int] = Field(default=None, ge=0, lt=2**64)
    parallel_goals: bool = False


class ReplayRequest(BaseModel):
    goal_id: str
    trace: str = Field(description="Trace file contents (JSON lines).")
