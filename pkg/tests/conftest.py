from pathlib import Path

import pytest

from assembly.assembly_models import AssemblyClass
from assembly.goal_io import load_catalog
from planning.planner import load_domains, plan

ROOT = Path(__file__).resolve().parent.parent


@pytest.fixture(scope="session")
def catalog():
    return load_catalog(ROOT / "catalog")


@pytest.fixture(scope="session")
def domains():
    return load_domains(ROOT / "domains")


@pytest.fixture(scope="session")
def easy_plans(catalog, domains):
    """goal_id -> (FinePlan, PlanningStats) for every easy goal, planned once."""
    plans = {}
    for goal in catalog.goals_of(AssemblyClass.EASY):
        plans[goal.goal_id] = plan(goal, catalog, domains.coarse, domains.fine, domains.bridge)
    return plans
