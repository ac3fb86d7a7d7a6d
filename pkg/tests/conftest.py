"""Shared fixtures: desk-scale banks and solved runs, built once per session."""

from __future__ import annotations

import pytest

from forge import bank as bankmod
from forge import model


@pytest.fixture(scope="session")
def desk_sets():
    return model.SetsSpec.desk_scale()


@pytest.fixture(scope="session")
def desk_baseline(desk_sets):
    return model.synthesize_baseline(desk_sets, seed=7)


@pytest.fixture(scope="session")
def fm_bank(desk_sets):
    return bankmod.generate_bank("fm", desk_sets, seed=7)


@pytest.fixture(scope="session")
def agri_bank(desk_sets):
    return bankmod.generate_bank("agri", desk_sets, seed=7)


@pytest.fixture(scope="session")
def fm_runs(fm_bank):
    return bankmod.run_bank(fm_bank, workers=4)


@pytest.fixture(scope="session")
def agri_runs(agri_bank):
    return bankmod.run_bank(agri_bank, workers=4)
