import warnings

import pytest

with warnings.catch_warnings():
    warnings.simplefilter("ignore")
    from starlette.testclient import TestClient

from maccesec.fixtures import data_path
from maccesec.mac_codec import default_registry
from maccesec.policy import default_ce_field_map, default_policy
from maccesec.protection import load_key_slots
from maccesec.service import create_app


@pytest.fixture(scope="session")
def registry():
    return default_registry()


@pytest.fixture(scope="session")
def policy():
    return default_policy()


@pytest.fixture(scope="session")
def cefmap():
    return default_ce_field_map()


@pytest.fixture(scope="session")
def slots():
    return load_key_slots(data_path("keys_demo.json"))


@pytest.fixture(scope="session")
def slot(slots):
    return slots[min(slots)]


@pytest.fixture(scope="session")
def client():
    return TestClient(create_app())
