import pytest

from cardroom import datagen, presets


@pytest.fixture(scope="session")
def all_presets():
    return {name: presets.load_preset(name)
            for name in presets.BASE_PRESETS + presets.APPENDIX_PRESETS}


@pytest.fixture(scope="session")
def texas():
    return presets.load_preset("texas_holdem")


@pytest.fixture(scope="session")
def seeded_logs():
    """A small pool of finished rounds shared across tests (2 per preset)."""
    logs = []
    for name in presets.BASE_PRESETS:
        spec = presets.load_preset(name)
        for seed in (1, 2):
            logs.append(datagen.simulate_round(spec, seed))
    return logs
