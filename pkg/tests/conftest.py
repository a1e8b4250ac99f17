"""
Shared fixtures: one catalog, engine and analyzer per test session, and lazily
computed family searches.
"""

import pytest

from coxtet.catalog import CoxeterCatalog
from coxtet.config import EngineConfig
from coxtet.crossref import FAMILIES, resolve_actor
from coxtet.engine import DecompositionEngine
from coxtet.models import RIGHT_ANGLE, AngleFrac
from coxtet.second_type import SecondTypeAnalyzer


@pytest.fixture(scope="session")
def cache_dir(tmp_path_factory):
    return tmp_path_factory.mktemp("coxtet-cache")


@pytest.fixture(scope="session")
def config(cache_dir):
    return EngineConfig(cache_dir=str(cache_dir))


@pytest.fixture(scope="session")
def catalog(config):
    return CoxeterCatalog(config)


@pytest.fixture(scope="session")
def engine(catalog, config):
    return DecompositionEngine(catalog, config)


@pytest.fixture(scope="session")
def analyzer(catalog, config, engine):
    return SecondTypeAnalyzer(catalog, config, engine)


@pytest.fixture(scope="session")
def actor(catalog):
    return lambda name: resolve_actor(catalog, name)


@pytest.fixture(scope="session")
def family_search(catalog, engine):
    results = {}

    def search(name):
        if name not in results:
            results[name] = engine.search_first_type(catalog.lookup(FAMILIES[name].diagram))
        return results[name]

    return search


@pytest.fixture(scope="session")
def doubled_orthoscheme(catalog, engine):
    """[5,3,4] glued to itself across its end face with the pi/4 edge."""
    F = catalog.lookup("[5,3,4]")
    seed = engine.seed(F)
    shape = seed.shape
    for p in range(4):
        angles = sorted((shape.angle(p, j) for j in range(4) if j != p), key=lambda a: a.fraction)
        if angles[1:] == [RIGHT_ANGLE, RIGHT_ANGLE] and angles[0] == AngleFrac.coxeter(4):
            return F, seed, p, engine.glue(seed, p, seed, p, (0, 1, 2, 3))
    raise AssertionError("no end face with a pi/4 edge")
