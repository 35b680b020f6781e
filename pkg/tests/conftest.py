from __future__ import annotations

import pytest

from skyql.agent import hash_password
from skyql.bench.oracle import OracleCatalog
from skyql.loader import generate_synthetic, load
from skyql.query import load_flux
from skyql.storage import Federation

TINY_N = 3000
TINY_SEED = 42


@pytest.fixture(scope="session")
def tiny_paths(tmp_path_factory):
    root = tmp_path_factory.mktemp("tiny")
    csv_dir = root / "csv"
    fed_dir = root / "fed"
    generate_synthetic(TINY_N, TINY_SEED, csv_dir)
    load(csv_dir, partitions=3, htm_depth=8, out_federation=fed_dir,
         generator_seed=TINY_SEED)
    return {"csv": csv_dir, "fed": fed_dir}


@pytest.fixture(scope="session")
def tiny_fed(tiny_paths):
    return Federation(tiny_paths["fed"])


@pytest.fixture(scope="session")
def tiny_flux(tiny_fed):
    return load_flux(tiny_fed)


@pytest.fixture(scope="session")
def tiny_oracle(tiny_paths, tiny_fed):
    return OracleCatalog(tiny_paths["csv"], tiny_fed.schema)


@pytest.fixture(scope="session")
def corpus():
    from skyql.bench.corpus import corpus_by_id
    return corpus_by_id()


def agent_users():
    return [{"user": "astro", "salt": "s1",
             "password_sha256": hash_password("s1", "orion")}]


@pytest.fixture()
def agent_factory(tiny_paths, tmp_path):
    """Start agents against the tiny federation; stopped at test end."""
    from skyql.agent import AgentConfig, QueryAgent
    agents = []

    def make(**overrides):
        kwargs = dict(federation=str(tiny_paths["fed"]), tcp_port=0, ws_port=None,
                      users=agent_users(), output_root=str(tmp_path),
                      partition_map="__missing__")
        kwargs.update(overrides)
        if kwargs.get("partition_map") == "__missing__":
            kwargs["partition_map"] = str(tiny_paths["fed"] / "partitions.json")
        config = AgentConfig(**kwargs)
        agent = QueryAgent(config)
        agent.start()
        agents.append(agent)
        return agent

    yield make
    for a in agents:
        a.stop()
