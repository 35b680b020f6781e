"""Query agent: server, partition slaves, protocol, client."""

from .client import AgentError, RunResult, SkyqlClient, connect  # noqa: F401
from .protocol import JobState, QueryJob, Transport  # noqa: F401
from .server import AgentConfig, QueryAgent, hash_password  # noqa: F401
from .slave import SlaveServer  # noqa: F401
