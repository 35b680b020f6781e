"""skyql: a desk-scale astronomical catalog query engine.

SXQL language front end, HTM-scoped query planning, a concurrent query execution
engine over a partitioned object store, and a multi-session query agent.
"""

__version__ = "0.1.0"
