"""Query execution: evaluation routes, node tasks, set operations, extraction."""

from .eval import BagFrame, ContainerFrame, eval_predicate, eval_vector  # noqa: F401
from .executor import (  # noqa: F401
    ExecutionContext,
    ResultStream,
    RowBlock,
    execute,
    execute_sequential,
    extract_block,
)
