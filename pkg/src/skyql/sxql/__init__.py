"""SXQL: lexer, parser, macro expansion, validation, printing."""

from .ast import (  # noqa: F401
    Binary,
    ClassSource,
    Exist,
    Expr,
    FuncCall,
    Literal,
    MacroCall,
    MemberPath,
    PathSeg,
    Prox,
    QueryTree,
    SelectItem,
    Unary,
    conjoin,
    conjuncts,
    expr_from_json,
    expr_to_json,
)
from .lexer import tokenize  # noqa: F401
from .macros import expand_macros, source_class  # noqa: F401
from .parser import parse  # noqa: F401
from .printer import derive_name, print_expr, print_query  # noqa: F401
from .typecheck import BoundQuery, BoundSelectItem, parse_expr, validate  # noqa: F401
