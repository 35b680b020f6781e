"""QET execution: one task per node, bounded channels, data pushed up as available.

Bags flow between nodes as uint64 oid chunks.  The first error wins: it cancels every
task of the query and surfaces to the caller; other queries and the process are
unaffected.  Set operations use multiset semantics (union concatenates, intersection
takes minimum multiplicity, difference saturates, distinct keeps the support set).
"""

from __future__ import annotations

import queue
import threading
from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from ..errors import Cancelled, SkyqlError
from ..htm import unit_vector
from ..planner import (
    AssociationQuery,
    BagLiteral,
    BagQuery,
    Difference,
    Distinct,
    Intersection,
    ProximityQuery,
    ScopedQuery,
    Union,
)
from ..storage import Federation
from ..sxql.typecheck import BoundSelectItem
from .eval import BagFrame, ContainerFrame, eval_vector, expand_association, gather_member

_SENTINEL = None
_TICK = 0.05


@dataclass
class ExecutionContext:
    fed: Federation
    cancel: threading.Event = field(default_factory=threading.Event)
    chunk_size: int = 4096
    queue_size: int = 8
    leaf_runner: object = None      # callable(ScopedQuery, ctx) -> iter of oid chunks
    _error: list = field(default_factory=list)
    _lock: threading.Lock = field(default_factory=threading.Lock)

    def fail(self, exc: BaseException):
        with self._lock:
            if not self._error:
                self._error.append(exc)
        self.cancel.set()

    @property
    def error(self):
        return self._error[0] if self._error else None

    def check(self):
        if self._error:
            raise self._error[0]
        if self.cancel.is_set():
            raise Cancelled("query cancelled")


def _put(ctx: ExecutionContext, q: queue.Queue, item):
    while True:
        if ctx.cancel.is_set():
            raise Cancelled("query cancelled")
        try:
            q.put(item, timeout=_TICK)
            return
        except queue.Full:
            continue


def _iter_queue(ctx: ExecutionContext, q: queue.Queue, producers: int = 1):
    done = 0
    while True:
        if ctx._error:
            raise ctx._error[0]
        if ctx.cancel.is_set():
            raise Cancelled("query cancelled")
        try:
            item = q.get(timeout=_TICK)
        except queue.Empty:
            continue
        if item is _SENTINEL:
            done += 1
            if done == producers:
                return
            continue
        yield item


def _spawn(ctx: ExecutionContext, gen_fn, out_q: queue.Queue):
    def run():
        try:
            for chunk in gen_fn():
                _put(ctx, out_q, chunk)
            _put(ctx, out_q, _SENTINEL)
        except Cancelled:
            try:
                out_q.put_nowait(_SENTINEL)
            except queue.Full:
                pass
        except BaseException as exc:  # noqa: BLE001 - first error wins, query-scoped
            ctx.fail(exc)
            try:
                out_q.put_nowait(_SENTINEL)
            except queue.Full:
                pass
    t = threading.Thread(target=run, daemon=True)
    t.start()
    return t


def scan_scoped_chunks(node: ScopedQuery, ctx: ExecutionContext):
    """Local evaluation of a scoped leaf: scan each container, vector predicate."""
    for entry in node.scope.entries:
        ctx.check()
        frame = ContainerFrame(ctx.fed, entry.database, entry.container)
        if frame.n == 0:
            continue
        oids = frame.oids()
        if node.predicate is None:
            keep = oids
        else:
            mask = np.ones(frame.n, dtype=bool)
            res, _ = eval_vector(node.predicate, frame, mask)
            res = res if isinstance(res, np.ndarray) else np.full(frame.n, bool(res))
            keep = oids[res.astype(bool)]
        for i in range(0, len(keep), ctx.chunk_size):
            yield keep[i:i + ctx.chunk_size]


def _node_output_class(node) -> str:
    if isinstance(node, BagLiteral):
        return node.class_name
    if isinstance(node, ScopedQuery):
        return node.class_name
    if isinstance(node, BagQuery):
        return node.class_name
    if isinstance(node, AssociationQuery):
        return node.target_class
    if isinstance(node, ProximityQuery):
        return node.class_name
    if isinstance(node, Union):
        return _node_output_class(node.children[0])
    if isinstance(node, (Intersection, Difference)):
        return _node_output_class(node.left)
    if isinstance(node, Distinct):
        return _node_output_class(node.child)
    raise SkyqlError(f"unknown node {node!r}")


def _build(node, ctx: ExecutionContext, threads: list) -> queue.Queue:
    """Start the task for `node` (and its subtree); returns its output channel."""
    out_q = queue.Queue(maxsize=ctx.queue_size)

    if isinstance(node, BagLiteral):
        def gen_literal():
            data = np.asarray(node.oids, dtype=np.uint64)
            for i in range(0, len(data), ctx.chunk_size):
                yield data[i:i + ctx.chunk_size]
        threads.append(_spawn(ctx, gen_literal, out_q))
        return out_q

    if isinstance(node, ScopedQuery):
        if ctx.leaf_runner is not None:
            threads.append(_spawn(ctx, lambda: ctx.leaf_runner(node, ctx), out_q))
        else:
            threads.append(_spawn(ctx, lambda: scan_scoped_chunks(node, ctx), out_q))
        return out_q

    if isinstance(node, BagQuery):
        in_q = _build(node.child, ctx, threads)

        def gen():
            for chunk in _iter_queue(ctx, in_q):
                frame = BagFrame(ctx.fed, chunk, node.class_name)
                res, _ = eval_vector(node.predicate, frame, np.ones(frame.n, bool))
                res = res if isinstance(res, np.ndarray) else np.full(frame.n, bool(res))
                kept = chunk[res.astype(bool)]
                if len(kept):
                    yield kept
        threads.append(_spawn(ctx, gen, out_q))
        return out_q

    if isinstance(node, AssociationQuery):
        in_q = _build(node.child, ctx, threads)

        def gen():
            for chunk in _iter_queue(ctx, in_q):
                targets = expand_association(ctx.fed, chunk, node.link)
                if node.predicate is not None and len(targets):
                    frame = BagFrame(ctx.fed, targets, node.target_class)
                    res, _ = eval_vector(node.predicate, frame, np.ones(frame.n, bool))
                    res = res if isinstance(res, np.ndarray) else np.full(frame.n, bool(res))
                    targets = targets[res.astype(bool)]
                for i in range(0, len(targets), ctx.chunk_size):
                    yield targets[i:i + ctx.chunk_size]
        threads.append(_spawn(ctx, gen, out_q))
        return out_q

    if isinstance(node, ProximityQuery):
        in_q = _build(node.child, ctx, threads)
        c = unit_vector(node.cone.center_ra, node.cone.center_dec)
        cos_r = np.cos(node.cone.radius_rad)

        def gen():
            for chunk in _iter_queue(ctx, in_q):
                x = gather_member(ctx.fed, chunk, None, "cx")
                y = gather_member(ctx.fed, chunk, None, "cy")
                z = gather_member(ctx.fed, chunk, None, "cz")
                dot = c[0] * x + c[1] * y + c[2] * z
                kept = chunk[dot >= cos_r]
                if len(kept):
                    yield kept
        threads.append(_spawn(ctx, gen, out_q))
        return out_q

    if isinstance(node, Union):
        qs = [_build(child, ctx, threads) for child in node.children]

        def fan_in(child_q):
            def gen():
                yield from _iter_queue(ctx, child_q)
            return gen
        counter_q = out_q
        done_count = len(qs)

        def gen_all():
            # merge by polling each child queue through one pump thread each
            merged = queue.Queue(maxsize=ctx.queue_size)
            pumps = [_spawn(ctx, fan_in(q), merged) for q in qs]
            yield from _iter_queue(ctx, merged, producers=done_count)
            for p in pumps:
                p.join(timeout=1.0)
        threads.append(_spawn(ctx, gen_all, counter_q))
        return out_q

    if isinstance(node, (Intersection, Difference)):
        right_q = _build(node.right, ctx, threads)
        left_q = _build(node.left, ctx, threads)
        is_diff = isinstance(node, Difference)

        def gen():
            right = Counter()
            for chunk in _iter_queue(ctx, right_q):
                right.update(chunk.tolist())
            seen: Counter = Counter()
            for chunk in _iter_queue(ctx, left_q):
                out = []
                for o in chunk.tolist():
                    seen[o] += 1
                    if is_diff:
                        # saturating subtraction: skip the first right[o] occurrences
                        if seen[o] > right.get(o, 0):
                            out.append(o)
                    else:
                        # min multiplicity
                        if seen[o] <= right.get(o, 0):
                            out.append(o)
                if out:
                    yield np.array(out, dtype=np.uint64)
        threads.append(_spawn(ctx, gen, out_q))
        return out_q

    if isinstance(node, Distinct):
        in_q = _build(node.child, ctx, threads)

        def gen():
            seen = set()
            for chunk in _iter_queue(ctx, in_q):
                out = []
                for o in chunk.tolist():
                    if o not in seen:
                        seen.add(o)
                        out.append(o)
                if out:
                    yield np.array(out, dtype=np.uint64)
        threads.append(_spawn(ctx, gen, out_q))
        return out_q

    raise SkyqlError(f"unknown node {node!r}")


@dataclass
class RowBlock:
    """A batch of extracted rows: column arrays plus per-column validity."""
    names: list[str]
    columns: list[np.ndarray]
    valids: list[np.ndarray | None]
    oids: np.ndarray

    def __len__(self):
        return len(self.oids)

    def rows(self):
        n = len(self.oids)
        for i in range(n):
            yield tuple(
                None if (v is not None and not v[i]) else c[i].item()
                for c, v in zip(self.columns, self.valids)
            )


def expand_select(select: list[BoundSelectItem]) -> list[str]:
    """Output column names with whole-array items expanded."""
    names = []
    for item in select:
        if item.array_length:
            names.extend(f"{item.name}_{k}" for k in range(item.array_length))
        else:
            names.append(item.name)
    return names


def extract_block(fed: Federation, oids: np.ndarray, class_name: str,
                  select: list[BoundSelectItem]) -> RowBlock:
    """Evaluate the select list over a bag chunk."""
    frame = BagFrame(fed, oids, class_name)
    mask = np.ones(frame.n, dtype=bool)
    names: list[str] = []
    cols: list[np.ndarray] = []
    valids: list[np.ndarray | None] = []
    for item in select:
        if item.array_length:
            from ..sxql.ast import MemberPath
            assert isinstance(item.expr, MemberPath)
            segs = item.expr.segs
            for k in range(item.array_length):
                sub = [s for s in segs[:-1]] + [type(segs[-1])(segs[-1].name, k, False)]
                vals, valid = eval_vector(MemberPath(sub), frame, mask)
                names.append(f"{item.name}_{k}")
                cols.append(np.asarray(vals))
                valids.append(valid)
        else:
            vals, valid = eval_vector(item.expr, frame, mask)
            if not isinstance(vals, np.ndarray):
                vals = np.full(frame.n, vals)
            names.append(item.name)
            cols.append(vals)
            valids.append(valid)
    return RowBlock(names, cols, valids, oids)


class ResultStream:
    """Streaming rows of one query execution; closing cancels the node tasks."""

    def __init__(self, ctx: ExecutionContext, block_iter, names: list[str]):
        self.ctx = ctx
        self._blocks = block_iter
        self.names = names

    def blocks(self):
        try:
            for b in self._blocks:
                yield b
        except BaseException:
            self.ctx.cancel.set()
            raise

    def rows(self):
        for b in self.blocks():
            yield from b.rows()

    def close(self):
        self.ctx.cancel.set()


def execute(qet, select: list[BoundSelectItem], ctx: ExecutionContext,
            count_only: bool = False, class_name: str | None = None):
    """Run a QET.  count_only returns the row count; otherwise a ResultStream."""
    threads: list = []
    out_class = class_name or _node_output_class(qet)
    root_q = _build(qet, ctx, threads)
    if count_only:
        total = 0
        try:
            for chunk in _iter_queue(ctx, root_q):
                total += len(chunk)
        except BaseException:
            ctx.cancel.set()
            raise
        if ctx.error:
            raise ctx.error
        return total

    def blocks():
        for chunk in _iter_queue(ctx, root_q):
            yield extract_block(ctx.fed, chunk, out_class, select)
        if ctx.error:
            raise ctx.error
    return ResultStream(ctx, blocks(), expand_select(select))


def execute_sequential(qet, fed: Federation) -> np.ndarray:
    """Single-task bottom-up reference evaluation (materialized bag per node)."""
    if isinstance(qet, BagLiteral):
        return np.asarray(qet.oids, dtype=np.uint64)
    if isinstance(qet, ScopedQuery):
        ctx = ExecutionContext(fed=fed)
        chunks = list(scan_scoped_chunks(qet, ctx))
        return np.concatenate(chunks) if chunks else np.zeros(0, np.uint64)
    if isinstance(qet, BagQuery):
        bag = execute_sequential(qet.child, fed)
        if not len(bag):
            return bag
        frame = BagFrame(fed, bag, qet.class_name)
        res, _ = eval_vector(qet.predicate, frame, np.ones(frame.n, bool))
        res = res if isinstance(res, np.ndarray) else np.full(frame.n, bool(res))
        return bag[res.astype(bool)]
    if isinstance(qet, AssociationQuery):
        bag = execute_sequential(qet.child, fed)
        targets = expand_association(fed, bag, qet.link)
        if qet.predicate is not None and len(targets):
            frame = BagFrame(fed, targets, qet.target_class)
            res, _ = eval_vector(qet.predicate, frame, np.ones(frame.n, bool))
            res = res if isinstance(res, np.ndarray) else np.full(frame.n, bool(res))
            targets = targets[res.astype(bool)]
        return targets
    if isinstance(qet, ProximityQuery):
        bag = execute_sequential(qet.child, fed)
        if not len(bag):
            return bag
        c = unit_vector(qet.cone.center_ra, qet.cone.center_dec)
        x = gather_member(fed, bag, None, "cx")
        y = gather_member(fed, bag, None, "cy")
        z = gather_member(fed, bag, None, "cz")
        return bag[(c[0] * x + c[1] * y + c[2] * z) >= np.cos(qet.cone.radius_rad)]
    if isinstance(qet, Union):
        parts = [execute_sequential(c, fed) for c in qet.children]
        parts = [p for p in parts if len(p)]
        return np.concatenate(parts) if parts else np.zeros(0, np.uint64)
    if isinstance(qet, (Intersection, Difference)):
        left = execute_sequential(qet.left, fed)
        right = Counter(execute_sequential(qet.right, fed).tolist())
        seen: Counter = Counter()
        out = []
        for o in left.tolist():
            seen[o] += 1
            if isinstance(qet, Difference):
                if seen[o] > right.get(o, 0):
                    out.append(o)
            elif seen[o] <= right.get(o, 0):
                out.append(o)
        return np.array(out, dtype=np.uint64)
    if isinstance(qet, Distinct):
        bag = execute_sequential(qet.child, fed)
        seen = set()
        out = []
        for o in bag.tolist():
            if o not in seen:
                seen.add(o)
                out.append(o)
        return np.array(out, dtype=np.uint64)
    raise SkyqlError(f"unknown node {qet!r}")
