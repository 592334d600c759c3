import asyncio
import functools
import os
from typing import Callable, ParamSpec, TypeVar

_T = TypeVar("_T")
_P = ParamSpec("_P")

THREADS_ENV = "ESSLAB_THREADS"


async def run_in_threadpool(func: Callable[_P, _T], *args: _P.args, **kwargs: _P.kwargs) -> _T:
    return await asyncio.to_thread(functools.partial(func, *args, **kwargs))


async def gather_bounded(limit: int, calls: list[Callable[[], _T]]) -> list[_T]:
    """Run zero-argument callables in the threadpool, at most ``limit`` at a time."""
    semaphore = asyncio.Semaphore(limit)

    async def bounded(call: Callable[[], _T]) -> _T:
        async with semaphore:
            return await run_in_threadpool(call)

    return await asyncio.gather(*(bounded(call) for call in calls))


def resolve_threads(threads: int | None = None) -> int:
    if threads is None:
        raw = os.environ.get(THREADS_ENV, "1")
        try:
            threads = int(raw)
        except ValueError:
            raise ValueError(f"`{THREADS_ENV}` must be an integer, got {raw!r}") from None
    if threads < 1:
        raise ValueError(f"threads must be at least 1, got {threads}")
    return threads
