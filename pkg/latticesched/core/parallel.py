"""
Parallel runner - concurrent execution of independent simulations.

Each (seed, mode) simulation owns its grid copy, so runs are independent
and can execute on worker threads. Results are always returned keyed and
folded in sorted key order, so output never depends on completion order.
"""

import asyncio
from concurrent.futures import ThreadPoolExecutor
from typing import Any, Callable, Dict, Hashable, Optional, TypeVar

T = TypeVar("T")

Job = Callable[[], T]


class ParallelResolver:
    """
    Runs keyed zero-argument jobs concurrently.

    Coroutine functions are awaited directly; plain callables run in a
    thread pool through ``run_in_executor``.

    Example:
        ```python
        resolver = ParallelResolver(max_workers=4)
        results = await resolver.resolve_parallel({
            (0, "slice"): lambda: run_one(0, "slice"),
            (0, "greedy"): lambda: run_one(0, "greedy"),
        })
        ```
    """

    def __init__(self, max_workers: Optional[int] = None):
        self.max_workers = max_workers

    async def resolve_parallel(self, jobs: Dict[Hashable, Callable[[], Any]]) -> Dict[Hashable, Any]:
        """
        Run all jobs and collect their results.

        Args:
            jobs: Dictionary of {key: job}

        Returns:
            Dictionary of {key: result} in sorted key order

        Raises:
            The exception of the first failed job in sorted key order
        """
        keys = sorted(jobs)
        loop = asyncio.get_running_loop()
        with ThreadPoolExecutor(max_workers=self.max_workers) as pool:
            tasks = []
            for key in keys:
                job = jobs[key]
                if asyncio.iscoroutinefunction(job):
                    tasks.append(job())
                else:
                    tasks.append(loop.run_in_executor(pool, job))
            results = await asyncio.gather(*tasks, return_exceptions=True)

        resolved: Dict[Hashable, Any] = {}
        for key, result in zip(keys, results):
            if isinstance(result, BaseException):
                raise result
            resolved[key] = result
        return resolved


def run_parallel(jobs: Dict[Hashable, Callable[[], T]], max_workers: int = 1) -> Dict[Hashable, T]:
    """
    Synchronous entry point used by the experiment harness.

    With ``max_workers <= 1`` the jobs run sequentially in sorted key order.
    """
    if max_workers <= 1:
        return {key: jobs[key]() for key in sorted(jobs)}
    return asyncio.run(ParallelResolver(max_workers).resolve_parallel(jobs))
