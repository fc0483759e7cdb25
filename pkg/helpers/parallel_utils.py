"""
This module provides utilities for running Monte Carlo trials in parallel
with progress tracking.

Trials are partitioned into fixed-size blocks. Each block draws its
randomness from its own generator and is evaluated in one vectorized call,
so the concatenated samples are the same for every worker count.
"""

from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .config import MC_BLOCK_SIZE, TASK_COLOR, default_jobs


def split_trials(trials, block_size=MC_BLOCK_SIZE):
    """
    Partition a number of trials into consecutive block sizes.

    Args:
        trials (int): The total number of trials.
        block_size (int): The size of every block but the last.

    Returns:
        list: Block sizes summing to `trials`.
    """
    full_blocks, remainder = divmod(int(trials), block_size)
    sizes = [block_size] * full_blocks
    if remainder:
        sizes.append(remainder)
    return sizes


def run_in_parallel(func, items, jobs=None, job_progress=None,
                    description="Progress"):
    """
    Execute a function for each item on a thread pool and return the results
    in item order, updating an optional progress tracker.

    Args:
        func (callable): The function applied to each item.
        items (iterable): The items to process.
        jobs (int, optional): The number of worker threads. Defaults to the
                              `ISAC_DRT_JOBS` setting.
        job_progress (Progress, optional): A rich progress object; one task
                                           is added and advanced per item.
        description (str): Label of the progress task.

    Returns:
        list: `[func(item) for item in items]`, in the same order.
    """
    items = list(items)
    jobs = jobs or default_jobs()
    task = None
    if job_progress is not None:
        task = job_progress.add_task(
            f"[{TASK_COLOR}]{description}", total=len(items), visible=True
        )

    def tracked(item):
        result = func(item)
        if task is not None:
            job_progress.advance(task)
        return result

    if jobs == 1 or len(items) <= 1:
        results = [tracked(item) for item in items]
    else:
        with ThreadPoolExecutor(max_workers=jobs) as executor:
            results = list(executor.map(tracked, items))

    if task is not None:
        job_progress.update(task, visible=False)
    return results


def monte_carlo_samples(block_fn, trials, rng, jobs=None, job_progress=None,
                        description="Trials"):
    """
    Evaluate `block_fn` on every trial block and concatenate the samples.

    Args:
        block_fn (callable): Called as `block_fn(generator, count)`; returns
                             an array whose first axis has length `count`.
        trials (int): The total number of trials.
        rng (RngStream): Stream providing one generator per block.
        jobs (int, optional): The number of worker threads.
        job_progress (Progress, optional): A rich progress object.
        description (str): Label of the progress task.

    Returns:
        ndarray: Per-trial samples in block order.
    """
    sizes = split_trials(trials)

    def run_block(indexed_size):
        block, count = indexed_size
        return block_fn(rng.generator(block), count)

    blocks = run_in_parallel(
        run_block, enumerate(sizes), jobs, job_progress, description
    )
    return np.concatenate(blocks, axis=0)
