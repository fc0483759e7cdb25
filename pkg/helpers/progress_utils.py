"""
This module renders the progress of Monte Carlo experiments with the Rich
library. Every estimator adds one task to a shared progress bar and advances
it once per trial block; the bar is framed in a titled panel and drawn on
stderr while the experiment runs, then removed.
"""

from rich.live import Live
from rich.panel import Panel
from rich.progress import (
    BarColumn,
    MofNCompleteColumn,
    Progress,
    SpinnerColumn,
    TimeElapsedColumn,
    TimeRemainingColumn,
)
from rich.table import Table

from .general_utils import error_console

def create_progress_bar():
    """
    Creates a progress bar whose tasks count trial blocks.

    Returns:
        Progress: A Progress object bound to the error console.
    """
    return Progress(
        "{task.description}",
        SpinnerColumn(),
        BarColumn(),
        MofNCompleteColumn(),
        "blocks •",
        TimeElapsedColumn(),
        "•",
        TimeRemainingColumn(),
        console=error_console
    )

def create_progress_table(title, job_progress, subtitle=None):
    """
    Frames the progress bar of an experiment in a panel.

    Parameters:
        title (str): The name of the experiment.
        job_progress (Progress): The bar returned by `create_progress_bar`.
        subtitle (str, optional): Run settings shown under the bar.

    Returns:
        Table: A Rich Table grid holding the panel.
    """
    progress_table = Table.grid()
    progress_table.add_row(
        Panel.fit(
            job_progress,
            title=f"[b]{title}",
            subtitle=subtitle,
            border_style="red",
            padding=(1, 1)
        )
    )
    return progress_table

def track_experiment(title, work, seed=None, trials=None):
    """
    Runs `work(job_progress)` while its progress panel is rendered.

    Args:
        title (str): The name of the experiment.
        work (callable): Receives the Progress object to pass on to the
                         estimators.
        seed (int, optional): Root seed, shown in the panel.
        trials (int, optional): Trials per estimate, shown in the panel.

    Returns:
        The value returned by `work`.
    """
    settings = []
    if seed is not None:
        settings.append(f"seed {seed}")
    if trials is not None:
        settings.append(f"{trials} trials")

    job_progress = create_progress_bar()
    progress_table = create_progress_table(
        title, job_progress, ", ".join(settings) or None
    )
    with Live(progress_table, refresh_per_second=10, console=error_console,
              transient=True):
        return work(job_progress)
