"""
This module provides utilities for managing output directories, clearing the
terminal and setting up console output. Results are printed on a rich console
bound to stdout, while diagnostics and log records go to a second console
bound to stderr.
"""

import logging
import os

from rich.console import Console
from rich.logging import RichHandler

from .config import REPORT_FOLDER

console = Console()
error_console = Console(stderr=True)

def create_output_directory(directory_name=REPORT_FOLDER):
    """
    Creates a directory for outputs if it doesn't exist.

    Args:
        directory_name (str): The directory to create.

    Returns:
        str: The path to the output directory.

    Raises:
        OSError: If there is an error creating the directory.
    """
    os.makedirs(directory_name, exist_ok=True)
    return directory_name

def ensure_parent_directory(filename):
    """Creates the parent directory of an output file when it is missing."""
    parent = os.path.dirname(os.path.abspath(filename))
    os.makedirs(parent, exist_ok=True)
    return filename

def clear_terminal():
    """
    Clears the terminal screen based on the operating system.
    """
    commands = {
        'nt': 'cls',      # Windows
        'posix': 'clear'  # macOS and Linux
    }

    command = commands.get(os.name)
    if command:
        os.system(command)

def setup_logging(verbose=False):
    """
    Routes log records of the application to a RichHandler on stderr.

    Args:
        verbose (bool): DEBUG level when True, WARNING otherwise.
    """
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.WARNING,
        format="%(message)s",
        datefmt="[%X]",
        handlers=[RichHandler(console=error_console, show_path=False)],
        force=True,
    )

def print_error(message):
    """Prints a one-line diagnostic on the error console."""
    error_console.print(f"[bold red]error:[/] {message}", highlight=False)
