"""
The `helpers` package provides utility modules and functions to support
the command-line tools. These utilities include constants, scenario file
handling, file management, parallel Monte Carlo execution, progress
tracking, and more.

Modules:
    - config: Constants and settings used across the project.
    - cli_config: Parsing and serialization of scenario files.
    - file_utils: Utilities for managing file operations.
    - general_utils: Output directories, consoles and logging setup.
    - parallel_utils: Trial blocks and thread-pool execution.
    - progress_utils: Tools for progress tracking and reporting.

This package is designed to be reusable and modular, allowing its components
to be easily imported and used across different parts of the application.
"""

# helpers/__init__.py

__all__ = [
    "config",
    "cli_config",
    "file_utils",
    "general_utils",
    "parallel_utils",
    "progress_utils",
]
