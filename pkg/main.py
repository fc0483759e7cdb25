"""
This module reads scenario files from a list, runs every verification suite
that applies to each scenario, and writes one JSON report per suite.

Usage:
    List one scenario file per line in 'Scenarios.txt' (blank lines and lines
    starting with '#' are ignored) and execute the script. Reports are written
    to the 'Reports' folder as '<scenario>_<suite>.json'.
"""

import os
import sys

from drt.errors import EXIT_CHECKS_FAILED, EXIT_OK, DrtError, exit_code_for
from drt.experiments import verify_all
from drt.model import RngStream

from helpers.cli_config import CliConfig
from helpers.config import FILE, REPORT_FOLDER
from helpers.file_utils import read_file, write_json
from helpers.general_utils import (
    clear_terminal,
    console,
    create_output_directory,
    print_error,
    setup_logging,
)
from helpers.progress_utils import track_experiment

from isac_drt import sensing_cov_provider

def read_scenario_list(filename=FILE):
    """
    Reads the scenario list, skipping blank lines and comments.

    Args:
        filename (str): The path of the list file.

    Returns:
        list: Scenario file paths, relative to the list file.
    """
    base_dir = os.path.dirname(os.path.abspath(filename))
    paths = []
    for line in read_file(filename):
        line = line.strip()
        if line and not line.startswith("#"):
            paths.append(os.path.join(base_dir, line))
    return paths

def process_scenario(path, output_folder=REPORT_FOLDER):
    """
    Verifies one scenario and writes its reports.

    Args:
        path (str): The scenario file.
        output_folder (str): Where the JSON reports are written.

    Returns:
        bool: True when every check of every suite passed.
    """
    cfg = CliConfig.load(path)
    scn, run = cfg.scenario, cfg.run
    schemes = cfg.schemes.build(scn, sensing_cov_provider(scn))
    name = os.path.splitext(os.path.basename(path))[0]

    reports = track_experiment(
        name,
        lambda job_progress: verify_all(
            scn, schemes, run.trials, RngStream(run.seed).child("verify"),
            run.jobs, job_progress, cfg.schemes.psk_order
        ),
        run.seed, run.trials
    )

    for suite, report in reports.items():
        write_json(os.path.join(output_folder, f"{name}_{suite}.json"), report.to_dict())
        status = "[green]pass" if report.passed else "[red]FAIL"
        console.print(f"{name} {suite}: {status}")
        for check in report.failed_checks():
            console.print(f"    failed: {check}")
    return all(report.passed for report in reports.values())

def main(list_file=FILE, output_folder=REPORT_FOLDER):
    """
    Main function to execute the script.

    Reads the scenario list, verifies each scenario and returns the exit
    code of the worst outcome.
    """
    setup_logging()
    create_output_directory(output_folder)
    exit_code = EXIT_OK

    for path in read_scenario_list(list_file):
        try:
            if not process_scenario(path, output_folder):
                exit_code = max(exit_code, EXIT_CHECKS_FAILED)

        except (DrtError, OSError, ValueError) as err:
            print_error(f"{path}: {err}")
            exit_code = max(exit_code, exit_code_for(err))

    return exit_code

if __name__ == '__main__':
    clear_terminal()
    sys.exit(main())
