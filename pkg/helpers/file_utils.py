"""
This module provides utility functions for file input and output operations.
It includes methods to read the lines of a file, write text and JSON reports,
write CSV tables, and load or save complex matrices stored as CSV files of
interleaved real and imaginary columns.
"""

import csv
import json

import numpy as np

def read_file(filename):
    """
    Reads the contents of a file and returns a list of its lines.

    Args:
        filename (str): The path to the file to be read.

    Returns:
        list: A list of lines from the file, with newline characters removed.
    """
    with open(filename, 'r', encoding='utf-8') as file:
        return file.read().splitlines()

def read_text(filename):
    """Returns the whole content of a text file."""
    with open(filename, 'r', encoding='utf-8') as file:
        return file.read()

def write_file(filename, content=''):
    """
    Writes content to a specified file. If content is not provided, the file is
    cleared.

    Args:
        filename (str): The path to the file to be written to.
        content (str, optional): The content to write to the file. Defaults to
                                 an empty string, which clears the file.
    """
    with open(filename, 'w', encoding='utf-8') as file:
        file.write(content)

def write_json(filename, payload):
    """
    Writes a JSON document with two-space indentation and a trailing newline.

    Args:
        filename (str): The destination path.
        payload (dict): A JSON-serializable mapping.
    """
    write_file(filename, json.dumps(payload, indent=2) + "\n")

def write_csv(filename, header, rows):
    """
    Writes a CSV table. Floats are written with their shortest round-trip
    representation.

    Args:
        filename (str): The destination path.
        header (sequence): Column names.
        rows (iterable): Rows of values in header order.
    """
    with open(filename, 'w', encoding='utf-8', newline='') as file:
        writer = csv.writer(file, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([repr(float(value)) if isinstance(value, float)
                             else value for value in row])

def load_complex_csv(filename):
    """
    Loads a complex matrix from a CSV of interleaved real,imag columns.

    Args:
        filename (str): The path of the CSV file.

    Returns:
        ndarray: A complex matrix with half as many columns as the file.

    Raises:
        ValueError: If a row has an odd number of columns.
    """
    table = np.atleast_2d(np.loadtxt(filename, delimiter=",", dtype=float))
    if table.shape[1] % 2:
        raise ValueError(f"{filename}: expected interleaved real,imag columns")
    return table[:, 0::2] + 1j * table[:, 1::2]

def save_complex_csv(filename, matrix):
    """Saves a complex matrix as interleaved real,imag CSV columns."""
    matrix = np.atleast_2d(np.asarray(matrix, dtype=complex))
    table = np.empty((matrix.shape[0], 2 * matrix.shape[1]))
    table[:, 0::2] = matrix.real
    table[:, 1::2] = matrix.imag
    with open(filename, 'w', encoding='utf-8', newline='') as file:
        writer = csv.writer(file, lineterminator="\n")
        writer.writerows([[repr(float(value)) for value in row] for row in table])
