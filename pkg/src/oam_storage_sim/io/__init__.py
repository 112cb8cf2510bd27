"""Config parsing and file writers."""

from .config import config_digest, dump_config, load_config, parse_config
from .writers import read_csv, read_pgm, write_csv, write_pgm, write_trace_csv

__all__ = [
    "config_digest",
    "dump_config",
    "load_config",
    "parse_config",
    "read_csv",
    "read_pgm",
    "write_csv",
    "write_pgm",
    "write_trace_csv",
]
