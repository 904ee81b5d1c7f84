"""Utility modules for matern_cardinal."""

from .logger import setup_logging, get_logger
from .settings import Settings, RunConfig, parse_h_list
from .file_io import report_filename, write_csv, write_json
