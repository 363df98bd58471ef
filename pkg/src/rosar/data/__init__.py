"""Precomputed weight tables shipped with the package."""

from importlib import resources

from ..formats import read_wgt1

DEFAULT_TABLE = "sas_robust_default.wgt1"


def default_table_path():
    """Filesystem path of the bundled robust weight table."""
    return resources.files(__name__) / DEFAULT_TABLE


def load_default_table():
    """Robust weights for every observable range bin at the default settings.

    Built with ``rosar synth`` over bins 4-112 with an error radius of
    0.035; see the README for the exact command.
    """
    with resources.as_file(default_table_path()) as path:
        return read_wgt1(path)
