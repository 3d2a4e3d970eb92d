"""Shipped fixtures: the f189 table, the t = -4/5 curve, and character and lift configs."""

from importlib import resources


def path(name):
    """Filesystem path of a shipped fixture."""
    return str(resources.files(__name__).joinpath(name))


def listing(prefix=""):
    return sorted(p.name for p in resources.files(__name__).iterdir()
                  if p.name.endswith(".json") and p.name.startswith(prefix))
