# utils/logging.py
import logging
from logging.handlers import RotatingFileHandler
from pathlib import Path

_FMT     = "%(asctime)s | %(levelname)-8s | %(name)s | %(message)s"
_DATEFMT = "%Y-%m-%dT%H:%M:%S%z"


def setup(level=logging.INFO, fname: str = ""):
    root = logging.getLogger()
    if root.handlers:           # already initialised
        return

    if isinstance(level, str):
        level = logging.getLevelName(level.upper())
    root.setLevel(level)
    # console
    con = logging.StreamHandler()
    con.setFormatter(logging.Formatter(_FMT, _DATEFMT))
    root.addHandler(con)
    # file, only when asked for (runs/solver.log, solver.log.1, …)
    if fname:
        path = Path(fname)
        path.parent.mkdir(parents=True, exist_ok=True)
        fh = RotatingFileHandler(path, maxBytes=10_000_000, backupCount=3, encoding="utf-8")
        fh.setFormatter(logging.Formatter(_FMT, _DATEFMT))
        root.addHandler(fh)
