import copy
import os
import logging
from importlib.resources import files
from pathlib import Path
from functools import partial

import yaml
from addict import Dict
from appdirs import user_config_dir

from ..util import cache


_loadyaml = partial(yaml.load, Loader=yaml.SafeLoader)
CFG_USER = user_config_dir('schrolab')  # Default config search path
CFG_EVAR = 'SCHROLAB_CONFIG_DIR'        # Environment var overrides default
WORKERS_EVAR = 'SCHROLAB_WORKERS'
DEFAULTS = {f.name: _loadyaml(f.read_text())
            for f in files(__name__).iterdir()
            if f.suffix == '.yaml'}


def _merge(base, override):
    """ Recursively merge `override` into `base` (in place) """
    for key, value in (override or {}).items():
        if isinstance(value, dict) and isinstance(base.get(key), dict):
            _merge(base[key], value)
        else:
            base[key] = value
    return base


@cache
def load(name, search_paths=None, refresh=False):
    """ Load a yaml config file

    The file will be merged with (and override) any defaults for the same file.
    Search paths can be specified via an environment variable, or as an
    argument. Nested sections are merged key by key, so a user file only
    needs the keys it changes.

    The contents of config files are cached, and repeated calls will not
    reload them. To force a reload, call load.cache_clear().
    """
    if name not in DEFAULTS:
        raise ValueError(f"not a known config file: {name}")
    if search_paths is None:
        search_paths = [user_dir()]

    log = logging.getLogger(__name__)
    dataset = copy.deepcopy(DEFAULTS[name]) or {}
    for path in search_paths:
        try:
            with open(Path(path, name)) as f:
                _merge(dataset, _loadyaml(f))
        except FileNotFoundError as ex:
            log.debug(ex)
        except IOError as ex:
            log.warning(ex)
    return Dict(dataset)


def settings():
    """ Shortcut for the main numerical settings file """
    return load('schrolab.yaml')


def workers():
    """ Number of worker threads for ensemble trials

    The environment variable wins over the config file.
    """
    value = os.environ.get(WORKERS_EVAR) or settings().workers or 1
    try:
        count = int(value)
    except ValueError:
        logging.getLogger(__name__).warning(
            "ignoring non-integer %s=%r", WORKERS_EVAR, value)
        return 1
    return max(count, 1)


def user_dir():
    """ The directory searched for user config files """
    return Path(os.environ.get(CFG_EVAR) or CFG_USER)


def packaged_text(name):
    """ Raw text of a packaged config file (keeps line numbers for errors) """
    return files(__name__).joinpath(name).read_text()
