""" Schrolab exceptions """

import logging


log = logging.getLogger(__name__)


class SchrolabError(Exception):
    """ Base class for schrolab exceptions """


class ConfigurationError(SchrolabError, ValueError):
    """ Exceptions involving inadmissible grids, scales or config files

    The optional `source` argument names where the problem was found, such
    as the experiment file and the `section.field` that holds the bad value.
    Except blocks can fill it in with whatever is locally known before
    re-raising. `line` is the config-file line, if known.

    If `source` is given, `msg` should be only the cause of the error. A
    standard-ish message is generated from the parts.
    """
    def __init__(self, msg, source=None, line=None):
        super().__init__(msg, source, line)
        self.msg = msg
        self.source = source
        self.line = line

    def __str__(self):
        if not self.source:
            return self.msg
        where = self.source if self.line is None \
            else f"{self.source} (line {self.line})"
        return f"config error in {where}: {self.msg}"


class DomainError(SchrolabError, ValueError):
    """ Input outside an operation's mathematical domain """


class DivergentConstantError(SchrolabError, ValueError):
    """ A requested constant is infinite (e.g. C_alpha for alpha <= 1/2) """


class EmptyEnsembleError(SchrolabError):
    """ Every ensemble member produced a numerically zero block """


class ResourceLimitError(SchrolabError):
    """ A hard cap or refinement budget was exceeded

    `best` carries the best partial result obtained before giving up, when
    there is one (e.g. the loosest enclosure of a maximal profile).
    """
    def __init__(self, msg, best=None):
        super().__init__(msg)
        self.msg = msg
        self.best = best

    def __str__(self):
        return self.msg

    def log(self):
        log.error("%s", self)
        if self.best is not None:
            log.error("best result before giving up: %s", self.best)
        log.error("Raise the relevant limit in schrolab.yaml or loosen "
                  "the requested tolerance")
