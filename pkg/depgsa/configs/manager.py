# Copyright (c) 2023-2024 DepGSA developers
# MIT License
#
# References:
# [1] https://configobj.readthedocs.io/en/latest/configobj.html
# [2] https://configobj.readthedocs.io/en/latest/validate.html

"""
Configuration manager.

The configurations are written either in the INI-like syntax of
``ConfigObj`` or as a JSON document with the same sections and a
mandatory ``schema`` field.  Both are validated against the bundled
``config.spec``, which also provides the defaults.
"""

import os
import sys
import copy
import json
import logging
from logging import FileHandler, StreamHandler
from collections.abc import Mapping
import pkg_resources

from configobj import ConfigObj, ConfigObjError, flatten_errors
from validate import Validator

from .checkers import check_configs
from ..utils.logging import get_level
from ..errors import ConfigError


logger = logging.getLogger(__name__)

# Version of the configuration schema understood by this package
SCHEMA = "depgsa/1"


def _split_key(key):
    """``"sampling/m"`` -> ``["sampling", "m"]``; lists pass through."""
    if isinstance(key, str):
        return [k for k in key.split("/") if k]
    return list(key)


def _flatten_dict(d, sep="/", prefix=""):
    """
    Flatten the nested sections into ``{"section/key": value}``, e.g.,
    ``{"a": 1, "c": {"b": {"x": 5}}}`` -> ``{"a": 1, "c/b/x": 5}``.
    """
    flat = {}
    for key, value in d.items():
        name = prefix + sep + key if prefix else key
        if isinstance(value, Mapping):
            flat.update(_flatten_dict(value, sep=sep, prefix=name))
        else:
            flat[name] = value
    return flat


def _flatten_list(value):
    """Flatten nested lists row-major (correlation matrices)."""
    if isinstance(value, (list, tuple)):
        out = []
        for v in value:
            out.extend(_flatten_list(v))
        return out
    return [value]


def _to_sections(data):
    """Convert a JSON mapping into ConfigObj sections (string keys)."""
    out = {}
    for key, value in data.items():
        if isinstance(value, Mapping):
            out[str(key)] = _to_sections(value)
        else:
            out[str(key)] = value
    return out


def json_to_config(data):
    """
    Convert a JSON configuration document into nested sections accepted
    by ``ConfigObj``.

    * ``schema`` is mandatory and must be ``"depgsa/1"``;
    * nested lists (correlation matrices, ``A``) are flattened row-major;
    * subsets given as lists of indices become ``"i,j"`` strings;
    * ``blocks`` may be a list; its items are named ``block1``, ...;
    * the ``margins`` mapping of a block becomes its sub-sections;
    * integer keys (input indices) become strings.

    Raises
    ------
    ConfigError :
        Missing or unsupported schema, or not a JSON object.
    """
    if not isinstance(data, Mapping):
        raise ConfigError("JSON configuration must be an object")
    schema = data.get("schema")
    if schema is None:
        raise ConfigError("JSON configuration requires the 'schema' field "
                          "(\"%s\")" % SCHEMA)
    if schema != SCHEMA:
        raise ConfigError("unsupported configuration schema: %s "
                          "(expected %s)" % (schema, SCHEMA))
    data = copy.deepcopy(dict(data))
    model = data.get("model")
    if isinstance(model, Mapping):
        model = dict(model)
        if isinstance(model.get("expressions"), str):
            model["expressions"] = [model["expressions"]]
        if "A" in model:
            model["A"] = _flatten_list(model["A"])
        data["model"] = model
    blocks = data.get("blocks")
    if isinstance(blocks, (list, tuple)):
        blocks = {"block%d" % (k+1): b for k, b in enumerate(blocks)}
    if isinstance(blocks, Mapping):
        blocks = {str(name): dict(b) for name, b in blocks.items()}
        for b in blocks.values():
            # margins are the numbered sub-sections of the block
            margins = b.pop("margins", None) or {}
            b.update({str(k): v for k, v in margins.items()})
            if "correlation" in b:
                b["correlation"] = _flatten_list(b["correlation"])
        data["blocks"] = blocks
    subsets = data.get("subsets")
    if isinstance(subsets, Mapping):
        subsets = dict(subsets)
        items = subsets.get("list")
        if isinstance(items, (list, tuple)):
            subsets["list"] = [
                ",".join(str(i) for i in item)
                if isinstance(item, (list, tuple)) else str(item)
                for item in items]
        data["subsets"] = subsets
    return _to_sections(data)


def _spec_errors(config, results):
    """Readable lines of the ``Validator`` failures."""
    lines = []
    for sections, key, error in flatten_errors(config, results):
        where = "/".join(sections + ([key] if key else []))
        if key is None:
            lines.append('section "%s" is missing' % where)
        elif error is False:
            lines.append('"%s": value required but missing' % where)
        else:
            lines.append('"%s": %s' % (where, error))
    return lines


class ConfigManager:
    """
    The effective configurations of a run: the defaults of the bundled
    ``config.spec`` with the user configurations merged on top.

    Parameters
    ----------
    userconfig : str, optional
        Path to the user configuration file (INI-like or JSON).

    Attributes
    ----------
    userconfig : str
        Absolute path of the loaded user configuration file; relative
        paths in the configurations are resolved against its directory.
    """
    userconfig = None

    def __init__(self, userconfig=None):
        stream = pkg_resources.resource_stream(__name__, "config.spec")
        self._configspec = ConfigObj(stream, interpolation=False,
                                     list_values=False, _inspec=True,
                                     encoding="utf-8")
        self._defaults = self._validated({})
        self._config = self._validated({})
        if userconfig:
            self.read_userconfig(userconfig)

    def _validated(self, config):
        """
        A ``ConfigObj`` of the given sections, checked against
        ``config.spec``, with the missing options filled by their defaults.

        Raises
        ------
        ConfigError :
            Syntax errors, or values rejected by ``config.spec``; all
            of them are listed in the message.
        """
        try:
            config = ConfigObj(config, interpolation=False,
                               configspec=self._configspec,
                               encoding="utf-8")
            results = config.validate(Validator(), preserve_errors=True,
                                      copy=True)
        except ConfigObjError as e:
            raise ConfigError("invalid configuration syntax: %s" % e)
        if results is not True:
            raise ConfigError("\n".join(_spec_errors(config, results)))
        return config

    def read_config(self, config):
        """
        Validate the given configurations and merge them.

        Parameters
        ----------
        config : list[str] or dict
            The lines of an INI-like configuration, or nested sections
            (e.g., from ``json_to_config()``).
        """
        self._config.merge(self._validated(config))
        logger.info("Merged %d configuration sections" %
                    len(self._config.sections))

    def read_text(self, text):
        """
        Read configurations given as text: JSON when it starts with
        ``{``, the INI-like syntax otherwise.
        """
        if text.lstrip().startswith("{"):
            try:
                data = json.loads(text)
            except ValueError as e:
                raise ConfigError("invalid JSON configuration: %s" % e)
            self.read_config(json_to_config(data))
        else:
            self.read_config(text.splitlines())

    def read_userconfig(self, userconfig, reset=False):
        """
        Read the user configuration file over the defaults.

        Raises
        ------
        ConfigError :
            The file cannot be read, or a user configuration is already
            loaded and ``reset`` is ``False``.
        """
        path = os.path.expanduser(userconfig)
        try:
            with open(path) as fh:
                text = fh.read()
        except OSError:
            raise ConfigError("Cannot read config from '%s'" % path)
        if self.userconfig:
            if not reset:
                raise ConfigError("User configurations already loaded "
                                  "from '%s'" % self.userconfig)
            self.reset()
        self.read_text(text)
        self.userconfig = os.path.abspath(path)
        logger.info("Loaded user config: %s" % self.userconfig)

    def reset(self):
        """Drop the user configurations and go back to the defaults."""
        self._config = self._validated({})
        self.userconfig = None
        logger.warning("Reset the configurations to the defaults")

    def check_all(self, raise_exception=True):
        """
        Check the configurations as a whole with the context checkers
        of `~depgsa.configs.checkers`.

        Returns
        -------
        result : bool
        errors : dict
            ``{key: message}`` of every invalid option.

        Raises
        ------
        ConfigError :
            With ``raise_exception=True``, if any checker failed.
        """
        return check_configs(self, raise_exception=raise_exception)

    def getn(self, key, from_default=False):
        """
        Value of the option given by ``"section/key"`` (or a list of
        keys); a whole section for a section name.

        Raises
        ------
        KeyError :
            No such option.
        """
        keys = _split_key(key)
        node = self._defaults if from_default else self._config
        try:
            for k in keys:
                node = node[k]
        except (KeyError, TypeError):
            raise KeyError("%s: invalid key" % "/".join(keys))
        return node

    def __getitem__(self, key):
        return self.getn(key)

    def setn(self, key, value):
        """
        Set the option given by ``"section/key"``, after checking the
        value against ``config.spec``.

        Raises
        ------
        KeyError :
            No such option.
        ConfigError :
            The value is rejected by ``config.spec``.
        """
        old = self.getn(key)
        if old == value:
            return
        keys = _split_key(key)
        nested = value
        for k in reversed(keys):
            nested = {k: nested}
        checked = self._validated(nested)
        for k in keys:
            checked = checked[k]
        nested = checked
        for k in reversed(keys):
            nested = {k: nested}
        self._config.merge(nested)
        logger.info("Set config: %s: %s -> %s" % ("/".join(keys), old,
                                                  checked))

    def __setitem__(self, key, value):
        self.setn(key, value)

    def get_path(self, key):
        """
        Absolute path given by the option, relative paths being taken
        from the directory of the user configuration file (or the
        current directory); ``None`` for an empty value.
        """
        value = self.getn(key)
        if value in (None, ""):
            return None
        if not isinstance(value, str):
            raise ValueError("config '%s' is not a path: %r" % (key, value))
        path = os.path.expanduser(value)
        if not os.path.isabs(path):
            base = (os.path.dirname(self.userconfig) if self.userconfig
                    else os.getcwd())
            path = os.path.join(base, path)
        return os.path.normpath(path)

    @property
    def preset(self):
        return self.getn("model/preset")

    @property
    def logging(self):
        """
        Keyword arguments of ``logging.basicConfig()`` built from the
        ``[logging]`` section, with the handlers already created.
        """
        conf = self.getn("logging")
        formatter = logging.Formatter(fmt=conf["format"],
                                      datefmt=conf["datefmt"])
        handlers = []
        if conf["stream"]:
            handlers.append(StreamHandler(getattr(sys, conf["stream"])))
        if conf["filename"]:
            handlers.append(FileHandler(self.get_path("logging/filename")))
        for handler in handlers:
            handler.setFormatter(formatter)
        return {
            "level": get_level(conf["level"]),
            "format": conf["format"],
            "datefmt": conf["datefmt"],
            "handlers": handlers,
        }

    def dump(self, from_default=False, flatten=False):
        """
        The configurations as plain dictionaries (plus ``userconfig``),
        optionally flattened into ``{"section/key": value}``.
        """
        config = self._defaults if from_default else self._config
        data = config.dict()
        data["userconfig"] = self.userconfig
        return _flatten_dict(data) if flatten else data
