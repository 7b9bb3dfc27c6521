"""Experiment recipes: INI files with typed, path-annotated accessors.

A recipe names one pipeline and carries every parameter an experiment
needs, seeds included, so outputs are reproducible byte for byte.  Schema
violations raise RecipeError with the offending field path, for example
"train.epochs: expected a positive integer".
"""

import configparser
import os

PIPELINES = ("grid-study", "dominance", "regression-uq", "classification-uq",
             "calibration-table")


class RecipeError(ValueError):
    """A recipe field is missing or malformed; message carries its path."""


class Recipe:
    """Parsed recipe: pipeline name, output directory, typed section access."""

    def __init__(self, sections, path="<recipe>"):
        self.sections = sections
        self.path = path
        pipeline = self.get("experiment", "pipeline")
        if pipeline not in PIPELINES:
            raise RecipeError(
                f"experiment.pipeline: unknown pipeline '{pipeline}', "
                f"expected one of {', '.join(PIPELINES)}")
        self.pipeline = pipeline

    # -- raw access ----------------------------------------------------
    def has(self, section, key) -> bool:
        return section in self.sections and key in self.sections[section]

    def get(self, section, key, default=None) -> str:
        if not self.has(section, key):
            if default is not None:
                return default
            raise RecipeError(f"{section}.{key}: required field is missing")
        return self.sections[section][key]

    # -- typed access ----------------------------------------------------
    def get_int(self, section, key, default=None, minimum=None) -> int:
        raw = self.get(section, key, None if default is None else str(default))
        try:
            value = int(raw)
        except (TypeError, ValueError):
            raise RecipeError(f"{section}.{key}: expected an integer, "
                              f"got '{raw}'") from None
        if minimum is not None and value < minimum:
            raise RecipeError(f"{section}.{key}: must be >= {minimum}")
        return value

    def get_float(self, section, key, default=None, positive=False) -> float:
        raw = self.get(section, key, None if default is None else repr(default))
        try:
            value = float(raw)
        except (TypeError, ValueError):
            raise RecipeError(f"{section}.{key}: expected a number, "
                              f"got '{raw}'") from None
        if positive and value <= 0:
            raise RecipeError(f"{section}.{key}: must be positive")
        return value

    def get_floats(self, section, key, default=None) -> tuple:
        raw = self.get(section, key, default)
        try:
            return tuple(float(v) for v in str(raw).split(","))
        except ValueError:
            raise RecipeError(f"{section}.{key}: expected comma-separated "
                              f"numbers, got '{raw}'") from None

    def get_ints(self, section, key, default=None) -> tuple:
        raw = self.get(section, key, default)
        try:
            return tuple(int(v) for v in str(raw).split(","))
        except ValueError:
            raise RecipeError(f"{section}.{key}: expected comma-separated "
                              f"integers, got '{raw}'") from None

    def get_choice(self, section, key, choices, default=None) -> str:
        value = self.get(section, key, default)
        if value not in choices:
            raise RecipeError(f"{section}.{key}: expected one of "
                              f"{', '.join(choices)}, got '{value}'")
        return value

    def get_bool(self, section, key, default=None) -> bool:
        raw = self.get(section, key,
                       None if default is None else str(default).lower())
        low = str(raw).strip().lower()
        if low in ("1", "true", "yes", "on"):
            return True
        if low in ("0", "false", "no", "off"):
            return False
        raise RecipeError(f"{section}.{key}: expected a boolean, got '{raw}'")

    def output_dir(self, override=None) -> str:
        """Resolution order: explicit override, recipe field, environment
        variable QIPF_OUTPUT_DIR, current directory."""
        if override:
            return override
        if self.has("experiment", "output_dir"):
            return self.get("experiment", "output_dir")
        return os.environ.get("QIPF_OUTPUT_DIR", ".")


def load_recipe(path) -> Recipe:
    parser = configparser.ConfigParser()
    try:
        with open(path) as fh:
            parser.read_file(fh)
    except configparser.Error as exc:
        raise RecipeError(f"unparseable recipe {path}: {exc}") from None
    sections = {name: dict(parser.items(name)) for name in parser.sections()}
    if "experiment" not in sections:
        raise RecipeError("experiment: required section is missing")
    return Recipe(sections, path=str(path))
