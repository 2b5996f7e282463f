"""
Validation system for latticesched configuration.

Coerces plain dictionaries (parsed JSON/TOML files, CLI overrides) into
typed dataclass models, collecting every field error before failing.
"""

import inspect
from dataclasses import MISSING, fields, is_dataclass
from enum import Enum
from fractions import Fraction
from typing import Any, Dict, List, Type, TypeVar, Union, get_args, get_origin, get_type_hints

from .exceptions import ConfigError

T = TypeVar("T")


class ValidationError(Exception):
    """Raised when a single value fails validation."""

    def __init__(self, message: str):
        super().__init__(message)
        self.message = message


class BaseValidator:
    """Base validator class."""

    @staticmethod
    def validate_type(value: Any, expected_type: Any) -> Any:
        """
        Validate and convert value to expected type.

        Args:
            value: Value to validate
            expected_type: Expected type

        Returns:
            Converted value

        Raises:
            ValidationError: If validation fails
        """
        if value is None:
            return None

        origin = get_origin(expected_type)
        if origin is Union:
            args = [a for a in get_args(expected_type) if a is not type(None)]
            last_error = None
            for arg in args:
                try:
                    return BaseValidator.validate_type(value, arg)
                except ValidationError as e:
                    last_error = e
            raise last_error or ValidationError(f"Invalid value: {value!r}")

        if origin in (list, tuple):
            if isinstance(value, str):
                value = [part.strip() for part in value.split(",") if part.strip()]
            if not isinstance(value, (list, tuple)):
                raise ValidationError(f"Expected list, got {type(value).__name__}")
            args = get_args(expected_type)
            item_type = args[0] if args else Any
            items = [BaseValidator.validate_type(item, item_type) for item in value]
            return tuple(items) if origin is tuple else items

        if origin is dict:
            if not isinstance(value, dict):
                raise ValidationError(f"Expected dict, got {type(value).__name__}")
            return dict(value)

        if expected_type is Any:
            return value

        if inspect.isclass(expected_type) and issubclass(expected_type, Enum):
            if isinstance(value, expected_type):
                return value
            for member in expected_type:
                if str(value).lower() in (member.name.lower(), str(member.value).lower()):
                    return member
            choices = ", ".join(str(m.value) for m in expected_type)
            raise ValidationError(f"Invalid choice {value!r} (expected one of: {choices})")

        if expected_type is Fraction:
            if isinstance(value, bool):
                raise ValidationError(f"Invalid number: {value!r}")
            try:
                # str() keeps 8.4 exact instead of the binary float expansion
                return Fraction(value) if isinstance(value, (int, Fraction)) else Fraction(str(value))
            except (ValueError, TypeError, ZeroDivisionError):
                raise ValidationError(f"Invalid number: {value!r}")

        if expected_type is int:
            if isinstance(value, bool):
                raise ValidationError(f"Invalid integer: {value!r}")
            try:
                if isinstance(value, float) and not value.is_integer():
                    raise ValueError(value)
                return int(value)
            except (ValueError, TypeError):
                raise ValidationError(f"Invalid integer: {value!r}")

        if expected_type is float:
            try:
                return float(value)
            except (ValueError, TypeError):
                raise ValidationError(f"Invalid float: {value!r}")

        if expected_type is bool:
            if isinstance(value, bool):
                return value
            if isinstance(value, str):
                return value.lower() in ("true", "1", "yes", "on")
            return bool(value)

        if expected_type is str:
            return str(value)

        return value


def validate_model(data: Dict[str, Any], model_class: Type[T], allow_extra: bool = False) -> T:
    """
    Validate data against a dataclass model.

    Args:
        data: Dictionary of data to validate
        model_class: Dataclass type
        allow_extra: Whether unknown keys are ignored instead of rejected

    Returns:
        Validated model instance

    Raises:
        ConfigError: If any field fails validation

    Example:
        ```python
        config = validate_model({"t_s": "1.5"}, CostConfig)
        ```
    """
    if not is_dataclass(model_class):
        raise ConfigError(f"Model class {model_class} must be a dataclass")

    errors: Dict[str, List[str]] = {}
    validated: Dict[str, Any] = {}
    hints = get_type_hints(model_class)

    for field in fields(model_class):
        if not field.init:
            continue
        value = data.get(field.name)
        is_required = field.default is MISSING and field.default_factory is MISSING  # type: ignore[misc]

        if value is None:
            if is_required:
                errors.setdefault(field.name, []).append("Field is required")
            continue

        try:
            validated[field.name] = BaseValidator.validate_type(value, hints[field.name])
        except ValidationError as e:
            errors.setdefault(field.name, []).append(str(e))

    if not allow_extra:
        known = {f.name for f in fields(model_class)}
        for key in sorted(set(data) - known):
            errors.setdefault(key, []).append("Unknown field")

    if errors:
        raise ConfigError(f"Invalid {model_class.__name__}", errors)

    try:
        return model_class(**validated)
    except (ValueError, TypeError) as e:
        raise ConfigError(f"Invalid {model_class.__name__}: {e}")
