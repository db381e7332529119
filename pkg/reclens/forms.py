"""
Validation of user-supplied configuration.

Command-line flags, API query strings and generator config files all go
through these forms; a form error surfaces as InvalidConfig carrying the
form's per-field messages.
"""

import re
from datetime import timedelta
from pathlib import Path

import yaml
from django import forms
from django.conf import settings
from django.utils.dateparse import parse_duration

from .attribution import NoRepeatScope, WindowConfig
from .events import ActionKind, parse_timestamp
from .exceptions import InvalidConfig, LogIOError
from .filters import FilterConfig
from .generator import PRESETS, GeneratorConfig

_SHORT_DURATION = re.compile(r"^(?P<value>\d+(?:\.\d+)?)(?P<unit>[smhd])$")
_CLOCK_OFFSET = re.compile(r"^(?P<sign>[+-])(?P<hours>\d{2}):(?P<minutes>\d{2})$")
_UNITS = {"s": "seconds", "m": "minutes", "h": "hours", "d": "days"}


def parse_duration_text(text):
    """Parses `90s`, `5m`, `24h`, `7d`, or anything django's parse_duration accepts."""
    value = str(text).strip()
    match = _SHORT_DURATION.match(value)
    if match:
        return timedelta(**{_UNITS[match["unit"]]: float(match["value"])})
    parsed = parse_duration(value)
    if parsed is None:
        raise ValueError(f"bad duration {text!r}")
    return parsed


def parse_offset(text):
    """Parses `Z`, `+HH:MM`, `-HH:MM` or a signed duration such as `-5h`."""
    value = str(text).strip()
    if value in ("Z", "z", ""):
        return timedelta(0)
    match = _CLOCK_OFFSET.match(value)
    if match:
        delta = timedelta(hours=int(match["hours"]), minutes=int(match["minutes"]))
        return -delta if match["sign"] == "-" else delta
    sign = -1 if value.startswith("-") else 1
    offset = sign * parse_duration_text(value.lstrip("+-"))
    if abs(offset) >= timedelta(days=1):
        raise ValueError(f"offset {text!r} is not within one day")
    return offset


def default_tz_offset():
    return parse_offset(settings.RECLENS_TZ_OFFSET)


class DurationField(forms.Field):
    def to_python(self, value):
        if value in self.empty_values:
            return None
        if isinstance(value, timedelta):
            return value
        try:
            return parse_duration_text(value)
        except ValueError:
            raise forms.ValidationError("Enter a duration such as 90s, 5m, 24h or 7d.")


class OffsetField(forms.Field):
    def to_python(self, value):
        if value in self.empty_values:
            return None
        if isinstance(value, timedelta):
            return value
        try:
            return parse_offset(value)
        except ValueError:
            raise forms.ValidationError("Enter an offset such as +02:00, Z or -5h.")


def bind(form_class, data):
    """Validates `data` with `form_class` and returns the bound form."""
    form = form_class(data)
    if not form.is_valid():
        raise InvalidConfig({field: list(errors) for field, errors in form.errors.items()})
    return form


def _present(cleaned):
    return {key: value for key, value in cleaned.items() if value is not None and value != ""}


class WindowConfigForm(forms.Form):
    click_window = DurationField(required=False)
    atc_window = DurationField(required=False)
    buy_window = DurationField(required=False)
    norepeat_scope = forms.ChoiceField(
        choices=[(s.value, s.value) for s in NoRepeatScope], required=False
    )
    candb_leg = forms.ChoiceField(
        choices=[(k.value, k.value) for k in (ActionKind.CLICK, ActionKind.ATC)], required=False
    )
    tz_offset = OffsetField(required=False)

    def to_config(self):
        values = _present(self.cleaned_data)
        values.setdefault("tz_offset", default_tz_offset())
        return WindowConfig(**values)


class FilterConfigForm(forms.Form):
    clicked_today = forms.NullBooleanField(required=False)
    atc_window_days = forms.IntegerField(min_value=0, required=False)
    atc_filter_enabled = forms.NullBooleanField(required=False)
    tz_offset = OffsetField(required=False)

    def to_config(self):
        values = _present(self.cleaned_data)
        values.setdefault("tz_offset", default_tz_offset())
        return FilterConfig(**values)


class GeneratorConfigForm(forms.Form):
    preset = forms.ChoiceField(choices=[(name, name) for name in PRESETS], required=False)
    seed = forms.IntegerField(min_value=0, max_value=2 ** 64 - 1, required=False)
    customers = forms.IntegerField(min_value=1, required=False)
    days = forms.IntegerField(min_value=1, required=False)
    hits_per_customer_per_day = forms.FloatField(min_value=0, required=False)
    products_per_hit = forms.IntegerField(min_value=1, required=False)
    catalog_size = forms.IntegerField(min_value=1, required=False)
    click_prob = forms.FloatField(min_value=0, max_value=1, required=False)
    repeat_click_prob = forms.FloatField(min_value=0, max_value=1, required=False)
    atc_given_click_prob = forms.FloatField(min_value=0, max_value=1, required=False)
    buy_given_click_prob = forms.FloatField(min_value=0, max_value=1, required=False)
    stray_buy_prob = forms.FloatField(min_value=0, max_value=1, required=False)
    latency_quantile_in_window = forms.FloatField(min_value=0, max_value=1, required=False)
    engagement_jitter = forms.FloatField(min_value=0, max_value=1, required=False)
    repeat_jitter = forms.FloatField(min_value=0, max_value=1, required=False)
    start = forms.CharField(required=False)
    click_window = DurationField(required=False)
    atc_window = DurationField(required=False)
    buy_window = DurationField(required=False)

    def clean_start(self):
        value = self.cleaned_data["start"]
        if not value:
            return None
        try:
            return parse_timestamp(value)
        except ValueError as exc:
            raise forms.ValidationError(str(exc))

    def to_config(self):
        values = _present(self.cleaned_data)
        preset = values.pop("preset", "default")
        windows = {
            name: values.pop(name)
            for name in ("click_window", "atc_window", "buy_window") if name in values
        }
        if windows:
            values["windows"] = WindowConfig(**windows)
        return GeneratorConfig.from_preset(preset, **values)


def load_generator_file(path):
    """
    Reads generator settings from a YAML or JSON file. A nested `windows`
    mapping is accepted alongside flat window keys.
    """
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise LogIOError(path, exc.strerror or exc) from None
    try:
        data = yaml.safe_load(text) or {}
    except yaml.YAMLError as exc:
        raise InvalidConfig({"config": [f"unreadable config file: {exc}"]}) from None
    if not isinstance(data, dict):
        raise InvalidConfig({"config": ["config file must hold a mapping"]})
    data = dict(data)
    nested = data.pop("windows", None) or {}
    if not isinstance(nested, dict):
        raise InvalidConfig({"windows": ["must be a mapping"]})
    for key, value in nested.items():
        data.setdefault(key, value)
    unknown = sorted(set(data) - set(GeneratorConfigForm.base_fields))
    if unknown:
        raise InvalidConfig({"config": [f"unknown keys: {', '.join(unknown)}"]})
    return data
