"""Power unit conversions used at the configuration boundary."""

import math
import re
from typing import Union

_POWER_PATTERN = re.compile(r"^\s*([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)\s*(dBm|dBW|mW|W)\s*$")


def dbm_to_watts(dbm: float) -> float:
    return 10.0 ** ((dbm - 30.0) / 10.0)


def watts_to_dbm(watts: float) -> float:
    return 10.0 * math.log10(watts) + 30.0


def parse_power(value: Union[str, float, int]) -> float:
    """Convert a power given as watts or as a string with a unit ("50 dBm", "20 dBW", "1 mW") to watts."""
    if isinstance(value, (int, float)):
        return float(value)
    match = _POWER_PATTERN.match(value)
    if match is None:
        raise ValueError(f"cannot parse power '{value}', expected a number with unit dBm, dBW, mW or W")
    number, unit = float(match.group(1)), match.group(2)
    if unit == "dBm":
        return dbm_to_watts(number)
    if unit == "dBW":
        return dbm_to_watts(number + 30.0)
    if unit == "mW":
        return number / 1000.0
    return number
