import dataclasses
import enum
import json
import math

import numpy as np


class NumberFormatter:
    """Helper class for serializing results with a fixed number of significant digits"""

    SIGNIFICANT_DIGITS = 12
    CSV_FLOAT_FORMAT = "%.11e"

    @staticmethod
    def sig(value, digits=SIGNIFICANT_DIGITS):
        """Round a float to `digits` significant digits; non-finite values become None"""
        value = float(value)
        if not math.isfinite(value):
            return None
        return float(f"{value:.{digits}g}")

    @staticmethod
    def to_jsonable(obj):
        """Convert results (dataclasses, enums, numpy values) into plain JSON types"""
        if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
            if hasattr(obj, "to_dict"):
                return NumberFormatter.to_jsonable(obj.to_dict())
            return {
                f.name: NumberFormatter.to_jsonable(getattr(obj, f.name))
                for f in dataclasses.fields(obj)
            }
        if isinstance(obj, enum.Enum):
            return obj.value
        if isinstance(obj, dict):
            return {str(k): NumberFormatter.to_jsonable(v) for k, v in obj.items()}
        if isinstance(obj, (list, tuple)):
            return [NumberFormatter.to_jsonable(v) for v in obj]
        if isinstance(obj, np.ndarray):
            return [NumberFormatter.to_jsonable(v) for v in obj.tolist()]
        if isinstance(obj, (bool, np.bool_)):
            return bool(obj)
        if isinstance(obj, (int, np.integer)):
            return int(obj)
        if isinstance(obj, (float, np.floating)):
            return NumberFormatter.sig(obj)
        return obj

    @staticmethod
    def dumps(obj):
        """JSON text with stable key order and 12 significant digits"""
        return json.dumps(NumberFormatter.to_jsonable(obj), indent=2, sort_keys=False)
