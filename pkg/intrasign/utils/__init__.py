def deep_merge(source, overrides):
    """Deep merge two dictionaries, with overrides taking precedence"""
    for key, value in overrides.items():
        if isinstance(value, dict) and isinstance(source.get(key), dict):
            source[key] = deep_merge(source[key], value)
        else:
            source[key] = value
    return source


def format_fixed(value, digits=5):
    """Fixed-point cell text; ``None`` renders as ``n/a``."""
    if value is None:
        return "n/a"
    text = f"{value:.{digits}f}"
    # keep "-0.00000" out of the tables
    if float(text) == 0.0:
        text = f"{0.0:.{digits}f}"
    return text


def format_percent(ratio, digits=2):
    return f"{ratio * 100:.{digits}f}%"
