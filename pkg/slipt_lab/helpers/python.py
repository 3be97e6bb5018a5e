"""Dictionary and iterable helpers shared by the config layer and the sweeps."""

import itertools
import logging
from typing import Any, Callable, Dict, Iterable, Iterator, List, Mapping, Union

from more_itertools import always_iterable

logger = logging.getLogger(__name__)


def always_iterable_local(obj: Any) -> Callable:
    """Wrap `more_itertools.always_iterable`, treating dicts as single objects.

    A junction table is a dict; iterating it would only yield the junction
    names.
    """
    return always_iterable(obj, base_type=(str, bytes, dict))


def list_convert(obj: Any) -> List[Any]:
    """Return `obj` as a list: scalars are wrapped, None becomes empty."""
    return list(always_iterable_local(obj))


def overwrite_dictionary(
    base_dict: Dict[str, Any],
    override_dict: Mapping[str, Any],
    _path: str = "",
) -> Dict[str, Any]:
    """Merge `override_dict` into `base_dict` in place, key by key.

    Nested dictionaries are merged recursively, other values replace the
    base value (grids are replaced as a whole, not extended). A section
    cannot be replaced by a scalar: the override is ignored with a warning.

    Parameters
    ----------
    base_dict
        Dictionary holding every allowed key, typically the defaults.
    override_dict
        Dictionary with a subset of the keys of `base_dict`.

    Returns
    -------
    Dict[str, Any]
        `base_dict`, updated.

    Raises
    ------
    ValueError
        If `override_dict` holds a key `base_dict` lacks. The message names
        the dotted path of the key, e.g. ``receiver.r_laod_ohm``.

    Examples
    --------
    >>> base = {"receiver": {"r_load_ohm": 1e4, "area_cm2": 1.0}, "run": {"seed": 0}}
    >>> overwrite_dictionary(base, {"receiver": {"r_load_ohm": 2e4}})
    {'receiver': {'r_load_ohm': 20000.0, 'area_cm2': 1.0}, 'run': {'seed': 0}}
    """
    unknown = [key for key in override_dict if key not in base_dict]
    if unknown:
        names = ", ".join(f"{_path}{key}" for key in unknown)
        msg = f"{names} (allowed here: {', '.join(map(str, base_dict)) or 'nothing'})"
        logger.error(f"Unknown configuration key {msg}")
        raise ValueError(msg)

    for key, value in override_dict.items():
        current = base_dict[key]
        if isinstance(current, dict) and isinstance(value, Mapping):
            overwrite_dictionary(current, value, f"{_path}{key}.")
        elif isinstance(current, dict):
            logger.warning(
                f"Ignoring {_path}{key} = {value!r}: the section cannot be replaced "
                "by a single value.",
            )
        else:
            base_dict[key] = value

    return base_dict


def calc_product_of_dict_values(
    **kwargs: Union[Any, Iterable[Any]],
) -> Iterator[Dict[str, Any]]:
    """Yield every combination of the keyword values as a dict.

    Scalars count as one-point grids. The first keyword varies slowest,
    which is the row order of every sweep table.

    Examples
    --------
    >>> list(calc_product_of_dict_values(n_junctions=[1, 4], mu_a=0.7))
    [{'n_junctions': 1, 'mu_a': 0.7}, {'n_junctions': 4, 'mu_a': 0.7}]
    """
    grids = {key: list_convert(value) for key, value in kwargs.items()}

    for combination in itertools.product(*grids.values()):
        yield dict(zip(grids, combination))  # noqa: B905


def pairwise_iterable(iterable: Iterable) -> Iterator[tuple]:
    """Return adjacent pairs of `iterable`, e.g. consecutive grid points.

    Raises
    ------
    TypeError
        If the input is not iterable.

    Examples
    --------
    >>> list(pairwise_iterable([0.0, 0.01, 0.1]))
    [(0.0, 0.01), (0.01, 0.1)]
    """
    if not hasattr(iterable, "__iter__"):
        msg = "Input must be an iterable."
        raise TypeError(msg)

    first, second = itertools.tee(iterable)
    next(second, None)
    return zip(first, second)
