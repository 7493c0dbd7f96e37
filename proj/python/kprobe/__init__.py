"""Python access to the kprobe core: action charts, Hessian determinants and the box verdict."""
import json as _json

from . import _kprobe
from ._kprobe import ConfigError, DomainError, Model, NumericalError, action, catalog_names, frequency, jacobian, run_cli

__all__ = [
    "ConfigError", "DomainError", "Model", "NumericalError", "action", "catalog_names", "det_hessian",
    "fit_action", "frequency", "jacobian", "model", "run_cli", "scaling", "validate", "verify_box",
]


def _tol(tol):
    return _json.dumps(tol) if tol else ""


def model(spec_or_name):
    """A catalog name, a model dict, or a Model."""
    if isinstance(spec_or_name, Model):
        return spec_or_name
    if isinstance(spec_or_name, str):
        return Model.catalog(spec_or_name)
    return Model.from_json(_json.dumps(spec_or_name))


def validate(m, tol=None):
    return _json.loads(_kprobe.validate(model(m), _tol(tol)))


def det_hessian(m, F, tol=None):
    return _json.loads(_kprobe.det_hessian(model(m), list(F), _tol(tol)))


def fit_action(m, factor=1, tol=None):
    return _json.loads(_kprobe.fit_action(model(m), factor, _tol(tol)))


def scaling(m, direction=None, tmin=1e-12, tmax=1e-3, points=40, tol=None):
    m = model(m)
    direction = [1.0] * m.k if direction is None else list(direction)
    return _json.loads(_kprobe.scaling(m, direction, tmin, tmax, points, _tol(tol)))


def verify_box(m, lower, upper, samples=500, seed=0, tol=None):
    return _json.loads(_kprobe.verify_box(model(m), list(lower), list(upper), samples, seed, _tol(tol)))
