"""
Study configuration files

Flat sectioned key-value text:

    # comment
    model = model1
    cycles = 3.5, 12.5, 34.5

    [nondim]
    re = 10
    pe = 1000
    ...

Sections: [model], [geometry], [nondim], [grid], [integrator], [bc], [output].
Keys before the first section header may only be `model` and `cycles`.
"""

import re
import logging
from dataclasses import fields, replace
from pathlib import Path
from typing import Dict, Tuple

from modules.constitutive import ModelKind, builtin_model, validate
from modules.errors import ConfigError, ParameterError
from modules.forcing import BcKind, BcMode, WallDrive, WallKind
from modules.integrator import IntegratorConfig
from modules.simulation import NondimInputs, PhysicalInputs, StudyConfig, resolve_params

logger = logging.getLogger(__name__)

# Allowed keys per section, and whether each is required there
SECTION_KEYS = {
    'model': {'kind': False, 'alpha': False, 'beta': False, 'gamma': False, 'sigma': False, 'n': False},
    'geometry': {name: True for name in ('r_i', 'r_o', 'omega_bar', 'f_theta', 'f_z', 'a', 'b',
                                         'rho_f', 'mu0_bar', 'd_c')},
    'nondim': {'re': True, 'pe': True, 'p_f': True, 'p_g': True, 'p_a': False, 'p_b': False,
               'p_beta': False, 'p_gamma': False, 'omega_bar': False},
    'grid': {'n_nodes': False},
    'integrator': {name: False for name in ('rel_tol', 'abs_tol', 'newton_tol', 'max_newton',
                                            'dt_init', 'dt_max', 'safety', 'max_rejections')},
    'bc': {name: False for name in ('mode', 'c_tilde', 'c_bar', 'r_bar_hat', 'wall', 'wall_value')},
    'output': {'cycles': False, 'name': False},
}

DEFAULT_NAME = next(f.default for f in fields(StudyConfig) if f.name == "name")

ROOT_KEYS = {'model': ('model', 'kind'), 'cycles': ('output', 'cycles')}

INTEGER_KEYS = {'n_nodes', 'max_newton', 'max_rejections'}
TEXT_KEYS = {'kind', 'mode', 'wall', 'name', 'cycles'}

SECTION_RE = re.compile(r'^\[\s*([A-Za-z_]+)\s*\]$')

# Entry: value text and its line number
Entry = Tuple[str, int]


def _parse_lines(text: str) -> Dict[str, Dict[str, Entry]]:
    """Split config text into {section: {key: (value, line)}}"""
    sections: Dict[str, Dict[str, Entry]] = {}
    declared = set()
    current = None

    for line_number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split('#', 1)[0].strip()
        if not line:
            continue

        header = SECTION_RE.match(line)
        if header:
            current = header.group(1).lower()
            if current not in SECTION_KEYS:
                raise ConfigError(f"unknown section [{current}]", line_number, current)
            if current in declared:
                raise ConfigError(f"duplicate section [{current}]", line_number, current)
            declared.add(current)
            sections.setdefault(current, {})
            continue

        if '=' not in line:
            raise ConfigError(f"expected 'key = value', got '{line}'", line_number)

        key, value = (part.strip() for part in line.split('=', 1))
        key = key.lower()
        if not key or not value:
            raise ConfigError(f"empty key or value in '{line}'", line_number, key or None)

        if current is None:
            if key not in ROOT_KEYS:
                raise ConfigError(f"unknown key '{key}' outside any section", line_number, key)
            section, key = ROOT_KEYS[key]
        else:
            section = current
            if key not in SECTION_KEYS[section]:
                raise ConfigError(f"unknown key '{key}' in [{section}]", line_number, key)

        entries = sections.setdefault(section, {})
        if key in entries:
            raise ConfigError(f"duplicate key '{key}' in [{section}]", line_number, key)
        entries[key] = (value, line_number)

    return sections


def _convert(key: str, entry: Entry):
    value, line_number = entry
    if key in TEXT_KEYS:
        return value
    try:
        if key in INTEGER_KEYS:
            return int(value)
        return float(value)
    except ValueError:
        kind = "an integer" if key in INTEGER_KEYS else "a number"
        raise ConfigError(f"'{key}' must be {kind} (got '{value}')", line_number, key)


def _section_values(sections, name: str) -> dict:
    entries = sections.get(name, {})
    values = {key: _convert(key, entry) for key, entry in entries.items()}
    if name in sections:
        for key, required in SECTION_KEYS[name].items():
            if required and key not in values:
                raise ConfigError(f"[{name}] is missing required key '{key}'", key=key)
    return values


def _line_of(sections, key: str):
    for entries in sections.values():
        if key in entries:
            return entries[key][1]
    return None


def _parse_cycles(entry: Entry) -> tuple:
    text, line_number = entry
    try:
        cycles = tuple(float(part) for part in text.split(',') if part.strip())
    except ValueError:
        raise ConfigError(f"cycles must be a comma-separated list of numbers (got '{text}')",
                          line_number, 'cycles')
    if not cycles:
        raise ConfigError("cycles list is empty", line_number, 'cycles')
    return cycles


def _enum_value(enum_cls, key: str, sections, section: str):
    value, line_number = sections[section][key]
    try:
        return enum_cls(value.strip().lower())
    except ValueError:
        allowed = '|'.join(member.value for member in enum_cls)
        raise ConfigError(f"'{key}' must be one of {allowed} (got '{value}')", line_number, key)


def _guess_key(sections, message: str):
    for entries in sections.values():
        for key in entries:
            if re.search(rf'\b{re.escape(key)}\b', message):
                return key
    return None


def parse_config(text: str) -> StudyConfig:
    """
    Parse and validate a study configuration

    Args:
        text: Configuration text

    Returns:
        Validated StudyConfig

    Raises:
        ConfigError: Syntax error (with line number), unknown key, or a value
            failing validation (naming the key)
    """
    sections = _parse_lines(text)

    if ('geometry' in sections) == ('nondim' in sections):
        raise ConfigError("exactly one input group: give either [geometry] or [nondim]")

    # Model
    model_values = _section_values(sections, 'model')
    if 'kind' not in model_values:
        raise ConfigError("model kind is required (root 'model = ...' or [model] kind)", key='kind')
    try:
        model = builtin_model(ModelKind.parse(model_values.pop('kind')))
    except ParameterError as e:
        raise ConfigError(str(e), _line_of(sections, 'kind'), 'kind')
    if 'n' in model_values:
        model_values['n_const'] = model_values.pop('n')
    if model_values:
        model = model.with_overrides(**model_values)

    report = validate(model)
    if not report.ok:
        problem = report.violations[0]
        key = problem.split()[0] if problem.split()[0] in SECTION_KEYS["model"] else None
        raise ConfigError(f"invalid model parameters: {', '.join(report.violations)}",
                          _line_of(sections, key) if key else None, key)

    options = {}
    try:
        if 'geometry' in sections:
            options['physical'] = PhysicalInputs(**_section_values(sections, 'geometry'))
        else:
            options['nondim'] = NondimInputs(**_section_values(sections, 'nondim'))

        grid_values = _section_values(sections, 'grid')
        if 'n_nodes' in grid_values:
            options['n_nodes'] = grid_values['n_nodes']

        options['integrator'] = IntegratorConfig(**_section_values(sections, 'integrator'))

        bc_values = _section_values(sections, 'bc')
        bc_args = {key: bc_values[key] for key in ('c_tilde', 'c_bar', 'r_bar_hat') if key in bc_values}
        if 'mode' in bc_values:
            bc_args['kind'] = _enum_value(BcKind, 'mode', sections, 'bc')
        options['bc_mode'] = BcMode(**bc_args)

        wall_args = {}
        if 'wall' in bc_values:
            wall_args['kind'] = _enum_value(WallKind, 'wall', sections, 'bc')
        if 'wall_value' in bc_values:
            wall_args['value'] = bc_values['wall_value']
        options['wall'] = WallDrive(**wall_args)

        output = sections.get('output', {})
        if 'cycles' in output:
            options['cycles'] = _parse_cycles(output['cycles'])
        if 'name' in output:
            options['name'] = output['name'][0]

        study = StudyConfig(model=model, **options)
        resolve_params(study)
    except ParameterError as e:
        key = _guess_key(sections, str(e))
        raise ConfigError(str(e), _line_of(sections, key) if key else None, key)

    if study.n_nodes < 5:
        raise ConfigError(f"n_nodes must be >= 5 (got {study.n_nodes})",
                          _line_of(sections, 'n_nodes'), 'n_nodes')

    logger.debug(f"Parsed study '{study.name}' ({model.kind.value})")
    return study


def load_config(path) -> StudyConfig:
    """
    Read and parse a study file

    Raises:
        OSError: File cannot be read
        ConfigError: Invalid contents
    """
    path = Path(path)
    study = parse_config(path.read_text(encoding="utf-8"))
    if study.name == DEFAULT_NAME:
        study = replace(study, name=path.stem)
    return study
