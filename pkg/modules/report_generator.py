"""
Run outputs: snapshot and centerline CSV files, JSON run manifest, HTML run
summary and the plot script for the external plotting tool
"""

import csv
import json
import os
import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

import numpy as np
from jinja2 import Template

import config
from modules.errors import AlignmentError, ParameterError
from modules.simulation import centerline_amplitude
from modules.utils import format_cycle, get_timestamp, sanitize_filename

logger = logging.getLogger(__name__)

CENTERLINE_COLUMNS = ("t_hat", "cycle", "v_hat", "w_hat", "c_hat", "mu_hat")

# ============================================================================
# NUMBER FORMAT
# ============================================================================

def format_number(value: float) -> str:
    """
    Shortest decimal text that reads back to the same double

    Integral values drop the trailing '.0' (0.0 -> '0', 2.0 -> '2').
    """
    text = repr(float(value))
    if text.endswith('.0'):
        text = text[:-2]
    return text

# ============================================================================
# CSV FILES
# ============================================================================

def write_snapshot_csv(snapshot, path: str) -> str:
    """
    Write one snapshot as r_hat,v_hat,w_hat,c_hat,mu_hat,h_hat rows

    Args:
        snapshot: Snapshot record
        path: Output file

    Returns:
        The path written

    Raises:
        OSError: File cannot be written
        AlignmentError: Profiles of different lengths
    """
    columns = [snapshot.r, snapshot.v, snapshot.w, snapshot.c, snapshot.mu, snapshot.h]
    if len({len(col) for col in columns}) != 1:
        raise AlignmentError("snapshot profiles are not aligned")

    with open(path, 'w', newline='', encoding='utf-8') as f:
        writer = csv.writer(f, lineterminator='\n')
        writer.writerow(config.SNAPSHOT_COLUMNS)
        for row in zip(*columns):
            writer.writerow([format_number(x) for x in row])

    logger.info(f"Snapshot at cycle {snapshot.cycle_count:g} saved to: {path}")
    return path


def read_snapshot_csv(path: str) -> Dict[str, np.ndarray]:
    """
    Read a snapshot CSV back into columns keyed by header name

    Raises:
        OSError: File cannot be read
        ValueError: Header differs from the snapshot layout
    """
    with open(path, newline='', encoding='utf-8') as f:
        reader = csv.reader(f)
        header = next(reader)
        if tuple(header) != config.SNAPSHOT_COLUMNS:
            raise ValueError(f"unexpected snapshot header: {','.join(header)}")
        rows = [[float(x) for x in row] for row in reader if row]

    data = np.array(rows, dtype=float).reshape(-1, len(header))
    return {name: data[:, k] for k, name in enumerate(header)}


def write_centerline_csv(history, path: str) -> str:
    """Write the centerline history (one row per accepted step)"""
    with open(path, 'w', newline='', encoding='utf-8') as f:
        writer = csv.writer(f, lineterminator='\n')
        writer.writerow(CENTERLINE_COLUMNS)
        for row in zip(history.t_hat, history.cycle, history.v, history.w, history.c, history.mu):
            writer.writerow([format_number(x) for x in row])

    logger.info(f"Centerline history ({len(history)} samples) saved to: {path}")
    return path

# ============================================================================
# RUN MANIFEST
# ============================================================================

@dataclass
class RunManifest:
    """Everything a run produced, with the configuration that produced it"""

    name: str
    config_echo: Dict[str, Any]
    params: Dict[str, Any]
    snapshot_files: List[Dict[str, Any]] = field(default_factory=list)
    centerline_file: Optional[str] = None
    plot_script: Optional[str] = None
    stats: Dict[str, Any] = field(default_factory=dict)
    wall_clock: float = 0.0
    aborted: bool = False
    abort_message: str = ""
    max_stress_power: float = 0.0
    verification: Optional[Dict[str, Any]] = None
    solver_version: str = config.SOLVER_VERSION
    created: str = field(default_factory=get_timestamp)

    def to_dict(self) -> Dict[str, Any]:
        return dict(self.__dict__)

# ============================================================================
# JSON AND HTML REPORTS
# ============================================================================

def generate_json_report(data: Dict[str, Any], output_path: str) -> bool:
    """
    Write the run manifest as JSON

    Returns:
        True if successful, False otherwise
    """
    try:
        with open(output_path, 'w', encoding='utf-8') as f:
            json.dump(data, f, indent=2)

        logger.info(f"JSON manifest saved to: {output_path}")
        return True

    except OSError as e:
        logger.error(f"Error writing JSON manifest: {str(e)}")
        return False


HTML_TEMPLATE = """<!DOCTYPE html>
<html lang="en">
<head>
    <meta charset="UTF-8">
    <title>Annuflow Run - {{ name }}</title>
    <style>
        body { font-family: 'Segoe UI', Tahoma, Geneva, Verdana, sans-serif; margin: 0; color: #333; }
        .header { background: linear-gradient(135deg, #1e3c72 0%, #2a5298 100%); color: white; padding: 24px; }
        .content { padding: 24px; max-width: 1100px; }
        .section-title { color: #2a5298; border-bottom: 3px solid #667eea; padding-bottom: 6px; }
        table { border-collapse: collapse; margin-bottom: 20px; }
        th { background: #2a5298; color: white; padding: 8px 14px; text-align: left; }
        td { padding: 6px 14px; border-bottom: 1px solid #e9ecef; font-family: monospace; }
        .aborted { color: #b02a37; font-weight: bold; }
    </style>
</head>
<body>
    <div class="header">
        <h1>{{ name }}</h1>
        <div>Model {{ model }} &middot; solver {{ solver_version }} &middot; {{ created }}</div>
    </div>
    <div class="content">
        {% if aborted %}
        <p class="aborted">Integration aborted: {{ abort_message }}</p>
        {% endif %}

        <h2 class="section-title">Parameters</h2>
        <table>
            <tr><th>Parameter</th><th>Value</th></tr>
            {% for key, value in params.items() %}
            <tr><td>{{ key }}</td><td>{{ value }}</td></tr>
            {% endfor %}
        </table>

        <h2 class="section-title">Snapshots</h2>
        {% if snapshots %}
        <table>
            <tr><th>Cycle</th><th>t_hat</th><th>max |v_hat|</th><th>max |w_hat|</th><th>mu_hat (r=0.5)</th><th>File</th></tr>
            {% for snap in snapshots %}
            <tr>
                <td>{{ snap.cycle }}</td><td>{{ "%.6g"|format(snap.t_hat) }}</td>
                <td>{{ "%.6g"|format(snap.max_v) }}</td><td>{{ "%.6g"|format(snap.max_w) }}</td>
                <td>{{ "%.6g"|format(snap.mu_center) }}</td><td>{{ snap.file }}</td>
            </tr>
            {% endfor %}
        </table>
        {% else %}
        <p>No snapshots were produced.</p>
        {% endif %}

        <h2 class="section-title">Integration</h2>
        <table>
            <tr><th>Statistic</th><th>Value</th></tr>
            {% for key, value in stats.items() %}
            <tr><td>{{ key }}</td><td>{{ value }}</td></tr>
            {% endfor %}
            <tr><td>wall_clock_s</td><td>{{ "%.3f"|format(wall_clock) }}</td></tr>
            <tr><td>max_stress_power</td><td>{{ "%.6g"|format(max_stress_power) }}</td></tr>
        </table>
    </div>
</body>
</html>
"""


def generate_html_report(manifest: RunManifest, snapshots, output_path: str) -> bool:
    """
    Render the HTML run summary

    Returns:
        True if successful, False otherwise
    """
    try:
        rows = []
        for entry, snap in zip(manifest.snapshot_files, snapshots):
            rows.append({
                'cycle': entry['cycle'],
                't_hat': snap.t_hat,
                'max_v': float(np.max(np.abs(snap.v))),
                'max_w': float(np.max(np.abs(snap.w))),
                'mu_center': float(np.interp(config.CENTERLINE_R_HAT, snap.r, snap.mu)),
                'file': os.path.basename(entry['path']),
            })

        template = Template(HTML_TEMPLATE)
        html_content = template.render(
            name=manifest.name,
            model=manifest.config_echo['model']['kind'],
            solver_version=manifest.solver_version,
            created=manifest.created,
            aborted=manifest.aborted,
            abort_message=manifest.abort_message,
            params=manifest.params,
            snapshots=rows,
            stats=manifest.stats,
            wall_clock=manifest.wall_clock,
            max_stress_power=manifest.max_stress_power,
        )

        with open(output_path, 'w', encoding='utf-8') as f:
            f.write(html_content)

        logger.info(f"HTML summary saved to: {output_path}")
        return True

    except (OSError, KeyError) as e:
        logger.error(f"Error generating HTML summary: {str(e)}")
        return False


VERIFICATION_HTML_TEMPLATE = """<!DOCTYPE html>
<html lang="en">
<head>
    <meta charset="UTF-8">
    <title>Annuflow Acceptance Suite</title>
    <style>
        body { font-family: 'Segoe UI', Tahoma, Geneva, Verdana, sans-serif; margin: 0; color: #333; }
        .header { background: linear-gradient(135deg, #1e3c72 0%, #2a5298 100%); color: white; padding: 24px; }
        .content { padding: 24px; max-width: 1100px; }
        table { border-collapse: collapse; }
        th { background: #2a5298; color: white; padding: 8px 14px; text-align: left; }
        td { padding: 6px 14px; border-bottom: 1px solid #e9ecef; }
        .pass { color: #198754; font-weight: bold; }
        .fail { color: #b02a37; font-weight: bold; }
        .skip { color: #997404; }
    </style>
</head>
<body>
    <div class="header">
        <h1>Acceptance suite ({{ mode }})</h1>
        <div>Solver {{ solver_version }} &middot; {{ created }} &middot;
            {% if passed %}all checks passed{% else %}verification failed{% endif %}</div>
    </div>
    <div class="content">
        <table>
            <tr><th>Check</th><th>Description</th><th>Result</th><th>Detail</th></tr>
            {% for check in checks %}
            <tr>
                <td>{{ check.key }}</td><td>{{ check.title }}</td>
                {% if check.skipped %}<td class="skip">skipped</td>
                {% elif check.passed %}<td class="pass">pass</td>
                {% else %}<td class="fail">FAIL</td>{% endif %}
                <td>{{ check.detail }}</td>
            </tr>
            {% endfor %}
        </table>
    </div>
</body>
</html>
"""


def generate_verification_reports(report, output_dir: str,
                                  select: Optional[List[str]] = None) -> RunManifest:
    """
    Write the acceptance-suite manifest (JSON) and summary (HTML)

    Args:
        report: VerificationReport of the suite run
        output_dir: Directory to write into (created if missing)
        select: Check keys that were requested, None for all

    Returns:
        RunManifest carrying the acceptance summary

    Raises:
        OSError: The JSON manifest cannot be written
    """
    os.makedirs(output_dir, exist_ok=True)
    summary = report.as_dict()
    manifest = RunManifest(
        name="verification",
        config_echo={'mode': "fast" if summary['fast'] else "full", 'select': list(select) if select else None},
        params={},
        verification=summary,
    )

    base = os.path.join(output_dir, config.MANIFEST_FILENAME_FORMAT.format(name=manifest.name))
    if not generate_json_report(manifest.to_dict(), f"{base}.json"):
        raise OSError(f"could not write verification manifest {base}.json")

    try:
        html_content = Template(VERIFICATION_HTML_TEMPLATE).render(
            mode=manifest.config_echo['mode'],
            solver_version=manifest.solver_version,
            created=manifest.created,
            passed=summary['passed'],
            checks=summary['checks'],
        )
        with open(f"{base}.html", 'w', encoding='utf-8') as f:
            f.write(html_content)
        logger.info(f"HTML summary saved to: {base}.html")
    except OSError as e:
        logger.error(f"Error generating HTML summary: {str(e)}")

    return manifest

# ============================================================================
# PLOT SCRIPT
# ============================================================================

PLOT_TEMPLATE = """# {{ tool }} script for run '{{ name }}' (model {{ model }})
# axial forcing: p_a = {{ p_a }}, p_b = {{ p_b }}
# Render with: {{ tool }} {{ script_name }}
set datafile separator ','
set terminal pngcairo size 900,600
set key outside right
set xlabel 'r_hat'
{% for panel in panels %}
set output '{{ name }}_{{ panel.column }}.png'
set ylabel '{{ panel.column }}'
set title '{{ panel.title }}'
{{ panel.plot }}
{% endfor %}
{% if centerline %}
set xlabel 'cycles'
{% for series in centerline_series %}
set output '{{ name }}_centerline_{{ series.column }}.png'
set ylabel '{{ series.column }} at r_hat = {{ r_center }}'
set title 'Centerline {{ series.column }} vs cycles'
plot '{{ centerline }}' using 2:{{ series.index }} skip 1 with lines title '{{ series.column }}'
{% endfor %}
{% endif %}
"""

PLOT_PANELS = (
    ("v_hat", 2, "Azimuthal velocity"),
    ("w_hat", 3, "Axial velocity"),
    ("c_hat", 4, "Concentration"),
    ("mu_hat", 5, "Apparent viscosity"),
)


def emit_plot_script(manifest: RunManifest, path: str) -> str:
    """
    Write a plotting-tool script rendering v_hat, w_hat, c_hat and mu_hat against
    r_hat for every snapshot, and the centerline series against cycles

    Raises:
        OSError: File cannot be written
    """
    snapshots = [{'file': os.path.basename(entry['path']), 'cycle': entry['cycle']}
                 for entry in manifest.snapshot_files]
    centerline = os.path.basename(manifest.centerline_file) if manifest.centerline_file else None

    panels = []
    for column, index, title in PLOT_PANELS:
        curves = [f"'{snap['file']}' using 1:{index} skip 1 with lines title 'cycle {snap['cycle']:g}'"
                  for snap in snapshots]
        plot = "plot " + ", \\\n     ".join(curves) if curves else "# no snapshots"
        panels.append({'column': column, 'title': title, 'plot': plot})

    text = Template(PLOT_TEMPLATE).render(
        tool=config.PLOT_TOOL,
        name=manifest.name,
        model=manifest.config_echo['model']['kind'],
        p_a=format_number(manifest.params.get('p_a', 0.0)),
        p_b=format_number(manifest.params.get('p_b', 0.0)),
        script_name=os.path.basename(path),
        panels=panels,
        centerline=centerline,
        centerline_series=[{'column': 'mu_hat', 'index': 6}, {'column': 'w_hat', 'index': 4},
                           {'column': 'v_hat', 'index': 3}],
        r_center=config.CENTERLINE_R_HAT,
    )

    with open(path, 'w', encoding='utf-8', newline='\n') as f:
        f.write(text.rstrip('\n') + '\n')

    logger.info(f"Plot script saved to: {path}")
    return path

# ============================================================================
# CROSS-RUN COMPARISON
# ============================================================================

COMPARISON_COLUMNS = ("study", "model", "cycle", "t_hat", "v_center", "w_center", "c_center", "mu_center",
                      "max_abs_v", "max_abs_w", "w_amplitude", "mu_amplitude")

COMPARISON_TEMPLATE = """# {{ tool }} script overlaying runs {{ runs|join(', ') }}
# Render with: {{ tool }} {{ script_name }}
set datafile separator ','
set terminal pngcairo size 900,600
set key outside right
set xlabel 'r_hat'
{% for panel in panels %}
set output '{{ panel.output }}'
set ylabel '{{ panel.column }}'
set title '{{ panel.title }}, cycle {{ panel.cycle }}'
{{ panel.plot }}
{% endfor %}
"""


def comparison_rows(results) -> List[Dict[str, Any]]:
    """
    One row per (run, snapshot): centerline values, profile maxima and the
    one-cycle centerline amplitudes of w_hat and mu_hat

    Amplitudes are None when the run recorded no history over that cycle.
    """
    rows = []
    for result in results:
        for snap in result.snapshots:
            cycle = round(snap.cycle_count, 9)
            row = {
                'study': sanitize_filename(result.config.name),
                'model': result.config.model.kind.value,
                'cycle': cycle,
                't_hat': snap.t_hat,
                'max_abs_v': float(np.max(np.abs(snap.v))),
                'max_abs_w': float(np.max(np.abs(snap.w))),
            }
            for column, profile in (('v_center', snap.v), ('w_center', snap.w),
                                    ('c_center', snap.c), ('mu_center', snap.mu)):
                row[column] = float(np.interp(config.CENTERLINE_R_HAT, snap.r, profile))
            for column, field_name in (('w_amplitude', 'w'), ('mu_amplitude', 'mu')):
                try:
                    row[column] = centerline_amplitude(result.history, field_name, cycle)
                except ParameterError:
                    row[column] = None
            rows.append(row)
    return rows


def write_comparison_csv(rows: List[Dict[str, Any]], path: str) -> str:
    """Write comparison rows; missing amplitudes are left empty"""
    with open(path, 'w', newline='', encoding='utf-8') as f:
        writer = csv.writer(f, lineterminator='\n')
        writer.writerow(COMPARISON_COLUMNS)
        for row in rows:
            cells = []
            for column in COMPARISON_COLUMNS:
                value = row[column]
                if value is None:
                    cells.append('')
                elif isinstance(value, str):
                    cells.append(value)
                else:
                    cells.append(format_number(value))
            writer.writerow(cells)

    logger.info(f"Comparison table ({len(rows)} rows) saved to: {path}")
    return path


def emit_comparison_script(name: str, manifests: List[RunManifest], path: str) -> str:
    """
    Write a plotting-tool script overlaying every run's v_hat, w_hat, c_hat and
    mu_hat profiles, one figure per field and snapshot cycle

    Snapshot files are referenced relative to the script's directory.

    Raises:
        OSError: File cannot be written
    """
    base = os.path.dirname(os.path.abspath(path))
    by_cycle: Dict[float, List[tuple]] = {}
    for manifest in manifests:
        label = f"{manifest.name} ({manifest.config_echo['model']['kind']})"
        for entry in manifest.snapshot_files:
            rel = os.path.relpath(os.path.abspath(entry['path']), base).replace(os.sep, '/')
            by_cycle.setdefault(entry['cycle'], []).append((rel, label))

    panels = []
    for cycle in sorted(by_cycle):
        for column, index, title in PLOT_PANELS:
            curves = [f"'{rel}' using 1:{index} skip 1 with lines title '{label}'"
                      for rel, label in by_cycle[cycle]]
            panels.append({
                'output': f"{name}_cycle_{format_cycle(cycle)}_{column}.png",
                'column': column,
                'title': title,
                'cycle': f"{cycle:g}",
                'plot': "plot " + ", \\\n     ".join(curves),
            })

    text = Template(COMPARISON_TEMPLATE).render(
        tool=config.PLOT_TOOL,
        runs=[manifest.name for manifest in manifests],
        script_name=os.path.basename(path),
        panels=panels,
    )

    with open(path, 'w', encoding='utf-8', newline='\n') as f:
        f.write(text.rstrip('\n') + '\n')

    logger.info(f"Comparison script saved to: {path}")
    return path


def generate_comparison(results, manifests: List[RunManifest], output_dir: str,
                        name: str = "sweep") -> Dict[str, str]:
    """
    Write the cross-run comparison table and overlay script

    Args:
        results: StudyResults, in the same order as manifests
        manifests: RunManifests returned by generate_reports for those results
        output_dir: Directory receiving both files
        name: File name prefix

    Returns:
        Paths keyed 'table' and 'plot_script'
    """
    os.makedirs(output_dir, exist_ok=True)
    name = sanitize_filename(name)
    table = write_comparison_csv(
        comparison_rows(results), os.path.join(output_dir, config.COMPARISON_TABLE_FILENAME_FORMAT.format(name=name)))
    script = emit_comparison_script(
        name, manifests, os.path.join(output_dir, config.COMPARISON_SCRIPT_FILENAME_FORMAT.format(name=name)))
    return {'table': table, 'plot_script': script}

# ============================================================================
# REPORT COORDINATOR
# ============================================================================

def generate_reports(result, output_dir: str) -> RunManifest:
    """
    Write every output of a run: snapshot CSVs, centerline CSV, plot script,
    JSON manifest and HTML summary

    Args:
        result: StudyResult (possibly flagged aborted)
        output_dir: Directory to write into (created if missing)

    Returns:
        RunManifest listing every written file

    Raises:
        OSError: A data file or the manifest cannot be written
    """
    os.makedirs(output_dir, exist_ok=True)
    name = sanitize_filename(result.config.name)
    metadata = result.metadata()

    manifest = RunManifest(
        name=name,
        config_echo=metadata['config'],
        params=metadata['params'],
        stats=metadata['stats'],
        wall_clock=metadata['wall_clock_s'],
        aborted=metadata['aborted'],
        abort_message=metadata['abort_message'],
        max_stress_power=metadata['max_stress_power'],
    )

    for snap in result.snapshots:
        cycle = format_cycle(round(snap.cycle_count, 9))
        path = os.path.join(output_dir, config.SNAPSHOT_FILENAME_FORMAT.format(name=name, cycle=cycle))
        write_snapshot_csv(snap, path)
        manifest.snapshot_files.append({'cycle': round(snap.cycle_count, 9), 't_hat': snap.t_hat,
                                        'path': path})

    manifest.centerline_file = write_centerline_csv(
        result.history, os.path.join(output_dir, config.CENTERLINE_FILENAME_FORMAT.format(name=name)))
    manifest.plot_script = emit_plot_script(
        manifest, os.path.join(output_dir, config.PLOT_SCRIPT_FILENAME_FORMAT.format(name=name)))

    base = os.path.join(output_dir, config.MANIFEST_FILENAME_FORMAT.format(name=name))
    if not generate_json_report(manifest.to_dict(), f"{base}.json"):
        raise OSError(f"could not write run manifest {base}.json")
    generate_html_report(manifest, result.snapshots, f"{base}.html")

    return manifest
