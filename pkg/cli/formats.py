"""
Readers and writers for the CLI's file formats.

Every record is rendered by its DRF serializer to a flat row. List-valued
fields (allocation weights and multipliers) are spread over numbered
columns ``key_1 .. key_k`` in CSV and JSON alike, so the two formats carry
the same columns and both parse back through the same serializer.
"""
import csv
import io
import json
import math
import re
from pathlib import Path

from rest_framework import serializers
from rest_framework.renderers import JSONRenderer

from bounds.serializers import VariableSpecSerializer
from portfolio.serializers import InvestmentSerializer

from .config import OutputFormat
from .exceptions import InputParseError

TABLE_PRECISION = '.6g'


def flatten_row(row):
    flat = {}
    for key, value in row.items():
        if isinstance(value, (list, tuple)):
            for position, item in enumerate(value, start=1):
                flat[f"{key}_{position}"] = item
        else:
            flat[key] = value
    return flat


def unflatten_row(row, list_fields):
    row = dict(row)
    for field in list_fields:
        pattern = re.compile(rf"^{re.escape(field)}_(\d+)$")
        numbered = sorted(
            (int(match.group(1)), key)
            for key in row
            if (match := pattern.match(key))
        )
        if numbered:
            row[field] = [row.pop(key) for _, key in numbered]
    return row


def list_fields(serializer_class):
    return [name for name, field in serializer_class().fields.items() if isinstance(field, serializers.ListField)]


def _first_error(errors):
    column, messages = next(iter(errors.items()))
    if isinstance(messages, dict):
        return _first_error(messages)
    if isinstance(messages, list) and messages and isinstance(messages[0], dict):
        return _first_error(messages[0])
    message = messages[0] if isinstance(messages, list) else messages
    return (None if column == 'non_field_errors' else column), str(message)


def parse_row(serializer_class, row, line):
    serializer = serializer_class(data=row)
    if not serializer.is_valid():
        column, message = _first_error(serializer.errors)
        raise InputParseError(message, line=line, column=column)
    return serializer.save()


def _csv_rows(path):
    with open(path, encoding='utf-8', newline='') as handle:
        reader = csv.DictReader(handle)
        if reader.fieldnames is None:
            raise InputParseError('the file is empty', line=1)
        for row in reader:
            if None in row:
                raise InputParseError('too many fields', line=reader.line_num)
            yield reader.line_num, {key: (None if value in ('', None) else value) for key, value in row.items()}


def read_csv(path, serializer_class):
    """Parse a CSV file into records; errors name the CSV line and column."""
    fields = list_fields(serializer_class)
    try:
        return [parse_row(serializer_class, unflatten_row(row, fields), line) for line, row in _csv_rows(path)]
    except (csv.Error, UnicodeDecodeError) as exc:
        raise InputParseError(str(exc)) from exc


def read_json(path, serializer_class):
    with open(path, encoding='utf-8') as handle:
        try:
            rows = json.load(handle)
        except json.JSONDecodeError as exc:
            raise InputParseError(exc.msg, line=exc.lineno) from exc
    if not isinstance(rows, list):
        raise InputParseError('expected an array of objects', line=1)
    fields = list_fields(serializer_class)
    # JSON has no row lines; errors name the 1-based record number instead.
    return [parse_row(serializer_class, unflatten_row(row, fields), number) for number, row in enumerate(rows, 1)]


def read_records(path, serializer_class):
    if Path(path).suffix.lower() == '.json':
        return read_json(path, serializer_class)
    return read_csv(path, serializer_class)


def read_variables(path):
    return read_csv(path, VariableSpecSerializer)


def read_investments(path):
    return read_csv(path, InvestmentSerializer)


def _csv_cell(value):
    if value is None:
        return ''
    if isinstance(value, bool):
        return 'true' if value else 'false'
    if isinstance(value, float):
        return format(value, '.17g')
    return str(value)


def _table_cell(value):
    if isinstance(value, float) and math.isfinite(value):
        return format(value, TABLE_PRECISION)
    return _csv_cell(value)


def render_csv(rows):
    if not rows:
        return ''
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator='\n')
    writer.writerow(rows[0].keys())
    writer.writerows([_csv_cell(value) for value in row.values()] for row in rows)
    return buffer.getvalue()


def render_json(rows):
    return JSONRenderer().render(rows, renderer_context={'indent': 2}).decode('utf-8') + '\n'


def render_table(rows):
    if not rows:
        return ''
    header = list(rows[0].keys())
    cells = [[_table_cell(value) for value in row.values()] for row in rows]
    widths = [max(len(str(column)), *(len(line[k]) for line in cells)) for k, column in enumerate(header)]
    lines = ['  '.join(str(column).rjust(width) for column, width in zip(header, widths))]
    lines.extend('  '.join(cell.rjust(width) for cell, width in zip(line, widths)) for line in cells)
    return '\n'.join(lines) + '\n'


RENDERERS = {
    OutputFormat.CSV: render_csv,
    OutputFormat.JSON: render_json,
    OutputFormat.TABLE: render_table,
}


def render(data, output_format):
    """Render serializer output (one dict per record) in ``output_format``."""
    rows = [flatten_row(row) for row in data]
    return RENDERERS[OutputFormat(output_format)](rows)


def emit(stdout, data, output_format, out=None):
    text = render(data, output_format)
    if out:
        with open(out, 'w', encoding='utf-8', newline='') as handle:
            handle.write(text)
    else:
        stdout.write(text, ending='')
