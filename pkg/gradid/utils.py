import ast
import csv
import io
import re

from .errors import ConfigError
from .experiment import ResultRow, VarianceRow

RESULT_HEADER = list(ResultRow._fields)
VARIANCE_HEADER = list(VarianceRow._fields)

FLOAT_FORMAT = '%.17g'


def parse_parameters(text):
    """
    Parse key: literal pairs, one per line. Blank lines and lines starting
    with # are ignored.

    >>> parse_parameters("# comment\\nseed: 3\\nmu: [0.5, 1]\\n")
    {'seed': 3, 'mu': [0.5, 1]}
    """
    params = {}
    for number, line in enumerate(text.splitlines(), start=1):
        if not line.strip() or line.lstrip().startswith('#'):
            continue
        match = re.match(r'^\s*(\w[\w-]*)\s*:\s*(.*?)\s*$', line)
        if match is None:
            raise ConfigError("Line %s is not a key: value pair: %r" %
                              (number, line))
        key, value = match.groups()
        if key in params:
            raise ConfigError("Key %s is defined twice" % key)
        try:
            params[key] = ast.literal_eval(value)
        except (ValueError, SyntaxError):
            raise ConfigError("Cannot parse the value of %s: %r" %
                              (key, value))
    return params


def import_parameters_from_file(parameters_file):
    """
    Try importing a parameter dictionary from file.

    We expect values in parameters_file to be defined as follows:
        param1: value1
        param2: [value2, value3]
    """
    try:
        with open(parameters_file, 'r') as f:
            text = f.read()
    except OSError as e:
        raise ConfigError("Cannot read %s: %s" % (parameters_file, e))
    return parse_parameters(text)


################
# Result files #
################

def _format(value):
    if value is None:
        return ''
    if isinstance(value, float):
        return FLOAT_FORMAT % value
    return str(value)


def _parse(value):
    return None if value == '' else float(value)


def _write(header, rows):
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator='\n')
    writer.writerow(header)
    for row in rows:
        writer.writerow([_format(x) for x in row])
    return buffer.getvalue()


def _read(header, text):
    reader = csv.reader(io.StringIO(text))
    try:
        found = next(reader)
    except StopIteration:
        raise ValueError("Empty result file")
    if found != header:
        raise ValueError("Unexpected header %s, expected %s" %
                         (found, header))
    return [row for row in reader if row]


def format_result_rows(rows):
    """
    Render ResultRows as comma-separated values with a header row. Floats
    use 17 significant digits, missing oracle fields are left empty.

    >>> from gradid.experiment import ResultRow
    >>> print(format_result_rows([ResultRow('bonnet', 'mu', '0', 0.5, 0.25,
    ...                                     None, None, None)]), end='')
    estimator_id,target,coord,estimate,std_error,oracle,abs_error,z_score
    bonnet,mu,0,0.5,0.25,,,
    """
    return _write(RESULT_HEADER, rows)


def parse_result_rows(text):
    """
    Read back the output of format_result_rows.
    """
    return [ResultRow(e, t, c, *[_parse(x) for x in values])
            for e, t, c, *values in _read(RESULT_HEADER, text)]


def format_variance_rows(rows):
    return _write(VARIANCE_HEADER, rows)


def parse_variance_rows(text):
    return [VarianceRow(e, t, c, *[_parse(x) for x in values])
            for e, t, c, *values in _read(VARIANCE_HEADER, text)]
