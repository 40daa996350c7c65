"""
Test the structured log output.
"""
import json

from udatalog.core.logging import configure_logging, get_logger


def test_log_lines_are_json(capsys):
    """Test a log call writes one sorted JSON object to stderr."""
    configure_logging("INFO")
    get_logger("udatalog.tests").info("fixpoint done", strata=3)
    line = capsys.readouterr().err.strip().splitlines()[-1]
    record = json.loads(line)
    assert record["event"] == "fixpoint done"
    assert record["strata"] == 3
    assert record["level"] == "info"
    assert record["logger"] == "udatalog.tests"
    assert list(record) == sorted(record)


def test_debug_lines_are_filtered_at_info(capsys):
    """Test the configured level drops lower records."""
    configure_logging("INFO")
    get_logger("udatalog.tests").debug("hidden")
    assert "hidden" not in capsys.readouterr().err
