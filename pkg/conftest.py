"""Run the Django app test suites (``<app>/tests.py``) under pytest."""
import os

import django

os.environ.setdefault('DJANGO_SETTINGS_MODULE', 'ubfuzz.settings')
django.setup()

collect_ignore = ['examples']

_db_state = None


def pytest_sessionstart(session):
    global _db_state
    from django.test.utils import setup_databases, setup_test_environment
    setup_test_environment()
    _db_state = setup_databases(verbosity=0, interactive=False)


def pytest_sessionfinish(session, exitstatus):
    from django.test.utils import teardown_databases, teardown_test_environment
    if _db_state is not None:
        teardown_databases(_db_state, verbosity=0)
    teardown_test_environment()
