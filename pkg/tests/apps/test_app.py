import pytest

pytest.importorskip('nomad')


def test_importing_app():
    # this will raise an exception if pydantic model validation fails for the app
    from nomad_flag_dt_plugin.apps import app_entry_point

    assert app_entry_point.app.label == 'Flag DT'
    assert app_entry_point.app.path == 'flagdt'
