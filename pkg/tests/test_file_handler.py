import logging

import pandas as pd
import pytest

from src.file_handler.file_handler import Config_File_Handler, Csv_File_Handler


def test_shipped_config():
    handler = Config_File_Handler()
    q = handler.quadrature_config()
    assert (q.scheme, q.nodes, q.abs_tol, q.max_shape) == ('gauss-laguerre', 64, 1e-10, 150.0)
    assert handler.ode_settings().min_intervals == 2000
    assert handler.ode_settings().max_intervals == 500000
    assert handler.grid_settings().pdf_points == 600
    assert handler.grid_settings().decay_steps == 500
    assert handler.compare_settings().route_tol == 1e-8
    assert handler.regime_thresholds().zeno_gamma_tau == 1.0
    assert handler.log_level() == 'INFO'


def test_missing_config_uses_defaults(tmp_path, caplog):
    with caplog.at_level(logging.WARNING):
        handler = Config_File_Handler(tmp_path / 'missing.ini')
    assert "not found" in caplog.text
    assert handler.quadrature_config().nodes == 64
    assert handler.compare_settings().method_disagreement_tol == 1e-6


def test_partial_config(tmp_path):
    config_file = tmp_path / 'partial.ini'
    config_file.write_text("[quadrature]\nscheme = adaptive-subdivision\nnodes = 32\n\n[logging]\nlevel = DEBUG\n")
    handler = Config_File_Handler(config_file)
    assert handler.quadrature_config().scheme == 'adaptive-subdivision'
    assert handler.quadrature_config().nodes == 32
    assert handler.quadrature_config().abs_tol == 1e-10
    assert handler.log_level() == 'DEBUG'


def test_invalid_config_value(tmp_path):
    config_file = tmp_path / 'broken.ini'
    config_file.write_text("[quadrature]\nscheme = simpson\n")
    with pytest.raises(ValueError, match="scheme"):
        Config_File_Handler(config_file).quadrature_config()


def test_csv_format():
    df = pd.DataFrame({'a': [0.1, 1.0 / 3.0], 'b': [1.0, 2.5e-20]})
    assert Csv_File_Handler().to_csv_text(df) == "a,b\n0.1,1\n0.333333333333333,2.5e-20\n"


def test_csv_save_and_load(tmp_path):
    df = pd.DataFrame({'t': [0.0, 0.5], 'z': [1.0, 0.2]})
    target = tmp_path / 'nested' / 'table.csv'
    handler = Csv_File_Handler(target)
    handler.save(df)
    assert target.read_bytes() == b"t,z\n0,1\n0.5,0.2\n"
    pd.testing.assert_frame_equal(handler.load_csv(), df)


def test_csv_save_to_stdout(capsys):
    Csv_File_Handler().save(pd.DataFrame({'x': [2.0]}))
    assert capsys.readouterr().out == "x\n2\n"
    with pytest.raises(ValueError):
        Csv_File_Handler().load_csv()
