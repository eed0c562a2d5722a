import validate


def test_project_layout_is_complete():
    assert validate.check_file_structure()


def test_worked_example_check_passes(capsys):
    assert validate.check_worked_example()
    assert 'd_s = 0.7000' in capsys.readouterr().out


def test_missing_files_are_reported(tmp_path, capsys):
    assert not validate.check_file_structure(str(tmp_path))
    assert 'MISSING' in capsys.readouterr().out


def test_logging_check_is_console_only_under_tests():
    assert validate.check_logs()
