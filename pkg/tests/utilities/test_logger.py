import regex

from supremal.utilities.logger import Logger


def test_quiet_logger_prints_nothing(capsys):
    Logger().log("info", "hidden")
    Logger(scope="suite").progress(1, 3, "hidden")
    captured = capsys.readouterr()
    assert captured.out == "" and captured.err == ""


def test_verbose_lines_go_to_stderr_with_scope(capsys):
    printer = Logger(verbose=True, scope="suite")
    printer.log("warning", "suite aborted")
    printer.progress(2, 5, "margin +0.000h on 'interior'")
    captured = capsys.readouterr()
    assert captured.out == ""
    lines = captured.err.splitlines()
    stamp = r"\[\d{4}-\d{2}-\d{2} \d{2}:\d{2}:\d{2}\]"
    assert regex.fullmatch(stamp + r"\[WARNING\]\[suite\]: suite aborted", lines[0])
    assert lines[1].endswith("[INFO][suite]: 2/5 margin +0.000h on 'interior'")


def test_unscoped_lines_have_no_scope_tag(capsys):
    Logger(verbose=True).log("info", "done")
    assert capsys.readouterr().err.rstrip().endswith("[INFO]: done")
