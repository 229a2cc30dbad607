"""
Tests for the symred command line and settings loading
"""

import json

import pytest

from src.cli import EXIT_FAIL, EXIT_INPUT_ERROR, EXIT_PASS, main
from src.scenarios import bundled_scenarios
from src.settings import DEFAULT_SETTINGS, load_settings


def bundled(name):
    return str(bundled_scenarios()[name])


class TestSettings:

    def test_defaults(self):
        assert load_settings() == DEFAULT_SETTINGS
        assert load_settings() is not DEFAULT_SETTINGS

    def test_yaml_override_is_merged(self, tmp_path):
        path = tmp_path / 'override.yaml'
        path.write_text("numeric:\n  rk4_step: 0.01\nreport:\n  indent: 4\n")
        settings = load_settings(str(path))
        assert settings['numeric']['rk4_step'] == 0.01
        assert settings['numeric']['fd_step'] == DEFAULT_SETTINGS['numeric']['fd_step']
        assert settings['report']['indent'] == 4

    def test_non_mapping_rejected(self, tmp_path):
        path = tmp_path / 'bad.yaml'
        path.write_text("- just\n- a list\n")
        with pytest.raises(ValueError):
            load_settings(str(path))


class TestAdHocCommands:

    def test_verdict_classical(self, capsys):
        code = main(['verdict', '--s', '3', '--k1', '2', '--eq-invariant', '--sys-invariant'])
        assert code == EXIT_PASS
        assert capsys.readouterr().out.strip() == 'classical-invariant'

    def test_verdict_inconclusive(self, capsys):
        main(['verdict', '--s', '2', '--k1', '2', '--eq-invariant', '--sys-invariant'])
        assert capsys.readouterr().out.strip() == 'inconclusive'

    def test_check_invariant(self, capsys):
        code = main(['check', '--constraint', 'u[x,x] = u[x]^3', '--field', 'u*u[x]'])
        assert code == EXIT_PASS
        assert capsys.readouterr().out.strip() == '0'

    def test_check_defect(self, capsys):
        code = main(['check', '--constraint', 'u[x,x] = u[x]^3', '--field', 'u'])
        assert code == EXIT_FAIL
        assert capsys.readouterr().out.strip() == '-2*u[x]^3'

    def test_check_with_function_symbol(self, capsys):
        code = main(['check', '--constraint', 'u[x,x] = u[x]^3', '--field', 'h(u + 1/u[x])'])
        assert code == EXIT_PASS

    def test_linearize(self, capsys):
        code = main(['linearize', '--eq', 'u[x,y] = 2*exp(u)'])
        assert code == EXIT_PASS
        out = capsys.readouterr().out
        assert 'w[x,y]' in out
        assert 'exp(u)' in out

    def test_commutator(self, capsys):
        code = main(['commutator', '--f1', 'u*u[x]', '--f2', 'u[x]'])
        assert code == EXIT_PASS
        assert capsys.readouterr().out.strip() == '0'

    def test_map_solution(self, capsys):
        code = main(['map-solution', '--field', 'u[x] - u[y]', '--seed', 'ln(1/(x + y)^2)',
                     '--indep', 'x,y'])
        assert code == EXIT_PASS
        assert capsys.readouterr().out.strip() == '0'

    def test_determine(self, capsys):
        code = main(['determine', '--constraint', 'u[x,x] = u[x]^3',
                     '--template', 'c1*u*u[x] + c2*u^2', '--unknowns', 'c1,c2'])
        assert code == EXIT_PASS
        out = capsys.readouterr().out.splitlines()
        assert out[0] == 'dimension 1'
        assert out[1] == 'c1 = 1, c2 = 0'

    def test_reduce(self, capsys):
        code = main(['reduce', '--eq', 'u[t] = u[x,x]', '--ansatz', 'phi1 + phi2*x^2',
                     '--reduced', 'phi1(t), phi2(t)'])
        assert code == EXIT_PASS
        lines = capsys.readouterr().out.splitlines()
        assert len(lines) == 2
        assert any('d(phi2,1)(t)' in line for line in lines)

    def test_syntax_error_exit_code(self, capsys):
        code = main(['linearize', '--eq', 'u[x] + * 2'])
        assert code == EXIT_INPUT_ERROR
        assert 'DSLSyntaxError' in capsys.readouterr().err


class TestScenarioCommands:

    def test_scenarios_listing(self, capsys):
        assert main(['scenarios']) == EXIT_PASS
        out = capsys.readouterr().out
        for name in bundled_scenarios():
            assert name in out

    def test_run_with_json_report(self, tmp_path, capsys):
        report_path = tmp_path / 'report.json'
        code = main(['-q', 'run', bundled('heat_quadratic'), '--json', str(report_path)])
        assert code == EXIT_PASS
        report = json.loads(report_path.read_text())
        assert report['tool'] == 'symred'
        assert report['summary']['failed'] == 0
        assert 'PASS reduce' in capsys.readouterr().out

    def test_run_without_files(self, capsys):
        assert main(['run']) == EXIT_INPUT_ERROR

    def test_run_failing_check(self, tmp_path):
        path = tmp_path / 'failing.sym'
        path.write_text("indep x;\nconstraint u[x,x] = u[x]^3;\nfield Q = u;\ncheck Q on constraint;\n")
        assert main(['-q', 'run', str(path)]) == EXIT_FAIL

    def test_run_undeclared_identifier(self, tmp_path, capsys):
        path = tmp_path / 'undeclared.sym'
        path.write_text("indep x;\nconstraint u[x,x] = v;\n")
        assert main(['-q', 'run', str(path)]) == EXIT_INPUT_ERROR
        assert 'UndeclaredIdentifierError' in capsys.readouterr().err

    def test_run_missing_file(self, tmp_path):
        assert main(['-q', 'run', str(tmp_path / 'absent.sym')]) == EXIT_INPUT_ERROR

    def test_bad_config(self, tmp_path):
        path = tmp_path / 'bad.yaml'
        path.write_text("- not a mapping\n")
        assert main(['--config', str(path), 'scenarios']) == EXIT_INPUT_ERROR

    def test_solve_reduced(self, capsys):
        code = main(['-q', 'solve-reduced', bundled('heat_quadratic'), '--numeric', 'H',
                     '--equation', 'Heat'])
        assert code == EXIT_PASS
        record = json.loads(capsys.readouterr().out)
        assert record['kind'] == 'integrate'
        assert record['outcome']['steps'] == 100

    def test_residual(self, capsys):
        code = main(['-q', 'residual', bundled('liouville_moutard'), '--equation', 'Liouville',
                     '--solution', 'Rational', '--numeric', 'Quadrant'])
        assert code == EXIT_PASS
        record = json.loads(capsys.readouterr().out)
        assert record['outcome']['max_residual'] < 1e-8
